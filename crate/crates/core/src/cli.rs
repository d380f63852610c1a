//! Command-line front end.
//!
//! Every command writes one JSON report (command, inputs digest, tolerances,
//! seed, results, residuals) and, for `sweep` and `region`, a CSV. Exit codes:
//! 0 success, 2 when the analysis answers "no" (failed check, infeasible),
//! 1 for IO, schema and software errors.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::algebras::{commutant, OperatorBasisSet};
use crate::capacity::{observable_capacity, CapacityOptions};
use crate::catalog::{self, ExampleBundle, ExampleId};
use crate::channels::{Channel, DiscreteObservable};
use crate::correction::{self, CodeSubspace};
use crate::decoherence::{self, StochasticMap};
use crate::error::Error;
use crate::numlin::{paulis, ComplexMatrix, Tolerance, C64};

pub const SEED_ENV: &str = "QICHAN_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: schema error at `{field}`: {message}")]
    Schema { path: String, field: String, message: String },
    #[error("{path}: {invariant} violated (residual {residual:e})")]
    Validation { path: String, invariant: String, residual: f64 },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Analysis(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "qichan", version, about = "Analyse what a quantum channel preserves, corrects and leaks")]
pub struct Cli {
    /// Residual tolerance (abs_eps).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Relative singular-value cut for ranks and nullspaces.
    #[arg(long, global = true)]
    pub rank_tol: Option<f64>,
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Random observables drawn by `classical`, and by `example` checks.
    #[arg(long, global = true, default_value_t = 64)]
    pub samples: usize,
    /// Output file (stdout if omitted). With `--format csv` the JSON report
    /// goes next to it, with `.json` appended.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Check that a channel file is trace preserving and completely positive.
    Validate { channel: PathBuf },
    /// Sharp preserved algebra and its block structure.
    Preserved { channel: PathBuf },
    /// Correction channel with the residuals certifying it.
    Correct { channel: PathBuf },
    /// Pointer algebra A_E ∩ A_{E_c}.
    Pointer { channel: PathBuf },
    /// Knill–Laflamme conditions on a code.
    Kl {
        channel: PathBuf,
        #[command(flatten)]
        code: CodeArgs,
    },
    /// Operator (subsystem) code conditions on a code factored as A ⊗ B.
    Oqec {
        channel: PathBuf,
        #[command(flatten)]
        code: CodeArgs,
        /// d_A,d_B
        #[arg(long, value_delimiter = ',', required = true)]
        factors: Vec<usize>,
    },
    /// Coarse-graining of preserved observables into Γ: random preserved
    /// observables, or a single X with `--observable`.
    Classical {
        channel: PathBuf,
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long)]
        observable: Option<PathBuf>,
    },
    /// Sharp information available to every output subsystem.
    Broadcast {
        channel: PathBuf,
        /// Output tensor factors, e.g. 3,3.
        #[arg(long, value_delimiter = ',', required = true)]
        factors: Vec<usize>,
    },
    /// Gradual dephasing γ_im(t).
    Sweep {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        period: f64,
        /// Number of equally spaced times in [0, T].
        #[arg(long, default_value_t = 11)]
        points: usize,
        /// Observable file whose effects are the projectors P_i
        /// (computational basis of C^n if omitted).
        #[arg(long)]
        projectors: Option<PathBuf>,
    },
    /// Sample of the preserved effects of a qubit-input channel.
    Region {
        channel: PathBuf,
        #[arg(long, default_value_t = 6)]
        grid: usize,
    },
    /// Lower bound on the classical capacity of an observable.
    Capacity {
        observable: PathBuf,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
    /// Build a worked example and run its checks; `all` runs every one.
    Example {
        id: String,
        /// Also write the example's channel file here.
        #[arg(long)]
        channel_out: Option<PathBuf>,
    },
}

#[derive(Clone, Debug, clap::Args, Serialize)]
pub struct CodeArgs {
    /// Code given by computational basis states, e.g. 0,7.
    #[arg(long, value_delimiter = ',', conflicts_with = "code")]
    pub code_states: Vec<usize>,
    /// Code file: {"dim": n, "code_dim": k, "isometry": [[re,im], ...]}.
    #[arg(long)]
    pub code: Option<PathBuf>,
}

/// A fully parsed invocation.
#[derive(Clone, Debug)]
pub struct AnalysisRequest {
    pub command: Command,
    pub tol: Tolerance,
    pub seed: u64,
    pub samples: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl AnalysisRequest {
    pub fn from_cli(cli: Cli) -> CliResult<Self> {
        let d = Tolerance::default();
        let tol = Tolerance::new(cli.tol.unwrap_or(d.abs_eps), cli.rank_tol.unwrap_or(d.rank_rel))?;
        Ok(AnalysisRequest { command: cli.command, tol, seed: cli.seed, samples: cli.samples, out: cli.out, format: cli.format })
    }

    fn name(&self) -> &'static str {
        match &self.command {
            Command::Validate { .. } => "validate",
            Command::Preserved { .. } => "preserved",
            Command::Correct { .. } => "correct",
            Command::Pointer { .. } => "pointer",
            Command::Kl { .. } => "kl",
            Command::Oqec { .. } => "oqec",
            Command::Classical { .. } => "classical",
            Command::Broadcast { .. } => "broadcast",
            Command::Sweep { .. } => "sweep",
            Command::Region { .. } => "region",
            Command::Capacity { .. } => "capacity",
            Command::Example { .. } => "example",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    /// SHA-256 over the command, its parameters and the bytes of every input
    /// file.
    pub inputs_digest: String,
    pub tolerances: Tolerance,
    pub seed: u64,
    pub passed: bool,
    pub results: Value,
    pub residuals: BTreeMap<String, f64>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Report,
    pub csv: Option<String>,
}

// ---- file schemas ----

#[derive(Serialize, Deserialize)]
struct ChannelFile {
    dim_in: usize,
    dim_out: usize,
    elements: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct ObservableFile {
    dim: usize,
    effects: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct CodeFile {
    dim: usize,
    code_dim: usize,
    isometry: Vec<[f64; 2]>,
}

fn flat(m: &ComplexMatrix) -> Vec<[f64; 2]> {
    m.data().iter().map(|z| [z.re, z.im]).collect()
}

fn unflat(path: &str, field: String, rows: usize, cols: usize, v: &[[f64; 2]]) -> CliResult<ComplexMatrix> {
    if v.len() != rows * cols {
        return Err(CliError::Schema {
            path: path.into(),
            field,
            message: format!("expected {} entries ({rows}x{cols}), found {}", rows * cols, v.len()),
        });
    }
    ComplexMatrix::new(rows, cols, v.iter().map(|p| C64::new(p[0], p[1])).collect())
        .map_err(|e| CliError::Schema { path: path.into(), field, message: e.to_string() })
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &str, bytes: &[u8]) -> CliResult<T> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
        path: path.into(),
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

/// Channel from JSON bytes, checking only the schema.
pub fn channel_from_json(path: &str, bytes: &[u8]) -> CliResult<Channel> {
    let f: ChannelFile = parse_json(path, bytes)?;
    if f.elements.is_empty() {
        return Err(CliError::Schema { path: path.into(), field: "elements".into(), message: "no elements".into() });
    }
    let el = f
        .elements
        .iter()
        .enumerate()
        .map(|(k, e)| unflat(path, format!("elements[{k}]"), f.dim_out, f.dim_in, e))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Channel::from_elements(el)?)
}

fn validated(path: &str, c: Channel, tol: &Tolerance) -> CliResult<Channel> {
    let r = c.validate(tol)?;
    if !r.trace_preserving {
        return Err(CliError::Validation { path: path.into(), invariant: "Σ E†E = 1".into(), residual: r.tp_residual });
    }
    Ok(c)
}

/// Reads and validates a channel file.
pub fn parse_channel_file(path: &Path, tol: &Tolerance) -> CliResult<Channel> {
    let p = path.display().to_string();
    validated(&p, channel_from_json(&p, &read(path)?)?, tol)
}

pub fn channel_to_json(c: &Channel) -> String {
    let f = ChannelFile { dim_in: c.dim_in(), dim_out: c.dim_out(), elements: c.elements().iter().map(flat).collect() };
    serde_json::to_string_pretty(&f).expect("plain data")
}

pub fn observable_from_json(path: &str, bytes: &[u8], tol: &Tolerance) -> CliResult<DiscreteObservable> {
    let f: ObservableFile = parse_json(path, bytes)?;
    let effects = f
        .effects
        .iter()
        .enumerate()
        .map(|(k, e)| unflat(path, format!("effects[{k}]"), f.dim, f.dim, e))
        .collect::<CliResult<Vec<_>>>()?;
    DiscreteObservable::new(effects, tol).map_err(|e| match e {
        Error::NotTracePreserving { residual } => {
            CliError::Validation { path: path.into(), invariant: "Σ X_i = 1".into(), residual }
        }
        Error::NotPsd { min_eigenvalue } => {
            CliError::Validation { path: path.into(), invariant: "effects in [0, 1]".into(), residual: min_eigenvalue }
        }
        other => CliError::Analysis(other),
    })
}

pub fn parse_observable_file(path: &Path, tol: &Tolerance) -> CliResult<DiscreteObservable> {
    observable_from_json(&path.display().to_string(), &read(path)?, tol)
}

pub fn observable_to_json(x: &DiscreteObservable) -> String {
    let f = ObservableFile { dim: x.dim(), effects: x.effects().iter().map(flat).collect() };
    serde_json::to_string_pretty(&f).expect("plain data")
}

fn parse_code(args: &CodeArgs, dim: usize, tol: &Tolerance, digest: &mut Sha256) -> CliResult<CodeSubspace> {
    if let Some(path) = &args.code {
        let bytes = read(path)?;
        digest.update(&bytes);
        let p = path.display().to_string();
        let f: CodeFile = parse_json(&p, &bytes)?;
        let v = unflat(&p, "isometry".into(), f.dim, f.code_dim, &f.isometry)?;
        return CodeSubspace::new(v, tol).map_err(|e| match e {
            Error::NotTracePreserving { residual } => {
                CliError::Validation { path: p, invariant: "V†V = 1".into(), residual }
            }
            other => other.into(),
        });
    }
    if args.code_states.is_empty() {
        return Err(CliError::Usage("a code is required: --code FILE or --code-states i,j,...".into()));
    }
    digest.update(format!("{:?}", args.code_states).as_bytes());
    Ok(CodeSubspace::from_basis_states(dim, &args.code_states)?)
}

// ---- JSON helpers for results ----

fn matrices(ms: &[ComplexMatrix]) -> Value {
    serde_json::to_value(ms).expect("plain data")
}

fn channel_value(c: &Channel) -> Value {
    json!({
        "dim_in": c.dim_in(),
        "dim_out": c.dim_out(),
        "elements": c.elements().iter().map(flat).collect::<Vec<_>>(),
    })
}

fn max_residual(r: &BTreeMap<String, f64>) -> f64 {
    r.values().copied().fold(0.0, f64::max)
}

struct Analysis {
    passed: bool,
    results: Value,
    residuals: BTreeMap<String, f64>,
    csv: Option<String>,
}

impl Analysis {
    fn ok(results: Value, residuals: BTreeMap<String, f64>) -> Self {
        Analysis { passed: true, results, residuals, csv: None }
    }
}

fn load_channel(path: &Path, tol: &Tolerance, digest: &mut Sha256) -> CliResult<Channel> {
    let bytes = read(path)?;
    digest.update(&bytes);
    let p = path.display().to_string();
    validated(&p, channel_from_json(&p, &bytes)?, tol)
}

fn load_observable(path: &Path, tol: &Tolerance, digest: &mut Sha256) -> CliResult<DiscreteObservable> {
    let bytes = read(path)?;
    digest.update(&bytes);
    observable_from_json(&path.display().to_string(), &bytes, tol)
}

fn algebra_value(a: &crate::algebras::AlgebraStructure) -> Value {
    json!({
        "dimension": a.dimension(),
        "block_dims": a.block_dims,
        "kind": correction::classify(a),
        "central_projectors": matrices(&a.central_projectors),
        "basis": matrices(a.carrier.basis()),
    })
}

fn analyse(req: &AnalysisRequest, digest: &mut Sha256) -> CliResult<Analysis> {
    let tol = &req.tol;
    let sqrt_eps = tol.abs_eps.sqrt();
    Ok(match &req.command {
        Command::Validate { channel } => {
            let bytes = read(channel)?;
            digest.update(&bytes);
            let c = channel_from_json(&channel.display().to_string(), &bytes)?;
            let r = c.validate(tol)?;
            let mut res = BTreeMap::new();
            res.insert("trace_preserving".into(), r.tp_residual);
            res.insert("min_choi_eigenvalue".into(), r.min_choi_eigenvalue);
            Analysis {
                passed: r.trace_preserving && r.completely_positive,
                results: serde_json::to_value(r).expect("plain data"),
                residuals: res,
                csv: None,
            }
        }
        Command::Preserved { channel } => {
            let c = load_channel(channel, tol, digest)?;
            let a = correction::preserved_algebra_with(&c, req.seed, tol, &Default::default())?;
            let mut res = BTreeMap::new();
            res.insert("block_pattern".into(), a.pattern_residual);
            res.insert("closure".into(), a.carrier.closure_residual());
            Analysis::ok(algebra_value(&a), res)
        }
        Command::Correct { channel } => {
            let c = load_channel(channel, tol, digest)?;
            let r = correction::analyze(&c, req.seed, tol)?;
            let passed = max_residual(&r.residuals) <= sqrt_eps;
            Analysis {
                passed,
                results: json!({
                    "preserved_algebra": algebra_value(&r.preserved_algebra),
                    "correction": channel_value(&r.correction),
                }),
                residuals: r.residuals,
                csv: None,
            }
        }
        Command::Pointer { channel } => {
            let c = load_channel(channel, tol, digest)?;
            let p = decoherence::pointer_algebra(&c, tol)?;
            let mut res = BTreeMap::new();
            res.insert("commutativity".into(), p.commutativity_residual);
            res.insert("block_pattern".into(), p.pointer_algebra.pattern_residual);
            Analysis::ok(
                json!({
                    "pointer_algebra": algebra_value(&p.pointer_algebra),
                    "pointer_effects": matrices(p.pointer_effects.effects()),
                }),
                res,
            )
        }
        Command::Kl { channel, code } => {
            let c = load_channel(channel, tol, digest)?;
            let code = parse_code(code, c.dim_in(), tol, digest)?;
            let r = correction::kl_check(&c, &code, tol)?;
            let mut res = BTreeMap::new();
            res.insert("kl".into(), r.residual);
            Analysis { passed: r.passes, results: serde_json::to_value(&r).expect("plain data"), residuals: res, csv: None }
        }
        Command::Oqec { channel, code, factors } => {
            let c = load_channel(channel, tol, digest)?;
            let code = parse_code(code, c.dim_in(), tol, digest)?;
            let &[da, db] = factors.as_slice() else {
                return Err(CliError::Usage("--factors takes exactly two dimensions".into()));
            };
            let r = correction::oqec_check(&c, &code, (da, db), tol)?;
            let mut res = BTreeMap::new();
            res.insert("oqec".into(), r.residual);
            Analysis {
                passed: r.passes,
                results: json!({ "passes": r.passes, "lambda": matrices(&r.lambda), "residual": r.residual }),
                residuals: res,
                csv: None,
            }
        }
        Command::Classical { channel, gamma, observable } => {
            let c = load_channel(channel, tol, digest)?;
            let g = load_observable(gamma, tol, digest)?;
            match observable {
                Some(xp) => {
                    let x = load_observable(xp, tol, digest)?;
                    let r = decoherence::coarse_grain_solve(&x, &g, tol)?;
                    let mut res = BTreeMap::new();
                    res.insert("coarse_graining".into(), r.residual());
                    Analysis { passed: r.is_feasible(), results: serde_json::to_value(&r).expect("plain data"), residuals: res, csv: None }
                }
                None => {
                    let r = decoherence::full_decoherence_check(&c, &g, req.samples, req.seed, tol)?;
                    let mut res = BTreeMap::new();
                    res.insert("coarse_graining".into(), r.max_residual);
                    if let Some(e) = r.explicit_residual {
                        res.insert("explicit_rank_one".into(), e);
                    }
                    Analysis { passed: r.all_feasible(), results: serde_json::to_value(&r).expect("plain data"), residuals: res, csv: None }
                }
            }
        }
        Command::Broadcast { channel, factors } => {
            let c = load_channel(channel, tol, digest)?;
            digest.update(format!("{factors:?}").as_bytes());
            let r = decoherence::broadcast_pointer(&c, factors, None, tol)?;
            let mut res = BTreeMap::new();
            res.insert("commutativity".into(), r.broadcast.commutativity_residual);
            Analysis::ok(
                json!({
                    "marginal_algebra_dims": r.marginal_algebra_dims,
                    "broadcast_algebra": algebra_value(&r.broadcast.pointer_algebra),
                    "pointer_effects": matrices(r.broadcast.pointer_effects.effects()),
                    "commutative": r.commutative,
                }),
                res,
            )
        }
        Command::Sweep { n, period, points, projectors } => {
            digest.update(format!("n={n} period={period} points={points}").as_bytes());
            let ps = match projectors {
                Some(p) => load_observable(p, tol, digest)?.effects().to_vec(),
                None => (0..*n).map(|i| ComplexMatrix::unit(*n, i, i)).collect(),
            };
            let times: Vec<f64> = match points {
                0 => vec![],
                1 => vec![0.0],
                k => (0..*k).map(|i| period * i as f64 / (*k - 1) as f64).collect(),
            };
            let s = decoherence::dephasing_sweep(&ps, *n, *period, &times, tol)?;
            let mut buf = Vec::new();
            s.write_csv(&mut buf).map_err(|source| CliError::Io { path: "<csv>".into(), source })?;
            Analysis {
                passed: true,
                results: json!({ "times": s.times, "gamma": s.gamma, "rows": s.times.len() * ps.len() * n }),
                residuals: BTreeMap::new(),
                csv: Some(String::from_utf8(buf).expect("ascii")),
            }
        }
        Command::Region { channel, grid } => {
            let c = load_channel(channel, tol, digest)?;
            digest.update(format!("grid={grid}").as_bytes());
            let pts = decoherence::effect_region_sample(&c, *grid, tol)?;
            let mut buf = Vec::new();
            decoherence::write_region_csv(&pts, &mut buf).map_err(|source| CliError::Io { path: "<csv>".into(), source })?;
            Analysis {
                passed: true,
                results: json!({ "points": pts }),
                residuals: BTreeMap::new(),
                csv: Some(String::from_utf8(buf).expect("ascii")),
            }
        }
        Command::Capacity { observable, restarts } => {
            let x = load_observable(observable, tol, digest)?;
            digest.update(format!("restarts={restarts}").as_bytes());
            let opts = CapacityOptions { restarts: *restarts, seed: req.seed, ..Default::default() };
            let est = observable_capacity(&x, &opts, tol)?;
            Analysis::ok(serde_json::to_value(&est).expect("plain data"), BTreeMap::new())
        }
        Command::Example { id, channel_out } => {
            digest.update(id.as_bytes());
            let ids = if id == "all" { ExampleId::all() } else { vec![id.parse::<ExampleId>()?] };
            let mut results = serde_json::Map::new();
            let mut residuals = BTreeMap::new();
            let mut passed = true;
            for id in ids {
                let bundle = catalog::example(id)?;
                if let Some(p) = channel_out {
                    fs::write(p, channel_to_json(&bundle.channel))
                        .map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
                }
                let v = verify_example(&bundle, tol, req.seed, req.samples)?;
                passed &= v.passed;
                for (k, r) in v.residuals {
                    residuals.insert(format!("{id}.{k}"), r);
                }
                results.insert(
                    id.to_string(),
                    json!({
                        "summary": bundle.summary,
                        "discretization": bundle.discretization,
                        "passed": v.passed,
                        "checks": v.checks,
                    }),
                );
            }
            Analysis { passed, results: Value::Object(results), residuals, csv: None }
        }
    })
}

/// Runs a request: computes the report but performs no output.
pub fn run(req: &AnalysisRequest) -> CliResult<Outcome> {
    let mut digest = Sha256::new();
    digest.update(req.name().as_bytes());
    let a = analyse(req, &mut digest)?;
    let report = Report {
        command: req.name().into(),
        inputs_digest: hex::encode(digest.finalize()),
        tolerances: req.tol,
        seed: req.seed,
        passed: a.passed,
        results: a.results,
        residuals: a.residuals,
    };
    Ok(Outcome { exit_code: if a.passed { 0 } else { 2 }, report, csv: a.csv })
}

fn write_to(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
        }
    }
}

/// Runs a request and writes its outputs; returns the exit code.
pub fn execute(req: &AnalysisRequest) -> i32 {
    let result = run(req).and_then(|o| {
        let json = serde_json::to_string_pretty(&o.report).expect("plain data") + "\n";
        match (req.format, &o.csv) {
            (Format::Csv, Some(csv)) => {
                write_to(req.out.as_deref(), csv)?;
                if let Some(p) = &req.out {
                    let mut side = p.clone().into_os_string();
                    side.push(".json");
                    write_to(Some(Path::new(&side)), &json)?;
                }
            }
            _ => write_to(req.out.as_deref(), &json)?,
        }
        Ok(o.exit_code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qichan: {e}");
            1
        }
    }
}

/// Entry point for the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match AnalysisRequest::from_cli(cli) {
        Ok(req) => execute(&req),
        Err(e) => {
            eprintln!("qichan: {e}");
            1
        }
    }
}

// ---- example verification ----

#[derive(Clone, Debug)]
pub struct ExampleVerification {
    pub passed: bool,
    pub checks: BTreeMap<String, bool>,
    pub residuals: BTreeMap<String, f64>,
}

struct Checks {
    checks: BTreeMap<String, bool>,
    residuals: BTreeMap<String, f64>,
}

impl Checks {
    fn new() -> Self {
        Checks { checks: BTreeMap::new(), residuals: BTreeMap::new() }
    }

    fn flag(&mut self, name: &str, ok: bool) {
        self.checks.insert(name.into(), ok);
    }

    fn bound(&mut self, name: &str, residual: f64, limit: f64) {
        self.residuals.insert(name.into(), residual);
        self.flag(name, residual <= limit);
    }

    fn done(self) -> ExampleVerification {
        ExampleVerification { passed: self.checks.values().all(|&b| b), checks: self.checks, residuals: self.residuals }
    }
}

/// The checks attached to each worked example.
pub fn verify_example(b: &ExampleBundle, tol: &Tolerance, seed: u64, samples: usize) -> crate::Result<ExampleVerification> {
    let c = &b.channel;
    let mut k = Checks::new();
    match b.id {
        ExampleId::Dephasing => {
            let a = correction::preserved_algebra(c, tol)?;
            k.flag("preserved_blocks", a.block_dims == vec![(1, 1); 4]);
            k.flag("preserved_is_diagonal", a.carrier.same_span(&OperatorBasisSet::diagonal(4), tol));
            let p = decoherence::pointer_algebra(c, tol)?;
            let dev = p
                .pointer_effects
                .effects()
                .iter()
                .enumerate()
                .map(|(i, e)| e.dist(&ComplexMatrix::unit(4, i, i)))
                .fold(0.0, f64::max);
            k.bound("pointer_effects", dev, 1e-8);
            k.bound("block_pattern", a.pattern_residual, 1e-8);
        }
        ExampleId::Blocks => {
            let a = correction::preserved_algebra(c, tol)?;
            k.flag("preserved_blocks", a.block_dims == vec![(3, 1), (2, 1), (1, 1)]);
            let p = decoherence::pointer_algebra(c, tol)?;
            let span = OperatorBasisSet::span(6, &b.projectors, tol)?;
            k.flag("pointer_is_span_of_projectors", p.pointer_algebra.carrier.same_span(&span, tol));
        }
        ExampleId::Bitflip3 => {
            let code = b.code.as_ref().expect("bitflip3 has a code");
            let kl = correction::kl_check_operators(&b.errors, code, tol)?;
            k.bound("kl_bitflips", kl.residual, tol.abs_eps);
            let [_, _, _, z] = paulis();
            let z1 = z.kron(&ComplexMatrix::identity(4));
            let with_z = [b.errors.clone(), vec![z1]].concat();
            k.flag("kl_fails_with_z1", !correction::kl_check_operators(&with_z, code, tol)?.passes);
            let c0 = correction::restrict(c, code)?;
            let a0 = correction::preserved_algebra(&c0, tol)?;
            k.flag("code_algebra_dim_4", a0.dimension() == 4);
            let r0 = correction::correction_channel(&c0, tol)?;
            k.bound("code_correction", correction::fixed_point_residual(&c0, &r0, &a0.carrier), 1e-7);
            let s = correction::correctable_operator_system(c, code, tol)?;
            k.bound("operator_system_identity", s.identity_residual, 1e-7);
        }
        ExampleId::Teleport => {
            let el = c.elements();
            let quarter = ComplexMatrix::identity(2).scale_re(0.25);
            let mut worst: f64 = 0.0;
            for (i, ei) in el.iter().enumerate() {
                for (j, ej) in el.iter().enumerate() {
                    let m = ei.adjoint().matmul(ej);
                    let target = if i == j { quarter.clone() } else { ComplexMatrix::zeros(2, 2) };
                    worst = worst.max(m.dist(&target));
                }
            }
            k.bound("interaction_orthogonality", worst, 1e-10);
            let a = correction::preserved_algebra(c, tol)?;
            k.flag("full_algebra_correctable", a.dimension() == 4 && a.block_dims == vec![(2, 1)]);
            let r = correction::correction_channel(c, tol)?;
            k.bound("correction_fixed_point", correction::fixed_point_residual(c, &r, &a.carrier), 1e-7);
        }
        ExampleId::TeleportLossy => {
            let a = correction::preserved_algebra(c, tol)?;
            let [_, _, _, z] = paulis();
            let diag = commutant(&[z], tol)?;
            k.flag("preserved_is_commutant_of_sigma_z", a.dimension() == 2 && a.carrier.same_span(&diag, tol));
        }
        ExampleId::ClassicalStochastic => {
            let pi = b.stochastic.as_ref().expect("classical example has π");
            let r = correction::correction_channel(c, tol)?;
            let pr = StochasticMap::from_channel(&r, tol)?;
            let n = pi.rows();
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let row: f64 = (0..n).map(|kk| pi.get(j, kk)).sum();
                    let expected = pi.get(j, i) / row;
                    worst = worst.max((pr.get(i, j) - expected).abs());
                }
            }
            k.bound("correction_matrix", worst, 1e-12);
        }
        ExampleId::Diamonds(_) => {
            let g = b.observable.as_ref().expect("diamonds carry Γ");
            let r = decoherence::full_decoherence_check(c, g, samples, seed, tol)?;
            k.flag("fully_decoherent", r.all_feasible());
            k.bound("coarse_graining", r.max_residual, tol.abs_eps);
            if let Some(e) = r.explicit_residual {
                k.bound("explicit_rank_one", e, 1e-9);
            }
        }
        ExampleId::SicCloner => {
            let g = b.observable.as_ref().expect("SIC-POVM");
            let mut worst: f64 = 0.0;
            for y in decoherence::qubit_effect_grid(40, 3) {
                let x = c.apply_dual_unchecked(&y);
                let obs = DiscreteObservable::from_effects_unchecked(2, vec![x.clone(), &ComplexMatrix::identity(2) - &x]);
                worst = worst.max(decoherence::coarse_grain_solve(&obs, g, &tol.with_abs(1e-7))?.residual());
            }
            k.bound("containment", worst, 1e-7);
        }
        ExampleId::Antisym => {
            let m = catalog::antisym_marginal();
            k.bound("self_complementary", m.action_distance(&m.complement())?, 1e-9);
            let joint_marg = decoherence::marginal(c, &[3, 3], 0)?;
            k.bound("marginal_matches", joint_marg.action_distance(&m)?, 1e-9);
            let r = decoherence::broadcast_pointer(c, &[3, 3], None, tol)?;
            k.flag("broadcast_is_trivial", r.broadcast.pointer_algebra.dimension() == 1);
        }
        ExampleId::Sweep => {
            let n = catalog::SWEEP_N;
            let g = decoherence::sweep_gamma(b.projectors.len(), n, catalog::SWEEP_PERIOD, catalog::SWEEP_PERIOD);
            let dev = g
                .iter()
                .enumerate()
                .flat_map(|(i, row)| row.iter().enumerate().map(move |(m, &v)| (v - if i == m { 1.0 } else { 0.0 }).abs()))
                .fold(0.0, f64::max);
            k.bound("gamma_at_period_is_identity", dev, 1e-9);
            k.bound("snapshot_is_dephasing", c.action_distance(&Channel::dephasing(n))?, 1e-9);
        }
        ExampleId::Iterated => {
            let r = decoherence::iterated_fixed_points(c, 200, tol)?;
            let [id, _, _, z] = paulis();
            let expected = OperatorBasisSet::span(4, &[id.kron(&id), z.kron(&id)], tol)?;
            k.flag("fixed_points", r.fixed.same_span(&expected, tol));
            k.flag("fixed_points_form_algebra", r.is_algebra == Some(true));
            if let Some(o) = r.outgoing_residual {
                k.bound("outgoing_in_commutant", o, 1e-8);
            }
        }
    }
    Ok(k.done())
}

//! Information that flows to the environment.
//!
//! Pointer algebras (A_E ∩ A_{E_c}), correlation witnesses, coarse-graining
//! feasibility, broadcasting, the time-dependent dephasing model and
//! iterated-interaction fixed points.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebras::{center, commutant, intersect, structure_decompose, AlgebraStructure, OperatorBasisSet};
use crate::channels::{matrix_units, Channel, DiscreteObservable};
use crate::correction::interaction_span;
use crate::error::{Error, Result};
use crate::nnls::nnls;
use crate::numlin::{hermitian_coords, hermitian_eig, paulis, random, ComplexMatrix, Tolerance, C64};

/// Column-stochastic matrix: `entries[j][i]` is the probability of output
/// j given input i.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StochasticMap {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<f64>>,
}

impl StochasticMap {
    pub fn new(entries: Vec<Vec<f64>>, tol: &Tolerance) -> Result<Self> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, |r| r.len());
        if rows == 0 || cols == 0 || entries.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidStochasticMap("ragged or empty matrix".into()));
        }
        for (j, row) in entries.iter().enumerate() {
            for (i, &p) in row.iter().enumerate() {
                if !p.is_finite() || p < -tol.abs_eps {
                    return Err(Error::InvalidStochasticMap(format!("entry ({j},{i}) = {p}")));
                }
            }
        }
        for i in 0..cols {
            let s: f64 = entries.iter().map(|r| r[i]).sum();
            if (s - 1.0).abs() > tol.abs_eps {
                return Err(Error::InvalidStochasticMap(format!("column {i} sums to {s}")));
            }
        }
        Ok(StochasticMap { rows, cols, entries })
    }

    pub fn identity(n: usize) -> Self {
        let entries = (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        StochasticMap { rows: n, cols: n, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Vec<f64>] {
        &self.entries
    }

    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.entries[j][i]
    }

    /// Classical channel embedded as diagonal quantum systems:
    /// elements √π_ji |j⟩⟨i|.
    pub fn to_channel(&self) -> Channel {
        let mut el = Vec::new();
        for j in 0..self.rows {
            for i in 0..self.cols {
                let p = self.entries[j][i];
                if p > 0.0 {
                    let mut m = ComplexMatrix::zeros(self.rows, self.cols);
                    m.set(j, i, C64::new(p.sqrt(), 0.0));
                    el.push(m);
                }
            }
        }
        if el.is_empty() {
            el.push(ComplexMatrix::zeros(self.rows, self.cols));
        }
        Channel::from_elements(el).expect("consistent shapes")
    }

    /// Transition probabilities ⟨j|E(|i⟩⟨i|)|j⟩ of a channel between
    /// diagonal systems.
    pub fn from_channel(c: &Channel, tol: &Tolerance) -> Result<Self> {
        let entries = (0..c.dim_out())
            .map(|j| {
                (0..c.dim_in())
                    .map(|i| c.apply_unchecked(&ComplexMatrix::unit(c.dim_in(), i, i)).get(j, j).re)
                    .collect()
            })
            .collect();
        Self::new(entries, tol)
    }
}

/// Commutative algebra of classical information both kept and leaked.
#[derive(Clone, Debug)]
pub struct PointerReport {
    pub pointer_algebra: AlgebraStructure,
    /// Central projectors of the pointer algebra, as a sharp observable.
    pub pointer_effects: DiscreteObservable,
    pub commutativity_residual: f64,
}

fn pointer_from(alg: &OperatorBasisSet, tol: &Tolerance) -> Result<PointerReport> {
    let s = structure_decompose(alg, 0, tol)?;
    let effects = DiscreteObservable::new(s.central_projectors.clone(), &tol.with_abs(tol.abs_eps.sqrt()))?;
    Ok(PointerReport {
        commutativity_residual: alg.commutativity_residual(),
        pointer_algebra: s,
        pointer_effects: effects,
    })
}

fn sharp_preserved(c: &Channel, tol: &Tolerance) -> Result<OperatorBasisSet> {
    commutant(interaction_span(c, tol)?.basis(), tol)
}

/// A_E ∩ A_{E_c}.
pub fn pointer_algebra(c: &Channel, tol: &Tolerance) -> Result<PointerReport> {
    let a = sharp_preserved(c, tol)?;
    let ac = sharp_preserved(&c.complement(), tol)?;
    pointer_from(&intersect(&a, &ac, tol)?, tol)
}

/// Verifies that the channel and its complement carry perfectly correlated
/// copies of X: returns max_{i≠j} ‖V†(Y_i⊗Z_j)V‖ + max_i ‖V†(Y_i⊗Z_i)V − X_i‖.
pub fn correlation_check(
    c: &Channel,
    x: &DiscreteObservable,
    y: &DiscreteObservable,
    z: &DiscreteObservable,
    tol: &Tolerance,
) -> Result<f64> {
    if x.len() != y.len() || x.len() != z.len() {
        return Err(Error::DimMismatch("X, Y and Z must have the same number of outcomes".into()));
    }
    let ey = c.pull_back(y)?;
    let ez = c.complement().pull_back(z)?;
    let mismatch = x
        .effects()
        .iter()
        .zip(ey.effects().iter().zip(ez.effects()))
        .map(|(xi, (a, b))| a.dist(xi).max(b.dist(xi)))
        .fold(0.0, f64::max);
    if mismatch > tol.abs_eps {
        return Err(Error::WitnessMismatch { residual: mismatch });
    }
    let v = c.dilate(tol)?;
    let mut off: f64 = 0.0;
    let mut diag: f64 = 0.0;
    for (i, yi) in y.effects().iter().enumerate() {
        for (j, zj) in z.effects().iter().enumerate() {
            let m = v.joint_dual(yi, zj);
            if i == j {
                diag = diag.max(m.dist(&x.effects()[i]));
            } else {
                off = off.max(m.op_norm());
            }
        }
    }
    Ok(off + diag)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum CoarseGraining {
    Feasible { pi: StochasticMap, residual: f64 },
    /// No stochastic map gets closer than `residual`.
    Infeasible { residual: f64 },
}

impl CoarseGraining {
    pub fn is_feasible(&self) -> bool {
        matches!(self, CoarseGraining::Feasible { .. })
    }

    pub fn residual(&self) -> f64 {
        match self {
            CoarseGraining::Feasible { residual, .. } | CoarseGraining::Infeasible { residual } => *residual,
        }
    }
}

/// Real coordinates of a Hermitian matrix in an orthonormal basis.
/// Weight of the column-sum rows relative to the effect-matching rows. Large
/// weights inflate the NNLS stopping threshold and stall it on feasible
/// instances.
const STOCHASTIC_WEIGHT: f64 = 1.0;

/// Find π ≥ 0 with unit column sums such that X_j = Σ_i π_ji Γ_i.
pub fn coarse_grain_solve(x: &DiscreteObservable, gamma: &DiscreteObservable, tol: &Tolerance) -> Result<CoarseGraining> {
    if x.dim() != gamma.dim() {
        return Err(Error::DimMismatch("observables on different spaces".into()));
    }
    let d = x.dim();
    let (nx, ng) = (x.len(), gamma.len());
    let m = d * d;
    let gc: Vec<Vec<f64>> = gamma.effects().iter().map(hermitian_coords).collect();
    let xc: Vec<Vec<f64>> = x.effects().iter().map(hermitian_coords).collect();

    let rows = nx * m + ng;
    let mut a = DMatrix::<f64>::zeros(rows, nx * ng);
    let mut b = DVector::<f64>::zeros(rows);
    for j in 0..nx {
        for r in 0..m {
            for i in 0..ng {
                a[(j * m + r, j * ng + i)] = gc[i][r];
            }
            b[j * m + r] = xc[j][r];
        }
    }
    for i in 0..ng {
        for j in 0..nx {
            a[(nx * m + i, j * ng + i)] = STOCHASTIC_WEIGHT;
        }
        b[nx * m + i] = STOCHASTIC_WEIGHT;
    }
    let sol = nnls(&a, &b);

    let mut entries = vec![vec![0.0; ng]; nx];
    for i in 0..ng {
        let s: f64 = (0..nx).map(|j| sol[j * ng + i]).sum();
        for j in 0..nx {
            entries[j][i] = if s > 0.0 { sol[j * ng + i] / s } else if j == 0 { 1.0 } else { 0.0 };
        }
    }
    let residual = x
        .effects()
        .iter()
        .enumerate()
        .map(|(j, xj)| {
            let approx = gamma
                .effects()
                .iter()
                .enumerate()
                .fold(ComplexMatrix::zeros(d, d), |acc, (i, g)| &acc + &g.scale_re(entries[j][i]));
            xj.dist(&approx)
        })
        .fold(0.0, f64::max);
    if residual <= tol.abs_eps {
        let pi = StochasticMap { rows: nx, cols: ng, entries };
        Ok(CoarseGraining::Feasible { pi, residual })
    } else {
        Ok(CoarseGraining::Infeasible { residual })
    }
}

/// Random POVM with `k` outcomes from a Haar isometry into C^d ⊗ C^k.
pub fn random_observable(d: usize, k: usize, rng: &mut impl Rng) -> DiscreteObservable {
    let v = random::isometry(d * k, d, rng);
    let effects = (0..k)
        .map(|j| {
            let proj = ComplexMatrix::identity(d).kron(&ComplexMatrix::unit(k, j, j));
            v.adjoint().matmul(&proj).matmul(&v).hermitian_part()
        })
        .collect();
    DiscreteObservable::from_effects_unchecked(d, effects)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecoherenceReport {
    pub samples: usize,
    pub feasible: usize,
    pub pass_rate: f64,
    pub max_residual: f64,
    /// For channels with rank-one elements: the worst residual of the
    /// explicit coarse-graining π_ji = ⟨a_i|Y_j|a_i⟩/‖a_i‖² onto {E_i†E_i}.
    pub explicit_residual: Option<f64>,
}

impl DecoherenceReport {
    pub fn all_feasible(&self) -> bool {
        self.feasible == self.samples
    }
}

/// Statistical check that every preserved observable is a coarse-graining of
/// Γ: `samples` random output observables Y are pulled back and tested.
pub fn full_decoherence_check(
    c: &Channel,
    gamma: &DiscreteObservable,
    samples: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<DecoherenceReport> {
    if gamma.dim() != c.dim_in() {
        return Err(Error::DimMismatch("Γ must act on the channel input".into()));
    }
    let rank_one: Option<Vec<(ComplexMatrix, ComplexMatrix)>> = c
        .elements()
        .iter()
        .map(|e| rank_one_factors(e, tol))
        .collect();
    let outcomes: Vec<Result<(f64, Option<f64>)>> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(s as u64));
            let k = 2 + (s % 2);
            let y = random_observable(c.dim_out(), k, &mut rng);
            let x = c.pull_back(&y)?;
            let res = coarse_grain_solve(&x, gamma, tol)?.residual();
            let explicit = rank_one.as_ref().map(|f| explicit_rank_one_residual(&x, &y, f));
            Ok((res, explicit))
        })
        .collect();
    let mut feasible = 0;
    let mut max_residual: f64 = 0.0;
    let mut explicit: Option<f64> = None;
    for o in outcomes {
        let (r, e) = o?;
        if r <= tol.abs_eps {
            feasible += 1;
        }
        max_residual = max_residual.max(r);
        if let Some(e) = e {
            explicit = Some(explicit.unwrap_or(0.0).max(e));
        }
    }
    Ok(DecoherenceReport {
        samples,
        feasible,
        pass_rate: if samples == 0 { 1.0 } else { feasible as f64 / samples as f64 },
        max_residual,
        explicit_residual: explicit,
    })
}

/// E = |a⟩⟨b| if E has numerical rank one.
fn rank_one_factors(e: &ComplexMatrix, tol: &Tolerance) -> Option<(ComplexMatrix, ComplexMatrix)> {
    let s = crate::numlin::svd(e);
    let s0 = s.singular_values.first().copied().unwrap_or(0.0);
    if s0 <= 0.0 || s.singular_values.iter().skip(1).any(|&v| v > tol.rank_rel * s0) {
        return None;
    }
    let a = ComplexMatrix::column_vector(&s.u.column(0)).scale_re(s0);
    let b = ComplexMatrix::column_vector(&s.v_adj.row(0).iter().map(|z| z.conj()).collect::<Vec<_>>());
    Some((a, b))
}

fn explicit_rank_one_residual(
    x: &DiscreteObservable,
    y: &DiscreteObservable,
    factors: &[(ComplexMatrix, ComplexMatrix)],
) -> f64 {
    let d = x.dim();
    x.effects()
        .iter()
        .zip(y.effects())
        .map(|(xj, yj)| {
            let approx = factors.iter().fold(ComplexMatrix::zeros(d, d), |acc, (a, b)| {
                let na = a.fro_norm().powi(2);
                let pi = a.adjoint().matmul(yj).matmul(a).get(0, 0).re / na;
                let g = b.matmul(&b.adjoint()).scale_re(na);
                &acc + &g.scale_re(pi)
            });
            xj.dist(&approx)
        })
        .fold(0.0, f64::max)
}

/// Marginal channel onto tensor factor `k` of the output.
pub fn marginal(c: &Channel, dims: &[usize], k: usize) -> Result<Channel> {
    let total: usize = dims.iter().product();
    if total != c.dim_out() || k >= dims.len() {
        return Err(Error::DimMismatch(format!(
            "factors {dims:?} for output dimension {}",
            c.dim_out()
        )));
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|&q| q != k).collect();
    let nrest: usize = rest.iter().map(|&q| dims[q]).product();
    let index = |xk: usize, r: usize| {
        let mut digits = vec![0; dims.len()];
        digits[k] = xk;
        let mut rr = r;
        for &q in rest.iter().rev() {
            digits[q] = rr % dims[q];
            rr /= dims[q];
        }
        digits.iter().zip(dims).fold(0, |acc, (&d, &m)| acc * m + d)
    };
    let mut el = Vec::with_capacity(c.num_elements() * nrest);
    for e in c.elements() {
        for r in 0..nrest {
            el.push(ComplexMatrix::from_fn(dims[k], c.dim_in(), |x, y| e.get(index(x, r), y)));
        }
    }
    Channel::from_elements(el)
}

#[derive(Clone, Debug)]
pub struct BroadcastReport {
    /// Dimension of the sharp preserved algebra of each marginal.
    pub marginal_algebra_dims: Vec<usize>,
    /// Intersection of the marginal algebras.
    pub broadcast: PointerReport,
    pub commutative: bool,
    /// (Y_1 ⊗ … ⊗ Y_n)∘E for the supplied witnesses, outcomes in
    /// lexicographic order.
    pub composite: Option<DiscreteObservable>,
}

/// Sharp observables available to every one of the output subsystems.
pub fn broadcast_pointer(
    c: &Channel,
    subsystem_dims: &[usize],
    witnesses: Option<&[DiscreteObservable]>,
    tol: &Tolerance,
) -> Result<BroadcastReport> {
    if subsystem_dims.len() < 2 {
        return Err(Error::DimMismatch("broadcasting needs at least two subsystems".into()));
    }
    let mut dims_out = Vec::new();
    let mut joint: Option<OperatorBasisSet> = None;
    for k in 0..subsystem_dims.len() {
        let a = sharp_preserved(&marginal(c, subsystem_dims, k)?, tol)?;
        dims_out.push(a.len());
        joint = Some(match joint {
            None => a,
            Some(j) => intersect(&j, &a, tol)?,
        });
    }
    let joint = joint.expect("at least two subsystems");
    let broadcast = pointer_from(&joint, tol)?;
    let commutative = broadcast.commutativity_residual <= tol.abs_eps.sqrt();

    let composite = match witnesses {
        None => None,
        Some(ws) => {
            if ws.len() != subsystem_dims.len() || ws.iter().zip(subsystem_dims).any(|(w, &d)| w.dim() != d) {
                return Err(Error::DimMismatch("one witness per subsystem, matching its dimension".into()));
            }
            let mut effects = vec![ComplexMatrix::identity(1)];
            for w in ws {
                effects = effects.iter().flat_map(|a| w.effects().iter().map(move |b| a.kron(b))).collect();
            }
            let y = DiscreteObservable::from_effects_unchecked(c.dim_out(), effects);
            Some(c.pull_back(&y)?)
        }
    };
    Ok(BroadcastReport { marginal_algebra_dims: dims_out, broadcast, commutative, composite })
}

/// Shortest round-trip float, in exponent form when positional notation
/// would be long.
struct Num(f64);

impl std::fmt::Display for Num {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let a = self.0.abs();
        if a != 0.0 && !(1e-4..1e15).contains(&a) {
            write!(f, "{:e}", self.0)
        } else {
            write!(f, "{}", self.0)
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub times: Vec<f64>,
    /// gamma[t][i][m]
    pub gamma: Vec<Vec<Vec<f64>>>,
    pub channel_snapshots: Vec<Channel>,
}

impl SweepResult {
    /// CSV with header `t,i,m,gamma`, one row per (time, projector, outcome).
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "t,i,m,gamma")?;
        for (t, g) in self.times.iter().zip(&self.gamma) {
            for (i, row) in g.iter().enumerate() {
                for (m, v) in row.iter().enumerate() {
                    writeln!(w, "{},{i},{m},{}", Num(*t), Num(*v))?;
                }
            }
        }
        Ok(())
    }
}

fn check_projectors(ps: &[ComplexMatrix], tol: &Tolerance) -> Result<usize> {
    let first = ps.first().ok_or_else(|| Error::BadProjectors("no projectors".into()))?;
    let d = first.rows();
    let loose = tol.with_abs(tol.abs_eps.max(1e-8));
    for (i, p) in ps.iter().enumerate() {
        if p.shape() != (d, d) {
            return Err(Error::BadProjectors(format!("projector {i} has shape {:?}", p.shape())));
        }
        if p.hermiticity_residual() > loose.abs_eps || p.matmul(p).dist(p) > loose.abs_eps {
            return Err(Error::BadProjectors(format!("P_{i} is not an orthogonal projector")));
        }
        for (j, q) in ps.iter().enumerate().skip(i + 1) {
            if p.matmul(q).op_norm() > loose.abs_eps {
                return Err(Error::BadProjectors(format!("P_{i} and P_{j} overlap")));
            }
        }
    }
    let sum = ps.iter().fold(ComplexMatrix::zeros(d, d), |acc, p| &acc + p);
    if sum.dist(&ComplexMatrix::identity(d)) > loose.abs_eps {
        return Err(Error::BadProjectors("projectors do not sum to the identity".into()));
    }
    Ok(d)
}

/// Elements E_k(t) = N^{-1/2} Σ_i exp(−iωktλ_i) P_i, ω = 2π/N, λ_i = i/T.
pub fn sweep_channel(projectors: &[ComplexMatrix], n: usize, period: f64, t: f64) -> Channel {
    let d = projectors[0].rows();
    let omega = 2.0 * PI / n as f64;
    let el = (0..n)
        .map(|k| {
            projectors.iter().enumerate().fold(ComplexMatrix::zeros(d, d), |acc, (i, p)| {
                let phase = -omega * k as f64 * t * (i as f64 / period);
                &acc + &p.scale(C64::from_polar(1.0 / (n as f64).sqrt(), phase))
            })
        })
        .collect();
    Channel::from_elements(el).expect("consistent shapes")
}

/// γ_im(t) = N^{-2} |Σ_n exp(−iωn(tλ_i − m))|².
pub fn sweep_gamma(num_projectors: usize, n: usize, period: f64, t: f64) -> Vec<Vec<f64>> {
    let omega = 2.0 * PI / n as f64;
    (0..num_projectors)
        .map(|i| {
            let x = t * i as f64 / period;
            (0..n)
                .map(|m| {
                    let s: C64 = (0..n).map(|k| C64::from_polar(1.0, -omega * k as f64 * (x - m as f64))).sum();
                    s.norm_sqr() / (n * n) as f64
                })
                .collect()
        })
        .collect()
}

/// The gradual-dephasing model sampled at `times`.
pub fn dephasing_sweep(
    projectors: &[ComplexMatrix],
    n: usize,
    period: f64,
    times: &[f64],
    tol: &Tolerance,
) -> Result<SweepResult> {
    check_projectors(projectors, tol)?;
    if n < projectors.len() {
        return Err(Error::BadProjectors(format!("N = {n} is smaller than the {} projectors", projectors.len())));
    }
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::BadProjectors(format!("period T = {period}")));
    }
    let per_time: Vec<(Vec<Vec<f64>>, Channel)> = times
        .par_iter()
        .map(|&t| (sweep_gamma(projectors.len(), n, period, t), sweep_channel(projectors, n, period, t)))
        .collect();
    let (gamma, channel_snapshots) = per_time.into_iter().unzip();
    Ok(SweepResult { times: times.to_vec(), gamma, channel_snapshots })
}

/// One point of a preserved-effect region: coordinates of A = E*(B) in the
/// components 1, σ_x, σ_z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionPoint {
    pub x: f64,
    pub z: f64,
    pub t: f64,
}

/// Deterministic sample of the preserved effects E*(B) of a qubit-input
/// channel, projected on (tr Aσ_x, tr Aσ_z, tr A).
///
/// For each direction u on a (θ, φ) grid the effect maximizing
/// u_0 t + u_x x + u_z z is the projector P onto the positive part of
/// E(u_0 1 + u_x σ_x + u_z σ_z); the samples are B = αP + β(1 − P) on a
/// `grid × grid` lattice of (α, β). Extreme directions make the boundary
/// dense.
pub fn effect_region_sample(c: &Channel, grid: usize, tol: &Tolerance) -> Result<Vec<RegionPoint>> {
    if c.dim_in() != 2 {
        return Err(Error::DimMismatch(format!("region sampling needs a qubit input, got {}", c.dim_in())));
    }
    let grid = grid.max(2);
    let [id, sx, _, sz] = paulis();
    let dout = c.dim_out();
    let mut dirs = Vec::new();
    for a in 0..grid {
        let theta = PI * a as f64 / (grid - 1) as f64;
        for b in 0..2 * grid {
            let phi = PI * b as f64 / grid as f64;
            dirs.push([theta.cos(), theta.sin() * phi.cos(), theta.sin() * phi.sin()]);
        }
    }
    let levels: Vec<f64> = (0..grid).map(|k| k as f64 / (grid - 1) as f64).collect();
    let per_dir: Vec<Result<Vec<RegionPoint>>> = dirs
        .par_iter()
        .map(|u| {
            let w = &(&id.scale_re(u[0]) + &sx.scale_re(u[1])) + &sz.scale_re(u[2]);
            let h = c.apply_unchecked(&w);
            let e = hermitian_eig(&h, tol)?;
            let scale = e.values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
            let mut p = ComplexMatrix::zeros(dout, dout);
            for (k, &l) in e.values.iter().enumerate() {
                if l > 1e-12 * scale {
                    p = &p + &ComplexMatrix::projector(&e.vector(k));
                }
            }
            let q = &ComplexMatrix::identity(dout) - &p;
            let ap = c.apply_dual_unchecked(&p);
            let aq = c.apply_dual_unchecked(&q);
            let mut pts = Vec::with_capacity(levels.len() * levels.len());
            for &al in &levels {
                for &be in &levels {
                    let a = &ap.scale_re(al) + &aq.scale_re(be);
                    pts.push(RegionPoint {
                        x: a.hs_inner(&sx).re,
                        z: a.hs_inner(&sz).re,
                        t: a.trace().re,
                    });
                }
            }
            Ok(pts)
        })
        .collect();
    let mut out = Vec::new();
    for r in per_dir {
        out.extend(r?);
    }
    Ok(out)
}

/// CSV with header `x,z,t`.
pub fn write_region_csv(points: &[RegionPoint], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "x,z,t")?;
    for p in points {
        writeln!(w, "{},{},{}", Num(p.x), Num(p.z), Num(p.t))?;
    }
    Ok(())
}

/// Qubit effects αP_n + β(1 − P_n) for `directions` Bloch vectors n spread
/// over the sphere (Fibonacci lattice) and α, β on `levels` equally spaced
/// values in [0, 1].
pub fn qubit_effect_grid(directions: usize, levels: usize) -> Vec<ComplexMatrix> {
    let golden = PI * (3.0 - 5f64.sqrt());
    let levels = levels.max(2);
    let vals: Vec<f64> = (0..levels).map(|k| k as f64 / (levels - 1) as f64).collect();
    let [id, sx, sy, sz] = paulis();
    let mut out = Vec::with_capacity(directions * levels * levels);
    for k in 0..directions {
        let zc = 1.0 - 2.0 * (k as f64 + 0.5) / directions as f64;
        let r = (1.0 - zc * zc).sqrt();
        let ph = golden * k as f64;
        let n = [r * ph.cos(), r * ph.sin(), zc];
        let p = (&(&id + &sx.scale_re(n[0])) + &(&sy.scale_re(n[1]) + &sz.scale_re(n[2]))).scale_re(0.5);
        let q = &id - &p;
        for &a in &vals {
            for &b in &vals {
                out.push(&p.scale_re(a) + &q.scale_re(b));
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct FixedPointReport {
    /// {A : E*(A) = A}
    pub fixed: OperatorBasisSet,
    /// Distance of the Cesàro mean of E*^k(A) over `max_iter` steps from the
    /// fixed space, worst case over matrix units A.
    pub cesaro_residual: f64,
    pub unital: bool,
    /// For unital channels: the fixed space is an algebra.
    pub is_algebra: Option<bool>,
    /// Its center, the information eventually shared with every environment
    /// particle.
    pub center: Option<OperatorBasisSet>,
    /// For unital channels: how far E_c*(B) strays from the commutant of the
    /// fixed algebra, worst case over matrix units B.
    pub outgoing_residual: Option<f64>,
}

/// Fixed points of the dual, i.e. the observables preserved by every
/// iterate of the channel.
pub fn iterated_fixed_points(c: &Channel, max_iter: usize, tol: &Tolerance) -> Result<FixedPointReport> {
    if c.dim_in() != c.dim_out() {
        return Err(Error::NotEndomorphic { dim_in: c.dim_in(), dim_out: c.dim_out() });
    }
    let d = c.dim_in();
    let s = c.dual_superoperator();
    let shifted = &s - &ComplexMatrix::identity(d * d);
    let ns = crate::numlin::nullspace(&shifted, tol);
    let mats: Vec<ComplexMatrix> =
        (0..ns.cols()).map(|k| ComplexMatrix::new(d, d, ns.column(k)).expect("shape")).collect();
    let fixed = OperatorBasisSet::hermitian_span(d, &mats, tol)?;

    let steps = max_iter.max(1);
    let cesaro_residual = matrix_units(d)
        .par_iter()
        .map(|a| {
            let mut cur = a.clone();
            let mut acc = ComplexMatrix::zeros(d, d);
            for _ in 0..steps {
                acc = &acc + &cur;
                cur = c.apply_dual_unchecked(&cur);
            }
            fixed.residual(&acc.scale_re(1.0 / steps as f64))
        })
        .reduce(|| 0.0, f64::max);

    let unital = c.image_of_identity().dist(&ComplexMatrix::identity(d)) <= tol.abs_eps;
    let (is_algebra, center_set, outgoing) = if unital {
        let alg = fixed.is_algebra(tol);
        let z = if alg { Some(center(&fixed, tol)?) } else { None };
        let comm = commutant(fixed.basis(), tol)?;
        let comp = c.complement();
        let out = matrix_units(comp.dim_out())
            .iter()
            .map(|b| comm.residual(&comp.apply_dual_unchecked(b)))
            .fold(0.0, f64::max);
        (Some(alg), z, Some(out))
    } else {
        (None, None, None)
    };
    Ok(FixedPointReport {
        fixed,
        cesaro_residual,
        unital,
        is_algebra,
        center: center_set,
        outgoing_residual: outgoing,
    })
}

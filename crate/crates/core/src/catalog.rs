//! Worked examples, constructed deterministically.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::{compose, tensor, Channel, DiscreteObservable};
use crate::correction::CodeSubspace;
use crate::decoherence::StochasticMap;
use crate::error::{Error, Result};
use crate::numlin::{bloch_operator, paulis, random, ComplexMatrix, Tolerance, C64};

/// Angles used for the continuous family of measured states.
pub const CONTINUUM_ANGLES: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ExampleId {
    Dephasing,
    Blocks,
    Bitflip3,
    Teleport,
    TeleportLossy,
    ClassicalStochastic,
    /// `None` is the continuous family, sampled at [`CONTINUUM_ANGLES`].
    Diamonds(Option<usize>),
    SicCloner,
    Antisym,
    Sweep,
    Iterated,
}

impl ExampleId {
    pub fn all() -> Vec<ExampleId> {
        use ExampleId::*;
        let mut v = vec![Dephasing, Blocks, Bitflip3, Teleport, TeleportLossy, ClassicalStochastic];
        v.extend((2..=5).map(|n| Diamonds(Some(n))));
        v.extend([Diamonds(None), SicCloner, Antisym, Sweep, Iterated]);
        v
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ExampleId::*;
        match self {
            Dephasing => f.write_str("dephasing"),
            Blocks => f.write_str("blocks"),
            Bitflip3 => f.write_str("bitflip3"),
            Teleport => f.write_str("teleport"),
            TeleportLossy => f.write_str("teleport-lossy"),
            ClassicalStochastic => f.write_str("classical-stochastic"),
            Diamonds(Some(n)) => write!(f, "diamonds-{n}"),
            Diamonds(None) => f.write_str("diamonds-inf"),
            SicCloner => f.write_str("sic-cloner"),
            Antisym => f.write_str("antisym"),
            Sweep => f.write_str("sweep"),
            Iterated => f.write_str("iterated"),
        }
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use ExampleId::*;
        Ok(match s {
            "dephasing" => Dephasing,
            "blocks" => Blocks,
            "bitflip3" => Bitflip3,
            "teleport" => Teleport,
            "teleport-lossy" => TeleportLossy,
            "classical-stochastic" => ClassicalStochastic,
            "diamonds-inf" => Diamonds(None),
            "sic-cloner" => SicCloner,
            "antisym" => Antisym,
            "sweep" => Sweep,
            "iterated" => Iterated,
            other => match other.strip_prefix("diamonds-").and_then(|n| n.parse::<usize>().ok()) {
                Some(n) if n >= 2 => Diamonds(Some(n)),
                _ => return Err(Error::UnknownExample(other.to_string())),
            },
        })
    }
}

/// A channel together with whatever the example's analysis needs.
#[derive(Clone, Debug)]
pub struct ExampleBundle {
    pub id: ExampleId,
    pub summary: &'static str,
    pub channel: Channel,
    pub code: Option<CodeSubspace>,
    /// Error operators spanning the noise model of a code.
    pub errors: Vec<ComplexMatrix>,
    /// Reference observable: pointer Γ, the SIC-POVM, ...
    pub observable: Option<DiscreteObservable>,
    /// Orthogonal projectors (block structure, dephasing sweep).
    pub projectors: Vec<ComplexMatrix>,
    /// Tensor factors of the output, for broadcasting.
    pub output_factors: Option<Vec<usize>>,
    pub stochastic: Option<StochasticMap>,
    /// How a continuum was replaced by a finite object, if it was.
    pub discretization: Option<String>,
}

impl ExampleBundle {
    fn new(id: ExampleId, summary: &'static str, channel: Channel) -> Self {
        ExampleBundle {
            id,
            summary,
            channel,
            code: None,
            errors: Vec::new(),
            observable: None,
            projectors: Vec::new(),
            output_factors: None,
            stochastic: None,
            discretization: None,
        }
    }
}

pub const BLOCK_SIZES: [usize; 3] = [2, 3, 1];
pub const BITFLIP_PROBS: [f64; 4] = [0.4, 0.2, 0.2, 0.2];
pub const CATALOG_SEED: u64 = 2009;
pub const SWEEP_N: usize = 4;
pub const SWEEP_PERIOD: f64 = 1.0;
pub const SWEEP_POINTS: usize = 11;

pub fn example(id: ExampleId) -> Result<ExampleBundle> {
    let tol = Tolerance::default();
    use ExampleId::*;
    Ok(match id {
        Dephasing => {
            let mut b = ExampleBundle::new(id, "complete dephasing on C^4", Channel::dephasing(4));
            b.observable = Some(DiscreteObservable::computational(4));
            b
        }
        Blocks => {
            let (c, ps) = block_channel(&BLOCK_SIZES, CATALOG_SEED);
            let mut b = ExampleBundle::new(id, "block dephasing ρ ↦ Σ U P_i ρ P_i U† with blocks (2,3,1)", c);
            b.observable = Some(DiscreteObservable::from_effects_unchecked(6, ps.clone()));
            b.projectors = ps;
            b
        }
        Bitflip3 => {
            let mut b = ExampleBundle::new(id, "random bit flips on three qubits", bitflip3(&BITFLIP_PROBS, &tol)?);
            b.code = Some(CodeSubspace::from_basis_states(8, &[0, 7])?);
            b.errors = bitflip_errors();
            b
        }
        Teleport => ExampleBundle::new(id, "teleportation, Alice's qubit to Bob's", teleportation()),
        TeleportLossy => {
            let pi = merge_symbols(4, 0, 3);
            let c = lossy_teleportation(&pi)?;
            let mut b = ExampleBundle::new(id, "teleportation with classical symbols 0 and 3 merged", c);
            b.stochastic = Some(pi);
            b
        }
        ClassicalStochastic => {
            let mut rng = ChaCha8Rng::seed_from_u64(CATALOG_SEED);
            let pi = StochasticMap::new(random::stochastic(5, 5, &mut rng), &tol)?;
            let mut b = ExampleBundle::new(id, "random classical channel on five symbols", pi.to_channel());
            b.stochastic = Some(pi);
            b
        }
        Diamonds(n) => {
            let k = n.unwrap_or(CONTINUUM_ANGLES);
            let (c, gamma) = diamond_channel(k);
            let mut b = ExampleBundle::new(id, "measurement of equatorial x-z states", c);
            b.observable = Some(gamma);
            if n.is_none() {
                b.discretization = Some(format!(
                    "continuous family of states sampled at {CONTINUUM_ANGLES} equally spaced angles"
                ));
            }
            b
        }
        SicCloner => {
            let mut b = ExampleBundle::new(id, "depolarizing channel αρ + (1−α)1/2 at α = 1/3", sic_cloner(1.0 / 3.0));
            b.observable = Some(sic_povm());
            b
        }
        Antisym => {
            let mut b = ExampleBundle::new(id, "joint isometry into the antisymmetric subspace", antisym_joint());
            b.output_factors = Some(vec![3, 3]);
            b
        }
        Sweep => {
            let ps: Vec<_> = (0..SWEEP_N).map(|i| ComplexMatrix::unit(SWEEP_N, i, i)).collect();
            let c = crate::decoherence::sweep_channel(&ps, SWEEP_N, SWEEP_PERIOD, SWEEP_PERIOD);
            let mut b = ExampleBundle::new(id, "gradual dephasing, N = 4, T = 1 (snapshot at t = T)", c);
            b.projectors = ps;
            b
        }
        Iterated => ExampleBundle::new(id, "repeated random unitary kicks σz⊗R₁, 1⊗R₂", iterated_channel(CATALOG_SEED)),
    })
}

/// ρ ↦ Σ U P_i ρ P_i U† for consecutive computational blocks; returns the
/// channel and the P_i.
pub fn block_channel(sizes: &[usize], seed: u64) -> (Channel, Vec<ComplexMatrix>) {
    let d: usize = sizes.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = random::unitary(d, &mut rng);
    let mut start = 0;
    let ps: Vec<ComplexMatrix> = sizes
        .iter()
        .map(|&s| {
            let p = ComplexMatrix::from_fn(d, d, |r, c| {
                if r == c && r >= start && r < start + s {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            start += s;
            p
        })
        .collect();
    let el = ps.iter().map(|p| u.matmul(p)).collect();
    (Channel::from_elements(el).expect("square blocks"), ps)
}

/// X on qubit `k` (0-based, most significant first) of three.
fn x_on(k: usize) -> ComplexMatrix {
    let [id, x, _, _] = paulis();
    (0..3).fold(ComplexMatrix::identity(1), |acc, q| acc.kron(if q == k { &x } else { &id }))
}

/// {1, X₁, X₂, X₃}
pub fn bitflip_errors() -> Vec<ComplexMatrix> {
    std::iter::once(ComplexMatrix::identity(8)).chain((0..3).map(x_on)).collect()
}

/// p₀ρ + Σ p_k X_k ρ X_k
pub fn bitflip3(p: &[f64; 4], tol: &Tolerance) -> Result<Channel> {
    Channel::mixed_unitary(p, &bitflip_errors(), tol)
}

/// {1, σ_x, σ_y, σ_z}
pub fn teleport_unitaries() -> [ComplexMatrix; 4] {
    paulis()
}

/// Elements ½|i⟩ ⊗ U_i : C² → C⁴ ⊗ C².
pub fn teleportation() -> Channel {
    let el = teleport_unitaries()
        .iter()
        .enumerate()
        .map(|(i, u)| ComplexMatrix::ket(4, i).kron(u).scale_re(0.5))
        .collect();
    Channel::from_elements(el).expect("consistent shapes")
}

/// Teleportation followed by classical noise π on Alice's message.
pub fn lossy_teleportation(pi: &StochasticMap) -> Result<Channel> {
    compose(&tensor(&pi.to_channel(), &Channel::identity(2)), &teleportation())
}

/// Deterministic map sending symbol `from` to `to`, fixing the others.
pub fn merge_symbols(n: usize, to: usize, from: usize) -> StochasticMap {
    let mut m = StochasticMap::identity(n);
    let mut entries = m.entries().to_vec();
    entries[from][from] = 0.0;
    entries[to][from] = 1.0;
    m = StochasticMap::new(entries, &Tolerance::default()).expect("deterministic map");
    m
}

/// |ψ_θ⟩ with projector ½(1 + cos θ σ_x + sin θ σ_z).
pub fn equatorial_state(theta: f64) -> Vec<C64> {
    // Bloch vector (cos θ, 0, sin θ): polar angle π/2 − θ about z.
    let half = (PI / 2.0 - theta) / 2.0;
    vec![C64::new(half.cos(), 0.0), C64::new(half.sin(), 0.0)]
}

/// ρ ↦ Σ_k (2/n) |k⟩⟨ψ_k|ρ|ψ_k⟩⟨k| with θ_k = 2πk/n, and the POVM
/// {(2/n)|ψ_k⟩⟨ψ_k|} it measures.
pub fn diamond_channel(n: usize) -> (Channel, DiscreteObservable) {
    let w = (2.0 / n as f64).sqrt();
    let kets: Vec<Vec<C64>> = (1..=n).map(|k| equatorial_state(2.0 * PI * k as f64 / n as f64)).collect();
    let el = kets
        .iter()
        .enumerate()
        .map(|(k, psi)| ComplexMatrix::ket(n, k).matmul(&ComplexMatrix::column_vector(psi).adjoint()).scale_re(w))
        .collect();
    let effects = kets.iter().map(|psi| ComplexMatrix::projector(psi).scale_re(2.0 / n as f64)).collect();
    (
        Channel::from_elements(el).expect("consistent shapes"),
        DiscreteObservable::from_effects_unchecked(2, effects),
    )
}

/// αρ + (1 − α) tr(ρ) 1/2.
pub fn sic_cloner(alpha: f64) -> Channel {
    let [id, x, y, z] = paulis();
    let w0 = (alpha + (1.0 - alpha) / 4.0).max(0.0).sqrt();
    let w = ((1.0 - alpha) / 4.0).max(0.0).sqrt();
    Channel::from_elements(vec![id.scale_re(w0), x.scale_re(w), y.scale_re(w), z.scale_re(w)]).expect("qubit")
}

/// Tetrahedral Bloch vectors.
pub fn tetrahedron() -> [[f64; 3]; 4] {
    let s = 1.0 / 3f64.sqrt();
    [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]
}

/// Γ_i = ¼(1 + n_i·σ) over the tetrahedron.
pub fn sic_povm() -> DiscreteObservable {
    let effects = tetrahedron().iter().map(|n| bloch_operator(0.5, [n[0] / 2.0, n[1] / 2.0, n[2] / 2.0])).collect();
    DiscreteObservable::from_effects_unchecked(2, effects)
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// C³ → C³ ⊗ C³, |k⟩ ↦ Σ ε_ijk/√2 |ij⟩, as a one-element channel.
pub fn antisym_joint() -> Channel {
    let v = ComplexMatrix::from_fn(9, 3, |r, k| C64::new(levi_civita(r / 3, r % 3, k) * FRAC_1_SQRT_2, 0.0));
    Channel::from_elements(vec![v]).expect("isometry")
}

/// Marginal of [`antisym_joint`] on either factor; its dual is
/// ½(tr(A)1 − Aᵀ).
pub fn antisym_marginal() -> Channel {
    let el = (0..3)
        .map(|j| ComplexMatrix::from_fn(3, 3, |i, k| C64::new(levi_civita(i, j, k) * FRAC_1_SQRT_2, 0.0)))
        .collect();
    Channel::from_elements(el).expect("consistent shapes")
}

/// Equal mixture of U₁ = σ_z ⊗ R₁ and U₂ = 1 ⊗ R₂ with Haar-random R's;
/// its fixed points are span{1, σ_z ⊗ 1}.
pub fn iterated_channel(seed: u64) -> Channel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [id, _, _, z] = paulis();
    let r1 = random::unitary(2, &mut rng);
    let r2 = random::unitary(2, &mut rng);
    let el = vec![z.kron(&r1).scale_re(FRAC_1_SQRT_2), id.kron(&r2).scale_re(FRAC_1_SQRT_2)];
    Channel::from_elements(el).expect("consistent shapes")
}

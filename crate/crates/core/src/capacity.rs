//! Classical capacity of observables.
//!
//! For a fixed preparation the capacity is a Shannon capacity, computed by
//! Blahut–Arimoto. The observable's capacity is the supremum over
//! preparations; that outer problem is not convex, so
//! [`observable_capacity`] returns a lower bound together with the ensemble
//! attaining it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{validate_state, DiscreteObservable};
use crate::decoherence::StochasticMap;
use crate::error::{Error, Result};
use crate::numlin::{hermitian_eig, random, vnorm, ComplexMatrix, Tolerance, C64};

/// Shannon entropy in bits, with 0·log 0 = 0.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.log2()).sum::<f64>()
}

/// Mutual information of a joint distribution `joint[i][j]`, in bits.
pub fn mutual_information(joint: &[Vec<f64>]) -> f64 {
    let cols = joint.first().map_or(0, |r| r.len());
    let row: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<f64> = (0..cols).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    let mut mi = 0.0;
    for (i, r) in joint.iter().enumerate() {
        for (j, &p) in r.iter().enumerate() {
            // products of tiny marginals may underflow
            let den = row[i] * col[j];
            if p > 0.0 && den > 0.0 {
                mi += p * (p / den).log2();
            }
        }
    }
    mi.max(0.0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ensemble {
    priors: Vec<f64>,
    states: Vec<ComplexMatrix>,
}

impl Ensemble {
    pub fn new(priors: Vec<f64>, states: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        if priors.len() != states.len() || priors.is_empty() {
            return Err(Error::InvalidEnsemble(format!("{} priors for {} states", priors.len(), states.len())));
        }
        if priors.iter().any(|&p| !p.is_finite() || p < -tol.abs_eps) {
            return Err(Error::InvalidEnsemble("negative prior".into()));
        }
        let s: f64 = priors.iter().sum();
        if (s - 1.0).abs() > tol.abs_eps {
            return Err(Error::InvalidEnsemble(format!("priors sum to {s}")));
        }
        let d = states[0].rows();
        for rho in &states {
            if rho.shape() != (d, d) {
                return Err(Error::DimMismatch("ensemble states of different dimension".into()));
            }
            validate_state(rho, tol)?;
        }
        Ok(Ensemble { priors, states })
    }

    /// Ensemble of pure states given as kets (normalized here).
    pub fn pure(priors: Vec<f64>, kets: &[Vec<C64>], tol: &Tolerance) -> Result<Self> {
        let states = kets
            .iter()
            .map(|k| {
                let n = vnorm(k);
                ComplexMatrix::projector(&k.iter().map(|z| z / n).collect::<Vec<_>>())
            })
            .collect();
        Self::new(priors, states, tol)
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn states(&self) -> &[ComplexMatrix] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.priors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.priors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].rows()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlahutArimoto {
    /// Lower bound attained by `input`, in bits.
    pub capacity: f64,
    /// Upper bound max_i D(p_i‖q), in bits.
    pub upper: f64,
    pub input: Vec<f64>,
    pub iterations: usize,
}

/// Blahut–Arimoto on `p[i][j]` = probability of output j given input i.
/// Iterates until the gap between the dual upper bound and the attained
/// value drops below `tol` (bits).
pub fn blahut_arimoto(p: &[Vec<f64>], tol: f64, max_iter: usize) -> BlahutArimoto {
    let uniform = vec![1.0 / p.len().max(1) as f64; p.len()];
    blahut_arimoto_from(p, &uniform, tol, max_iter)
}

/// Blahut–Arimoto warm-started from `init`. A little uniform mass is mixed
/// in so that no input is frozen at zero by the multiplicative update.
pub fn blahut_arimoto_from(p: &[Vec<f64>], init: &[f64], tol: f64, max_iter: usize) -> BlahutArimoto {
    let n_in = p.len();
    let n_out = p.first().map_or(0, |r| r.len());
    let mix = 1e-6;
    let total: f64 = init.iter().sum();
    let mut r: Vec<f64> = if init.len() == n_in && total > 0.0 {
        init.iter().map(|x| (1.0 - mix) * x / total + mix / n_in as f64).collect()
    } else {
        vec![1.0 / n_in.max(1) as f64; n_in]
    };
    let mut out = BlahutArimoto { capacity: 0.0, upper: 0.0, input: r.clone(), iterations: 0 };
    if n_in == 0 || n_out == 0 {
        return out;
    }
    for it in 1..=max_iter.max(1) {
        let q: Vec<f64> = (0..n_out).map(|j| (0..n_in).map(|i| r[i] * p[i][j]).sum()).collect();
        // D(p_i ‖ q) in nats
        let dv: Vec<f64> = p
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&q)
                    .filter(|(&x, _)| x > 0.0)
                    .map(|(&x, &qj)| x * (x / qj).ln())
                    .sum()
            })
            .collect();
        let attained: f64 = r.iter().zip(&dv).map(|(ri, di)| ri * di).sum();
        let upper = dv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        out = BlahutArimoto {
            capacity: attained.max(0.0) / std::f64::consts::LN_2,
            upper: upper.max(0.0) / std::f64::consts::LN_2,
            input: r.clone(),
            iterations: it,
        };
        if out.upper - out.capacity < tol {
            break;
        }
        let dmax = upper;
        let w: Vec<f64> = r.iter().zip(&dv).map(|(ri, di)| ri * (di - dmax).exp()).collect();
        let z: f64 = w.iter().sum();
        r = w.into_iter().map(|x| x / z).collect();
    }
    out
}

/// Capacity of a classical channel in bits.
pub fn shannon_capacity(p: &StochasticMap, tol: f64) -> f64 {
    let rows: Vec<Vec<f64>> = (0..p.cols()).map(|i| (0..p.rows()).map(|j| p.get(j, i)).collect()).collect();
    blahut_arimoto(&rows, tol, 100_000).capacity
}

/// H(X(Σμ_iρ_i)) − Σ μ_i H(X(ρ_i)), in bits.
pub fn holevo_quantity(x: &DiscreteObservable, e: &Ensemble) -> Result<f64> {
    if x.dim() != e.dim() {
        return Err(Error::DimMismatch(format!("observable on C^{}, ensemble on C^{}", x.dim(), e.dim())));
    }
    let rows = outcome_rows(x, e.states());
    let n = x.len();
    let avg: Vec<f64> = (0..n).map(|j| e.priors().iter().zip(&rows).map(|(m, r)| m * r[j]).sum()).collect();
    let cond: f64 = e.priors().iter().zip(&rows).map(|(m, r)| m * entropy(r)).sum();
    Ok((entropy(&avg) - cond).max(0.0))
}

fn outcome_rows(x: &DiscreteObservable, states: &[ComplexMatrix]) -> Vec<Vec<f64>> {
    states
        .iter()
        .map(|rho| x.effects().iter().map(|xj| xj.hs_inner(rho).re.max(0.0)).collect())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CapacityOptions {
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Convergence threshold in bits.
    pub tol: f64,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions { restarts: 8, seed: 0, max_iter: 300, tol: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityEstimate {
    /// Certified lower bound: the Holevo quantity of `witness`.
    pub bits: f64,
    pub witness: Ensemble,
    pub restarts: usize,
}

fn expval(a: &ComplexMatrix, psi: &[C64]) -> f64 {
    let mut s = C64::new(0.0, 0.0);
    for (r, pr) in psi.iter().enumerate() {
        for (c, pc) in psi.iter().enumerate() {
            s += pr.conj() * a.get(r, c) * pc;
        }
    }
    s.re
}

fn probs(x: &DiscreteObservable, psi: &[C64]) -> Vec<f64> {
    x.effects().iter().map(|e| expval(e, psi).max(0.0)).collect()
}

fn info(mu: &[f64], rows: &[Vec<f64>]) -> f64 {
    let joint: Vec<Vec<f64>> = mu.iter().zip(rows).map(|(m, r)| r.iter().map(|p| m * p).collect()).collect();
    mutual_information(&joint)
}

fn normalize(v: Vec<C64>) -> Vec<C64> {
    let n = vnorm(&v);
    v.into_iter().map(|z| z / n).collect()
}

/// Blahut–Arimoto budget between state updates; the priors are warm-started,
/// so a short run per step suffices and a full run is done at the end.
const STEP_BA_ITER: usize = 50;
const FULL_BA_ITER: usize = 10_000;

/// One restart: alternate Blahut–Arimoto on the priors with ascent steps on
/// each pure state.
fn ascend(x: &DiscreteObservable, mut states: Vec<Vec<C64>>, opts: &CapacityOptions, tol: &Tolerance) -> (f64, Vec<f64>, Vec<Vec<C64>>) {
    let d = x.dim();
    let mut rows: Vec<Vec<f64>> = states.iter().map(|s| probs(x, s)).collect();
    let mut ba = blahut_arimoto(&rows, opts.tol, FULL_BA_ITER);
    let mut best = info(&ba.input, &rows);
    for _ in 0..opts.max_iter {
        let start = best;
        let mu = ba.input.clone();
        for i in 0..states.len() {
            if mu[i] < 1e-12 {
                // dormant states: move them to the best available direction
                continue;
            }
            let q: Vec<f64> = (0..x.len()).map(|j| mu.iter().zip(&rows).map(|(m, r)| m * r[j]).sum()).collect();
            let g = x.effects().iter().enumerate().fold(ComplexMatrix::zeros(d, d), |acc, (j, xj)| {
                let ratio = (rows[i][j].max(1e-15) / q[j].max(1e-300)).ln();
                &acc + &xj.scale_re(ratio)
            });
            let mut candidates = Vec::new();
            if let Ok(e) = hermitian_eig(&g.hermitian_part(), tol) {
                candidates.push(e.vector(d - 1));
            }
            let gpsi: Vec<C64> = (0..d).map(|r| (0..d).map(|c| g.get(r, c) * states[i][c]).sum()).collect();
            let mean = expval(&g, &states[i]);
            let dir: Vec<C64> = gpsi.iter().zip(&states[i]).map(|(a, b)| a - b * mean).collect();
            let dn = vnorm(&dir);
            if dn > 1e-14 {
                let mut s = 1.0 / dn;
                for _ in 0..12 {
                    candidates.push(normalize(states[i].iter().zip(&dir).map(|(p, v)| p + v * s).collect()));
                    s *= 0.5;
                }
            }
            for cand in candidates {
                let saved = std::mem::replace(&mut rows[i], probs(x, &cand));
                let val = info(&mu, &rows);
                if val > best + 1e-15 {
                    best = val;
                    states[i] = cand;
                } else {
                    rows[i] = saved;
                }
            }
        }
        ba = blahut_arimoto_from(&rows, &ba.input, opts.tol, STEP_BA_ITER);
        best = best.max(info(&ba.input, &rows));
        if best - start < opts.tol {
            break;
        }
    }
    let ba = blahut_arimoto_from(&rows, &ba.input, opts.tol, FULL_BA_ITER);
    let mu = ba.input.clone();
    let val = info(&mu, &rows);
    (val, mu, states)
}

/// Lower bound on sup over preparations of the Shannon capacity of X.
///
/// Restart 0 starts from the top eigenvectors of the effects, restart 1 from
/// the bottom ones, the rest from d² seeded random pure states.
pub fn observable_capacity(x: &DiscreteObservable, opts: &CapacityOptions, tol: &Tolerance) -> Result<CapacityEstimate> {
    let d = x.dim();
    let n = x.len();
    let trivial_witness = || Ensemble::new(vec![1.0], vec![ComplexMatrix::identity(d).scale_re(1.0 / d as f64)], tol);
    if n <= 1 {
        return Ok(CapacityEstimate { bits: 0.0, witness: trivial_witness()?, restarts: 0 });
    }
    let eigs: Vec<_> = x.effects().iter().map(|e| hermitian_eig(e, tol)).collect::<Result<_>>()?;
    let restarts = opts.restarts.max(2);
    let runs: Vec<(f64, Vec<f64>, Vec<Vec<C64>>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let states: Vec<Vec<C64>> = match r {
                0 => eigs.iter().map(|e| e.vector(d - 1)).collect(),
                1 => eigs.iter().map(|e| e.vector(0)).collect(),
                _ => {
                    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
                    (0..d * d).map(|_| random::pure_state(d, &mut rng)).collect()
                }
            };
            ascend(x, states, opts, tol)
        })
        .collect();
    let (_, mu, states) = runs
        .into_iter()
        .fold(None::<(f64, Vec<f64>, Vec<Vec<C64>>)>, |acc, run| match acc {
            // NaN never wins
            Some(a) if run.0.partial_cmp(&a.0) != Some(std::cmp::Ordering::Greater) => Some(a),
            _ => Some(run),
        })
        .expect("at least one restart");

    let keep: Vec<usize> = (0..mu.len()).filter(|&i| mu[i] > 1e-12).collect();
    let total: f64 = keep.iter().map(|&i| mu[i]).sum();
    let priors: Vec<f64> = keep.iter().map(|&i| mu[i] / total).collect();
    let kets: Vec<Vec<C64>> = keep.iter().map(|&i| states[i].clone()).collect();
    let witness = Ensemble::pure(priors, &kets, &tol.with_abs(tol.abs_eps.max(1e-9)))?;
    let bits = holevo_quantity(x, &witness)?.min((n as f64).log2());
    Ok(CapacityEstimate { bits, witness, restarts })
}

#![allow(dead_code)]

use qichan::algebras::block_algebra;
use qichan::numlin::random;
use qichan::prelude::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn tol() -> Tolerance {
    Tolerance::default()
}

/// Channel with `k` elements cut from a Haar isometry C^din → C^(k·dout);
/// `k` is raised to the smallest value for which such an isometry exists.
pub fn random_channel(din: usize, dout: usize, k: usize, rng: &mut impl Rng) -> Channel {
    let k = k.max(din.div_ceil(dout));
    let v = random::isometry(k * dout, din, rng);
    let elems = (0..k)
        .map(|i| ComplexMatrix::from_fn(dout, din, |r, c| v.get(i * dout + r, c)))
        .collect();
    Channel::new(elems, &tol()).unwrap()
}

/// Block sizes (n, m) with Σ n·m = d.
pub fn random_blocks(d: usize, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut left = d;
    let mut out = Vec::new();
    while left > 0 {
        let n = rng.random_range(1..=left.min(3));
        let m = rng.random_range(1..=left / n);
        out.push((n, m));
        left -= n * m;
    }
    out
}

pub fn conjugate(u: &ComplexMatrix, a: &ComplexMatrix) -> ComplexMatrix {
    u.matmul(a).matmul(&u.adjoint())
}

/// U (⊕ M_n ⊗ 1_m) U† for random blocks and a Haar U.
pub fn random_algebra(d: usize, rng: &mut impl Rng) -> (Vec<(usize, usize)>, OperatorBasisSet) {
    let blocks = random_blocks(d, rng);
    let u = random::unitary(d, rng);
    let alg = block_algebra(&blocks).map(d, |a| conjugate(&u, a), &tol()).unwrap();
    (blocks, alg)
}

/// Channel acting as 1_n ⊗ N_k on each block, conjugated by a Haar unitary,
/// so its sharp preserved algebra is U (⊕ M_n ⊗ 1_m) U†.
pub fn channel_with_algebra(blocks: &[(usize, usize)], rng: &mut impl Rng) -> (Channel, OperatorBasisSet) {
    let d: usize = blocks.iter().map(|&(n, m)| n * m).sum();
    let u = random::unitary(d, rng);
    let mut elems = Vec::new();
    let mut off = 0;
    for &(n, m) in blocks {
        let k = if m == 1 { 1 } else { 2 };
        let v = random::isometry(k * m, m, rng);
        for a in 0..k {
            let ka = ComplexMatrix::from_fn(m, m, |r, c| v.get(a * m + r, c));
            let local = ComplexMatrix::identity(n).kron(&ka);
            let mut full = ComplexMatrix::zeros(d, d);
            for r in 0..n * m {
                for c in 0..n * m {
                    full.set(off + r, off + c, local.get(r, c));
                }
            }
            elems.push(conjugate(&u, &full));
        }
        off += n * m;
    }
    let alg = block_algebra(blocks).map(d, |a| conjugate(&u, a), &tol()).unwrap();
    (Channel::new(elems, &tol()).unwrap(), alg)
}

/// Elements mixed by a random k×k unitary: same channel, different gauge.
pub fn remix(c: &Channel, rng: &mut impl Rng) -> Channel {
    let k = c.num_elements();
    let w = random::unitary(k, rng);
    let elems = (0..k)
        .map(|i| {
            let mut acc = ComplexMatrix::zeros(c.dim_out(), c.dim_in());
            for (j, e) in c.elements().iter().enumerate() {
                acc = &acc + &e.scale(w.get(i, j));
            }
            acc
        })
        .collect();
    Channel::new(elems, &tol()).unwrap()
}

pub fn mat_dist_max(a: &[ComplexMatrix], b: &[ComplexMatrix]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dist(y)).fold(0.0, f64::max)
}

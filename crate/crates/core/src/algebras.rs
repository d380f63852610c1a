//! Finite-dimensional *-algebras of operators: generation, commutants,
//! centers, intersections and the block decomposition ⊕ M_n ⊗ 1_m.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use nalgebra::DMatrix;

use crate::numlin::{
    from_hermitian_coords, hermitian_coords, hermitian_eig, nullspace, orthonormalize, rank, ComplexMatrix,
    Tolerance, C64, ZERO,
};

/// Eigenvalues closer than this are treated as one cluster when splitting
/// an algebra into blocks.
pub const CLUSTER_GAP: f64 = 1e-6;

/// Cooperative cancellation flag shared between a caller and a long
/// decomposition.
#[derive(Clone, Debug, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.is_cancelled() {
            Err(Error::Cancelled)
        } else {
            Ok(())
        }
    }
}

/// A subspace of d×d matrices with a Hilbert–Schmidt orthonormal basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorBasisSet {
    dim: usize,
    basis: Vec<ComplexMatrix>,
}

impl OperatorBasisSet {
    /// Orthonormal basis of span(mats). Inputs below `tol.abs_eps` times the
    /// largest input norm are rounding noise and dropped; the rest are
    /// normalized, so the orthogonalization cut is relative to each input.
    pub fn span(dim: usize, mats: &[ComplexMatrix], tol: &Tolerance) -> Result<Self> {
        if let Some(m) = mats.iter().find(|m| m.shape() != (dim, dim)) {
            return Err(Error::DimMismatch(format!("{:?} in a span of {dim}x{dim} operators", m.shape())));
        }
        let norms: Vec<f64> = mats.iter().map(|m| m.fro_norm()).collect();
        let floor = tol.abs_eps * norms.iter().copied().fold(0.0, f64::max);
        let mut vs = Vec::with_capacity(mats.len());
        for (m, &n) in mats.iter().zip(&norms) {
            if n > floor && n > f64::MIN_POSITIVE {
                vs.push(m.scale_re(1.0 / n).into_data());
            }
        }
        let basis = orthonormalize(&vs, tol.abs_eps)
            .into_iter()
            .map(|v| ComplexMatrix::new(dim, dim, v).expect("shape"))
            .collect();
        Ok(OperatorBasisSet { dim, basis })
    }

    /// Like [`span`](Self::span), but the basis consists of Hermitian
    /// matrices. Only meaningful for adjoint-closed spans.
    pub fn hermitian_span(dim: usize, mats: &[ComplexMatrix], tol: &Tolerance) -> Result<Self> {
        let raw = Self::span(dim, mats, tol)?;
        Ok(raw.hermitianized(tol))
    }

    /// Hermitian basis of an adjoint-closed span. Its Hermitian and
    /// anti-Hermitian parts span a real space of the same dimension n, so
    /// the top n right singular vectors of their real coordinates are kept;
    /// no cut is needed, and noise-level parts cannot be promoted.
    fn hermitianized(&self, _tol: &Tolerance) -> Self {
        let n = self.basis.len();
        let d = self.dim;
        if n == 0 {
            return self.clone();
        }
        let mut rows = Vec::with_capacity(2 * n);
        for b in &self.basis {
            let ba = b.adjoint();
            rows.push(hermitian_coords(&(b + &ba).scale_re(0.5)));
            rows.push(hermitian_coords(&(b - &ba).scale(C64::new(0.0, -0.5))));
        }
        let m = DMatrix::from_fn(2 * n, d * d, |r, c| rows[r][c]);
        // pad to square so V is complete
        let m = if m.nrows() < m.ncols() { m.resize(d * d, d * d, 0.0) } else { m };
        let svd = m.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
        let basis = order[..n.min(order.len())]
            .iter()
            .map(|&k| {
                let x: Vec<f64> = vt.row(k).iter().copied().collect();
                from_hermitian_coords(d, &x)
            })
            .collect();
        OperatorBasisSet { dim: d, basis }
    }

    pub fn full(d: usize) -> Self {
        OperatorBasisSet { dim: d, basis: crate::channels::matrix_units(d) }
    }

    pub fn scalars(d: usize) -> Self {
        OperatorBasisSet { dim: d, basis: vec![ComplexMatrix::identity(d).scale_re(1.0 / (d as f64).sqrt())] }
    }

    pub fn diagonal(d: usize) -> Self {
        OperatorBasisSet { dim: d, basis: (0..d).map(|i| ComplexMatrix::unit(d, i, i)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the subspace.
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    /// Orthogonal projection of X onto the span.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut p = ComplexMatrix::zeros(self.dim, self.dim);
        for b in &self.basis {
            p = &p + &b.scale(b.hs_inner(x));
        }
        p
    }

    /// ‖X − proj(X)‖ in operator norm.
    pub fn residual(&self, x: &ComplexMatrix) -> f64 {
        (x - &self.project(x)).op_norm()
    }

    /// Membership with a residual bound relative to max(1, ‖X‖).
    pub fn contains(&self, x: &ComplexMatrix, tol: &Tolerance) -> bool {
        x.shape() == (self.dim, self.dim) && self.residual(x) <= tol.abs_eps * x.op_norm().max(1.0)
    }

    /// Same subspace (dimension and mutual containment).
    pub fn same_span(&self, other: &Self, tol: &Tolerance) -> bool {
        self.dim == other.dim
            && self.len() == other.len()
            && other.basis.iter().all(|b| self.contains(b, tol))
            && self.basis.iter().all(|b| other.contains(b, tol))
    }

    /// Largest distance of a product of basis elements from the span.
    pub fn closure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.basis {
            for b in &self.basis {
                worst = worst.max(self.residual(&a.matmul(b)));
            }
        }
        worst
    }

    /// Largest commutator norm between basis elements.
    pub fn commutativity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for b in &self.basis[i + 1..] {
                worst = worst.max(a.commutator(b).op_norm());
            }
        }
        worst
    }

    pub fn is_algebra(&self, tol: &Tolerance) -> bool {
        self.contains(&ComplexMatrix::identity(self.dim), tol) && self.closure_residual() <= tol.abs_eps.sqrt()
    }

    /// Image of the span under a linear map, re-orthonormalized.
    pub fn map(&self, dim: usize, f: impl Fn(&ComplexMatrix) -> ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        let imgs: Vec<_> = self.basis.iter().map(f).collect();
        Self::span(dim, &imgs, tol)
    }
}

fn check_square_family(mats: &[ComplexMatrix]) -> Result<usize> {
    let d = mats
        .first()
        .ok_or_else(|| Error::DimMismatch("empty operator family".into()))?
        .require_square()?;
    if let Some(bad) = mats.iter().find(|m| m.shape() != (d, d)) {
        return Err(Error::DimMismatch(format!("{:?} among {d}x{d} operators", bad.shape())));
    }
    Ok(d)
}

/// Smallest *-algebra containing `gens` and the identity.
///
/// Grows span{words in gens ∪ gens†} by right multiplication until nothing
/// new appears; the dimension is capped at d².
pub fn generate_star_algebra(gens: &[ComplexMatrix], tol: &Tolerance) -> Result<OperatorBasisSet> {
    let d = check_square_family(gens)?;
    let mut letters: Vec<ComplexMatrix> = Vec::with_capacity(2 * gens.len());
    for g in gens {
        letters.push(g.clone());
        letters.push(g.adjoint());
    }
    let letters = OperatorBasisSet::span(d, &letters, tol)?;
    let mut current = OperatorBasisSet::span(d, &[ComplexMatrix::identity(d)], tol)?;
    loop {
        let mut cand = current.basis.clone();
        for b in &current.basis {
            for g in letters.basis() {
                cand.push(b.matmul(g));
            }
        }
        let next = OperatorBasisSet::span(d, &cand, tol)?;
        let grew = next.len() > current.len();
        current = next;
        if !grew || current.len() >= d * d {
            break;
        }
    }
    Ok(current.hermitianized(tol))
}

/// {A : [A, S] = 0 for all S in `set`}.
///
/// The set is symmetrized with adjoints first, so the result is always a
/// *-algebra (the commutant of the *-algebra generated by `set`).
pub fn commutant(set: &[ComplexMatrix], tol: &Tolerance) -> Result<OperatorBasisSet> {
    commutant_with(set, tol, &CancelToken::new())
}

pub fn commutant_with(set: &[ComplexMatrix], tol: &Tolerance, cancel: &CancelToken) -> Result<OperatorBasisSet> {
    let d = check_square_family(set)?;
    let mut sym = Vec::with_capacity(2 * set.len());
    for s in set {
        sym.push(s.clone());
        sym.push(s.adjoint());
    }
    let s = OperatorBasisSet::span(d, &sym, tol)?;
    let n = d * d;
    let id = ComplexMatrix::identity(d);
    // Row-major vec: vec(X S - S X) = (1 ⊗ Sᵀ - S ⊗ 1) vec(X).
    let mut stacked = ComplexMatrix::zeros(n * s.len().max(1), n);
    for (k, sk) in s.basis().iter().enumerate() {
        cancel.check()?;
        let block = &id.kron(&sk.transpose()) - &sk.kron(&id);
        for r in 0..n {
            for c in 0..n {
                stacked.set(k * n + r, c, block.get(r, c));
            }
        }
    }
    cancel.check()?;
    let ns = nullspace(&stacked, tol);
    let mats: Vec<ComplexMatrix> = (0..ns.cols())
        .map(|c| ComplexMatrix::new(d, d, ns.column(c)).expect("shape"))
        .collect();
    Ok(OperatorBasisSet::span(d, &mats, tol)?.hermitianized(tol))
}

/// Span intersection, computed as the nullspace of (1 − P_B) restricted
/// to A.
pub fn intersect(a: &OperatorBasisSet, b: &OperatorBasisSet, tol: &Tolerance) -> Result<OperatorBasisSet> {
    if a.dim != b.dim {
        return Err(Error::DimMismatch(format!("intersecting spans on {} and {}", a.dim, b.dim)));
    }
    if a.is_empty() || b.is_empty() {
        return Ok(OperatorBasisSet { dim: a.dim, basis: vec![] });
    }
    let n = a.dim * a.dim;
    let cols: Vec<Vec<C64>> = a.basis.iter().map(|m| (m - &b.project(m)).into_data()).collect();
    let m = ComplexMatrix::from_columns(&cols)?;
    debug_assert_eq!(m.rows(), n);
    let ns = nullspace(&m, tol);
    let mut mats = Vec::with_capacity(ns.cols());
    for c in 0..ns.cols() {
        let coeff = ns.column(c);
        let mut x = ComplexMatrix::zeros(a.dim, a.dim);
        for (w, bm) in coeff.iter().zip(&a.basis) {
            x = &x + &bm.scale(*w);
        }
        mats.push(x);
    }
    let raw = OperatorBasisSet::span(a.dim, &mats, tol)?;
    // Intersections of adjoint-closed spans are adjoint closed.
    let adj_closed = raw.basis.iter().all(|m| raw.contains(&m.adjoint(), &tol.with_abs(tol.abs_eps.sqrt())));
    Ok(if adj_closed { raw.hermitianized(tol) } else { raw })
}

pub fn contains(a: &OperatorBasisSet, x: &ComplexMatrix, tol: &Tolerance) -> bool {
    a.contains(x, tol)
}

/// Z(A) = A ∩ A′.
pub fn center(a: &OperatorBasisSet, tol: &Tolerance) -> Result<OperatorBasisSet> {
    let r = a.closure_residual();
    if r > tol.abs_eps.sqrt() || !a.contains(&ComplexMatrix::identity(a.dim), tol) {
        return Err(Error::NotAnAlgebra { residual: r });
    }
    let comm = commutant(a.basis(), tol)?;
    intersect(a, &comm, tol)
}

/// A *-algebra with its decomposition ⊕_k M_{n_k} ⊗ 1_{m_k}.
#[derive(Clone, Debug)]
pub struct AlgebraStructure {
    pub carrier: OperatorBasisSet,
    pub central_projectors: Vec<ComplexMatrix>,
    /// (n_k, m_k) per block, same order as `central_projectors`.
    pub block_dims: Vec<(usize, usize)>,
    /// Unitary whose columns are adapted to the blocks: conjugating the
    /// carrier by it yields block-diagonal x ⊗ 1_m matrices.
    pub basis_change: ComplexMatrix,
    /// Largest deviation from that pattern over the carrier basis.
    pub pattern_residual: f64,
}

impl AlgebraStructure {
    pub fn dimension(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_commutative(&self) -> bool {
        self.block_dims.iter().all(|&(n, _)| n == 1)
    }

    /// Single block with trivial multiplicity: an ordinary error-correcting
    /// code.
    pub fn is_factor(&self) -> bool {
        self.block_dims.len() == 1
    }
}

/// Decompose with the default seed (0).
pub fn structure_decompose_default(a: &OperatorBasisSet, tol: &Tolerance) -> Result<AlgebraStructure> {
    structure_decompose(a, 0, tol)
}

pub fn structure_decompose(a: &OperatorBasisSet, seed: u64, tol: &Tolerance) -> Result<AlgebraStructure> {
    structure_decompose_with(a, seed, tol, &CancelToken::new())
}

pub fn structure_decompose_with(
    a: &OperatorBasisSet,
    seed: u64,
    tol: &Tolerance,
    cancel: &CancelToken,
) -> Result<AlgebraStructure> {
    let d = a.dim;
    let r = a.closure_residual();
    if r > tol.abs_eps.sqrt() || !a.contains(&ComplexMatrix::identity(d), tol) {
        return Err(Error::NotAnAlgebra { residual: r });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = intersect(a, &commutant_with(a.basis(), tol, cancel)?, tol)?;
    cancel.check()?;

    let generic = random_real_combination(z.basis(), &mut rng).hermitian_part();
    let clusters = eigen_clusters(&generic, tol)?;

    struct Block {
        projector: ComplexMatrix,
        q: ComplexMatrix,
        n: usize,
        m: usize,
        com: f64,
    }
    let mut blocks = Vec::with_capacity(clusters.len());
    for q in clusters {
        cancel.check()?;
        let b = q.cols();
        let restricted: Vec<ComplexMatrix> =
            a.basis().iter().map(|x| q.adjoint().matmul(x).matmul(&q)).collect();
        let rows: Vec<Vec<C64>> = restricted.iter().map(|x| x.vectorize()).collect();
        let block_alg_dim = rank(&ComplexMatrix::from_columns(&rows)?, tol);
        let nf = (block_alg_dim as f64).sqrt();
        let n = nf.round() as usize;
        if n == 0 || n * n != block_alg_dim || b % n != 0 {
            return Err(Error::DecompositionFailed(format!(
                "block of dimension {b} carries an algebra of dimension {block_alg_dim}"
            )));
        }
        let projector = q.matmul(&q.adjoint());
        let com = (0..d).map(|i| i as f64 * projector.get(i, i).re).sum::<f64>() / b as f64;
        blocks.push(Block { projector, q, n, m: b / n, com });
    }
    blocks.sort_by(|x, y| y.n.cmp(&x.n).then(y.m.cmp(&x.m)).then(x.com.total_cmp(&y.com)));

    let mut columns: Vec<Vec<C64>> = Vec::with_capacity(d);
    for blk in &blocks {
        cancel.check()?;
        let restricted: Vec<ComplexMatrix> =
            a.basis().iter().map(|x| blk.q.adjoint().matmul(x).matmul(&blk.q)).collect();
        let local = adapted_block_basis(&restricted, blk.n, blk.m, &mut rng, tol)?;
        let full = blk.q.matmul(&local);
        for c in 0..full.cols() {
            columns.push(full.column(c));
        }
    }
    let basis_change = ComplexMatrix::from_columns(&columns)?;
    let block_dims: Vec<(usize, usize)> = blocks.iter().map(|b| (b.n, b.m)).collect();
    let pattern_residual = a
        .basis()
        .iter()
        .map(|x| block_pattern_residual(&basis_change.adjoint().matmul(x).matmul(&basis_change), &block_dims))
        .fold(0.0, f64::max);

    Ok(AlgebraStructure {
        carrier: a.clone(),
        central_projectors: blocks.into_iter().map(|b| b.projector).collect(),
        block_dims,
        basis_change,
        pattern_residual,
    })
}

fn random_real_combination(mats: &[ComplexMatrix], rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let d = mats[0].rows();
    let mut x = ComplexMatrix::zeros(d, d);
    for m in mats {
        let w: f64 = StandardNormal.sample(rng);
        x = &x + &m.scale_re(w);
    }
    x
}

/// Eigenspaces of a Hermitian matrix, grouping eigenvalues whose
/// consecutive gaps are below [`CLUSTER_GAP`]. Each space is returned as an
/// isometry (orthonormal columns).
fn eigen_clusters(h: &ComplexMatrix, tol: &Tolerance) -> Result<Vec<ComplexMatrix>> {
    let e = hermitian_eig(h, tol)?;
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=e.values.len() {
        if k == e.values.len() || e.values[k] - e.values[k - 1] >= CLUSTER_GAP {
            let cols: Vec<Vec<C64>> = (start..k).map(|j| e.vector(j)).collect();
            out.push(ComplexMatrix::from_columns(&cols)?);
            start = k;
        }
    }
    Ok(out)
}

/// Orthonormal basis of a block in which the restricted algebra reads
/// x ⊗ 1_m. Columns ordered (a, j) ↦ a·m + j.
fn adapted_block_basis(
    restricted: &[ComplexMatrix],
    n: usize,
    m: usize,
    rng: &mut ChaCha8Rng,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    let b = n * m;
    if n == 1 {
        return Ok(ComplexMatrix::identity(b));
    }
    let h = random_real_combination(restricted, rng).hermitian_part();
    let spaces = eigen_clusters(&h, tol)?;
    if spaces.len() != n || spaces.iter().any(|s| s.cols() != m) {
        return Err(Error::DecompositionFailed(format!(
            "expected {n} eigenspaces of dimension {m}, found sizes {:?}",
            spaces.iter().map(|s| s.cols()).collect::<Vec<_>>()
        )));
    }
    let mut g = ComplexMatrix::zeros(b, b);
    for x in restricted {
        let w = C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
        g = &g + &x.scale(w);
    }
    let e1 = &spaces[0];
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(b);
    for ea in &spaces {
        // E_a† G E_1 is a multiple of the unitary linking the two copies.
        let t = ea.adjoint().matmul(&g).matmul(e1);
        let nt = t.op_norm();
        if nt <= tol.abs_eps {
            return Err(Error::DecompositionFailed("degenerate block coupling".into()));
        }
        let fa = ea.matmul(&t.scale_re(1.0 / nt));
        for j in 0..m {
            cols.push(fa.column(j));
        }
    }
    // Normalize away the small non-unitarity of t/‖t‖ caused by rounding.
    let raw = ComplexMatrix::from_columns(&cols)?;
    let s = crate::numlin::svd(&raw);
    Ok(s.u.matmul(&s.v_adj))
}

/// Distance of a matrix from block-diagonal ⊕ x_k ⊗ 1_{m_k}.
pub fn block_pattern_residual(x: &ComplexMatrix, blocks: &[(usize, usize)]) -> f64 {
    let d = x.rows();
    let mut target = ComplexMatrix::zeros(d, d);
    let mut off = 0;
    for &(n, m) in blocks {
        let b = n * m;
        let sub = ComplexMatrix::from_fn(b, b, |r, c| x.get(off + r, off + c));
        let reduced = sub
            .partial_trace(&[n, m], &[0])
            .expect("block shape")
            .scale_re(1.0 / m as f64);
        let rebuilt = reduced.kron(&ComplexMatrix::identity(m));
        for r in 0..b {
            for c in 0..b {
                target.set(off + r, off + c, rebuilt.get(r, c));
            }
        }
        off += b;
    }
    x.dist(&target)
}

/// Block-diagonal algebra ⊕_k M_{n_k} ⊗ 1_{m_k} in the computational basis.
pub fn block_algebra(blocks: &[(usize, usize)]) -> OperatorBasisSet {
    let d: usize = blocks.iter().map(|&(n, m)| n * m).sum();
    let mut basis = Vec::new();
    let mut off = 0;
    for &(n, m) in blocks {
        let emb = 1.0 / (m as f64).sqrt();
        for i in 0..n {
            for j in 0..n {
                let local = ComplexMatrix::unit(n, i, j).kron(&ComplexMatrix::identity(m)).scale_re(emb);
                let mut full = ComplexMatrix::zeros(d, d);
                for r in 0..n * m {
                    for c in 0..n * m {
                        let v = local.get(r, c);
                        if v != ZERO {
                            full.set(off + r, off + c, v);
                        }
                    }
                }
                basis.push(full);
            }
        }
        off += n * m;
    }
    OperatorBasisSet { dim: d, basis }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::{paulis, random};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn conj_all(u: &ComplexMatrix, a: &OperatorBasisSet) -> OperatorBasisSet {
        OperatorBasisSet { dim: a.dim, basis: a.basis.iter().map(|b| u.sandwich(b)).collect() }
    }

    #[test]
    fn generation_examples() {
        let [id, x, _, z] = paulis();
        assert_eq!(generate_star_algebra(&[id], &tol()).unwrap().len(), 1);
        let zd = generate_star_algebra(std::slice::from_ref(&z), &tol()).unwrap();
        assert!(zd.same_span(&OperatorBasisSet::diagonal(2), &tol()));
        assert_eq!(generate_star_algebra(&[x, z], &tol()).unwrap().len(), 4);
    }

    #[test]
    fn generation_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = random::hermitian(2, &mut rng).kron(&ComplexMatrix::identity(2));
        let a = generate_star_algebra(&[g], &tol()).unwrap();
        let again = generate_star_algebra(a.basis(), &tol()).unwrap();
        assert!(a.same_span(&again, &tol()));
        assert_eq!(a.len(), 2);
    }

    #[test]
    fn commutant_examples() {
        let c = commutant(&[ComplexMatrix::identity(3)], &tol()).unwrap();
        assert_eq!(c.len(), 9);
        let c = commutant(&paulis(), &tol()).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.contains(&ComplexMatrix::identity(2), &tol()));
        let diag: Vec<_> = (0..3).map(|i| ComplexMatrix::unit(3, i, i)).collect();
        assert!(commutant(&diag, &tol()).unwrap().same_span(&OperatorBasisSet::diagonal(3), &tol()));
    }

    #[test]
    fn commutant_basis_is_hermitian_and_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random::unitary(5, &mut rng);
        let a = conj_all(&u, &block_algebra(&[(2, 1), (1, 3)]));
        let c = commutant(a.basis(), &tol()).unwrap();
        // commutant of M_2 ⊕ (1 ⊗ 1_3) is C ⊕ M_3
        assert_eq!(c.len(), 1 + 9);
        for (i, x) in c.basis().iter().enumerate() {
            assert!(x.hermiticity_residual() < 1e-12);
            for (j, y) in c.basis().iter().enumerate() {
                let g = x.hs_inner(y);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - C64::new(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn center_examples() {
        assert_eq!(center(&OperatorBasisSet::full(3), &tol()).unwrap().len(), 1);
        let d = OperatorBasisSet::diagonal(4);
        assert!(center(&d, &tol()).unwrap().same_span(&d, &tol()));
        let a = block_algebra(&[(2, 2), (3, 1)]);
        let z = center(&a, &tol()).unwrap();
        assert_eq!(z.len(), 2);
        assert!(z.commutativity_residual() < 1e-12);
        let not_alg = OperatorBasisSet::span(2, &[paulis()[1].clone()], &tol()).unwrap();
        assert!(matches!(center(&not_alg, &tol()), Err(Error::NotAnAlgebra { .. })));
    }

    #[test]
    fn intersection_examples() {
        let [id, x, _, z] = paulis();
        let d = OperatorBasisSet::diagonal(2);
        let ix = OperatorBasisSet::span(2, &[id.clone(), x.clone()], &tol()).unwrap();
        let i = intersect(&d, &ix, &tol()).unwrap();
        assert_eq!(i.len(), 1);
        assert!(i.contains(&id, &tol()));
        assert!(intersect(&d, &OperatorBasisSet::full(2), &tol()).unwrap().same_span(&d, &tol()));
        assert!(contains(&d, &z, &tol()));
        assert!(!contains(&d, &x, &tol()));
    }

    #[test]
    fn decomposes_rotated_block_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u = random::unitary(7, &mut rng);
        let a = conj_all(&u, &block_algebra(&[(3, 1), (2, 2)]));
        let s = structure_decompose(&a, 0, &tol()).unwrap();
        assert_eq!(s.block_dims, vec![(3, 1), (2, 2)]);
        assert!(s.pattern_residual < 1e-8, "{}", s.pattern_residual);
        let total = s.central_projectors.iter().fold(ComplexMatrix::zeros(7, 7), |acc, p| &acc + p);
        assert!(total.dist(&ComplexMatrix::identity(7)) < 1e-9);
        let bc = &s.basis_change;
        assert!(bc.adjoint().matmul(bc).dist(&ComplexMatrix::identity(7)) < 1e-10);
    }

    #[test]
    fn decomposition_examples() {
        let s = structure_decompose(&OperatorBasisSet::full(3), 0, &tol()).unwrap();
        assert_eq!(s.block_dims, vec![(3, 1)]);
        let s = structure_decompose(&OperatorBasisSet::diagonal(3), 0, &tol()).unwrap();
        assert_eq!(s.block_dims, vec![(1, 1); 3]);
        // canonical order follows the position of the projectors
        for (k, p) in s.central_projectors.iter().enumerate() {
            assert!(p.dist(&ComplexMatrix::unit(3, k, k)) < 1e-9);
        }
    }

    #[test]
    fn decomposition_is_seed_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random::unitary(6, &mut rng);
        let a = conj_all(&u, &block_algebra(&[(1, 2), (2, 1), (1, 1), (1, 1)]));
        let first = structure_decompose(&a, 0, &tol()).unwrap();
        for seed in 1..5 {
            let s = structure_decompose(&a, seed, &tol()).unwrap();
            assert_eq!(s.block_dims, first.block_dims);
        }
    }

    #[test]
    fn cancellation_is_honoured() {
        let tok = CancelToken::new();
        tok.cancel();
        let r = structure_decompose_with(&OperatorBasisSet::full(2), 0, &tol(), &tok);
        assert_eq!(r.unwrap_err(), Error::Cancelled);
    }
}

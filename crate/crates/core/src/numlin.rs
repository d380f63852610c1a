//! Dense complex linear algebra used throughout the crate.
//!
//! Matrices are small (dimension at most a few hundred), so everything is a
//! row-major `Vec<Complex64>`. Eigen/SVD kernels are delegated to nalgebra.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Numerical tolerances shared by every check.
///
/// `abs_eps` bounds residual norms; `rank_rel` is the relative singular-value
/// cut used for rank and nullspace decisions.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    pub abs_eps: f64,
    pub rank_rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs_eps: 1e-9, rank_rel: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(abs_eps: f64, rank_rel: f64) -> Result<Self> {
        if !(abs_eps.is_finite() && abs_eps > 0.0) {
            return Err(Error::InvalidTolerance(format!("abs_eps = {abs_eps}")));
        }
        if !(rank_rel.is_finite() && rank_rel > 0.0 && rank_rel < 1.0) {
            return Err(Error::InvalidTolerance(format!("rank_rel = {rank_rel}")));
        }
        Ok(Tolerance { abs_eps, rank_rel })
    }

    /// Same rank cut, different residual bound.
    pub fn with_abs(self, abs_eps: f64) -> Self {
        Tolerance { abs_eps, ..self }
    }
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self.get(r, c);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Serialized as a list of rows, each entry a `[re, im]` pair.
impl serde::Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.rows)
            .map(|r| self.row(r).iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        let data = rows.iter().flatten().map(|p| C64::new(p[0], p[1])).collect();
        ComplexMatrix::new(rows.len(), cols, data).map_err(serde::de::Error::custom)
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Real matrix from row slices. Panics on ragged input; meant for literals.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == m), "ragged rows");
        Self::from_fn(n, m, |r, c| C64::new(rows[r][c], 0.0))
    }

    pub fn diag_real(d: &[f64]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |r, c| if r == c { C64::new(d[r], 0.0) } else { ZERO })
    }

    pub fn diag(d: &[C64]) -> Self {
        let n = d.len();
        Self::from_fn(n, n, |r, c| if r == c { d[r] } else { ZERO })
    }

    /// |i⟩⟨j| in dimension d.
    pub fn unit(d: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(d, d);
        m.data[i * d + j] = ONE;
        m
    }

    /// Column vector |i⟩ in dimension d.
    pub fn ket(d: usize, i: usize) -> Self {
        let mut m = Self::zeros(d, 1);
        m.data[i] = ONE;
        m
    }

    pub fn column_vector(v: &[C64]) -> Self {
        ComplexMatrix { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    /// |u⟩⟨v|
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
    }

    pub fn from_columns(cols: &[Vec<C64>]) -> Result<Self> {
        let n = cols.first().map_or(0, |c| c.len());
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::DimMismatch("columns of unequal length".into()));
        }
        Ok(Self::from_fn(n, cols.len(), |r, c| cols[c][r]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn row(&self, r: usize) -> Vec<C64> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn require_square(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch {:?} x {:?}", self.shape(), rhs.shape());
        let mut out = vec![ZERO; self.rows * rhs.cols];
        for r in 0..self.rows {
            let orow = &mut out[r * rhs.cols..(r + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        ComplexMatrix { rows: self.rows, cols: rhs.cols, data: out }
    }

    /// A B A†
    pub fn sandwich(&self, b: &Self) -> Self {
        self.matmul(b).matmul(&self.adjoint())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Hilbert–Schmidt inner product tr(A† B).
    pub fn hs_inner(&self, other: &Self) -> C64 {
        assert_eq!(self.shape(), other.shape());
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Operator norm (largest singular value).
    pub fn op_norm(&self) -> f64 {
        if self.data.is_empty() {
            return 0.0;
        }
        let s = self.to_na().singular_values();
        s.iter().cloned().fold(0.0, f64::max)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = other.shape();
        Self::from_fn(self.rows * r2, self.cols * c2, |r, c| {
            self.get(r / r2, c / c2) * other.get(r % r2, c % c2)
        })
    }

    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_re(0.5)
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (self - &self.adjoint()).op_norm()
    }

    pub fn is_hermitian(&self, tol: &Tolerance) -> bool {
        self.is_square() && self.hermiticity_residual() <= tol.abs_eps
    }

    /// Distance in operator norm.
    pub fn dist(&self, other: &Self) -> f64 {
        (self - other).op_norm()
    }

    /// Flatten row-major into a vector (the "vec" used for linear solves).
    pub fn vectorize(&self) -> Vec<C64> {
        self.data.clone()
    }

    pub fn from_vec_square(v: &[C64]) -> Result<Self> {
        let n = (v.len() as f64).sqrt().round() as usize;
        if n * n != v.len() {
            return Err(Error::DimMismatch(format!("{} is not a square length", v.len())));
        }
        Ok(ComplexMatrix { rows: n, cols: n, data: v.to_vec() })
    }

    pub fn to_na(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_na(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }

    /// Partial trace over the factors *not* listed in `keep`.
    ///
    /// `dims` are the tensor factors in order; `keep` indices must be
    /// strictly increasing.
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        let n = self.require_square()?;
        let total: usize = dims.iter().product();
        if total != n {
            return Err(Error::DimMismatch(format!("factors {dims:?} do not multiply to {n}")));
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
            return Err(Error::DimMismatch(format!("bad keep list {keep:?}")));
        }
        let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
        let kd: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
        let td: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
        let kn: usize = kd.iter().product();
        let tn: usize = td.iter().product();

        let compose = |kidx: usize, tidx: usize| -> usize {
            let mut digits = vec![0usize; dims.len()];
            let mut x = kidx;
            for (pos, &k) in keep.iter().enumerate().rev() {
                digits[k] = x % kd[pos];
                x /= kd[pos];
            }
            let mut y = tidx;
            for (pos, &k) in traced.iter().enumerate().rev() {
                digits[k] = y % td[pos];
                y /= td[pos];
            }
            digits.iter().zip(dims).fold(0, |acc, (&d, &m)| acc * m + d)
        };

        let mut out = Self::zeros(kn, kn);
        for a in 0..kn {
            for b in 0..kn {
                let mut s = ZERO;
                for t in 0..tn {
                    s += self.get(compose(a, t), compose(b, t));
                }
                out.set(a, b, s);
            }
        }
        Ok(out)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_re(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Sum of equally shaped matrices; `None` on an empty iterator.
pub fn sum_all<'a>(it: impl IntoIterator<Item = &'a ComplexMatrix>) -> Option<ComplexMatrix> {
    let mut it = it.into_iter();
    let first = it.next()?.clone();
    Some(it.fold(first, |acc, m| &acc + m))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, same order as `values`.
    pub vectors: ComplexMatrix,
}

impl Eigh {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

pub fn hermitian_eig(a: &ComplexMatrix, tol: &Tolerance) -> Result<Eigh> {
    let n = a.require_square()?;
    let res = a.hermiticity_residual();
    let scale = a.op_norm().max(1.0);
    if res > tol.abs_eps * scale {
        return Err(Error::NotHermitian { residual: res });
    }
    Ok(eigh_unchecked(&a.hermitian_part(), n))
}

fn eigh_unchecked(h: &ComplexMatrix, n: usize) -> Eigh {
    if n == 0 {
        return Eigh { values: vec![], vectors: ComplexMatrix::zeros(0, 0) };
    }
    let se = nalgebra::SymmetricEigen::new(h.to_na());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| se.eigenvalues[x].total_cmp(&se.eigenvalues[y]));
    let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| se.eigenvectors[(r, order[c])]);
    Eigh { values, vectors }
}

/// Full singular value decomposition A = U Σ V†, values descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v_adj: ComplexMatrix,
}

pub fn svd(a: &ComplexMatrix) -> Svd {
    let s = a.to_na().svd(true, true);
    let u = s.u.expect("svd u");
    let vt = s.v_t.expect("svd v_t");
    let k = s.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| s.singular_values[y].total_cmp(&s.singular_values[x]));
    Svd {
        u: ComplexMatrix::from_fn(u.nrows(), k, |r, c| u[(r, order[c])]),
        singular_values: order.iter().map(|&i| s.singular_values[i]).collect(),
        v_adj: ComplexMatrix::from_fn(k, vt.ncols(), |r, c| vt[(order[r], c)]),
    }
}

/// Singular values above this count towards the rank. The cut is relative
/// to max(σ_max, 1), so a matrix made only of rounding noise has rank 0.
fn rank_cut(smax: f64, tol: &Tolerance) -> f64 {
    tol.rank_rel * smax.max(1.0)
}

/// Numerical rank: count of σ_i > rank_rel · max(σ_max, 1).
pub fn rank(a: &ComplexMatrix, tol: &Tolerance) -> usize {
    if a.data().is_empty() {
        return 0;
    }
    let s = svd(a).singular_values;
    let cut = rank_cut(s.first().copied().unwrap_or(0.0), tol);
    s.iter().filter(|&&x| x > cut).count()
}

/// Orthonormal basis of the right nullspace {x : A x = 0}, as columns.
pub fn nullspace(a: &ComplexMatrix, tol: &Tolerance) -> ComplexMatrix {
    let (m, n) = a.shape();
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    // The thin SVD of a wide matrix drops part of V; pad to at least square.
    let padded;
    let a = if m < n {
        let mut p = ComplexMatrix::zeros(n, n);
        p.data[..m * n].copy_from_slice(a.data());
        padded = p;
        &padded
    } else {
        a
    };
    let s = svd(a);
    let cut = rank_cut(s.singular_values.first().copied().unwrap_or(0.0), tol);
    let r = s.singular_values.iter().filter(|&&x| x > cut).count();
    let v = s.v_adj.adjoint();
    ComplexMatrix::from_fn(n, n - r, |row, c| v.get(row, r + c))
}

/// Pseudo-inverse square root of a PSD matrix, (A^{1/2})^+.
///
/// Eigenvalues at or below `rank_rel · λ_max` are treated as kernel.
pub fn psd_sqrt_pinv(a: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let e = hermitian_eig(a, tol)?;
    let lmax = e.values.iter().cloned().fold(0.0, f64::max);
    let lmin = e.values.first().copied().unwrap_or(0.0);
    if lmin < -tol.abs_eps * lmax.max(1.0) {
        return Err(Error::NotPsd { min_eigenvalue: lmin });
    }
    let f: Vec<f64> = e
        .values
        .iter()
        .map(|&l| if l > tol.rank_rel * lmax && l > 0.0 { 1.0 / l.sqrt() } else { 0.0 })
        .collect();
    Ok(apply_spectral(&e, &f))
}

/// Square root of a PSD matrix; small negative eigenvalues are clipped.
pub fn psd_sqrt(a: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let e = hermitian_eig(a, tol)?;
    let lmax = e.values.iter().cloned().fold(0.0, f64::max);
    let lmin = e.values.first().copied().unwrap_or(0.0);
    if lmin < -tol.abs_eps * lmax.max(1.0) {
        return Err(Error::NotPsd { min_eigenvalue: lmin });
    }
    let f: Vec<f64> = e.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    Ok(apply_spectral(&e, &f))
}

/// V diag(f) V†
pub fn apply_spectral(e: &Eigh, f: &[f64]) -> ComplexMatrix {
    let n = f.len();
    let v = &e.vectors;
    ComplexMatrix::from_fn(n, n, |r, c| {
        (0..n).map(|k| v.get(r, k) * f[k] * v.get(c, k).conj()).sum()
    })
}

/// Projector onto the support (range) of a PSD matrix.
pub fn support_projector(a: &ComplexMatrix, tol: &Tolerance) -> Result<ComplexMatrix> {
    let e = hermitian_eig(a, tol)?;
    let lmax = e.values.iter().cloned().fold(0.0, f64::max);
    let f: Vec<f64> = e.values.iter().map(|&l| if l > tol.rank_rel * lmax && l > 0.0 { 1.0 } else { 0.0 }).collect();
    Ok(apply_spectral(&e, &f))
}

pub fn min_eigenvalue(a: &ComplexMatrix, tol: &Tolerance) -> Result<f64> {
    Ok(hermitian_eig(a, tol)?.values.first().copied().unwrap_or(0.0))
}

pub fn dot(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Real coordinates of a Hermitian matrix in an HS-orthonormal basis:
/// diagonal entries and √2·(Re, Im) of the upper triangle.
pub fn hermitian_coords(h: &ComplexMatrix) -> Vec<f64> {
    let d = h.rows();
    let mut out = Vec::with_capacity(d * d);
    let s2 = std::f64::consts::SQRT_2;
    for r in 0..d {
        out.push(h.get(r, r).re);
        for c in r + 1..d {
            let z = h.get(r, c);
            out.push(s2 * z.re);
            out.push(s2 * z.im);
        }
    }
    out
}

/// Inverse of [`hermitian_coords`].
pub fn from_hermitian_coords(d: usize, x: &[f64]) -> ComplexMatrix {
    let mut h = ComplexMatrix::zeros(d, d);
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut k = 0;
    for r in 0..d {
        h.set(r, r, C64::new(x[k], 0.0));
        k += 1;
        for c in r + 1..d {
            let z = C64::new(x[k] * s2, x[k + 1] * s2);
            h.set(r, c, z);
            h.set(c, r, z.conj());
            k += 2;
        }
    }
    h
}

/// Modified Gram–Schmidt with one re-orthogonalisation pass.
///
/// Vectors whose residual norm falls below `cut` are dropped.
pub fn orthonormalize(vs: &[Vec<C64>], cut: f64) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let n = vnorm(&w);
        if n > cut {
            out.push(w.into_iter().map(|z| z / n).collect());
        }
    }
    out
}

/// Seeded random objects for tests and examples.
pub mod random {
    use super::*;

    pub fn gaussian(rng: &mut impl Rng) -> C64 {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    }

    pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
    }

    pub fn hermitian(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
        ginibre(d, d, rng).hermitian_part()
    }

    /// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
    pub fn unitary(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let g = ginibre(d, d, rng).to_na();
        let qr = g.qr();
        let q = qr.q();
        let r = qr.r();
        let mut u = ComplexMatrix::from_na(&q);
        for c in 0..d {
            let rc = r[(c, c)];
            let ph = if rc.norm() > 0.0 { rc / rc.norm() } else { ONE };
            for row in 0..d {
                let z = u.get(row, c) * ph;
                u.set(row, c, z);
            }
        }
        u
    }

    /// Isometry C^cols -> C^rows (first columns of a Haar unitary).
    pub fn isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let u = unitary(rows, rng);
        ComplexMatrix::from_fn(rows, cols, |r, c| u.get(r, c))
    }

    pub fn pure_state(d: usize, rng: &mut impl Rng) -> Vec<C64> {
        let v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
        let n = vnorm(&v);
        v.into_iter().map(|z| z / n).collect()
    }

    /// Density matrix from the Hilbert–Schmidt ensemble.
    pub fn density(d: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let g = ginibre(d, d, rng);
        let p = g.matmul(&g.adjoint());
        let t = p.trace().re;
        p.scale_re(1.0 / t)
    }

    /// Column-stochastic matrix with `n_out` rows and `n_in` columns.
    pub fn stochastic(n_out: usize, n_in: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; n_in]; n_out];
        for c in 0..n_in {
            let col: Vec<f64> = (0..n_out).map(|_| rng.random::<f64>() + 1e-3).collect();
            let s: f64 = col.iter().sum();
            for (row, x) in m.iter_mut().zip(&col) {
                row[c] = x / s;
            }
        }
        m
    }
}

/// Pauli matrices 1, σx, σy, σz.
pub fn paulis() -> [ComplexMatrix; 4] {
    [
        ComplexMatrix::identity(2),
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
        ComplexMatrix::new(2, 2, vec![ZERO, -I, I, ZERO]).expect("static"),
        ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]),
    ]
}

/// ½(1 + n·σ) for a Bloch vector n = (x, y, z).
pub fn bloch_operator(c0: f64, n: [f64; 3]) -> ComplexMatrix {
    let [id, x, y, z] = paulis();
    let m = &(&id.scale_re(c0) + &x.scale_re(n[0])) + &(&y.scale_re(n[1]) + &z.scale_re(n[2]));
    m.scale_re(0.5)
}

//! Channels in element (Kraus) form, observables, instruments and the
//! Stinespring picture.
//!
//! Two channels are considered equal when they act identically on a full
//! operator basis; element lists are never canonicalized.

use crate::error::{Error, Result};
use crate::numlin::{hermitian_eig, sum_all, ComplexMatrix, Tolerance, C64};

/// ρ ↦ Σ_k E_k ρ E_k†, with every E_k of shape `dim_out × dim_in`.
///
/// Construction through [`Channel::from_elements`] only checks shapes, so the
/// type also carries completely positive maps that are not trace preserving
/// (instrument branches, invalid inputs under validation).
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    elements: Vec<ComplexMatrix>,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ChannelReport {
    pub trace_preserving: bool,
    pub completely_positive: bool,
    /// ‖Σ E†E − 1‖
    pub tp_residual: f64,
    pub min_choi_eigenvalue: f64,
}

impl Channel {
    /// Shape-checked element list; no trace-preservation requirement.
    pub fn from_elements(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements
            .first()
            .ok_or_else(|| Error::DimMismatch("channel needs at least one element".into()))?;
        let (dim_out, dim_in) = first.shape();
        if let Some(bad) = elements.iter().find(|e| e.shape() != (dim_out, dim_in)) {
            return Err(Error::DimMismatch(format!(
                "element of shape {:?} among elements of shape {:?}",
                bad.shape(),
                (dim_out, dim_in)
            )));
        }
        Ok(Channel { dim_in, dim_out, elements })
    }

    /// Element list that must be trace preserving within `tol`.
    pub fn new(elements: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        let c = Self::from_elements(elements)?;
        let r = c.tp_residual();
        if r > tol.abs_eps {
            return Err(Error::NotTracePreserving { residual: r });
        }
        Ok(c)
    }

    pub fn identity(d: usize) -> Self {
        Channel { dim_in: d, dim_out: d, elements: vec![ComplexMatrix::identity(d)] }
    }

    /// ρ ↦ UρU† for a (caller-guaranteed) unitary or isometry U.
    pub fn unitary(u: ComplexMatrix) -> Self {
        let (dim_out, dim_in) = u.shape();
        Channel { dim_in, dim_out, elements: vec![u] }
    }

    /// Complete dephasing in the computational basis.
    pub fn dephasing(d: usize) -> Self {
        let elements = (0..d).map(|i| ComplexMatrix::unit(d, i, i)).collect();
        Channel { dim_in: d, dim_out: d, elements }
    }

    /// ρ ↦ Σ_i P_i ρ P_i for a complete family of orthogonal projectors.
    pub fn projective(projectors: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        Self::new(projectors, tol)
    }

    /// ρ ↦ Σ_k p_k U_k ρ U_k†.
    pub fn mixed_unitary(probs: &[f64], unitaries: &[ComplexMatrix], tol: &Tolerance) -> Result<Self> {
        if probs.len() != unitaries.len() {
            return Err(Error::DimMismatch("probabilities and unitaries differ in length".into()));
        }
        Self::new(probs.iter().zip(unitaries).map(|(&p, u)| u.scale_re(p.sqrt())).collect(), tol)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    /// E*(1) = Σ E_k† E_k.
    pub fn dual_identity(&self) -> ComplexMatrix {
        sum_all(self.elements.iter().map(|e| e.adjoint().matmul(e)).collect::<Vec<_>>().iter())
            .expect("non-empty")
    }

    /// E(1) = Σ E_k E_k†.
    pub fn image_of_identity(&self) -> ComplexMatrix {
        sum_all(self.elements.iter().map(|e| e.matmul(&e.adjoint())).collect::<Vec<_>>().iter())
            .expect("non-empty")
    }

    pub fn tp_residual(&self) -> f64 {
        self.dual_identity().dist(&ComplexMatrix::identity(self.dim_in))
    }

    pub fn validate(&self, tol: &Tolerance) -> Result<ChannelReport> {
        let tp_residual = self.tp_residual();
        let j = self.choi();
        let lmin = hermitian_eig(&j, tol)?.values.first().copied().unwrap_or(0.0);
        let scale = j.op_norm().max(1.0);
        Ok(ChannelReport {
            trace_preserving: tp_residual <= tol.abs_eps,
            completely_positive: lmin >= -tol.abs_eps * scale,
            tp_residual,
            min_choi_eigenvalue: lmin,
        })
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimMismatch(format!(
                "state {:?} for channel with input dimension {}",
                rho.shape(),
                self.dim_in
            )));
        }
        Ok(self.apply_unchecked(rho))
    }

    pub(crate) fn apply_unchecked(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for e in &self.elements {
            out = &out + &e.sandwich(rho);
        }
        out
    }

    /// Heisenberg picture: A ↦ Σ E_k† A E_k.
    pub fn apply_dual(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.shape() != (self.dim_out, self.dim_out) {
            return Err(Error::DimMismatch(format!(
                "operator {:?} for channel with output dimension {}",
                a.shape(),
                self.dim_out
            )));
        }
        Ok(self.apply_dual_unchecked(a))
    }

    pub(crate) fn apply_dual_unchecked(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for e in &self.elements {
            out = &out + &e.adjoint().matmul(a).matmul(e);
        }
        out
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &Channel) -> Result<Channel> {
        compose(self, first)
    }

    /// Choi matrix Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|), input factor first.
    pub fn choi(&self) -> ComplexMatrix {
        let (di, d_o) = (self.dim_in, self.dim_out);
        let mut j = ComplexMatrix::zeros(di * d_o, di * d_o);
        for a in 0..di {
            for b in 0..di {
                let img = self.apply_unchecked(&ComplexMatrix::unit(di, a, b));
                for r in 0..d_o {
                    for c in 0..d_o {
                        j.set(a * d_o + r, b * d_o + c, img.get(r, c));
                    }
                }
            }
        }
        j
    }

    /// Elements recovered from scaled eigenvectors of a PSD Choi matrix.
    pub fn from_choi(j: &ComplexMatrix, dim_in: usize, dim_out: usize, tol: &Tolerance) -> Result<Channel> {
        if j.shape() != (dim_in * dim_out, dim_in * dim_out) {
            return Err(Error::DimMismatch(format!(
                "Choi matrix {:?} for dimensions {dim_in} -> {dim_out}",
                j.shape()
            )));
        }
        let e = hermitian_eig(j, tol)?;
        let lmax = e.values.iter().cloned().fold(0.0, f64::max);
        let lmin = e.values.first().copied().unwrap_or(0.0);
        if lmin < -tol.abs_eps * lmax.max(1.0) {
            return Err(Error::NotPsd { min_eigenvalue: lmin });
        }
        let mut elements = Vec::new();
        for (k, &l) in e.values.iter().enumerate().rev() {
            if l <= tol.rank_rel * lmax || l <= 0.0 {
                continue;
            }
            let s = l.sqrt();
            let v = e.vector(k);
            elements.push(ComplexMatrix::from_fn(dim_out, dim_in, |a, i| v[i * dim_out + a] * s));
        }
        if elements.is_empty() {
            elements.push(ComplexMatrix::zeros(dim_out, dim_in));
        }
        Channel::from_elements(elements)
    }

    /// Stinespring isometry V = Σ_i E_i ⊗ |i⟩ (system factor first).
    pub fn dilate(&self, tol: &Tolerance) -> Result<Isometry> {
        let r = self.tp_residual();
        if r > tol.abs_eps {
            return Err(Error::NotTracePreserving { residual: r });
        }
        let d_env = self.elements.len();
        let v = ComplexMatrix::from_fn(self.dim_out * d_env, self.dim_in, |row, x| {
            self.elements[row % d_env].get(row / d_env, x)
        });
        Ok(Isometry { v, d_out: self.dim_out, d_env })
    }

    /// Complementary channel into the environment. Its basis is the element
    /// order of `self`: F_a[i, x] = E_i[a, x].
    pub fn complement(&self) -> Channel {
        let d_env = self.elements.len();
        let elements = (0..self.dim_out)
            .map(|a| ComplexMatrix::from_fn(d_env, self.dim_in, |i, x| self.elements[i].get(a, x)))
            .collect();
        Channel { dim_in: self.dim_in, dim_out: d_env, elements }
    }

    /// Restriction ρ ↦ E(VρV†) for an isometry V.
    pub fn restrict(&self, v: &ComplexMatrix) -> Result<Channel> {
        if v.rows() != self.dim_in {
            return Err(Error::DimMismatch(format!(
                "isometry with {} rows for channel input dimension {}",
                v.rows(),
                self.dim_in
            )));
        }
        Channel::from_elements(self.elements.iter().map(|e| e.matmul(v)).collect())
    }

    /// Matrix S with vec(E(ρ)) = S vec(ρ) for row-major vec.
    pub fn superoperator(&self) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(self.dim_out * self.dim_out, self.dim_in * self.dim_in);
        for e in &self.elements {
            s = &s + &e.kron(&e.conj());
        }
        s
    }

    /// Matrix of the dual map on row-major vectorized operators.
    pub fn dual_superoperator(&self) -> ComplexMatrix {
        let mut s = ComplexMatrix::zeros(self.dim_in * self.dim_in, self.dim_out * self.dim_out);
        for e in &self.elements {
            let ea = e.adjoint();
            s = &s + &ea.kron(&ea.conj());
        }
        s
    }

    /// Largest operator-norm difference of the two actions over the
    /// matrix units |i⟩⟨j|.
    pub fn action_distance(&self, other: &Channel) -> Result<f64> {
        if (self.dim_in, self.dim_out) != (other.dim_in, other.dim_out) {
            return Err(Error::DimMismatch("channels of different shape".into()));
        }
        let d = self.dim_in;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let u = ComplexMatrix::unit(d, i, j);
                worst = worst.max(self.apply_unchecked(&u).dist(&other.apply_unchecked(&u)));
            }
        }
        Ok(worst)
    }

    pub fn same_action(&self, other: &Channel, tol: &Tolerance) -> Result<bool> {
        Ok(self.action_distance(other)? <= tol.abs_eps)
    }

    /// The observable Y∘E whose effects are E*(Y_j).
    pub fn pull_back(&self, y: &DiscreteObservable) -> Result<DiscreteObservable> {
        if y.dim() != self.dim_out {
            return Err(Error::DimMismatch("observable lives on a different space".into()));
        }
        Ok(DiscreteObservable {
            dim: self.dim_in,
            effects: y.effects().iter().map(|e| self.apply_dual_unchecked(e)).collect(),
        })
    }
}

/// Composition `second ∘ first`, elements E2_j E1_i.
pub fn compose(second: &Channel, first: &Channel) -> Result<Channel> {
    if first.dim_out != second.dim_in {
        return Err(Error::DimMismatch(format!(
            "cannot feed dimension {} into dimension {}",
            first.dim_out, second.dim_in
        )));
    }
    let mut elements = Vec::with_capacity(first.elements.len() * second.elements.len());
    for e1 in &first.elements {
        for e2 in &second.elements {
            elements.push(e2.matmul(e1));
        }
    }
    Channel::from_elements(elements)
}

/// Tensor product channel, elements E1_i ⊗ E2_j.
pub fn tensor(c1: &Channel, c2: &Channel) -> Channel {
    let mut elements = Vec::with_capacity(c1.elements.len() * c2.elements.len());
    for a in &c1.elements {
        for b in &c2.elements {
            elements.push(a.kron(b));
        }
    }
    Channel { dim_in: c1.dim_in * c2.dim_in, dim_out: c1.dim_out * c2.dim_out, elements }
}

/// Stinespring isometry V: C^{d_in} → C^{d_out} ⊗ C^{d_env}.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    pub v: ComplexMatrix,
    pub d_out: usize,
    pub d_env: usize,
}

impl Isometry {
    pub fn residual(&self) -> f64 {
        self.v.adjoint().matmul(&self.v).dist(&ComplexMatrix::identity(self.v.cols()))
    }

    /// E_i = (1 ⊗ ⟨i|) V
    pub fn element(&self, i: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.d_out, self.v.cols(), |a, x| self.v.get(a * self.d_env + i, x))
    }

    pub fn joint_state(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.v.sandwich(rho)
    }

    pub fn system_marginal(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.joint_state(rho).partial_trace(&[self.d_out, self.d_env], &[0])
    }

    pub fn environment_marginal(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.joint_state(rho).partial_trace(&[self.d_out, self.d_env], &[1])
    }

    /// V† (A ⊗ B) V
    pub fn joint_dual(&self, a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        self.v.adjoint().matmul(&a.kron(b)).matmul(&self.v)
    }
}

/// Effects X_i summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteObservable {
    dim: usize,
    effects: Vec<ComplexMatrix>,
}

impl DiscreteObservable {
    pub fn new(effects: Vec<ComplexMatrix>, tol: &Tolerance) -> Result<Self> {
        let first = effects.first().ok_or_else(|| Error::InvalidObservable("no effects".into()))?;
        let dim = first.require_square()?;
        for (i, x) in effects.iter().enumerate() {
            if x.shape() != (dim, dim) {
                return Err(Error::DimMismatch(format!("effect {i} has shape {:?}", x.shape())));
            }
            let e = hermitian_eig(x, tol)?;
            let lo = e.values.first().copied().unwrap_or(0.0);
            let hi = e.values.last().copied().unwrap_or(0.0);
            if lo < -tol.abs_eps || hi > 1.0 + tol.abs_eps {
                return Err(Error::InvalidObservable(format!(
                    "effect {i} has spectrum outside [0,1]: [{lo:e}, {hi:e}]"
                )));
            }
        }
        let total = sum_all(effects.iter()).expect("non-empty");
        let r = total.dist(&ComplexMatrix::identity(dim));
        if r > tol.abs_eps {
            return Err(Error::InvalidObservable(format!("effects sum to identity only within {r:e}")));
        }
        Ok(DiscreteObservable { dim, effects })
    }

    pub fn trivial(d: usize) -> Self {
        DiscreteObservable { dim: d, effects: vec![ComplexMatrix::identity(d)] }
    }

    /// Sharp observable of the computational basis.
    pub fn computational(d: usize) -> Self {
        DiscreteObservable { dim: d, effects: (0..d).map(|i| ComplexMatrix::unit(d, i, i)).collect() }
    }

    /// Sharp observable given by the eigenbasis in the columns of `u`.
    pub fn from_basis(u: &ComplexMatrix) -> Self {
        let d = u.rows();
        DiscreteObservable {
            dim: d,
            effects: (0..u.cols()).map(|k| ComplexMatrix::projector(&u.column(k))).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    /// max_i ‖X_i² − X_i‖
    pub fn sharpness_residual(&self) -> f64 {
        self.effects.iter().map(|x| x.matmul(x).dist(x)).fold(0.0, f64::max)
    }

    pub fn is_sharp(&self, tol: &Tolerance) -> bool {
        self.sharpness_residual() <= tol.abs_eps
    }

    pub fn probabilities(&self, rho: &ComplexMatrix) -> Result<Vec<f64>> {
        if rho.shape() != (self.dim, self.dim) {
            return Err(Error::DimMismatch("state and observable differ in dimension".into()));
        }
        Ok(self.effects.iter().map(|x| rho.hs_inner(x).re).collect())
    }

    /// Post-processing by a column-stochastic matrix: Y_j = Σ_i π[j][i] X_i.
    pub fn coarse_grained(&self, pi: &[Vec<f64>]) -> Result<Self> {
        if pi.iter().any(|row| row.len() != self.effects.len()) {
            return Err(Error::DimMismatch("stochastic map columns differ from outcome count".into()));
        }
        let effects = pi
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.effects)
                    .fold(ComplexMatrix::zeros(self.dim, self.dim), |acc, (&w, x)| &acc + &x.scale_re(w))
            })
            .collect();
        Ok(DiscreteObservable { dim: self.dim, effects })
    }

    /// The quantum-to-classical channel ρ ↦ Σ_i tr(ρX_i)|i⟩⟨i|.
    pub fn as_channel(&self, tol: &Tolerance) -> Result<Channel> {
        let n = self.effects.len();
        let mut elements = Vec::new();
        for (i, x) in self.effects.iter().enumerate() {
            let e = hermitian_eig(x, tol)?;
            for (k, &l) in e.values.iter().enumerate() {
                if l > tol.abs_eps {
                    let v = e.vector(k);
                    let ket = ComplexMatrix::ket(n, i);
                    let bra = ComplexMatrix::column_vector(&v).adjoint();
                    elements.push(ket.matmul(&bra).scale_re(l.sqrt()));
                }
            }
        }
        Channel::new(elements, tol)
    }

    pub(crate) fn from_effects_unchecked(dim: usize, effects: Vec<ComplexMatrix>) -> Self {
        DiscreteObservable { dim, effects }
    }
}

/// Check that ρ is a density matrix (Hermitian, PSD, unit trace).
pub fn validate_state(rho: &ComplexMatrix, tol: &Tolerance) -> Result<()> {
    let e = hermitian_eig(rho, tol)?;
    let lmin = e.values.first().copied().unwrap_or(0.0);
    if lmin < -tol.abs_eps {
        return Err(Error::NotPsd { min_eigenvalue: lmin });
    }
    let t = rho.trace();
    if (t - C64::new(1.0, 0.0)).norm() > tol.abs_eps {
        return Err(Error::DimMismatch(format!("state has trace {t}")));
    }
    Ok(())
}

/// Branches F_i, each a completely positive map; the sum is trace preserving.
#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    dim: usize,
    branches: Vec<Channel>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchOutcome {
    pub probability: f64,
    /// `None` when the branch has (numerically) zero probability.
    pub state: Option<ComplexMatrix>,
}

impl Instrument {
    pub fn new(branches: Vec<Vec<ComplexMatrix>>, tol: &Tolerance) -> Result<Self> {
        let branches = branches.into_iter().map(Channel::from_elements).collect::<Result<Vec<_>>>()?;
        let first = branches.first().ok_or_else(|| Error::DimMismatch("instrument has no branches".into()))?;
        let dim = first.dim_in();
        if branches.iter().any(|b| b.dim_in() != dim || b.dim_out() != dim) {
            return Err(Error::DimMismatch("instrument branches must map a space to itself".into()));
        }
        let total = sum_all(branches.iter().map(|b| b.dual_identity()).collect::<Vec<_>>().iter())
            .expect("non-empty");
        let r = total.dist(&ComplexMatrix::identity(dim));
        if r > tol.abs_eps {
            return Err(Error::NotTracePreserving { residual: r });
        }
        Ok(Instrument { dim, branches })
    }

    /// The Lüders instrument ρ ↦ P_iρP_i of a sharp observable.
    pub fn luders(x: &DiscreteObservable, tol: &Tolerance) -> Result<Self> {
        let r = x.sharpness_residual();
        if r > tol.abs_eps {
            return Err(Error::NotSharp { residual: r });
        }
        Self::new(x.effects().iter().map(|p| vec![p.clone()]).collect(), tol)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn branches(&self) -> &[Channel] {
        &self.branches
    }

    /// X_i = F_i*(1)
    pub fn observable(&self) -> DiscreteObservable {
        DiscreteObservable::from_effects_unchecked(self.dim, self.branches.iter().map(|b| b.dual_identity()).collect())
    }

    pub fn measure(&self, rho: &ComplexMatrix, tol: &Tolerance) -> Result<Vec<BranchOutcome>> {
        if rho.shape() != (self.dim, self.dim) {
            return Err(Error::DimMismatch("state and instrument differ in dimension".into()));
        }
        validate_state(rho, tol)?;
        Ok(self
            .branches
            .iter()
            .map(|b| {
                let s = b.apply_unchecked(rho);
                let p = s.trace().re;
                BranchOutcome {
                    probability: p.max(0.0),
                    state: (p > tol.abs_eps).then(|| s.scale_re(1.0 / p)),
                }
            })
            .collect())
    }

    /// ρ ↦ Σ_i F_i(ρ) ⊗ |i⟩⟨i|, quantum output first.
    pub fn as_channel(&self, tol: &Tolerance) -> Result<Channel> {
        let n = self.branches.len();
        let mut elements = Vec::new();
        for (i, b) in self.branches.iter().enumerate() {
            let ket = ComplexMatrix::ket(n, i);
            for f in b.elements() {
                elements.push(f.kron(&ket));
            }
        }
        Channel::new(elements, tol)
    }
}

/// ρ_i = P_i ρ P_i / tr(P_i ρ) for a sharp observable.
pub fn luders_collapse(
    x: &DiscreteObservable,
    rho: &ComplexMatrix,
    outcome: usize,
    tol: &Tolerance,
) -> Result<ComplexMatrix> {
    let r = x.sharpness_residual();
    if r > tol.abs_eps {
        return Err(Error::NotSharp { residual: r });
    }
    let p_op = x
        .effects()
        .get(outcome)
        .ok_or_else(|| Error::DimMismatch(format!("outcome {outcome} out of range")))?;
    if rho.shape() != p_op.shape() {
        return Err(Error::DimMismatch("state and observable differ in dimension".into()));
    }
    let post = p_op.matmul(rho).matmul(p_op);
    let p = post.trace().re;
    if p <= tol.abs_eps {
        return Err(Error::ZeroProbabilityOutcome { outcome, probability: p });
    }
    Ok(post.scale_re(1.0 / p))
}

/// Orthonormal Hilbert–Schmidt basis of matrix units |i⟩⟨j|.
pub fn matrix_units(d: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            out.push(ComplexMatrix::unit(d, i, j));
        }
    }
    out
}

/// tr(E(ρ)A) − tr(ρE*(A)), the duality defect.
pub fn duality_defect(c: &Channel, rho: &ComplexMatrix, a: &ComplexMatrix) -> Result<f64> {
    let lhs = c.apply(rho)?.matmul(a).trace();
    let rhs = rho.matmul(&c.apply_dual(a)?).trace();
    Ok((lhs - rhs).norm())
}

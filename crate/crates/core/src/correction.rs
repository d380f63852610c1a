//! What a channel preserves and how to undo it.
//!
//! The sharp preserved algebra of E is the commutant of span{E_i†E_j}. A
//! single correction channel R (built from E(1)^{-1/2}) restores every
//! element of it: E*(R*(A)) = A.

use std::collections::BTreeMap;

use crate::algebras::{
    commutant_with, structure_decompose_with, AlgebraStructure, CancelToken, OperatorBasisSet,
};
use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::numlin::{apply_spectral, hermitian_eig, orthonormalize, vnorm, ComplexMatrix, Tolerance, C64};

/// Isometric embedding V of a code space into the channel input.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeSubspace {
    v: ComplexMatrix,
}

impl CodeSubspace {
    pub fn new(v: ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        let r = v.adjoint().matmul(&v).dist(&ComplexMatrix::identity(v.cols()));
        if r > tol.abs_eps {
            return Err(Error::DimMismatch(format!("code map is not an isometry (|V*V - 1| = {r:e})")));
        }
        Ok(CodeSubspace { v })
    }

    /// Code spanned by computational basis states, |k⟩ ↦ |states[k]⟩.
    pub fn from_basis_states(d: usize, states: &[usize]) -> Result<Self> {
        if states.iter().any(|&s| s >= d) {
            return Err(Error::DimMismatch(format!("basis state out of range for dimension {d}")));
        }
        let v = ComplexMatrix::from_fn(d, states.len(), |r, c| {
            if states[c] == r {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::new(v, &Tolerance::default())
    }

    pub fn full(d: usize) -> Self {
        CodeSubspace { v: ComplexMatrix::identity(d) }
    }

    pub fn isometry(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn dim(&self) -> usize {
        self.v.rows()
    }

    pub fn code_dim(&self) -> usize {
        self.v.cols()
    }

    /// P_0 = VV†
    pub fn projector(&self) -> ComplexMatrix {
        self.v.matmul(&self.v.adjoint())
    }
}

/// span{E_i† E_j}, with a Hermitian orthonormal basis.
pub fn interaction_span(c: &Channel, tol: &Tolerance) -> Result<OperatorBasisSet> {
    let products = interaction_products(c);
    OperatorBasisSet::hermitian_span(c.dim_in(), &products, tol)
}

fn interaction_products(c: &Channel) -> Vec<ComplexMatrix> {
    let es = c.elements();
    let adj: Vec<ComplexMatrix> = es.iter().map(|e| e.adjoint()).collect();
    let mut out = Vec::with_capacity(es.len() * es.len());
    for a in &adj {
        for e in es {
            out.push(a.matmul(e));
        }
    }
    out
}

/// The algebra A_E of sharp observables preserved (and correctable) by E.
pub fn preserved_algebra(c: &Channel, tol: &Tolerance) -> Result<AlgebraStructure> {
    preserved_algebra_with(c, 0, tol, &CancelToken::new())
}

pub fn preserved_algebra_with(
    c: &Channel,
    seed: u64,
    tol: &Tolerance,
    cancel: &CancelToken,
) -> Result<AlgebraStructure> {
    let span = interaction_span(c, tol)?;
    let alg = commutant_with(span.basis(), tol, cancel)?;
    structure_decompose_with(&alg, seed, tol, cancel)
}

/// The correction channel R: B(H_out) → B(H_in) with
/// R*(A) = M E(A) M + ⟨0|A|0⟩ P_ker, where M = E(1)^{-1/2} on the support
/// of E(1). The second term only completes R to a trace-preserving map on
/// the kernel of E(1); it never affects E*∘R*.
pub fn correction_channel(c: &Channel, tol: &Tolerance) -> Result<Channel> {
    let e1 = c.image_of_identity();
    let eig = hermitian_eig(&e1, tol)?;
    let lmax = eig.values.iter().cloned().fold(0.0, f64::max);
    let on_support = |l: f64| l > tol.rank_rel * lmax && l > 0.0;
    let inv_sqrt: Vec<f64> = eig.values.iter().map(|&l| if on_support(l) { 1.0 / l.sqrt() } else { 0.0 }).collect();
    let m = apply_spectral(&eig, &inv_sqrt);

    let mut elements: Vec<ComplexMatrix> = c.elements().iter().map(|e| e.adjoint().matmul(&m)).collect();
    let d_in = c.dim_in();
    for (k, &l) in eig.values.iter().enumerate() {
        if !on_support(l) {
            let phi = eig.vector(k);
            let bra = ComplexMatrix::column_vector(&phi).adjoint();
            elements.push(ComplexMatrix::ket(d_in, 0).matmul(&bra));
        }
    }
    let r = Channel::from_elements(elements)?;
    let res = r.tp_residual();
    if res > tol.abs_eps.sqrt() {
        return Err(Error::NotTracePreserving { residual: res });
    }
    Ok(r)
}

/// max over the carrier basis of ‖E*(R*(A)) − A‖.
pub fn fixed_point_residual(c: &Channel, r: &Channel, alg: &OperatorBasisSet) -> f64 {
    alg.basis()
        .iter()
        .map(|a| c.apply_dual_unchecked(&r.apply_dual_unchecked(a)).dist(a))
        .fold(0.0, f64::max)
}

/// max ‖R*(A)R*(B) − R*(AB)‖ over pairs of carrier basis elements.
pub fn multiplicativity_residual(r: &Channel, alg: &OperatorBasisSet) -> f64 {
    let imgs: Vec<ComplexMatrix> = alg.basis().iter().map(|a| r.apply_dual_unchecked(a)).collect();
    let mut worst: f64 = 0.0;
    for (i, a) in alg.basis().iter().enumerate() {
        for (j, b) in alg.basis().iter().enumerate() {
            let lhs = imgs[i].matmul(&imgs[j]);
            let rhs = r.apply_dual_unchecked(&a.matmul(b));
            worst = worst.max(lhs.dist(&rhs));
        }
    }
    worst
}

/// max ‖E*(R*(A)R*(B)) − AB‖: E* is a homomorphism on the image of R*.
pub fn homomorphism_residual(c: &Channel, alg: &AlgebraStructure, tol: &Tolerance) -> Result<f64> {
    let r = correction_channel(c, tol)?;
    let imgs: Vec<ComplexMatrix> = alg.carrier.basis().iter().map(|a| r.apply_dual_unchecked(a)).collect();
    let mut worst: f64 = 0.0;
    for (i, a) in alg.carrier.basis().iter().enumerate() {
        for (j, b) in alg.carrier.basis().iter().enumerate() {
            let lhs = c.apply_dual_unchecked(&imgs[i].matmul(&imgs[j]));
            worst = worst.max(lhs.dist(&a.matmul(b)));
        }
    }
    Ok(worst)
}

/// How the blocks of a preserved algebra read as a code.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodeKind {
    /// Only multiples of the identity survive.
    Trivial,
    /// One block M_n ⊗ 1: a standard subspace code.
    Standard,
    /// One block M_n ⊗ 1_m with m > 1.
    Subsystem,
    /// Only commuting blocks: classical information.
    Classical,
    /// Several blocks, some of them quantum.
    Hybrid,
}

pub fn classify(alg: &AlgebraStructure) -> CodeKind {
    let blocks = &alg.block_dims;
    if blocks.len() == 1 && blocks[0].0 == 1 {
        CodeKind::Trivial
    } else if blocks.iter().all(|&(n, _)| n == 1) {
        CodeKind::Classical
    } else if blocks.len() == 1 && blocks[0].1 == 1 {
        CodeKind::Standard
    } else if blocks.len() == 1 {
        CodeKind::Subsystem
    } else {
        CodeKind::Hybrid
    }
}

#[derive(Clone, Debug)]
pub struct CorrectableReport {
    pub preserved_algebra: AlgebraStructure,
    pub correction: Channel,
    pub kind: CodeKind,
    /// Named residuals: `fixed_point`, `multiplicativity`, `homomorphism`,
    /// `correction_tp`, `block_pattern`.
    pub residuals: BTreeMap<String, f64>,
}

/// Preserved algebra, correction channel and the residuals certifying them.
pub fn analyze(c: &Channel, seed: u64, tol: &Tolerance) -> Result<CorrectableReport> {
    let alg = preserved_algebra_with(c, seed, tol, &CancelToken::new())?;
    let r = correction_channel(c, tol)?;
    let mut residuals = BTreeMap::new();
    residuals.insert("fixed_point".to_string(), fixed_point_residual(c, &r, &alg.carrier));
    residuals.insert("multiplicativity".to_string(), multiplicativity_residual(&r, &alg.carrier));
    residuals.insert("homomorphism".to_string(), homomorphism_residual(c, &alg, tol)?);
    residuals.insert("correction_tp".to_string(), r.tp_residual());
    residuals.insert("block_pattern".to_string(), alg.pattern_residual);
    Ok(CorrectableReport { kind: classify(&alg), preserved_algebra: alg, correction: r, residuals })
}

/// ρ ↦ E(VρV†)
pub fn restrict(c: &Channel, code: &CodeSubspace) -> Result<Channel> {
    c.restrict(&code.v)
}

#[derive(Clone, Debug)]
pub struct OperatorSystemReport {
    /// S_0 = E*(R_0*(A_0)) on the full input space.
    pub system: OperatorBasisSet,
    /// The preserved algebra A_0 of the restricted channel, on the code.
    pub code_algebra: AlgebraStructure,
    /// Full-space correction with dual A ↦ R_0*(V†AV).
    pub correction: Channel,
    /// max over the basis of S_0 of ‖E*(R_0*(V†SV)) − S‖.
    pub identity_residual: f64,
}

/// Simultaneously correctable operator system built from a code. These are
/// correctable on all input states, not only on the code; the family is not
/// claimed to be exhaustive.
pub fn correctable_operator_system(c: &Channel, code: &CodeSubspace, tol: &Tolerance) -> Result<OperatorSystemReport> {
    let c0 = restrict(c, code)?;
    let a0 = preserved_algebra(&c0, tol)?;
    let r0 = correction_channel(&c0, tol)?;
    let imgs: Vec<ComplexMatrix> = a0
        .carrier
        .basis()
        .iter()
        .map(|a| c.apply_dual_unchecked(&r0.apply_dual_unchecked(a)))
        .collect();
    let system = OperatorBasisSet::span(c.dim_in(), &imgs, tol)?;
    let v = code.isometry();
    let correction = Channel::from_elements(r0.elements().iter().map(|e| v.matmul(e)).collect())?;
    let identity_residual = system
        .basis()
        .iter()
        .map(|s| {
            let back = c.apply_dual_unchecked(&correction.apply_dual_unchecked(s));
            back.dist(s)
        })
        .fold(0.0, f64::max);
    Ok(OperatorSystemReport { system, code_algebra: a0, correction, identity_residual })
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct KlReport {
    pub passes: bool,
    /// λ_ij with V†E_i†E_jV ≈ λ_ij 1; present only when passing.
    pub lambda: Option<Vec<Vec<[f64; 2]>>>,
    pub residual: f64,
}

/// Knill–Laflamme conditions for a channel's elements on a code.
pub fn kl_check(c: &Channel, code: &CodeSubspace, tol: &Tolerance) -> Result<KlReport> {
    kl_check_operators(c.elements(), code, tol)
}

/// Knill–Laflamme conditions for an arbitrary error set.
pub fn kl_check_operators(errors: &[ComplexMatrix], code: &CodeSubspace, tol: &Tolerance) -> Result<KlReport> {
    let v = code.isometry();
    let k = code.code_dim();
    let id = ComplexMatrix::identity(k);
    let sandwiched = code_sandwiches(errors, v)?;
    let n = errors.len();
    let mut lambda = vec![vec![[0.0; 2]; n]; n];
    let mut residual: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let m = &sandwiched[i * n + j];
            let l = id.hs_inner(m) / k as f64;
            lambda[i][j] = [l.re, l.im];
            residual = residual.max((m - &id.scale(l)).op_norm());
        }
    }
    let passes = residual <= tol.abs_eps;
    Ok(KlReport { passes, lambda: passes.then_some(lambda), residual })
}

fn code_sandwiches(errors: &[ComplexMatrix], v: &ComplexMatrix) -> Result<Vec<ComplexMatrix>> {
    if let Some(e) = errors.iter().find(|e| e.cols() != v.rows()) {
        return Err(Error::DimMismatch(format!(
            "error of shape {:?} on a code embedded in dimension {}",
            e.shape(),
            v.rows()
        )));
    }
    let ev: Vec<ComplexMatrix> = errors.iter().map(|e| e.matmul(v)).collect();
    let mut out = Vec::with_capacity(ev.len() * ev.len());
    for a in &ev {
        let aa = a.adjoint();
        for b in &ev {
            out.push(aa.matmul(b));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OqecReport {
    pub passes: bool,
    /// Λ_ij (d_B × d_B), row-major over (i, j).
    pub lambda: Vec<ComplexMatrix>,
    pub residual: f64,
}

/// Operator (subsystem) code conditions V†E_i†E_jV = 1_A ⊗ Λ_ij on a code
/// factored as H_A ⊗ H_B.
pub fn oqec_check(c: &Channel, code: &CodeSubspace, factorization: (usize, usize), tol: &Tolerance) -> Result<OqecReport> {
    oqec_check_operators(c.elements(), code, factorization, tol)
}

pub fn oqec_check_operators(
    errors: &[ComplexMatrix],
    code: &CodeSubspace,
    (da, db): (usize, usize),
    tol: &Tolerance,
) -> Result<OqecReport> {
    if da == 0 || db == 0 || da * db != code.code_dim() {
        return Err(Error::BadFactorization(format!(
            "{da} x {db} does not factor a code of dimension {}",
            code.code_dim()
        )));
    }
    let ida = ComplexMatrix::identity(da);
    let mut lambda = Vec::new();
    let mut residual: f64 = 0.0;
    for m in code_sandwiches(errors, code.isometry())? {
        let l = m.partial_trace(&[da, db], &[1])?.scale_re(1.0 / da as f64);
        residual = residual.max(m.dist(&ida.kron(&l)));
        lambda.push(l);
    }
    Ok(OqecReport { passes: residual <= tol.abs_eps, lambda, residual })
}

/// Whether the two element lists span the same operator space.
pub fn span_equivalent(c1: &Channel, c2: &Channel, tol: &Tolerance) -> Result<bool> {
    if (c1.dim_in(), c1.dim_out()) != (c2.dim_in(), c2.dim_out()) {
        return Err(Error::DimMismatch("channels of different shape".into()));
    }
    let span = |c: &Channel| {
        let vs: Vec<Vec<C64>> = c
            .elements()
            .iter()
            .map(|e| {
                let n = e.fro_norm().max(f64::MIN_POSITIVE);
                e.scale_re(1.0 / n).into_data()
            })
            .collect();
        orthonormalize(&vs, tol.abs_eps)
    };
    let a = span(c1);
    let b = span(c2);
    if a.len() != b.len() {
        return Ok(false);
    }
    let inside = |v: &[C64], basis: &[Vec<C64>]| {
        let mut r = v.to_vec();
        for q in basis {
            let c = crate::numlin::dot(q, v);
            for (ri, qi) in r.iter_mut().zip(q) {
                *ri -= c * qi;
            }
        }
        vnorm(&r) <= tol.abs_eps.sqrt()
    };
    Ok(a.iter().all(|v| inside(v, &b)) && b.iter().all(|v| inside(v, &a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::{paulis, random};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn x_on(q: usize) -> ComplexMatrix {
        let [id, x, _, _] = paulis();
        (0..3).fold(ComplexMatrix::identity(1), |acc, k| acc.kron(if k == q { &x } else { &id }))
    }

    fn bitflip(p: [f64; 4]) -> Channel {
        let mut el = vec![ComplexMatrix::identity(8).scale_re(p[0].sqrt())];
        for q in 0..3 {
            el.push(x_on(q).scale_re(p[q + 1].sqrt()));
        }
        Channel::new(el, &tol()).unwrap()
    }

    fn rep_code() -> CodeSubspace {
        CodeSubspace::from_basis_states(8, &[0, 7]).unwrap()
    }

    #[test]
    fn interaction_span_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = Channel::unitary(random::unitary(3, &mut rng));
        assert_eq!(interaction_span(&u, &tol()).unwrap().len(), 1);
        let d = interaction_span(&Channel::dephasing(3), &tol()).unwrap();
        assert!(d.same_span(&OperatorBasisSet::diagonal(3), &tol()));
    }

    #[test]
    fn preserved_algebra_examples() {
        let a = preserved_algebra(&Channel::dephasing(3), &tol()).unwrap();
        assert_eq!(a.block_dims, vec![(1, 1); 3]);
        assert_eq!(classify(&a), CodeKind::Classical);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = Channel::unitary(random::unitary(3, &mut rng));
        let a = preserved_algebra(&u, &tol()).unwrap();
        assert_eq!(a.block_dims, vec![(3, 1)]);
        assert_eq!(classify(&a), CodeKind::Standard);
    }

    #[test]
    fn unitary_correction_is_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random::unitary(3, &mut rng);
        let r = correction_channel(&Channel::unitary(u.clone()), &tol()).unwrap();
        assert!(r.action_distance(&Channel::unitary(u.adjoint())).unwrap() < 1e-10);
    }

    #[test]
    fn dephasing_correction_fixes_diagonals() {
        let c = Channel::dephasing(4);
        let r = correction_channel(&c, &tol()).unwrap();
        assert!(fixed_point_residual(&c, &r, &OperatorBasisSet::diagonal(4)) < 1e-12);
    }

    #[test]
    fn correction_completes_on_kernel() {
        // C^3 → C^4 with E(1) = diag(1/3, 1/3, 1/3, 2): full rank here, so
        // append an unused output dimension to exercise the completion.
        let s = (1.0f64 / 3.0).sqrt();
        let t = (2.0f64 / 3.0).sqrt();
        let mut el = Vec::new();
        for i in 0..3 {
            el.push(ComplexMatrix::from_fn(5, 3, |r, c| if r == i && c == i { C64::new(s, 0.0) } else { C64::new(0.0, 0.0) }));
            el.push(ComplexMatrix::from_fn(5, 3, |r, c| if r == 3 && c == i { C64::new(t, 0.0) } else { C64::new(0.0, 0.0) }));
        }
        let c = Channel::new(el, &tol()).unwrap();
        let r = correction_channel(&c, &tol()).unwrap();
        assert!(r.tp_residual() < 1e-12);
        assert_eq!(r.dim_in(), 5);
        assert_eq!(r.dim_out(), 3);
        let a = preserved_algebra(&c, &tol()).unwrap();
        assert!(fixed_point_residual(&c, &r, &a.carrier) < 1e-10);
    }

    #[test]
    fn bitflip_code_conditions() {
        let c = bitflip([0.4, 0.2, 0.2, 0.2]);
        let kl = kl_check(&c, &rep_code(), &tol()).unwrap();
        assert!(kl.passes);
        let lam = kl.lambda.unwrap();
        let tr: f64 = (0..4).map(|i| lam[i][i][0]).sum();
        assert!((tr - 1.0).abs() < 1e-12);
        let [id, _, _, z] = paulis();
        let z1 = z.kron(&id).kron(&id);
        let fails = kl_check_operators(&[ComplexMatrix::identity(8), z1.clone()], &rep_code(), &tol()).unwrap();
        assert!(!fails.passes && fails.lambda.is_none());
        let o = oqec_check(&c, &rep_code(), (2, 1), &tol()).unwrap();
        assert!(o.passes);
        let o = oqec_check_operators(&[ComplexMatrix::identity(8), z1], &rep_code(), (2, 1), &tol()).unwrap();
        assert!(!o.passes);
        assert!(matches!(oqec_check(&c, &rep_code(), (3, 1), &tol()), Err(Error::BadFactorization(_))));
    }

    #[test]
    fn restricted_correction_matches_hand_built() {
        let c = bitflip([0.4, 0.2, 0.2, 0.2]);
        let code = rep_code();
        let c0 = restrict(&c, &code).unwrap();
        assert_eq!(c0.num_elements(), 4);
        let r0 = correction_channel(&c0, &tol()).unwrap();
        let v = code.isometry();
        let mut flips = vec![ComplexMatrix::identity(8)];
        flips.extend((0..3).map(x_on));
        for a in crate::channels::matrix_units(2) {
            let hand = flips
                .iter()
                .fold(ComplexMatrix::zeros(8, 8), |acc, x| &acc + &x.matmul(v).matmul(&a).matmul(&v.adjoint()).matmul(x));
            assert!(r0.apply_dual(&a).unwrap().dist(&hand) < 1e-12);
        }
        let a0 = preserved_algebra(&c0, &tol()).unwrap();
        assert_eq!(a0.dimension(), 4);
        assert!(homomorphism_residual(&c0, &a0, &tol()).unwrap() < 1e-8);
    }

    #[test]
    fn noiseless_subsystem_passes_oqec() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // two unitaries would only generate a commutative interaction algebra
        let ks: Vec<_> = (0..3).map(|_| random::unitary(2, &mut rng)).collect();
        let errs: Vec<_> = ks.iter().map(|k| ComplexMatrix::identity(2).kron(k).scale_re((1.0f64 / 3.0).sqrt())).collect();
        let c = Channel::new(errs, &tol()).unwrap();
        let r = oqec_check(&c, &CodeSubspace::full(4), (2, 2), &tol()).unwrap();
        assert!(r.passes);
        assert!(!kl_check(&c, &CodeSubspace::full(4), &tol()).unwrap().passes);
        let a = preserved_algebra(&c, &tol()).unwrap();
        assert_eq!(a.block_dims, vec![(2, 2)]);
        assert_eq!(classify(&a), CodeKind::Subsystem);
    }

    #[test]
    fn span_equivalence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = bitflip([0.4, 0.2, 0.2, 0.2]);
        let mix = random::unitary(4, &mut rng);
        let mixed: Vec<_> = (0..4)
            .map(|k| {
                c.elements()
                    .iter()
                    .enumerate()
                    .fold(ComplexMatrix::zeros(8, 8), |acc, (j, e)| &acc + &e.scale(mix.get(k, j)))
            })
            .collect();
        let c2 = Channel::new(mixed, &tol()).unwrap();
        assert!(span_equivalent(&c, &c2, &tol()).unwrap());
        assert!(!span_equivalent(&Channel::dephasing(2), &Channel::identity(2), &tol()).unwrap());
    }

    #[test]
    fn operator_system_identity_holds() {
        let c = bitflip([0.4, 0.2, 0.2, 0.2]);
        let rep = correctable_operator_system(&c, &rep_code(), &tol()).unwrap();
        assert_eq!(rep.system.len(), 4);
        assert!(rep.identity_residual < 1e-10);
        let trivial = correctable_operator_system(&Channel::identity(8), &rep_code(), &tol()).unwrap();
        assert_eq!(trivial.system.len(), 4);
        assert!(trivial.identity_residual < 1e-10);
        // compressed to the code, S_0 is V A_0 V†
        let p = rep_code().projector();
        let code_alg = crate::algebras::OperatorBasisSet::full(2).map(8, |a| rep_code().isometry().sandwich(a), &tol()).unwrap();
        for s in trivial.system.basis() {
            assert!(code_alg.contains(&p.matmul(s).matmul(&p), &tol()));
        }
    }
}

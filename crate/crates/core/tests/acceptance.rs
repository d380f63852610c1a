//! End-to-end acceptance checks, one line of output per criterion.

mod common;

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};

use common::*;
use qichan::capacity::CapacityEstimate;
use qichan::channels::{duality_defect, matrix_units};
use qichan::correction::{fixed_point_residual, kl_check_operators, multiplicativity_residual, span_equivalent};
use qichan::decoherence::{marginal, qubit_effect_grid, random_observable};
use qichan::numlin::{paulis, random, C64};
use qichan::prelude::*;
use rand::Rng;
use rayon::prelude::*;

type Check = (bool, String);
type Criterion = (&'static str, fn() -> Check);

fn x_on(q: usize) -> ComplexMatrix {
    let [id, x, _, _] = paulis();
    let f = |k| if k == q { x.clone() } else { id.clone() };
    f(0).kron(&f(1)).kron(&f(2))
}

fn z_on(q: usize) -> ComplexMatrix {
    let [id, _, _, z] = paulis();
    let f = |k| if k == q { z.clone() } else { id.clone() };
    f(0).kron(&f(1)).kron(&f(2))
}

fn proj_sum(d: usize, idx: &[usize]) -> ComplexMatrix {
    idx.iter().fold(ComplexMatrix::zeros(d, d), |acc, &i| &acc + &ComplexMatrix::unit(d, i, i))
}

fn c1_dephasing() -> Check {
    let t = tol();
    let d = 4;
    let c = Channel::new((0..d).map(|i| ComplexMatrix::unit(d, i, i)).collect(), &t).unwrap();
    let alg = preserved_algebra(&c, &t).unwrap();
    let r = correction_channel(&c, &t).unwrap();
    let fix = fixed_point_residual(&c, &r, &alg.carrier);
    let ptr = pointer_algebra(&c, &t).unwrap();
    // each pointer effect must be one of the |i⟩⟨i|, and all must appear
    let mut hit = vec![false; d];
    let mut eff_err: f64 = 0.0;
    for e in ptr.pointer_effects.effects() {
        let (i, err) = (0..d)
            .map(|i| (i, e.dist(&ComplexMatrix::unit(d, i, i))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        hit[i] = true;
        eff_err = eff_err.max(err);
    }
    let residual = [alg.pattern_residual, fix, ptr.commutativity_residual, eff_err].into_iter().fold(0.0, f64::max);
    let ok = alg.block_dims == vec![(1, 1); 4]
        && alg.carrier.same_span(&OperatorBasisSet::diagonal(d), &t)
        && hit.iter().all(|&h| h)
        && ptr.pointer_effects.len() == d
        && residual <= 1e-8;
    (ok, format!("blocks {:?}, worst residual {residual:.2e}", alg.block_dims))
}

fn c2_blocks() -> Check {
    let t = tol();
    let mut g = rng(21);
    let u = random::unitary(6, &mut g);
    let ps = [proj_sum(6, &[0, 1]), proj_sum(6, &[2, 3, 4]), proj_sum(6, &[5])];
    let c = Channel::new(ps.iter().map(|p| u.matmul(p)).collect(), &t).unwrap();
    let alg = preserved_algebra(&c, &t).unwrap();
    let mut dims = alg.block_dims.clone();
    dims.sort();
    let ptr = pointer_algebra(&c, &t).unwrap();
    let span_p = OperatorBasisSet::span(6, &ps, &t).unwrap();
    let ok = dims == vec![(1, 1), (2, 1), (3, 1)] && ptr.pointer_algebra.carrier.same_span(&span_p, &t);
    (ok, format!("blocks {:?}, pointer dim {}", alg.block_dims, ptr.pointer_algebra.carrier.len()))
}

fn bitflip_channel(p: [f64; 4]) -> Channel {
    let ops: Vec<ComplexMatrix> = std::iter::once(ComplexMatrix::identity(8)).chain((0..3).map(x_on)).collect();
    Channel::new(ops.iter().zip(p).map(|(o, w)| o.scale_re(w.sqrt())).collect(), &tol()).unwrap()
}

fn c3_bitflip() -> Check {
    let t = tol();
    let code = CodeSubspace::from_basis_states(8, &[0, 7]).unwrap();
    let errors: Vec<ComplexMatrix> = std::iter::once(ComplexMatrix::identity(8)).chain((0..3).map(x_on)).collect();
    let kl = kl_check_operators(&errors, &code, &t).unwrap();
    let mut with_z = errors.clone();
    with_z.push(z_on(0));
    let kl_z = kl_check_operators(&with_z, &code, &t).unwrap();

    let c0 = qichan::correction::restrict(&bitflip_channel([0.4, 0.2, 0.2, 0.2]), &code).unwrap();
    let r0 = correction_channel(&c0, &t).unwrap();
    let full = OperatorBasisSet::full(2);
    let alg = preserved_algebra(&c0, &t).unwrap();
    let res = fixed_point_residual(&c0, &r0, &full);
    let ok = kl.passes && !kl_z.passes && alg.carrier.len() == 4 && res <= 1e-7;
    (
        ok,
        format!(
            "KL {} (residual {:.1e}), with Z1 {} (residual {:.2}), code algebra dim {}, fixed-point residual {res:.2e}",
            kl.passes,
            kl.residual,
            kl_z.passes,
            kl_z.residual,
            alg.carrier.len()
        ),
    )
}

fn c4_operator_system() -> Check {
    let t = tol();
    let p = [0.4, 0.2, 0.2, 0.2];
    let c = bitflip_channel(p);
    let code = CodeSubspace::from_basis_states(8, &[0, 7]).unwrap();
    let rep = correctable_operator_system(&c, &code, &t).unwrap();

    // closed form: Σ_{k,l} p_l X_l X_k V A V† X_k X_l over A ∈ M₂
    let flips: Vec<ComplexMatrix> = std::iter::once(ComplexMatrix::identity(8)).chain((0..3).map(x_on)).collect();
    let v = code.isometry();
    let oracle: Vec<ComplexMatrix> = matrix_units(2)
        .iter()
        .map(|a| {
            let enc = v.matmul(a).matmul(&v.adjoint());
            let mut s = ComplexMatrix::zeros(8, 8);
            for (l, xl) in flips.iter().enumerate() {
                for xk in &flips {
                    let w = xl.matmul(xk);
                    s = &s + &w.matmul(&enc).matmul(&w.adjoint()).scale_re(p[l]);
                }
            }
            s
        })
        .collect();
    let oracle_span = OperatorBasisSet::span(8, &oracle, &t).unwrap();
    let worst = oracle
        .iter()
        .chain(rep.system.basis())
        .map(|s| c.apply_dual(&rep.correction.apply_dual(s).unwrap()).unwrap().dist(s))
        .fold(0.0, f64::max);
    let ok = rep.system.same_span(&oracle_span, &t) && worst <= 1e-7 && rep.identity_residual <= 1e-7;
    (ok, format!("dim S_0 = {}, matches closed form, worst E*R* residual {worst:.2e}", rep.system.len()))
}

fn c5_teleport() -> Check {
    let t = tol();
    let us = paulis();
    let el: Vec<ComplexMatrix> =
        us.iter().enumerate().map(|(i, u)| ComplexMatrix::ket(4, i).kron(u).scale_re(0.5)).collect();
    let mut gram: f64 = 0.0;
    for (i, a) in el.iter().enumerate() {
        for (j, b) in el.iter().enumerate() {
            let want = if i == j { ComplexMatrix::identity(2).scale_re(0.25) } else { ComplexMatrix::zeros(2, 2) };
            gram = gram.max(a.adjoint().matmul(b).dist(&want));
        }
    }
    let c = Channel::new(el, &t).unwrap();
    let alg = preserved_algebra(&c, &t).unwrap();
    let fix = fixed_point_residual(&c, &correction_channel(&c, &t).unwrap(), &OperatorBasisSet::full(2));

    // symbol 3 is read as 0
    let mut pi = vec![vec![0.0; 4]; 4];
    for (i, row) in pi.iter_mut().enumerate().take(3) {
        row[i] = 1.0;
    }
    pi[0][3] = 1.0;
    let pi = StochasticMap::new(pi, &t).unwrap();
    let lossy = compose(&tensor(&pi.to_channel(), &Channel::identity(2)), &c).unwrap();
    let lossy_alg = preserved_algebra(&lossy, &t).unwrap();
    let comm_z = commutant(&[paulis()[3].clone()], &t).unwrap();
    let ok = gram <= 1e-10
        && alg.block_dims == vec![(2, 1)]
        && fix <= 1e-7
        && lossy_alg.carrier.len() == 2
        && lossy_alg.carrier.same_span(&comm_z, &t);
    (
        ok,
        format!(
            "Gram residual {gram:.1e}, algebra {:?}, lossy algebra dim {}",
            alg.block_dims,
            lossy_alg.carrier.len()
        ),
    )
}

fn c6_classical() -> Check {
    let t = tol();
    let mut g = rng(6);
    let n = 5;
    let pi = StochasticMap::new(random::stochastic(n, n, &mut g), &t).unwrap();
    let r = correction_channel(&pi.to_channel(), &t).unwrap();
    let pr = StochasticMap::from_channel(&r, &t).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let row: f64 = (0..n).map(|k| pi.get(j, k)).sum();
            worst = worst.max((pr.get(i, j) - pi.get(j, i) / row).abs());
        }
    }
    (worst <= 1e-12, format!("max |π^R − oracle| = {worst:.1e}"))
}

fn c7_sweep() -> Check {
    let t = tol();
    let (n, period) = (4, 1.0);
    let ps = vec![proj_sum(4, &[0, 1]), proj_sum(4, &[2]), proj_sum(4, &[3])];
    let times: Vec<f64> = (0..=10).map(|k| k as f64 * period / 10.0).collect();
    let sw = dephasing_sweep(&ps, n, period, &times, &t).unwrap();
    let last = sw.gamma.len() - 1;
    let mut id_err: f64 = 0.0;
    for (i, row) in sw.gamma[last].iter().enumerate() {
        for (m, &g) in row.iter().enumerate() {
            id_err = id_err.max((g - if i == m { 1.0 } else { 0.0 }).abs());
        }
    }
    let deph = Channel::projective(ps.clone(), &t).unwrap();
    let snap_err = sw.channel_snapshots[last].action_distance(&deph).unwrap();

    // brute force at T/2: γ_im = tr(P_i E_c*(|φ_m⟩⟨φ_m|)) / tr P_i
    let mid = 5;
    let ec = sw.channel_snapshots[mid].complement();
    let omega = 2.0 * PI / n as f64;
    let mut oracle_err: f64 = 0.0;
    for m in 0..n {
        let phi: Vec<C64> = (0..n).map(|k| C64::from_polar(1.0 / (n as f64).sqrt(), -omega * (m * k) as f64)).collect();
        let a = ec.apply_dual(&ComplexMatrix::projector(&phi)).unwrap();
        for (i, p) in ps.iter().enumerate() {
            let g = p.matmul(&a).trace().re / p.trace().re;
            oracle_err = oracle_err.max((g - sw.gamma[mid][i][m]).abs());
        }
    }
    let ok = id_err <= 1e-9 && snap_err <= 1e-9 && oracle_err <= 1e-9;
    (ok, format!("γ(T) vs 1 {id_err:.1e}, snapshot {snap_err:.1e}, oracle at T/2 {oracle_err:.1e}"))
}

fn c8_antisym() -> Check {
    let t = tol();
    let eps = |i: usize, j: usize, k: usize| -> f64 {
        ((j as f64 - i as f64) * (k as f64 - i as f64) * (k as f64 - j as f64)) / 2.0
    };
    let v = ComplexMatrix::from_fn(9, 3, |r, k| C64::new(eps(r / 3, r % 3, k) / 2f64.sqrt(), 0.0));
    let joint = Channel::new(vec![v], &t).unwrap();
    let m = marginal(&joint, &[3, 3], 0).unwrap();
    let self_c = m.action_distance(&m.complement()).unwrap();
    // dual ½(tr(A)1 − Aᵀ)
    let dual_err = matrix_units(3)
        .iter()
        .map(|a| {
            let want = (&ComplexMatrix::identity(3).scale(a.trace()) - &a.transpose()).scale_re(0.5);
            m.apply_dual(a).unwrap().dist(&want)
        })
        .fold(0.0, f64::max);
    let bc = broadcast_pointer(&joint, &[3, 3], None, &t).unwrap();
    let ok = self_c <= 1e-9
        && dual_err <= 1e-9
        && bc.broadcast.pointer_algebra.carrier.same_span(&OperatorBasisSet::scalars(3), &t);
    (
        ok,
        format!(
            "‖E − E_c‖ {self_c:.1e}, dual formula {dual_err:.1e}, broadcast dim {}",
            bc.broadcast.pointer_algebra.carrier.len()
        ),
    )
}

fn depolarizing(alpha: f64) -> Channel {
    let [id, x, y, z] = paulis();
    let w = (1.0 - alpha) / 4.0;
    Channel::mixed_unitary(&[alpha + w, w, w, w], &[id, x, y, z], &tol()).unwrap()
}

fn sic() -> DiscreteObservable {
    let s = 1.0 / 3f64.sqrt();
    let [id, x, y, z] = paulis();
    let eff = [[s, s, s], [s, -s, -s], [-s, s, -s], [-s, -s, s]]
        .iter()
        .map(|n| (&(&id + &x.scale_re(n[0])) + &(&y.scale_re(n[1]) + &z.scale_re(n[2]))).scale_re(0.25))
        .collect();
    DiscreteObservable::new(eff, &tol()).unwrap()
}

/// (feasible count, worst residual among feasible, total)
fn sic_scan(alpha: f64) -> (usize, f64, usize) {
    let t = tol().with_abs(1e-7);
    let c = depolarizing(alpha);
    let gamma = sic();
    let grid = qubit_effect_grid(400, 5);
    let res: Vec<(bool, f64)> = grid
        .par_iter()
        .map(|b| {
            let a = c.apply_dual(b).unwrap();
            let x = DiscreteObservable::new(vec![a.clone(), &ComplexMatrix::identity(2) - &a], &t).unwrap();
            let cg = coarse_grain_solve(&x, &gamma, &t).unwrap();
            (cg.is_feasible(), cg.residual())
        })
        .collect();
    let feasible = res.iter().filter(|r| r.0).count();
    let worst = res.iter().filter(|r| r.0).map(|r| r.1).fold(0.0, f64::max);
    (feasible, worst, res.len())
}

fn c9_sic() -> Check {
    let (f3, w3, n3) = sic_scan(1.0 / 3.0);
    let (f5, _, n5) = sic_scan(0.5);
    let ok = n3 >= 10_000 && f3 == n3 && w3 <= 1e-7 && f5 < n5;
    (ok, format!("α=1/3: {f3}/{n3} feasible (worst {w3:.1e}); α=0.5: {} of {n5} infeasible", n5 - f5))
}

fn capacity(x: &DiscreteObservable) -> CapacityEstimate {
    observable_capacity(x, &CapacityOptions::default(), &tol()).unwrap()
}

fn c10_capacity() -> Check {
    let sharp = capacity(&DiscreteObservable::computational(4)).bits;
    let trivial = capacity(&DiscreteObservable::trivial(3)).bits;
    let mut g = rng(10);
    let pairs: Vec<(DiscreteObservable, Vec<Vec<f64>>)> = (0..50)
        .map(|_| {
            let d = g.random_range(2..=3);
            let k = g.random_range(2..=4);
            let x = random_observable(d, k, &mut g);
            let pi = random::stochastic(g.random_range(2..=4), k, &mut g);
            (x, pi)
        })
        .collect();
    let gaps: Vec<f64> = pairs
        .par_iter()
        .map(|(x, pi)| capacity(&x.coarse_grained(pi).unwrap()).bits - capacity(x).bits)
        .collect();
    let worst = gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ok = (sharp - 2.0).abs() <= 1e-6 && trivial.abs() <= 1e-9 && worst <= 1e-6;
    (ok, format!("sharp {sharp:.9} bits, trivial {trivial:.1e}, max C(π∘X) − C(X) = {worst:.1e} over 50 pairs"))
}

fn c11_properties() -> Check {
    let t = tol();
    let n = 100;
    let seeds: Vec<u64> = (0..n).collect();

    let dc: Vec<bool> = seeds
        .par_iter()
        .map(|&s| {
            let mut g = rng(1000 + s);
            let d = g.random_range(2..=8);
            let (_, alg) = random_algebra(d, &mut g);
            let gens: Vec<ComplexMatrix> = (0..2)
                .map(|_| {
                    alg.basis().iter().fold(ComplexMatrix::zeros(d, d), |acc, b| &acc + &b.scale(random::gaussian(&mut g)))
                })
                .collect();
            let gen = generate_star_algebra(&gens, &t).unwrap();
            let cc = commutant(commutant(&gens, &t).unwrap().basis(), &t).unwrap();
            cc.same_span(&gen, &t) && cc.same_span(&alg, &t)
        })
        .collect();

    let choi: Vec<f64> = seeds
        .par_iter()
        .map(|&s| {
            let mut g = rng(2000 + s);
            let (din, dout) = (g.random_range(1..=8), g.random_range(1..=8));
            let c = random_channel(din, dout, g.random_range(1..=4), &mut g);
            let back = Channel::from_choi(&c.choi(), din, dout, &t).unwrap();
            c.action_distance(&back).unwrap()
        })
        .collect();

    let dual: Vec<f64> = seeds
        .par_iter()
        .map(|&s| {
            let mut g = rng(3000 + s);
            let (din, dout) = (g.random_range(1..=8), g.random_range(1..=8));
            let c = random_channel(din, dout, g.random_range(1..=4), &mut g);
            let rho = random::density(din, &mut g);
            let a = random::ginibre(dout, dout, &mut g);
            duality_defect(&c, &rho, &a).unwrap()
        })
        .collect();

    let mult: Vec<f64> = seeds
        .par_iter()
        .map(|&s| {
            let mut g = rng(4000 + s);
            let d = g.random_range(2..=8);
            let blocks = random_blocks(d, &mut g);
            let (c, expected) = channel_with_algebra(&blocks, &mut g);
            let alg = preserved_algebra(&c, &t).unwrap();
            if !alg.carrier.same_span(&expected, &t) {
                return f64::INFINITY;
            }
            let r = correction_channel(&c, &t).unwrap();
            multiplicativity_residual(&r, &alg.carrier).max(fixed_point_residual(&c, &r, &alg.carrier))
        })
        .collect();

    let span: Vec<f64> = seeds
        .par_iter()
        .map(|&s| {
            let mut g = rng(5000 + s);
            let d = g.random_range(2..=8);
            let blocks = random_blocks(d, &mut g);
            let (c1, _) = channel_with_algebra(&blocks, &mut g);
            let c2 = remix(&c1, &mut g);
            if !span_equivalent(&c1, &c2, &t).unwrap() {
                return f64::INFINITY;
            }
            let (a1, a2) = (preserved_algebra(&c1, &t).unwrap(), preserved_algebra(&c2, &t).unwrap());
            if !a1.carrier.same_span(&a2.carrier, &t) {
                return f64::INFINITY;
            }
            fixed_point_residual(&c2, &correction_channel(&c1, &t).unwrap(), &a2.carrier)
        })
        .collect();

    let max = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let dc_ok = dc.iter().filter(|&&b| b).count();
    let ok = dc_ok == n as usize
        && max(&choi) <= 1e-8
        && max(&dual) <= 1e-8
        && max(&mult) <= 1e-7
        && max(&span) <= 1e-7;
    (
        ok,
        format!(
            "{n} instances each: double commutant {dc_ok}/{n}, Choi {:.1e}, duality {:.1e}, R* multiplicative {:.1e}, span invariance {:.1e}",
            max(&choi),
            max(&dual),
            max(&mult),
            max(&span)
        ),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("dephasing channel", c1_dephasing),
        ("block channel", c2_blocks),
        ("bit-flip code", c3_bitflip),
        ("correctable operator system", c4_operator_system),
        ("teleportation", c5_teleport),
        ("classical channel correction", c6_classical),
        ("dephasing sweep", c7_sweep),
        ("antisymmetric channel", c8_antisym),
        ("SIC containment", c9_sic),
        ("observable capacity", c10_capacity),
        ("property suites", c11_properties),
    ];
    let mut failed = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let (ok, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {:>2} ({name}): {detail} [{:.2}s]", k + 1, start.elapsed().as_secs_f64());
        if !ok {
            failed.push(k + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}

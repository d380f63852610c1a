//! The partially depolarizing channel αρ + (1 − α)·tr(ρ)·1/2. At α = 1/3
//! all its preserved effects are coarse-grainings of the tetrahedral
//! SIC-POVM; at larger α some are not.

use qichan::catalog::{sic_cloner, sic_povm};
use qichan::decoherence::{effect_region_sample, qubit_effect_grid};
use qichan::prelude::*;

fn main() -> qichan::Result<()> {
    let tol = Tolerance::default().with_abs(1e-7);
    let gamma = sic_povm();
    let grid = qubit_effect_grid(100, 4);
    for alpha in [0.2, 1.0 / 3.0, 0.4, 0.5] {
        let c = sic_cloner(alpha);
        let mut infeasible = 0;
        for b in &grid {
            let a = c.apply_dual(b)?;
            let x = DiscreteObservable::new(vec![a.clone(), &ComplexMatrix::identity(2) - &a], &tol)?;
            if !coarse_grain_solve(&x, &gamma, &tol)?.is_feasible() {
                infeasible += 1;
            }
        }
        println!("α = {alpha:.3}: {infeasible}/{} sampled preserved effects fall outside the SIC hull", grid.len());
    }

    // Plot-ready boundary of the preserved effects at α = 1/3.
    let pts = effect_region_sample(&sic_cloner(1.0 / 3.0), 8, &tol)?;
    let rmax = pts.iter().map(|p| p.x.hypot(p.z)).fold(0.0, f64::max);
    println!("region sample: {} points, max |(x, z)| = {rmax:.4}", pts.len());
    Ok(())
}

//! Pointer algebras and full decoherence: which sharp information is both
//! kept and leaked, and whether every preserved observable is a
//! coarse-graining of one pointer observable.

use qichan::catalog::diamond_channel;
use qichan::decoherence::full_decoherence_check;
use qichan::prelude::*;

fn main() -> qichan::Result<()> {
    let tol = Tolerance::default();

    let p = pointer_algebra(&Channel::dephasing(3), &tol)?;
    println!("dephasing: pointer blocks {:?}, commutativity {:.1e}", p.pointer_algebra.block_dims, p.commutativity_residual);

    // Rank-one measure-and-prepare channels decohere fully onto their POVM,
    // even though their pointer algebra is trivial.
    for n in 2..=5 {
        let (c, gamma) = diamond_channel(n);
        let sharp = pointer_algebra(&c, &tol)?.pointer_algebra.dimension();
        let r = full_decoherence_check(&c, &gamma, 32, 1, &tol)?;
        println!(
            "diamonds-{n}: pointer dim {sharp}, {}/{} preserved observables coarse-grain Γ (worst {:.1e}, explicit {:.1e})",
            r.feasible,
            r.samples,
            r.max_residual,
            r.explicit_residual.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}

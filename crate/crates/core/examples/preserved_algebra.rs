//! Sharp observables a channel preserves, and the channel that corrects them.
//!
//! ρ ↦ Σ U P_i ρ P_i U† with projectors of rank 2, 3 and 1 keeps everything
//! inside each block: the preserved algebra is M₂ ⊕ M₃ ⊕ M₁.

use qichan::catalog::block_channel;
use qichan::correction::{analyze, fixed_point_residual};
use qichan::prelude::*;

fn main() -> qichan::Result<()> {
    let tol = Tolerance::default();
    let (channel, projectors) = block_channel(&[2, 3, 1], 7);

    let report = analyze(&channel, 0, &tol)?;
    let alg = &report.preserved_algebra;
    println!("preserved algebra: dim {}, blocks (n, m) = {:?}, kind {:?}", alg.dimension(), alg.block_dims, report.kind);
    for (name, r) in &report.residuals {
        println!("  {name:<16} {r:.2e}");
    }

    // The projectors themselves are preserved: E*(R*(P_i)) = P_i.
    let span = OperatorBasisSet::span(6, &projectors, &tol)?;
    println!("E*R* on the block projectors: {:.2e}", fixed_point_residual(&channel, &report.correction, &span));

    // The center is spanned by the block projectors.
    let z = center(&alg.carrier, &tol)?;
    println!("center dim {} (same span as the P_i: {})", z.len(), z.same_span(&span, &tol));
    Ok(())
}

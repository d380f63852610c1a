//! Teleportation as a channel C² → C⁴ ⊗ C², and what survives when two of
//! Alice's classical messages are confused.

use qichan::catalog::{lossy_teleportation, merge_symbols, teleportation};
use qichan::correction::fixed_point_residual;
use qichan::prelude::*;

fn main() -> qichan::Result<()> {
    let tol = Tolerance::default();
    let t = teleportation();
    let alg = preserved_algebra(&t, &tol)?;
    let r = correction_channel(&t, &tol)?;
    println!("ideal: blocks {:?}, E*R* on M2 {:.1e}", alg.block_dims, fixed_point_residual(&t, &r, &OperatorBasisSet::full(2)));

    // Bob receives 0 whenever Alice sends 3: σ_z can no longer be undone.
    for (to, from) in [(0, 3), (0, 1), (1, 2)] {
        let lossy = lossy_teleportation(&merge_symbols(4, to, from))?;
        let a = preserved_algebra(&lossy, &tol)?;
        println!("merge {from} -> {to}: preserved algebra dim {}, blocks {:?}", a.dimension(), a.block_dims);
    }
    Ok(())
}

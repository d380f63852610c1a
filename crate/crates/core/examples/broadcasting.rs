//! No broadcasting of sharp observables. The antisymmetric isometry
//! C³ → C³ ⊗ C³ gives both outputs the same marginal channel, which is its
//! own complement, so nothing sharp reaches either party.

use qichan::catalog::{antisym_joint, antisym_marginal};
use qichan::prelude::*;

fn main() -> qichan::Result<()> {
    let tol = Tolerance::default();
    let m = antisym_marginal();
    println!("‖E − E_c‖ on a full basis: {:.1e}", m.action_distance(&m.complement())?);

    let b = broadcast_pointer(&antisym_joint(), &[3, 3], None, &tol)?;
    println!(
        "marginal algebra dims {:?}; broadcast algebra dim {} (commutative: {})",
        b.marginal_algebra_dims,
        b.broadcast.pointer_algebra.dimension(),
        b.commutative
    );

    // Copying a basis in two does broadcast the computational observable.
    let copy: Vec<ComplexMatrix> = (0..3)
        .map(|i| ComplexMatrix::ket(9, 4 * i).matmul(&ComplexMatrix::ket(3, i).adjoint()))
        .collect();
    let c = Channel::new(copy, &tol)?;
    let b = broadcast_pointer(&c, &[3, 3], None, &tol)?;
    println!("cloning a basis: broadcast algebra blocks {:?}", b.broadcast.pointer_algebra.block_dims);
    Ok(())
}

//! Three-qubit bit-flip code: Knill–Laflamme conditions, the explicit
//! correction, and the larger operator system it corrects on every input.

use qichan::catalog::{bitflip3, bitflip_errors};
use qichan::correction::{fixed_point_residual, kl_check_operators, restrict};
use qichan::numlin::paulis;
use qichan::prelude::*;

fn main() -> qichan::Result<()> {
    let tol = Tolerance::default();
    let code = CodeSubspace::from_basis_states(8, &[0, 7])?;
    let channel = bitflip3(&[0.4, 0.2, 0.2, 0.2], &tol)?;

    let kl = kl_check(&channel, &code, &tol)?;
    println!("KL on {{1, X1, X2, X3}}: passes = {}, residual {:.1e}", kl.passes, kl.residual);
    if let Some(lambda) = &kl.lambda {
        let diag: Vec<f64> = (0..lambda.len()).map(|i| lambda[i][i][0]).collect();
        println!("  diag λ = {diag:?}");
    }

    // A phase flip on the first qubit is not correctable.
    let [id, _, _, z] = paulis();
    let mut errors = bitflip_errors();
    errors.push(z.kron(&id).kron(&id));
    let with_z = kl_check_operators(&errors, &code, &tol)?;
    println!("with Z1 added: passes = {}, residual {:.2}", with_z.passes, with_z.residual);

    let on_code = restrict(&channel, &code)?;
    let r0 = correction_channel(&on_code, &tol)?;
    println!("E0*R0* on M2: {:.2e}", fixed_point_residual(&on_code, &r0, &OperatorBasisSet::full(2)));

    let sys = correctable_operator_system(&channel, &code, &tol)?;
    println!(
        "operator system S0: dim {}, is an algebra: {}, E*R* residual {:.2e}",
        sys.system.len(),
        sys.system.is_algebra(&tol),
        sys.identity_residual
    );
    Ok(())
}

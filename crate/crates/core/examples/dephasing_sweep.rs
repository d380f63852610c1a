//! Gradual dephasing: N environment particles each pick up a phase
//! exp(−iωktλ_i) from the system. Prints γ_im(t) as CSV on stdout.

use qichan::prelude::*;

fn main() -> qichan::Result<()> {
    let tol = Tolerance::default();
    let d = 4;
    let projectors: Vec<ComplexMatrix> = (0..d).map(|i| ComplexMatrix::unit(d, i, i)).collect();
    let times: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    let sweep = dephasing_sweep(&projectors, 4, 1.0, &times, &tol)?;

    let last = sweep.channel_snapshots.last().expect("non-empty");
    let full = Channel::projective(projectors, &tol)?;
    eprintln!("distance from complete dephasing at t = T: {:.1e}", last.action_distance(&full)?);

    sweep.write_csv(std::io::stdout().lock()).expect("stdout");
    Ok(())
}

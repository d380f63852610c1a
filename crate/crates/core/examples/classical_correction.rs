//! A classical noisy channel embedded as a quantum channel. Its correction
//! is the Bayesian inverse π^R_ij = π_ji / Σ_k π_jk.

use qichan::numlin::random;
use qichan::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qichan::Result<()> {
    let tol = Tolerance::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pi = StochasticMap::new(random::stochastic(4, 4, &mut rng), &tol)?;
    let r = correction_channel(&pi.to_channel(), &tol)?;
    let pr = StochasticMap::from_channel(&r, &tol)?;

    println!("π (column i = input):");
    for row in pi.entries() {
        println!("  {}", row.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join("  "));
    }
    println!("π^R:");
    for row in pr.entries() {
        println!("  {}", row.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join("  "));
    }
    println!("capacity of π: {:.4} bits", shannon_capacity(&pi, 1e-10));
    Ok(())
}

//! Classical capacity of an observable: the best mutual information between
//! a preparation ensemble and the measurement outcomes.

use qichan::catalog::sic_povm;
use qichan::prelude::*;

fn main() -> qichan::Result<()> {
    let tol = Tolerance::default();
    let opts = CapacityOptions::default();

    let sharp = observable_capacity(&DiscreteObservable::computational(4), &opts, &tol)?;
    println!("sharp 4-outcome: {:.6} bits", sharp.bits);

    let trivial = observable_capacity(&DiscreteObservable::trivial(2), &opts, &tol)?;
    println!("trivial:         {:.6} bits", trivial.bits);

    // Coarse-graining can only lose information.
    let sic = sic_povm();
    let merged = sic.coarse_grained(&[vec![1.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 1.0]])?;
    let c_sic = observable_capacity(&sic, &opts, &tol)?;
    let c_merged = observable_capacity(&merged, &opts, &tol)?;
    println!("SIC-POVM:        {:.6} bits (log2(4/3) = {:.6})", c_sic.bits, (4.0f64 / 3.0).log2());
    println!("SIC, merged:     {:.6} bits", c_merged.bits);
    println!("SIC witness ensemble: {} states, priors {:?}", c_sic.witness.len(), c_sic.witness.priors());
    Ok(())
}

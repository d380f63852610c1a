//! A system repeatedly interacting with fresh environment particles. The
//! observables that survive every iterate are the fixed points of the dual;
//! their center is what each particle eventually carries away.

use qichan::catalog::iterated_channel;
use qichan::decoherence::iterated_fixed_points;
use qichan::prelude::*;

fn main() -> qichan::Result<()> {
    let tol = Tolerance::default();
    let c = iterated_channel(11);
    let f = iterated_fixed_points(&c, 500, &tol)?;
    println!("fixed points: dim {}, unital {}, algebra {:?}", f.fixed.len(), f.unital, f.is_algebra);
    println!("Cesàro mean after 500 steps is {:.1e} from the fixed space", f.cesaro_residual);
    if let Some(z) = &f.center {
        println!("center dim {}", z.len());
    }
    if let Some(r) = f.outgoing_residual {
        println!("outgoing information outside the fixed algebra's commutant: {r:.1e}");
    }
    Ok(())
}

//! Finite-dimensional quantum channel analysis.
//!
//! Given a channel by its elements, this crate computes what the channel
//! preserves (the sharp preserved algebra, correctable operator systems and an
//! explicit correction channel), what leaks to the environment (the
//! complementary channel), and which classical pointer description emerges
//! (pointer algebra, coarse-graining feasibility, observable capacity).
//!
//! ```
//! use qichan::prelude::*;
//!
//! let tol = Tolerance::default();
//! let report = preserved_algebra(&Channel::dephasing(3), &tol).unwrap();
//! assert_eq!(report.block_dims, vec![(1, 1); 3]);
//! ```

pub mod algebras;
pub mod capacity;
pub mod catalog;
pub mod channels;
pub mod cli;
pub mod correction;
pub mod decoherence;
pub mod error;
mod nnls;
pub mod numlin;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::algebras::{
        center, commutant, contains, generate_star_algebra, intersect, structure_decompose, AlgebraStructure,
        OperatorBasisSet,
    };
    pub use crate::capacity::{holevo_quantity, observable_capacity, shannon_capacity, CapacityOptions, Ensemble};
    pub use crate::channels::{compose, luders_collapse, tensor, Channel, DiscreteObservable, Instrument, Isometry};
    pub use crate::correction::{
        correctable_operator_system, correction_channel, interaction_span, kl_check, oqec_check, preserved_algebra,
        CodeSubspace,
    };
    pub use crate::decoherence::{
        broadcast_pointer, coarse_grain_solve, dephasing_sweep, pointer_algebra, StochasticMap,
    };
    pub use crate::error::{Error, Result};
    pub use crate::numlin::{ComplexMatrix, Tolerance, C64};
}

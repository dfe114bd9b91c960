//! Cohesive phase-field fracture in 2D plane strain.
//!
//! The fracture eigenstrain is resolved locally at each integration point by a
//! return map onto a strength surface; the phase field only degrades that
//! strength. Displacements and the phase field are discretized with 9-node
//! quadrilaterals and advanced by a staggered Newmark scheme.

// index loops read closer to the tensor algebra; negated float
// comparisons are there to reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]
#![allow(
    clippy::type_complexity,
    clippy::too_many_arguments,
    clippy::large_enum_variant
)]

pub mod assembly;
pub mod constitutive;
pub mod error;
pub mod mesh;
pub mod sim;
pub mod solver;
pub mod tensor;

pub use error::Error;

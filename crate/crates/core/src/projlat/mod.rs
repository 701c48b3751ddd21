//! Complete systems of mutually orthogonal projections, their refinement
//! lattice, Q-projections (pinchings) and quantum-complexity classification.

mod lattice;
mod project;
mod system;

pub use lattice::{consistent, finer, join, meet, LatticeOp, LatticeResult};
pub use project::{
    classify, q_project, tensor_system, weakly_equal, Classification, ComplexityTag, WeakCheck,
};
pub use system::{ProductSystem, ProjSystem};

//! Steady 2D compressible Euler equations discretized with a weak-form
//! discontinuous Galerkin method on curved quadrilateral meshes.
//!
//! The crate provides the Gaussian-bump channel benchmark mesh, a Roe flux
//! with entropy fix, characteristic boundary conditions, pseudo-transient
//! continuation to the steady state, the inverse-design wall objective, and
//! exact first/second derivatives of residual and objective with respect to
//! both the state and the mesh coordinates via nestable dual numbers.

pub mod basis;
pub mod bc;
pub mod dump;
pub mod entropy;
pub mod flux;
pub mod kernels;
pub mod mesh;
pub mod objective;
pub mod residual;
pub mod scalar;
pub mod solver;
pub mod state;

pub use bc::FlowBoundaryConditions;
pub use entropy::entropy_error;
pub use mesh::{BoundaryTag, BumpMeshSpec, DgDiscretization, N_FIELDS};
pub use objective::{InverseDesignObjective, ObjectiveDerivatives, WallTarget};
pub use residual::{EulerDgOps, HessianBlock};
pub use solver::{solve_flow, FlowSolution, PtcConfig};
pub use state::{FreeStream, GAMMA};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EulerError {
    #[error("non-physical state in cell {cell} at quadrature point {point}")]
    NonPhysicalState { cell: usize, point: usize },
    #[error("flow solver diverged; residual history: {history:?}")]
    FlowDivergence { history: Vec<f64> },
    #[error("linear solver failure: {0}")]
    Linear(String),
    #[error("wall coordinate {x} outside the target trace range")]
    TargetOutOfRange { x: f64 },
}

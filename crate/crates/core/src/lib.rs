//! Discrete-velocity BGK solver for the 1D Couette flow.
//!
//! The gas between two tangentially moving, diffusely reflecting walls is
//! described by three reduced distributions (F, G, H) over a 1D velocity
//! grid. Four spatial discretizations are provided: first-order upwind
//! finite volume, a Yee flux-limited second-order finite volume, a
//! second-order finite volume with MC-limited linear reconstruction and a
//! matching second-order diffuse-reflection wall closure, and a
//! piecewise-linear upwind discontinuous Galerkin scheme. A pseudo-time
//! driver marches to steady state and a study harness measures L2
//! self-convergence orders against a fine reference mesh.

pub mod boundary;
pub mod config;
pub mod dg;
pub mod driver;
pub mod equilibrium;
pub mod error;
pub mod fv;
pub mod gas;
pub mod mesh;
pub mod profile;
pub mod state;
pub mod study;
pub mod velocity;

pub use config::{parse_config, RunConfig, Scheme};
pub use error::SolverError;
pub use gas::{GasModel, WallSpec};
pub use mesh::Mesh1d;
pub use state::Fields;
pub use velocity::{compute_heat_flux, compute_moments, Moments, VelocityGrid};

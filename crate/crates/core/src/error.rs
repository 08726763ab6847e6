//! Error types shared across the solver.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid velocity grid: {0}")]
    InvalidGrid(String),

    #[error("invalid gas model: {0}")]
    InvalidGas(String),

    #[error("invalid wall specification: {0}")]
    InvalidWall(String),

    #[error("vacuum state: density {rho:.6e} is not positive")]
    VacuumState { rho: f64 },

    #[error("negative temperature: T = {t:.6e}")]
    NegativeTemperature { t: f64 },

    #[error("in cell {cell}: {source}")]
    AtCell {
        cell: usize,
        #[source]
        source: Box<SolverError>,
    },

    #[error("in cell {cell}, node {node}: {source}")]
    AtNode {
        cell: usize,
        node: usize,
        #[source]
        source: Box<SolverError>,
    },

    #[error(
        "discrete equilibrium correction did not converge after {iterations} iterations \
         (scaled residual {residual:.3e})"
    )]
    EquilibriumDiverged { iterations: usize, residual: f64 },

    #[error("CFL number {0} outside (0, 1]")]
    InvalidCfl(f64),

    #[error("time marching diverged at step {step}: residual {residual:.3e} (initial {initial:.3e})")]
    Diverged { step: usize, residual: f64, initial: f64 },

    #[error("non-finite values detected at step {step}")]
    NonFinite { step: usize },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("reference mesh ({reference} cells) is not an integer multiple of the coarse mesh ({coarse} cells)")]
    IncompatibleMeshes { coarse: usize, reference: usize },

    #[error("order fit requires at least 3 positive (h, error) pairs: {0}")]
    OrderFit(String),

    #[error("{0}")]
    Invalid(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SolverError {
    pub fn at_cell(self, cell: usize) -> Self {
        SolverError::AtCell { cell, source: Box::new(self) }
    }

    pub fn at_node(self, cell: usize, node: usize) -> Self {
        SolverError::AtNode { cell, node, source: Box::new(self) }
    }
}

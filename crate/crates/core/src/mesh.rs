//! Uniform 1D spatial mesh.

use crate::error::SolverError;

/// Uniform mesh on `[xmin, xmax]` with `cells` cells. Nodes sit at
/// `x_{i+1/2} = xmin + i*dx`, cell centers at `xmin + (i+1/2)*dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1d {
    xmin: f64,
    xmax: f64,
    cells: usize,
}

impl Mesh1d {
    pub fn new(xmin: f64, xmax: f64, cells: usize) -> Result<Self, SolverError> {
        if !(xmax > xmin) || !xmin.is_finite() || !xmax.is_finite() {
            return Err(SolverError::Invalid(format!("mesh bounds [{xmin}, {xmax}] invalid")));
        }
        if cells < 2 {
            return Err(SolverError::Invalid(format!(
                "need at least 2 cells (wall closures read two interior cells), got {cells}"
            )));
        }
        Ok(Mesh1d { xmin, xmax, cells })
    }

    pub fn unit(cells: usize) -> Result<Self, SolverError> {
        Mesh1d::new(0.0, 1.0, cells)
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn dx(&self) -> f64 {
        (self.xmax - self.xmin) / self.cells as f64
    }

    pub fn length(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn center(&self, i: usize) -> f64 {
        self.xmin + (i as f64 + 0.5) * self.dx()
    }
}

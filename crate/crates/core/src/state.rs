//! Storage for the reduced distributions (F, G, H).
//!
//! Both solver families store each component as one flat `Vec<f64>` in
//! structure-of-arrays form:
//!
//! - finite volume: `comp[i * nv + k]`, one row of `nv` velocity values per cell;
//! - discontinuous Galerkin: two planes of the same row layout, the first for
//!   the left-edge nodal values and the second for the right-edge values, so
//!   `comp[q * cells * nv + i * nv + k]` with `q` in `{0, 1}`.

/// One flat array per reduced distribution. F carries mass, G the transverse
/// energy moment, H the tangential momentum moment.
#[derive(Debug, Clone, PartialEq)]
pub struct Fields {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
}

/// Borrowed per-velocity values of (F, G, H) at one location.
#[derive(Debug, Clone, Copy)]
pub struct StateRow<'a> {
    pub f: &'a [f64],
    pub g: &'a [f64],
    pub h: &'a [f64],
}

impl Fields {
    pub fn zeros(len: usize) -> Self {
        Fields { f: vec![0.0; len], g: vec![0.0; len], h: vec![0.0; len] }
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn row(&self, nv: usize, i: usize) -> StateRow<'_> {
        let s = i * nv;
        StateRow { f: &self.f[s..s + nv], g: &self.g[s..s + nv], h: &self.h[s..s + nv] }
    }

    pub fn fill(&mut self, value: f64) {
        self.f.fill(value);
        self.g.fill(value);
        self.h.fill(value);
    }

    pub fn copy_from(&mut self, other: &Fields) {
        self.f.copy_from_slice(&other.f);
        self.g.copy_from_slice(&other.g);
        self.h.copy_from_slice(&other.h);
    }

    /// self += a * other, componentwise over all three arrays.
    pub fn axpy(&mut self, a: f64, other: &Fields) {
        for (x, y) in self.f.iter_mut().zip(&other.f) {
            *x += a * y;
        }
        for (x, y) in self.g.iter_mut().zip(&other.g) {
            *x += a * y;
        }
        for (x, y) in self.h.iter_mut().zip(&other.h) {
            *x += a * y;
        }
    }

    pub fn l2_norm_f(&self) -> f64 {
        self.f.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn all_finite(&self) -> bool {
        self.f.iter().all(|x| x.is_finite())
            && self.g.iter().all(|x| x.is_finite())
            && self.h.iter().all(|x| x.is_finite())
    }

    /// Number of strictly negative F entries (monitoring only; negativity is
    /// not clipped anywhere in the solver).
    pub fn negative_f_count(&self) -> usize {
        self.f.iter().filter(|&&x| x < 0.0).count()
    }
}

//! Gas model: constants, viscosity power law, BGK relaxation time, Bird
//! mean free path, and Knudsen-number handling.

use crate::error::SolverError;

pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Monoatomic gas description. The viscosity follows the VHS power law
/// `mu(T) = mu0 (T/T0)^omega`; `vss_alpha` is Bird's scattering exponent
/// (1 for pure VHS).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasModel {
    /// Molecular mass (kg).
    pub m: f64,
    /// Specific gas constant (J kg^-1 K^-1).
    pub r: f64,
    /// Reference viscosity (Pa s) at `t0`.
    pub mu0: f64,
    /// Reference temperature (K).
    pub t0: f64,
    /// Viscosity temperature exponent.
    pub visc_exponent: f64,
    /// Bird VHS/VSS alpha.
    pub vss_alpha: f64,
    /// Boltzmann constant (J/K); kept in the model so that `r * m ~ kb` can
    /// be cross-checked against user-supplied values.
    pub kb: f64,
}

impl GasModel {
    /// Argon with the Couette-flow reference values.
    pub fn argon() -> Self {
        GasModel {
            m: 0.663e-25,
            r: 208.24,
            mu0: 2.117e-5,
            t0: 273.15,
            visc_exponent: 0.81,
            vss_alpha: 1.0,
            kb: BOLTZMANN,
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let fields = [
            ("m", self.m),
            ("R", self.r),
            ("mu0", self.mu0),
            ("T0", self.t0),
            ("omega", self.visc_exponent),
            ("alpha", self.vss_alpha),
            ("kb", self.kb),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SolverError::InvalidGas(format!("{name} must be positive, got {v}")));
            }
        }
        let rel = (self.r * self.m - self.kb).abs() / self.kb;
        if rel > 5e-3 {
            return Err(SolverError::InvalidGas(format!(
                "R*m deviates from kb by {rel:.2e} (limit 5e-3); R and m are inconsistent"
            )));
        }
        Ok(())
    }

    /// `mu = mu0 (T/T0)^omega`.
    pub fn viscosity(&self, t: f64) -> f64 {
        self.mu0 * (t / self.t0).powf(self.visc_exponent)
    }

    /// BGK relaxation time `tau = mu(T) / (rho R T)`.
    pub fn relaxation_time(&self, rho: f64, t: f64) -> f64 {
        self.viscosity(t) / (rho * self.r * t)
    }

    /// Bird VHS reference diameter,
    /// `d = sqrt( 5 (a+1)(a+2) sqrt(m kb T0 / pi) / (4 a (5-2w)(7-2w) mu0) )`.
    pub fn vhs_diameter(&self) -> f64 {
        let a = self.vss_alpha;
        let w = self.visc_exponent;
        let num = 5.0 * (a + 1.0) * (a + 2.0) * (self.m * self.kb * self.t0 / std::f64::consts::PI).sqrt();
        let den = 4.0 * a * (5.0 - 2.0 * w) * (7.0 - 2.0 * w) * self.mu0;
        (num / den).sqrt()
    }

    /// Bird mean free path
    /// `lambda = [ sqrt(2) pi d^2 (rho/m) (T0/T)^(w - 1/2) ]^-1`.
    pub fn mean_free_path(&self, rho: f64, t: f64) -> f64 {
        let d = self.vhs_diameter();
        let w = self.visc_exponent;
        1.0 / (std::f64::consts::SQRT_2
            * std::f64::consts::PI
            * d
            * d
            * (rho / self.m)
            * (self.t0 / t).powf(w - 0.5))
    }

    /// Knudsen number `lambda(rho, T) / L`.
    pub fn knudsen(&self, rho: f64, l: f64, t: f64) -> f64 {
        self.mean_free_path(rho, t) / l
    }

    /// Invert `mean_free_path(rho, T) / L = kn` for the density; closed form
    /// since `lambda` is proportional to `1/rho`.
    pub fn density_from_knudsen(&self, kn: f64, l: f64, t: f64) -> f64 {
        let d = self.vhs_diameter();
        let w = self.visc_exponent;
        let lambda = kn * l;
        self.m
            / (std::f64::consts::SQRT_2
                * std::f64::consts::PI
                * d
                * d
                * lambda
                * (self.t0 / t).powf(w - 0.5))
    }
}

/// One solid wall: temperature, tangential speed, and the outward-gas normal
/// (+1 when the gas occupies x > wall, i.e. the left wall).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallSpec {
    pub temperature: f64,
    pub speed: f64,
    pub normal: f64,
}

impl WallSpec {
    pub fn left(temperature: f64, speed: f64) -> Self {
        WallSpec { temperature, speed, normal: 1.0 }
    }

    pub fn right(temperature: f64, speed: f64) -> Self {
        WallSpec { temperature, speed, normal: -1.0 }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.temperature > 0.0) {
            return Err(SolverError::InvalidWall(format!(
                "wall temperature must be positive, got {}",
                self.temperature
            )));
        }
        if self.normal != 1.0 && self.normal != -1.0 {
            return Err(SolverError::InvalidWall(format!(
                "wall normal must be +1 or -1, got {}",
                self.normal
            )));
        }
        Ok(())
    }
}

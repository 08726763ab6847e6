//! Run configuration: flat `key = value` text format with `#` comments, and
//! the scheme identifiers.

use crate::error::SolverError;
use crate::gas::GasModel;
use std::fmt;
use std::str::FromStr;

/// Spatial scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    O1,
    O2Flux,
    O2Slope,
    O2SlopeNolim,
    O2SlopeBcO1,
    Dg,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::O1,
        Scheme::O2Flux,
        Scheme::O2Slope,
        Scheme::O2SlopeNolim,
        Scheme::O2SlopeBcO1,
        Scheme::Dg,
    ];

    pub fn is_dg(self) -> bool {
        self == Scheme::Dg
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::O1 => "O1",
            Scheme::O2Flux => "O2_flux",
            Scheme::O2Slope => "O2_slope",
            Scheme::O2SlopeNolim => "O2_slope_nolim",
            Scheme::O2SlopeBcO1 => "O2_slope_BC_O1",
            Scheme::Dg => "dg",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm: String = s.trim().to_ascii_lowercase().replace('-', "_");
        match norm.as_str() {
            "o1" => Ok(Scheme::O1),
            "o2_flux" => Ok(Scheme::O2Flux),
            "o2_slope" => Ok(Scheme::O2Slope),
            "o2_slope_nolim" => Ok(Scheme::O2SlopeNolim),
            "o2_slope_bc_o1" => Ok(Scheme::O2SlopeBcO1),
            "dg" => Ok(Scheme::Dg),
            _ => Err(format!(
                "unknown scheme '{s}' (expected one of O1, O2_flux, O2_slope, O2_slope_nolim, \
                 O2_slope_BC_O1, dg)"
            )),
        }
    }
}

/// Full description of one run. `Default` reproduces the reference Couette
/// case: argon, 100 cells on a 1 m gap, 40 velocities on [-953, 953] m/s,
/// walls at 273 K with the right wall moving at 300 m/s, Kn = 9.25e-3.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub cells: usize,
    pub velocities: usize,
    pub vmin: f64,
    pub vmax: f64,
    pub gas: GasModel,
    pub wall_temperature: f64,
    pub u_wall_left: f64,
    pub u_wall_right: f64,
    pub length: f64,
    pub knudsen: f64,
    pub alpha: f64,
    /// None picks the per-scheme default (0.9 FV, 0.3 DG).
    pub cfl: Option<f64>,
    pub tolerance: f64,
    pub max_steps: usize,
    pub log_every: usize,
    pub output: String,
    pub conservative_equilibrium: bool,
    pub collisionless: bool,
    pub periodic: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scheme: Scheme::O2Slope,
            cells: 100,
            velocities: 40,
            vmin: -953.0,
            vmax: 953.0,
            gas: GasModel::argon(),
            wall_temperature: 273.0,
            u_wall_left: 0.0,
            u_wall_right: 300.0,
            length: 1.0,
            knudsen: 9.25e-3,
            alpha: 0.5,
            cfl: None,
            tolerance: 1e-8,
            max_steps: 1_000_000,
            log_every: 0,
            output: "profile.csv".into(),
            conservative_equilibrium: true,
            collisionless: false,
            periodic: false,
        }
    }
}

impl RunConfig {
    pub fn effective_cfl(&self) -> f64 {
        self.cfl.unwrap_or(match self.scheme {
            Scheme::Dg => 0.3,
            Scheme::O1 => 0.9,
            // second-order FV variants march with SSP-RK2
            _ => 0.5,
        })
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let err = |m: String| Err(SolverError::Invalid(m));
        if self.cells < 2 {
            return err(format!("cells must be >= 2, got {}", self.cells));
        }
        if self.velocities < 4 {
            return err(format!("velocities must be >= 4, got {}", self.velocities));
        }
        if !(self.vmin < 0.0 && self.vmax > 0.0) {
            return err(format!("velocity bounds must straddle zero: [{}, {}]", self.vmin, self.vmax));
        }
        self.gas.validate()?;
        if !(self.wall_temperature > 0.0) {
            return err(format!("wall temperature must be positive, got {}", self.wall_temperature));
        }
        if !(self.length > 0.0) {
            return err(format!("plate distance must be positive, got {}", self.length));
        }
        if !(self.knudsen > 0.0) {
            return err(format!("Knudsen number must be positive, got {}", self.knudsen));
        }
        crate::boundary::validate_alpha(self.alpha)?;
        if let Some(cfl) = self.cfl {
            if !(cfl > 0.0 && cfl <= 1.0) {
                return Err(SolverError::InvalidCfl(cfl));
            }
        }
        if !(self.tolerance > 0.0) {
            return err(format!("tolerance must be positive, got {}", self.tolerance));
        }
        if self.max_steps == 0 {
            return err("max_steps must be positive".into());
        }
        Ok(())
    }
}

/// Parse the flat `key = value` format. Unknown keys, malformed values and
/// constraint violations are reported with their line number; an empty file
/// yields the default Couette configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, SolverError> {
    let mut cfg = RunConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| SolverError::Config {
            line: line_no,
            message: format!("expected 'key = value', got '{line}'"),
        })?;
        let key = key.trim();
        let value = value.trim();
        apply_key(&mut cfg, key, value)
            .map_err(|message| SolverError::Config { line: line_no, message })?;
    }
    cfg.validate().map_err(|e| match e {
        SolverError::Config { .. } => e,
        other => SolverError::Config { line: 0, message: other.to_string() },
    })?;
    Ok(cfg)
}

fn apply_key(cfg: &mut RunConfig, key: &str, value: &str) -> Result<(), String> {
    fn num(key: &str, value: &str) -> Result<f64, String> {
        value.parse::<f64>().map_err(|_| format!("invalid number for '{key}': '{value}'"))
    }
    fn int(key: &str, value: &str) -> Result<usize, String> {
        value.parse::<usize>().map_err(|_| format!("invalid integer for '{key}': '{value}'"))
    }
    fn boolean(key: &str, value: &str) -> Result<bool, String> {
        match value.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            _ => Err(format!("invalid boolean for '{key}': '{value}'")),
        }
    }
    match key {
        "scheme" => cfg.scheme = value.parse()?,
        "cells" => cfg.cells = int(key, value)?,
        "velocities" => cfg.velocities = int(key, value)?,
        "vmin" => cfg.vmin = num(key, value)?,
        "vmax" => cfg.vmax = num(key, value)?,
        "gas.m" => cfg.gas.m = num(key, value)?,
        "gas.R" => cfg.gas.r = num(key, value)?,
        "gas.mu0" => cfg.gas.mu0 = num(key, value)?,
        "gas.T0" => cfg.gas.t0 = num(key, value)?,
        "gas.omega" => cfg.gas.visc_exponent = num(key, value)?,
        "gas.alpha" => cfg.gas.vss_alpha = num(key, value)?,
        "gas.kb" => cfg.gas.kb = num(key, value)?,
        "wall.temperature" => cfg.wall_temperature = num(key, value)?,
        "wall.u_left" => cfg.u_wall_left = num(key, value)?,
        "wall.u_right" => cfg.u_wall_right = num(key, value)?,
        "length" => cfg.length = num(key, value)?,
        "knudsen" => cfg.knudsen = num(key, value)?,
        "alpha" => {
            let a = num(key, value)?;
            crate::boundary::validate_alpha(a).map_err(|e| e.to_string())?;
            cfg.alpha = a;
        }
        "cfl" => cfg.cfl = Some(num(key, value)?),
        "tolerance" => cfg.tolerance = num(key, value)?,
        "max_steps" => cfg.max_steps = int(key, value)?,
        "log_every" => cfg.log_every = int(key, value)?,
        "output" => cfg.output = value.to_string(),
        "equilibrium.conservative" => cfg.conservative_equilibrium = boolean(key, value)?,
        "collisionless" => cfg.collisionless = boolean(key, value)?,
        "periodic" => cfg.periodic = boolean(key, value)?,
        _ => return Err(format!("unknown key '{key}'")),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_couette_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.cells, 100);
        assert_eq!(cfg.velocities, 40);
        assert_eq!(cfg.u_wall_right, 300.0);
        assert_eq!(cfg.knudsen, 9.25e-3);
        assert_eq!(cfg.alpha, 0.5);
        assert!((cfg.effective_cfl() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn scheme_and_overrides() {
        let cfg = parse_config("scheme = dg\ncells = 50 # comment\n\n# full line comment\n").unwrap();
        assert_eq!(cfg.scheme, Scheme::Dg);
        assert_eq!(cfg.cells, 50);
        assert!((cfg.effective_cfl() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn alpha_below_half_is_rejected_with_line() {
        match parse_config("cells = 10\nalpha = 0.3\n") {
            Err(SolverError::Config { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("alpha"), "{message}");
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_key_and_bad_value_carry_line_numbers() {
        match parse_config("bogus = 1\n") {
            Err(SolverError::Config { line: 1, message }) => assert!(message.contains("bogus")),
            other => panic!("{other:?}"),
        }
        match parse_config("cells = 10\ncells = abc\n") {
            Err(SolverError::Config { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_config("cells\n") {
            Err(SolverError::Config { line: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert_eq!("O2-slope".parse::<Scheme>().unwrap(), Scheme::O2Slope);
        assert!("o3".parse::<Scheme>().is_err());
    }
}

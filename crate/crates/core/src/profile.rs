//! Per-cell macroscopic profiles and their CSV form.
//!
//! The profile CSV has the fixed header `x,rho,ux,uy,T,qx`, one row per cell
//! ordered by x, with values printed to 17 significant digits so that a
//! re-parse reproduces them exactly. Wall diagnostics (sigma and wall heat
//! flux) ride along as `#` comment lines above the header.

use crate::error::SolverError;
use crate::mesh::Mesh1d;
use crate::state::Fields;
use crate::velocity::{compute_moments, VelocityGrid};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRecord {
    pub x: f64,
    pub rho: f64,
    pub ux: f64,
    pub uy: f64,
    pub t: f64,
    pub qx: f64,
}

/// Wall diagnostics of a finished run.
#[derive(Debug, Clone, Copy, Default)]
pub struct WallReport {
    pub sigma_left: f64,
    pub sigma_right: f64,
    pub heat_flux_left: f64,
    pub heat_flux_right: f64,
}

/// Moments of every cell of an FV-layout state (DG states pass their cell
/// averages).
pub fn profile_from_cells(
    state: &Fields,
    mesh: &Mesh1d,
    grid: &VelocityGrid,
    r_gas: f64,
) -> Result<Vec<ProfileRecord>, SolverError> {
    let nv = grid.len();
    let mut rows = Vec::with_capacity(mesh.cells());
    for i in 0..mesh.cells() {
        let m = compute_moments(state.row(nv, i), grid, r_gas).map_err(|e| e.at_cell(i))?;
        rows.push(ProfileRecord { x: mesh.center(i), rho: m.rho, ux: m.ux, uy: m.uy, t: m.t, qx: m.qx });
    }
    Ok(rows)
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_profile_csv(
    path: &Path,
    records: &[ProfileRecord],
    wall: Option<&WallReport>,
) -> Result<(), SolverError> {
    let mut out = String::new();
    if let Some(w) = wall {
        out.push_str(&format!(
            "# wall_left: sigma = {}, heat_flux = {}\n",
            fmt17(w.sigma_left),
            fmt17(w.heat_flux_left)
        ));
        out.push_str(&format!(
            "# wall_right: sigma = {}, heat_flux = {}\n",
            fmt17(w.sigma_right),
            fmt17(w.heat_flux_right)
        ));
    }
    out.push_str("x,rho,ux,uy,T,qx\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt17(r.x),
            fmt17(r.rho),
            fmt17(r.ux),
            fmt17(r.uy),
            fmt17(r.t),
            fmt17(r.qx)
        ));
    }
    write_file(path, &out)
}

pub fn read_profile_csv(path: &Path) -> Result<Vec<ProfileRecord>, SolverError> {
    let text = std::fs::read_to_string(path).map_err(|source| SolverError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "x,rho,ux,uy,T,qx" {
                return Err(SolverError::Invalid(format!(
                    "{}: unexpected header '{line}'",
                    path.display()
                )));
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(SolverError::Invalid(format!(
                "{}: line {} has {} fields",
                path.display(),
                idx + 1,
                fields.len()
            )));
        }
        let mut vals = [0.0; 6];
        for (v, s) in vals.iter_mut().zip(&fields) {
            *v = s.parse::<f64>().map_err(|_| {
                SolverError::Invalid(format!("{}: bad number '{s}' on line {}", path.display(), idx + 1))
            })?;
        }
        rows.push(ProfileRecord {
            x: vals[0],
            rho: vals[1],
            ux: vals[2],
            uy: vals[3],
            t: vals[4],
            qx: vals[5],
        });
    }
    Ok(rows)
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), SolverError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|source| SolverError::Io {
                path: dir.display().to_string(),
                source,
            })?;
        }
    }
    let mut file = std::fs::File::create(path).map_err(|source| SolverError::Io {
        path: path.display().to_string(),
        source,
    })?;
    file.write_all(contents.as_bytes()).map_err(|source| SolverError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let records = vec![
            ProfileRecord { x: 0.005, rho: 9.280416577276605e-6, ux: -3.2e-17, uy: 1.0 / 3.0, t: 273.0001234, qx: -0.4321 },
            ProfileRecord { x: 0.015, rho: 1.0e-300, ux: 0.0, uy: 299.9999999999999, t: 273.0, qx: 4.5e18 },
        ];
        let dir = std::env::temp_dir().join("bgk1d_profile_test");
        let path = dir.join("p.csv");
        let wall = WallReport { sigma_left: 1.0, sigma_right: 2.0, heat_flux_left: -0.5, heat_flux_right: 0.25 };
        write_profile_csv(&path, &records, Some(&wall)).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3); // header + 2 rows
        let back = read_profile_csv(&path).unwrap();
        assert_eq!(records, back);
        std::fs::remove_dir_all(&dir).ok();
    }
}

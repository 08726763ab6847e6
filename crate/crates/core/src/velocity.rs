//! Discrete velocity space, quadrature, and moment evaluation for the reduced
//! Couette model.
//!
//! The grid holds 1D velocity nodes `v_k` with quadrature weights `w_k`;
//! macroscopic quantities are the quadrature sums
//!
//! ```text
//! rho = sum_k F_k w_k        rho*ux = sum_k v_k F_k w_k      rho*uy = sum_k H_k w_k
//! E   = sum_k (v_k^2/2 F_k + G_k) w_k
//! ```
//!
//! with `E = rho|u|^2/2 + 3/2 rho R T` defining the temperature. Since G
//! carries the fixed weight `(v_y^2 + v_z^2)/2`, the tangential kinetic part
//! `rho uy^2 / 2` must come off the energy sum before extracting T; a state
//! built from the reduced Maxwellians then returns its own parameters up to
//! quadrature error.

use crate::error::SolverError;
use crate::state::StateRow;

/// 1D discrete velocity nodes with quadrature weights.
///
/// Invariants enforced at construction: nodes strictly increasing, weights
/// positive, at least one strictly negative and one strictly positive node
/// (the diffuse-reflection denominators need a nonempty incoming half grid).
/// A node at exactly zero is tolerated for user-supplied grids but warned
/// about: it is classified as outgoing at both walls so that upwind
/// tie-breaking stays deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    max_speed: f64,
}

impl VelocityGrid {
    /// Midpoint-rule grid: `n` cells on `[vmin, vmax]`, nodes at cell centers,
    /// all weights equal to the cell width. With `vmin = -vmax` and even `n`
    /// no node falls on zero and the nodes are sign-symmetric to the bit.
    pub fn uniform(n: usize, vmin: f64, vmax: f64) -> Result<Self, SolverError> {
        if n < 4 {
            return Err(SolverError::InvalidGrid(format!("need at least 4 nodes, got {n}")));
        }
        if !(vmin < 0.0) || !(vmax > 0.0) {
            return Err(SolverError::InvalidGrid(format!(
                "bounds must straddle zero: vmin = {vmin}, vmax = {vmax}"
            )));
        }
        let dv = (vmax - vmin) / n as f64;
        let symmetric = vmin == -vmax;
        let half = n as f64 / 2.0;
        let nodes: Vec<f64> = (0..n)
            .map(|k| {
                if symmetric {
                    // (k + 1/2 - n/2) * dv is exactly sign-symmetric in k.
                    (k as f64 + 0.5 - half) * dv
                } else {
                    vmin + (k as f64 + 0.5) * dv
                }
            })
            .collect();
        Self::from_nodes(nodes, vec![dv; n])
    }

    /// Build from explicit nodes and weights, validating the grid invariants.
    pub fn from_nodes(nodes: Vec<f64>, weights: Vec<f64>) -> Result<Self, SolverError> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(SolverError::InvalidGrid("nodes/weights length mismatch or empty".into()));
        }
        if nodes.windows(2).any(|p| p[0] >= p[1]) {
            return Err(SolverError::InvalidGrid("nodes must be strictly increasing".into()));
        }
        if weights.iter().any(|&w| w <= 0.0 || !w.is_finite()) {
            return Err(SolverError::InvalidGrid("weights must be positive and finite".into()));
        }
        if !nodes.iter().any(|&v| v < 0.0) || !nodes.iter().any(|&v| v > 0.0) {
            return Err(SolverError::InvalidGrid(
                "grid needs at least one negative and one positive node".into(),
            ));
        }
        if nodes.iter().any(|&v| v == 0.0) {
            log::warn!("velocity grid contains a node at v = 0; it is treated as outgoing at both walls");
        }
        let max_speed = nodes.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        Ok(VelocityGrid { nodes, weights, max_speed })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn max_speed(&self) -> f64 {
        self.max_speed
    }
}

/// Velocity `v` is incoming (re-emitted by the wall) when it points into the
/// gas: `v * n > 0`. A zero node is never incoming.
#[inline]
pub fn is_incoming(v: f64, normal: f64) -> bool {
    v * normal > 0.0
}

/// Macroscopic state at one spatial location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    /// Mass density (kg/m^3).
    pub rho: f64,
    /// Normal velocity component (m/s); exactly zero for steady Couette flow.
    pub ux: f64,
    /// Tangential velocity component (m/s).
    pub uy: f64,
    /// Temperature (K).
    pub t: f64,
    /// Pressure, `p = rho R T` (Pa).
    pub p: f64,
    /// Total energy density (J/m^3).
    pub e: f64,
    /// Normal heat flux (W/m^2).
    pub qx: f64,
}

/// The four conserved quadrature sums (rho, rho*ux, rho*uy, E) plus T, without
/// the heat flux. This is the per-cell work done inside the relaxation loops.
#[inline]
pub(crate) fn conserved_moments(
    row: StateRow<'_>,
    grid: &VelocityGrid,
    r_gas: f64,
) -> Result<(f64, f64, f64, f64, f64), SolverError> {
    let mut s_rho = 0.0;
    let mut s_mx = 0.0;
    let mut s_my = 0.0;
    let mut s_e = 0.0;
    for (((&v, &w), (&f, &g)), &h) in grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .zip(row.f.iter().zip(row.g.iter()))
        .zip(row.h.iter())
    {
        let fw = f * w;
        s_rho += fw;
        s_mx += v * fw;
        s_my += h * w;
        s_e += (0.5 * v * v * f + g) * w;
    }
    if !(s_rho > 0.0) {
        return Err(SolverError::VacuumState { rho: s_rho });
    }
    let ux = s_mx / s_rho;
    let uy = s_my / s_rho;
    let t = (s_e / s_rho - 0.5 * (ux * ux + uy * uy)) * 2.0 / (3.0 * r_gas);
    if !(t > 0.0) {
        return Err(SolverError::NegativeTemperature { t });
    }
    Ok((s_rho, ux, uy, s_e, t))
}

/// All macroscopic fields of one cell, including the heat flux.
pub fn compute_moments(
    row: StateRow<'_>,
    grid: &VelocityGrid,
    r_gas: f64,
) -> Result<Moments, SolverError> {
    let (rho, ux, uy, e, t) = conserved_moments(row, grid, r_gas)?;
    let mut m = Moments { rho, ux, uy, t, p: rho * r_gas * t, e, qx: 0.0 };
    m.qx = compute_heat_flux(row, grid, &m);
    Ok(m)
}

/// Normal heat flux `qx = sum_k [ (v-ux)^3/2 F + (v-ux)(G - uy H) ]_k w_k`.
pub fn compute_heat_flux(row: StateRow<'_>, grid: &VelocityGrid, moments: &Moments) -> f64 {
    let ux = moments.ux;
    let uy = moments.uy;
    let mut q = 0.0;
    for (((&v, &w), (&f, &g)), &h) in grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .zip(row.f.iter().zip(row.g.iter()))
        .zip(row.h.iter())
    {
        let c = v - ux;
        q += (0.5 * c * c * c * f + c * (g - uy * h)) * w;
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::Fields;

    fn four_node_grid() -> VelocityGrid {
        VelocityGrid::from_nodes(vec![-1.5, -0.5, 0.5, 1.5], vec![1.0; 4]).unwrap()
    }

    #[test]
    fn uniform_grid_matches_reference_setup() {
        let g = VelocityGrid::uniform(40, -953.0, 953.0).unwrap();
        assert_eq!(g.len(), 40);
        let dv = g.nodes()[1] - g.nodes()[0];
        assert!((dv - 47.65).abs() < 1e-12);
        assert!(g.nodes().iter().all(|&v| v != 0.0));
        // bit-exact sign symmetry
        for k in 0..20 {
            assert_eq!(g.nodes()[k], -g.nodes()[39 - k]);
        }
        assert_eq!(g.max_speed(), g.nodes()[39]);
    }

    #[test]
    fn uniform_grid_small_case() {
        let g = VelocityGrid::uniform(4, -2.0, 2.0).unwrap();
        assert_eq!(g.nodes(), &[-1.5, -0.5, 0.5, 1.5]);
        assert_eq!(g.weights(), &[1.0; 4]);
    }

    #[test]
    fn uniform_grid_weights_sum_to_span() {
        let g = VelocityGrid::uniform(6, -3.0, 3.0).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - 6.0).abs() < 1e-14);
    }

    #[test]
    fn uniform_grid_rejects_bad_input() {
        assert!(VelocityGrid::uniform(3, -1.0, 1.0).is_err());
        assert!(VelocityGrid::uniform(8, 0.0, 1.0).is_err());
        assert!(VelocityGrid::uniform(8, -1.0, 0.0).is_err());
        assert!(VelocityGrid::from_nodes(vec![1.0, 2.0], vec![1.0, 1.0]).is_err()); // no negative node
        assert!(VelocityGrid::from_nodes(vec![-1.0, -2.0], vec![1.0, 1.0]).is_err()); // not increasing
        assert!(VelocityGrid::from_nodes(vec![-1.0, 1.0], vec![1.0, -1.0]).is_err()); // bad weight
    }

    #[test]
    fn zero_node_is_outgoing_everywhere() {
        let g = VelocityGrid::from_nodes(vec![-1.0, 0.0, 1.0], vec![1.0; 3], ).unwrap();
        assert_eq!(g.len(), 3);
        assert!(!is_incoming(0.0, 1.0));
        assert!(!is_incoming(0.0, -1.0));
        assert!(is_incoming(1.0, 1.0));
        assert!(is_incoming(-1.0, -1.0));
        assert!(!is_incoming(-1.0, 1.0));
    }

    #[test]
    fn constant_state_moments() {
        let g = four_node_grid();
        let mut s = Fields::zeros(4);
        s.f.fill(1.0);
        let m = compute_moments(s.row(4, 0), &g, 1.0).unwrap();
        assert_eq!(m.rho, 4.0);
        assert_eq!(m.ux, 0.0);
        assert_eq!(m.uy, 0.0);
        // E = sum v^2/2 = 2.5, T = 2.5 / (1.5 * 4)
        assert!((m.t - 2.5 / 6.0).abs() < 1e-15);
        assert!((m.p - m.rho * m.t).abs() < 1e-15);
    }

    #[test]
    fn vacuum_and_negative_temperature_are_reported() {
        let g = four_node_grid();
        let s = Fields::zeros(4);
        match compute_moments(s.row(4, 0), &g, 1.0) {
            Err(SolverError::VacuumState { .. }) => {}
            other => panic!("expected vacuum error, got {other:?}"),
        }
        let mut s = Fields::zeros(4);
        s.f.fill(1.0);
        s.g.fill(-10.0); // drives E below the kinetic floor
        match compute_moments(s.row(4, 0), &g, 1.0) {
            Err(SolverError::NegativeTemperature { .. }) => {}
            other => panic!("expected negative temperature error, got {other:?}"),
        }
    }

    #[test]
    fn moment_round_trip_through_reduced_maxwellians() {
        use crate::equilibrium::reduced_maxwellians;
        let r = 208.24;
        // Reference grid (+-953 is a 4-sigma truncation at 273 K): the round-trip
        // defects are set by the missing Gaussian tails; values frozen from an
        // independent quadrature evaluation.
        let g40 = VelocityGrid::uniform(40, -953.0, 953.0).unwrap();
        let (f, gg, h) = reduced_maxwellians(1.0, 0.0, 50.0, 273.0, &g40, r);
        let m = compute_moments(StateRow { f: &f, g: &gg, h: &h }, &g40, r).unwrap();
        assert!(((m.rho - 1.0).abs() - 6.238676115000175e-5).abs() < 1e-12);
        assert!((m.uy - 50.0).abs() < 1e-12); // H = uy * M cancels in the ratio
        assert!((((m.t - 273.0) / 273.0).abs() - 3.5327883562553784e-4).abs() < 1e-10);
        // Well inside the bounds (8 sigma) the round-trip is exact to
        // quadrature accuracy, far below 1e-6.
        let b = 8.0 * (r * 273.0f64).sqrt();
        let gw = VelocityGrid::uniform(64, -b, b).unwrap();
        let (f, gg, h) = reduced_maxwellians(1.0, 0.0, 50.0, 273.0, &gw, r);
        let m = compute_moments(StateRow { f: &f, g: &gg, h: &h }, &gw, r).unwrap();
        assert!((m.rho - 1.0).abs() < 1e-6);
        assert!((m.t - 273.0).abs() / 273.0 < 1e-6);
        assert!((m.uy - 50.0).abs() / 50.0 < 1e-6);
        assert!(m.qx.abs() < 1e-6 * m.rho * (r * m.t).powf(1.5));
    }

    #[test]
    fn moment_round_trip_error_shrinks_with_resolution() {
        use crate::equilibrium::reduced_maxwellians;
        let r = 208.24;
        // At fixed +-953 bounds the error drops steeply from n = 4 until the
        // tail-truncation floor (~6e-5) takes over.
        let mut errs = Vec::new();
        for n in [4usize, 6, 8] {
            let g = VelocityGrid::uniform(n, -953.0, 953.0).unwrap();
            let (f, gg, h) = reduced_maxwellians(1.0, 0.0, 0.0, 273.0, &g, r);
            let m = compute_moments(StateRow { f: &f, g: &gg, h: &h }, &g, r).unwrap();
            errs.push((m.rho - 1.0).abs());
        }
        assert!(errs[0] > errs[1] && errs[0] > errs[2], "{errs:?}");
        // better than second order between n = 4 and n = 8
        assert!(errs[0] / errs[2] > 4.0, "{errs:?}");
        // widening the bounds at fixed spacing removes the floor itself
        let g = VelocityGrid::uniform(80, -1906.0, 1906.0).unwrap();
        let (f, gg, h) = reduced_maxwellians(1.0, 0.0, 0.0, 273.0, &g, r);
        let m = compute_moments(StateRow { f: &f, g: &gg, h: &h }, &g, r).unwrap();
        assert!((m.rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heat_flux_two_node_hand_sum() {
        let g = VelocityGrid::from_nodes(vec![-1.0, 1.0], vec![1.0, 1.0]).unwrap();
        let row = StateRow { f: &[1.0, 2.0], g: &[0.0, 0.0], h: &[0.0, 0.0] };
        let m = Moments { rho: 3.0, ux: 0.0, uy: 0.0, t: 1.0, p: 3.0, e: 1.5, qx: 0.0 };
        let q = compute_heat_flux(row, &g, &m);
        // 1/2 (-1)^3 * 1 + 1/2 (1)^3 * 2 = 0.5
        assert!((q - 0.5).abs() < 1e-15);
    }

    #[test]
    fn heat_flux_antisymmetric_g_reduces_to_vg_sum() {
        // F even, G odd, H = 0, u = 0: only the (v - ux) G term survives.
        let g = four_node_grid();
        let f = [2.0, 1.0, 1.0, 2.0];
        let gg = [-4.0, -1.0, 1.0, 4.0];
        let h = [0.0; 4];
        let row = StateRow { f: &f, g: &gg, h: &h };
        let m = compute_moments(row, &g, 1.0).unwrap();
        assert!(m.ux.abs() < 1e-15);
        let expect: f64 = g
            .nodes()
            .iter()
            .zip(gg.iter())
            .map(|(&v, &gv)| v * gv)
            .sum();
        assert!((m.qx - expect).abs() < 1e-13);
    }
}

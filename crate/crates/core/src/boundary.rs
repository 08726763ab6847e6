//! Diffuse-reflection wall machinery.
//!
//! Every closure enforces the same two constraints: incoming velocities
//! (`v * n > 0`) are re-emitted as `sigma * (M, N, P)[1, u_w, T_w]`, with
//! `sigma` chosen so the wall mass flux vanishes, and outgoing velocities are
//! extrapolated from the interior at the order of the scheme. The ghost-cell
//! constructions differ per scheme:
//!
//! - first order: zeroth-order extrapolation into one ghost cell;
//! - flux limiter: two identical ghost cells, which forces the limiter term
//!   to vanish at the wall interface so the wall flux falls back to first
//!   order (the price of a symmetric limiter);
//! - slope reconstruction: interface values are fixed first (linear
//!   extrapolation outgoing, boundary condition incoming) and the two ghost
//!   cells are then placed on the same straight lines, which keeps the
//!   MC-limited reconstruction second order *and* conservative at the wall.

use crate::error::SolverError;
use crate::gas::WallSpec;
use crate::state::{Fields, StateRow};
use crate::velocity::{is_incoming, VelocityGrid};

/// Ghost-cell values and wall-interface states produced by one closure.
///
/// `ghost0` is the cell adjacent to the wall, `ghost1` the one beyond it
/// (unused by the first-order and DG schemes). `half_minus`/`half_plus` are
/// the wall-side and gas-side interface states of the slope scheme. `sigma`
/// is the re-emitted mass density.
#[derive(Debug, Clone)]
pub struct WallClosure {
    pub ghost0: Fields,
    pub ghost1: Fields,
    pub half_minus: Option<Fields>,
    pub half_plus: Option<Fields>,
    pub sigma: f64,
}

/// Unit-density wall Maxwellian triple `(M, N, P)[1, u_w, T_w]` on the grid.
/// The wall moves tangentially only, so the mass component is centered at
/// zero normal velocity.
pub fn wall_maxwellians(wall: &WallSpec, grid: &VelocityGrid, r_gas: f64) -> Fields {
    let rt = r_gas * wall.temperature;
    let norm = 1.0 / (2.0 * std::f64::consts::PI * rt).sqrt();
    let inv2rt = 0.5 / rt;
    let gfac = rt + 0.5 * wall.speed * wall.speed;
    let n = grid.len();
    let mut out = Fields::zeros(n);
    for (k, &v) in grid.nodes().iter().enumerate() {
        let m = norm * (-v * v * inv2rt).exp();
        out.f[k] = m;
        out.g[k] = gfac * m;
        out.h[k] = wall.speed * m;
    }
    out
}

fn sigma_denominator(mw_f: &[f64], normal: f64, grid: &VelocityGrid) -> f64 {
    let mut den = 0.0;
    for ((&v, &w), &m) in grid.nodes().iter().zip(grid.weights()).zip(mw_f) {
        if is_incoming(v, normal) {
            den += v * normal * m * w;
        }
    }
    den
}

fn sigma_numerator(outgoing_f: &[f64], normal: f64, grid: &VelocityGrid) -> f64 {
    let mut num = 0.0;
    for ((&v, &w), &f) in grid.nodes().iter().zip(grid.weights()).zip(outgoing_f) {
        if !is_incoming(v, normal) {
            num += v * normal * f * w;
        }
    }
    num
}

/// Re-emitted mass density
/// `sigma = -(sum_{v n < 0} v n F_k w_k) / (sum_{v n > 0} v n M_k w_k)`.
/// Only the outgoing entries of `outgoing_f` are read.
pub fn sigma_w(outgoing_f: &[f64], wall: &WallSpec, grid: &VelocityGrid, r_gas: f64) -> f64 {
    let mw = wall_maxwellians(wall, grid, r_gas);
    let den = sigma_denominator(&mw.f, wall.normal, grid);
    -sigma_numerator(outgoing_f, wall.normal, grid) / den
}

fn sigma_with(mw: &Fields, outgoing_f: &[f64], normal: f64, grid: &VelocityGrid) -> f64 {
    -sigma_numerator(outgoing_f, normal, grid) / sigma_denominator(&mw.f, normal, grid)
}

/// First-order closure: zeroth-order extrapolation for outgoing velocities,
/// sigma-scaled wall Maxwellians for incoming ones. `ghost1` is filled with a
/// copy of `ghost0` (the first-order stencil never reads it).
pub fn ghost_first_order(
    cell: StateRow<'_>,
    wall: &WallSpec,
    grid: &VelocityGrid,
    r_gas: f64,
) -> WallClosure {
    let n = grid.len();
    let mw = wall_maxwellians(wall, grid, r_gas);
    let sigma = sigma_with(&mw, cell.f, wall.normal, grid);
    let mut ghost0 = Fields::zeros(n);
    for (k, &v) in grid.nodes().iter().enumerate() {
        if is_incoming(v, wall.normal) {
            ghost0.f[k] = sigma * mw.f[k];
            ghost0.g[k] = sigma * mw.g[k];
            ghost0.h[k] = sigma * mw.h[k];
        } else {
            ghost0.f[k] = cell.f[k];
            ghost0.g[k] = cell.g[k];
            ghost0.h[k] = cell.h[k];
        }
    }
    let ghost1 = ghost0.clone();
    WallClosure { ghost0, ghost1, half_minus: None, half_plus: None, sigma }
}

/// Closure for the Yee flux-limiter scheme: identical to the first-order
/// closure except that both ghost cells are populated, with
/// `ghost1 = ghost0`, so that the first limiter difference vanishes and the
/// wall flux reduces exactly to the first-order flux.
pub fn ghost_flux_limiter(
    cell: StateRow<'_>,
    wall: &WallSpec,
    grid: &VelocityGrid,
    r_gas: f64,
) -> WallClosure {
    ghost_first_order(cell, wall, grid, r_gas)
}

/// Second-order closure for the slope-reconstruction scheme (the three-step
/// construction). `cell1` is the cell adjacent to the wall, `cell2` its
/// neighbor; ghost cells take the same width.
///
/// Step 1: gas-side interface value by linear extrapolation,
///         `f+ = 3/2 f1 - 1/2 f2` (needed for outgoing velocities).
/// Step 2: wall-side interface value from the boundary condition,
///         `f- = sigma(f+) * M_w` (needed for incoming velocities).
/// Step 3: ghost values on the straight lines through those states:
///         outgoing `f0 = 2 f1 - f2` (and `f-1 = 3 f1 - 2 f2` on the same
///         line); incoming `f0 = 2 f- - f1`, `f-1 = 4 f- - 3 f1`.
///
/// With `alpha >= 1/2` the MC limiter then reproduces single slopes in the
/// wall cells and the reconstruction returns exactly `f+` and `f-` at the
/// interface, so the scheme stays second order and conservative.
pub fn slope_wall_closure(
    cell1: StateRow<'_>,
    cell2: StateRow<'_>,
    wall: &WallSpec,
    grid: &VelocityGrid,
    r_gas: f64,
) -> WallClosure {
    let n = grid.len();
    let mw = wall_maxwellians(wall, grid, r_gas);

    let mut half_plus = Fields::zeros(n);
    for k in 0..n {
        half_plus.f[k] = 1.5 * cell1.f[k] - 0.5 * cell2.f[k];
        half_plus.g[k] = 1.5 * cell1.g[k] - 0.5 * cell2.g[k];
        half_plus.h[k] = 1.5 * cell1.h[k] - 0.5 * cell2.h[k];
    }
    let sigma = sigma_with(&mw, &half_plus.f, wall.normal, grid);
    let mut half_minus = Fields::zeros(n);
    for k in 0..n {
        half_minus.f[k] = sigma * mw.f[k];
        half_minus.g[k] = sigma * mw.g[k];
        half_minus.h[k] = sigma * mw.h[k];
    }

    let mut ghost0 = Fields::zeros(n);
    let mut ghost1 = Fields::zeros(n);
    for (k, &v) in grid.nodes().iter().enumerate() {
        if is_incoming(v, wall.normal) {
            ghost0.f[k] = 2.0 * half_minus.f[k] - cell1.f[k];
            ghost0.g[k] = 2.0 * half_minus.g[k] - cell1.g[k];
            ghost0.h[k] = 2.0 * half_minus.h[k] - cell1.h[k];
            ghost1.f[k] = 4.0 * half_minus.f[k] - 3.0 * cell1.f[k];
            ghost1.g[k] = 4.0 * half_minus.g[k] - 3.0 * cell1.g[k];
            ghost1.h[k] = 4.0 * half_minus.h[k] - 3.0 * cell1.h[k];
        } else {
            ghost0.f[k] = 2.0 * cell1.f[k] - cell2.f[k];
            ghost0.g[k] = 2.0 * cell1.g[k] - cell2.g[k];
            ghost0.h[k] = 2.0 * cell1.h[k] - cell2.h[k];
            ghost1.f[k] = 3.0 * cell1.f[k] - 2.0 * cell2.f[k];
            ghost1.g[k] = 3.0 * cell1.g[k] - 2.0 * cell2.g[k];
            ghost1.h[k] = 3.0 * cell1.h[k] - 2.0 * cell2.h[k];
        }
    }
    WallClosure { ghost0, ghost1, half_minus: Some(half_minus), half_plus: Some(half_plus), sigma }
}

/// DG wall treatment: no extrapolation. The single-valued wall state equals
/// the interior trace for outgoing velocities and `sigma * (M, N, P)_w` for
/// incoming ones, with sigma computed from the interior trace itself.
/// Returns the wall state and sigma.
pub fn dg_wall_trace(
    trace: StateRow<'_>,
    wall: &WallSpec,
    grid: &VelocityGrid,
    r_gas: f64,
) -> (Fields, f64) {
    let n = grid.len();
    let mw = wall_maxwellians(wall, grid, r_gas);
    let sigma = sigma_with(&mw, trace.f, wall.normal, grid);
    let mut state = Fields::zeros(n);
    for (k, &v) in grid.nodes().iter().enumerate() {
        if is_incoming(v, wall.normal) {
            state.f[k] = sigma * mw.f[k];
            state.g[k] = sigma * mw.g[k];
            state.h[k] = sigma * mw.h[k];
        } else {
            state.f[k] = trace.f[k];
            state.g[k] = trace.g[k];
            state.h[k] = trace.h[k];
        }
    }
    (state, sigma)
}

/// Mass flux through the wall interface, `sum_k v_k F_k w_k`, for a
/// single-valued wall distribution. Zero (to roundoff) for every closure.
pub fn wall_mass_flux(wall_f: &[f64], grid: &VelocityGrid) -> f64 {
    let mut s = 0.0;
    for ((&v, &w), &f) in grid.nodes().iter().zip(grid.weights()).zip(wall_f) {
        s += v * f * w;
    }
    s
}

/// Heat flux through the wall interface in the wall frame (`ux = 0`,
/// tangential speed `u_w`):
/// `q = sum_k v_k [ v_k^2/2 F + (G - u_w H) ]_k w_k`, taken positive along +x.
pub fn wall_heat_flux(wall_state: StateRow<'_>, wall: &WallSpec, grid: &VelocityGrid) -> f64 {
    let mut q = 0.0;
    for (((&v, &w), (&f, &g)), &h) in grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(wall_state.f.iter().zip(wall_state.g.iter()))
        .zip(wall_state.h.iter())
    {
        q += v * (0.5 * v * v * f + (g - wall.speed * h)) * w;
    }
    q
}

/// Validate the MC limiter parameter; the wall closure algebra needs
/// `alpha >= 1/2` and the limiter itself `alpha <= 1`.
pub fn validate_alpha(alpha: f64) -> Result<(), SolverError> {
    if !(0.5..=1.0).contains(&alpha) {
        return Err(SolverError::Invalid(format!(
            "limiter parameter alpha = {alpha} outside [1/2, 1] (alpha >= 1/2 is required \
             for second-order wall closures)"
        )));
    }
    Ok(())
}

//! Explicit pseudo-time marching to steady state.
//!
//! First-order states advance with forward Euler, second-order states with
//! two-stage SSP Runge-Kutta. The reported residual is
//! `||F^{n+1} - F^n||_2 / (dt ||F^n||_2)` on the mass component; the run
//! stops once the analogous G and H residuals are below tolerance as well
//! (on a cold start the moving wall enters G and H a step before F notices).

use crate::error::SolverError;
use crate::state::Fields;

/// Per-evaluation diagnostics reported by the spatial operators.
#[derive(Debug, Clone, Copy)]
pub struct RhsDiagnostics {
    /// Mass flux through the left/right wall interface (+x direction); zero
    /// in periodic mode.
    pub wall_mass_flux: [f64; 2],
    /// Re-emitted mass densities sigma at the left/right wall.
    pub sigma: [f64; 2],
    /// Smallest relaxation time seen (infinite when collisionless).
    pub min_tau: f64,
    /// Strictly negative F values produced by the wall closures this
    /// evaluation (monitored, never clipped).
    pub negative_wall_values: usize,
}

/// A semi-discrete spatial operator together with its scratch storage.
pub trait SpatialOperator {
    fn rhs(&mut self, state: &Fields, out: &mut Fields) -> Result<RhsDiagnostics, SolverError>;
    /// Stable time step for this state (CFL on the fastest velocity plus the
    /// relaxation cap).
    fn timestep(&self, state: &Fields, cfl: f64) -> Result<f64, SolverError>;
    /// Whether the scheme marches with SSP-RK2 instead of forward Euler.
    fn two_stage(&self) -> bool;
    fn default_cfl(&self) -> f64;
    /// Total mass on the domain.
    fn mass(&self, state: &Fields) -> f64;
    fn state_len(&self) -> usize;
}

/// Stable explicit step. Transport and relaxation rates add in the forward
/// Euler amplification factor, so the step bounds their sum,
/// `dt = cfl / (max|v_k|/dx + 1/tau_min)`, additionally capped by
/// `tau_min / 2`. With collisionless flows (`tau = inf`) this reduces to the
/// plain convective step `cfl * dx / max|v_k|`.
pub fn cfl_step(min_dx: f64, max_speed: f64, min_tau: f64, cfl: f64) -> Result<f64, SolverError> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(SolverError::InvalidCfl(cfl));
    }
    let rate = max_speed / min_dx + if min_tau.is_finite() { 1.0 / min_tau } else { 0.0 };
    Ok((cfl / rate).min(0.5 * min_tau))
}

/// Marching controls; `Default` gives the standard tolerances.
#[derive(Debug, Clone, Copy)]
pub struct MarchParams {
    pub cfl: f64,
    pub tolerance: f64,
    pub max_steps: usize,
    /// Progress line to stderr every this many steps (0 = quiet).
    pub log_every: usize,
}

impl Default for MarchParams {
    fn default() -> Self {
        MarchParams { cfl: 0.9, tolerance: 1e-8, max_steps: 1_000_000, log_every: 0 }
    }
}

/// Outcome of a steady-state run.
#[derive(Debug, Clone, Copy)]
pub struct RunStatus {
    pub steps: usize,
    pub residual: f64,
    pub initial_residual: f64,
    pub wall_seconds: f64,
    /// |mass_end - mass_start| / mass_start.
    pub mass_drift: f64,
    pub converged: bool,
    /// Largest |wall mass flux| seen at any evaluation, either wall.
    pub max_wall_flux: f64,
    /// Sigma values at the last evaluation (left, right).
    pub sigma: [f64; 2],
    /// Total negative wall-closure F values over the run.
    pub negative_wall_values: usize,
    /// Strictly negative F entries in the final state.
    pub negative_f_final: usize,
    /// Physical time reached.
    pub time: f64,
}

/// March `state` to steady state. Returns the final state and run record.
pub fn run_to_steady<O: SpatialOperator>(
    op: &mut O,
    mut state: Fields,
    params: &MarchParams,
) -> Result<(Fields, RunStatus), SolverError> {
    assert_eq!(state.len(), op.state_len());
    let start = std::time::Instant::now();
    let mass0 = op.mass(&state);
    let mut k = Fields::zeros(state.len());
    let mut stage = Fields::zeros(state.len());

    let mut status = RunStatus {
        steps: 0,
        residual: f64::INFINITY,
        initial_residual: 0.0,
        wall_seconds: 0.0,
        mass_drift: 0.0,
        converged: false,
        max_wall_flux: 0.0,
        sigma: [0.0; 2],
        negative_wall_values: 0,
        negative_f_final: 0,
        time: 0.0,
    };

    let mut peak_residual = 0.0_f64;
    while status.steps < params.max_steps {
        let dt = op.timestep(&state, params.cfl)?;
        let norm_f = state.l2_norm_f();
        let norm_g = l2(&state.g);
        // H starts at zero for a flow at rest; scale its residual with the
        // thermal H magnitude sqrt(|F| |G|) instead of |H| itself
        let scale_h = (norm_f * norm_g).sqrt().max(f64::MIN_POSITIVE);
        let scale_g = norm_g.max(f64::MIN_POSITIVE);

        let (res_f, res_g, res_h);
        if op.two_stage() {
            // SSP-RK2: u1 = u + dt L(u); u <- (u + u1 + dt L(u1)) / 2
            let d1 = op.rhs(&state, &mut k)?;
            stage.copy_from(&state);
            stage.axpy(dt, &k);
            let d2 = op.rhs(&stage, &mut k)?;
            track(&mut status, &d1);
            track(&mut status, &d2);
            let mut df2 = 0.0;
            for ((u, &u1), &kf) in state.f.iter_mut().zip(&stage.f).zip(&k.f) {
                let new = 0.5 * (*u + u1 + dt * kf);
                let d = new - *u;
                df2 += d * d;
                *u = new;
            }
            let mut dg2 = 0.0;
            for ((u, &u1), &kg) in state.g.iter_mut().zip(&stage.g).zip(&k.g) {
                let new = 0.5 * (*u + u1 + dt * kg);
                let d = new - *u;
                dg2 += d * d;
                *u = new;
            }
            let mut dh2 = 0.0;
            for ((u, &u1), &kh) in state.h.iter_mut().zip(&stage.h).zip(&k.h) {
                let new = 0.5 * (*u + u1 + dt * kh);
                let d = new - *u;
                dh2 += d * d;
                *u = new;
            }
            res_f = df2.sqrt() / (dt * norm_f);
            res_g = dg2.sqrt() / (dt * scale_g);
            res_h = dh2.sqrt() / (dt * scale_h);
        } else {
            let d = op.rhs(&state, &mut k)?;
            track(&mut status, &d);
            state.axpy(dt, &k);
            res_f = k.l2_norm_f() / norm_f;
            res_g = l2(&k.g) / scale_g;
            res_h = l2(&k.h) / scale_h;
        }

        status.steps += 1;
        status.time += dt;
        status.residual = res_f;
        if status.steps == 1 {
            status.initial_residual = res_f;
        }
        if !res_f.is_finite() || !res_g.is_finite() || !res_h.is_finite() {
            return Err(SolverError::NonFinite { step: status.steps });
        }
        let worst = res_f.max(res_g).max(res_h);
        // blowup guard: six orders above the run's own previous peak
        if peak_residual > 0.0 && worst > 1e6 * peak_residual {
            return Err(SolverError::Diverged {
                step: status.steps,
                residual: worst,
                initial: status.initial_residual,
            });
        }
        peak_residual = peak_residual.max(worst);
        if params.log_every > 0 && status.steps % params.log_every == 0 {
            eprintln!(
                "step {:>8}  t = {:.4e}  dt = {:.3e}  residual = {:.3e} ({:.1e}, {:.1e})",
                status.steps, status.time, dt, res_f, res_g, res_h
            );
        }
        // F drives the convergence measure; G and H must have settled too,
        // which protects the first steps of a cold start where the moving
        // wall has not yet reached the mass component
        if worst < params.tolerance {
            status.converged = true;
            break;
        }
    }

    let mass1 = op.mass(&state);
    status.mass_drift = ((mass1 - mass0) / mass0).abs();
    status.negative_f_final = state.negative_f_count();
    status.wall_seconds = start.elapsed().as_secs_f64();
    Ok((state, status))
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn track(status: &mut RunStatus, d: &RhsDiagnostics) {
    status.max_wall_flux = status
        .max_wall_flux
        .max(d.wall_mass_flux[0].abs())
        .max(d.wall_mass_flux[1].abs());
    status.sigma = d.sigma;
    status.negative_wall_values += d.negative_wall_values;
}

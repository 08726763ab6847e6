//! Case runner, L2 self-convergence errors, observed-order fitting, and the
//! mesh convergence study.

use crate::boundary::{dg_wall_trace, ghost_first_order, slope_wall_closure, wall_heat_flux};
use crate::config::{RunConfig, Scheme};
use crate::dg::{dg_cell_averages, dg_uniform_equilibrium, DgOperator};
use crate::driver::{run_to_steady, MarchParams, RunStatus};
use crate::error::SolverError;
use crate::fv::{fv_uniform_equilibrium, BoundaryMode, FvOperator, FvScheme};
use crate::gas::WallSpec;
use crate::mesh::Mesh1d;
use crate::profile::{profile_from_cells, ProfileRecord, WallReport};
use crate::state::Fields;
use crate::velocity::{is_incoming, VelocityGrid};

/// Everything a finished run exposes to the harness.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<ProfileRecord>,
    pub status: RunStatus,
    pub wall: WallReport,
    /// Final state as cell averages in the FV layout (DG states are averaged).
    pub cell_state: Fields,
    /// Final state in the scheme's native layout.
    pub state: Fields,
    pub cells: usize,
}

pub fn fv_scheme_of(scheme: Scheme) -> Option<FvScheme> {
    match scheme {
        Scheme::O1 => Some(FvScheme::Upwind),
        Scheme::O2Flux => Some(FvScheme::FluxLimiter),
        Scheme::O2Slope => Some(FvScheme::SlopeLimited),
        Scheme::O2SlopeNolim => Some(FvScheme::SlopeUnlimited),
        Scheme::O2SlopeBcO1 => Some(FvScheme::SlopeFirstOrderWall),
        Scheme::Dg => None,
    }
}

pub fn build_grid(cfg: &RunConfig) -> Result<VelocityGrid, SolverError> {
    VelocityGrid::uniform(cfg.velocities, cfg.vmin, cfg.vmax)
}

pub fn build_walls(cfg: &RunConfig) -> (WallSpec, WallSpec) {
    (
        WallSpec::left(cfg.wall_temperature, cfg.u_wall_left),
        WallSpec::right(cfg.wall_temperature, cfg.u_wall_right),
    )
}

fn boundary_mode(cfg: &RunConfig) -> BoundaryMode {
    if cfg.periodic {
        BoundaryMode::Periodic
    } else {
        let (l, r) = build_walls(cfg);
        BoundaryMode::Walls(l, r)
    }
}

/// Uniform initial density: the Knudsen number evaluated at the wall
/// temperature fixes rho.
pub fn initial_density(cfg: &RunConfig) -> f64 {
    cfg.gas.density_from_knudsen(cfg.knudsen, cfg.length, cfg.wall_temperature)
}

/// Default initial state: uniform equilibrium at rest at the wall
/// temperature, evaluated pointwise. With resting walls this is the exact
/// discrete steady state (the diffuse reflection re-emits it unchanged and
/// the Newton correction of its own quadrature moments returns it).
pub fn initial_state(cfg: &RunConfig) -> Result<Fields, SolverError> {
    let grid = build_grid(cfg)?;
    let rho = initial_density(cfg);
    if cfg.scheme.is_dg() {
        dg_uniform_equilibrium(cfg.cells, &grid, cfg.gas.r, rho, 0.0, cfg.wall_temperature, false)
    } else {
        fv_uniform_equilibrium(cfg.cells, &grid, cfg.gas.r, rho, 0.0, cfg.wall_temperature, false)
    }
}

/// March one configuration to steady state, starting from `initial` when
/// given (native layout), else from the uniform equilibrium.
pub fn run_case_from(cfg: &RunConfig, initial: Option<Fields>) -> Result<RunOutput, SolverError> {
    cfg.validate()?;
    let grid = build_grid(cfg)?;
    let mesh = Mesh1d::new(0.0, cfg.length, cfg.cells)?;
    let params = MarchParams {
        cfl: cfg.effective_cfl(),
        tolerance: cfg.tolerance,
        max_steps: cfg.max_steps,
        log_every: cfg.log_every,
    };
    let init = match initial {
        Some(s) => s,
        None => initial_state(cfg)?,
    };
    let (state, status) = if cfg.scheme.is_dg() {
        let mut op = DgOperator::new(
            mesh,
            grid.clone(),
            cfg.gas,
            boundary_mode(cfg),
            cfg.conservative_equilibrium,
            cfg.collisionless,
        )?;
        run_to_steady(&mut op, init, &params)?
    } else {
        let mut op = FvOperator::new(
            fv_scheme_of(cfg.scheme).unwrap(),
            mesh,
            grid.clone(),
            cfg.gas,
            boundary_mode(cfg),
            cfg.alpha,
            cfg.conservative_equilibrium,
            cfg.collisionless,
        )?;
        run_to_steady(&mut op, init, &params)?
    };

    let cell_state = if cfg.scheme.is_dg() {
        dg_cell_averages(&state, cfg.cells, grid.len())
    } else {
        state.clone()
    };
    let records = profile_from_cells(&cell_state, &mesh, &grid, cfg.gas.r)?;
    let wall = if cfg.periodic {
        WallReport::default()
    } else {
        wall_report(cfg, &grid, &state)
    };
    Ok(RunOutput { records, status, wall, cell_state, state, cells: cfg.cells })
}

pub fn run_case(cfg: &RunConfig) -> Result<RunOutput, SolverError> {
    run_case_from(cfg, None)
}

/// Single-valued wall interface distributions of the final state, reproducing
/// what the scheme used at the walls, and their sigma / heat-flux summary.
fn wall_report(cfg: &RunConfig, grid: &VelocityGrid, state: &Fields) -> WallReport {
    let nv = grid.len();
    let cells = cfg.cells;
    let (wl, wr) = build_walls(cfg);
    let r_gas = cfg.gas.r;

    let single_valued = |wall: &WallSpec, state: &Fields| -> (Fields, f64) {
        match cfg.scheme {
            Scheme::Dg => {
                let half = cells * nv;
                let (i0, q) = if wall.normal > 0.0 { (0, 0) } else { (cells - 1, 1) };
                let s = q * half + i0 * nv;
                let row = crate::state::StateRow {
                    f: &state.f[s..s + nv],
                    g: &state.g[s..s + nv],
                    h: &state.h[s..s + nv],
                };
                dg_wall_trace(row, wall, grid, r_gas)
            }
            Scheme::O2Slope | Scheme::O2SlopeNolim => {
                let (c1, c2) = if wall.normal > 0.0 { (0, 1) } else { (cells - 1, cells - 2) };
                let cl =
                    slope_wall_closure(state.row(nv, c1), state.row(nv, c2), wall, grid, r_gas);
                let hm = cl.half_minus.as_ref().unwrap();
                let hp = cl.half_plus.as_ref().unwrap();
                let mut out = Fields::zeros(nv);
                for (k, &v) in grid.nodes().iter().enumerate() {
                    let (src_f, src_g, src_h) = if is_incoming(v, wall.normal) {
                        (&hm.f, &hm.g, &hm.h)
                    } else {
                        (&hp.f, &hp.g, &hp.h)
                    };
                    out.f[k] = src_f[k];
                    out.g[k] = src_g[k];
                    out.h[k] = src_h[k];
                }
                (out, cl.sigma)
            }
            _ => {
                let c1 = if wall.normal > 0.0 { 0 } else { cells - 1 };
                let cl = ghost_first_order(state.row(nv, c1), wall, grid, r_gas);
                (cl.ghost0.clone(), cl.sigma)
            }
        }
    };

    let (state_l, sigma_l) = single_valued(&wl, state);
    let (state_r, sigma_r) = single_valued(&wr, state);
    WallReport {
        sigma_left: sigma_l,
        sigma_right: sigma_r,
        heat_flux_left: wall_heat_flux(state_l.row(nv, 0), &wl, grid),
        heat_flux_right: wall_heat_flux(state_r.row(nv, 0), &wr, grid),
    }
}

/// Volume-weighted L2 distance between a coarse profile and a reference
/// profile on a finer mesh of the same domain. The reference is restricted by
/// exact cell averaging; the reference mesh must be an integer refinement.
pub fn l2_error(coarse: &[f64], reference: &[f64], length: f64) -> Result<f64, SolverError> {
    if coarse.is_empty() || reference.len() % coarse.len() != 0 {
        return Err(SolverError::IncompatibleMeshes {
            coarse: coarse.len(),
            reference: reference.len(),
        });
    }
    let ratio = reference.len() / coarse.len();
    let dx = length / coarse.len() as f64;
    let mut sum = 0.0;
    for (i, &q) in coarse.iter().enumerate() {
        let block = &reference[i * ratio..(i + 1) * ratio];
        let avg = block.iter().sum::<f64>() / ratio as f64;
        let d = q - avg;
        sum += dx * d * d;
    }
    Ok(sum.sqrt())
}

/// Least-squares slope of log(error) against log(h).
pub fn fit_order(pairs: &[(f64, f64)]) -> Result<f64, SolverError> {
    if pairs.len() < 3 {
        return Err(SolverError::OrderFit(format!("got {} levels", pairs.len())));
    }
    let mut xs = Vec::with_capacity(pairs.len());
    let mut ys = Vec::with_capacity(pairs.len());
    for &(h, e) in pairs {
        if !(h > 0.0) || !(e > 0.0) {
            return Err(SolverError::OrderFit(format!("non-positive pair (h = {h}, e = {e})")));
        }
        xs.push(h.ln());
        ys.push(e.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderRow {
    pub scheme: Scheme,
    pub quantity: &'static str,
    pub order: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    pub scheme: Scheme,
    pub quantity: &'static str,
    pub h: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Default)]
pub struct StudyOutcome {
    pub orders: Vec<OrderRow>,
    pub errors: Vec<ErrorRow>,
}

impl StudyOutcome {
    pub fn order_of(&self, scheme: Scheme, quantity: &str) -> Option<f64> {
        self.orders
            .iter()
            .find(|r| r.scheme == scheme && r.quantity == quantity)
            .map(|r| r.order)
    }

    pub fn orders_csv(&self) -> String {
        let mut s = String::from("scheme,quantity,order\n");
        for r in &self.orders {
            s.push_str(&format!("{},{},{:.6}\n", r.scheme, r.quantity, r.order));
        }
        s
    }

    pub fn errors_csv(&self) -> String {
        let mut s = String::from("scheme,quantity,h,error\n");
        for r in &self.errors {
            s.push_str(&format!("{},{},{:.16e},{:.16e}\n", r.scheme, r.quantity, r.h, r.error));
        }
        s
    }
}

/// Piecewise-constant prolongation of cell-average data onto a finer mesh
/// (only when the fine mesh is an integer refinement).
fn prolong(avg: &Fields, coarse_cells: usize, fine_cells: usize, nv: usize) -> Option<Fields> {
    if fine_cells % coarse_cells != 0 {
        return None;
    }
    let ratio = fine_cells / coarse_cells;
    let mut out = Fields::zeros(fine_cells * nv);
    for i in 0..coarse_cells {
        for r in 0..ratio {
            let dst = (i * ratio + r) * nv;
            out.f[dst..dst + nv].copy_from_slice(&avg.f[i * nv..(i + 1) * nv]);
            out.g[dst..dst + nv].copy_from_slice(&avg.g[i * nv..(i + 1) * nv]);
            out.h[dst..dst + nv].copy_from_slice(&avg.h[i * nv..(i + 1) * nv]);
        }
    }
    Some(out)
}

fn native_from_averages(scheme: Scheme, avg: Fields, cells: usize, nv: usize) -> Fields {
    if !scheme.is_dg() {
        return avg;
    }
    let mut out = Fields::zeros(2 * cells * nv);
    let half = cells * nv;
    out.f[..half].copy_from_slice(&avg.f);
    out.f[half..].copy_from_slice(&avg.f);
    out.g[..half].copy_from_slice(&avg.g);
    out.g[half..].copy_from_slice(&avg.g);
    out.h[..half].copy_from_slice(&avg.h);
    out.h[half..].copy_from_slice(&avg.h);
    out
}

/// Run `schemes` over the mesh ladder plus the reference mesh, compute L2
/// self-convergence errors of T and qx (and the ux error against its exact
/// zero value), and fit observed orders. Meshes run coarse to fine; each run
/// starts from the prolonged previous steady state when the refinement ratio
/// allows it.
pub fn run_convergence_study(
    base: &RunConfig,
    schemes: &[Scheme],
    meshes: &[usize],
    reference_cells: usize,
) -> Result<StudyOutcome, SolverError> {
    if meshes.len() < 3 {
        return Err(SolverError::OrderFit(format!(
            "convergence study needs at least 3 meshes, got {}",
            meshes.len()
        )));
    }
    let mut meshes = meshes.to_vec();
    meshes.sort_unstable();
    for &m in &meshes {
        if reference_cells % m != 0 || reference_cells <= m {
            return Err(SolverError::IncompatibleMeshes { coarse: m, reference: reference_cells });
        }
    }

    let mut outcome = StudyOutcome::default();
    for &scheme in schemes {
        let mut runs: Vec<RunOutput> = Vec::new();
        let mut prev: Option<(usize, Fields)> = None; // (cells, cell averages)
        let mut ladder: Vec<usize> = meshes.clone();
        ladder.push(reference_cells);
        for &cells in &ladder {
            let mut cfg = base.clone();
            cfg.scheme = scheme;
            cfg.cells = cells;
            let nv = cfg.velocities;
            let init = prev.as_ref().and_then(|(pc, avg)| {
                prolong(avg, *pc, cells, nv)
                    .map(|a| native_from_averages(scheme, a, cells, nv))
            });
            log::info!("study: scheme {} cells {} ({} start)", scheme, cells,
                if init.is_some() { "cascaded" } else { "cold" });
            let out = run_case_from(&cfg, init)?;
            if !out.status.converged {
                return Err(SolverError::Invalid(format!(
                    "study run did not converge: scheme {}, {} cells, residual {:.3e} after {} steps",
                    scheme, cells, out.status.residual, out.status.steps
                )));
            }
            prev = Some((cells, out.cell_state.clone()));
            runs.push(out);
        }

        let reference = runs.pop().expect("reference run");
        let ref_t: Vec<f64> = reference.records.iter().map(|r| r.t).collect();
        let ref_q: Vec<f64> = reference.records.iter().map(|r| r.qx).collect();
        let mut pairs_t = Vec::new();
        let mut pairs_q = Vec::new();
        let mut pairs_u = Vec::new();
        for run in &runs {
            let h = base.length / run.cells as f64;
            let t: Vec<f64> = run.records.iter().map(|r| r.t).collect();
            let q: Vec<f64> = run.records.iter().map(|r| r.qx).collect();
            let et = l2_error(&t, &ref_t, base.length)?;
            let eq = l2_error(&q, &ref_q, base.length)?;
            // ux is exactly zero in the continuous problem; its L2 norm is a
            // pure error measure
            let dx = base.length / run.cells as f64;
            let eu = run.records.iter().map(|r| dx * r.ux * r.ux).sum::<f64>().sqrt();
            outcome.errors.push(ErrorRow { scheme, quantity: "T", h, error: et });
            outcome.errors.push(ErrorRow { scheme, quantity: "qx", h, error: eq });
            outcome.errors.push(ErrorRow { scheme, quantity: "ux", h, error: eu });
            pairs_t.push((h, et));
            pairs_q.push((h, eq));
            pairs_u.push((h, eu));
        }
        outcome.orders.push(OrderRow { scheme, quantity: "T", order: fit_order(&pairs_t)? });
        outcome.orders.push(OrderRow { scheme, quantity: "qx", order: fit_order(&pairs_q)? });
        outcome.orders.push(OrderRow { scheme, quantity: "ux", order: fit_order(&pairs_u)? });
    }
    Ok(outcome)
}

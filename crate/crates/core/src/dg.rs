//! Piecewise-linear upwind discontinuous Galerkin semi-discretization with
//! the nodal (edge) basis.
//!
//! Each cell carries two nodal values per velocity and component, the traces
//! at its left and right edges. Projecting the transport equation on the two
//! hat functions and eliminating the mass matrix gives, per cell and velocity,
//!
//! ```text
//! d/dt (f1, f2)^T =
//!   -(1/dx) [ 3v  3v; -3v -3v ] (f1, f2)^T
//!   -(2/dx) ( [0 -2v+; 0 v+] fl  +  [-2v- -v+; v- 2v+] f  +  [-v- 0; 2v- 0] fr )
//!   + (1/tau_q) (M~_q - f_q)
//! ```
//!
//! with `fl` the left neighbor's pair, `fr` the right neighbor's, and upwind
//! single-valued traces at the edges. At a wall the missing neighbor trace is
//! the diffuse-reflection state; no extrapolation is involved.

use crate::boundary::dg_wall_trace;
use crate::driver::{cfl_step, RhsDiagnostics, SpatialOperator};
use crate::equilibrium::{conservative_params_into, fill_mass_component, EquilibriumParams};
use crate::error::SolverError;
use crate::fv::BoundaryMode;
use crate::gas::GasModel;
use crate::mesh::Mesh1d;
use crate::state::{Fields, StateRow};
use crate::velocity::{conserved_moments, VelocityGrid};

/// The 2x2 element matrices of the weak form, kept for verification of the
/// assembled scheme: mass `|O|/6 [2 1; 1 2]`, its explicit inverse
/// `2/|O| [2 -1; -1 2]`, volume matrix `v/2 [1 1; -1 -1]` and the face
/// coupling blocks A, B, C per velocity.
#[derive(Debug, Clone)]
pub struct ElementMatrices {
    pub mass: [[f64; 2]; 2],
    pub mass_inv: [[f64; 2]; 2],
    pub d: Vec<[[f64; 2]; 2]>,
    pub a: Vec<[[f64; 2]; 2]>,
    pub b: Vec<[[f64; 2]; 2]>,
    pub c: Vec<[[f64; 2]; 2]>,
}

pub fn assemble_element_matrices(mesh: &Mesh1d, grid: &VelocityGrid) -> ElementMatrices {
    let w = mesh.dx();
    let mass = [[2.0 * w / 6.0, w / 6.0], [w / 6.0, 2.0 * w / 6.0]];
    let mass_inv = [[4.0 / w, -2.0 / w], [-2.0 / w, 4.0 / w]];
    let mut d = Vec::with_capacity(grid.len());
    let mut a = Vec::with_capacity(grid.len());
    let mut b = Vec::with_capacity(grid.len());
    let mut c = Vec::with_capacity(grid.len());
    for &v in grid.nodes() {
        let vp = v.max(0.0);
        let vn = v.min(0.0);
        d.push([[0.5 * v, 0.5 * v], [-0.5 * v, -0.5 * v]]);
        a.push([[0.0, -vp], [0.0, 0.0]]);
        b.push([[-vn, 0.0], [0.0, vp]]);
        c.push([[0.0, 0.0], [vn, 0.0]]);
    }
    ElementMatrices { mass, mass_inv, d, a, b, c }
}

pub struct DgOperator {
    mesh: Mesh1d,
    grid: VelocityGrid,
    gas: GasModel,
    boundary: BoundaryMode,
    conservative: bool,
    collisionless: bool,
    eq_cache: Vec<EquilibriumParams>,
    mbuf: Vec<f64>,
}

const EQ_UNSET: EquilibriumParams = EquilibriumParams { rho: -1.0, ux: 0.0, uy: 0.0, t: -1.0 };

impl DgOperator {
    pub fn new(
        mesh: Mesh1d,
        grid: VelocityGrid,
        gas: GasModel,
        boundary: BoundaryMode,
        conservative: bool,
        collisionless: bool,
    ) -> Result<Self, SolverError> {
        gas.validate()?;
        if let BoundaryMode::Walls(l, r) = &boundary {
            l.validate()?;
            r.validate()?;
            if l.normal != 1.0 || r.normal != -1.0 {
                return Err(SolverError::InvalidWall(
                    "left wall must have normal +1 and right wall -1".into(),
                ));
            }
        }
        let nv = grid.len();
        let cells = mesh.cells();
        Ok(DgOperator {
            mesh,
            grid,
            gas,
            boundary,
            conservative,
            collisionless,
            eq_cache: vec![EQ_UNSET; 2 * cells],
            mbuf: vec![0.0; nv],
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn mesh(&self) -> &Mesh1d {
        &self.mesh
    }

    /// Start offset of the nodal plane `q` (0 = left edge, 1 = right edge)
    /// at cell `i`.
    fn plane(&self, q: usize, i: usize) -> usize {
        (q * self.mesh.cells() + i) * self.grid.len()
    }

    fn relax(&mut self, state: &Fields, out: &mut Fields) -> Result<f64, SolverError> {
        let nv = self.grid.len();
        let cells = self.mesh.cells();
        let r_gas = self.gas.r;
        let mut min_tau = f64::INFINITY;
        for q in 0..2 {
            for i in 0..cells {
                let s = (q * cells + i) * nv;
                let row = StateRow {
                    f: &state.f[s..s + nv],
                    g: &state.g[s..s + nv],
                    h: &state.h[s..s + nv],
                };
                let (rho, ux, uy, e, t) = conserved_moments(row, &self.grid, r_gas)
                    .map_err(|err| err.at_node(i, q + 1))?;
                let tau = self.gas.relaxation_time(rho, t);
                min_tau = min_tau.min(tau);
                let inv_tau = 1.0 / tau;
                let params = if self.conservative {
                    let target = [rho, rho * ux, rho * uy, e];
                    let p = conservative_params_into(
                        &target,
                        &self.grid,
                        r_gas,
                        self.eq_cache[q * cells + i],
                        &mut self.mbuf,
                    )
                    .map_err(|err| err.at_node(i, q + 1))?;
                    self.eq_cache[q * cells + i] = p;
                    p
                } else {
                    let p = EquilibriumParams { rho, ux, uy, t };
                    fill_mass_component(&p, &self.grid, r_gas, &mut self.mbuf);
                    p
                };
                let (gfac, pfac) = params.gh_factors(r_gas);
                for k in 0..nv {
                    let m = self.mbuf[k];
                    out.f[s + k] += inv_tau * (m - state.f[s + k]);
                    out.g[s + k] += inv_tau * (gfac * m - state.g[s + k]);
                    out.h[s + k] += inv_tau * (pfac * m - state.h[s + k]);
                }
            }
        }
        Ok(min_tau)
    }
}

impl SpatialOperator for DgOperator {
    fn rhs(&mut self, state: &Fields, out: &mut Fields) -> Result<RhsDiagnostics, SolverError> {
        assert_eq!(state.len(), self.state_len());
        assert_eq!(out.len(), self.state_len());
        let nv = self.grid.len();
        let cells = self.mesh.cells();
        let inv_dx = 1.0 / self.mesh.dx();
        let nodes = self.grid.nodes();

        // ghost traces: node-2 value left of the domain, node-1 value right
        // of it
        let (ghost_left, ghost_right, sigma, wall_flux) = match self.boundary {
            BoundaryMode::Periodic => {
                let l = self.plane(1, cells - 1);
                let r = self.plane(0, 0);
                let gl = Fields {
                    f: state.f[l..l + nv].to_vec(),
                    g: state.g[l..l + nv].to_vec(),
                    h: state.h[l..l + nv].to_vec(),
                };
                let gr = Fields {
                    f: state.f[r..r + nv].to_vec(),
                    g: state.g[r..r + nv].to_vec(),
                    h: state.h[r..r + nv].to_vec(),
                };
                (gl, gr, [0.0; 2], [0.0; 2])
            }
            BoundaryMode::Walls(left, right) => {
                let l = self.plane(0, 0);
                let trace_l = StateRow {
                    f: &state.f[l..l + nv],
                    g: &state.g[l..l + nv],
                    h: &state.h[l..l + nv],
                };
                let (wl, sl) = dg_wall_trace(trace_l, &left, &self.grid, self.gas.r);
                let r = self.plane(1, cells - 1);
                let trace_r = StateRow {
                    f: &state.f[r..r + nv],
                    g: &state.g[r..r + nv],
                    h: &state.h[r..r + nv],
                };
                let (wr, sr) = dg_wall_trace(trace_r, &right, &self.grid, self.gas.r);
                let fl = crate::boundary::wall_mass_flux(&wl.f, &self.grid);
                let fr = crate::boundary::wall_mass_flux(&wr.f, &self.grid);
                (wl, wr, [sl, sr], [fl, fr])
            }
        };

        let half = cells * nv;
        for (comp, ghost_l, ghost_r, out_arr) in [
            (&state.f, &ghost_left.f, &ghost_right.f, &mut out.f),
            (&state.g, &ghost_left.g, &ghost_right.g, &mut out.g),
            (&state.h, &ghost_left.h, &ghost_right.h, &mut out.h),
        ] {
            let (out1, out2) = out_arr.split_at_mut(half);
            for i in 0..cells {
                let s = i * nv;
                let o1 = &mut out1[s..s + nv];
                let o2 = &mut out2[s..s + nv];
                let f1 = &comp[s..s + nv];
                let f2 = &comp[half + s..half + s + nv];
                let fl2: &[f64] = if i == 0 { ghost_l } else { &comp[half + s - nv..half + s] };
                let fr1: &[f64] = if i + 1 == cells { ghost_r } else { &comp[s + nv..s + 2 * nv] };
                for k in 0..nv {
                    let v = nodes[k];
                    let vp = v.max(0.0);
                    let vn = v.min(0.0);
                    let vol = 3.0 * v * (f1[k] + f2[k]);
                    o1[k] = inv_dx
                        * (-vol
                            - 2.0 * (-2.0 * vp * fl2[k] - 2.0 * vn * f1[k] - vp * f2[k]
                                - vn * fr1[k]));
                    o2[k] = inv_dx
                        * (vol
                            - 2.0 * (vp * fl2[k] + vn * f1[k] + 2.0 * vp * f2[k]
                                + 2.0 * vn * fr1[k]));
                }
            }
        }

        let min_tau = if self.collisionless { f64::INFINITY } else { self.relax(state, out)? };
        Ok(RhsDiagnostics {
            wall_mass_flux: wall_flux,
            sigma,
            min_tau,
            negative_wall_values: 0,
        })
    }

    fn timestep(&self, state: &Fields, cfl: f64) -> Result<f64, SolverError> {
        let min_tau = if self.collisionless {
            f64::INFINITY
        } else {
            let nv = self.grid.len();
            let cells = self.mesh.cells();
            let mut t = f64::INFINITY;
            for q in 0..2 {
                for i in 0..cells {
                    let s = (q * cells + i) * nv;
                    let row = StateRow {
                        f: &state.f[s..s + nv],
                        g: &state.g[s..s + nv],
                        h: &state.h[s..s + nv],
                    };
                    let (rho, _, _, _, temp) = conserved_moments(row, &self.grid, self.gas.r)
                        .map_err(|err| err.at_node(i, q + 1))?;
                    t = t.min(self.gas.relaxation_time(rho, temp));
                }
            }
            t
        };
        cfl_step(self.mesh.dx(), self.grid.max_speed(), min_tau, cfl)
    }

    fn two_stage(&self) -> bool {
        true
    }

    fn default_cfl(&self) -> f64 {
        0.3
    }

    fn mass(&self, state: &Fields) -> f64 {
        let nv = self.grid.len();
        let cells = self.mesh.cells();
        let wts = self.grid.weights();
        let half = cells * nv;
        let mut total = 0.0;
        for i in 0..cells {
            let s = i * nv;
            let mut m = 0.0;
            for k in 0..nv {
                m += 0.5 * (state.f[s + k] + state.f[half + s + k]) * wts[k];
            }
            total += m;
        }
        total * self.mesh.dx()
    }

    fn state_len(&self) -> usize {
        2 * self.mesh.cells() * self.grid.len()
    }
}

/// Cell averages of a DG state, `(f_{i,k,1} + f_{i,k,2}) / 2` per component
/// (exact for the linear basis). The result uses the FV layout and feeds the
/// same moment routines.
pub fn dg_cell_averages(state: &Fields, cells: usize, nv: usize) -> Fields {
    let half = cells * nv;
    let mut avg = Fields::zeros(half);
    for (src, dst) in
        [(&state.f, &mut avg.f), (&state.g, &mut avg.g), (&state.h, &mut avg.h)]
    {
        for j in 0..half {
            dst[j] = 0.5 * (src[j] + src[half + j]);
        }
    }
    avg
}

/// Uniform equilibrium in the DG layout: both nodes of every cell carry the
/// same reduced Maxwellian triple (Newton-corrected when `conservative`).
pub fn dg_uniform_equilibrium(
    cells: usize,
    grid: &VelocityGrid,
    r_gas: f64,
    rho: f64,
    uy: f64,
    t: f64,
    conservative: bool,
) -> Result<Fields, SolverError> {
    let row = crate::fv::fv_uniform_equilibrium(1, grid, r_gas, rho, uy, t, conservative)?;
    let nv = grid.len();
    let mut state = Fields::zeros(2 * cells * nv);
    for j in 0..2 * cells {
        state.f[j * nv..(j + 1) * nv].copy_from_slice(&row.f);
        state.g[j * nv..(j + 1) * nv].copy_from_slice(&row.g);
        state.h[j * nv..(j + 1) * nv].copy_from_slice(&row.h);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas::WallSpec;

    #[test]
    fn element_matrix_values() {
        let mesh = Mesh1d::new(0.0, 12.0, 2).unwrap(); // |cell| = 6
        let grid = VelocityGrid::from_nodes(vec![-2.0, 2.0], vec![1.0, 1.0]).unwrap();
        let em = assemble_element_matrices(&mesh, &grid);
        assert_eq!(em.mass, [[2.0, 1.0], [1.0, 2.0]]);
        // d for v = 2
        assert_eq!(em.d[1], [[1.0, 1.0], [-1.0, -1.0]]);
        // explicit inverse (2/|O|) [2 -1; -1 2]
        assert_eq!(em.mass_inv, [[4.0 / 6.0, -2.0 / 6.0], [-2.0 / 6.0, 4.0 / 6.0]]);
        // mass * mass_inv = identity
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for k in 0..2 {
                    s += em.mass[i][k] * em.mass_inv[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-15);
            }
        }
        // coupling blocks for v = 2 (v+ = 2, v- = 0) and v = -2
        assert_eq!(em.a[1], [[0.0, -2.0], [0.0, 0.0]]);
        assert_eq!(em.b[1], [[0.0, 0.0], [0.0, 2.0]]);
        assert_eq!(em.c[1], [[0.0, 0.0], [0.0, 0.0]]);
        assert_eq!(em.a[0], [[0.0, 0.0], [0.0, 0.0]]);
        assert_eq!(em.b[0], [[2.0, 0.0], [0.0, 0.0]]);
        assert_eq!(em.c[0], [[0.0, 0.0], [-2.0, 0.0]]);
    }

    #[test]
    fn cell_average_cases() {
        let avg = dg_cell_averages(
            &Fields { f: vec![3.0, 3.0], g: vec![0.0, 2.0], h: vec![1.0, -1.0] },
            1,
            1,
        );
        assert_eq!(avg.f, vec![3.0]);
        assert_eq!(avg.g, vec![1.0]);
        assert_eq!(avg.h, vec![0.0]);
    }

    /// Hand-multiplied block form: single interior cell, v > 0, tau infinite,
    /// zero neighbor traces, f = (1, 1) gives rhs = (-4v, 2v) / dx.
    #[test]
    fn single_cell_block_arithmetic() {
        let grid = VelocityGrid::from_nodes(vec![-3.0, 5.0], vec![1.0, 1.0]).unwrap();
        let gas = crate::gas::GasModel::argon();
        let cells = 3;
        let mesh = Mesh1d::new(0.0, 3.0, cells).unwrap(); // dx = 1
        let mut op = DgOperator::new(
            mesh,
            grid.clone(),
            gas,
            BoundaryMode::Periodic,
            true,
            true, // collisionless
        )
        .unwrap();
        let nv = grid.len();
        let mut state = Fields::zeros(2 * cells * nv);
        // cell 1 carries (1, 1) for every velocity; cells 0 and 2 are zero,
        // so both neighbor traces vanish
        for k in 0..nv {
            state.f[nv + k] = 1.0; // node 1, cell 1
            state.f[cells * nv + nv + k] = 1.0; // node 2, cell 1
        }
        let mut out = Fields::zeros(state.len());
        op.rhs(&state, &mut out).unwrap();
        for (k, &v) in grid.nodes().iter().enumerate() {
            let o1 = out.f[nv + k];
            let o2 = out.f[cells * nv + nv + k];
            if v > 0.0 {
                assert!((o1 - (-4.0 * v)).abs() < 1e-13, "o1 = {o1}, v = {v}");
                assert!((o2 - 2.0 * v).abs() < 1e-13, "o2 = {o2}");
            } else {
                // mirrored case: for v < 0 the block form gives (-2v, 4v)/dx
                assert!((o1 - (-2.0 * v)).abs() < 1e-13, "o1 = {o1}, v = {v}");
                assert!((o2 - 4.0 * v).abs() < 1e-13, "o2 = {o2}");
            }
        }
    }

    fn couette_dg(cells: usize, u_right: f64) -> (DgOperator, Fields) {
        let grid = VelocityGrid::uniform(40, -953.0, 953.0).unwrap();
        let gas = crate::gas::GasModel::argon();
        let mesh = Mesh1d::unit(cells).unwrap();
        let rho = gas.density_from_knudsen(9.25e-3, 1.0, 273.0);
        let walls = BoundaryMode::Walls(WallSpec::left(273.0, 0.0), WallSpec::right(273.0, u_right));
        let state = dg_uniform_equilibrium(cells, &grid, gas.r, rho, 0.0, 273.0, false).unwrap();
        let op = DgOperator::new(mesh, grid, gas, walls, true, false).unwrap();
        (op, state)
    }

    #[test]
    fn freestream_preservation() {
        let (mut op, state) = couette_dg(10, 0.0);
        let mut out = Fields::zeros(state.len());
        let diag = op.rhs(&state, &mut out).unwrap();
        let rate = op.grid().max_speed() / op.mesh().dx() + 1.0 / diag.min_tau;
        for (arr, o) in [(&state.f, &out.f), (&state.g, &out.g), (&state.h, &out.h)] {
            let scale = arr.iter().fold(0.0f64, |m, &x| m.max(x.abs())).max(1e-300) * rate;
            let worst = o.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
            assert!(worst <= 1e-12 * scale, "|rhs| = {worst:e}, scale = {scale:e}");
        }
    }

    /// Cell-average mass derivative sums to zero with wall traces: face
    /// fluxes telescope, the wall flux vanishes, and the nodal Newton
    /// equilibria conserve the mass moment.
    #[test]
    fn mass_derivative_is_zero() {
        let (mut op, base) = couette_dg(12, 300.0);
        let nv = op.grid().len();
        let cells = op.mesh().cells();
        let mut state = base.clone();
        for j in 0..2 * cells {
            let bump = 1.0 + 0.15 * ((j as f64) * 0.9).sin();
            for k in 0..nv {
                state.f[j * nv + k] *= bump;
                state.g[j * nv + k] *= bump;
                state.h[j * nv + k] = 0.03 * ((j as f64) * 0.31).cos() * state.f[j * nv + k];
            }
        }
        let mut out = Fields::zeros(state.len());
        op.rhs(&state, &mut out).unwrap();
        let wts = op.grid().weights().to_vec();
        let half = cells * nv;
        let mut total = 0.0;
        let mut gross = 0.0;
        for i in 0..cells {
            for k in 0..nv {
                let c = 0.5 * (out.f[i * nv + k] + out.f[half + i * nv + k]) * wts[k];
                total += c;
                gross += c.abs();
            }
        }
        assert!(total.abs() <= 1e-11 * gross, "{total:e} vs gross {gross:e}");
    }

    /// For a globally linear initial condition and pure transport, the
    /// semi-discrete operator reproduces the exact derivative at every node
    /// (interior cells; the periodic seam is excluded).
    #[test]
    fn p1_exactness_on_linear_data() {
        let grid = VelocityGrid::uniform(8, -2.0, 2.0).unwrap();
        let gas = crate::gas::GasModel::argon();
        let cells = 12;
        let mesh = Mesh1d::unit(cells).unwrap();
        let nv = grid.len();
        let dx = mesh.dx();
        let mut op =
            DgOperator::new(mesh, grid.clone(), gas, BoundaryMode::Periodic, true, true).unwrap();
        let mut state = Fields::zeros(2 * cells * nv);
        let half = cells * nv;
        for i in 0..cells {
            let xl = i as f64 * dx;
            let xr = xl + dx;
            for k in 0..nv {
                let a = 1.0 + 0.2 * k as f64;
                let b = 0.7 - 0.1 * k as f64;
                state.f[i * nv + k] = a + b * xl;
                state.f[half + i * nv + k] = a + b * xr;
            }
        }
        let mut out = Fields::zeros(state.len());
        op.rhs(&state, &mut out).unwrap();
        for i in 2..cells - 2 {
            for (k, &v) in grid.nodes().iter().enumerate() {
                let b = 0.7 - 0.1 * k as f64;
                let exact = -v * b;
                for q in [0, 1] {
                    let got = out.f[q * half + i * nv + k];
                    assert!(
                        (got - exact).abs() <= 1e-12 * (v.abs() * b.abs()).max(1.0),
                        "cell {i} node {q} k {k}: {got} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn moment_errors_carry_cell_and_node() {
        let (mut op, base) = couette_dg(8, 0.0);
        let mut state = base.clone();
        let nv = op.grid().len();
        let half = 8 * nv;
        for k in 0..nv {
            state.f[half + 3 * nv + k] = 0.0; // evacuate node 2 of cell 3
        }
        let mut out = Fields::zeros(state.len());
        match op.rhs(&state, &mut out) {
            Err(crate::error::SolverError::AtNode { cell: 3, node: 2, .. }) => {}
            other => panic!("expected vacuum at cell 3 node 2, got {other:?}"),
        }
    }

    /// The production rhs agrees with an independent weak-form assembly:
    /// mass^-1 (-D f - A f_l - B f - C f_r + M (M~ - f)/tau) per cell and
    /// velocity.
    #[test]
    fn block_form_matches_weak_form_assembly() {
        let grid = VelocityGrid::uniform(12, -700.0, 700.0).unwrap();
        let gas = crate::gas::GasModel::argon();
        let cells = 6;
        let mesh = Mesh1d::unit(cells).unwrap();
        let nv = grid.len();
        let rho = gas.density_from_knudsen(9.25e-3, 1.0, 273.0);
        let mut state = dg_uniform_equilibrium(cells, &grid, gas.r, rho, 0.0, 273.0, false).unwrap();
        let half = cells * nv;
        for j in 0..2 * cells {
            for k in 0..nv {
                state.f[j * nv + k] *= 1.0 + 0.1 * ((j * nv + k) as f64 * 0.17).sin();
                state.g[j * nv + k] *= 1.0 + 0.05 * ((j * nv + k) as f64 * 0.4).cos();
            }
        }
        let walls = BoundaryMode::Walls(WallSpec::left(273.0, 0.0), WallSpec::right(273.0, 120.0));
        let mut op = DgOperator::new(mesh, grid.clone(), gas, walls, true, false).unwrap();
        let mut out = Fields::zeros(state.len());
        op.rhs(&state, &mut out).unwrap();

        // independent path: element matrices + wall traces + per-node Newton
        let em = assemble_element_matrices(&mesh, &grid);
        let (wl, _) = crate::boundary::dg_wall_trace(
            crate::state::StateRow { f: &state.f[..nv], g: &state.g[..nv], h: &state.h[..nv] },
            &WallSpec::left(273.0, 0.0),
            &grid,
            gas.r,
        );
        let s_last = half + (cells - 1) * nv;
        let (wr, _) = crate::boundary::dg_wall_trace(
            crate::state::StateRow {
                f: &state.f[s_last..s_last + nv],
                g: &state.g[s_last..s_last + nv],
                h: &state.h[s_last..s_last + nv],
            },
            &WallSpec::right(273.0, 120.0),
            &grid,
            gas.r,
        );
        for i in 0..cells {
            // nodal equilibria and relaxation times
            let mut eq = [vec![0.0; nv], vec![0.0; nv]];
            let mut taus = [0.0; 2];
            for q in 0..2 {
                let s = q * half + i * nv;
                let row = crate::state::StateRow {
                    f: &state.f[s..s + nv],
                    g: &state.g[s..s + nv],
                    h: &state.h[s..s + nv],
                };
                let m = crate::velocity::compute_moments(row, &grid, gas.r).unwrap();
                taus[q] = gas.relaxation_time(m.rho, m.t);
                let p = crate::equilibrium::conservative_params(&m, &grid, gas.r).unwrap();
                let (mm, _, _) =
                    crate::equilibrium::reduced_maxwellians(p.rho, p.ux, p.uy, p.t, &grid, gas.r);
                eq[q] = mm;
            }
            for (k, _) in grid.nodes().iter().enumerate() {
                let f1 = state.f[i * nv + k];
                let f2 = state.f[half + i * nv + k];
                let fl2 = if i == 0 { wl.f[k] } else { state.f[half + (i - 1) * nv + k] };
                let fr1 = if i + 1 == cells { wr.f[k] } else { state.f[(i + 1) * nv + k] };
                let relax1 = (eq[0][k] - f1) / taus[0];
                let relax2 = (eq[1][k] - f2) / taus[1];
                // weak form: M df/dt = -(D + B) f - A f_l - C f_r + M relax
                let d = em.d[k];
                let a = em.a[k];
                let b = em.b[k];
                let c = em.c[k];
                let m = em.mass;
                let r1 = -(d[0][0] + b[0][0]) * f1 - (d[0][1] + b[0][1]) * f2
                    - a[0][1] * fl2
                    - c[0][0] * fr1
                    + m[0][0] * relax1
                    + m[0][1] * relax2;
                let r2 = -(d[1][0] + b[1][0]) * f1 - (d[1][1] + b[1][1]) * f2
                    - a[1][1] * fl2
                    - c[1][0] * fr1
                    + m[1][0] * relax1
                    + m[1][1] * relax2;
                let w1 = em.mass_inv[0][0] * r1 + em.mass_inv[0][1] * r2;
                let w2 = em.mass_inv[1][0] * r1 + em.mass_inv[1][1] * r2;
                let got1 = out.f[i * nv + k];
                let got2 = out.f[half + i * nv + k];
                let scale = w1.abs().max(w2.abs()).max(1e-300);
                assert!(
                    (got1 - w1).abs() <= 1e-10 * scale && (got2 - w2).abs() <= 1e-10 * scale,
                    "cell {i} k {k}: ({got1}, {got2}) vs ({w1}, {w2})"
                );
            }
        }
    }
}

//! Cell problem of the viscous G-equation.
//!
//! Finds a periodic mean-zero `ū` and the constant `H̄` with
//! `−d·s_L·Δū + V·(P + Dū) + s_L|P + Dū| = H̄` by the fixed-point iteration
//! `−d·s_L·Δu⁽ᵏ⁺¹⁾ + V·Du⁽ᵏ⁺¹⁾ = H⁽ᵏ⁾ − s_L|P + Du⁽ᵏ⁾| − V·P`,
//! `H⁽ᵏ⁾ = s_L·mean|P + Du⁽ᵏ⁾|`. All differences are central.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::flow::FlowSamples;
use crate::grid::{laplacian_into, Grid};
use crate::stepping::{apply_advection_diffusion, bicgstab, LinearSolveReport, PeriodicHelmholtz, LINEAR_TOLERANCE};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITERS: usize = 500;
const SOLVE_MAX_ITERS: usize = 2000;

/// Sufficient contraction bound `√n/(π d)` for dimension `n = 2`.
pub fn contraction_bound(d: f64) -> f64 {
    2f64.sqrt() / (PI * d)
}

/// Whether `d` lies in the regime where convergence is guaranteed.
pub fn in_guaranteed_regime(d: f64) -> bool {
    contraction_bound(d) < 1.0
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn central_du(g: Grid, u: &[f64], k: usize) -> [f64; 2] {
    let (nx, ny) = (g.nx(), g.ny());
    let (i, j) = (k % nx, k / nx);
    let ip = if i + 1 == nx { 0 } else { i + 1 };
    let im = if i == 0 { nx - 1 } else { i - 1 };
    let jp = if j + 1 == ny { 0 } else { j + 1 };
    let jm = if j == 0 { ny - 1 } else { j - 1 };
    [
        (u[j * nx + ip] - u[j * nx + im]) / (2.0 * g.hx()),
        (u[jp * nx + i] - u[jm * nx + i]) / (2.0 * g.hy()),
    ]
}

/// `sqrt(mean |D_c v|²)`.
pub fn gradient_l2(g: Grid, v: &[f64]) -> f64 {
    let s: f64 = (0..v.len()).map(|k| {
        let d = central_du(g, v, k);
        d[0] * d[0] + d[1] * d[1]
    }).sum();
    (s / v.len() as f64).sqrt()
}

/// `s_L·mean|P + D_c u|`.
pub fn effective_speed(g: Grid, u: &[f64], s_l: f64, p: [f64; 2]) -> f64 {
    let s: f64 = (0..u.len())
        .map(|k| {
            let d = central_du(g, u, k);
            ((p[0] + d[0]).powi(2) + (p[1] + d[1]).powi(2)).sqrt()
        })
        .sum();
    s_l * s / u.len() as f64
}

/// Solver for `−κΔu + V·D_c u = f` on mean-zero periodic fields.
pub struct MeanZeroSolver {
    grid: Grid,
    flow: FlowSamples,
    kappa: f64,
    spectral: PeriodicHelmholtz,
}

impl std::fmt::Debug for MeanZeroSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MeanZeroSolver").field("grid", &self.grid).field("kappa", &self.kappa).finish()
    }
}

impl MeanZeroSolver {
    pub fn new(grid: Grid, flow: FlowSamples, d: f64, s_l: f64) -> Result<Self> {
        let kappa = d * s_l;
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::Domain(format!("d·s_L must be positive, got {kappa}")));
        }
        if flow.v1.len() != grid.len() {
            return Err(Error::FieldSize { expected: grid.len(), got: flow.v1.len() });
        }
        Ok(MeanZeroSolver { grid, flow, kappa, spectral: PeriodicHelmholtz::new(grid) })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn flow(&self) -> &FlowSamples {
        &self.flow
    }

    /// `−κΔv + V·D_c v`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        apply_advection_diffusion(self.grid, &self.flow, 0.0, 1.0, self.kappa, v, out);
    }

    pub fn solve(&mut self, f: &[f64]) -> Result<(Vec<f64>, LinearSolveReport)> {
        if f.len() != self.grid.len() {
            return Err(Error::FieldSize { expected: self.grid.len(), got: f.len() });
        }
        let scale = f.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let m = mean(f);
        if m.abs() > 1e-10 * scale {
            return Err(Error::Domain(format!("right-hand side has nonzero mean {m:e}")));
        }
        let b: Vec<f64> = f.iter().map(|v| v - m).collect();
        let mut x = vec![0.0; b.len()];
        let (grid, flow, kappa) = (self.grid, &self.flow, self.kappa);
        let spectral = &mut self.spectral;
        let report = bicgstab(
            |v, o| {
                apply_advection_diffusion(grid, flow, 0.0, 1.0, kappa, v, o);
                let m = mean(o);
                o.iter_mut().for_each(|x| *x -= m);
            },
            |r, o| spectral.solve(0.0, kappa, r, o),
            &b,
            &mut x,
            LINEAR_TOLERANCE,
            SOLVE_MAX_ITERS,
        )?;
        let m = mean(&x);
        x.iter_mut().for_each(|v| *v -= m);
        Ok((x, report))
    }
}

/// One-shot mean-zero solve of `−d·s_L·Δu + V·D_c u = f`.
pub fn solve_mean_zero(grid: Grid, flow: &FlowSamples, d: f64, s_l: f64, f: &[f64]) -> Result<Vec<f64>> {
    Ok(MeanZeroSolver::new(grid, flow.clone(), d, s_l)?.solve(f)?.0)
}

#[derive(Clone, Debug)]
pub struct CorrectorState {
    pub u: Vec<f64>,
    pub h: f64,
    pub k: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// `H⁽ᵏ⁾` used for the right-hand side of this iteration.
    pub h_k: f64,
    /// `‖D(u⁽ᵏ⁾ − u⁽ᵏ⁻¹⁾)‖_L2`.
    pub grad_diff_norm: f64,
    /// Ratio to the previous norm.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct IterationReport {
    pub records: Vec<IterationRecord>,
    pub bound: f64,
    pub converged: bool,
    pub h_bar: f64,
    pub guaranteed: bool,
    pub linear_iterations: usize,
}

impl IterationReport {
    /// Largest measured contraction ratio, skipping the first `skip` ratios.
    pub fn max_ratio_after(&self, skip: usize) -> Option<f64> {
        self.records.iter().filter_map(|r| r.ratio).skip(skip).reduce(f64::max)
    }

    pub fn regime_label(&self) -> &'static str {
        if self.guaranteed {
            "guaranteed"
        } else {
            "outside guaranteed regime"
        }
    }

    /// Per-iteration CSV with columns `k,H_k,grad_diff_norm,ratio,bound`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,H_k,grad_diff_norm,ratio,bound\n");
        for r in &self.records {
            let ratio = r.ratio.map(|v| format!("{v:.10e}")).unwrap_or_default();
            s += &format!("{},{:.15e},{:.10e},{},{:.10e}\n", r.k, r.h_k, r.grad_diff_norm, ratio, self.bound);
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrectorParams {
    pub d: f64,
    pub s_l: f64,
    pub direction: [f64; 2],
    pub max_iters: usize,
    pub tol: f64,
}

impl CorrectorParams {
    pub fn new(d: f64, s_l: f64) -> Self {
        CorrectorParams { d, s_l, direction: [1.0, 0.0], max_iters: DEFAULT_MAX_ITERS, tol: DEFAULT_TOL }
    }
}

/// Run the fixed-point iteration from `u_init` (zero when `None`).
///
/// Non-convergence is reported through `IterationReport::converged`, not as an
/// error; linear-solve failures are errors.
pub fn corrector_iterate(
    grid: Grid,
    flow: &FlowSamples,
    params: &CorrectorParams,
    u_init: Option<Vec<f64>>,
) -> Result<(CorrectorState, IterationReport)> {
    let CorrectorParams { d, s_l, direction: p, max_iters, tol } = *params;
    if !(d > 0.0) {
        return Err(Error::Domain(format!("the corrector iteration needs d > 0, got {d}")));
    }
    let mut solver = MeanZeroSolver::new(grid, flow.clone(), d, s_l)?;
    let mut u = u_init.unwrap_or_else(|| vec![0.0; grid.len()]);
    if u.len() != grid.len() {
        return Err(Error::FieldSize { expected: grid.len(), got: u.len() });
    }
    let m = mean(&u);
    u.iter_mut().for_each(|v| *v -= m);
    let vp: Vec<f64> = (0..grid.len()).map(|k| flow.v1[k] * p[0] + flow.v2[k] * p[1]).collect();
    let vp_mean = mean(&vp);

    let mut report = IterationReport {
        records: Vec::new(),
        bound: contraction_bound(d),
        converged: false,
        h_bar: f64::NAN,
        guaranteed: in_guaranteed_regime(d),
        linear_iterations: 0,
    };
    let mut prev_norm: Option<f64> = None;
    let mut rhs = vec![0.0; grid.len()];
    let mut k = 0;
    while k < max_iters {
        let h_k = effective_speed(grid, &u, s_l, p);
        for (idx, r) in rhs.iter_mut().enumerate() {
            let du = central_du(grid, &u, idx);
            let norm = ((p[0] + du[0]).powi(2) + (p[1] + du[1]).powi(2)).sqrt();
            *r = h_k - s_l * norm - (vp[idx] - vp_mean);
        }
        let (next, lin) = solver.solve(&rhs)?;
        report.linear_iterations += lin.iterations;
        let diff: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let norm = gradient_l2(grid, &diff);
        k += 1;
        report.records.push(IterationRecord {
            k,
            h_k,
            grad_diff_norm: norm,
            ratio: prev_norm.filter(|&q| q > 0.0).map(|q| norm / q),
        });
        u = next;
        if !norm.is_finite() {
            break;
        }
        if norm <= tol {
            report.converged = true;
            break;
        }
        prev_norm = Some(norm);
    }
    let h = effective_speed(grid, &u, s_l, p);
    report.h_bar = h;
    Ok((CorrectorState { u, h, k }, report))
}

/// Max-norm residual of `−d·s_L·Δū + V·(P + Dū) + s_L|P + Dū| − H̄`.
pub fn effective_hamiltonian_residual(
    grid: Grid,
    state: &CorrectorState,
    flow: &FlowSamples,
    d: f64,
    s_l: f64,
    p: [f64; 2],
) -> f64 {
    let u = &state.u;
    let mut lap = vec![0.0; u.len()];
    laplacian_into(grid, u, &mut lap);
    (0..u.len())
        .map(|k| {
            let du = central_du(grid, u, k);
            let g = [p[0] + du[0], p[1] + du[1]];
            let r = -d * s_l * lap[k] + flow.v1[k] * g[0] + flow.v2[k] * g[1] + s_l * (g[0] * g[0] + g[1] * g[1]).sqrt()
                - state.h;
            r.abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowSpec;
    use rand::{Rng, SeedableRng};

    #[test]
    fn zero_rhs_gives_zero() {
        let g = Grid::square(32).unwrap();
        let fs = FlowSamples::new(&FlowSpec::cellular(4.0), g);
        let u = solve_mean_zero(g, &fs, 1.0, 1.0, &vec![0.0; g.len()]).unwrap();
        assert!(u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fourier_mode_without_flow() {
        let g = Grid::square(64).unwrap();
        let kappa = 0.3;
        let f: Vec<f64> = g.nodes().map(|(_, _, x, _)| (2.0 * PI * x).cos()).collect();
        let u = solve_mean_zero(g, &FlowSamples::zero(g), kappa, 1.0, &f).unwrap();
        let lam = (2.0 - 2.0 * (2.0 * PI * g.hx()).cos()) / (g.hx() * g.hx());
        for k in 0..g.len() {
            assert!((u[k] - f[k] / (kappa * lam)).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_nonzero_mean() {
        let g = Grid::square(16).unwrap();
        let err = solve_mean_zero(g, &FlowSamples::zero(g), 1.0, 1.0, &vec![0.5; g.len()]);
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn random_rhs_with_cellular_flow() {
        let g = Grid::square(48).unwrap();
        let fs = FlowSamples::new(&FlowSpec::cellular(4.0), g);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut f: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = mean(&f);
        f.iter_mut().for_each(|v| *v -= m);
        let mut solver = MeanZeroSolver::new(g, fs, 1.0, 1.0).unwrap();
        let (u, rep) = solver.solve(&f).unwrap();
        assert!(rep.residual <= 1e-10);
        assert!(mean(&u).abs() < 1e-12);
        let mut au = vec![0.0; g.len()];
        solver.apply(&u, &mut au);
        let fnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rnorm = au.iter().zip(&f).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(rnorm / fnorm <= 1e-9);
    }

    #[test]
    fn still_flow_converges_immediately() {
        let g = Grid::square(16).unwrap();
        for d in [0.1, 1.0, 5.0] {
            let (state, rep) = corrector_iterate(g, &FlowSamples::zero(g), &CorrectorParams::new(d, 1.0), None).unwrap();
            assert!(rep.converged);
            assert_eq!(state.k, 1);
            assert_eq!(state.h, 1.0);
            assert!(state.u.iter().all(|&v| v == 0.0));
            let r = effective_hamiltonian_residual(g, &state, &FlowSamples::zero(g), d, 1.0, [1.0, 0.0]);
            assert_eq!(r, 0.0);
        }
    }

    #[test]
    fn converges_and_contracts_at_large_d() {
        let g = Grid::square(40).unwrap();
        let fs = FlowSamples::new(&FlowSpec::cellular(4.0), g);
        let params = CorrectorParams::new(1.0, 1.0);
        let (state, rep) = corrector_iterate(g, &fs, &params, None).unwrap();
        assert!(rep.converged && rep.guaranteed);
        assert!(state.h >= 1.0);
        assert!(mean(&state.u).abs() < 1e-12);
        assert!(rep.max_ratio_after(1).unwrap() <= rep.bound + 0.05);
        let r = effective_hamiltonian_residual(g, &state, &fs, 1.0, 1.0, [1.0, 0.0]);
        assert!(r <= 10.0 * params.tol, "{r}");
    }

    #[test]
    fn direction_flip_symmetry() {
        let g = Grid::square(32).unwrap();
        let fs = FlowSamples::new(&FlowSpec::cellular(4.0), g);
        let mut params = CorrectorParams::new(1.0, 1.0);
        let (a, _) = corrector_iterate(g, &fs, &params, None).unwrap();
        params.direction = [-1.0, 0.0];
        let (b, _) = corrector_iterate(g, &fs, &params, None).unwrap();
        assert!((a.h - b.h).abs() < 1e-9);
    }

    #[test]
    fn regime_label_below_threshold() {
        let g = Grid::square(16).unwrap();
        let fs = FlowSamples::new(&FlowSpec::cellular(4.0), g);
        let mut params = CorrectorParams::new(0.2, 1.0);
        params.max_iters = 3;
        let (_, rep) = corrector_iterate(g, &fs, &params, None).unwrap();
        assert_eq!(rep.regime_label(), "outside guaranteed regime");
        assert!(rep.to_csv().starts_with("k,H_k,grad_diff_norm,ratio,bound\n"));
    }
}

//! Time integration of the four G-equation models.
//!
//! Explicit schemes are TVD Runge-Kutta (RK3 with WENO5, RK2 with WENO3). The
//! semi-implicit curvature step treats `d·s_L·ΔG` implicitly through a direct
//! spectral solve; the semi-implicit viscous step treats advection and diffusion
//! implicitly and solves with spectrally preconditioned BiCGSTAB.

pub mod krylov;
pub mod spectral;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::flow::{Flow, FlowSamples};
use crate::grid::{laplacian_into, AffineField, CentralDerivatives, Grid, VectorField};
use crate::hj::curvature::{curvature_gradient_into, infinity_laplacian_into, GRADIENT_FLOOR};
use crate::hj::hamiltonian::{inviscid_into, numerical_hamiltonian, strain_into};
use crate::hj::weno::{check_grid, weno_derivatives_into, OneSidedGradients, WenoOrder, WenoScratch};

pub use krylov::{bicgstab, LinearSolveReport};
pub use spectral::{laplacian_eigenvalue, PeriodicHelmholtz};

/// Relative residual required of every iterative linear solve.
pub const LINEAR_TOLERANCE: f64 = 1e-10;
pub const LINEAR_MAX_ITERS: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    Inviscid,
    Curvature,
    Viscous,
    Strain,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Inviscid, Model::Curvature, Model::Viscous, Model::Strain];

    pub fn name(self) -> &'static str {
        match self {
            Model::Inviscid => "inviscid",
            Model::Curvature => "curvature",
            Model::Viscous => "viscous",
            Model::Strain => "strain",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown model '{s}'")))
    }
}

/// User-facing scheme selection; `Auto` picks semi-implicit when `d > 2h`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SchemeChoice {
    #[default]
    Auto,
    Explicit,
    SemiImplicit,
}

impl SchemeChoice {
    pub fn name(self) -> &'static str {
        match self {
            SchemeChoice::Auto => "auto",
            SchemeChoice::Explicit => "explicit",
            SchemeChoice::SemiImplicit => "semi-implicit",
        }
    }
}

impl fmt::Display for SchemeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(SchemeChoice::Auto),
            "explicit" => Ok(SchemeChoice::Explicit),
            "semi-implicit" | "semi_implicit" => Ok(SchemeChoice::SemiImplicit),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Rk3Explicit,
    Rk2Explicit,
    SemiImplicitCurvature,
    SemiImplicitViscous,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Rk3Explicit => "rk3_explicit",
            Scheme::Rk2Explicit => "rk2_explicit",
            Scheme::SemiImplicitCurvature => "semi_implicit_curvature",
            Scheme::SemiImplicitViscous => "semi_implicit_viscous",
        }
    }

    pub fn is_explicit(self) -> bool {
        matches!(self, Scheme::Rk3Explicit | Scheme::Rk2Explicit)
    }

    fn weno(self) -> WenoOrder {
        match self {
            Scheme::Rk3Explicit => WenoOrder::Five,
            _ => WenoOrder::Three,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig {
    pub model: Model,
    pub s_l: f64,
    pub d: f64,
    pub scheme: SchemeChoice,
}

impl ModelConfig {
    pub fn new(model: Model, s_l: f64, d: f64) -> Self {
        ModelConfig { model, s_l, d, scheme: SchemeChoice::Auto }
    }

    /// All four models coincide at `d = 0` and run the inviscid path.
    pub fn effective_model(&self) -> Model {
        if self.d == 0.0 {
            Model::Inviscid
        } else {
            self.model
        }
    }

    pub fn resolve_scheme(&self, grid: Grid) -> Result<Scheme> {
        if !(self.s_l.is_finite() && self.s_l >= 0.0) {
            return Err(Error::Config(format!("s_L must be finite and nonnegative, got {}", self.s_l)));
        }
        if !(self.d.is_finite() && self.d >= 0.0) {
            return Err(Error::Config(format!("d must be finite and nonnegative, got {}", self.d)));
        }
        let h = grid.hx().max(grid.hy());
        let semi = match self.scheme {
            SchemeChoice::Auto => self.d > 2.0 * h,
            SchemeChoice::Explicit => false,
            SchemeChoice::SemiImplicit => true,
        };
        Ok(match self.effective_model() {
            Model::Inviscid => {
                if self.model == Model::Inviscid && self.scheme == SchemeChoice::SemiImplicit {
                    return Err(Error::Config("the inviscid model has no semi-implicit scheme".into()));
                }
                Scheme::Rk3Explicit
            }
            Model::Strain => {
                if self.scheme == SchemeChoice::SemiImplicit {
                    return Err(Error::Config("the strain model is explicit only".into()));
                }
                Scheme::Rk3Explicit
            }
            Model::Curvature if semi => Scheme::SemiImplicitCurvature,
            Model::Viscous if semi => Scheme::SemiImplicitViscous,
            Model::Curvature | Model::Viscous => Scheme::Rk2Explicit,
        })
    }
}

/// Time step from the CFL restriction of `scheme`, scaled by `safety`.
///
/// Returns infinity when nothing moves (`V = 0`, `s_L = 0`).
pub fn compute_dt(model: Model, scheme: Scheme, flow: &dyn Flow, grid: Grid, s_l: f64, d: f64, safety: f64) -> f64 {
    let [b1, b2] = flow.speed_bounds();
    let (hx, hy) = (grid.hx(), grid.hy());
    let diffusion = 2.0 * s_l * d / (hx * hx) + 2.0 * s_l * d / (hy * hy);
    let advective = |s: f64| (b1 + s) / hx + (b2 + s) / hy;
    let rate = match scheme {
        Scheme::Rk3Explicit if model == Model::Strain => {
            advective(s_l + d * flow.strain_bound()) + diffusion
        }
        Scheme::Rk3Explicit => advective(s_l),
        Scheme::Rk2Explicit => advective(s_l) + diffusion,
        Scheme::SemiImplicitCurvature => advective(s_l),
        Scheme::SemiImplicitViscous => s_l / hx + s_l / hy,
    };
    safety / rate
}

/// `out = a·v + b·(V·D_c v) − c·Δ_h v` with central differences.
#[allow(clippy::too_many_arguments)]
pub fn apply_advection_diffusion(grid: Grid, flow: &FlowSamples, a: f64, b: f64, c: f64, v: &[f64], out: &mut [f64]) {
    let (nx, ny) = (grid.nx(), grid.ny());
    let (i2hx, i2hy) = (0.5 / grid.hx(), 0.5 / grid.hy());
    let (ihx2, ihy2) = (1.0 / (grid.hx() * grid.hx()), 1.0 / (grid.hy() * grid.hy()));
    for j in 0..ny {
        let jm = if j == 0 { ny - 1 } else { j - 1 };
        let jp = if j + 1 == ny { 0 } else { j + 1 };
        for i in 0..nx {
            let im = if i == 0 { nx - 1 } else { i - 1 };
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            let k = j * nx + i;
            let (e, w, n, s, cc) = (v[j * nx + ip], v[j * nx + im], v[jp * nx + i], v[jm * nx + i], v[k]);
            let adv = flow.v1[k] * (e - w) * i2hx + flow.v2[k] * (n - s) * i2hy;
            let lap = (e - 2.0 * cc + w) * ihx2 + (n - 2.0 * cc + s) * ihy2;
            out[k] = a * cc + b * adv - c * lap;
        }
    }
}

/// Smallest `|diagonal| − Σ|off-diagonal|` over the rows of the assembled
/// semi-implicit viscous operator `I + dt·V·D_c − dt·κ·Δ_h`.
pub fn diagonal_dominance_margin(grid: Grid, flow: &FlowSamples, dt: f64, kappa: f64) -> f64 {
    let (hx, hy) = (grid.hx(), grid.hy());
    let diag = 1.0 + dt * kappa * (2.0 / (hx * hx) + 2.0 / (hy * hy));
    (0..grid.len())
        .map(|k| {
            let ax = dt * flow.v1[k] / (2.0 * hx);
            let ay = dt * flow.v2[k] / (2.0 * hy);
            let dx = dt * kappa / (hx * hx);
            let dy = dt * kappa / (hy * hy);
            let off = (ax - dx).abs() + (-ax - dx).abs() + (ay - dy).abs() + (-ay - dy).abs();
            diag - off
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Debug)]
pub struct SimState {
    pub field: AffineField,
    pub time: f64,
    pub steps: u64,
}

impl SimState {
    pub fn new(field: AffineField) -> Self {
        SimState { field, time: 0.0, steps: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RkOrder {
    Two,
    Three,
}

fn check_finite(u: &[f64], time: f64, stage: usize) -> Result<()> {
    match u.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(k) => Err(Error::Integration { time, reason: format!("non-finite value at node {k} in stage {stage}") }),
    }
}

#[derive(Clone, Debug, Default)]
struct RkBuffers {
    k: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
}

impl RkBuffers {
    fn new(n: usize) -> Self {
        RkBuffers { k: vec![0.0; n], u1: vec![0.0; n], u2: vec![0.0; n] }
    }
}

/// One TVD-RK step; `u` is untouched when a stage fails.
fn rk_core(
    u: &mut [f64],
    dt: f64,
    order: RkOrder,
    time: f64,
    rhs: &mut impl FnMut(&[f64], &mut [f64]),
    b: &mut RkBuffers,
) -> Result<()> {
    let RkBuffers { k, u1, u2 } = b;
    rhs(u, k);
    for i in 0..u.len() {
        u1[i] = u[i] + dt * k[i];
    }
    check_finite(u1, time, 1)?;
    rhs(u1, k);
    match order {
        RkOrder::Two => {
            for i in 0..u.len() {
                u2[i] = 0.5 * u[i] + 0.5 * (u1[i] + dt * k[i]);
            }
            check_finite(u2, time, 2)?;
            u.copy_from_slice(u2);
        }
        RkOrder::Three => {
            for i in 0..u.len() {
                u2[i] = 0.75 * u[i] + 0.25 * (u1[i] + dt * k[i]);
            }
            check_finite(u2, time, 2)?;
            rhs(u2, k);
            for i in 0..u.len() {
                u1[i] = u[i] / 3.0 + 2.0 / 3.0 * (u2[i] + dt * k[i]);
            }
            check_finite(u1, time, 3)?;
            u.copy_from_slice(u1);
        }
    }
    Ok(())
}

/// Advance `state` by one TVD-RK step of `u_t = rhs(u)`.
pub fn rk_step_explicit(
    state: &mut SimState,
    order: RkOrder,
    dt: f64,
    mut rhs: impl FnMut(&[f64], &mut [f64]),
) -> Result<()> {
    let mut b = RkBuffers::new(state.field.u().len());
    rk_core(state.field.u_mut(), dt, order, state.time, &mut rhs, &mut b)?;
    state.time += dt;
    state.steps += 1;
    Ok(())
}

/// Spatial operator of one model; owns the scratch for the derivative kernels.
struct Operator {
    grid: Grid,
    direction: [f64; 2],
    model: Model,
    s_l: f64,
    d: f64,
    weno: WenoOrder,
    flow: FlowSamples,
    scratch: WenoScratch,
    grads: OneSidedGradients,
    central: CentralDerivatives,
    central_p: VectorField,
    aux: Vec<f64>,
    regularized: u64,
}

impl Operator {
    /// `u_t` for the explicit schemes.
    fn rhs(&mut self, u: &[f64], out: &mut [f64]) {
        let ds = self.d * self.s_l;
        weno_derivatives_into(self.grid, u, self.direction, self.weno, &mut self.scratch, &mut self.grads);
        match self.model {
            Model::Inviscid => {
                inviscid_into(&self.grads, &self.flow, self.s_l, out);
                out.iter_mut().for_each(|v| *v = -*v);
                return;
            }
            Model::Viscous => {
                inviscid_into(&self.grads, &self.flow, self.s_l, out);
                laplacian_into(self.grid, u, &mut self.aux);
            }
            Model::Curvature => {
                inviscid_into(&self.grads, &self.flow, self.s_l, out);
                curvature_gradient_into(self.grid, self.direction, u, GRADIENT_FLOOR, &mut self.central_p, &mut self.aux);
            }
            Model::Strain => {
                let p = &mut self.central_p;
                curvature_gradient_into(self.grid, self.direction, u, GRADIENT_FLOOR, p, &mut self.aux);
                let hits = strain_into(&self.grads, p, &self.flow, self.s_l, self.d, GRADIENT_FLOOR, out, None);
                self.regularized += hits as u64;
            }
        }
        for (o, a) in out.iter_mut().zip(&self.aux) {
            *o = -*o + ds * a;
        }
    }
}

/// Advances one model with a fixed scheme and time step.
pub struct Stepper {
    op: Operator,
    scheme: Scheme,
    dt: f64,
    buffers: RkBuffers,
    helmholtz: Option<PeriodicHelmholtz>,
    last_solve: Option<LinearSolveReport>,
}

impl fmt::Debug for Stepper {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stepper")
            .field("model", &self.op.model)
            .field("scheme", &self.scheme)
            .field("dt", &self.dt)
            .finish()
    }
}

impl Stepper {
    /// Resolve the scheme from `cfg` and the CFL step from the flow bounds.
    pub fn new(cfg: &ModelConfig, flow: &dyn Flow, grid: Grid, direction: [f64; 2], cfl_safety: f64) -> Result<Self> {
        if !(cfl_safety > 0.0 && cfl_safety <= 1.0) {
            return Err(Error::Config(format!("cfl_safety must lie in (0, 1], got {cfl_safety}")));
        }
        let scheme = cfg.resolve_scheme(grid)?;
        let model = cfg.effective_model();
        let dt = compute_dt(model, scheme, flow, grid, cfg.s_l, cfg.d, cfl_safety);
        if !dt.is_finite() {
            return Err(Error::Config("time step is unbounded: no flow and s_L = 0".into()));
        }
        Self::from_parts(model, scheme, cfg.s_l, cfg.d, FlowSamples::new(flow, grid), grid, direction, dt)
    }

    /// Build without scheme resolution (no `d = 0` collapse, no CFL choice).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        model: Model,
        scheme: Scheme,
        s_l: f64,
        d: f64,
        flow: FlowSamples,
        grid: Grid,
        direction: [f64; 2],
        dt: f64,
    ) -> Result<Self> {
        let weno = scheme.weno();
        check_grid(grid, weno)?;
        let compatible = match scheme {
            Scheme::Rk3Explicit | Scheme::Rk2Explicit => true,
            Scheme::SemiImplicitCurvature => model == Model::Curvature,
            Scheme::SemiImplicitViscous => model == Model::Viscous,
        };
        if !compatible {
            return Err(Error::Config(format!("scheme {scheme} does not apply to the {model} model")));
        }
        if flow.v1.len() != grid.len() {
            return Err(Error::FieldSize { expected: grid.len(), got: flow.v1.len() });
        }
        let n = grid.len();
        Ok(Stepper {
            op: Operator {
                grid,
                direction,
                model,
                s_l,
                d,
                weno,
                flow,
                scratch: WenoScratch::new(grid),
                grads: OneSidedGradients::zeros(n),
                central: CentralDerivatives::zeros(n),
                central_p: VectorField { x: vec![0.0; n], y: vec![0.0; n] },
                aux: vec![0.0; n],
                regularized: 0,
            },
            scheme,
            dt,
            buffers: RkBuffers::new(n),
            helmholtz: (!scheme.is_explicit()).then(|| PeriodicHelmholtz::new(grid)),
            last_solve: None,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn model(&self) -> Model {
        self.op.model
    }

    pub fn grid(&self) -> Grid {
        self.op.grid
    }

    pub fn flow(&self) -> &FlowSamples {
        &self.op.flow
    }

    /// Cumulative count of node evaluations where the strain estimate hit the
    /// gradient floor.
    pub fn regularized_nodes(&self) -> u64 {
        self.op.regularized
    }

    pub fn last_solve(&self) -> Option<LinearSolveReport> {
        self.last_solve
    }

    /// Explicit right-hand side `u_t = L(u)` of the model.
    pub fn rhs(&mut self, u: &[f64], out: &mut [f64]) {
        self.op.rhs(u, out);
    }

    pub fn step(&mut self, state: &mut SimState) -> Result<()> {
        self.step_by(state, self.dt)
    }

    /// One step of length `dt` (at most the CFL step).
    pub fn step_by(&mut self, state: &mut SimState, dt: f64) -> Result<()> {
        if state.field.grid() != self.op.grid {
            return Err(Error::FieldSize { expected: self.op.grid.len(), got: state.field.u().len() });
        }
        match self.scheme {
            Scheme::Rk3Explicit | Scheme::Rk2Explicit => {
                let order = if self.scheme == Scheme::Rk3Explicit { RkOrder::Three } else { RkOrder::Two };
                let op = &mut self.op;
                rk_core(state.field.u_mut(), dt, order, state.time, &mut |u, o| op.rhs(u, o), &mut self.buffers)?;
            }
            Scheme::SemiImplicitCurvature => self.semi_implicit_curvature(state, dt)?,
            Scheme::SemiImplicitViscous => self.semi_implicit_viscous(state, dt)?,
        }
        state.time += dt;
        state.steps += 1;
        Ok(())
    }

    /// `(I − dt·d·s_L·Δ)u' = u − dt·(Ĥ + d·s_L·Δ∞G)`.
    fn semi_implicit_curvature(&mut self, state: &mut SimState, dt: f64) -> Result<()> {
        let op = &mut self.op;
        let u = state.field.u();
        weno_derivatives_into(op.grid, u, op.direction, op.weno, &mut op.scratch, &mut op.grads);
        let rhs = &mut self.buffers.u1;
        inviscid_into(&op.grads, &op.flow, op.s_l, rhs);
        op.central.compute_raw(op.grid, op.direction, u);
        infinity_laplacian_into(&op.central, GRADIENT_FLOOR, &mut op.aux);
        let ds = op.d * op.s_l;
        for k in 0..rhs.len() {
            rhs[k] = u[k] - dt * (rhs[k] + ds * op.aux[k]);
        }
        let out = &mut self.buffers.u2;
        self.helmholtz.as_mut().expect("spectral solver").solve(1.0, dt * ds, rhs, out);
        check_finite(out, state.time, 1)?;
        state.field.u_mut().copy_from_slice(out);
        Ok(())
    }

    /// `(I + dt·V·D_c − dt·d·s_L·Δ)u' = u − dt·(s_L|DG|_Godunov + V·P)`.
    fn semi_implicit_viscous(&mut self, state: &mut SimState, dt: f64) -> Result<()> {
        let op = &mut self.op;
        let u = state.field.u();
        weno_derivatives_into(op.grid, u, op.direction, op.weno, &mut op.scratch, &mut op.grads);
        let [p1, p2] = op.direction;
        let b = &mut self.buffers.u1;
        for k in 0..b.len() {
            let normal = numerical_hamiltonian([0.0, 0.0], op.s_l, op.grads.at(k));
            b[k] = u[k] - dt * (normal + op.flow.v1[k] * p1 + op.flow.v2[k] * p2);
        }
        check_finite(b, state.time, 1)?;
        let x = &mut self.buffers.u2;
        x.copy_from_slice(u);
        let kappa = op.d * op.s_l;
        let (grid, flow) = (op.grid, &op.flow);
        let helmholtz = self.helmholtz.as_mut().expect("spectral solver");
        let report = bicgstab(
            |v, o| apply_advection_diffusion(grid, flow, 1.0, dt, dt * kappa, v, o),
            |r, o| helmholtz.solve(1.0, dt * kappa, r, o),
            b,
            x,
            LINEAR_TOLERANCE,
            LINEAR_MAX_ITERS,
        );
        match report {
            Ok(rep) => self.last_solve = Some(rep),
            Err(e) => {
                if let Error::LinearSolve(rep) = &e {
                    self.last_solve = Some(*rep);
                }
                return Err(e);
            }
        }
        check_finite(x, state.time, 1)?;
        state.field.u_mut().copy_from_slice(x);
        Ok(())
    }
}

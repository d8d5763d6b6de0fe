//! Analytic velocity fields and surface stretch rates.
//!
//! The cellular flow is `V = (-H_y, H_x)` for the stream function
//! `H = (A/2π) sin(2πx) sin(2πy)`. Velocities and their gradients are evaluated in
//! closed form, never by differencing sampled values.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Tolerance on `|n| = 1` for the stretch-rate formulas.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Velocity and its gradient at one point; `dv[i][j] = ∂V_i/∂x_j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocitySample {
    pub v: [f64; 2],
    pub dv: [[f64; 2]; 2],
}

impl VelocitySample {
    pub const ZERO: VelocitySample = VelocitySample { v: [0.0; 2], dv: [[0.0; 2]; 2] };

    pub fn divergence(&self) -> f64 {
        self.dv[0][0] + self.dv[1][1]
    }
}

/// A steady two-dimensional velocity field with analytic gradient.
pub trait Flow: Send + Sync {
    fn sample(&self, x: [f64; 2]) -> VelocitySample;

    /// Upper bounds on `max |V1|` and `max |V2|` over the torus.
    fn speed_bounds(&self) -> [f64; 2];

    /// Upper bound on `|p·DV·p| / |p|²` over the torus and all directions.
    fn strain_bound(&self) -> f64;
}

#[derive(Clone)]
pub enum FlowSpec {
    Zero,
    Cellular { amplitude: f64 },
    Custom(Arc<dyn Flow>),
}

impl fmt::Debug for FlowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowSpec::Zero => write!(f, "Zero"),
            FlowSpec::Cellular { amplitude } => write!(f, "Cellular {{ amplitude: {amplitude} }}"),
            FlowSpec::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl FlowSpec {
    pub fn cellular(amplitude: f64) -> Self {
        FlowSpec::Cellular { amplitude }
    }

    pub fn amplitude(&self) -> Option<f64> {
        match self {
            FlowSpec::Zero => Some(0.0),
            FlowSpec::Cellular { amplitude } => Some(*amplitude),
            FlowSpec::Custom(_) => None,
        }
    }
}

impl Flow for FlowSpec {
    fn sample(&self, x: [f64; 2]) -> VelocitySample {
        match self {
            FlowSpec::Zero => VelocitySample::ZERO,
            FlowSpec::Cellular { amplitude } => eval_cellular(x, *amplitude),
            FlowSpec::Custom(f) => f.sample(x),
        }
    }

    fn speed_bounds(&self) -> [f64; 2] {
        match self {
            FlowSpec::Zero => [0.0, 0.0],
            FlowSpec::Cellular { amplitude } => [amplitude.abs(), amplitude.abs()],
            FlowSpec::Custom(f) => f.speed_bounds(),
        }
    }

    fn strain_bound(&self) -> f64 {
        match self {
            FlowSpec::Zero => 0.0,
            FlowSpec::Cellular { amplitude } => 2.0 * PI * amplitude.abs(),
            FlowSpec::Custom(f) => f.strain_bound(),
        }
    }
}

/// Cellular flow `V = (-A sin(2πx) cos(2πy), A cos(2πx) sin(2πy))` and its gradient.
pub fn eval_cellular(x: [f64; 2], amplitude: f64) -> VelocitySample {
    let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
    let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
    let a = amplitude;
    let k = 2.0 * PI * a;
    VelocitySample {
        v: [-a * sx * cy, a * cx * sy],
        dv: [[-k * cx * cy, k * sx * sy], [-k * sx * sy, k * cx * cy]],
    }
}

/// Flow quantities sampled once at the grid nodes.
#[derive(Clone, Debug)]
pub struct FlowSamples {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    pub dv: Vec<[[f64; 2]; 2]>,
}

impl FlowSamples {
    pub fn new(flow: &dyn Flow, grid: Grid) -> Self {
        let n = grid.len();
        let mut out = FlowSamples { v1: Vec::with_capacity(n), v2: Vec::with_capacity(n), dv: Vec::with_capacity(n) };
        for (_, _, x, y) in grid.nodes() {
            let s = flow.sample([x, y]);
            out.v1.push(s.v[0]);
            out.v2.push(s.v[1]);
            out.dv.push(s.dv);
        }
        out
    }

    pub fn zero(grid: Grid) -> Self {
        Self::new(&FlowSpec::Zero, grid)
    }

    pub fn is_zero(&self) -> bool {
        self.v1.iter().chain(&self.v2).all(|&v| v == 0.0)
    }
}

/// Strain rate `S = -p·DV·p / |p|²`.
pub fn strain_rate(sample: &VelocitySample, p: [f64; 2]) -> Result<f64> {
    let p2 = p[0] * p[0] + p[1] * p[1];
    if p2 == 0.0 || !p2.is_finite() {
        return Err(Error::Domain("strain rate needs a nonzero direction".into()));
    }
    Ok(-quad_form(&sample.dv, p) / p2)
}

#[inline]
fn quad_form(dv: &[[f64; 2]; 2], p: [f64; 2]) -> f64 {
    p[0] * (dv[0][0] * p[0] + dv[0][1] * p[1]) + p[1] * (dv[1][0] * p[0] + dv[1][1] * p[1])
}

fn check_unit<const D: usize>(n: &[f64; D]) -> Result<()> {
    let norm = n.iter().map(|c| c * c).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::Domain(format!("normal must be a unit vector, |n| = {norm}")));
    }
    Ok(())
}

/// Relative growth rate of a surface element with unit normal `n` carried by a
/// flow with gradient `dv`: `div V − n·DV·n`. Valid in any dimension.
pub fn stretch_rate_general<const D: usize>(dv: &[[f64; D]; D], n: &[f64; D]) -> Result<f64> {
    check_unit(n)?;
    let mut div = 0.0;
    let mut ndvn = 0.0;
    for i in 0..D {
        div += dv[i][i];
        for j in 0..D {
            ndvn += n[i] * dv[i][j] * n[j];
        }
    }
    Ok(div - ndvn)
}

/// A smooth three-dimensional vector field with analytic Jacobian
/// (`jacobian[i][j] = ∂F_i/∂x_j`).
pub trait Field3 {
    fn value(&self, x: [f64; 3]) -> [f64; 3];
    fn jacobian(&self, x: [f64; 3]) -> [[f64; 3]; 3];
}

const LEVI: [[[f64; 3]; 3]; 3] = {
    let mut e = [[[0.0; 3]; 3]; 3];
    e[0][1][2] = 1.0;
    e[1][2][0] = 1.0;
    e[2][0][1] = 1.0;
    e[0][2][1] = -1.0;
    e[2][1][0] = -1.0;
    e[1][0][2] = -1.0;
    e
};

/// The curl form `(n·V) div(n) − curl(V×n)·n` for an extended unit normal field.
///
/// Agrees with [`stretch_rate_general`] whenever `|n| = 1` in a neighbourhood of `x`.
pub fn stretch_rate_curl_form(velocity: &dyn Field3, normal: &dyn Field3, x: [f64; 3]) -> Result<f64> {
    let v = velocity.value(x);
    let dv = velocity.jacobian(x);
    let n = normal.value(x);
    let dn = normal.jacobian(x);
    check_unit(&n)?;

    let n_dot_v: f64 = (0..3).map(|i| n[i] * v[i]).sum();
    let div_n = dn[0][0] + dn[1][1] + dn[2][2];

    // W = V × n, W_i = ε_ijk V_j n_k; ∂_l W_i = ε_ijk (∂_l V_j n_k + V_j ∂_l n_k)
    let mut dw = [[0.0; 3]; 3];
    for (i, row) in dw.iter_mut().enumerate() {
        for (l, entry) in row.iter_mut().enumerate() {
            let mut s = 0.0;
            for j in 0..3 {
                for k in 0..3 {
                    let e = LEVI[i][j][k];
                    if e != 0.0 {
                        s += e * (dv[j][l] * n[k] + v[j] * dn[k][l]);
                    }
                }
            }
            *entry = s;
        }
    }
    // (curl W)_i = ε_ilm ∂_l W_m
    let mut curl_dot_n = 0.0;
    for i in 0..3 {
        let mut c = 0.0;
        for l in 0..3 {
            for m in 0..3 {
                let e = LEVI[i][l][m];
                if e != 0.0 {
                    c += e * dw[m][l];
                }
            }
        }
        curl_dot_n += c * n[i];
    }
    Ok(n_dot_v * div_n - curl_dot_n)
}

/// Stretch rate of a front moving with the flow plus normal speed `s_l` in an
/// incompressible field: `−n·DV·n + s_l·κ`.
pub fn front_stretch_rate(sample: &VelocitySample, n: [f64; 2], kappa: f64, s_l: f64) -> Result<f64> {
    check_unit(&n)?;
    Ok(-quad_form(&sample.dv, n) + s_l * kappa)
}

/// Independent check of the stretch rate: carry a short material segment through
/// the flow map and difference its length.
pub mod oracle {
    /// `(σ(δt) − σ(0)) / (σ(0)·δt)` for a segment of length `eps` centred at `x`
    /// and tangent to the line with unit normal `n`. Endpoints are advanced with
    /// classical RK4 in `substeps` steps.
    pub fn segment_stretch_rate(
        velocity: impl Fn([f64; 2]) -> [f64; 2],
        x: [f64; 2],
        n: [f64; 2],
        eps: f64,
        dt: f64,
        substeps: usize,
    ) -> f64 {
        let t = [-n[1], n[0]];
        let a = [x[0] - 0.5 * eps * t[0], x[1] - 0.5 * eps * t[1]];
        let b = [x[0] + 0.5 * eps * t[0], x[1] + 0.5 * eps * t[1]];
        let a1 = advect(&velocity, a, dt, substeps);
        let b1 = advect(&velocity, b, dt, substeps);
        let len0 = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        let len1 = ((b1[0] - a1[0]).powi(2) + (b1[1] - a1[1]).powi(2)).sqrt();
        (len1 - len0) / (len0 * dt)
    }

    fn advect(velocity: &impl Fn([f64; 2]) -> [f64; 2], mut p: [f64; 2], dt: f64, substeps: usize) -> [f64; 2] {
        let h = dt / substeps as f64;
        let add = |p: [f64; 2], k: [f64; 2], s: f64| [p[0] + s * k[0], p[1] + s * k[1]];
        for _ in 0..substeps {
            let k1 = velocity(p);
            let k2 = velocity(add(p, k1, 0.5 * h));
            let k3 = velocity(add(p, k2, 0.5 * h));
            let k4 = velocity(add(p, k3, h));
            p = [
                p[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                p[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            ];
        }
        p
    }
}

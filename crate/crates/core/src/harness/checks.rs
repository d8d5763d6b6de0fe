//! Reproducible checks: reinitialization scenarios, the stretch-rate oracle
//! suite, the WENO order study and the Hamiltonian property scan.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::flow::{eval_cellular, oracle, stretch_rate_curl_form, stretch_rate_general, Field3};
use crate::grid::{max_gradient, AffineField, Grid};
use crate::hj::hamiltonian::regularized_strain;
use crate::hj::{numerical_hamiltonian, weno_derivatives, WenoOrder, GRADIENT_FLOOR};
use crate::reinit::{band_deviation, reinit_field, ReinitProfile};

/// Band half-width for the steep-plane check. The two integer levels per period
/// force a kink halfway between them, at distance 1/4, so the band stops short.
pub const STEEP_BAND: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteepPlane {
    pub band_deviation: f64,
    /// Largest displacement of the zero crossing over all rows.
    pub zero_shift: f64,
    pub h: f64,
}

/// `G = 2x1 − 1/2` reinitialized for pseudo-time 1/2.
pub fn steep_plane(n: usize) -> Result<SteepPlane> {
    let g = Grid::square(n)?;
    let f = AffineField::from_fn(g, [2.0, 0.0], |_, _| -0.5);
    let (out, _) = reinit_field(&f, &ReinitProfile::default(), 0.5)?;
    let mut shift: f64 = 0.0;
    for j in 0..g.ny() as isize {
        for i in 0..g.nx() as isize {
            let (a, b) = (out.g(i, j), out.g(i + 1, j));
            if a <= 0.0 && b > 0.0 {
                let x = g.hx() * (i as f64 + a / (a - b));
                if (x - 0.25).abs() < 0.125 {
                    shift = shift.max((x - 0.25).abs());
                }
            }
        }
    }
    Ok(SteepPlane { band_deviation: band_deviation(&out, STEEP_BAND), zero_shift: shift, h: g.hx() })
}

pub const SQUEEZE_AMPLITUDE: f64 = 0.15;
pub const SQUEEZE_CALLS: usize = 6;
pub const SQUEEZE_PSEUDO_TIME: f64 = 0.25;

/// `max |Dφ|` after each of repeated reinitializations of the wavy front
/// `G = x1 + 0.15 sin(2πx2)`.
pub fn squeeze(n: usize, smooth_iters: usize) -> Result<Vec<f64>> {
    let g = Grid::square(n)?;
    let mut phi = AffineField::from_fn(g, [1.0, 0.0], |_, y| SQUEEZE_AMPLITUDE * (2.0 * PI * y).sin());
    let profile = ReinitProfile { smooth_iters, ..Default::default() };
    let mut out = Vec::with_capacity(SQUEEZE_CALLS);
    for _ in 0..SQUEEZE_CALLS {
        phi = reinit_field(&phi, &profile, SQUEEZE_PSEUDO_TIME)?.0;
        out.push(max_gradient(&phi));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReinitDemo {
    pub steep: SteepPlane,
    /// `(smooth_iters, max |Dφ| after each call)`.
    pub squeeze: Vec<(usize, Vec<f64>)>,
}

impl ReinitDemo {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("smooth_iters,call,max_grad\n");
        for (iters, v) in &self.squeeze {
            for (k, m) in v.iter().enumerate() {
                let _ = writeln!(s, "{iters},{},{m:.10e}", k + 1);
            }
        }
        s
    }
}

pub fn reinit_demo(n: usize, smooth_iters: &[usize]) -> Result<ReinitDemo> {
    let steep = steep_plane(n)?;
    let squeeze = smooth_iters
        .iter()
        .map(|&k| squeeze(n, k).map(|v| (k, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReinitDemo { steep, squeeze })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StretchCase {
    pub formula: f64,
    pub reference: f64,
}

impl StretchCase {
    pub fn error(&self) -> f64 {
        (self.formula - self.reference).abs()
    }
}

pub const ORACLE_EPS: f64 = 1e-4;
pub const ORACLE_DT: f64 = 1e-6;

/// Random planar cases: cellular flows (`A ≤ 4`) alternating with general,
/// compressible linear flows; the reference is the material-segment oracle.
pub fn stretch_cases_2d(seed: u64, count: usize) -> Result<Vec<StretchCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(count);
    for k in 0..count {
        let x = [rng.gen::<f64>(), rng.gen::<f64>()];
        let th: f64 = rng.gen_range(0.0..2.0 * PI);
        let n = [th.cos(), th.sin()];
        let case = if k % 2 == 0 {
            let a: f64 = rng.gen_range(0.5..4.0);
            let dv = eval_cellular(x, a).dv;
            let reference =
                oracle::segment_stretch_rate(|p| eval_cellular(p, a).v, x, n, ORACLE_EPS, ORACLE_DT, 4);
            StretchCase { formula: stretch_rate_general(&dv, &n)?, reference }
        } else {
            let m: [[f64; 2]; 2] = [
                [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
                [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            ];
            let b = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let vel = |p: [f64; 2]| {
                [m[0][0] * p[0] + m[0][1] * p[1] + b[0], m[1][0] * p[0] + m[1][1] * p[1] + b[1]]
            };
            let reference = oracle::segment_stretch_rate(vel, x, n, ORACLE_EPS, ORACLE_DT, 4);
            StretchCase { formula: stretch_rate_general(&m, &n)?, reference }
        };
        cases.push(case);
    }
    Ok(cases)
}

/// ABC flow plus a linear (compressible) part.
struct AbcLinear {
    abc: [f64; 3],
    m: [[f64; 3]; 3],
}

impl Field3 for AbcLinear {
    fn value(&self, x: [f64; 3]) -> [f64; 3] {
        let [a, b, c] = self.abc;
        let mut v = [
            a * x[2].sin() + c * x[1].cos(),
            b * x[0].sin() + a * x[2].cos(),
            c * x[1].sin() + b * x[0].cos(),
        ];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi += (0..3).map(|j| self.m[i][j] * x[j]).sum::<f64>();
        }
        v
    }

    fn jacobian(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        let [a, b, c] = self.abc;
        let mut j = [
            [0.0, -c * x[1].sin(), a * x[2].cos()],
            [b * x[0].cos(), 0.0, -a * x[2].sin()],
            [-b * x[0].sin(), c * x[1].cos(), 0.0],
        ];
        for (r, row) in j.iter_mut().enumerate() {
            for (s, e) in row.iter_mut().enumerate() {
                *e += self.m[r][s];
            }
        }
        j
    }
}

/// Unit radial field about `centre`.
struct Radial {
    centre: [f64; 3],
}

impl Field3 for Radial {
    fn value(&self, x: [f64; 3]) -> [f64; 3] {
        let r = [x[0] - self.centre[0], x[1] - self.centre[1], x[2] - self.centre[2]];
        let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        [r[0] / len, r[1] / len, r[2] / len]
    }

    fn jacobian(&self, x: [f64; 3]) -> [[f64; 3]; 3] {
        let n = self.value(x);
        let r: f64 = (0..3).map(|i| (x[i] - self.centre[i]).powi(2)).sum::<f64>().sqrt();
        let mut j = [[0.0; 3]; 3];
        for (a, row) in j.iter_mut().enumerate() {
            for (b, e) in row.iter_mut().enumerate() {
                *e = (if a == b { 1.0 } else { 0.0 } - n[a] * n[b]) / r;
            }
        }
        j
    }
}

/// Random spatial cases; the reference is the curl form with a radial normal field.
pub fn stretch_cases_3d(seed: u64, count: usize) -> Result<Vec<StretchCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(count);
    for _ in 0..count {
        let mut m = [[0.0; 3]; 3];
        for row in m.iter_mut() {
            for e in row.iter_mut() {
                *e = rng.gen_range(-1.0..1.0);
            }
        }
        let flow = AbcLinear { abc: [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)], m };
        let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let mut offset = [0.0; 3];
        loop {
            for o in offset.iter_mut() {
                *o = rng.gen_range(-2.0..2.0);
            }
            if offset.iter().map(|o| o * o).sum::<f64>() > 0.25 {
                break;
            }
        }
        let normal = Radial { centre: [x[0] - offset[0], x[1] - offset[1], x[2] - offset[2]] };
        let n = normal.value(x);
        cases.push(StretchCase {
            formula: stretch_rate_general(&flow.jacobian(x), &n)?,
            reference: stretch_rate_curl_form(&flow, &normal, x)?,
        });
    }
    Ok(cases)
}

/// Smooth periodic test profile `G = x1 + u` for the order study.
fn order_profile(x: f64, y: f64) -> f64 {
    0.3 * (2.0 * PI * x).sin() * (2.0 * PI * y).cos() + 0.1 * (2.0 * PI * (x + 2.0 * y)).cos()
}

fn order_profile_gradient(x: f64, y: f64) -> [f64; 2] {
    let (sx, cx) = (2.0 * PI * x).sin_cos();
    let (sy, cy) = (2.0 * PI * y).sin_cos();
    let s = (2.0 * PI * (x + 2.0 * y)).sin();
    [1.0 + 0.6 * PI * cx * cy - 0.2 * PI * s, -0.6 * PI * sx * sy - 0.4 * PI * s]
}

/// `[mean, max]` error of the four one-sided WENO derivatives against the exact gradient.
pub fn weno_error(n: usize, order: WenoOrder) -> Result<[f64; 2]> {
    let g = Grid::square(n)?;
    let f = AffineField::from_fn(g, [1.0, 0.0], order_profile);
    let d = weno_derivatives(&f, order)?;
    let (mut sum, mut worst) = (0.0, 0.0f64);
    for (k, (_, _, x, y)) in g.nodes().enumerate() {
        let [ex, ey] = order_profile_gradient(x, y);
        let [a, b, c, e] = d.at(k);
        for err in [(a - ex).abs(), (b - ex).abs(), (c - ey).abs(), (e - ey).abs()] {
            sum += err;
            worst = worst.max(err);
        }
    }
    Ok([sum / (4 * g.len()) as f64, worst])
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderStudy {
    /// Observed order of the mean error between the first and last grid.
    pub l1_order: f64,
    pub max_order: f64,
    /// `(n, [mean, max])`.
    pub errors: Vec<(usize, [f64; 2])>,
}

/// Refinement study on the smooth profile. The mean error is the graded one:
/// the nonlinear weights of WENO3 lose an order in the maximum norm near
/// critical points until `h` is much smaller than on these grids.
pub fn weno_order_study(order: WenoOrder, grids: &[usize]) -> Result<OrderStudy> {
    let errors = grids.iter().map(|&n| weno_error(n, order).map(|e| (n, e))).collect::<Result<Vec<_>>>()?;
    let (&(n0, e0), &(n1, e1)) = match (errors.first(), errors.last()) {
        (Some(a), Some(b)) if errors.len() > 1 => (a, b),
        _ => return Err(crate::Error::Config("order study needs at least two grids".into())),
    };
    let rate = |a: f64, b: f64| (a / b).ln() / (n1 as f64 / n0 as f64).ln();
    Ok(OrderStudy { l1_order: rate(e0[0], e1[0]), max_order: rate(e0[1], e1[1]), errors })
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HamiltonianScan {
    pub samples: usize,
    /// Largest relative `|Ĥ(p, p, q, q) − H(p, q)|`.
    pub inviscid_consistency: f64,
    pub strain_consistency: f64,
    pub inviscid_violations: usize,
    pub strain_violations: usize,
}

impl HamiltonianScan {
    pub fn passes(&self, tol: f64) -> bool {
        self.inviscid_consistency <= tol
            && self.strain_consistency <= tol
            && self.inviscid_violations == 0
            && self.strain_violations == 0
    }
}

/// Monotonicity violations of `Ĥ` at `p` under `+delta` in each one-sided slot.
fn violations(h: impl Fn([f64; 4]) -> f64, p: [f64; 4], delta: f64) -> usize {
    let h0 = h(p);
    [(0, 1.0), (1, -1.0), (2, 1.0), (3, -1.0)]
        .iter()
        .filter(|&&(slot, sign)| {
            let mut q = p;
            q[slot] += delta;
            sign * (h(q) - h0) < -1e-12
        })
        .count()
}

/// Consistency and the finite-difference monotonicity scan on random tuples.
/// The strain speed `s_L − d·Ŝ` is frozen from the central value `(p⁻ + p⁺)/2`.
pub fn hamiltonian_scan(seed: u64, samples: usize, delta: f64) -> HamiltonianScan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scan = HamiltonianScan { samples, ..Default::default() };
    let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + b.abs());
    for _ in 0..samples {
        let a: f64 = rng.gen_range(0.0..32.0);
        let x = [rng.gen::<f64>(), rng.gen::<f64>()];
        let sample = eval_cellular(x, a);
        let s_l = rng.gen_range(0.1..2.0);
        let d = rng.gen_range(0.0..0.2);
        let mut p = [0.0; 4];
        for v in p.iter_mut() {
            *v = rng.gen_range(-3.0..3.0);
        }
        let (px, py) = (p[0], p[2]);
        let exact = sample.v[0] * px + sample.v[1] * py + s_l * px.hypot(py);
        scan.inviscid_consistency =
            scan.inviscid_consistency.max(rel(numerical_hamiltonian(sample.v, s_l, [px, px, py, py]), exact));
        let (s_hat, _) = regularized_strain(&sample.dv, [px, py], GRADIENT_FLOOR);
        let c = s_l - d * s_hat;
        let exact = sample.v[0] * px + sample.v[1] * py + c * px.hypot(py);
        scan.strain_consistency =
            scan.strain_consistency.max(rel(numerical_hamiltonian(sample.v, c, [px, px, py, py]), exact));

        scan.inviscid_violations += violations(|q| numerical_hamiltonian(sample.v, s_l, q), p, delta);
        let central = [0.5 * (p[0] + p[1]), 0.5 * (p[2] + p[3])];
        let (s_hat, _) = regularized_strain(&sample.dv, central, GRADIENT_FLOOR);
        let c = s_l - d * s_hat;
        scan.strain_violations += violations(|q| numerical_hamiltonian(sample.v, c, q), p, delta);
    }
    scan
}

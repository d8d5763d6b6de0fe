//! Reinitialization of affine-periodic level-set functions.
//!
//! Solves `φ_τ + S̄(φ)(|Dφ| − 1) = 0` with a 1-periodic sign profile `S̄` that
//! vanishes at every integer and half-integer level, so each level `{φ = k}` is
//! pinned while `|Dφ|` relaxes to 1 around it. Level sets near `φ = k + 1/2` get
//! squeezed between neighbouring bundles; a masked Jacobi averaging (`D̄ = 1` away
//! from the integer levels) keeps them spread out.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{central_gradient, AffineField, Grid};
use crate::hj::hamiltonian::numerical_hamiltonian;
use crate::hj::weno::{check_grid, weno_derivatives_into, OneSidedGradients, WenoOrder, WenoScratch};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReinitProfile {
    /// Half-width `ε` of the unsmoothed band around each integer level.
    pub eps_band: f64,
    /// Jacobi sweeps after every pseudo-time step.
    pub smooth_iters: usize,
    /// Mollification width of `S̄`; `None` uses the grid spacing.
    pub mollify: Option<f64>,
    /// Pseudo-time step in units of the grid spacing.
    pub dtau_cells: f64,
}

impl Default for ReinitProfile {
    fn default() -> Self {
        ReinitProfile { eps_band: 0.1, smooth_iters: 5, mollify: None, dtau_cells: 1.0 }
    }
}

impl ReinitProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_band > 0.0 && self.eps_band < 0.25) {
            return Err(Error::Config(format!("reinit eps must lie in (0, 0.25), got {}", self.eps_band)));
        }
        if !(self.dtau_cells > 0.0 && self.dtau_cells.is_finite()) {
            return Err(Error::Config("reinit pseudo-step must be positive".into()));
        }
        if let Some(w) = self.mollify {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Config("reinit mollification width must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn sbar(&self, phi: f64, h: f64) -> f64 {
        sbar(phi, self.mollify.unwrap_or(h))
    }

    pub fn dbar(&self, phi: f64) -> f64 {
        dbar(phi, self.eps_band)
    }
}

/// Mollified 1-periodic sign `s / sqrt(s² + w²)` with `s = sin(2πφ)/(2π)`.
#[inline]
pub fn sbar(phi: f64, width: f64) -> f64 {
    let s = (2.0 * PI * phi).sin() / (2.0 * PI);
    s / (s * s + width * width).sqrt()
}

/// 1-periodic mask: 0 within `eps` of an integer, 1 beyond `2·eps`, C¹ between.
#[inline]
pub fn dbar(phi: f64, eps: f64) -> f64 {
    let dist = (phi - phi.round()).abs();
    if dist <= eps {
        0.0
    } else if dist >= 2.0 * eps {
        1.0
    } else {
        let t = (dist - eps) / eps;
        t * t * (3.0 - 2.0 * t)
    }
}

/// Half-width of the level band used by [`ReinitReport::band_deviation`].
pub const REPORT_BAND: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReinitReport {
    pub steps: usize,
    /// `max | |Dφ| − 1 |` over nodes within 1/4 of an integer level, after the run.
    pub band_deviation: f64,
    pub smoothing_iterations: usize,
}

/// `G` at every node of one period.
fn g_values_into(g: Grid, direction: [f64; 2], u: &[f64], out: &mut [f64]) {
    let nx = g.nx();
    for (k, o) in out.iter_mut().enumerate() {
        let (i, j) = (k % nx, k / nx);
        *o = direction[0] * g.x(i) + direction[1] * g.y(j) + u[k];
    }
}

/// One Jacobi sweep `φ := (1 − D̄(φ))φ + D̄(φ)·(mean of 4 neighbours)`.
pub fn smooth_sweep(phi: &AffineField, profile: &ReinitProfile) -> AffineField {
    let mut out = vec![0.0; phi.u().len()];
    let mut gv = vec![0.0; phi.u().len()];
    sweep_into(phi.grid(), phi.direction(), phi.u(), profile.eps_band, &mut gv, &mut out);
    phi.with_u(out)
}

fn sweep_into(g: Grid, direction: [f64; 2], u: &[f64], eps: f64, gv: &mut [f64], out: &mut [f64]) {
    g_values_into(g, direction, u, gv);
    let (nx, ny) = (g.nx(), g.ny());
    for j in 0..ny {
        let jm = if j == 0 { ny - 1 } else { j - 1 };
        let jp = if j + 1 == ny { 0 } else { j + 1 };
        for i in 0..nx {
            let im = if i == 0 { nx - 1 } else { i - 1 };
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            let k = j * nx + i;
            let w = dbar(gv[k], eps);
            // affine offsets of opposite neighbours cancel in the average
            let avg = 0.25 * (u[j * nx + ip] + u[j * nx + im] + u[jp * nx + i] + u[jm * nx + i]);
            out[k] = (1.0 - w) * u[k] + w * avg;
        }
    }
}

/// Largest deviation of the central `|Dφ|` from 1 over nodes within `half_width`
/// of an integer level.
pub fn band_deviation(phi: &AffineField, half_width: f64) -> f64 {
    let grad = central_gradient(phi);
    let gv = phi.g_values();
    let mut worst: f64 = 0.0;
    for (k, &v) in gv.iter().enumerate() {
        if (v - v.round()).abs() < half_width {
            let m = (grad.x[k].powi(2) + grad.y[k].powi(2)).sqrt();
            worst = worst.max((m - 1.0).abs());
        }
    }
    worst
}

struct ReinitOperator {
    grid: Grid,
    direction: [f64; 2],
    width: f64,
    scratch: WenoScratch,
    grads: OneSidedGradients,
    gv: Vec<f64>,
}

impl ReinitOperator {
    fn rhs(&mut self, u: &[f64], out: &mut [f64]) {
        weno_derivatives_into(self.grid, u, self.direction, WenoOrder::Five, &mut self.scratch, &mut self.grads);
        g_values_into(self.grid, self.direction, u, &mut self.gv);
        for (k, o) in out.iter_mut().enumerate() {
            let s = sbar(self.gv[k], self.width);
            // Godunov upwinding by the sign of S̄
            *o = s - numerical_hamiltonian([0.0, 0.0], s, self.grads.at(k));
        }
    }
}

/// Advance the reinitialization equation for `pseudo_time` with WENO5/RK3.
pub fn reinit_field(phi: &AffineField, profile: &ReinitProfile, pseudo_time: f64) -> Result<(AffineField, ReinitReport)> {
    profile.validate()?;
    let g = phi.grid();
    check_grid(g, WenoOrder::Five)?;
    if !(pseudo_time >= 0.0 && pseudo_time.is_finite()) {
        return Err(Error::Config(format!("pseudo-time must be nonnegative, got {pseudo_time}")));
    }
    let h = g.hx().min(g.hy());
    let max_dtau = profile.dtau_cells * h;
    let steps = (pseudo_time / max_dtau - 1e-9).ceil().max(0.0) as usize;
    let dtau = if steps > 0 { pseudo_time / steps as f64 } else { 0.0 };
    let n = g.len();
    let mut op = ReinitOperator {
        grid: g,
        direction: phi.direction(),
        width: profile.mollify.unwrap_or(h),
        scratch: WenoScratch::new(g),
        grads: OneSidedGradients::zeros(n),
        gv: vec![0.0; n],
    };
    let mut u = phi.u().to_vec();
    let (mut k, mut u1, mut u2) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut gv = vec![0.0; n];
    for step in 0..steps {
        op.rhs(&u, &mut k);
        for i in 0..n {
            u1[i] = u[i] + dtau * k[i];
        }
        op.rhs(&u1, &mut k);
        for i in 0..n {
            u2[i] = 0.75 * u[i] + 0.25 * (u1[i] + dtau * k[i]);
        }
        op.rhs(&u2, &mut k);
        for i in 0..n {
            u[i] = u[i] / 3.0 + 2.0 / 3.0 * (u2[i] + dtau * k[i]);
        }
        for _ in 0..profile.smooth_iters {
            sweep_into(g, phi.direction(), &u, profile.eps_band, &mut gv, &mut u1);
            std::mem::swap(&mut u, &mut u1);
        }
        if let Some(bad) = u.iter().position(|v| !v.is_finite()) {
            return Err(Error::Integration {
                time: (step + 1) as f64 * dtau,
                reason: format!("reinitialization produced a non-finite value at node {bad}"),
            });
        }
    }
    let out = phi.with_u(u);
    let report = ReinitReport {
        steps,
        band_deviation: band_deviation(&out, REPORT_BAND),
        smoothing_iterations: steps * profile.smooth_iters,
    };
    Ok((out, report))
}

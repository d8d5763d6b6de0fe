//! Direct periodic solves of `(α I − β Δ_h) u = f` by discrete Fourier
//! diagonalization of the 5-point Laplacian.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

/// Eigenvalue of the periodic 5-point Laplacian for Fourier mode `(k, l)`.
pub fn laplacian_eigenvalue(g: Grid, k: usize, l: usize) -> f64 {
    let sx = (PI * k as f64 / g.nx() as f64).sin();
    let sy = (PI * l as f64 / g.ny() as f64).sin();
    -4.0 * sx * sx / (g.hx() * g.hx()) - 4.0 * sy * sy / (g.hy() * g.hy())
}

pub struct PeriodicHelmholtz {
    grid: Grid,
    fx: Arc<dyn Fft<f64>>,
    ifx: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    ify: Arc<dyn Fft<f64>>,
    /// Eigenvalues in transposed (column-major) layout, index `i·ny + l`.
    eig: Vec<f64>,
    rows: Vec<Complex<f64>>,
    cols: Vec<Complex<f64>>,
    work: Vec<Complex<f64>>,
}

impl std::fmt::Debug for PeriodicHelmholtz {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicHelmholtz").field("grid", &self.grid).finish()
    }
}

impl PeriodicHelmholtz {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let (nx, ny) = (grid.nx(), grid.ny());
        let fx = planner.plan_fft_forward(nx);
        let ifx = planner.plan_fft_inverse(nx);
        let fy = planner.plan_fft_forward(ny);
        let ify = planner.plan_fft_inverse(ny);
        let scratch = [&fx, &ifx, &fy, &ify].iter().map(|f| f.get_inplace_scratch_len()).max().unwrap_or(0);
        let mut eig = vec![0.0; grid.len()];
        for i in 0..nx {
            for l in 0..ny {
                eig[i * ny + l] = laplacian_eigenvalue(grid, i, l);
            }
        }
        let zero = Complex::new(0.0, 0.0);
        PeriodicHelmholtz {
            grid,
            fx,
            ifx,
            fy,
            ify,
            eig,
            rows: vec![zero; grid.len()],
            cols: vec![zero; grid.len()],
            work: vec![zero; scratch],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Solve `(α I − β Δ_h) u = f`. Modes whose symbol vanishes (the mean mode when
    /// `α = 0`) are set to zero, which gives the mean-zero pseudo-inverse.
    pub fn solve(&mut self, alpha: f64, beta: f64, f: &[f64], u: &mut [f64]) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        for (c, &v) in self.rows.iter_mut().zip(f) {
            *c = Complex::new(v, 0.0);
        }
        self.fx.process_with_scratch(&mut self.rows, &mut self.work);
        transpose(&self.rows, &mut self.cols, nx, ny);
        self.fy.process_with_scratch(&mut self.cols, &mut self.work);
        let scale = 1.0 / (nx * ny) as f64;
        for (c, &lam) in self.cols.iter_mut().zip(&self.eig) {
            let sym = alpha - beta * lam;
            *c = if sym.abs() > 1e-300 { *c * (scale / sym) } else { Complex::new(0.0, 0.0) };
        }
        self.ify.process_with_scratch(&mut self.cols, &mut self.work);
        transpose(&self.cols, &mut self.rows, ny, nx);
        self.ifx.process_with_scratch(&mut self.rows, &mut self.work);
        for (o, c) in u.iter_mut().zip(&self.rows) {
            *o = c.re;
        }
    }
}

/// `dst[i·rows + j] = src[j·cols + i]` for a `rows × cols` row-major `src`.
fn transpose(src: &[Complex<f64>], dst: &mut [Complex<f64>], cols: usize, rows: usize) {
    for j in 0..rows {
        for i in 0..cols {
            dst[i * rows + j] = src[j * cols + i];
        }
    }
}

//! Hamilton-Jacobi WENO one-sided derivatives (third and fifth order).

use crate::error::{Error, Result};
use crate::grid::{AffineField, Grid};

/// Floor on the smoothness indicators in the nonlinear weights.
pub const WENO_EPS: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WenoOrder {
    Three,
    Five,
}

impl WenoOrder {
    pub fn order(self) -> usize {
        match self {
            WenoOrder::Three => 3,
            WenoOrder::Five => 5,
        }
    }
}

/// Left- and right-biased approximations of `G_x` and `G_y` at every node.
#[derive(Clone, Debug, Default)]
pub struct OneSidedGradients {
    pub px_minus: Vec<f64>,
    pub px_plus: Vec<f64>,
    pub py_minus: Vec<f64>,
    pub py_plus: Vec<f64>,
}

impl OneSidedGradients {
    pub fn zeros(n: usize) -> Self {
        OneSidedGradients {
            px_minus: vec![0.0; n],
            px_plus: vec![0.0; n],
            py_minus: vec![0.0; n],
            py_plus: vec![0.0; n],
        }
    }

    /// `[px⁻, px⁺, py⁻, py⁺]` at node `k`.
    #[inline]
    pub fn at(&self, k: usize) -> [f64; 4] {
        [self.px_minus[k], self.px_plus[k], self.py_minus[k], self.py_plus[k]]
    }

    pub fn len(&self) -> usize {
        self.px_minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.px_minus.is_empty()
    }
}

const THIRD: f64 = 1.0 / 3.0;
const SIXTH: f64 = 1.0 / 6.0;

#[inline(always)]
pub fn weno5(v1: f64, v2: f64, v3: f64, v4: f64, v5: f64) -> f64 {
    let q1 = THIRD * v1 - 7.0 / 6.0 * v2 + 11.0 / 6.0 * v3;
    let q2 = -SIXTH * v2 + 5.0 / 6.0 * v3 + THIRD * v4;
    let q3 = THIRD * v3 + 5.0 / 6.0 * v4 - SIXTH * v5;
    let s1 = 13.0 / 12.0 * (v1 - 2.0 * v2 + v3).powi(2) + 0.25 * (v1 - 4.0 * v2 + 3.0 * v3).powi(2);
    let s2 = 13.0 / 12.0 * (v2 - 2.0 * v3 + v4).powi(2) + 0.25 * (v2 - v4).powi(2);
    let s3 = 13.0 / 12.0 * (v3 - 2.0 * v4 + v5).powi(2) + 0.25 * (3.0 * v3 - 4.0 * v4 + v5).powi(2);
    let a1 = 0.1 / (WENO_EPS + s1).powi(2);
    let a2 = 0.6 / (WENO_EPS + s2).powi(2);
    let a3 = 0.3 / (WENO_EPS + s3).powi(2);
    (a1 * q1 + a2 * q2 + a3 * q3) / (a1 + a2 + a3)
}

/// Third-order reconstruction from differences `a, b, c` ordered away from the
/// upwind side.
#[inline(always)]
pub fn weno3(a: f64, b: f64, c: f64) -> f64 {
    let q0 = 0.5 * (3.0 * b - a);
    let q1 = 0.5 * (b + c);
    let a0 = (1.0 / 3.0) / (WENO_EPS + (b - a).powi(2)).powi(2);
    let a1 = (2.0 / 3.0) / (WENO_EPS + (c - b).powi(2)).powi(2);
    (a0 * q0 + a1 * q1) / (a0 + a1)
}

const PAD: usize = 3;

/// Reconstruct one line. `rows[k][i]` holds the difference `w[i + 1 + k]`, where
/// `w[c]` is `(φ_{c−PAD} − φ_{c−PAD−1})/h`.
#[inline]
fn reconstruct(order: WenoOrder, rows: [&[f64]; 6], minus: &mut [f64], plus: &mut [f64], offset: f64) {
    let n = minus.len();
    let [r0, r1, r2, r3, r4, r5] = rows.map(|r| &r[..n]);
    let plus = &mut plus[..n];
    match order {
        WenoOrder::Five => {
            for i in 0..n {
                minus[i] = offset + weno5(r0[i], r1[i], r2[i], r3[i], r4[i]);
                plus[i] = offset + weno5(r5[i], r4[i], r3[i], r2[i], r1[i]);
            }
        }
        WenoOrder::Three => {
            for i in 0..n {
                minus[i] = offset + weno3(r1[i], r2[i], r3[i]);
                plus[i] = offset + weno3(r4[i], r3[i], r2[i]);
            }
        }
    }
}

/// One-sided WENO derivatives of `G`.
///
/// The reconstruction runs on `u`; the smoothness indicators are invariant under a
/// constant shift of the differences and every candidate stencil reproduces
/// constants, so adding `P` afterwards equals reconstructing `G` itself.
pub fn weno_derivatives(f: &AffineField, order: WenoOrder) -> Result<OneSidedGradients> {
    let g = f.grid();
    check_grid(g, order)?;
    let mut out = OneSidedGradients::zeros(g.len());
    let mut scratch = WenoScratch::new(g);
    weno_derivatives_into(f.grid(), f.u(), f.direction(), order, &mut scratch, &mut out);
    Ok(out)
}

pub fn check_grid(g: Grid, order: WenoOrder) -> Result<()> {
    let need = 2 * order.order();
    if g.nx() < need || g.ny() < need {
        return Err(Error::Config(format!(
            "WENO{} needs at least {need} nodes per axis, grid is {}x{}",
            order.order(),
            g.nx(),
            g.ny()
        )));
    }
    Ok(())
}

/// Reusable buffers for [`weno_derivatives_into`].
#[derive(Clone, Debug)]
pub struct WenoScratch {
    line: Vec<f64>,
    /// `y` differences, `ny + 2·PAD` wrapped rows.
    rows: Vec<f64>,
}

impl WenoScratch {
    pub fn new(g: Grid) -> Self {
        WenoScratch { line: vec![0.0; g.nx() + 2 * PAD], rows: vec![0.0; (g.ny() + 2 * PAD) * g.nx()] }
    }
}

pub fn weno_derivatives_into(
    g: Grid,
    u: &[f64],
    direction: [f64; 2],
    order: WenoOrder,
    scratch: &mut WenoScratch,
    out: &mut OneSidedGradients,
) {
    let (nx, ny) = (g.nx(), g.ny());
    let (ihx, ihy) = (1.0 / g.hx(), 1.0 / g.hy());

    let w = &mut scratch.line;
    for j in 0..ny {
        let row = &u[j * nx..(j + 1) * nx];
        for k in 0..nx {
            let km = if k == 0 { nx - 1 } else { k - 1 };
            w[k + PAD] = (row[k] - row[km]) * ihx;
        }
        for k in 0..PAD {
            w[k] = w[nx + k];
            w[nx + PAD + k] = w[PAD + k];
        }
        let lines = std::array::from_fn(|k| &w[k + 1..k + 1 + nx]);
        let (lo, hi) = (j * nx, (j + 1) * nx);
        reconstruct(order, lines, &mut out.px_minus[lo..hi], &mut out.px_plus[lo..hi], direction[0]);
    }

    let rows = &mut scratch.rows;
    for r in 0..ny + 2 * PAD {
        let j = (r + 2 * ny - PAD) % ny;
        let jm = if j == 0 { ny - 1 } else { j - 1 };
        let (cur, prev) = (&u[j * nx..(j + 1) * nx], &u[jm * nx..(jm + 1) * nx]);
        for ((slot, a), b) in rows[r * nx..(r + 1) * nx].iter_mut().zip(cur).zip(prev) {
            *slot = (a - b) * ihy;
        }
    }
    for j in 0..ny {
        let lines = std::array::from_fn(|k| &rows[(j + 1 + k) * nx..(j + 2 + k) * nx]);
        let (lo, hi) = (j * nx, (j + 1) * nx);
        reconstruct(order, lines, &mut out.py_minus[lo..hi], &mut out.py_plus[lo..hi], direction[1]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exact_on_planar_front() {
        let g = Grid::square(20).unwrap();
        let f = AffineField::planar(g);
        for order in [WenoOrder::Three, WenoOrder::Five] {
            let d = weno_derivatives(&f, order).unwrap();
            for k in 0..g.len() {
                assert_eq!(d.at(k), [1.0, 1.0, 0.0, 0.0]);
            }
        }
    }

    #[test]
    fn exact_on_general_affine() {
        let g = Grid::new(16, 24).unwrap();
        let f = AffineField::zeros(g, [0.6, -0.8]);
        let d = weno_derivatives(&f, WenoOrder::Five).unwrap();
        for k in 0..g.len() {
            let [a, b, c, e] = d.at(k);
            assert!((a - 0.6).abs() < 1e-15 && (b - 0.6).abs() < 1e-15);
            assert!((c + 0.8).abs() < 1e-15 && (e + 0.8).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_tiny_grid_for_weno5() {
        let g = Grid::square(9).unwrap();
        assert!(weno_derivatives(&AffineField::planar(g), WenoOrder::Five).is_err());
        assert!(weno_derivatives(&AffineField::planar(g), WenoOrder::Three).is_ok());
    }

    #[test]
    fn y_direction_mirrors_x_direction() {
        let g = Grid::square(32).unwrap();
        let fx = AffineField::from_fn(g, [0.0, 0.0], |x, _| (2.0 * PI * x).sin() + 0.3 * (4.0 * PI * x).cos());
        let fy = AffineField::from_fn(g, [0.0, 0.0], |_, y| (2.0 * PI * y).sin() + 0.3 * (4.0 * PI * y).cos());
        let dx = weno_derivatives(&fx, WenoOrder::Five).unwrap();
        let dy = weno_derivatives(&fy, WenoOrder::Five).unwrap();
        for j in 0..32 {
            for i in 0..32 {
                assert!((dx.px_minus[g.idx(i, j)] - dy.py_minus[g.idx(j, i)]).abs() < 1e-12);
                assert!((dx.px_plus[g.idx(i, j)] - dy.py_plus[g.idx(j, i)]).abs() < 1e-12);
            }
        }
    }
}

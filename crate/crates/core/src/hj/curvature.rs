//! Mean-curvature and infinity-Laplacian terms from central differences.

use crate::grid::{AffineField, CentralDerivatives, CentralRows, Grid, VectorField};

/// Default floor on `|DG|` in every gradient-normalized denominator.
pub const GRADIENT_FLOOR: f64 = 1e-8;

/// `|DG| div(DG/|DG|) = (Gy²Gxx − 2GxGyGxy + Gx²Gyy) / (Gx² + Gy² + eps²)`.
pub fn curvature_term(f: &AffineField, eps: f64) -> Vec<f64> {
    let d = CentralDerivatives::of(f);
    let mut out = vec![0.0; d.gx.len()];
    curvature_into(&d, eps, &mut out);
    out
}

pub fn curvature_into(d: &CentralDerivatives, eps: f64, out: &mut [f64]) {
    let e2 = eps * eps;
    for (k, o) in out.iter_mut().enumerate() {
        *o = curvature_at(d.gx[k], d.gy[k], d.gxx[k], d.gyy[k], d.gxy[k], e2);
    }
}

#[inline(always)]
fn curvature_at(gx: f64, gy: f64, gxx: f64, gyy: f64, gxy: f64, e2: f64) -> f64 {
    (gy * gy * gxx - 2.0 * gx * gy * gxy + gx * gx * gyy) / (gx * gx + gy * gy + e2)
}

/// [`curvature_into`] from raw `u` in one pass, also storing the central gradient in `p`.
pub fn curvature_gradient_into(g: Grid, direction: [f64; 2], u: &[f64], eps: f64, p: &mut VectorField, out: &mut [f64]) {
    let e2 = eps * eps;
    let nx = g.nx();
    let rows = p.x.chunks_exact_mut(nx).zip(p.y.chunks_exact_mut(nx)).zip(out.chunks_exact_mut(nx));
    for (j, ((px, py), out)) in rows.enumerate() {
        CentralRows::new(g, direction, u, j).for_each(|i, [gx, gy, gxx, gyy, gxy]| {
            px[i] = gx;
            py[i] = gy;
            out[i] = curvature_at(gx, gy, gxx, gyy, gxy, e2);
        });
    }
}

/// `Δ∞G = (Gx²Gxx + 2GxGyGxy + Gy²Gyy) / (Gx² + Gy² + eps²)`.
pub fn infinity_laplacian(f: &AffineField, eps: f64) -> Vec<f64> {
    let d = CentralDerivatives::of(f);
    let mut out = vec![0.0; d.gx.len()];
    infinity_laplacian_into(&d, eps, &mut out);
    out
}

pub fn infinity_laplacian_into(d: &CentralDerivatives, eps: f64, out: &mut [f64]) {
    let e2 = eps * eps;
    for (k, o) in out.iter_mut().enumerate() {
        let (gx, gy) = (d.gx[k], d.gy[k]);
        *o = (gx * gx * d.gxx[k] + 2.0 * gx * gy * d.gxy[k] + gy * gy * d.gyy[k]) / (gx * gx + gy * gy + e2);
    }
}

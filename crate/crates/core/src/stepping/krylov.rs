//! Right-preconditioned BiCGSTAB for the nonsymmetric advection-diffusion systems.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearSolveReport {
    pub iterations: usize,
    /// Final relative residual `‖b − Ax‖ / ‖b‖`, recomputed from scratch.
    pub residual: f64,
    pub tolerance: f64,
}

impl LinearSolveReport {
    pub fn converged(&self) -> bool {
        self.residual <= self.tolerance
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solve `A x = b` starting from the contents of `x`.
///
/// `apply(v, out)` writes `A v`; `precond(r, out)` writes `M⁻¹ r`.
pub fn bicgstab(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut precond: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iters: usize,
) -> Result<LinearSolveReport> {
    let n = b.len();
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(LinearSolveReport { iterations: 0, residual: 0.0, tolerance: tol });
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut r_hat = r.clone();
    let (mut p, mut v) = (vec![0.0; n], vec![0.0; n]);
    let (mut y, mut z, mut s, mut t) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut iterations = 0;
    let mut restarted = false;

    while norm(&r) > tol * bnorm && iterations < max_iters {
        iterations += 1;
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 || omega == 0.0 {
            if restarted {
                break;
            }
            restarted = true;
            r_hat.copy_from_slice(&r);
            p.iter_mut().for_each(|v| *v = 0.0);
            v.iter_mut().for_each(|v| *v = 0.0);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            continue;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for k in 0..n {
            p[k] = r[k] + beta * (p[k] - omega * v[k]);
        }
        precond(&p, &mut y);
        apply(&y, &mut v);
        let rv = dot(&r_hat, &v);
        if rv == 0.0 {
            break;
        }
        alpha = rho / rv;
        for k in 0..n {
            s[k] = r[k] - alpha * v[k];
        }
        if norm(&s) <= tol * bnorm {
            for k in 0..n {
                x[k] += alpha * y[k];
            }
            r.copy_from_slice(&s);
            break;
        }
        precond(&s, &mut z);
        apply(&z, &mut t);
        let tt = dot(&t, &t);
        omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
        for k in 0..n {
            x[k] += alpha * y[k] + omega * z[k];
            r[k] = s[k] - omega * t[k];
        }
    }

    apply(x, &mut t);
    let residual = b.iter().zip(&t).map(|(bi, ti)| (bi - ti).powi(2)).sum::<f64>().sqrt() / bnorm;
    let report = LinearSolveReport { iterations, residual, tolerance: tol };
    if !residual.is_finite() || residual > tol {
        return Err(Error::LinearSolve(report));
    }
    Ok(report)
}

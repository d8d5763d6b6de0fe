//! Monotone numerical Hamiltonians for `V·p + c|p|`.
//!
//! The advection part is upwinded on the sign of each velocity component. The
//! normal part `c|p|` uses the velocity's upwind side when `|V_i|` exceeds `|c|`
//! (the combined characteristic speed then has a definite sign) and a Godunov
//! selection otherwise, flipped when `c < 0`.

use crate::flow::FlowSamples;
use crate::grid::VectorField;

use super::weno::OneSidedGradients;

/// Godunov choice of `p²` for `c|p|` from one-sided values.
#[inline(always)]
pub fn godunov_sq(minus: f64, plus: f64, positive: bool) -> f64 {
    let expanding = minus.max(0.0).powi(2).max(plus.min(0.0).powi(2));
    let contracting = minus.min(0.0).powi(2).max(plus.max(0.0).powi(2));
    if positive {
        expanding
    } else {
        contracting
    }
}

/// Squared component of `p` used by the normal-speed term.
#[inline(always)]
pub fn normal_component_sq(velocity: f64, speed: f64, minus: f64, plus: f64) -> f64 {
    let godunov = godunov_sq(minus, plus, speed >= 0.0);
    let upwind = if velocity > 0.0 { minus * minus } else { plus * plus };
    if velocity.abs() > speed.abs() {
        upwind
    } else {
        godunov
    }
}

#[inline(always)]
fn upwind(velocity: f64, minus: f64, plus: f64) -> f64 {
    velocity * if velocity > 0.0 { minus } else { plus }
}

/// `Ĥ(px⁻, px⁺, py⁻, py⁺)` for `H(p) = V·p + speed·|p|`; `p = [px⁻, px⁺, py⁻, py⁺]`.
#[inline(always)]
pub fn numerical_hamiltonian(v: [f64; 2], speed: f64, p: [f64; 4]) -> f64 {
    let adv = upwind(v[0], p[0], p[1]) + upwind(v[1], p[2], p[3]);
    if speed == 0.0 {
        return adv;
    }
    let nx2 = normal_component_sq(v[0], speed, p[0], p[1]);
    let ny2 = normal_component_sq(v[1], speed, p[2], p[3]);
    adv + speed * (nx2 + ny2).sqrt()
}

/// Strain rate estimate `−p·DV·p / (|p|² + eps²)`, and whether the floor dominates.
#[inline(always)]
pub fn regularized_strain(dv: &[[f64; 2]; 2], p: [f64; 2], eps: f64) -> (f64, bool) {
    let p2 = p[0] * p[0] + p[1] * p[1];
    let q = p[0] * (dv[0][0] * p[0] + dv[0][1] * p[1]) + p[1] * (dv[1][0] * p[0] + dv[1][1] * p[1]);
    (-q / (p2 + eps * eps), p2 < eps * eps)
}

#[derive(Clone, Debug)]
pub struct HamiltonianValue {
    pub values: Vec<f64>,
    /// Local normal speed `s_L − d·Ŝ` (strain model only).
    pub normal_speed: Option<Vec<f64>>,
    /// Nodes where `|p|` fell below the regularization floor.
    pub regularized_nodes: usize,
}

pub fn hamiltonian_inviscid(g: &OneSidedGradients, flow: &FlowSamples, s_l: f64) -> HamiltonianValue {
    let mut values = vec![0.0; g.len()];
    inviscid_into(g, flow, s_l, &mut values);
    HamiltonianValue { values, normal_speed: None, regularized_nodes: 0 }
}

pub fn inviscid_into(g: &OneSidedGradients, flow: &FlowSamples, s_l: f64, out: &mut [f64]) {
    let n = out.len();
    let (pxm, pxp, pym, pyp) = (&g.px_minus[..n], &g.px_plus[..n], &g.py_minus[..n], &g.py_plus[..n]);
    let (v1, v2) = (&flow.v1[..n], &flow.v2[..n]);
    for k in 0..n {
        out[k] = numerical_hamiltonian([v1[k], v2[k]], s_l, [pxm[k], pxp[k], pym[k], pyp[k]]);
    }
}

/// Strain Hamiltonian with `Ŝ` frozen from the central gradient `central_p`.
pub fn hamiltonian_strain(
    g: &OneSidedGradients,
    central_p: &VectorField,
    flow: &FlowSamples,
    s_l: f64,
    d: f64,
    eps: f64,
) -> HamiltonianValue {
    let mut values = vec![0.0; g.len()];
    let mut speed = vec![0.0; g.len()];
    let hits = strain_into(g, central_p, flow, s_l, d, eps, &mut values, Some(&mut speed));
    HamiltonianValue { values, normal_speed: Some(speed), regularized_nodes: hits }
}

#[allow(clippy::too_many_arguments)]
pub fn strain_into(
    g: &OneSidedGradients,
    central_p: &VectorField,
    flow: &FlowSamples,
    s_l: f64,
    d: f64,
    eps: f64,
    out: &mut [f64],
    speed_out: Option<&mut [f64]>,
) -> usize {
    let n = out.len();
    let (pxm, pxp, pym, pyp) = (&g.px_minus[..n], &g.px_plus[..n], &g.py_minus[..n], &g.py_plus[..n]);
    let (cx, cy) = (&central_p.x[..n], &central_p.y[..n]);
    let (v1, v2, dv) = (&flow.v1[..n], &flow.v2[..n], &flow.dv[..n]);
    let mut hits = 0;
    let mut speed = |k: usize| {
        let (s_hat, hit) = regularized_strain(&dv[k], [cx[k], cy[k]], eps);
        hits += hit as usize;
        s_l - d * s_hat
    };
    match speed_out {
        Some(s) => {
            let s = &mut s[..n];
            for k in 0..n {
                s[k] = speed(k);
                out[k] = numerical_hamiltonian([v1[k], v2[k]], s[k], [pxm[k], pxp[k], pym[k], pyp[k]]);
            }
        }
        None => {
            for k in 0..n {
                let c = speed(k);
                out[k] = numerical_hamiltonian([v1[k], v2[k]], c, [pxm[k], pxp[k], pym[k], pyp[k]]);
            }
        }
    }
    hits
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{eval_cellular, strain_rate, FlowSpec};
    use crate::grid::{central_gradient, AffineField, Grid};
    use crate::hj::weno::{weno_derivatives, WenoOrder};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inviscid_examples() {
        assert_eq!(numerical_hamiltonian([0.0, 0.0], 1.0, [3.0, 3.0, 4.0, 4.0]), 5.0);
        assert_eq!(numerical_hamiltonian([2.0, 0.0], 1.0, [1.0, 5.0, 0.0, 0.0]), 3.0);
        assert_eq!(numerical_hamiltonian([0.0, 0.0], 1.0, [-1.0, 1.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn all_velocity_branches() {
        // V1 < -s_L: plus side in both terms
        assert_eq!(numerical_hamiltonian([-2.0, 0.0], 1.0, [1.0, 5.0, 0.0, 0.0]), -10.0 + 5.0);
        // |V1| <= s_L with shock data: Godunov picks the larger
        assert_eq!(numerical_hamiltonian([0.5, 0.0], 1.0, [2.0, -3.0, 0.0, 0.0]), 1.0 + 3.0);
        // V1 exactly s_L stays in the Godunov branch
        assert_eq!(numerical_hamiltonian([1.0, 0.0], 1.0, [-1.0, 1.0, 0.0, 0.0]), -1.0);
    }

    #[test]
    fn strain_flipped_branch() {
        // s_L − d·Ŝ = −1
        assert_eq!(numerical_hamiltonian([0.0, 0.0], -1.0, [-1.0, 2.0, 0.0, 0.0]), -2.0);
        // positive coefficient, same data
        assert_eq!(numerical_hamiltonian([0.0, 0.0], 1.0, [-1.0, 2.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn strain_with_zero_markstein_equals_inviscid() {
        let g = Grid::square(24).unwrap();
        let f = AffineField::from_fn(g, [1.0, 0.0], |x, y| 0.2 * (6.0 * x + 2.0 * y).sin() - 0.4 * (x * 4.0).cos());
        let grads = weno_derivatives(&f, WenoOrder::Five).unwrap();
        let fs = FlowSamples::new(&FlowSpec::cellular(4.0), g);
        let inv = hamiltonian_inviscid(&grads, &fs, 1.0);
        let st = hamiltonian_strain(&grads, &central_gradient(&f), &fs, 1.0, 0.0, 1e-8);
        assert_eq!(inv.values, st.values);
    }

    #[test]
    fn strain_speed_positive_when_markstein_small() {
        let g = Grid::square(64).unwrap();
        let f = AffineField::from_fn(g, [1.0, 0.0], |x, y| 0.3 * (2.0 * std::f64::consts::PI * (x + y)).sin());
        let grads = weno_derivatives(&f, WenoOrder::Five).unwrap();
        let fs = FlowSamples::new(&FlowSpec::cellular(4.0), g);
        let st = hamiltonian_strain(&grads, &central_gradient(&f), &fs, 1.0, 0.01, 1e-8);
        assert!(st.normal_speed.unwrap().iter().all(|&c| c > 0.0));
        assert_eq!(st.regularized_nodes, 0);
    }

    fn random_p(rng: &mut ChaCha8Rng) -> [f64; 4] {
        [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)]
    }

    #[test]
    fn consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let v = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
            let c = rng.gen_range(-3.0..3.0);
            let (px, py) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let h = numerical_hamiltonian(v, c, [px, px, py, py]);
            let exact = v[0] * px + v[1] * py + c * (px * px + py * py).sqrt();
            assert!((h - exact).abs() <= 1e-14 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn monotone_under_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let delta = 1e-6;
        for _ in 0..1000 {
            let v = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
            let c = rng.gen_range(-3.0..3.0);
            let p = random_p(&mut rng);
            let h0 = numerical_hamiltonian(v, c, p);
            for (slot, sign) in [(0, 1.0), (1, -1.0), (2, 1.0), (3, -1.0)] {
                let mut q = p;
                q[slot] += delta;
                let dh = numerical_hamiltonian(v, c, q) - h0;
                assert!(sign * dh >= -1e-12, "slot {slot}: v={v:?} c={c} p={p:?} dh={dh}");
            }
        }
    }

    #[test]
    fn regularized_strain_matches_exact_away_from_zero() {
        let s = eval_cellular([0.1, 0.3], 2.0);
        let p = [0.7, -0.4];
        let (r, hit) = regularized_strain(&s.dv, p, 1e-8);
        assert!(!hit);
        assert!((r - strain_rate(&s, p).unwrap()).abs() < 1e-12);
        let (r0, hit0) = regularized_strain(&s.dv, [0.0, 0.0], 1e-8);
        assert!(hit0 && r0 == 0.0);
    }
}

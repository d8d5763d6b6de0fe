//! Fixtures shared by the kernel benchmarks.

use std::f64::consts::PI;

use gfront::{AffineField, Grid};

/// A wrinkled front `G = x1 + 0.1 sin(2πy) + 0.05 cos(4π(x + y))` on an `n × n` grid.
pub fn wrinkled_front(n: usize) -> AffineField {
    let g = Grid::square(n).expect("grid");
    AffineField::from_fn(g, [1.0, 0.0], |x, y| 0.1 * (2.0 * PI * y).sin() + 0.05 * (4.0 * PI * (x + y)).cos())
}

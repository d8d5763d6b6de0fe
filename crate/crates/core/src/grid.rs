//! Uniform periodic grids on the unit torus and affine-periodic level-set fields.
//!
//! A front moving in direction `P` is represented by `G(x) = P·x + u(x)` with `u`
//! periodic in both axes, so `G(x + z) = G(x) + P·z` for integer `z`. Storage is
//! nodal (`x_i = i·hx`, `y_j = j·hy`), row-major with `y` outer and `x` inner.
//!
//! Every derivative operator here works on `u` with a periodic wrap and adds the
//! constant gradient `P` afterwards. Because the linear part is reproduced exactly
//! by any consistent difference stencil, this is identical to differencing `G`
//! across the seam with the `P·z` offset applied.

use crate::error::{Error, Result};

/// Values within this distance of an integer are treated as that integer by
/// [`snapped_floor`].
pub const FLOOR_SNAP: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    nx: usize,
    ny: usize,
}

impl Grid {
    pub const MIN_CELLS: usize = 8;

    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < Self::MIN_CELLS || ny < Self::MIN_CELLS {
            return Err(Error::GridTooSmall { nx, ny, min: Self::MIN_CELLS });
        }
        Ok(Grid { nx, ny })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn hx(&self) -> f64 {
        1.0 / self.nx as f64
    }

    #[inline]
    pub fn hy(&self) -> f64 {
        1.0 / self.ny as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Flat index of node `(i, j)` with both indices wrapped onto the torus.
    #[inline]
    pub fn wrap(&self, i: isize, j: isize) -> usize {
        let i = i.rem_euclid(self.nx as isize) as usize;
        let j = j.rem_euclid(self.ny as isize) as usize;
        self.idx(i, j)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy()
    }

    /// Node coordinates in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> {
        let g = *self;
        (0..g.ny).flat_map(move |j| (0..g.nx).map(move |i| (i, j, g.x(i), g.y(j))))
    }

    /// Nearest node to a point of the torus.
    pub fn nearest_node(&self, p: [f64; 2]) -> (usize, usize) {
        let i = (p[0] * self.nx as f64).round() as isize;
        let j = (p[1] * self.ny as f64).round() as isize;
        (
            i.rem_euclid(self.nx as isize) as usize,
            j.rem_euclid(self.ny as isize) as usize,
        )
    }
}

/// Level-set function `G(x) = P·x + u(x)` with periodic `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineField {
    grid: Grid,
    direction: [f64; 2],
    u: Vec<f64>,
}

impl AffineField {
    pub fn zeros(grid: Grid, direction: [f64; 2]) -> Self {
        AffineField { grid, direction, u: vec![0.0; grid.len()] }
    }

    /// The planar initial front `G = x1` (`u ≡ 0`, `P = e1`).
    pub fn planar(grid: Grid) -> Self {
        Self::zeros(grid, [1.0, 0.0])
    }

    pub fn from_fn(grid: Grid, direction: [f64; 2], f: impl Fn(f64, f64) -> f64) -> Self {
        let u = grid.nodes().map(|(_, _, x, y)| f(x, y)).collect();
        AffineField { grid, direction, u }
    }

    pub fn from_values(grid: Grid, direction: [f64; 2], u: Vec<f64>) -> Result<Self> {
        if u.len() != grid.len() {
            return Err(Error::FieldSize { expected: grid.len(), got: u.len() });
        }
        Ok(AffineField { grid, direction, u })
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn direction(&self) -> [f64; 2] {
        self.direction
    }

    #[inline]
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    #[inline]
    pub fn u_mut(&mut self) -> &mut [f64] {
        &mut self.u
    }

    pub fn into_u(self) -> Vec<f64> {
        self.u
    }

    /// Same grid and direction, new periodic part.
    pub fn with_u(&self, u: Vec<f64>) -> Self {
        debug_assert_eq!(u.len(), self.grid.len());
        AffineField { grid: self.grid, direction: self.direction, u }
    }

    /// `G` at node `(i, j)`; indices outside one period pick up the affine offset.
    #[inline]
    pub fn g(&self, i: isize, j: isize) -> f64 {
        let g = &self.grid;
        self.u[g.wrap(i, j)]
            + self.direction[0] * i as f64 * g.hx()
            + self.direction[1] * j as f64 * g.hy()
    }

    pub fn g_values(&self) -> Vec<f64> {
        self.grid
            .nodes()
            .map(|(i, j, _, _)| self.g(i as isize, j as isize))
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|v| v.is_finite())
    }

    pub fn mean_u(&self) -> f64 {
        self.u.iter().sum::<f64>() / self.u.len() as f64
    }
}

/// A pair of nodal component arrays.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl VectorField {
    pub fn at(&self, k: usize) -> [f64; 2] {
        [self.x[k], self.y[k]]
    }
}

/// Second-order central first and second derivatives of `G` at every node.
#[derive(Clone, Debug)]
pub struct CentralDerivatives {
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    pub gxx: Vec<f64>,
    pub gyy: Vec<f64>,
    pub gxy: Vec<f64>,
}

impl CentralDerivatives {
    pub fn of(f: &AffineField) -> Self {
        Self::of_raw(f.grid(), f.direction(), f.u())
    }

    /// Derivatives of `P·x + u` for a raw nodal array `u`.
    pub fn of_raw(g: Grid, direction: [f64; 2], u: &[f64]) -> Self {
        let mut out = Self::zeros(g.len());
        out.compute_raw(g, direction, u);
        out
    }

    pub fn zeros(n: usize) -> Self {
        CentralDerivatives { gx: vec![0.0; n], gy: vec![0.0; n], gxx: vec![0.0; n], gyy: vec![0.0; n], gxy: vec![0.0; n] }
    }

    /// In-place [`CentralDerivatives::of_raw`]; the buffers must have `g.len()` entries.
    pub fn compute_raw(&mut self, g: Grid, direction: [f64; 2], u: &[f64]) {
        let nx = g.nx();
        let rows = self
            .gx
            .chunks_exact_mut(nx)
            .zip(self.gy.chunks_exact_mut(nx))
            .zip(self.gxx.chunks_exact_mut(nx))
            .zip(self.gyy.chunks_exact_mut(nx))
            .zip(self.gxy.chunks_exact_mut(nx));
        for (j, ((((gx, gy), gxx), gyy), gxy)) in rows.enumerate() {
            CentralRows::new(g, direction, u, j).for_each(|i, d| {
                gx[i] = d[0];
                gy[i] = d[1];
                gxx[i] = d[2];
                gyy[i] = d[3];
                gxy[i] = d[4];
            });
        }
    }
}

/// Row `j` of `u` with its wrapped neighbours, for central differences of `P·x + u`.
pub struct CentralRows<'a> {
    row: &'a [f64],
    north: &'a [f64],
    south: &'a [f64],
    direction: [f64; 2],
    /// `1/(2hx), 1/(2hy), 1/hx², 1/hy², 1/(4hx·hy)`
    scale: [f64; 5],
}

impl<'a> CentralRows<'a> {
    pub fn new(g: Grid, direction: [f64; 2], u: &'a [f64], j: usize) -> Self {
        let (nx, ny) = (g.nx(), g.ny());
        let (hx, hy) = (g.hx(), g.hy());
        let jm = if j == 0 { ny - 1 } else { j - 1 };
        let jp = if j + 1 == ny { 0 } else { j + 1 };
        CentralRows {
            row: &u[j * nx..(j + 1) * nx],
            north: &u[jp * nx..(jp + 1) * nx],
            south: &u[jm * nx..(jm + 1) * nx],
            direction,
            scale: [0.5 / hx, 0.5 / hy, 1.0 / (hx * hx), 1.0 / (hy * hy), 0.25 / (hx * hy)],
        }
    }

    /// `[Gx, Gy, Gxx, Gyy, Gxy]` at column `i`, with neighbours `im` and `ip`.
    #[inline(always)]
    fn at(&self, i: usize, im: usize, ip: usize) -> [f64; 5] {
        let (row, north, south) = (self.row, self.north, self.south);
        let (c, e, w) = (row[i], row[ip], row[im]);
        let (nn, s) = (north[i], south[i]);
        let [cx, cy, cxx, cyy, cxy] = self.scale;
        [
            self.direction[0] + (e - w) * cx,
            self.direction[1] + (nn - s) * cy,
            (e - 2.0 * c + w) * cxx,
            (nn - 2.0 * c + s) * cyy,
            (north[ip] - north[im] - south[ip] + south[im]) * cxy,
        ]
    }

    /// Calls `visit(i, [Gx, Gy, Gxx, Gyy, Gxy])` for every column.
    #[inline(always)]
    pub fn for_each(&self, mut visit: impl FnMut(usize, [f64; 5])) {
        let nx = self.row.len();
        visit(0, self.at(0, nx - 1, 1));
        for i in 1..nx - 1 {
            visit(i, self.at(i, i - 1, i + 1));
        }
        visit(nx - 1, self.at(nx - 1, nx - 2, 0));
    }
}

/// Central-difference gradient of `G`, including the constant `P`.
pub fn central_gradient(f: &AffineField) -> VectorField {
    let g = f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (hx, hy) = (g.hx(), g.hy());
    let [p1, p2] = f.direction();
    let u = f.u();
    let mut gx = vec![0.0; g.len()];
    let mut gy = vec![0.0; g.len()];
    for j in 0..ny {
        let jm = if j == 0 { ny - 1 } else { j - 1 };
        let jp = if j + 1 == ny { 0 } else { j + 1 };
        for i in 0..nx {
            let im = if i == 0 { nx - 1 } else { i - 1 };
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            let k = j * nx + i;
            gx[k] = p1 + (u[j * nx + ip] - u[j * nx + im]) / (2.0 * hx);
            gy[k] = p2 + (u[jp * nx + i] - u[jm * nx + i]) / (2.0 * hy);
        }
    }
    VectorField { x: gx, y: gy }
}

/// 5-point Laplacian of `G` (equal to that of `u`; the affine part is harmonic).
pub fn laplacian(f: &AffineField) -> Vec<f64> {
    let mut out = vec![0.0; f.grid().len()];
    laplacian_into(f.grid(), f.u(), &mut out);
    out
}

/// 5-point periodic Laplacian of a raw nodal array.
pub fn laplacian_into(g: Grid, u: &[f64], out: &mut [f64]) {
    let (nx, ny) = (g.nx(), g.ny());
    let ihx2 = 1.0 / (g.hx() * g.hx());
    let ihy2 = 1.0 / (g.hy() * g.hy());
    for j in 0..ny {
        let jm = if j == 0 { ny - 1 } else { j - 1 };
        let jp = if j + 1 == ny { 0 } else { j + 1 };
        for i in 0..nx {
            let im = if i == 0 { nx - 1 } else { i - 1 };
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            let c = u[j * nx + i];
            out[j * nx + i] = (u[j * nx + ip] - 2.0 * c + u[j * nx + im]) * ihx2
                + (u[jp * nx + i] - 2.0 * c + u[jm * nx + i]) * ihy2;
        }
    }
}

/// `floor(v)`, except that values within [`FLOOR_SNAP`] of an integer `k` give `k`.
#[inline]
pub fn snapped_floor(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() < FLOOR_SNAP {
        r
    } else {
        v.floor()
    }
}

/// Nodal average of `floor(G)` over the unit cell.
///
/// The floors are integers, so they are summed exactly in `i64` and the result is
/// independent of summation order.
pub fn floor_integral(f: &AffineField) -> f64 {
    let g = f.grid();
    let [p1, p2] = f.direction();
    let mut total: i64 = 0;
    for (j, row) in f.u().chunks_exact(g.nx()).enumerate() {
        let offset = p2 * j as f64 * g.hy();
        for (i, &u) in row.iter().enumerate() {
            total += snapped_floor(u + p1 * i as f64 * g.hx() + offset) as i64;
        }
    }
    total as f64 / g.len() as f64
}

/// Largest absolute central-difference gradient component of `u`.
pub fn max_abs_du(f: &AffineField) -> f64 {
    let grad = central_gradient(f);
    let [p1, p2] = f.direction();
    grad.x
        .iter()
        .zip(&grad.y)
        .map(|(gx, gy)| ((gx - p1).powi(2) + (gy - p2).powi(2)).sqrt())
        .fold(0.0, f64::max)
}

/// Largest central-difference `|DG|`.
pub fn max_gradient(f: &AffineField) -> f64 {
    let grad = central_gradient(f);
    grad.x.iter().zip(&grad.y).map(|(gx, gy)| gx.hypot(*gy)).fold(0.0, f64::max)
}

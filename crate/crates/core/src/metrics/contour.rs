//! Marching-squares extraction of `{G = 0}` over a strip of periods.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grid::AffineField;

pub type Polyline = Vec<[f64; 2]>;

/// Widest strip, in periods, that [`extract_zero_level`] will scan.
pub const MAX_STRIP_PERIODS: i32 = 64;

/// Grid edge: `(vertical, i, j)` for the edge leaving node `(i, j)` in `+x`
/// (`vertical = false`) or `+y` (`vertical = true`).
type EdgeKey = (bool, isize, isize);

/// Zero contour of `G` on `[a, b] × [0, 1]`, tiling `u` periodically in `x`.
///
/// Vertices are linear interpolants along cell edges. Saddle cells are split by
/// the sign of the cell-centre average.
pub fn extract_zero_level(f: &AffineField, a: i32, b: i32) -> Result<Vec<Polyline>> {
    if a >= b {
        return Err(Error::Domain(format!("empty strip [{a}, {b}]")));
    }
    if b as i64 - a as i64 > MAX_STRIP_PERIODS as i64 {
        return Err(Error::Domain(format!("strip [{a}, {b}] is wider than {MAX_STRIP_PERIODS} periods")));
    }
    let g = f.grid();
    let (nx, ny) = (g.nx() as isize, g.ny() as isize);
    let (hx, hy) = (g.hx(), g.hy());
    let (i0, i1) = (a as isize * nx, b as isize * nx);
    let val = |i: isize, j: isize| f.g(i, j);

    let mut vertex: HashMap<EdgeKey, [f64; 2]> = HashMap::new();
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    let mut crossing = |key: EdgeKey| -> Option<EdgeKey> {
        let (vertical, i, j) = key;
        let (p, q) = if vertical { ((i, j), (i, j + 1)) } else { ((i, j), (i + 1, j)) };
        let (gp, gq) = (val(p.0, p.1), val(q.0, q.1));
        if (gp >= 0.0) == (gq >= 0.0) {
            return None;
        }
        vertex.entry(key).or_insert_with(|| {
            let t = gp / (gp - gq);
            let (x0, y0) = (p.0 as f64 * hx, p.1 as f64 * hy);
            if vertical {
                [x0, y0 + t * hy]
            } else {
                [x0 + t * hx, y0]
            }
        });
        Some(key)
    };

    for j in 0..ny {
        for i in i0..i1 {
            // edges: bottom, right, top, left
            let keys = [(false, i, j), (true, i + 1, j), (false, i, j + 1), (true, i, j)];
            let hits: Vec<Option<EdgeKey>> = keys.iter().map(|&k| crossing(k)).collect();
            let found: Vec<EdgeKey> = hits.iter().flatten().copied().collect();
            match found.len() {
                0 => {}
                2 => segments.push((found[0], found[1])),
                4 => {
                    let c0 = val(i, j);
                    let centre = 0.25 * (c0 + val(i + 1, j) + val(i + 1, j + 1) + val(i, j + 1));
                    if (centre >= 0.0) == (c0 >= 0.0) {
                        // corners 0 and 2 joined through the centre: cut off corners 1 and 3
                        segments.push((keys[0], keys[1]));
                        segments.push((keys[2], keys[3]));
                    } else {
                        segments.push((keys[3], keys[0]));
                        segments.push((keys[1], keys[2]));
                    }
                }
                _ => unreachable!("a square has an even number of sign changes"),
            }
        }
    }
    Ok(chain(&segments, &vertex))
}

fn chain(segments: &[(EdgeKey, EdgeKey)], vertex: &HashMap<EdgeKey, [f64; 2]>) -> Vec<Polyline> {
    let mut adj: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (s, &(p, q)) in segments.iter().enumerate() {
        adj.entry(p).or_default().push(s);
        adj.entry(q).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();
    let walk = |start_key: EdgeKey, used: &mut Vec<bool>| -> Polyline {
        let mut line = vec![vertex[&start_key]];
        let mut key = start_key;
        while let Some(&s) = adj[&key].iter().find(|&&s| !used[s]) {
            used[s] = true;
            let (p, q) = segments[s];
            key = if p == key { q } else { p };
            line.push(vertex[&key]);
        }
        line
    };
    // open polylines first, starting from their ends, in a deterministic order
    let mut ends: Vec<EdgeKey> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(k, _)| *k).collect();
    ends.sort();
    for k in ends {
        if adj[&k].iter().any(|&s| !used[s]) {
            out.push(walk(k, &mut used));
        }
    }
    for s in 0..segments.len() {
        if !used[s] {
            out.push(walk(segments[s].0, &mut used));
        }
    }
    out
}

/// CSV of polyline vertices: `polyline,x,y`.
pub fn contour_csv(lines: &[Polyline]) -> String {
    let mut s = String::from("polyline,x,y\n");
    for (k, line) in lines.iter().enumerate() {
        for p in line {
            s += &format!("{k},{:.12e},{:.12e}\n", p[0], p[1]);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::PI;

    #[test]
    fn vertical_line() {
        let g = Grid::square(20).unwrap();
        let f = AffineField::from_fn(g, [1.0, 0.0], |_, _| -0.33);
        let lines = extract_zero_level(&f, 0, 1).unwrap();
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].len(), 21);
        for p in &lines[0] {
            assert!((p[0] - 0.33).abs() < 1e-12);
        }
    }

    #[test]
    fn wavy_front_matches_analytic_curve() {
        let g = Grid::square(64).unwrap();
        let f = AffineField::from_fn(g, [1.0, 0.0], |_, y| -0.5 + 0.1 * (2.0 * PI * y).sin());
        let lines = extract_zero_level(&f, 0, 1).unwrap();
        assert_eq!(lines.len(), 1);
        for p in &lines[0] {
            assert!((p[0] - (0.5 - 0.1 * (2.0 * PI * p[1]).sin())).abs() < g.hx());
        }
    }

    #[test]
    fn oversized_strip_is_refused() {
        let f = AffineField::from_fn(Grid::square(10).unwrap(), [1.0, 0.0], |_, _| 0.0);
        assert!(matches!(extract_zero_level(&f, 0, MAX_STRIP_PERIODS + 1), Err(Error::Domain(_))));
        assert!(extract_zero_level(&f, 0, MAX_STRIP_PERIODS).is_ok());
    }

    #[test]
    fn strip_tiling() {
        // {G = 0} on [1, 2] is {G = −1} on [0, 1] shifted by one period
        let g = Grid::square(32).unwrap();
        let wave = |x: f64, y: f64| -1.0 + 0.9 * (2.0 * PI * y).sin() + 0.05 * (2.0 * PI * x).cos();
        let f = AffineField::from_fn(g, [1.0, 0.0], wave);
        let f_minus = AffineField::from_fn(g, [1.0, 0.0], move |x, y| wave(x, y) + 1.0);
        let two: Vec<[f64; 2]> = extract_zero_level(&f, 0, 2).unwrap().into_iter().flatten().collect();
        let mut expected: Vec<[f64; 2]> = extract_zero_level(&f, 0, 1).unwrap().into_iter().flatten().collect();
        let shifted: Vec<[f64; 2]> = extract_zero_level(&f_minus, 0, 1).unwrap().into_iter().flatten().collect();
        assert!(!expected.is_empty() && !shifted.is_empty());
        expected.extend(shifted.iter().map(|p| [p[0] + 1.0, p[1]]));
        for p in &two {
            assert!(expected.iter().any(|q| (p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12));
        }
        for q in &expected {
            assert!(two.iter().any(|p| (p[0] - q[0]).abs() < 1e-12 && (p[1] - q[1]).abs() < 1e-12));
        }
    }

    #[test]
    fn vertices_interpolate_zero() {
        let g = Grid::square(24).unwrap();
        let f = AffineField::from_fn(g, [1.0, 0.0], |x, y| 0.3 * (2.0 * PI * x).sin() * (2.0 * PI * y).cos() - 0.5);
        for line in extract_zero_level(&f, -1, 2).unwrap() {
            for p in line {
                let (fi, fj) = (p[0] / g.hx(), p[1] / g.hy());
                let on_vertical = (fi - fi.round()).abs() < 1e-9;
                let on_horizontal = (fj - fj.round()).abs() < 1e-9;
                assert!(on_vertical || on_horizontal);
                let (i, j) = (fi.floor() as isize, fj.floor() as isize);
                let v = if on_vertical {
                    let i = fi.round() as isize;
                    let t = fj - j as f64;
                    f.g(i, j) + t * (f.g(i, j + 1) - f.g(i, j))
                } else {
                    let j = fj.round() as isize;
                    let t = fi - i as f64;
                    f.g(i, j) + t * (f.g(i + 1, j) - f.g(i, j))
                };
                assert!(v.abs() < 1e-12, "{v}");
            }
        }
    }

    #[test]
    fn saddle_uses_centre_value() {
        let g = Grid::square(8).unwrap();
        let mut u = vec![1.0; g.len()];
        // checkerboard around cell (2,2) with a positive centre
        u[g.idx(2, 2)] = 1.0;
        u[g.idx(3, 2)] = -0.5;
        u[g.idx(3, 3)] = 1.0;
        u[g.idx(2, 3)] = -0.5;
        let f = AffineField::from_values(g, [0.0, 0.0], u).unwrap();
        let lines = extract_zero_level(&f, 0, 1).unwrap();
        // each negative corner is enclosed by its own closed loop
        assert_eq!(lines.len(), 2);
        for l in &lines {
            assert_eq!(l.first(), l.last());
        }
    }
}

//! Plain-text field snapshots.
//!
//! Header `gfront-field v1 nx ny time P1 P2`, then `ny` lines of `nx` values of
//! `u` (y outer, x inner) printed with 17 significant digits.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::grid::{AffineField, Grid};

const MAGIC: &str = "gfront-field";
const VERSION: &str = "v1";

pub fn write_snapshot<W: Write>(mut w: W, field: &AffineField, time: f64) -> Result<()> {
    let g = field.grid();
    let [p1, p2] = field.direction();
    writeln!(
        w,
        "{MAGIC} {VERSION} {} {} {} {} {}",
        g.nx(),
        g.ny(),
        fmt17(time),
        fmt17(p1),
        fmt17(p2)
    )?;
    let mut line = String::new();
    for row in field.u().chunks(g.nx()) {
        line.clear();
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&fmt17(*v));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_snapshot<R: BufRead>(r: R) -> Result<(AffineField, f64)> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty snapshot".into()))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 7 || parts[0] != MAGIC || parts[1] != VERSION {
        return Err(Error::Parse(format!("bad snapshot header: {header:?}")));
    }
    let nx: usize = parse(parts[2])?;
    let ny: usize = parse(parts[3])?;
    let time: f64 = parse(parts[4])?;
    let p1: f64 = parse(parts[5])?;
    let p2: f64 = parse(parts[6])?;
    let grid = Grid::new(nx, ny)?;
    let mut u = Vec::with_capacity(grid.len());
    for j in 0..ny {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("snapshot truncated at row {j}")))??;
        let before = u.len();
        for tok in line.split_whitespace() {
            u.push(parse::<f64>(tok)?);
        }
        if u.len() - before != nx {
            return Err(Error::Parse(format!("row {j} has {} values, expected {nx}", u.len() - before)));
        }
    }
    Ok((AffineField::from_values(grid, [p1, p2], u)?, time))
}

/// Shortest-roundtrip is not enough for a fixed-width format; 17 significant
/// digits reproduce every f64 exactly.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("cannot parse {s:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = Grid::new(8, 9).unwrap();
        let f = AffineField::planar(g);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f, 0.5).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "gfront-field v1 8 9 5.0000000000000000e-1 1.0000000000000000e0 0.0000000000000000e0"
        );
        assert_eq!(lines.count(), 9);
    }

    #[test]
    fn rejects_bad_header() {
        let err = read_snapshot("gfront-field v2 8 8 0 1 0\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(vals in prop::collection::vec(-1e6f64..1e6, 64), t in 0.0f64..100.0) {
            let g = Grid::new(8, 8).unwrap();
            let f = AffineField::from_values(g, [1.0, 0.0], vals).unwrap();
            let mut buf = Vec::new();
            write_snapshot(&mut buf, &f, t).unwrap();
            let (back, t2) = read_snapshot(buf.as_slice()).unwrap();
            prop_assert_eq!(back, f);
            prop_assert_eq!(t2.to_bits(), t.to_bits());
        }
    }
}

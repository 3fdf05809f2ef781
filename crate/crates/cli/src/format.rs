//! Output formats: fixed-precision floats, grid files, matrix triplets and CSV tables.

use std::io::{self, Write};

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;
use zerostab_core::operators::BandedLowerMatrix;
use zerostab_core::Grid;

/// `x` as `%.15e`: 16 significant digits, signed exponent with at least two
/// digits. Non-finite values become `null`.
pub fn sci(x: f64) -> String {
    if !x.is_finite() {
        return "null".to_string();
    }
    let s = format!("{x:.15e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// A float serialized through [`sci`], so JSON reports are byte-stable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sci(pub f64);

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(sci(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl From<f64> for Sci {
    fn from(x: f64) -> Self {
        Sci(x)
    }
}

pub fn sci_vec(xs: &[f64]) -> Vec<Sci> {
    xs.iter().copied().map(Sci).collect()
}

/// Grid as CSV with columns `n,t,h,r,v`. `h`, `r` and `v` are blank where
/// undefined (the last node has no step, the first step no ratio).
pub fn write_grid_csv<W: Write>(grid: &Grid, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "t", "h", "r", "v"])?;
    let h = grid.steps();
    let r = grid.ratios();
    let v = grid.increments();
    for (n, &t) in grid.times().iter().enumerate() {
        let step = h.get(n).map(|&x| sci(x)).unwrap_or_default();
        let (ratio, inc) = match n.checked_sub(1).and_then(|m| r.get(m).zip(v.get(m))) {
            Some((&a, &b)) => (sci(a), sci(b)),
            None => (String::new(), String::new()),
        };
        w.write_record([n.to_string(), sci(t), step, ratio, inc])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct GridJson {
    schema: u32,
    n: usize,
    t: Vec<Sci>,
    h: Vec<Sci>,
    r: Vec<Sci>,
    v: Vec<Sci>,
}

/// Grid as JSON with arrays `t` (N+1), `h` (N), `r` and `v` (N-1).
pub fn grid_json(grid: &Grid) -> String {
    let doc = GridJson {
        schema: 1,
        n: grid.len(),
        t: sci_vec(grid.times()),
        h: sci_vec(grid.steps()),
        r: sci_vec(grid.ratios()),
        v: sci_vec(grid.increments()),
    };
    serde_json::to_string_pretty(&doc).expect("grid serializes") + "\n"
}

/// Nonzero entries as `row col value` lines, 0-based.
pub fn write_triplets<W: Write>(m: &BandedLowerMatrix, mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "# {} x {} lower triangular, bandwidth {}",
        m.dim(),
        m.dim(),
        m.bandwidth()
    )?;
    for (i, j, x) in m.triplets() {
        writeln!(out, "{i} {j} {}", sci(*x))?;
    }
    Ok(())
}

/// Writes a header and rows as CSV into a string.
pub fn csv_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent() {
        assert_eq!(sci(1.0), "1.000000000000000e+00");
        assert_eq!(sci(-0.0025), "-2.500000000000000e-03");
        assert_eq!(sci(1.5 * 2f64.powi(400)), "3.873374817130363e+120");
        assert_eq!(sci(0.0), "0.000000000000000e+00");
        assert_eq!(sci(f64::NAN), "null");
        assert_eq!(sci(f64::INFINITY), "null");
    }

    #[test]
    fn sci_is_valid_json() {
        let s = serde_json::to_string(&vec![Sci(0.5), Sci(f64::NAN)]).unwrap();
        assert_eq!(s, "[5.000000000000000e-01,null]");
        let back: Vec<Option<f64>> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![Some(0.5), None]);
    }

    #[test]
    fn grid_csv_columns() {
        let g = Grid::uniform(2).unwrap();
        let mut buf = Vec::new();
        write_grid_csv(&g, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,t,h,r,v");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(",,"));
        assert!(lines[2].contains("1.000000000000000e+00,0.000000000000000e+00"));
        assert!(lines[3].ends_with(",,,"));
    }

    #[test]
    fn triplets_skip_zeros() {
        let m = BandedLowerMatrix::toeplitz(&[-1.0, 1.0], 3).unwrap();
        let mut buf = Vec::new();
        write_triplets(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 5);
    }
}

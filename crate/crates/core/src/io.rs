//! Self-describing text dumps of complex matrices, for cross-checking
//! operators against external tools.
//!
//! Format: any number of sections, each
//!
//! ```text
//! matrix <NAME> <rows> <cols>
//! <re> <im> <re> <im> ...   (one line per row, row-major)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Entries are written
//! with 17 significant digits so a round trip is exact.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

pub fn write_matrices<W: Write>(w: &mut W, entries: &[(&str, &CMat)]) -> Result<()> {
    writeln!(w, "# complex matrix dump, row-major (re im) pairs")?;
    for (name, m) in entries {
        writeln!(w, "matrix {} {} {}", name, m.nrows(), m.ncols())?;
        for r in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols())
                .map(|s| format!("{:.16e} {:.16e}", m[(r, s)].re, m[(r, s)].im))
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
    }
    Ok(())
}

pub fn read_matrices<R: BufRead>(r: R) -> Result<Vec<(String, CMat)>> {
    let bad = |line: &str| Error::InvalidState(format!("malformed matrix dump line: '{line}'"));
    let mut out: Vec<(String, CMat)> = Vec::new();
    let mut rows_left = 0usize;
    let mut row = 0usize;
    for line in r.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("matrix ") {
            if rows_left > 0 {
                return Err(bad(trimmed));
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let [name, nr, nc] = parts[..] else {
                return Err(bad(trimmed));
            };
            let nr: usize = nr.parse().map_err(|_| bad(trimmed))?;
            let nc: usize = nc.parse().map_err(|_| bad(trimmed))?;
            out.push((name.to_string(), CMat::zeros(nr, nc)));
            rows_left = nr;
            row = 0;
        } else {
            let (_, m) = out.last_mut().ok_or_else(|| bad(trimmed))?;
            if rows_left == 0 {
                return Err(bad(trimmed));
            }
            let vals: Vec<f64> = trimmed
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad(trimmed)))
                .collect::<Result<_>>()?;
            if vals.len() != 2 * m.ncols() {
                return Err(bad(trimmed));
            }
            for s in 0..m.ncols() {
                m[(row, s)] = c(vals[2 * s], vals[2 * s + 1]);
            }
            row += 1;
            rows_left -= 1;
        }
    }
    if rows_left > 0 {
        return Err(Error::InvalidState("matrix dump truncated".into()));
    }
    Ok(out)
}

/// Fixed 12-significant-digit rendering used for all emitted tables.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000000e0".into();
    }
    format!("{x:.11e}")
}

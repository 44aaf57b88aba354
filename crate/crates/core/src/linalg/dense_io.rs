//! Text format for explicit dense unitaries.
//!
//! One matrix row per line, entries separated by commas, each entry written
//! as `re+imj` or `re-imj` (e.g. `0.5+0j, -0.5-0.25j`). A bare real number
//! is read as having zero imaginary part. Blank lines and lines starting
//! with `#` are ignored. The row count fixes `N`; every row must have `N`
//! entries.

use std::fmt::Write as _;
use std::io::BufRead;
use std::path::Path;

use num_complex::Complex64;

use super::unitary::ImplicitUnitary;
use crate::error::{Error, Result};

pub fn read_dense_unitary<R: BufRead>(reader: R) -> Result<ImplicitUnitary> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let row = trimmed
            .split(',')
            .map(|tok| {
                parse_complex(tok).ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    message: format!("bad complex entry {:?}", tok.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Empty);
    }
    if let Some(i) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::Parse {
            line: i + 1,
            message: format!("expected {n} entries, found {}", rows[i].len()),
        });
    }
    ImplicitUnitary::from_dense(n, rows.into_iter().flatten().collect())
}

pub fn load_dense_unitary(path: impl AsRef<Path>) -> Result<ImplicitUnitary> {
    let file = std::fs::File::open(path)?;
    read_dense_unitary(std::io::BufReader::new(file))
}

/// Serializes any unitary in the dense text format. Values round-trip.
pub fn write_dense_unitary(m: &ImplicitUnitary) -> String {
    let n = m.dim();
    let mut out = String::new();
    for j in 0..n {
        for l in 0..n {
            if l > 0 {
                out.push_str(", ");
            }
            let z = m.entry(j, l);
            let sign = if z.im.is_sign_negative() { '-' } else { '+' };
            let _ = write!(out, "{:e}{}{:e}j", z.re, sign, z.im.abs());
        }
        out.push('\n');
    }
    out
}

pub fn parse_complex(tok: &str) -> Option<Complex64> {
    let t = tok.trim();
    let Some(body) = t.strip_suffix('j') else {
        return t.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // the real/imaginary split is the last sign that is neither leading
    // nor part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'))?;
    let re = body[..split].trim().parse::<f64>().ok()?;
    let im_str = body[split..].trim();
    let im = match im_str {
        "+" => 1.0,
        "-" => -1.0,
        s => s.parse::<f64>().ok()?,
    };
    Some(Complex64::new(re, im))
}

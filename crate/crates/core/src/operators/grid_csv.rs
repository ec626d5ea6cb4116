//! Row-major CSV grids (`n1` lines of `n2` comma-separated values).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

pub fn write_grid(path: impl AsRef<Path>, n1: usize, n2: usize, values: &[f64]) -> Result<()> {
    crate::error::check_dim(n1 * n2, values.len())?;
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for row in values.chunks(n2) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Returns `(n1, n2, values)`.
pub fn read_grid(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<f64>)> {
    parse_grid(&fs::read_to_string(path)?)
}

pub fn parse_grid(text: &str) -> Result<(usize, usize, Vec<f64>)> {
    let mut values = Vec::new();
    let mut n2 = None;
    let mut n1 = 0;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad value '{s}': {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        match n2 {
            None => n2 = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("row has {} columns, expected {w}", row.len()),
                })
            }
            _ => {}
        }
        values.extend(row);
        n1 += 1;
    }
    let n2 = n2.ok_or(Error::Parse {
        line: 1,
        msg: "empty grid".into(),
    })?;
    Ok((n1, n2, values))
}

//! Matrix Market coordinate-format I/O for symmetric sparse matrices.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::SparseOperator;
use crate::error::{Error, Result};

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseOperator> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

pub fn parse_matrix_market(text: &str) -> Result<SparseOperator> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty file".into(),
    })?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if tokens.len() < 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::Parse {
            line: 1,
            msg: "missing %%MatrixMarket matrix header".into(),
        });
    }
    if tokens[2] != "coordinate" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unsupported format '{}'", tokens[2]),
        });
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(Error::Parse {
            line: 1,
            msg: format!("unsupported field '{}'", tokens[3]),
        });
    }
    let symmetric = match tokens[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("unsupported symmetry '{other}'"),
            })
        }
    };

    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse_usize = |s: &str| {
            s.parse::<usize>().map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("bad integer '{s}': {e}"),
            })
        };
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "expected 'rows cols nnz'".into(),
                    });
                }
                let (r, c) = (parse_usize(fields[0])?, parse_usize(fields[1])?);
                if r != c {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("matrix is {r}x{c}, not square"),
                    });
                }
                triplets.reserve(parse_usize(fields[2])?);
                size = Some((r, c));
            }
            Some((n, _)) => {
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "expected 'row col value'".into(),
                    });
                }
                let (i, j) = (parse_usize(fields[0])?, parse_usize(fields[1])?);
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("index ({i}, {j}) out of range"),
                    });
                }
                let v: f64 = fields[2].parse().map_err(|e| Error::Parse {
                    line: lineno,
                    msg: format!("bad value '{}': {e}", fields[2]),
                })?;
                triplets.push((i - 1, j - 1, v));
            }
        }
    }
    let (n, _) = size.ok_or(Error::Parse {
        line: 1,
        msg: "missing size line".into(),
    })?;
    if symmetric {
        SparseOperator::from_lower_triplets(n, &triplets)
    } else {
        SparseOperator::from_triplets(n, &triplets)
    }
}

/// Writes the lower triangle with a `symmetric` header.
pub fn write_matrix_market(op: &SparseOperator, path: impl AsRef<Path>) -> Result<()> {
    use super::LinearOperator;
    let n = op.dim();
    let mut entries = Vec::new();
    for i in 0..n {
        for (j, v) in op.row(i) {
            if j <= i {
                entries.push((i, j, v));
            }
        }
    }
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(out, "{n} {n} {}", entries.len())?;
    for (i, j, v) in entries {
        writeln!(out, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    out.flush()?;
    Ok(())
}

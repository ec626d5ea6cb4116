use std::path::Path;

use crate::error::{Error, Result};

/// Square `n x n` lattice of cells on the unit torus `[0, 1)^2`.
/// Cell `(i, j)` covers `[i h, (i+1) h) x [j h, (j+1) h)` and has flat index
/// `i n + j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusLattice {
    n: usize,
}

impl TorusLattice {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("lattice needs at least 2x2 cells".into()));
        }
        Ok(TorusLattice { n })
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> usize {
        self.n * self.n
    }

    /// Cell side `h = 1/n`.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.h() * self.h()
    }

    /// Centre of cell `k`.
    pub fn centre(&self, k: usize) -> (f64, f64) {
        let h = self.h();
        ((k / self.n) as f64 * h + 0.5 * h, (k % self.n) as f64 * h + 0.5 * h)
    }

    /// Evaluates `f` at every cell centre.
    pub fn field(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        (0..self.cells())
            .map(|k| {
                let (x, y) = self.centre(k);
                f(x, y)
            })
            .collect()
    }

    pub fn cell_of(&self, x: f64, y: f64) -> usize {
        let n = self.n;
        let i = ((x * n as f64).floor() as usize).min(n - 1);
        let j = ((y * n as f64).floor() as usize).min(n - 1);
        i * n + j
    }
}

/// Points on the unit torus; coordinates are wrapped into `[0, 1)` on entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointPattern {
    points: Vec<(f64, f64)>,
}

fn wrap(v: f64) -> f64 {
    let w = v.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative input
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

impl PointPattern {
    pub fn new(points: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut out = Vec::new();
        for (k, (x, y)) in points.into_iter().enumerate() {
            if !(x.is_finite() && y.is_finite()) {
                return Err(Error::NonFinite { index: k });
            }
            out.push((wrap(x), wrap(y)));
        }
        Ok(PointPattern { points: out })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Reads `x,y` lines; a non-numeric first line is taken as a header.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(csv_error)?;
        let mut pts = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec.map_err(csv_error)?;
            if rec.len() != 2 {
                return Err(Error::Parse {
                    line: line + 1,
                    msg: format!("expected 2 fields, found {}", rec.len()),
                });
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(x), Ok(y)) => pts.push((x, y)),
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::Parse {
                        line: line + 1,
                        msg: "coordinates must be numbers".into(),
                    })
                }
            }
        }
        PointPattern::new(pts)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
        w.write_record(["x", "y"]).map_err(csv_error)?;
        for (x, y) in &self.points {
            w.write_record([x.to_string(), y.to_string()])
                .map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            line,
            msg: format!("{other:?}"),
        },
    }
}

/// Per-cell point counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeCounts {
    counts: Vec<u64>,
}

impl LatticeCounts {
    pub fn new(counts: Vec<u64>) -> Self {
        LatticeCounts { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }
}

pub fn bin_points(pattern: &PointPattern, lattice: &TorusLattice) -> LatticeCounts {
    let mut counts = vec![0u64; lattice.cells()];
    for &(x, y) in pattern.points() {
        counts[lattice.cell_of(x, y)] += 1;
    }
    LatticeCounts { counts }
}

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{validate_input, LinearOperator, SparseOperator};
use crate::error::{Error, Result};
use crate::vector::norm;

/// Relative tolerance for the torus-symmetry check on a circulant base.
const SYMMETRY_RTOL: f64 = 1e-12;
/// Relative tolerance on imaginary residue after a real-to-real spectral filter.
const RESIDUE_RTOL: f64 = 1e-10;
/// Eigenvalues at or below this fraction of the largest are treated as zero.
const SPD_RTOL: f64 = 1e-13;

/// Planned 2-D FFT on an `n1 x n2` row-major grid.
#[derive(Clone)]
pub struct SpectralFilter {
    n1: usize,
    n2: usize,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SpectralFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralFilter")
            .field("n1", &self.n1)
            .field("n2", &self.n2)
            .finish()
    }
}

impl SpectralFilter {
    pub fn new(n1: usize, n2: usize) -> Self {
        let mut planner = FftPlanner::new();
        SpectralFilter {
            n1,
            n2,
            row_fwd: planner.plan_fft_forward(n2),
            row_inv: planner.plan_fft_inverse(n2),
            col_fwd: planner.plan_fft_forward(n1),
            col_inv: planner.plan_fft_inverse(n1),
        }
    }

    pub fn len(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let (row, col) = if inverse {
            (&self.row_inv, &self.col_inv)
        } else {
            (&self.row_fwd, &self.col_fwd)
        };
        let (n1, n2) = (self.n1, self.n2);
        row.process(data);
        if n1 > 1 {
            let mut t = vec![Complex64::default(); n1 * n2];
            for i in 0..n1 {
                for j in 0..n2 {
                    t[j * n1 + i] = data[i * n2 + j];
                }
            }
            col.process(&mut t);
            for i in 0..n1 {
                for j in 0..n2 {
                    data[i * n2 + j] = t[j * n1 + i];
                }
            }
        }
    }

    /// Unnormalised forward 2-D DFT of a real grid.
    pub fn forward_real(&self, x: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, false);
        data
    }

    /// Inverse 2-D DFT (normalised) back to a real grid. Fails if the
    /// discarded imaginary part exceeds `1e-10 * scale`.
    pub fn inverse_real(&self, mut data: Vec<Complex64>, out: &mut [f64], scale: f64) -> Result<()> {
        self.transform(&mut data, true);
        let norm = 1.0 / self.len() as f64;
        let mut residue: f64 = 0.0;
        for (o, d) in out.iter_mut().zip(&data) {
            *o = d.re * norm;
            residue = residue.max((d.im * norm).abs());
        }
        let allowed = RESIDUE_RTOL * scale;
        if residue > allowed {
            return Err(Error::ImaginaryResidue { residue, allowed });
        }
        Ok(())
    }

    /// Applies the circulant operator with eigenvalues `weights` to `x`:
    /// forward FFT, pointwise multiply, inverse FFT. Fails if the discarded
    /// imaginary part exceeds `1e-10 * max|weights| * ||x||`.
    pub fn filter(&self, x: &[f64], weights: &[f64], out: &mut [f64]) -> Result<()> {
        let mut data = self.forward_real(x);
        for (d, w) in data.iter_mut().zip(weights) {
            *d *= *w;
        }
        let wmax = weights.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        self.inverse_real(data, out, wmax * norm(x))
    }
}

/// Real eigenvalues of the block-circulant matrix whose first column is
/// `base` (row-major `n1 x n2`). Checks torus symmetry but not positivity.
pub fn circulant_spectrum(n1: usize, n2: usize, base: &[f64]) -> Result<Vec<f64>> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    crate::error::check_dim(n1 * n2, base.len())?;
    crate::error::check_finite(base)?;
    let bmax = base.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    for i in 0..n1 {
        for j in 0..n2 {
            let a = base[i * n2 + j];
            let b = base[((n1 - i) % n1) * n2 + (n2 - j) % n2];
            if (a - b).abs() > SYMMETRY_RTOL * bmax {
                return Err(Error::Asymmetric {
                    row: i,
                    col: j,
                    diff: (a - b).abs(),
                });
            }
        }
    }
    let fft = SpectralFilter::new(n1, n2);
    let raw = fft.forward_real(base);
    // Average conjugate-mirrored modes so the spectrum is exactly even.
    let mut spec = vec![0.0; n1 * n2];
    for i in 0..n1 {
        for j in 0..n2 {
            let mirror = ((n1 - i) % n1) * n2 + (n2 - j) % n2;
            spec[i * n2 + j] = 0.5 * (raw[i * n2 + j].re + raw[mirror].re);
        }
    }
    Ok(spec)
}

/// Symmetric positive definite block-circulant operator on an `n1 x n2` torus.
#[derive(Debug, Clone)]
pub struct BlockCirculantOperator {
    n1: usize,
    n2: usize,
    base: Vec<f64>,
    spectrum: Vec<f64>,
    fft: SpectralFilter,
}

impl BlockCirculantOperator {
    pub fn new(n1: usize, n2: usize, base: Vec<f64>) -> Result<Self> {
        let spectrum = circulant_spectrum(n1, n2, &base)?;
        check_positive(&spectrum)?;
        Ok(BlockCirculantOperator {
            n1,
            n2,
            base,
            spectrum,
            fft: SpectralFilter::new(n1, n2),
        })
    }

    /// One-dimensional circulant with first column `base`.
    pub fn new_1d(base: Vec<f64>) -> Result<Self> {
        let n = base.len();
        Self::new(1, n, base)
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn fft(&self) -> &SpectralFilter {
        &self.fft
    }

    pub fn lambda_min(&self) -> f64 {
        self.spectrum.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn lambda_max(&self) -> f64 {
        self.spectrum.iter().copied().fold(0.0, f64::max)
    }

    /// Applies `f(Q)` for a spectral function `f`.
    pub fn apply_function(&self, x: &[f64], f: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let n = self.n1 * self.n2;
        let mut y = vec![0.0; n];
        validate_input(n, x, &y)?;
        let w: Vec<f64> = self.spectrum.iter().map(|&l| f(l)).collect();
        self.fft.filter(x, &w, &mut y)?;
        Ok(y)
    }

    /// `log det Q` from the spectrum.
    pub fn logdet(&self) -> f64 {
        self.spectrum.iter().map(|l| l.ln()).sum()
    }

    /// The same matrix in sparse form, keeping the nonzero offsets of `base`.
    pub fn to_sparse(&self) -> Result<SparseOperator> {
        let (n1, n2) = (self.n1, self.n2);
        let offsets: Vec<(usize, usize, f64)> = self
            .base
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(k, &v)| (k / n2, k % n2, v))
            .collect();
        let mut triplets = Vec::with_capacity(n1 * n2 * offsets.len());
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                for &(d1, d2, v) in &offsets {
                    let j1 = (i1 + n1 - d1) % n1;
                    let j2 = (i2 + n2 - d2) % n2;
                    triplets.push((i1 * n2 + i2, j1 * n2 + j2, v));
                }
            }
        }
        SparseOperator::from_triplets(n1 * n2, &triplets)
    }

    /// The common diagonal entry of `(Q + alpha I)^{-1}`.
    pub fn inverse_diagonal(&self, alpha: f64) -> f64 {
        let n = self.spectrum.len() as f64;
        self.spectrum.iter().map(|l| 1.0 / (l + alpha)).sum::<f64>() / n
    }
}

fn check_positive(spectrum: &[f64]) -> Result<()> {
    let lmax = spectrum.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    for (index, &value) in spectrum.iter().enumerate() {
        if value <= SPD_RTOL * lmax {
            return Err(Error::NotSpd { index, value });
        }
    }
    Ok(())
}

impl LinearOperator for BlockCirculantOperator {
    fn dim(&self) -> usize {
        self.n1 * self.n2
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        validate_input(self.dim(), x, y)?;
        self.fft.filter(x, &self.spectrum, y)
    }

    fn ffts_per_apply(&self) -> usize {
        2
    }
}

use super::{Capabilities, FactoredPreconditioner};
use crate::error::{check_dim, check_finite, Error, Result};
use crate::operators::{validate_input, BlockCirculantOperator, LinearOperator, SpectralFilter};
use crate::vector::norm;

/// `M = Q + alpha I` for block-circulant `Q`, factored in the Fourier domain:
/// `F` is the symmetric circulant with eigenvalues `sqrt(lambda_k + alpha)`.
/// Every capability costs two FFTs.
#[derive(Debug, Clone)]
pub struct CirculantShiftPreconditioner {
    fft: SpectralFilter,
    spectrum: Vec<f64>,
    alpha: f64,
    sqrt_shifted: Vec<f64>,
    inv_sqrt_shifted: Vec<f64>,
}

pub fn build_circulant_shift(
    q: &BlockCirculantOperator,
    alpha: f64,
) -> Result<CirculantShiftPreconditioner> {
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument("shift must be finite".into()));
    }
    let spectrum = q.spectrum().to_vec();
    let mut sqrt_shifted = Vec::with_capacity(spectrum.len());
    for (index, l) in spectrum.iter().enumerate() {
        let value = l + alpha;
        if !(value > 0.0) {
            return Err(Error::NotSpd { index, value });
        }
        sqrt_shifted.push(value.sqrt());
    }
    let inv_sqrt_shifted = sqrt_shifted.iter().map(|s| 1.0 / s).collect();
    Ok(CirculantShiftPreconditioner {
        fft: q.fft().clone(),
        spectrum,
        alpha,
        sqrt_shifted,
        inv_sqrt_shifted,
    })
}

impl CirculantShiftPreconditioner {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Lower bound on the spectrum of `F^{-1} (Q + H) F^{-T}` for any
    /// `H >= 0`: `min_k lambda_k / (lambda_k + alpha)`.
    pub fn inner_lower_bound(&self) -> f64 {
        self.spectrum
            .iter()
            .map(|l| l / (l + self.alpha))
            .fold(f64::INFINITY, f64::min)
    }

    fn filtered(&self, w: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        validate_input(self.dim(), w, &out)?;
        self.fft.filter(w, weights, &mut out)?;
        Ok(out)
    }

    /// `F^{-1} (Q + diag(h)) F^{-T}` evaluated with four FFTs per product.
    /// `Q` must be the operator this preconditioner was built from.
    pub fn fused_with_diagonal(&self, h: &[f64]) -> Result<FusedShiftOperator<'_>> {
        check_dim(self.dim(), h.len())?;
        check_finite(h)?;
        let ratio = self
            .spectrum
            .iter()
            .map(|l| l / (l + self.alpha))
            .collect();
        Ok(FusedShiftOperator {
            p: self,
            h: h.to_vec(),
            ratio,
        })
    }
}

impl FactoredPreconditioner for CirculantShiftPreconditioner {
    fn dim(&self) -> usize {
        self.spectrum.len()
    }
    fn capabilities(&self) -> Capabilities {
        Capabilities::all()
    }
    fn apply_f(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.filtered(w, &self.sqrt_shifted)
    }
    fn apply_f_inv(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.filtered(w, &self.inv_sqrt_shifted)
    }
    fn apply_f_inv_t(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.filtered(w, &self.inv_sqrt_shifted)
    }
    fn ffts_per_solve(&self) -> usize {
        2
    }
    fn logdet_f(&self) -> Result<f64> {
        Ok(self.sqrt_shifted.iter().map(|s| s.ln()).sum())
    }
}

/// Preconditioned circulant-plus-diagonal operator
/// `Q (Q + alpha I)^{-1} + F^{-1} H F^{-1}` sharing one forward and one
/// inverse transform between the two terms.
pub struct FusedShiftOperator<'a> {
    p: &'a CirculantShiftPreconditioner,
    h: Vec<f64>,
    ratio: Vec<f64>,
}

impl LinearOperator for FusedShiftOperator<'_> {
    fn dim(&self) -> usize {
        self.h.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        validate_input(self.dim(), x, y)?;
        let fft = &self.p.fft;
        let inv = &self.p.inv_sqrt_shifted;
        let inv_max = inv.iter().fold(0.0f64, |m, v| m.max(*v));
        let xhat = fft.forward_real(x);

        let mut t = vec![0.0; x.len()];
        let that: Vec<_> = xhat.iter().zip(inv).map(|(c, s)| c * s).collect();
        fft.inverse_real(that, &mut t, inv_max * norm(x))?;
        for (ti, hi) in t.iter_mut().zip(&self.h) {
            *ti *= hi;
        }
        let uhat = fft.forward_real(&t);
        let yhat: Vec<_> = xhat
            .iter()
            .zip(&uhat)
            .zip(inv.iter().zip(&self.ratio))
            .map(|((xc, uc), (s, r))| xc * r + uc * s)
            .collect();
        fft.inverse_real(yhat, y, norm(x) + inv_max * norm(&t))
    }

    fn ffts_per_apply(&self) -> usize {
        4
    }
}

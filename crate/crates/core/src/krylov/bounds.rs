use crate::error::{Error, Result};

/// A-priori error bound for the Lanczos sample after `m` steps:
/// `2 lambda_min^{-1/2} sqrt(kappa) ((sqrt(kappa)-1)/(sqrt(kappa)+1))^m ||z||`.
pub fn apriori_bound(kappa: f64, lambda_min: f64, m: usize, znorm: f64) -> Result<f64> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(Error::InvalidArgument(format!("kappa must be >= 1, got {kappa}")));
    }
    if !(lambda_min > 0.0 && lambda_min.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda_min must be positive, got {lambda_min}"
        )));
    }
    if !(znorm >= 0.0 && znorm.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid ||z|| = {znorm}")));
    }
    let sk = kappa.sqrt();
    let rate = (sk - 1.0) / (sk + 1.0);
    let m = i32::try_from(m).map_err(|_| Error::InvalidArgument("m too large".into()))?;
    Ok(2.0 / lambda_min.sqrt() * sk * rate.powi(m) * znorm)
}

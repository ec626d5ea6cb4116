use nalgebra::DMatrix;

use super::ColouredProbeSet;
use crate::error::{check_dim, Error, Result};

/// Spectral interval and ellipse parameter `R` (with `2R > 1`) for the
/// off-diagonal decay bound on `log(Q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayBoundParams {
    lambda_min: f64,
    lambda_max: f64,
    r: f64,
}

impl DecayBoundParams {
    pub fn new(lambda_min: f64, lambda_max: f64, r: f64) -> Result<Self> {
        if !(lambda_min > 0.0 && lambda_max >= lambda_min && lambda_max.is_finite()) {
            return Err(Error::InvalidArgument(
                "need 0 < lambda_min <= lambda_max".into(),
            ));
        }
        if !(2.0 * r > 1.0 && r.is_finite()) {
            return Err(Error::InvalidArgument("need 2R > 1".into()));
        }
        Ok(DecayBoundParams {
            lambda_min,
            lambda_max,
            r,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Supremum `R*` of admissible `R`: where the logarithm's argument at
    /// `t = -(R + 1/(4R))` reaches zero. Infinite when the spectrum is a point.
    pub fn r_star(lambda_min: f64, lambda_max: f64) -> f64 {
        if lambda_max == lambda_min {
            return f64::INFINITY;
        }
        let c = (lambda_max + lambda_min) / (lambda_max - lambda_min);
        0.5 * (c + (c * c - 1.0).sqrt())
    }

    /// Constant `C = 2 / (1 - 1/(2R)) max_{t = ±(R + 1/(4R))} |log(...)|`.
    pub fn constant(&self) -> Result<f64> {
        let t0 = self.r + 1.0 / (4.0 * self.r);
        let mut worst = 0.0f64;
        for t in [t0, -t0] {
            let arg = 0.5 * ((self.lambda_max - self.lambda_min) * t + self.lambda_max + self.lambda_min);
            if !(arg > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "R = {} is not admissible for spectrum [{}, {}]",
                    self.r, self.lambda_min, self.lambda_max
                )));
            }
            worst = worst.max(arg.ln().abs());
        }
        Ok(2.0 / (1.0 - 1.0 / (2.0 * self.r)) * worst)
    }
}

/// Bound on `|log(Q)_ij|` for graph distance `d(i, j) = dij`:
/// `C (2R)^{-dij}`.
pub fn decay_bound(params: &DecayBoundParams, dij: usize) -> Result<f64> {
    Ok(params.constant()? * (2.0 * params.r).powi(-(dij as i32)))
}

pub const DENSE_LOG_CAP: usize = 1024;

/// Matrix logarithm of a symmetric positive definite matrix by eigendecomposition.
pub fn dense_log(q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = q.nrows();
    check_dim(n, q.ncols())?;
    if n > DENSE_LOG_CAP {
        return Err(Error::TooLarge {
            n,
            cap: DENSE_LOG_CAP,
        });
    }
    let eig = q.clone().symmetric_eigen();
    if let Some((index, &value)) = eig.eigenvalues.iter().enumerate().find(|(_, &l)| !(l > 0.0)) {
        return Err(Error::NotSpd { index, value });
    }
    let logs = eig.eigenvalues.map(f64::ln);
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&logs) * v.transpose())
}

/// Variance of one coloured Hutchinson round for `B = log(Q)`:
/// `2 sum_c sum_{i != j in c} B_ij^2`.
pub fn exact_colour_variance(q: &DMatrix<f64>, probes: &ColouredProbeSet) -> Result<f64> {
    check_dim(q.nrows(), probes.dim())?;
    let b = dense_log(q)?;
    let mut total = 0.0;
    for class in probes.classes() {
        for &i in class {
            for &j in class {
                if i != j {
                    total += b[(i, j)].powi(2);
                }
            }
        }
    }
    Ok(2.0 * total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spectrum_gives_zero_bound() {
        let p = DecayBoundParams::new(1.0, 1.0, 3.0).unwrap();
        assert_eq!(decay_bound(&p, 1).unwrap(), 0.0);
    }

    #[test]
    fn bound_decreases_with_distance() {
        let p = DecayBoundParams::new(1.0, 10.0, 0.9).unwrap();
        let b: Vec<f64> = (1..=20).map(|d| decay_bound(&p, d).unwrap()).collect();
        assert!(b.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn inadmissible_r_is_an_error() {
        let rs = DecayBoundParams::r_star(1.0, 10.0);
        let p = DecayBoundParams::new(1.0, 10.0, rs * 1.01).unwrap();
        assert!(decay_bound(&p, 1).is_err());
        let p = DecayBoundParams::new(1.0, 10.0, rs * 0.99).unwrap();
        assert!(decay_bound(&p, 1).is_ok());
        assert!(DecayBoundParams::new(1.0, 10.0, 0.5).is_err());
    }

    #[test]
    fn diagonal_has_no_colour_variance() {
        let q = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]));
        assert_eq!(exact_colour_variance(&q, &ColouredProbeSet::single(3)).unwrap(), 0.0);
    }
}

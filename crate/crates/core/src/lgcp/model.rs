use super::{LatticeCounts, TorusLattice};
use crate::error::{check_dim, check_finite, Error, Result};
use crate::operators::{BlockCirculantOperator, LinearOperator, TorusPrior};
use crate::vector::dot;

/// Discretised log-Gaussian Cox process: `x ~ N(0, Q^{-1})` and
/// `y_k | x ~ Poisson(a exp(x_k + mu))` with cell area `a`.
#[derive(Debug, Clone)]
pub struct LgcpModel {
    q: BlockCirculantOperator,
    y: Vec<f64>,
    cell_area: f64,
    mu: f64,
    lattice: Option<TorusLattice>,
}

/// Log-likelihood (without the `x`-independent `sum y log a - log y!`),
/// its gradient and the diagonal Fisher information.
#[derive(Debug, Clone)]
pub struct LikelihoodTerms {
    pub loglik: f64,
    pub grad: Vec<f64>,
    pub fisher: Vec<f64>,
}

impl LgcpModel {
    /// General model over any block-circulant prior and cell weighting.
    pub fn new(q: BlockCirculantOperator, counts: Vec<f64>, cell_area: f64, mu: f64) -> Result<Self> {
        check_dim(q.dim(), counts.len())?;
        check_finite(&counts)?;
        if let Some(index) = counts.iter().position(|&c| c < 0.0 || c.fract() != 0.0) {
            return Err(Error::InvalidArgument(format!(
                "count {index} is not a non-negative integer"
            )));
        }
        if !(cell_area > 0.0 && cell_area.is_finite() && mu.is_finite()) {
            return Err(Error::InvalidArgument(
                "cell area must be positive and mu finite".into(),
            ));
        }
        Ok(LgcpModel {
            q,
            y: counts,
            cell_area,
            mu,
            lattice: None,
        })
    }

    /// Model on a square torus lattice with a stationary prior.
    pub fn on_lattice(
        lattice: TorusLattice,
        prior: &TorusPrior,
        counts: &LatticeCounts,
        mu: f64,
    ) -> Result<Self> {
        let n = lattice.side();
        let q = prior.operator(n, n)?;
        let mut m = LgcpModel::new(q, counts.as_f64(), lattice.cell_area(), mu)?;
        m.lattice = Some(lattice);
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub fn prior(&self) -> &BlockCirculantOperator {
        &self.q
    }

    pub fn counts(&self) -> &[f64] {
        &self.y
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_area
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lattice(&self) -> Option<TorusLattice> {
        self.lattice
    }

    /// Largest `x_k + mu` accepted before the intensity is deemed divergent.
    pub fn divergence_limit(&self) -> f64 {
        700.0 - self.cell_area.ln()
    }

    pub fn loglik_grad_fisher(&self, x: &[f64]) -> Result<LikelihoodTerms> {
        check_dim(self.dim(), x.len())?;
        let limit = self.divergence_limit();
        let mut loglik = 0.0;
        let mut grad = Vec::with_capacity(x.len());
        let mut fisher = Vec::with_capacity(x.len());
        for (k, (&xk, &yk)) in x.iter().zip(&self.y).enumerate() {
            let eta = xk + self.mu;
            if !(eta <= limit) {
                return Err(Error::Divergent { index: k, value: xk });
            }
            let lam = self.cell_area * eta.exp();
            loglik += yk * eta - lam;
            grad.push(yk - lam);
            fisher.push(lam);
        }
        Ok(LikelihoodTerms {
            loglik,
            grad,
            fisher,
        })
    }

    /// `-x^T Q x / 2`.
    pub fn log_prior(&self, x: &[f64]) -> Result<f64> {
        Ok(-0.5 * dot(x, &self.q.apply(x)?))
    }

    /// Unnormalised log posterior `log pi(x) + log pi(y | x)`.
    pub fn log_posterior(&self, x: &[f64]) -> Result<f64> {
        Ok(self.log_prior(x)? + self.loglik_grad_fisher(x)?.loglik)
    }
}

/// `[(Q + alpha I)^{-1}]_{11} sum_k (a e^{x_k + mu} - alpha)`, which equals
/// `tr((Q + alpha I)^{-1} (H - alpha I))` for circulant `Q`.
pub fn trace_diagnostic(model: &LgcpModel, x: &[f64], alpha: f64) -> Result<f64> {
    check_dim(model.dim(), x.len())?;
    check_finite(x)?;
    if model.q.spectrum().iter().any(|l| !(l + alpha > 0.0)) {
        return Err(Error::InvalidArgument("Q + alpha I is not positive definite".into()));
    }
    let a = model.cell_area;
    let s: f64 = x.iter().map(|xk| a * (xk + model.mu).exp() - alpha).sum();
    Ok(model.q.inverse_diagonal(alpha) * s)
}

use super::BlockCirculantOperator;
use crate::error::{Error, Result};

/// Stationary torus prior `Q = tau * (kappa^2 I + L)^nu`, where `L` is the
/// five-point Laplacian on the periodic unit square scaled by `h^{-2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPrior {
    pub tau: f64,
    pub kappa: f64,
    pub nu: u32,
}

impl Default for TorusPrior {
    fn default() -> Self {
        TorusPrior {
            tau: 1.0,
            kappa: 10.0,
            nu: 2,
        }
    }
}

impl TorusPrior {
    pub fn new(tau: f64, kappa: f64, nu: u32) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) || !(kappa > 0.0 && kappa.is_finite()) || nu == 0 {
            return Err(Error::InvalidArgument(format!(
                "prior needs tau > 0, kappa > 0, nu >= 1 (got {tau}, {kappa}, {nu})"
            )));
        }
        Ok(TorusPrior { tau, kappa, nu })
    }

    /// First column of `Q` as a row-major `n1 x n2` grid.
    pub fn base(&self, n1: usize, n2: usize) -> Vec<f64> {
        let n = n1 * n2;
        let (w1, w2) = ((n1 * n1) as f64, (n2 * n2) as f64);
        let mut stencil = vec![0.0; n];
        let mut add = |di: isize, dj: isize, v: f64| {
            let i = di.rem_euclid(n1 as isize) as usize;
            let j = dj.rem_euclid(n2 as isize) as usize;
            stencil[i * n2 + j] += v;
        };
        add(0, 0, self.kappa * self.kappa + 2.0 * w1 + 2.0 * w2);
        add(1, 0, -w1);
        add(-1, 0, -w1);
        add(0, 1, -w2);
        add(0, -1, -w2);

        let mut base = stencil.clone();
        for _ in 1..self.nu {
            base = circular_convolve(&base, &stencil, n1, n2);
        }
        base.iter_mut().for_each(|b| *b *= self.tau);
        base
    }

    pub fn operator(&self, n1: usize, n2: usize) -> Result<BlockCirculantOperator> {
        BlockCirculantOperator::new(n1, n2, self.base(n1, n2))
    }

    /// Closed-form eigenvalues, row-major over wavenumbers `(k1, k2)`.
    pub fn spectrum(&self, n1: usize, n2: usize) -> Vec<f64> {
        let (w1, w2) = ((n1 * n1) as f64, (n2 * n2) as f64);
        let mut out = Vec::with_capacity(n1 * n2);
        for k1 in 0..n1 {
            let s1 = (std::f64::consts::PI * k1 as f64 / n1 as f64).sin();
            for k2 in 0..n2 {
                let s2 = (std::f64::consts::PI * k2 as f64 / n2 as f64).sin();
                let l = self.kappa * self.kappa + 4.0 * w1 * s1 * s1 + 4.0 * w2 * s2 * s2;
                out.push(self.tau * l.powi(self.nu as i32));
            }
        }
        out
    }
}

fn circular_convolve(a: &[f64], b: &[f64], n1: usize, n2: usize) -> Vec<f64> {
    let mut out = vec![0.0; n1 * n2];
    for (ia, &va) in a.iter().enumerate() {
        if va == 0.0 {
            continue;
        }
        let (ai, aj) = (ia / n2, ia % n2);
        for (ib, &vb) in b.iter().enumerate() {
            if vb == 0.0 {
                continue;
            }
            let (bi, bj) = (ib / n2, ib % n2);
            out[((ai + bi) % n1) * n2 + (aj + bj) % n2] += va * vb;
        }
    }
    out
}

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{bin_points, LatticeCounts, PointPattern, TorusLattice};
use crate::error::{check_dim, Error, Result};
use crate::operators::{BlockCirculantOperator, LinearOperator};
use crate::rng::{child_rng, standard_normal, StreamRng};

#[derive(Debug, Clone)]
pub struct Simulation {
    /// Latent field `x` (zero mean; the intensity is `exp(x + mu)`).
    pub x: Vec<f64>,
    pub pattern: PointPattern,
    pub counts: LatticeCounts,
}

/// Draws `x ~ N(0, Q^{-1})` by spectral filtering, then Poisson counts with
/// mean `h^2 exp(x + mu)` per cell, scattered uniformly within cells.
pub fn simulate_lgcp(
    lattice: &TorusLattice,
    q: &BlockCirculantOperator,
    mu: f64,
    seed: u64,
) -> Result<Simulation> {
    check_dim(lattice.cells(), q.dim())?;
    let mut rng = child_rng(seed, 0);
    let z = standard_normal(&mut rng, q.dim());
    let x = q.apply_function(&z, |l| 1.0 / l.sqrt())?;
    let (pattern, counts) = scatter(lattice, &x, mu, &mut rng)?;
    Ok(Simulation { x, pattern, counts })
}

/// Points for a given latent field.
pub fn simulate_points(
    lattice: &TorusLattice,
    x: &[f64],
    mu: f64,
    seed: u64,
) -> Result<(PointPattern, LatticeCounts)> {
    check_dim(lattice.cells(), x.len())?;
    scatter(lattice, x, mu, &mut child_rng(seed, 1))
}

fn scatter(
    lattice: &TorusLattice,
    x: &[f64],
    mu: f64,
    rng: &mut StreamRng,
) -> Result<(PointPattern, LatticeCounts)> {
    let h = lattice.h();
    let a = lattice.cell_area();
    let n = lattice.side();
    let mut pts = Vec::new();
    for (k, &xk) in x.iter().enumerate() {
        let lam = a * (xk + mu).exp();
        if !lam.is_finite() {
            return Err(Error::Divergent { index: k, value: xk });
        }
        if lam <= 0.0 {
            continue;
        }
        let c = Poisson::new(lam)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .sample(rng) as u64;
        let (i, j) = (k / n, k % n);
        for _ in 0..c {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            pts.push(((i as f64 + u) * h, (j as f64 + v) * h));
        }
    }
    let pattern = PointPattern::new(pts)?;
    let counts = bin_points(&pattern, lattice);
    Ok((pattern, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::TorusPrior;

    #[test]
    fn vanishing_intensity_gives_empty_pattern() {
        let l = TorusLattice::new(4).unwrap();
        let (p, c) = simulate_points(&l, &[-40.0; 16], 0.0, 1).unwrap();
        assert!(p.is_empty());
        assert_eq!(c.total(), 0);
    }

    #[test]
    fn points_fall_in_their_cells() {
        let l = TorusLattice::new(8).unwrap();
        let q = TorusPrior::default().operator(8, 8).unwrap();
        let s = simulate_lgcp(&l, &q, 6.0, 3).unwrap();
        assert_eq!(s.counts.total() as usize, s.pattern.len());
        assert!(s.pattern.len() > 100);
    }
}

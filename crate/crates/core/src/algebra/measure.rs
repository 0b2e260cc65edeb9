//! Probability measures on depth-D cylinders and the states they induce.

use rand::Rng;

use super::kernel::Kernel;
use super::spectral::C64;
use crate::error::{Error, Result};
use crate::groupoid::{PathId, TruncatedGroupoid};

/// Allowed deviation of the total mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    resolution: usize,
    weights: Vec<f64>,
}

impl Measure {
    /// `weights[p]` is the mass of the cylinder of path p.
    pub fn new(g: &TruncatedGroupoid, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != g.num_paths() {
            return Err(Error::Measure(format!(
                "{} weights for {} cylinders",
                weights.len(),
                g.num_paths()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Measure(format!("weight {w} is not a nonnegative number")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Measure(format!("weights sum to {total}, not 1")));
        }
        Ok(Self {
            resolution: g.resolution(),
            weights,
        })
    }

    pub fn uniform(g: &TruncatedGroupoid) -> Self {
        let n = g.num_paths();
        Self {
            resolution: g.resolution(),
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn point(g: &TruncatedGroupoid, p: PathId) -> Self {
        let mut weights = vec![0.0; g.num_paths()];
        weights[p] = 1.0;
        Self {
            resolution: g.resolution(),
            weights,
        }
    }

    /// Random weights; roughly a third of the cylinders get no mass.
    pub fn random<R: Rng + ?Sized>(g: &TruncatedGroupoid, rng: &mut R) -> Self {
        let n = g.num_paths();
        let mut w: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() })
            .collect();
        if w.iter().all(|x| *x == 0.0) {
            w[rng.random_range(0..n)] = 1.0;
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        Self {
            resolution: g.resolution(),
            weights: w,
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// φ_μ(f) = Σ_λ μ(λ) f(λ, λ).
    pub fn state_eval(&self, f: &Kernel) -> Result<C64> {
        if f.resolution() != self.resolution || f.groupoid().num_paths() != self.weights.len() {
            return Err(Error::Resolution(format!(
                "measure at resolution {} applied to kernel at resolution {}",
                self.resolution,
                f.resolution()
            )));
        }
        Ok(self
            .weights
            .iter()
            .enumerate()
            .map(|(p, &w)| f.get(p, p) * w)
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bratteli::BrattelDiagram;
    use crate::groupoid::UnitUltrametric;
    use std::sync::Arc;

    #[test]
    fn state_examples() {
        let g = Arc::new(TruncatedGroupoid::new(BrattelDiagram::car(1), 1, UnitUltrametric::default()).unwrap());
        let mu = Measure::uniform(&g);
        assert_eq!(mu.state_eval(&Kernel::identity(&g)).unwrap(), C64::new(1.0, 0.0));
        let f = Kernel::diagonal(&g, &[C64::new(1.0, 0.0), C64::new(-1.0, 0.0)]).unwrap();
        assert_eq!(mu.state_eval(&f).unwrap(), C64::new(0.0, 0.0));
        let e = Kernel::unit(&g, 0, 1).unwrap();
        assert_eq!(mu.state_eval(&e).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn validation() {
        let g = TruncatedGroupoid::new(BrattelDiagram::car(1), 1, UnitUltrametric::default()).unwrap();
        assert!(Measure::new(&g, vec![0.5, 0.5]).is_ok());
        assert!(Measure::new(&g, vec![0.5, 0.6]).is_err());
        assert!(Measure::new(&g, vec![1.5, -0.5]).is_err());
        assert!(Measure::new(&g, vec![1.0]).is_err());
    }
}

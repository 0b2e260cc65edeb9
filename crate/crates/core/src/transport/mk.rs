//! Lower bounds for the Monge–Kantorovič distance of the slip-norm L^{K,n}.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::tree::CylinderTree;
use crate::algebra::{stream_rng, Kernel, Measure, SpectralNorm, C64};
use crate::error::Result;
use crate::groupoid::TruncatedGroupoid;
use crate::quantum_metric::net::unit_space_diameter;
use crate::quantum_metric::{slip_norm, Stratification};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MkEstimate {
    /// Best (φ_a − φ_b)(f) over feasible iterates.
    pub value: f64,
    pub wasserstein: f64,
    pub iterations: usize,
    /// Iteration that produced `value`; 0 is the warm start.
    pub best_iteration: usize,
}

fn retract(f: Kernel, s: &Stratification, n: u32, backend: &dyn SpectralNorm) -> Result<Kernel> {
    let l = slip_norm(&f, s, n, backend)?;
    Ok(if l > 1.0 { f.scale(C64::new(1.0 / l, 0.0)) } else { f })
}

fn objective(a: &Measure, b: &Measure, f: &Kernel) -> Result<f64> {
    Ok((a.state_eval(f)? - b.state_eval(f)?).re)
}

/// Projected subgradient ascent of (φ_a − φ_b)(f) over Hermitian f with
/// L^{K,n}(f) ≤ 1, warm-started at the tree Kantorovich potential.
#[allow(clippy::too_many_arguments)]
pub fn mk_lower_bound(
    g: &Arc<TruncatedGroupoid>,
    s: &Stratification,
    n: u32,
    a: &Measure,
    b: &Measure,
    iters: usize,
    seed: u64,
    backend: &dyn SpectralNorm,
) -> Result<MkEstimate> {
    let tree = CylinderTree::new(g);
    let wasserstein = tree.wasserstein(a, b)?;
    let phi: Vec<C64> = tree.potential(a, b)?.into_iter().map(|x| C64::new(x, 0.0)).collect();
    let mut f = retract(Kernel::diagonal(g, &phi)?, s, n, backend)?;
    let mut best = (objective(a, b, &f)?, 0);
    let grad: Vec<f64> = a.weights().iter().zip(b.weights()).map(|(x, y)| x - y).collect();
    let scale = unit_space_diameter(g).max(f64::MIN_POSITIVE);
    let mut rng = stream_rng(seed, 0);
    for k in 1..=iters {
        let eta = scale / (k as f64).sqrt();
        let step: Vec<C64> = grad
            .iter()
            .map(|&d| C64::new(eta * (d + 0.1 * (rng.random::<f64>() - 0.5)), 0.0))
            .collect();
        f = retract(f.add(&Kernel::diagonal(g, &step)?)?, s, n, backend)?;
        let v = objective(a, b, &f)?;
        if v > best.0 {
            best = (v, k);
        }
    }
    Ok(MkEstimate {
        value: best.0,
        wasserstein,
        iterations: iters,
        best_iteration: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::spectral::default_backend;
    use crate::bratteli::BrattelDiagram;
    use crate::groupoid::UnitUltrametric;

    #[test]
    fn point_masses_and_equal_measures() {
        let g = Arc::new(TruncatedGroupoid::new(BrattelDiagram::car(1), 1, UnitUltrametric::default()).unwrap());
        let s = Stratification::new(&g);
        let (a, b) = (Measure::point(&g, 0), Measure::point(&g, 1));
        let e = mk_lower_bound(&g, &s, 1, &a, &b, 20, 0, default_backend()).unwrap();
        assert!(e.value >= 0.5 - 1e-6 && e.value <= 0.5 + 1e-9);
        let z = mk_lower_bound(&g, &s, 1, &a, &a, 20, 0, default_backend()).unwrap();
        assert!(z.value.abs() <= 1e-12);
    }
}

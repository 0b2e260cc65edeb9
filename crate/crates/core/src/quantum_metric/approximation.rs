//! The norm-approximation criterion sup_{f ∈ E} ‖f − m_φ f‖ against its I-norm bound.

use std::sync::Arc;

use serde::Serialize;

use super::ball::BallSampler;
use super::bound::beta_partial;
use super::multiplier::{multiplier_apply, Multiplier};
use super::roe::commutator_seminorm;
use super::stratification::Stratification;
use crate::algebra::{Kernel, Measure, SpectralNorm};
use crate::error::Result;
use crate::groupoid::TruncatedGroupoid;

pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproximationGap {
    pub samples: usize,
    /// sup op_norm(f − m_φ f).
    pub empirical: f64,
    /// sup ‖f − m_φ f‖_I.
    pub empirical_i: f64,
    /// β of the truncation level, when φ is an indicator of some G_m.
    pub beta: Option<f64>,
    /// sup sqrt(β) · L_ℓ¹(f).
    pub analytic: Option<f64>,
    /// Samples whose I-norm gap exceeds sqrt(β) · L_ℓ¹(f) + BOUND_SLACK.
    pub violations: usize,
}

pub fn gap_over(samples: &[Kernel], phi: &dyn Multiplier, backend: &dyn SpectralNorm) -> Result<ApproximationGap> {
    let mut out = ApproximationGap {
        samples: samples.len(),
        empirical: 0.0,
        empirical_i: 0.0,
        beta: None,
        analytic: None,
        violations: 0,
    };
    let Some(first) = samples.first() else {
        return Ok(out);
    };
    let g = first.groupoid();
    let beta = phi
        .truncation_level(g)
        .map(|m| beta_partial(g.diagram(), g.counts(), m, g.resolution()));
    out.beta = beta;
    for f in samples {
        let diff = f.sub(&multiplier_apply(phi, f)?)?;
        let op = diff.op_norm_with(backend)?;
        let i = diff.i_norm();
        out.empirical = out.empirical.max(op);
        out.empirical_i = out.empirical_i.max(i);
        if let Some(b) = beta {
            let a = b.sqrt() * commutator_seminorm(f, 1, backend)?;
            out.analytic = Some(out.analytic.unwrap_or(0.0).max(a));
            if i > a + BOUND_SLACK || op > a + BOUND_SLACK {
                out.violations += 1;
            }
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn approximation_gap(
    g: &Arc<TruncatedGroupoid>,
    s: &Stratification,
    n: u32,
    t_support: f64,
    phi: &dyn Multiplier,
    samples: usize,
    seed: u64,
    backend: &dyn SpectralNorm,
) -> Result<ApproximationGap> {
    let mu = Measure::uniform(g);
    let fs = BallSampler::new(n, t_support).sample(g, s, &mu, samples, seed, backend)?;
    gap_over(&fs, phi, backend)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::spectral::default_backend;
    use crate::bratteli::BrattelDiagram;
    use crate::groupoid::UnitUltrametric;
    use crate::quantum_metric::multiplier::{Identity, Truncation};

    #[test]
    fn identity_and_covering_truncation_give_zero() {
        let g = Arc::new(TruncatedGroupoid::new(BrattelDiagram::car(4), 4, UnitUltrametric::default()).unwrap());
        let s = Stratification::new(&g);
        let id = approximation_gap(&g, &s, 1, 16.0, &Identity, 10, 1, default_backend()).unwrap();
        assert_eq!((id.empirical, id.violations), (0.0, 0));
        let tr = approximation_gap(&g, &s, 1, 4.0, &Truncation { level: 2 }, 10, 1, default_backend()).unwrap();
        assert_eq!(tr.empirical, 0.0);
    }

    #[test]
    fn bound_holds_for_car() {
        let g = Arc::new(TruncatedGroupoid::new(BrattelDiagram::car(5), 5, UnitUltrametric::default()).unwrap());
        let s = Stratification::new(&g);
        let r = approximation_gap(&g, &s, 1, 32.0, &Truncation { level: 2 }, 20, 4, default_backend()).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.empirical <= r.analytic.unwrap() + BOUND_SLACK);
        assert!(r.empirical <= 0.125f64.sqrt());
    }
}

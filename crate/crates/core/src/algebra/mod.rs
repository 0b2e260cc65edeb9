//! The convolution algebra of cylindrical kernels and its norms.

pub mod growth;
pub mod kernel;
pub mod measure;
pub mod sampling;
pub mod spectral;

use std::sync::Arc;

pub use growth::{fiber_ball_count, fiber_bound, growth_profile, GrowthPoint};
pub use kernel::Kernel;
pub use measure::Measure;
pub use sampling::{stream_rng, unit_disc, KernelSampler};
pub use spectral::{CMatrix, SpectralNorm, C64};

use crate::error::{Error, Result};
use crate::groupoid::TruncatedGroupoid;

/// Empirical sup of op_norm / two_s_norm over random full-support kernels:
/// a lower bound for the rapid-decay constant at exponent s.
pub fn rd_ratio(g: &Arc<TruncatedGroupoid>, s: f64, samples: usize, seed: u64) -> Result<f64> {
    if s.is_nan() || s < 0.0 || samples == 0 {
        return Err(Error::Argument("rd_ratio needs s >= 0 and samples >= 1".into()));
    }
    let sampler = KernelSampler::new(g.resolution());
    let mut best = 0.0f64;
    for i in 0..samples {
        let f = sampler.sample(g, &mut stream_rng(seed, i as u64))?;
        let w = f.two_s_norm(s);
        if w > 0.0 {
            best = best.max(f.op_norm()? / w);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bratteli::BrattelDiagram;
    use crate::groupoid::UnitUltrametric;

    #[test]
    fn rd_ratio_is_at_most_one_for_the_unit_and_finite_otherwise() {
        let g = Arc::new(TruncatedGroupoid::new(BrattelDiagram::car(4), 4, UnitUltrametric::default()).unwrap());
        let one = Kernel::identity(&g);
        assert_eq!(one.op_norm().unwrap() / one.two_s_norm(10.0), 1.0);
        let r = rd_ratio(&g, 2.0, 50, 11).unwrap();
        assert!(r.is_finite() && r > 0.0);
        assert_eq!(r, rd_ratio(&g, 2.0, 50, 11).unwrap());
        let f = KernelSampler::new(4).sample(&g, &mut stream_rng(3, 0)).unwrap();
        let ratios: Vec<f64> = [0.0, 0.5, 1.0, 2.0].iter().map(|&s| f.op_norm().unwrap() / f.two_s_norm(s)).collect();
        assert!(ratios.windows(2).all(|w| w[1] <= w[0]));
    }
}

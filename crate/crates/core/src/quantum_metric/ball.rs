//! Random members of the seminorm unit ball E_{K,n}[t].

use std::sync::Arc;

use super::seminorm::slip_norm;
use super::stratification::Stratification;
use crate::algebra::{stream_rng, Kernel, KernelSampler, Measure, SpectralNorm, C64};
use crate::error::{Error, Result};
use crate::groupoid::TruncatedGroupoid;

const MAX_ATTEMPTS: usize = 64;

/// Samples f supported in B_ℓ(t) with φ_μ(f) = 0 and L^{K,n}(f) = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallSampler {
    pub order: u32,
    pub radius: f64,
    pub hermitian: bool,
    pub value_resolution: Option<usize>,
}

impl BallSampler {
    pub fn new(order: u32, radius: f64) -> Self {
        Self {
            order,
            radius,
            hermitian: false,
            value_resolution: None,
        }
    }

    pub fn hermitian(mut self, yes: bool) -> Self {
        self.hermitian = yes;
        self
    }

    pub fn value_resolution(mut self, r: usize) -> Self {
        self.value_resolution = Some(r);
        self
    }

    /// Sample `index` of the stream determined by `seed`.
    pub fn sample_one(
        &self,
        g: &Arc<TruncatedGroupoid>,
        s: &Stratification,
        mu: &Measure,
        seed: u64,
        index: u64,
        backend: &dyn SpectralNorm,
    ) -> Result<Kernel> {
        if self.radius.is_nan() || self.radius < 0.0 {
            return Err(Error::Argument(format!("ball radius {} must be nonnegative", self.radius)));
        }
        if mu.resolution() != g.resolution() {
            return Err(Error::Resolution(format!(
                "measure at resolution {} on a resolution-{} groupoid",
                mu.resolution(),
                g.resolution()
            )));
        }
        g.ball_is_complete(self.radius)?;
        let mut sampler = KernelSampler::new(g.ball_level(self.radius)).hermitian(self.hermitian);
        sampler.value_resolution = self.value_resolution;
        let one = Kernel::identity(g);
        let mut rng = stream_rng(seed, index);
        let mut last = None;
        for _ in 0..MAX_ATTEMPTS {
            let f = sampler.sample(g, &mut rng)?;
            let shift = mu.state_eval(&f)?;
            let p = f.sub(&one.scale(shift))?;
            let l = slip_norm(&p, s, self.order, backend)?;
            if l > 0.0 {
                return Ok(p.scale(C64::new(1.0 / l, 0.0)));
            }
            last = Some(p);
        }
        // Only the zero kernel is left, e.g. on a single-cylinder unit space.
        Ok(last.expect("at least one attempt"))
    }

    pub fn sample(
        &self,
        g: &Arc<TruncatedGroupoid>,
        s: &Stratification,
        mu: &Measure,
        count: usize,
        seed: u64,
        backend: &dyn SpectralNorm,
    ) -> Result<Vec<Kernel>> {
        (0..count as u64)
            .map(|i| self.sample_one(g, s, mu, seed, i, backend))
            .collect()
    }
}

pub fn sample_ball(
    g: &Arc<TruncatedGroupoid>,
    s: &Stratification,
    n: u32,
    t: f64,
    mu: &Measure,
    count: usize,
    seed: u64,
) -> Result<Vec<Kernel>> {
    BallSampler::new(n, t).sample(g, s, mu, count, seed, crate::algebra::spectral::default_backend())
}

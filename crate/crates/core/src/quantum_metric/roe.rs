//! Iterated commutators δⁿ(f) = [D_ℓ, ·]ⁿ(f) as λ-indexed fiber matrices.

use rayon::prelude::*;

use crate::algebra::{CMatrix, Kernel, SpectralNorm};
use crate::error::Result;

/// δⁿ(f): for tail class C and representative λ ∈ C, the matrix with entries
/// (ℓ(a, λ) − ℓ(b, λ))ⁿ f(a, b).
#[derive(Debug, Clone, Copy)]
pub struct RoeKernel<'a> {
    f: &'a Kernel,
    order: u32,
}

impl<'a> RoeKernel<'a> {
    pub fn new(f: &'a Kernel, order: u32) -> Self {
        Self { f, order }
    }

    pub fn kernel(&self) -> &'a Kernel {
        self.f
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// ℓ(a, λ) for every a in tail class `c`, λ the member at `pos`.
    pub fn weights(&self, c: usize, pos: usize) -> Vec<f64> {
        let g = self.f.groupoid();
        let members = self.f.members(c);
        let lambda = members[pos];
        members.iter().map(|&a| g.length_f64(a, lambda)).collect()
    }

    pub fn matrix(&self, c: usize, pos: usize) -> CMatrix {
        let w = self.weights(c, pos);
        let block = &self.f.blocks()[c];
        let n = self.order as i32;
        CMatrix::from_fn(block.nrows(), block.ncols(), |i, j| {
            block[(i, j)] * (w[i] - w[j]).powi(n)
        })
    }

    /// (class, representative position) pairs in canonical order.
    pub fn indices(&self) -> Vec<(usize, usize)> {
        self.f
            .blocks()
            .iter()
            .enumerate()
            .flat_map(|(c, b)| (0..b.nrows()).map(move |p| (c, p)))
            .collect()
    }

    /// ‖δⁿ(f)‖: max spectral norm over classes and representatives.
    ///
    /// Blocks are visited in decreasing order of a cheap upper bound and
    /// skipped once that bound falls clearly below the running maximum, so the
    /// result is the same as evaluating every block.
    pub fn norm(&self, backend: &dyn SpectralNorm) -> Result<f64> {
        let mut candidates: Vec<(f64, CMatrix)> = self
            .indices()
            .into_par_iter()
            .filter(|&(c, _)| self.f.blocks()[c].nrows() >= 2)
            .map(|(c, p)| {
                let m = self.matrix(c, p);
                (norm_upper_bound(&m), m)
            })
            .collect();
        candidates.sort_by(|x, y| y.0.total_cmp(&x.0));
        let chunk = rayon::current_num_threads().max(1);
        let mut best = 0.0f64;
        for group in candidates.chunks(chunk) {
            if group[0].0 * (1.0 + PRUNE_MARGIN) < best {
                break;
            }
            let cutoff = best;
            let v = group
                .par_iter()
                .filter(|(b, _)| b * (1.0 + PRUNE_MARGIN) >= cutoff)
                .map(|(_, m)| backend.norm(m))
                .try_reduce(|| 0.0, |x, y| Ok(x.max(y)))?;
            best = best.max(v);
        }
        Ok(best)
    }
}

const PRUNE_MARGIN: f64 = 1e-9;

/// min(‖M‖_F, sqrt(‖M‖_1 ‖M‖_∞)), both at least the spectral norm.
fn norm_upper_bound(m: &CMatrix) -> f64 {
    let rows = (0..m.nrows()).map(|i| m.row(i).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let cols = (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    m.norm().min((rows * cols).sqrt())
}

pub fn delta_n(f: &Kernel, n: u32) -> RoeKernel<'_> {
    RoeKernel::new(f, n)
}

/// L_ℓⁿ(f) = ‖δⁿ(f)‖.
pub fn commutator_seminorm(f: &Kernel, n: u32, backend: &dyn SpectralNorm) -> Result<f64> {
    RoeKernel::new(f, n).norm(backend)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::spectral::default_backend;
    use crate::algebra::{stream_rng, KernelSampler, C64};
    use crate::bratteli::BrattelDiagram;
    use crate::groupoid::{TruncatedGroupoid, UnitUltrametric};
    use std::sync::Arc;

    fn car(d: usize) -> Arc<TruncatedGroupoid> {
        Arc::new(TruncatedGroupoid::new(BrattelDiagram::car(d), d, UnitUltrametric::default()).unwrap())
    }

    #[test]
    fn units_and_diagonals_commute() {
        let g = car(3);
        let one = Kernel::identity(&g);
        assert_eq!(commutator_seminorm(&one, 1, default_backend()).unwrap(), 0.0);
        let f = KernelSampler::new(0).sample(&g, &mut stream_rng(2, 0)).unwrap();
        for n in 1..4 {
            assert_eq!(commutator_seminorm(&f, n, default_backend()).unwrap(), 0.0);
        }
    }

    #[test]
    fn order_zero_is_the_fiber_matrix() {
        let g = car(2);
        let f = KernelSampler::new(2).sample(&g, &mut stream_rng(5, 0)).unwrap();
        let r = delta_n(&f, 0);
        for (c, p) in r.indices() {
            assert_eq!(r.matrix(c, p), f.blocks()[c]);
        }
    }

    #[test]
    fn weighted_entry_example() {
        // In CAR at D = 2 with λ = path 0: ℓ(2, λ) = 2 and ℓ(1, λ) = 4.
        let g = car(2);
        let f = Kernel::from_fn(&g, 2, |a, b| if (a, b) == (2, 1) { C64::new(1.5, 0.0) } else { C64::new(0.0, 0.0) }).unwrap();
        let r = delta_n(&f, 2);
        let w = r.weights(0, 0);
        assert_eq!((w[2], w[1]), (2.0, 4.0));
        assert_eq!(r.matrix(0, 0)[(2, 1)], C64::new(6.0, 0.0));
    }

    #[test]
    fn single_entry_norm_is_max_weight_gap() {
        let g = car(2);
        let f = Kernel::unit(&g, 2, 1).unwrap();
        let expected = (0..4)
            .map(|l| (g.length_f64(2, l) - g.length_f64(1, l)).abs())
            .fold(0.0, f64::max);
        assert_eq!(commutator_seminorm(&f, 1, default_backend()).unwrap(), expected);
    }
}

//! Cylindrical kernels as block matrices over tail classes.

use std::borrow::Cow;
use std::sync::Arc;

use rayon::prelude::*;

use super::spectral::{default_backend, CMatrix, SpectralNorm, C64};
use crate::error::{Error, Result};
use crate::groupoid::{PathId, TruncatedGroupoid};

/// A function on G_m at resolution D, stored as one square matrix per tail class
/// of level m. Entry (a, b) of the block holding paths a and b is f(a, b).
#[derive(Debug, Clone)]
pub struct Kernel {
    g: Arc<TruncatedGroupoid>,
    level: usize,
    blocks: Vec<CMatrix>,
}

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

impl Kernel {
    pub fn zeros(g: &Arc<TruncatedGroupoid>, level: usize) -> Result<Self> {
        if level > g.resolution() {
            return Err(Error::Resolution(format!(
                "support level {level} exceeds resolution {}",
                g.resolution()
            )));
        }
        let blocks = g
            .tail(level)
            .classes
            .iter()
            .map(|c| CMatrix::zeros(c.len(), c.len()))
            .collect();
        Ok(Self {
            g: Arc::clone(g),
            level,
            blocks,
        })
    }

    /// The unit 1_{G^(0)}.
    pub fn identity(g: &Arc<TruncatedGroupoid>) -> Self {
        Self::from_fn(g, 0, |a, b| if a == b { ONE } else { ZERO }).expect("level 0 is valid")
    }

    pub fn from_fn(
        g: &Arc<TruncatedGroupoid>,
        level: usize,
        mut f: impl FnMut(PathId, PathId) -> C64,
    ) -> Result<Self> {
        let mut k = Self::zeros(g, level)?;
        for (c, members) in g.tail(level).classes.iter().enumerate() {
            let block = &mut k.blocks[c];
            for (i, &a) in members.iter().enumerate() {
                for (j, &b) in members.iter().enumerate() {
                    block[(i, j)] = f(a, b);
                }
            }
        }
        Ok(k)
    }

    /// Diagonal kernel with `values[p]` at (p, p).
    pub fn diagonal(g: &Arc<TruncatedGroupoid>, values: &[C64]) -> Result<Self> {
        if values.len() != g.num_paths() {
            return Err(Error::Argument(format!(
                "{} diagonal values for {} paths",
                values.len(),
                g.num_paths()
            )));
        }
        Self::from_fn(g, 0, |a, _| values[a])
    }

    /// The matrix unit e_{μλ} at its minimal support level.
    pub fn unit(g: &Arc<TruncatedGroupoid>, mu: PathId, lambda: PathId) -> Result<Self> {
        let c = g.minimal_class(mu, lambda)?;
        let mut k = Self::zeros(g, c.level)?;
        k.set(mu, lambda, ONE)?;
        Ok(k)
    }

    pub fn groupoid(&self) -> &Arc<TruncatedGroupoid> {
        &self.g
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn resolution(&self) -> usize {
        self.g.resolution()
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    /// Members of tail class `c` at this kernel's level.
    pub fn members(&self, c: usize) -> &[PathId] {
        &self.g.tail(self.level).classes[c]
    }

    fn locate(&self, mu: PathId, lambda: PathId) -> Option<(usize, usize, usize)> {
        let t = self.g.tail(self.level);
        let (c, d) = (t.class_of(mu), t.class_of(lambda));
        (c == d).then(|| (c, t.position(mu), t.position(lambda)))
    }

    /// f(μ, λ); zero outside G_m.
    pub fn get(&self, mu: PathId, lambda: PathId) -> C64 {
        self.locate(mu, lambda)
            .map(|(c, i, j)| self.blocks[c][(i, j)])
            .unwrap_or(ZERO)
    }

    pub fn set(&mut self, mu: PathId, lambda: PathId, v: C64) -> Result<()> {
        let (c, i, j) = self.locate(mu, lambda).ok_or_else(|| {
            Error::Path(format!(
                "({}, {}) is not a class of G_{}",
                self.g.path(mu),
                self.g.path(lambda),
                self.level
            ))
        })?;
        self.blocks[c][(i, j)] = v;
        Ok(())
    }

    /// All classes of G_m with their values, in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (PathId, PathId, C64)> + '_ {
        self.blocks.iter().enumerate().flat_map(move |(c, b)| {
            let members = self.members(c);
            members.iter().enumerate().flat_map(move |(i, &a)| {
                members.iter().enumerate().map(move |(j, &l)| (a, l, b[(i, j)]))
            })
        })
    }

    /// Same function viewed at a coarser partition m ≥ level.
    pub fn at_level(&self, m: usize) -> Result<Kernel> {
        if m < self.level {
            return Err(Error::Argument(format!(
                "cannot lift a level-{} kernel to level {m}; use restrict",
                self.level
            )));
        }
        if m == self.level {
            return Ok(self.clone());
        }
        Kernel::from_fn(&self.g, m, |a, b| self.get(a, b))
    }

    /// Product with the indicator of G_m.
    pub fn restrict(&self, m: usize) -> Kernel {
        let m = m.min(self.level);
        Kernel::from_fn(&self.g, m, |a, b| self.get(a, b)).expect("level within resolution")
    }

    pub fn same_groupoid(&self, other: &Kernel) -> Result<()> {
        if Arc::ptr_eq(&self.g, &other.g)
            || (self.g.resolution() == other.g.resolution()
                && self.g.metric() == other.g.metric()
                && self.g.diagram() == other.g.diagram())
        {
            Ok(())
        } else {
            Err(Error::Resolution(format!(
                "kernels live on different groupoids (resolutions {} and {})",
                self.g.resolution(),
                other.g.resolution()
            )))
        }
    }

    fn aligned<'a>(&'a self, other: &'a Kernel) -> Result<(Cow<'a, Kernel>, Cow<'a, Kernel>)> {
        self.same_groupoid(other)?;
        let m = self.level.max(other.level);
        let lift = |k: &'a Kernel| -> Result<Cow<'a, Kernel>> {
            if k.level == m {
                Ok(Cow::Borrowed(k))
            } else {
                Ok(Cow::Owned(k.at_level(m)?))
            }
        };
        Ok((lift(self)?, lift(other)?))
    }

    fn zip(&self, other: &Kernel, op: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Kernel> {
        let (a, b) = self.aligned(other)?;
        let blocks = a.blocks.iter().zip(&b.blocks).map(|(x, y)| op(x, y)).collect();
        Ok(Kernel {
            g: Arc::clone(&self.g),
            level: a.level,
            blocks,
        })
    }

    /// f * g, blockwise matrix product at level max(m_f, m_g).
    pub fn convolve(&self, other: &Kernel) -> Result<Kernel> {
        self.zip(other, |x, y| x * y)
    }

    pub fn add(&self, other: &Kernel) -> Result<Kernel> {
        self.zip(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &Kernel) -> Result<Kernel> {
        self.zip(other, |x, y| x - y)
    }

    pub fn scale(&self, c: C64) -> Kernel {
        self.map_blocks(|b| b * c)
    }

    pub fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Kernel {
        Kernel {
            g: Arc::clone(&self.g),
            level: self.level,
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    /// Pointwise map over classes, keeping the support level.
    pub fn map_entries(&self, mut f: impl FnMut(PathId, PathId, C64) -> C64) -> Kernel {
        let mut out = self.clone();
        for (c, block) in out.blocks.iter_mut().enumerate() {
            let members = &self.g.tail(self.level).classes[c];
            for (i, &a) in members.iter().enumerate() {
                for (j, &b) in members.iter().enumerate() {
                    block[(i, j)] = f(a, b, block[(i, j)]);
                }
            }
        }
        out
    }

    /// f*(μ, λ) = conj f(λ, μ).
    pub fn adjoint(&self) -> Kernel {
        self.map_blocks(|b| b.adjoint())
    }

    /// Max over fibers of the ℓ¹ sums of f and f*.
    pub fn i_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for b in &self.blocks {
            for j in 0..b.ncols() {
                best = best.max(b.column(j).iter().map(|z| z.norm()).sum());
            }
            for i in 0..b.nrows() {
                best = best.max(b.row(i).iter().map(|z| z.norm()).sum());
            }
        }
        best
    }

    pub fn op_norm(&self) -> Result<f64> {
        self.op_norm_with(default_backend())
    }

    /// Max over tail classes of the spectral norm of the fiber matrix.
    pub fn op_norm_with(&self, backend: &dyn SpectralNorm) -> Result<f64> {
        self.blocks
            .par_iter()
            .map(|b| backend.norm(b))
            .try_reduce(|| 0.0, |x, y| Ok(x.max(y)))
    }

    /// Max over fibers of sqrt(Σ |f|² (1 + ℓ)^{2s}) for f and f*.
    pub fn two_s_norm(&self, s: f64) -> f64 {
        let mut best = 0.0f64;
        for (c, b) in self.blocks.iter().enumerate() {
            let members = self.members(c);
            let w = |i: usize, j: usize| {
                let l = self.g.length_f64(members[i], members[j]);
                b[(i, j)].norm_sqr() * (1.0 + l).powf(2.0 * s)
            };
            for j in 0..b.ncols() {
                best = best.max((0..b.nrows()).map(|i| w(i, j)).sum());
            }
            for i in 0..b.nrows() {
                best = best.max((0..b.ncols()).map(|j| w(i, j)).sum());
            }
        }
        best.sqrt()
    }

    /// Restriction to the unit space.
    pub fn cond_expect(&self) -> Kernel {
        Kernel::from_fn(&self.g, 0, |a, _| self.get(a, a)).expect("level 0 is valid")
    }

    pub fn diagonal_values(&self) -> Vec<C64> {
        (0..self.g.num_paths()).map(|p| self.get(p, p)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation, comparing at the common level.
    pub fn max_deviation(&self, other: &Kernel) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn is_hermitian(&self) -> bool {
        self.blocks.iter().all(|b| *b == b.adjoint())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bratteli::BrattelDiagram;
    use crate::groupoid::UnitUltrametric;

    fn car(d: usize) -> Arc<TruncatedGroupoid> {
        Arc::new(TruncatedGroupoid::new(BrattelDiagram::car(d), d, UnitUltrametric::default()).unwrap())
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_norms() {
        let g = car(3);
        let one = Kernel::identity(&g);
        assert_eq!(one.i_norm(), 1.0);
        assert!((one.op_norm().unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(one.two_s_norm(5.0), 1.0);
        assert!(one.adjoint().max_deviation(&one).unwrap() == 0.0);
    }

    #[test]
    fn all_ones_block() {
        let g = car(2);
        let f = Kernel::from_fn(&g, 2, |_, _| c(1.0)).unwrap();
        assert_eq!(f.i_norm(), 4.0);
        assert!((f.op_norm().unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(f.scale(c(-2.5)).i_norm(), 10.0);
    }

    #[test]
    fn matrix_units_multiply() {
        let g = car(2);
        let (a, b, d) = (0, 1, 3);
        let e_ab = Kernel::unit(&g, a, b).unwrap();
        let e_bd = Kernel::unit(&g, b, d).unwrap();
        let prod = e_ab.convolve(&e_bd).unwrap();
        let e_ad = Kernel::unit(&g, a, d).unwrap();
        assert_eq!(prod.max_deviation(&e_ad).unwrap(), 0.0);
        assert_eq!(e_ab.adjoint().max_deviation(&Kernel::unit(&g, b, a).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_classes_multiply_to_zero() {
        let g = car(2);
        // Paths {0,2} and {1,3} are the tail classes at level 1.
        let x = Kernel::unit(&g, 0, 2).unwrap();
        let y = Kernel::unit(&g, 1, 3).unwrap();
        assert_eq!(x.convolve(&y).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn two_s_norm_example() {
        let g = car(2);
        let e = Kernel::unit(&g, 0, 2).unwrap();
        assert_eq!(g.length(0, 2), 2);
        assert!((e.two_s_norm(1.0) - 3.0).abs() < 1e-15);
        assert_eq!(e.two_s_norm(0.0), 1.0);
    }

    #[test]
    fn conditional_expectation() {
        let g = car(2);
        let f = Kernel::from_fn(&g, 2, |a, b| C64::new(a as f64, b as f64)).unwrap();
        let p = f.cond_expect();
        assert_eq!(p.level(), 0);
        assert_eq!(p.cond_expect().max_deviation(&p).unwrap(), 0.0);
        assert!(p.op_norm().unwrap() <= f.op_norm().unwrap());
        assert_eq!(Kernel::unit(&g, 0, 3).unwrap().cond_expect().max_abs(), 0.0);
    }

    #[test]
    fn level_changes() {
        let g = car(3);
        let f = Kernel::from_fn(&g, 1, |a, b| C64::new(1.0 + a as f64, -(b as f64))).unwrap();
        let up = f.at_level(3).unwrap();
        assert_eq!(up.blocks().len(), 1);
        assert_eq!(up.restrict(1).max_deviation(&f).unwrap(), 0.0);
        assert!(f.at_level(0).is_err());
        for (a, b, v) in up.entries() {
            let expected = if g.k_of(a, b) <= 1 { f.get(a, b) } else { C64::new(0.0, 0.0) };
            assert_eq!(v, expected);
        }
    }

    #[test]
    fn resolution_mismatch() {
        let (g, h) = (car(2), car(3));
        let e = Kernel::identity(&g).convolve(&Kernel::identity(&h)).unwrap_err();
        assert!(matches!(e, Error::Resolution(_)));
    }
}

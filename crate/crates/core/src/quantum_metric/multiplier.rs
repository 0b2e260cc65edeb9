//! Fourier multipliers m_φ(f) = φ · f and their lift T^φ to Roe kernels.

use std::collections::HashMap;
use std::fmt;

use super::roe::RoeKernel;
use crate::algebra::{CMatrix, Kernel, C64};
use crate::error::{Error, Result};
use crate::groupoid::{PathId, TruncatedGroupoid};
use crate::registry::{required_param, Registry};

/// A real scalar symbol on the classes of G_D.
pub trait Multiplier: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    /// φ(μ, λ), or `None` where the symbol is undefined.
    fn value(&self, g: &TruncatedGroupoid, mu: PathId, lambda: PathId) -> Option<f64>;

    /// Some(m) when the symbol is the indicator of G_m.
    fn truncation_level(&self, _g: &TruncatedGroupoid) -> Option<usize> {
        None
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Multiplier for Identity {
    fn name(&self) -> String {
        "identity".into()
    }

    fn value(&self, _: &TruncatedGroupoid, _: PathId, _: PathId) -> Option<f64> {
        Some(1.0)
    }

    fn truncation_level(&self, g: &TruncatedGroupoid) -> Option<usize> {
        Some(g.resolution())
    }
}

/// 1_{G_m}.
#[derive(Debug, Clone, Copy)]
pub struct Truncation {
    pub level: usize,
}

impl Multiplier for Truncation {
    fn name(&self) -> String {
        format!("truncation:{}", self.level)
    }

    fn value(&self, g: &TruncatedGroupoid, mu: PathId, lambda: PathId) -> Option<f64> {
        Some(if g.k_of(mu, lambda) <= self.level { 1.0 } else { 0.0 })
    }

    fn truncation_level(&self, g: &TruncatedGroupoid) -> Option<usize> {
        Some(self.level.min(g.resolution()))
    }
}

/// Plateau at cutoff t. Since ℓ takes only path-count values, this is the
/// indicator of B_ℓ(t).
#[derive(Debug, Clone, Copy)]
pub struct Plateau {
    pub t: f64,
}

impl Multiplier for Plateau {
    fn name(&self) -> String {
        format!("plateau:{}", self.t)
    }

    fn value(&self, g: &TruncatedGroupoid, mu: PathId, lambda: PathId) -> Option<f64> {
        Some(if g.length_f64(mu, lambda) <= self.t { 1.0 } else { 0.0 })
    }

    fn truncation_level(&self, g: &TruncatedGroupoid) -> Option<usize> {
        Some(g.ball_level(self.t))
    }
}

pub fn plateau(t: f64) -> Result<Plateau> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::Argument(format!("plateau cutoff {t} must be nonnegative")));
    }
    Ok(Plateau { t })
}

/// Explicit symbol values; unlisted classes are undefined.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tabulated {
    pub values: HashMap<(PathId, PathId), f64>,
}

impl Multiplier for Tabulated {
    fn name(&self) -> String {
        "tabulated".into()
    }

    fn value(&self, _: &TruncatedGroupoid, mu: PathId, lambda: PathId) -> Option<f64> {
        self.values.get(&(mu, lambda)).copied()
    }
}

pub fn registry() -> Registry<dyn Multiplier> {
    let mut r: Registry<dyn Multiplier> = Registry::new("multiplier");
    r.register("identity", "phi = 1", |_| Ok(Box::new(Identity)));
    r.register("truncation", "indicator of G_m; param = m", |p| {
        Ok(Box::new(Truncation {
            level: required_param(p, "truncation level")?,
        }))
    });
    r.register("plateau", "indicator of the length ball B(t); param = t", |p| {
        Ok(Box::new(plateau(required_param(p, "plateau cutoff")?)?))
    });
    r
}

fn symbol_at(phi: &dyn Multiplier, g: &TruncatedGroupoid, a: PathId, b: PathId) -> Result<f64> {
    phi.value(g, a, b).ok_or_else(|| {
        Error::UndefinedSymbol(format!("({}|{})", g.path(a), g.path(b)))
    })
}

/// m_φ(f) = φ · f on the support of f, at the level of f.
pub fn multiplier_apply(phi: &dyn Multiplier, f: &Kernel) -> Result<Kernel> {
    let g = f.groupoid();
    let mut err = None;
    let out = f.map_entries(|a, b, v| {
        if v == C64::new(0.0, 0.0) || err.is_some() {
            return v;
        }
        match symbol_at(phi, g, a, b) {
            Ok(s) => v * s,
            Err(e) => {
                err = Some(e);
                v
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// T^φ applied to the fiber matrix of δⁿ(f) at (class, representative).
pub fn lifted_matrix(phi: &dyn Multiplier, r: &RoeKernel<'_>, c: usize, pos: usize) -> Result<CMatrix> {
    let f = r.kernel();
    let g = f.groupoid();
    let members = f.members(c);
    let mut m = r.matrix(c, pos);
    let block = &f.blocks()[c];
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if block[(i, j)] != C64::new(0.0, 0.0) {
                m[(i, j)] *= symbol_at(phi, g, members[i], members[j])?;
            }
        }
    }
    Ok(m)
}

/// max over classes, representatives and entries of |δⁿ(m_φ f) − T^φ δⁿ(f)|.
pub fn verify_intertwining(phi: &dyn Multiplier, f: &Kernel, n: u32) -> Result<f64> {
    let left_kernel = multiplier_apply(phi, f)?;
    let left = RoeKernel::new(&left_kernel, n);
    let right = RoeKernel::new(f, n);
    let mut worst = 0.0f64;
    for (c, p) in right.indices() {
        let l = left.matrix(c, p);
        let r = lifted_matrix(phi, &right, c, p)?;
        worst = worst.max((l - r).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    Ok(worst)
}

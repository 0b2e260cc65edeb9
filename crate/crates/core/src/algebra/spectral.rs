//! Spectral-norm backends for fiber matrices.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::registry::{required_param, Registry};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub const POWER_TOLERANCE: f64 = 1e-10;
pub const POWER_MAX_ITERATIONS: usize = 100_000;
pub const DENSE_LIMIT: usize = 64;

pub trait SpectralNorm: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn norm(&self, m: &CMatrix) -> Result<f64>;
}

/// A^H A with a fixed summation order.
fn gram(a: &CMatrix) -> CMatrix {
    let c = a.ncols();
    let mut g = CMatrix::zeros(c, c);
    for j in 0..c {
        for i in 0..=j {
            let s = a.column(i).dotc(&a.column(j));
            g[(i, j)] = s;
            g[(j, i)] = s.conj();
        }
    }
    g
}

fn co_gram(a: &CMatrix) -> CMatrix {
    gram(&a.adjoint())
}

fn top_eigenvalue(h: CMatrix) -> f64 {
    h.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(0.0f64, f64::max)
}

/// Whether M^H should stand in for M, decided by a key that is unchanged under
/// negation and swapped under adjoint. `None` when the keys tie.
fn prefer_adjoint(m: &CMatrix) -> Option<bool> {
    if m.nrows() != m.ncols() {
        return Some(m.nrows() < m.ncols());
    }
    let key = |z: C64| (z.re.abs(), z.im.abs());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let (a, b) = (key(m[(i, j)]), key(m[(j, i)]));
            if a != b {
                return Some(a > b);
            }
        }
    }
    None
}

fn is_skew_or_hermitian(m: &CMatrix) -> bool {
    let adj = m.adjoint();
    adj == *m || adj == -m
}

/// Dense Hermitian eigen-decomposition of a Gram matrix.
///
/// The Gram matrix is taken of a canonical choice among M and M^H, so the
/// result is identical for M, -M, M^H and -M^H.
#[derive(Debug, Clone, Copy, Default)]
pub struct Dense;

impl SpectralNorm for Dense {
    fn name(&self) -> &'static str {
        "dense"
    }

    fn norm(&self, m: &CMatrix) -> Result<f64> {
        if m.is_empty() {
            return Ok(0.0);
        }
        if m.nrows() == 1 && m.ncols() == 1 {
            return Ok(m[(0, 0)].norm());
        }
        let top = match prefer_adjoint(m) {
            Some(false) => top_eigenvalue(gram(m)),
            Some(true) => top_eigenvalue(co_gram(m)),
            None if is_skew_or_hermitian(m) => top_eigenvalue(gram(m)),
            None => top_eigenvalue(gram(m)).max(top_eigenvalue(co_gram(m))),
        };
        Ok(top.max(0.0).sqrt())
    }
}

/// Power iteration on M^H M with a residual stopping rule.
#[derive(Debug, Clone, Copy)]
pub struct Power {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for Power {
    fn default() -> Self {
        Self {
            tolerance: POWER_TOLERANCE,
            max_iterations: POWER_MAX_ITERATIONS,
        }
    }
}

impl SpectralNorm for Power {
    fn name(&self) -> &'static str {
        "power"
    }

    fn norm(&self, m: &CMatrix) -> Result<f64> {
        let n = m.ncols();
        if m.is_empty() {
            return Ok(0.0);
        }
        let mh = m.adjoint();
        // Deterministic start vector with no special alignment.
        let mut x = CMatrix::from_fn(n, 1, |i, _| {
            let t = (i as f64 + 1.0) * 0.754_877_666_246_692_7;
            C64::new(1.0 + (t - t.floor()), 0.5 - (t * 1.7 - (t * 1.7).floor()))
        });
        let nx = x.norm();
        x /= C64::new(nx, 0.0);
        for _ in 0..self.max_iterations {
            let y = &mh * (m * &x);
            let lambda = x.dotc(&y).re;
            let ny = y.norm();
            if ny == 0.0 {
                return Ok(0.0);
            }
            let residual = (&y - &x * C64::new(lambda, 0.0)).norm();
            if residual <= self.tolerance * lambda.abs() {
                return Ok(lambda.max(0.0).sqrt());
            }
            x = y / C64::new(ny, 0.0);
        }
        Err(Error::NoConvergence {
            iterations: self.max_iterations,
        })
    }
}

/// Dense for small blocks, power iteration with dense fallback above.
#[derive(Debug, Clone, Copy, Default)]
pub struct Auto {
    pub power: Power,
}

impl SpectralNorm for Auto {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn norm(&self, m: &CMatrix) -> Result<f64> {
        if m.nrows().max(m.ncols()) <= DENSE_LIMIT {
            return Dense.norm(m);
        }
        match self.power.norm(m) {
            Err(Error::NoConvergence { .. }) => Dense.norm(m),
            other => other,
        }
    }
}

pub fn registry() -> Registry<dyn SpectralNorm> {
    let mut r: Registry<dyn SpectralNorm> = Registry::new("spectral norm");
    r.register("dense", "Hermitian eigen-decomposition of M*M and MM*", |_| Ok(Box::new(Dense)));
    r.register("power", "power iteration on M*M; optional param = relative tolerance", |p| {
        let tolerance = match p {
            Some(_) => required_param(p, "tolerance")?,
            None => POWER_TOLERANCE,
        };
        Ok(Box::new(Power {
            tolerance,
            max_iterations: POWER_MAX_ITERATIONS,
        }))
    });
    r.register("auto", "dense up to 64x64, power iteration above", |_| Ok(Box::new(Auto::default())));
    r
}

/// The process-wide default backend.
pub fn default_backend() -> &'static dyn SpectralNorm {
    static AUTO: OnceLock<Auto> = OnceLock::new();
    AUTO.get_or_init(Auto::default)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn all_ones_has_norm_n() {
        let m = CMatrix::from_element(4, 4, c(1.0, 0.0));
        assert!((Dense.norm(&m).unwrap() - 4.0).abs() < 1e-12);
        assert!((Power::default().norm(&m).unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn identity_and_zero() {
        let m = CMatrix::identity(5, 5);
        assert!((Dense.norm(&m).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(Power::default().norm(&m).unwrap(), 1.0);
        assert_eq!(Dense.norm(&CMatrix::zeros(3, 3)).unwrap(), 0.0);
        assert_eq!(Power::default().norm(&CMatrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn matches_svd() {
        let m = CMatrix::from_fn(6, 6, |i, j| c((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i as f64 - j as f64) * 0.3));
        let svd = m.clone().singular_values().iter().copied().fold(0.0, f64::max);
        assert!((Dense.norm(&m).unwrap() - svd).abs() < 1e-12 * svd);
        assert!((Power::default().norm(&m).unwrap() - svd).abs() < 1e-9 * svd);
    }

    #[test]
    fn dense_is_adjoint_invariant_bitwise() {
        let m = CMatrix::from_fn(5, 5, |i, j| c((i as f64 + 0.3).sin() * (j as f64 + 1.1), (i * j) as f64 * 0.17 - 0.4));
        let a = Dense.norm(&m).unwrap();
        assert_eq!(a, Dense.norm(&m.adjoint()).unwrap());
        assert_eq!(a, Dense.norm(&(-m.adjoint())).unwrap());
    }

    #[test]
    fn registry_lookup() {
        let r = registry();
        assert_eq!(r.names(), vec!["auto", "dense", "power"]);
        assert_eq!(r.create("power:1e-8").unwrap().name(), "power");
        assert!(r.create("lanczos").is_err());
    }

    #[test]
    fn power_reports_non_convergence() {
        let m = CMatrix::from_fn(3, 3, |i, j| if i == j { c(1.0 - i as f64 * 1e-9, 0.0) } else { c(0.0, 0.0) });
        let p = Power {
            tolerance: 1e-300,
            max_iterations: 5,
        };
        assert!(matches!(p.norm(&m), Err(Error::NoConvergence { iterations: 5 })));
    }
}

//! The total slip-norm L^{K,n} = max(L_ℓⁿ, L_Lip^K) and its report.

use serde::{Deserialize, Serialize};

use super::lipschitz::lipschitz_seminorm;
use super::roe::commutator_seminorm;
use super::stratification::Stratification;
use crate::algebra::{Kernel, SpectralNorm};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderValue {
    pub n: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    pub version: String,
    pub base: f64,
    pub resolution: usize,
    pub level: usize,
    pub seed: Option<u64>,
    pub spectral: String,
    pub i_norm: f64,
    pub op_norm: f64,
    pub l_lip: f64,
    pub l_ell: Vec<OrderValue>,
    pub total: Vec<OrderValue>,
}

impl SeminormReport {
    pub fn total_at(&self, n: u32) -> Option<f64> {
        self.total.iter().find(|o| o.n == n).map(|o| o.value)
    }

    pub fn l_ell_at(&self, n: u32) -> Option<f64> {
        self.l_ell.iter().find(|o| o.n == n).map(|o| o.value)
    }
}

fn check_order(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Argument("commutator order must be at least 1".into()));
    }
    Ok(())
}

/// L^{K,n}(f).
pub fn slip_norm(f: &Kernel, s: &Stratification, n: u32, backend: &dyn SpectralNorm) -> Result<f64> {
    check_order(n)?;
    let lip = lipschitz_seminorm(f, s);
    Ok(commutator_seminorm(f, n, backend)?.max(lip))
}

pub fn total_seminorm(
    f: &Kernel,
    s: &Stratification,
    orders: &[u32],
    backend: &dyn SpectralNorm,
) -> Result<SeminormReport> {
    if orders.is_empty() {
        return Err(Error::Argument("no commutator orders requested".into()));
    }
    for &n in orders {
        check_order(n)?;
    }
    let g = f.groupoid();
    let l_lip = lipschitz_seminorm(f, s);
    let mut l_ell = Vec::with_capacity(orders.len());
    let mut total = Vec::with_capacity(orders.len());
    for &n in orders {
        let v = commutator_seminorm(f, n, backend)?;
        l_ell.push(OrderValue { n, value: v });
        total.push(OrderValue {
            n,
            value: v.max(l_lip),
        });
    }
    Ok(SeminormReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        base: g.metric().base(),
        resolution: g.resolution(),
        level: f.level(),
        seed: None,
        spectral: backend.name().to_string(),
        i_norm: f.i_norm(),
        op_norm: f.op_norm_with(backend)?,
        l_lip,
        l_ell,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::spectral::default_backend;
    use crate::algebra::{stream_rng, KernelSampler, C64};
    use crate::bratteli::BrattelDiagram;
    use crate::groupoid::{TruncatedGroupoid, UnitUltrametric};
    use std::sync::Arc;

    #[test]
    fn constants_and_diagonals() {
        let g = Arc::new(TruncatedGroupoid::new(BrattelDiagram::car(2), 2, UnitUltrametric::default()).unwrap());
        let s = Stratification::new(&g);
        let c = Kernel::identity(&g).scale(C64::new(2.0, 1.0));
        let r = total_seminorm(&c, &s, &[1, 2, 3], default_backend()).unwrap();
        assert!(r.total.iter().all(|o| o.value == 0.0));
        let d = KernelSampler::new(0).sample(&g, &mut stream_rng(4, 0)).unwrap();
        let r = total_seminorm(&d, &s, &[1], default_backend()).unwrap();
        assert_eq!(r.total_at(1), Some(r.l_lip));
        assert_eq!(r.l_ell_at(1), Some(0.0));
        assert!(slip_norm(&d, &s, 0, default_backend()).is_err());
    }

    #[test]
    fn total_is_max_of_parts() {
        let g = Arc::new(TruncatedGroupoid::new(BrattelDiagram::car(2), 2, UnitUltrametric::default()).unwrap());
        let s = Stratification::new(&g);
        let f = KernelSampler::new(2).hermitian(true).sample(&g, &mut stream_rng(9, 0)).unwrap();
        let r = total_seminorm(&f, &s, &[1], default_backend()).unwrap();
        let lip = lipschitz_seminorm(&f, &s);
        let comm = commutator_seminorm(&f, 1, default_backend()).unwrap();
        assert_eq!(r.total_at(1), Some(lip.max(comm)));
        assert_eq!(r.level, 2);
    }
}

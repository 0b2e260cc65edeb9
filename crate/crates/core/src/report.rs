//! Run configuration, report assembly and CSV emission.

use std::fmt::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{stream_rng, Kernel, KernelSampler, SpectralNorm};
use crate::error::{Error, Result};
use crate::groupoid::TruncatedGroupoid;
use crate::bratteli::BrattelDiagram;
use crate::quantum_metric::{total_seminorm, BetaBound, NetSummary, SeminormReport, Stratification};
use crate::transport::MkEstimate;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub resolution: usize,
    pub level: usize,
    pub order: u32,
    pub base: f64,
    pub seed: u64,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.level > self.resolution {
            return Err(Error::Argument(format!(
                "level {} exceeds resolution {}",
                self.level, self.resolution
            )));
        }
        if !(self.base > 0.0 && self.base < 1.0) {
            return Err(Error::Argument(format!("base {} not in (0,1)", self.base)));
        }
        if self.order == 0 {
            return Err(Error::Argument("commutator order must be at least 1".into()));
        }
        Ok(())
    }
}

/// Seminorms of `f` for orders 1..=n, stamped with the seed that produced it.
pub fn analyze(
    f: &Kernel,
    n: u32,
    seed: Option<u64>,
    backend: &dyn SpectralNorm,
) -> Result<SeminormReport> {
    let s = Stratification::new(f.groupoid());
    let orders: Vec<u32> = (1..=n).collect();
    let mut r = total_seminorm(f, &s, &orders, backend)?;
    r.seed = seed;
    Ok(r)
}

/// The seeded random kernel used by `analyze` when no kernel file is given.
pub fn seeded_kernel(g: &Arc<TruncatedGroupoid>, level: usize, seed: u64) -> Result<Kernel> {
    KernelSampler::new(level).sample(g, &mut stream_rng(seed, 0))
}

/// Validation summary of a parsed diagram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagramSummary {
    pub version: &'static str,
    pub levels: usize,
    pub sizes: Vec<usize>,
    pub sources: Vec<[usize; 2]>,
    /// ℓ_k for k = 0..=levels, in decimal.
    pub ell: Vec<String>,
}

impl DiagramSummary {
    pub fn new(d: &BrattelDiagram) -> Self {
        Self {
            version: VERSION,
            levels: d.num_levels(),
            sizes: d.sizes().to_vec(),
            sources: d.sources().iter().map(|v| [v.level, v.index]).collect(),
            ell: d.path_counts().ell.iter().map(|x| x.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetReport {
    pub version: &'static str,
    pub base: f64,
    pub resolution: usize,
    pub order: u32,
    pub radius: f64,
    pub net: NetSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MkReport {
    pub version: &'static str,
    pub base: f64,
    pub resolution: usize,
    pub order: u32,
    pub seed: u64,
    pub solver: &'static str,
    pub transport: f64,
    pub mk: MkEstimate,
}

pub fn beta_csv(rows: &[BetaBound]) -> String {
    let mut s = String::from("m,k_max,beta_partial,tail,beta_total,ratio,conclusive\n");
    for b in rows {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{:e},{},{:e},{},{}",
            b.m,
            b.k_max,
            b.partial,
            opt(b.tail),
            b.total,
            opt(b.ratio),
            b.conclusive
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::spectral::default_backend;
    use crate::bratteli::BrattelDiagram;
    use crate::format::to_json;
    use crate::groupoid::UnitUltrametric;
    use crate::quantum_metric::qgh_bound;

    #[test]
    fn report_of_the_unit() {
        let g = Arc::new(TruncatedGroupoid::new(BrattelDiagram::car(3), 3, UnitUltrametric::default()).unwrap());
        let r = analyze(&Kernel::identity(&g), 2, None, default_backend()).unwrap();
        assert_eq!((r.op_norm, r.i_norm, r.l_lip), (1.0, 1.0, 0.0));
        assert!(r.total.iter().all(|o| o.value == 0.0));
        let f = seeded_kernel(&g, 2, 5).unwrap();
        let a = to_json(&analyze(&f, 3, Some(5), default_backend()).unwrap());
        let b = to_json(&analyze(&seeded_kernel(&g, 2, 5).unwrap(), 3, Some(5), default_backend()).unwrap());
        assert_eq!(a, b);
        let back: SeminormReport = serde_json::from_str(&a).unwrap();
        assert_eq!(to_json(&back), a);
    }

    #[test]
    fn beta_table() {
        let d = BrattelDiagram::car(8);
        let rows: Vec<_> = (1..=2).map(|m| qgh_bound(&d, m, 8).unwrap()).collect();
        let csv = beta_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("1,8,"));
        assert!(lines[1].contains(",2.5e-1,"));
        assert!(lines[1].ends_with("true"));
    }

    #[test]
    fn config_validation() {
        let mut c = RunConfig {
            resolution: 3,
            level: 2,
            order: 1,
            base: 0.5,
            seed: 0,
        };
        assert!(c.validate().is_ok());
        c.level = 4;
        assert!(c.validate().is_err());
        c.level = 1;
        c.base = 1.0;
        assert!(c.validate().is_err());
    }
}

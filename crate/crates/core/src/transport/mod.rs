//! Wasserstein-1 distances between unit-space measures and Monge–Kantorovič
//! lower bounds.

pub mod lp;
pub mod mk;
pub mod tree;

use std::fmt;

pub use lp::{transportation_simplex, wasserstein_lp, DEFAULT_CYLINDER_CAP};
pub use mk::{mk_lower_bound, MkEstimate};
pub use tree::{wasserstein_tree, CylinderTree};

use crate::algebra::Measure;
use crate::error::Result;
use crate::groupoid::TruncatedGroupoid;
use crate::registry::{required_param, Registry};

pub trait TransportSolver: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;
    fn distance(&self, g: &TruncatedGroupoid, a: &Measure, b: &Measure) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TreeSolver;

impl TransportSolver for TreeSolver {
    fn name(&self) -> &'static str {
        "tree"
    }

    fn distance(&self, g: &TruncatedGroupoid, a: &Measure, b: &Measure) -> Result<f64> {
        wasserstein_tree(g, a, b)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LpSolver {
    pub cap: usize,
}

impl TransportSolver for LpSolver {
    fn name(&self) -> &'static str {
        "lp"
    }

    fn distance(&self, g: &TruncatedGroupoid, a: &Measure, b: &Measure) -> Result<f64> {
        wasserstein_lp(g, a, b, self.cap)
    }
}

pub fn registry() -> Registry<dyn TransportSolver> {
    let mut r: Registry<dyn TransportSolver> = Registry::new("transport solver");
    r.register("tree", "closed form on the cylinder tree", |_| Ok(Box::new(TreeSolver)));
    r.register("lp", "transportation simplex; optional param = cylinder cap", |p| {
        let cap = match p {
            Some(_) => required_param(p, "cylinder cap")?,
            None => DEFAULT_CYLINDER_CAP,
        };
        Ok(Box::new(LpSolver { cap }))
    });
    r
}

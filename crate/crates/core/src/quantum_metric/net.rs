//! Finite ε-nets Φ_ε for the seminorm ball E_{K,n}[t].
//!
//! Each stratum in the ball is covered by greedy farthest-point centers of
//! radius ε/2; a kernel is approximated by the value at its class's center,
//! rounded to a complex grid of step ε/√2 inside the a-priori coefficient box.
//! Every class then moves by at most ε, so the I-norm error is at most m·F·ε.

use std::sync::Arc;

use serde::Serialize;

use super::stratification::{Stratification, StratumSpec};
use crate::algebra::{Kernel, Measure, C64};
use crate::error::{Error, Result};
use crate::groupoid::{ElementClass, TruncatedGroupoid};

pub const DEFAULT_SIZE_CAP: f64 = 1e6;

#[derive(Debug, Clone)]
struct NetStratum {
    spec: StratumSpec,
    classes: Vec<ElementClass>,
    centers: Vec<usize>,
    assign: Vec<usize>,
    bound: f64,
    axis_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetStratumSummary {
    pub length: u128,
    pub classes: usize,
    pub centers: usize,
    pub coefficient_bound: f64,
    pub axis_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetSummary {
    pub eps: f64,
    pub order: u32,
    pub radius_t: f64,
    pub level: usize,
    pub strata: Vec<NetStratumSummary>,
    pub fiber_bound: usize,
    pub a_n: f64,
    pub diameter: f64,
    pub grid_points: f64,
    pub log10_cardinality: f64,
    pub certified_radius: f64,
}

#[derive(Debug, Clone)]
pub struct EpsNet {
    g: Arc<TruncatedGroupoid>,
    eps: f64,
    order: u32,
    t: f64,
    level: usize,
    step: f64,
    strata: Vec<NetStratum>,
    fiber_bound: usize,
    a_n: f64,
    diameter: f64,
    grid_points: f64,
    log10_cardinality: f64,
}

/// diam(G⁽⁰⁾, d): the extreme sequences in lexicographic order realise the minimal common prefix.
pub fn unit_space_diameter(g: &TruncatedGroupoid) -> f64 {
    if g.num_paths() < 2 {
        return 0.0;
    }
    let lo = (0..g.num_paths()).min_by_key(|&p| g.sequence(p)).expect("nonempty");
    let hi = (0..g.num_paths()).max_by_key(|&p| g.sequence(p)).expect("nonempty");
    g.ultra_distance(lo, hi)
}

fn greedy_cover(g: &TruncatedGroupoid, classes: &[ElementClass], r: f64) -> (Vec<usize>, Vec<usize>) {
    let dist = |a: &ElementClass, b: &ElementClass| {
        g.ultra_distance(a.mu, b.mu).max(g.ultra_distance(a.lambda, b.lambda))
    };
    let mut centers = vec![0];
    let mut near: Vec<f64> = classes.iter().map(|c| dist(c, &classes[0])).collect();
    let mut assign = vec![0; classes.len()];
    loop {
        let (far, &d) = near
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        if d <= r {
            break;
        }
        let k = centers.len();
        centers.push(far);
        for (i, c) in classes.iter().enumerate() {
            let e = dist(c, &classes[far]);
            if e < near[i] {
                near[i] = e;
                assign[i] = k;
            }
        }
    }
    (centers, assign)
}

impl EpsNet {
    pub fn build(
        g: &Arc<TruncatedGroupoid>,
        s: &Stratification,
        n: u32,
        t: f64,
        eps: f64,
        cap: f64,
    ) -> Result<Self> {
        if !eps.is_finite() || eps <= 0.0 {
            return Err(Error::Argument(format!("eps = {eps} must be positive")));
        }
        if t.is_nan() || t < 0.0 {
            return Err(Error::Argument(format!("ball radius {t} must be nonnegative")));
        }
        g.ball_is_complete(t)?;
        let step = eps / std::f64::consts::SQRT_2;
        let diameter = unit_space_diameter(g);
        let mut strata = Vec::new();
        let mut grid_points = 0.0f64;
        let mut log10_cardinality = 0.0f64;
        let mut fiber_bound = 0usize;
        let mut a_n = 0.0f64;
        for i in s.indices_for_radius(t) {
            let st = s.stratum(i);
            if st.classes.is_empty() {
                continue;
            }
            let bound = if st.spec.length == 0 {
                diameter
            } else {
                (st.spec.length as f64).powi(-(n as i32))
            };
            if st.spec.length > 0 {
                a_n = a_n.max(bound);
            }
            let (centers, assign) = greedy_cover(g, &st.classes, eps / 2.0);
            let axis_points = (2.0 * bound / step).ceil() as usize + 1;
            grid_points += centers.len() as f64 * (axis_points as f64).powi(2);
            log10_cardinality += centers.len() as f64 * 2.0 * (axis_points as f64).log10();
            if grid_points > cap {
                return Err(Error::SizeCap(format!(
                    "eps-net grid exceeds {cap} points; increase eps"
                )));
            }
            fiber_bound = fiber_bound.max(st.fiber_bound(g.num_paths()));
            strata.push(NetStratum {
                spec: st.spec,
                classes: st.classes.clone(),
                centers,
                assign,
                bound,
                axis_points,
            });
        }
        Ok(Self {
            g: Arc::clone(g),
            eps,
            order: n,
            t,
            level: g.ball_level(t),
            step,
            strata,
            fiber_bound,
            a_n,
            diameter,
            grid_points,
            log10_cardinality,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn strata_count(&self) -> usize {
        self.strata.len()
    }

    pub fn fiber_bound(&self) -> usize {
        self.fiber_bound
    }

    pub fn centers(&self, i: usize) -> Vec<ElementClass> {
        self.strata[i].centers.iter().map(|&c| self.strata[i].classes[c]).collect()
    }

    /// m·F·ε, the certified I-norm (hence operator-norm) covering radius.
    pub fn certified_radius(&self) -> f64 {
        self.strata.len() as f64 * self.fiber_bound as f64 * self.eps
    }

    fn round_axis(&self, x: f64, bound: f64, points: usize) -> f64 {
        let j = ((x + bound) / self.step).round().clamp(0.0, (points - 1) as f64);
        -bound + j * self.step
    }

    fn round(&self, z: C64, st: &NetStratum) -> C64 {
        C64::new(
            self.round_axis(z.re, st.bound, st.axis_points),
            self.round_axis(z.im, st.bound, st.axis_points),
        )
    }

    /// Φ_ε(f): the net point assigned to f.
    pub fn nearest(&self, f: &Kernel) -> Result<Kernel> {
        if f.level() > self.level {
            return Err(Error::Argument(format!(
                "kernel of level {} is not supported in the ball of radius {}",
                f.level(),
                self.t
            )));
        }
        let mut out = Kernel::zeros(&self.g, self.level)?;
        for st in &self.strata {
            let values: Vec<C64> = st
                .centers
                .iter()
                .map(|&c| {
                    let z = st.classes[c];
                    self.round(f.get(z.mu, z.lambda), st)
                })
                .collect();
            for (c, &k) in st.classes.iter().zip(&st.assign) {
                out.set(c.mu, c.lambda, values[k])?;
            }
        }
        Ok(out)
    }

    pub fn summary(&self) -> NetSummary {
        NetSummary {
            eps: self.eps,
            order: self.order,
            radius_t: self.t,
            level: self.level,
            strata: self
                .strata
                .iter()
                .map(|s| NetStratumSummary {
                    length: s.spec.length,
                    classes: s.classes.len(),
                    centers: s.centers.len(),
                    coefficient_bound: s.bound,
                    axis_points: s.axis_points,
                })
                .collect(),
            fiber_bound: self.fiber_bound,
            a_n: self.a_n,
            diameter: self.diameter,
            grid_points: self.grid_points,
            log10_cardinality: self.log10_cardinality,
            certified_radius: self.certified_radius(),
        }
    }
}

pub fn build_eps_net(
    g: &Arc<TruncatedGroupoid>,
    s: &Stratification,
    n: u32,
    t: f64,
    mu: &Measure,
    eps: f64,
) -> Result<EpsNet> {
    if mu.resolution() != g.resolution() {
        return Err(Error::Resolution(format!(
            "measure at resolution {} on a resolution-{} groupoid",
            mu.resolution(),
            g.resolution()
        )));
    }
    EpsNet::build(g, s, n, t, eps, DEFAULT_SIZE_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bratteli::BrattelDiagram;
    use crate::groupoid::UnitUltrametric;
    use crate::quantum_metric::ball::sample_ball;

    fn car(d: usize) -> Arc<TruncatedGroupoid> {
        Arc::new(TruncatedGroupoid::new(BrattelDiagram::car(d), d, UnitUltrametric::default()).unwrap())
    }

    #[test]
    fn samples_lie_within_the_certified_radius() {
        let g = car(3);
        let s = Stratification::new(&g);
        let mu = Measure::uniform(&g);
        let net = build_eps_net(&g, &s, 1, 4.0, &mu, 0.5).unwrap();
        for f in sample_ball(&g, &s, 1, 4.0, &mu, 20, 8).unwrap() {
            let h = net.nearest(&f).unwrap();
            assert!(f.sub(&h).unwrap().op_norm().unwrap() <= net.certified_radius());
            assert!(f.sub(&h).unwrap().max_abs() <= net.eps() + 1e-12);
        }
    }

    #[test]
    fn large_eps_uses_one_center_per_stratum() {
        let g = car(3);
        let s = Stratification::new(&g);
        let net = EpsNet::build(&g, &s, 1, 8.0, 2.0, DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(net.strata_count(), 4);
        for i in 0..net.strata_count() {
            assert_eq!(net.centers(i).len(), 1);
        }
        assert_eq!(unit_space_diameter(&g), 0.5);
    }

    #[test]
    fn trivial_diagram_and_size_cap() {
        let d = BrattelDiagram::new(vec![1], vec![], None).unwrap();
        let g = Arc::new(TruncatedGroupoid::new(d, 0, UnitUltrametric::default()).unwrap());
        let s = Stratification::new(&g);
        let net = EpsNet::build(&g, &s, 1, 0.0, 0.1, DEFAULT_SIZE_CAP).unwrap();
        let sm = net.summary();
        assert_eq!(sm.strata.len(), 1);
        assert_eq!(sm.grid_points, 1.0);
        let g = car(4);
        let s = Stratification::new(&g);
        assert!(matches!(
            EpsNet::build(&g, &s, 1, 16.0, 1e-3, DEFAULT_SIZE_CAP),
            Err(Error::SizeCap(_))
        ));
        assert!(EpsNet::build(&g, &s, 1, 16.0, 0.0, DEFAULT_SIZE_CAP).is_err());
    }
}

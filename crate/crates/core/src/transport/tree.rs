//! The ultrametric on depth-D cylinders realised as a weighted tree.
//!
//! Nodes at depth h are prefixes of length h + 1 of the level-indexed
//! sequences; a virtual root joins the sources. The edge from a depth-h node to
//! its parent weighs (base^h − base^(h+1))/2, leaves weigh base^D/2, so two
//! leaves whose deepest common node has depth c − 1 are at distance base^c.

use crate::algebra::Measure;
use crate::error::{Error, Result};
use crate::groupoid::{PathId, TruncatedGroupoid};

#[derive(Debug, Clone)]
pub struct CylinderTree {
    resolution: usize,
    weights: Vec<f64>,
    /// Leaves in lexicographic order of their sequences.
    order: Vec<PathId>,
    /// Common-prefix length of consecutive leaves in `order`.
    lcp: Vec<usize>,
    prefix: Vec<Vec<u32>>,
}

impl CylinderTree {
    pub fn new(g: &TruncatedGroupoid) -> Self {
        let d = g.resolution();
        let base = g.metric().base();
        let weights = (0..=d)
            .map(|h| {
                if h == d {
                    base.powi(d as i32) / 2.0
                } else {
                    (base.powi(h as i32) - base.powi(h as i32 + 1)) / 2.0
                }
            })
            .collect();
        let mut order: Vec<PathId> = (0..g.num_paths()).collect();
        order.sort_by(|&a, &b| g.sequence(a).cmp(g.sequence(b)));
        let lcp = order.windows(2).map(|w| g.common_prefix(w[0], w[1])).collect();
        let prefix = (0..g.num_paths()).map(|p| g.sequence(p).to_vec()).collect();
        Self {
            resolution: d,
            weights,
            order,
            lcp,
            prefix,
        }
    }

    /// Weight of the edge from a depth-h node to its parent.
    pub fn edge_weight(&self, h: usize) -> f64 {
        self.weights[h]
    }

    pub fn leaves(&self) -> &[PathId] {
        &self.order
    }

    /// Sum of edge weights on the tree path between two leaves.
    pub fn distance(&self, p: PathId, q: PathId) -> f64 {
        if p == q {
            return 0.0;
        }
        let c = self.prefix[p]
            .iter()
            .zip(&self.prefix[q])
            .take_while(|(x, y)| x == y)
            .count();
        2.0 * (c..=self.resolution).map(|h| self.weights[h]).sum::<f64>()
    }

    /// Calls `visit(h, range)` for every depth-h node, with `range` its leaves in `order`.
    fn for_each_node(&self, mut visit: impl FnMut(usize, std::ops::Range<usize>)) {
        let n = self.order.len();
        for h in 0..=self.resolution {
            let mut start = 0;
            for i in 0..n {
                if i + 1 == n || self.lcp[i] < h + 1 {
                    visit(h, start..i + 1);
                    start = i + 1;
                }
            }
        }
    }

    fn check(&self, a: &Measure, b: &Measure) -> Result<()> {
        if a.resolution() != self.resolution || b.resolution() != self.resolution {
            return Err(Error::Resolution(format!(
                "measures at resolutions {} and {} on a resolution-{} tree",
                a.resolution(),
                b.resolution(),
                self.resolution
            )));
        }
        Ok(())
    }

    /// Σ_edges w_e |a(subtree) − b(subtree)|.
    pub fn wasserstein(&self, a: &Measure, b: &Measure) -> Result<f64> {
        self.check(a, b)?;
        let (wa, wb) = (a.weights(), b.weights());
        let mut total = 0.0;
        self.for_each_node(|h, r| {
            let delta: f64 = self.order[r].iter().map(|&p| wa[p] - wb[p]).sum();
            total += self.weights[h] * delta.abs();
        });
        Ok(total)
    }

    /// An optimal Kantorovich potential: Σ over root-to-leaf edges of w_e · sign(a − b)(subtree).
    pub fn potential(&self, a: &Measure, b: &Measure) -> Result<Vec<f64>> {
        self.check(a, b)?;
        let (wa, wb) = (a.weights(), b.weights());
        let mut phi = vec![0.0; wa.len()];
        self.for_each_node(|h, r| {
            let delta: f64 = self.order[r.clone()].iter().map(|&p| wa[p] - wb[p]).sum();
            let step = if delta > 0.0 {
                self.weights[h]
            } else if delta < 0.0 {
                -self.weights[h]
            } else {
                0.0
            };
            for &p in &self.order[r] {
                phi[p] += step;
            }
        });
        Ok(phi)
    }
}

pub fn wasserstein_tree(g: &TruncatedGroupoid, a: &Measure, b: &Measure) -> Result<f64> {
    CylinderTree::new(g).wasserstein(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bratteli::BrattelDiagram;
    use crate::groupoid::UnitUltrametric;

    #[test]
    fn tree_distance_is_the_ultrametric() {
        let diagrams = [
            BrattelDiagram::car(4),
            BrattelDiagram::stationary(&[vec![1, 1], vec![1, 1]], 4),
            BrattelDiagram::new(vec![2, 1, 3], vec![vec![vec![1], vec![1]], vec![vec![1, 1, 2]]], None).unwrap(),
        ];
        for d in diagrams {
            for base in [0.5, 0.3] {
                let depth = d.num_levels().min(4);
                let g = TruncatedGroupoid::new(d.clone(), depth, UnitUltrametric::new(base).unwrap()).unwrap();
                let t = CylinderTree::new(&g);
                for p in 0..g.num_paths() {
                    for q in 0..g.num_paths() {
                        let (x, y) = (t.distance(p, q), g.ultra_distance(p, q));
                        if base == 0.5 {
                            assert_eq!(x, y);
                        } else {
                            assert!((x - y).abs() <= 1e-15);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn car_examples() {
        let g = TruncatedGroupoid::new(BrattelDiagram::car(1), 1, UnitUltrametric::default()).unwrap();
        let a = Measure::point(&g, 0);
        let b = Measure::point(&g, 1);
        assert_eq!(wasserstein_tree(&g, &a, &b).unwrap(), 0.5);
        assert_eq!(wasserstein_tree(&g, &a, &a).unwrap(), 0.0);
        let h = Measure::new(&g, vec![0.5, 0.5]).unwrap();
        assert_eq!(wasserstein_tree(&g, &a, &h).unwrap(), 0.25);
        let phi = CylinderTree::new(&g).potential(&a, &b).unwrap();
        assert_eq!(phi[0] - phi[1], 0.5);
    }
}

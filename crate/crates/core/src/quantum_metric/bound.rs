//! β(m) = sup_y Σ_{(x,y) ∉ G_m} ℓ(x,y)⁻², the quantum Gromov–Hausdorff bound.
//!
//! The fiber count of arrows with k(x, y) = k is P(v_k) − P(v_{k−1}), with
//! P(v) the number of paths from all sources to v and v_j the vertices of y.
//! The sup over y is a longest-path problem over the vertex graph.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::bratteli::{BrattelDiagram, PathCountTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaBound {
    pub m: usize,
    pub k_max: usize,
    /// Exact sup over y of the level sum over k = m+1..k_max.
    pub partial: f64,
    /// Max per-level term T_k, for k = 1..k_max.
    pub terms: Vec<f64>,
    /// T_{k_max} / T_{k_max − 1}.
    pub ratio: Option<f64>,
    /// Geometric majorant of the levels beyond k_max.
    pub tail: Option<f64>,
    pub total: f64,
    pub conclusive: bool,
}

fn term(counts: &PathCountTable, k: usize, v: usize, w: usize) -> f64 {
    let hi = &counts.counts[k][w];
    let lo = &counts.counts[k - 1][v];
    let diff = if hi > lo { hi - lo } else { BigUint::zero() };
    let l = counts.ell_f64(k);
    diff.to_f64().unwrap_or(f64::INFINITY) / l / l
}

/// Exact partial sum sup_y Σ_{k=m+1}^{k_max} N_k(y) ℓ_k⁻²; 0 when m ≥ k_max.
pub fn beta_partial(d: &BrattelDiagram, counts: &PathCountTable, m: usize, k_max: usize) -> f64 {
    if m >= k_max {
        return 0.0;
    }
    let mut best = vec![0.0f64; d.size(k_max)];
    let mut from_sources = 0.0f64;
    for s in d.sources().iter().filter(|s| s.level == k_max) {
        from_sources = from_sources.max(best[s.index]);
    }
    for k in (m..k_max).rev() {
        let next: Vec<f64> = (0..d.size(k))
            .map(|v| {
                (0..d.out_degree(k + 1, v))
                    .map(|e| {
                        let w = d.edge_target(k + 1, v, e).expect("edge exists");
                        term(counts, k + 1, v, w) + best[w]
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        best = next;
        if k > m {
            for s in d.sources().iter().filter(|s| s.level == k) {
                from_sources = from_sources.max(best[s.index]);
            }
        }
    }
    best.into_iter().fold(from_sources, f64::max)
}

/// Max over edges into level k of the per-level term.
fn level_max(d: &BrattelDiagram, counts: &PathCountTable, k: usize) -> f64 {
    let mut t = 0.0f64;
    for v in 0..d.size(k - 1) {
        for e in 0..d.out_degree(k, v) {
            t = t.max(term(counts, k, v, d.edge_target(k, v, e).expect("edge exists")));
        }
    }
    t
}

pub fn qgh_bound(d: &BrattelDiagram, m: usize, k_max: usize) -> Result<BetaBound> {
    if k_max < m + 1 {
        return Err(Error::Argument(format!("k_max = {k_max} must be at least m + 1 = {}", m + 1)));
    }
    if k_max > d.num_levels() {
        return Err(Error::Resolution(format!(
            "k_max = {k_max} exceeds the {} levels of the diagram",
            d.num_levels()
        )));
    }
    let counts = d.path_counts();
    let partial = beta_partial(d, &counts, m, k_max);
    let terms: Vec<f64> = (1..=k_max).map(|k| level_max(d, &counts, k)).collect();
    let last = terms[k_max - 1];
    let prev = if k_max >= 2 { terms[k_max - 2] } else { 0.0 };
    let ratio = (prev > 0.0).then(|| last / prev);
    let tail = match ratio {
        _ if last == 0.0 => Some(0.0),
        Some(r) if r < 1.0 => Some(last * r / (1.0 - r)),
        _ => None,
    };
    Ok(BetaBound {
        m,
        k_max,
        partial,
        terms,
        ratio,
        tail,
        total: partial + tail.unwrap_or(0.0),
        conclusive: tail.is_some(),
    })
}

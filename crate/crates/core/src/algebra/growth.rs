//! Ball growth in the fibers of the truncated groupoid.

use num_traits::ToPrimitive;

use crate::groupoid::{PathId, TruncatedGroupoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrowthPoint {
    pub t: u128,
    /// Largest k ≤ D with ℓ_k = t (0 for t = 0).
    pub level: usize,
    pub max_count: u128,
}

/// |B_ℓ(ℓ_k) ∩ G_y| = Σ_s |P(s, t(y_k))|, or 1 when y starts above level k.
pub fn fiber_ball_count(g: &TruncatedGroupoid, y: PathId, k: usize) -> u128 {
    match g.vertex_at(y, k) {
        Some(v) if k > 0 || g.path(y).source.level == 0 => {
            g.counts().counts[k][v].to_u128().unwrap_or(u128::MAX)
        }
        _ => 1,
    }
}

/// Max fiber count of B_ℓ(ℓ_k) from path counts alone.
fn max_count_at(g: &TruncatedGroupoid, k: usize) -> u128 {
    if k == 0 {
        return 1;
    }
    let best = g.counts().counts[k]
        .iter()
        .map(|c| c.to_u128().unwrap_or(u128::MAX))
        .max()
        .unwrap_or(0);
    let late_source = g
        .diagram()
        .sources()
        .iter()
        .any(|s| s.level > k && s.level <= g.resolution());
    if late_source {
        best.max(1)
    } else {
        best
    }
}

/// Exact max fiber cardinality of B_ℓ(t) for every t in the image of ℓ on G_D.
pub fn growth_profile(g: &TruncatedGroupoid) -> Vec<GrowthPoint> {
    let mut out = vec![GrowthPoint {
        t: 0,
        level: 0,
        max_count: 1,
    }];
    for k in 1..=g.resolution() {
        let t = g.ell(k);
        if k < g.resolution() && g.ell(k + 1) == t {
            continue;
        }
        out.push(GrowthPoint {
            t,
            level: k,
            max_count: max_count_at(g, k),
        });
    }
    out
}

/// F_t: max over fibers of |B_ℓ(t) ∩ G_y|.
pub fn fiber_bound(g: &TruncatedGroupoid, t: f64) -> u128 {
    max_count_at(g, g.ball_level(t))
}

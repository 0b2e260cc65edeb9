//! The level stratification K_i = ℓ⁻¹({i}) with per-stratum bucket structure.
//!
//! Classes of a stratum are sorted by the interleaved key (μ_0, λ_0, μ_1, λ_1, ...)
//! of their level-indexed sequences. Pairs at stratum distance ≤ base^h then form
//! contiguous runs, which is what the Lipschitz and cover computations walk.

use std::sync::{Arc, OnceLock};

use crate::groupoid::{ElementClass, TruncatedGroupoid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StratumSpec {
    pub length: u128,
    /// Range of k(μ, λ) realising this length; (0, 0) for the unit space.
    pub min_k: usize,
    pub max_k: usize,
}

#[derive(Debug, Clone)]
pub struct Stratum {
    pub spec: StratumSpec,
    /// Classes in interleaved order, each at truncation level `spec.max_k`.
    pub classes: Vec<ElementClass>,
    /// `lcp[i]` = min of the common-prefix lengths of the μ's and of the λ's of
    /// classes i and i+1.
    pub lcp: Vec<usize>,
}

impl Stratum {
    /// Maximal index ranges whose classes share prefixes of length ≥ h in both coordinates.
    pub fn runs(&self, h: usize) -> impl Iterator<Item = std::ops::Range<usize>> + '_ {
        let n = self.classes.len();
        let mut start = 0;
        (0..n).filter_map(move |i| {
            if i + 1 == n || self.lcp[i] < h {
                let r = start..i + 1;
                start = i + 1;
                Some(r)
            } else {
                None
            }
        })
    }

    /// Max over units u of |K_i ∩ G_u| and |K_i ∩ G^u|.
    pub fn fiber_bound(&self, num_paths: usize) -> usize {
        let mut rows = vec![0usize; num_paths];
        let mut cols = vec![0usize; num_paths];
        for c in &self.classes {
            rows[c.mu] += 1;
            cols[c.lambda] += 1;
        }
        rows.into_iter().chain(cols).max().unwrap_or(0)
    }
}

#[derive(Debug)]
pub struct Stratification {
    g: Arc<TruncatedGroupoid>,
    specs: Vec<StratumSpec>,
    cache: Vec<OnceLock<Stratum>>,
}

impl Stratification {
    pub fn new(g: &Arc<TruncatedGroupoid>) -> Self {
        let mut specs = vec![StratumSpec {
            length: 0,
            min_k: 0,
            max_k: 0,
        }];
        for k in 1..=g.resolution() {
            let l = g.ell(k);
            match specs.last_mut() {
                Some(s) if s.length == l && s.min_k > 0 => s.max_k = k,
                _ => specs.push(StratumSpec {
                    length: l,
                    min_k: k,
                    max_k: k,
                }),
            }
        }
        let cache = specs.iter().map(|_| OnceLock::new()).collect();
        Self {
            g: Arc::clone(g),
            specs,
            cache,
        }
    }

    pub fn groupoid(&self) -> &Arc<TruncatedGroupoid> {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn specs(&self) -> &[StratumSpec] {
        &self.specs
    }

    pub fn index_of_length(&self, length: u128) -> Option<usize> {
        self.specs.iter().position(|s| s.length == length)
    }

    /// Strata meeting G_m.
    pub fn indices_for_level(&self, m: usize) -> Vec<usize> {
        (0..self.specs.len()).filter(|&i| self.specs[i].min_k <= m).collect()
    }

    /// Strata meeting B_ℓ(t).
    pub fn indices_for_radius(&self, t: f64) -> Vec<usize> {
        (0..self.specs.len())
            .filter(|&i| (self.specs[i].length as f64) <= t)
            .collect()
    }

    pub fn stratum(&self, i: usize) -> &Stratum {
        self.cache[i].get_or_init(|| build(&self.g, self.specs[i]))
    }
}

fn build(g: &TruncatedGroupoid, spec: StratumSpec) -> Stratum {
    let mut classes: Vec<ElementClass> = if spec.length == 0 {
        (0..g.num_paths())
            .map(|p| ElementClass {
                mu: p,
                lambda: p,
                level: 0,
            })
            .collect()
    } else {
        g.classes(spec.max_k)
            .filter(|c| {
                let k = g.k_of(c.mu, c.lambda);
                c.mu != c.lambda && k >= spec.min_k
            })
            .collect()
    };
    classes.sort_by(|x, y| {
        let (xm, xl) = (g.sequence(x.mu), g.sequence(x.lambda));
        let (ym, yl) = (g.sequence(y.mu), g.sequence(y.lambda));
        for i in 0..xm.len() {
            let o = xm[i].cmp(&ym[i]).then(xl[i].cmp(&yl[i]));
            if o.is_ne() {
                return o;
            }
        }
        std::cmp::Ordering::Equal
    });
    let lcp = classes
        .windows(2)
        .map(|w| {
            g.common_prefix(w[0].mu, w[1].mu)
                .min(g.common_prefix(w[0].lambda, w[1].lambda))
        })
        .collect();
    Stratum {
        spec,
        classes,
        lcp,
    }
}

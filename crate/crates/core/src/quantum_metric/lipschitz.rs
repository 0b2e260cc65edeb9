//! The stratified Lipschitz seminorm L_Lip^K.

use super::stratification::Stratification;
use crate::algebra::{Kernel, C64};
use crate::groupoid::ElementClass;

/// Largest difference quotient and the pair attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzWitness {
    pub value: f64,
    pub pair: Option<(ElementClass, ElementClass)>,
}

/// max over strata i and distinct c₁, c₂ ∈ K_i of |f(c₁) − f(c₂)| / d^(i)(c₁, c₂).
pub fn lipschitz_seminorm(f: &Kernel, s: &Stratification) -> f64 {
    lipschitz_witness(f, s).value
}

pub fn lipschitz_witness(f: &Kernel, s: &Stratification) -> LipschitzWitness {
    let g = f.groupoid();
    let base = g.metric().base();
    let mut best = LipschitzWitness {
        value: 0.0,
        pair: None,
    };
    for i in s.indices_for_level(f.level()) {
        let st = s.stratum(i);
        let vals: Vec<C64> = st.classes.iter().map(|c| f.get(c.mu, c.lambda)).collect();
        for h in (0..=g.resolution()).rev() {
            let d = base.powi(h as i32);
            for r in st.runs(h) {
                if r.len() < 2 {
                    continue;
                }
                let (mut lo_re, mut hi_re, mut lo_im, mut hi_im) =
                    (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
                for v in &vals[r.clone()] {
                    lo_re = lo_re.min(v.re);
                    hi_re = hi_re.max(v.re);
                    lo_im = lo_im.min(v.im);
                    hi_im = hi_im.max(v.im);
                }
                let bound = (hi_re - lo_re).hypot(hi_im - lo_im) / d;
                if bound <= best.value {
                    continue;
                }
                // Distinct values only; equal values contribute nothing.
                let mut idx: Vec<usize> = r.collect();
                idx.sort_by(|&a, &b| {
                    vals[a]
                        .re
                        .total_cmp(&vals[b].re)
                        .then(vals[a].im.total_cmp(&vals[b].im))
                });
                idx.dedup_by(|a, b| vals[*a] == vals[*b]);
                for (x, &a) in idx.iter().enumerate() {
                    for &b in &idx[x + 1..] {
                        let q = (vals[a] - vals[b]).norm() / d;
                        if q > best.value {
                            best = LipschitzWitness {
                                value: q,
                                pair: Some((st.classes[a], st.classes[b])),
                            };
                        }
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{stream_rng, KernelSampler};
    use crate::bratteli::BrattelDiagram;
    use crate::groupoid::{TruncatedGroupoid, UnitUltrametric};
    use std::sync::Arc;

    fn brute(f: &Kernel, s: &Stratification) -> f64 {
        let g = f.groupoid();
        let mut best = 0.0f64;
        for i in 0..s.len() {
            let cl = &s.stratum(i).classes;
            for a in 0..cl.len() {
                for b in a + 1..cl.len() {
                    let d = g.stratum_distance(&cl[a], &cl[b]).unwrap();
                    let q = (f.get(cl[a].mu, cl[a].lambda) - f.get(cl[b].mu, cl[b].lambda)).norm() / d;
                    best = best.max(q);
                }
            }
        }
        best
    }

    #[test]
    fn car_two_point_example() {
        let g = Arc::new(TruncatedGroupoid::new(BrattelDiagram::car(1), 1, UnitUltrametric::default()).unwrap());
        let s = Stratification::new(&g);
        let f = Kernel::diagonal(&g, &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)]).unwrap();
        assert_eq!(lipschitz_seminorm(&f, &s), 2.0);
        assert_eq!(lipschitz_seminorm(&Kernel::identity(&g).scale(C64::new(3.0, -1.0)), &s), 0.0);
    }

    #[test]
    fn matches_all_pairs_and_is_star_invariant() {
        let d = BrattelDiagram::stationary(&[vec![1, 1], vec![1, 1]], 3);
        let g = Arc::new(TruncatedGroupoid::new(d, 3, UnitUltrametric::new(0.4).unwrap()).unwrap());
        let s = Stratification::new(&g);
        for seed in 0..20 {
            let sampler = KernelSampler::new((seed % 4) as usize).value_resolution(1 + (seed % 3) as usize);
            let f = sampler.sample(&g, &mut stream_rng(seed, 0)).unwrap();
            let l = lipschitz_seminorm(&f, &s);
            assert!((l - brute(&f, &s)).abs() <= 1e-12 * l.max(1.0));
            assert_eq!(l, lipschitz_seminorm(&f.adjoint(), &s));
            let w = lipschitz_witness(&f, &s);
            if let Some((a, b)) = w.pair {
                let q = (f.get(a.mu, a.lambda) - f.get(b.mu, b.lambda)).norm()
                    / g.stratum_distance(&a, &b).unwrap();
                assert!((q - l).abs() <= 1e-12 * l);
            }
        }
    }
}

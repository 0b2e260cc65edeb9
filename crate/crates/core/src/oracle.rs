//! Brute-force reference computations.
//!
//! Everything here works from explicit path lists and dense matrices and avoids
//! the indexed structures (level sequences, tail partitions, DP tables) that the
//! main implementations rely on.

use crate::algebra::{CMatrix, Kernel, C64};
use crate::bratteli::{BrattelDiagram, Vertex};
use crate::groupoid::{ElementClass, FinitePath, TruncatedGroupoid};

/// All paths from sources at level ≤ depth down to V_depth, by depth-first search.
pub fn enumerate_paths(d: &BrattelDiagram, depth: usize) -> Vec<FinitePath> {
    fn walk(d: &BrattelDiagram, depth: usize, src: Vertex, v: usize, edges: &mut Vec<usize>, out: &mut Vec<FinitePath>) {
        let level = src.level + edges.len();
        if level == depth {
            out.push(FinitePath {
                source: src,
                edges: edges.clone(),
            });
            return;
        }
        let row = &d.matrix(level + 1)[v];
        let mut e = 0;
        for (w, &mult) in row.iter().enumerate() {
            for _ in 0..mult {
                edges.push(e);
                walk(d, depth, src, w, edges, out);
                edges.pop();
                e += 1;
            }
        }
    }
    let mut out = Vec::new();
    for &s in d.sources().iter().filter(|s| s.level <= depth) {
        walk(d, depth, s, s.index, &mut Vec::new(), &mut out);
    }
    out
}

/// ℓ_k as the number of enumerated paths to V_k.
pub fn ell_table(d: &BrattelDiagram, depth: usize) -> Vec<u128> {
    (0..=depth).map(|k| enumerate_paths(d, k).len() as u128).collect()
}

/// (vertex before, target vertex, local edge index) for the edge into each level.
fn edge_trace(d: &BrattelDiagram, p: &FinitePath, depth: usize) -> Trace {
    let mut trace = vec![None; depth + 1];
    let mut v = p.source.index;
    for (i, &e) in p.edges.iter().enumerate() {
        let level = p.source.level + i + 1;
        let row = &d.matrix(level)[v];
        let mut seen = 0;
        let mut target = usize::MAX;
        for (w, &mult) in row.iter().enumerate() {
            if e < seen + mult as usize {
                target = w;
                break;
            }
            seen += mult as usize;
        }
        trace[level] = Some((v, target, e));
        v = target;
    }
    trace
}

pub fn terminal(d: &BrattelDiagram, p: &FinitePath, depth: usize) -> usize {
    edge_trace(d, p, depth)[depth].map(|t| t.1).unwrap_or(p.source.index)
}

/// Highest level at which two depth-D paths take different edges; 0 iff equal.
pub fn k_of(d: &BrattelDiagram, x: &FinitePath, y: &FinitePath, depth: usize) -> usize {
    k_from_traces(x, y, &edge_trace(d, x, depth), &edge_trace(d, y, depth))
}

/// Common-prefix length of (source, e_1, ..., e_D), with levels below a source absent.
pub fn common_prefix(d: &BrattelDiagram, x: &FinitePath, y: &FinitePath, depth: usize) -> usize {
    if x.source != y.source {
        return 0;
    }
    let (tx, ty) = (edge_trace(d, x, depth), edge_trace(d, y, depth));
    1 + (1..=depth).take_while(|&n| tx[n] == ty[n]).count()
}

pub fn ultra_distance(g: &TruncatedGroupoid, x: &FinitePath, y: &FinitePath) -> f64 {
    if x == y {
        return 0.0;
    }
    let c = common_prefix(g.diagram(), x, y, g.resolution());
    let mut d = 1.0;
    for _ in 0..c {
        d *= g.metric().base();
    }
    d
}

type Trace = Vec<Option<(usize, usize, usize)>>;

fn k_from_traces(x: &FinitePath, y: &FinitePath, tx: &Trace, ty: &Trace) -> usize {
    if x == y {
        return 0;
    }
    (1..tx.len()).rev().find(|&n| tx[n] != ty[n]).unwrap_or_else(|| x.source.level.max(y.source.level))
}

/// `counts[y][k]` = #{x : k(x, y) = k}, over the enumerated depth-D paths.
pub fn level_counts(d: &BrattelDiagram, depth: usize) -> Vec<Vec<u128>> {
    let paths = enumerate_paths(d, depth);
    let traces: Vec<Trace> = paths.iter().map(|p| edge_trace(d, p, depth)).collect();
    let term: Vec<usize> = paths.iter().map(|p| terminal(d, p, depth)).collect();
    (0..paths.len())
        .map(|j| {
            let mut c = vec![0u128; depth + 1];
            for i in 0..paths.len() {
                if term[i] == term[j] {
                    c[k_from_traces(&paths[i], &paths[j], &traces[i], &traces[j])] += 1;
                }
            }
            c
        })
        .collect()
}

/// max over y of Σ_{x : k(x,y) ∈ (m, D]} ℓ(x, y)⁻², for every m in 0..=D.
pub fn beta_by_enumeration(d: &BrattelDiagram, depth: usize) -> Vec<f64> {
    let ell = ell_table(d, depth);
    let counts = level_counts(d, depth);
    (0..=depth)
        .map(|m| {
            counts
                .iter()
                .map(|c| {
                    (m + 1..=depth)
                        .map(|k| c[k] as f64 / (ell[k] as f64 * ell[k] as f64))
                        .sum::<f64>()
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

/// `lengths[a][b]` = ℓ(a, b) for paths of `g` with a common terminal, else NaN.
pub fn length_matrix(g: &TruncatedGroupoid) -> Vec<Vec<f64>> {
    let d = g.diagram();
    let depth = g.resolution();
    let ell = ell_table(d, depth);
    let traces: Vec<Trace> = g.paths().iter().map(|p| edge_trace(d, p, depth)).collect();
    let term: Vec<usize> = g.paths().iter().map(|p| terminal(d, p, depth)).collect();
    (0..g.num_paths())
        .map(|a| {
            (0..g.num_paths())
                .map(|b| {
                    if term[a] != term[b] {
                        f64::NAN
                    } else if a == b {
                        0.0
                    } else {
                        ell[k_from_traces(g.path(a), g.path(b), &traces[a], &traces[b])] as f64
                    }
                })
                .collect()
        })
        .collect()
}

/// #{x : ℓ(x, y) ≤ ℓ_k} for the path y of `g`.
pub fn fiber_count(g: &TruncatedGroupoid, y: usize, k: usize) -> u128 {
    let d = g.diagram();
    let depth = g.resolution();
    let py = g.path(y);
    let ty = terminal(d, py, depth);
    g.paths()
        .iter()
        .filter(|x| terminal(d, x, depth) == ty && k_of(d, x, py, depth) <= k)
        .count() as u128
}

/// [Diag(w), M] applied n times, as dense matrix products.
pub fn iterated_commutator(m: &CMatrix, w: &[f64], n: u32) -> CMatrix {
    let diag = CMatrix::from_fn(w.len(), w.len(), |i, j| {
        if i == j {
            C64::new(w[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let mut x = m.clone();
    for _ in 0..n {
        x = &diag * &x - &x * &diag;
    }
    x
}

/// Lipschitz seminorm over all pairs of classes, strata keyed by enumerated lengths.
pub fn lipschitz_by_pairs(f: &Kernel) -> f64 {
    let g = f.groupoid();
    let d = g.diagram();
    let depth = g.resolution();
    let ell = ell_table(d, depth);
    let mut classes: Vec<(u128, ElementClass)> = Vec::new();
    for (a, x) in g.paths().iter().enumerate() {
        for (b, y) in g.paths().iter().enumerate() {
            if terminal(d, x, depth) == terminal(d, y, depth) {
                let l = if a == b { 0 } else { ell[k_of(d, x, y, depth)] };
                classes.push((
                    l,
                    ElementClass {
                        mu: a,
                        lambda: b,
                        level: depth,
                    },
                ));
            }
        }
    }
    let mut best = 0.0f64;
    for (i, (la, ca)) in classes.iter().enumerate() {
        for (lb, cb) in &classes[i + 1..] {
            if la != lb {
                continue;
            }
            let dist = ultra_distance(g, g.path(ca.mu), g.path(cb.mu))
                .max(ultra_distance(g, g.path(ca.lambda), g.path(cb.lambda)));
            let q = (f.get(ca.mu, ca.lambda) - f.get(cb.mu, cb.lambda)).norm() / dist;
            best = best.max(q);
        }
    }
    best
}

/// Operator norm from singular values of each block.
pub fn op_norm_svd(f: &Kernel) -> f64 {
    f.blocks()
        .iter()
        .map(|b| b.clone().singular_values().iter().copied().fold(0.0, f64::max))
        .fold(0.0, f64::max)
}

/// (f * h)(x, y) = Σ_z f(x, z) h(z, y) over all paths z.
pub fn convolution_by_sum(f: &Kernel, h: &Kernel) -> Vec<((usize, usize), C64)> {
    let g = f.groupoid();
    let n = g.num_paths();
    let mut out = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if g.terminal(x) != g.terminal(y) {
                continue;
            }
            let s: C64 = (0..n).map(|z| f.get(x, z) * h.get(z, y)).sum();
            out.push(((x, y), s));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::UnitUltrametric;

    #[test]
    fn car_beta_by_enumeration() {
        let b = beta_by_enumeration(&BrattelDiagram::car(6), 6);
        for (m, x) in b.iter().enumerate() {
            assert_eq!(*x, 0.5f64.powi(m as i32 + 1) - 0.5f64.powi(7));
        }
    }

    #[test]
    fn enumeration_matches_the_groupoid() {
        let d = BrattelDiagram::new(vec![2, 1, 3], vec![vec![vec![1], vec![1]], vec![vec![1, 1, 2]]], None).unwrap();
        let g = TruncatedGroupoid::new(d.clone(), 2, UnitUltrametric::default()).unwrap();
        let paths = enumerate_paths(&d, 2);
        assert_eq!(paths.len(), g.num_paths());
        assert_eq!(ell_table(&d, 2), vec![g.ell(0), g.ell(1), g.ell(2)]);
        let lengths = length_matrix(&g);
        for x in &paths {
            let p = g.path_id(x).unwrap();
            assert_eq!(terminal(&d, x, 2), g.terminal(p));
            for y in &paths {
                let q = g.path_id(y).unwrap();
                assert_eq!(ultra_distance(&g, x, y), g.ultra_distance(p, q));
                if g.terminal(p) == g.terminal(q) {
                    assert_eq!(k_of(&d, x, y, 2), g.k_of(p, q));
                    assert_eq!(lengths[p][q], g.length_f64(p, q));
                }
            }
        }
    }
}

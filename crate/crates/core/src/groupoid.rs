//! The truncated path groupoid at a fixed cylinder resolution D.
//!
//! Every depth-D path is stored once and addressed by a [`PathId`]. Arrows are
//! pairs of depth-D paths ending at the same vertex of V_D; such a pair stands
//! for the cylinder Z(μ, λ) of all (x, y) extending (μ, λ) with a common tail.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;

use crate::bratteli::{BrattelDiagram, PathCountTable, Vertex};
use crate::error::{Error, Result};

pub type PathId = usize;

/// Marks a level below a path's source in the level-indexed edge sequence.
const ABSENT: u32 = u32::MAX;

/// Largest number of depth-D paths the groupoid will enumerate.
pub const MAX_PATHS: usize = 1 << 20;

/// A finite path from a source to V_D, as local edge indices per level.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinitePath {
    pub source: Vertex,
    pub edges: Vec<usize>,
}

impl fmt::Display for FinitePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}.{}:", self.source.level, self.source.index)?;
        for (i, e) in self.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl FromStr for FinitePath {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Path(format!("'{s}' is not of the form s<level>.<vertex>:<e1>,<e2>,..."));
        let rest = s.trim().strip_prefix('s').ok_or_else(bad)?;
        let (head, tail) = rest.split_once(':').ok_or_else(bad)?;
        let (level, index) = head.split_once('.').ok_or_else(bad)?;
        let level = level.trim().parse().map_err(|_| bad())?;
        let index = index.trim().parse().map_err(|_| bad())?;
        let edges = if tail.trim().is_empty() {
            Vec::new()
        } else {
            tail.split(',')
                .map(|e| e.trim().parse().map_err(|_| bad()))
                .collect::<Result<Vec<usize>>>()?
        };
        Ok(Self {
            source: Vertex::new(level, index),
            edges,
        })
    }
}

/// An arrow class (μ, λ) regarded inside G_m, `m = level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementClass {
    pub mu: PathId,
    pub lambda: PathId,
    pub level: usize,
}

impl ElementClass {
    pub fn is_diagonal(&self) -> bool {
        self.mu == self.lambda
    }
}

/// d(x, y) = base^c with c the common-prefix length of (source, e_1, e_2, ...).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitUltrametric {
    base: f64,
}

impl Default for UnitUltrametric {
    fn default() -> Self {
        Self { base: 0.5 }
    }
}

impl UnitUltrametric {
    pub fn new(base: f64) -> Result<Self> {
        if !(base > 0.0 && base < 1.0) {
            return Err(Error::Argument(format!("ultrametric base {base} not in (0,1)")));
        }
        Ok(Self { base })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// Distance between distinct points with common-prefix length `c`.
    pub fn from_prefix(&self, c: usize) -> f64 {
        self.base.powi(c as i32)
    }

    /// Sup of distances between points of one depth-D cylinder.
    pub fn cylinder_diameter(&self, resolution: usize) -> f64 {
        self.from_prefix(resolution + 1)
    }
}

/// Depth-D paths grouped by their edges above level m.
#[derive(Debug, Clone)]
pub struct TailPartition {
    pub classes: Vec<Vec<PathId>>,
    class_of: Vec<usize>,
    position: Vec<usize>,
}

impl TailPartition {
    pub fn class_of(&self, p: PathId) -> usize {
        self.class_of[p]
    }

    pub fn position(&self, p: PathId) -> usize {
        self.position[p]
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn max_class_size(&self) -> usize {
        self.classes.iter().map(Vec::len).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone)]
pub struct TruncatedGroupoid {
    diagram: BrattelDiagram,
    counts: PathCountTable,
    resolution: usize,
    metric: UnitUltrametric,
    paths: Vec<FinitePath>,
    // seq[p][0] = source rank, seq[p][n] = edge id at level n or ABSENT.
    seq: Vec<Vec<u32>>,
    terminal: Vec<usize>,
    index: HashMap<FinitePath, PathId>,
    tails: Vec<TailPartition>,
    ell: Vec<u128>,
}

impl TruncatedGroupoid {
    pub fn new(diagram: BrattelDiagram, resolution: usize, metric: UnitUltrametric) -> Result<Self> {
        if resolution > diagram.num_levels() {
            return Err(Error::Resolution(format!(
                "resolution {resolution} exceeds the {} levels of the diagram",
                diagram.num_levels()
            )));
        }
        let counts = diagram.path_counts();
        let total = counts.ell[resolution].to_usize().unwrap_or(usize::MAX);
        if total > MAX_PATHS {
            return Err(Error::SizeCap(format!(
                "{} depth-{resolution} paths exceed the cap of {MAX_PATHS}",
                counts.ell[resolution]
            )));
        }
        let ell = counts
            .ell
            .iter()
            .map(|x| x.to_u128().unwrap_or(u128::MAX))
            .collect();

        let mut paths = Vec::with_capacity(total);
        let mut seq = Vec::with_capacity(total);
        let mut terminal = Vec::with_capacity(total);
        for (rank, &s) in diagram.sources().iter().enumerate() {
            if s.level > resolution {
                continue;
            }
            let mut edges = Vec::new();
            let mut ids = vec![ABSENT; resolution + 1];
            ids[0] = rank as u32;
            enumerate(
                &diagram,
                resolution,
                s,
                s.index,
                &mut edges,
                &mut ids,
                &mut |e, ids, t| {
                    paths.push(FinitePath {
                        source: s,
                        edges: e.to_vec(),
                    });
                    seq.push(ids.to_vec());
                    terminal.push(t);
                },
            );
        }
        let index = paths.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();

        let tails = (0..=resolution)
            .map(|m| {
                let mut keys: HashMap<(usize, &[u32]), usize> = HashMap::new();
                let mut classes: Vec<Vec<PathId>> = Vec::new();
                let mut class_of = vec![0; paths.len()];
                let mut position = vec![0; paths.len()];
                for p in 0..paths.len() {
                    let key = (terminal[p], &seq[p][m + 1..]);
                    let c = *keys.entry(key).or_insert_with(|| {
                        classes.push(Vec::new());
                        classes.len() - 1
                    });
                    class_of[p] = c;
                    position[p] = classes[c].len();
                    classes[c].push(p);
                }
                TailPartition {
                    classes,
                    class_of,
                    position,
                }
            })
            .collect();

        Ok(Self {
            diagram,
            counts,
            resolution,
            metric,
            paths,
            seq,
            terminal,
            index,
            tails,
            ell,
        })
    }

    pub fn diagram(&self) -> &BrattelDiagram {
        &self.diagram
    }

    pub fn counts(&self) -> &PathCountTable {
        &self.counts
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn metric(&self) -> UnitUltrametric {
        self.metric
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn paths(&self) -> &[FinitePath] {
        &self.paths
    }

    pub fn path(&self, p: PathId) -> &FinitePath {
        &self.paths[p]
    }

    pub fn path_id(&self, p: &FinitePath) -> Option<PathId> {
        self.index.get(p).copied()
    }

    pub fn parse_path(&self, s: &str) -> Result<PathId> {
        let p: FinitePath = s.parse()?;
        self.path_id(&p)
            .ok_or_else(|| Error::Path(format!("'{s}' is not a depth-{} path", self.resolution)))
    }

    pub fn terminal(&self, p: PathId) -> usize {
        self.terminal[p]
    }

    /// Vertex index at `level` along path `p`, or `None` below its source.
    pub fn vertex_at(&self, p: PathId, level: usize) -> Option<usize> {
        let path = &self.paths[p];
        if level < path.source.level {
            return None;
        }
        let mut v = path.source.index;
        for (i, &e) in path.edges.iter().enumerate() {
            let n = path.source.level + i + 1;
            if n > level {
                break;
            }
            v = self.diagram.edge_target(n, v, e).expect("valid path");
        }
        Some(v)
    }

    pub fn tail(&self, m: usize) -> &TailPartition {
        &self.tails[m]
    }

    /// ℓ_k, total path count to V_k (saturating beyond u128).
    pub fn ell(&self, k: usize) -> u128 {
        self.ell[k]
    }

    /// Largest k ≤ D with ℓ_k ≤ t, or 0 when even ℓ_1 exceeds t.
    pub fn ball_level(&self, t: f64) -> usize {
        (1..=self.resolution)
            .rev()
            .find(|&k| (self.ell[k] as f64) <= t)
            .unwrap_or(0)
    }

    /// Highest level at which `p` and `q` differ; 0 iff p = q.
    pub fn k_of(&self, p: PathId, q: PathId) -> usize {
        let (a, b) = (&self.seq[p], &self.seq[q]);
        (1..=self.resolution).rev().find(|&n| a[n] != b[n]).unwrap_or(0)
    }

    pub fn length(&self, p: PathId, q: PathId) -> u128 {
        if p == q {
            0
        } else {
            self.ell[self.k_of(p, q)]
        }
    }

    pub fn length_f64(&self, p: PathId, q: PathId) -> f64 {
        self.length(p, q) as f64
    }

    pub fn length_of(&self, c: &ElementClass) -> u128 {
        self.length(c.mu, c.lambda)
    }

    /// Common-prefix length of the level-indexed sequences, 0 across sources.
    pub fn common_prefix(&self, p: PathId, q: PathId) -> usize {
        let (a, b) = (&self.seq[p], &self.seq[q]);
        a.iter().zip(b).take_while(|(x, y)| x == y).count()
    }

    /// Distance of distinct cylinders; 0 for identical ones.
    pub fn ultra_distance(&self, p: PathId, q: PathId) -> f64 {
        if p == q {
            0.0
        } else {
            self.metric.from_prefix(self.common_prefix(p, q))
        }
    }

    /// The level-indexed sequence of `p`, used as a sort key.
    pub fn sequence(&self, p: PathId) -> &[u32] {
        &self.seq[p]
    }

    pub fn class(&self, mu: PathId, lambda: PathId, level: usize) -> Result<ElementClass> {
        if mu >= self.paths.len() || lambda >= self.paths.len() {
            return Err(Error::Path("path id out of range".into()));
        }
        if self.terminal[mu] != self.terminal[lambda] {
            return Err(Error::Path(format!(
                "{} and {} end at different vertices",
                self.paths[mu], self.paths[lambda]
            )));
        }
        if level > self.resolution {
            return Err(Error::Resolution(format!(
                "level {level} exceeds resolution {}",
                self.resolution
            )));
        }
        let k = self.k_of(mu, lambda);
        if k > level {
            return Err(Error::Path(format!(
                "({}, {}) differ at level {k} > {level}",
                self.paths[mu], self.paths[lambda]
            )));
        }
        Ok(ElementClass { mu, lambda, level })
    }

    /// The class at its minimal truncation level.
    pub fn minimal_class(&self, mu: PathId, lambda: PathId) -> Result<ElementClass> {
        if self.terminal.get(mu) != self.terminal.get(lambda) || mu >= self.paths.len() {
            return Err(Error::Path("paths end at different vertices".into()));
        }
        self.class(mu, lambda, self.k_of(mu, lambda))
    }

    pub fn compose(&self, a: &ElementClass, b: &ElementClass) -> Result<ElementClass> {
        if a.lambda != b.mu {
            return Err(Error::NotComposable(format!(
                "s(a) = {} but r(b) = {}",
                self.paths[a.lambda], self.paths[b.mu]
            )));
        }
        let level = self.k_of(a.mu, a.lambda).max(self.k_of(b.mu, b.lambda));
        Ok(ElementClass {
            mu: a.mu,
            lambda: b.lambda,
            level,
        })
    }

    pub fn inverse(&self, a: &ElementClass) -> ElementClass {
        ElementClass {
            mu: a.lambda,
            lambda: a.mu,
            level: a.level,
        }
    }

    /// All classes of G_m in canonical order (tail class, then row, then column).
    pub fn classes(&self, m: usize) -> impl Iterator<Item = ElementClass> + '_ {
        self.tails[m].classes.iter().flat_map(move |c| {
            c.iter()
                .flat_map(move |&a| c.iter().map(move |&b| ElementClass { mu: a, lambda: b, level: m }))
        })
    }

    /// Number of classes in G_m.
    pub fn class_count(&self, m: usize) -> usize {
        self.tails[m].classes.iter().map(|c| c.len() * c.len()).sum()
    }

    /// Whether every arrow of length ≤ t is represented at this resolution.
    pub fn ball_is_complete(&self, t: f64) -> Result<()> {
        if self.resolution < self.diagram.num_levels() {
            let next = self.ell[self.resolution + 1];
            if (next as f64) <= t {
                return Err(Error::IncompleteBall { t, next });
            }
        }
        Ok(())
    }

    /// The closed ℓ-ball B_ℓ(t) as classes of G_{N(t)}.
    pub fn ball(&self, t: f64) -> Result<Vec<ElementClass>> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Argument(format!("ball radius {t} must be nonnegative")));
        }
        self.ball_is_complete(t)?;
        let m = self.ball_level(t);
        let out: Vec<ElementClass> = self
            .classes(m)
            .filter(|c| (self.length_of(c) as f64) <= t)
            .collect();
        Ok(out)
    }

    /// d^(i)(a, b) = max(d(s(a), s(b)), d(r(a), r(b))) for classes of one stratum.
    pub fn stratum_distance(&self, a: &ElementClass, b: &ElementClass) -> Result<f64> {
        let (la, lb) = (self.length_of(a), self.length_of(b));
        if la != lb {
            return Err(Error::StrataMismatch(la, lb));
        }
        Ok(self
            .ultra_distance(a.lambda, b.lambda)
            .max(self.ultra_distance(a.mu, b.mu)))
    }

    pub fn format_class(&self, c: &ElementClass) -> String {
        format!("({}|{})@{}", self.paths[c.mu], self.paths[c.lambda], c.level)
    }

    pub fn parse_class(&self, s: &str) -> Result<ElementClass> {
        let bad = || Error::Path(format!("'{s}' is not of the form (path|path)@m"));
        let s = s.trim();
        let (pair, level) = s.rsplit_once('@').ok_or_else(bad)?;
        let level: usize = level.trim().parse().map_err(|_| bad())?;
        let inner = pair
            .trim()
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .ok_or_else(bad)?;
        let (mu, lambda) = inner.split_once('|').ok_or_else(bad)?;
        self.class(self.parse_path(mu)?, self.parse_path(lambda)?, level)
    }
}

fn enumerate(
    d: &BrattelDiagram,
    resolution: usize,
    source: Vertex,
    v: usize,
    edges: &mut Vec<usize>,
    ids: &mut Vec<u32>,
    emit: &mut impl FnMut(&[usize], &[u32], usize),
) {
    let level = source.level + edges.len();
    if level == resolution {
        emit(edges, ids, v);
        return;
    }
    let n = level + 1;
    for e in 0..d.out_degree(n, v) {
        let w = d.edge_target(n, v, e).expect("edge exists");
        edges.push(e);
        ids[n] = d.edge_id(n, v, e);
        enumerate(d, resolution, source, w, edges, ids, emit);
        ids[n] = ABSENT;
        edges.pop();
    }
}

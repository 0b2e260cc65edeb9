//! Bratteli diagrams: parsing, validation, path counts and source augmentation.
//!
//! Vertices are addressed by `(level, index)` with 0-based indices. Edges leaving
//! a vertex are numbered locally: targets in ascending order, parallel edges
//! consecutively. A finite path is a source plus one local edge index per level.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub level: usize,
    pub index: usize,
}

impl Vertex {
    pub fn new(level: usize, index: usize) -> Self {
        Self { level, index }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrattelDiagram {
    sizes: Vec<usize>,
    incidence: Vec<Vec<Vec<u64>>>,
    sources: Vec<Vertex>,
    // out_targets[n-1][i] lists the target of each local edge leaving vertex i of V_{n-1}.
    out_targets: Vec<Vec<Vec<usize>>>,
    // edge_offset[n-1][i] is the global id of the first edge leaving vertex i at level n.
    edge_offset: Vec<Vec<u32>>,
}

impl BrattelDiagram {
    /// Builds and validates a diagram. `declared` sources, when given, must equal
    /// the set of vertices without incoming edges (plus all of level 0).
    pub fn new(
        sizes: Vec<usize>,
        incidence: Vec<Vec<Vec<u64>>>,
        declared: Option<Vec<Vertex>>,
    ) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Dimension("no levels declared".into()));
        }
        if incidence.len() + 1 != sizes.len() {
            return Err(Error::Dimension(format!(
                "{} matrices for {} vertex levels",
                incidence.len(),
                sizes.len()
            )));
        }
        for (level, &s) in sizes.iter().enumerate() {
            if s == 0 {
                return Err(Error::Dimension(format!("level {level} has no vertices")));
            }
        }
        for (k, m) in incidence.iter().enumerate() {
            let n = k + 1;
            if m.len() != sizes[n - 1] {
                return Err(Error::Dimension(format!(
                    "matrix {n} has {} rows, expected |V_{}| = {}",
                    m.len(),
                    n - 1,
                    sizes[n - 1]
                )));
            }
            for (i, row) in m.iter().enumerate() {
                if row.len() != sizes[n] {
                    return Err(Error::Dimension(format!(
                        "matrix {n} row {i} has {} columns, expected |V_{n}| = {}",
                        row.len(),
                        sizes[n]
                    )));
                }
                if row.iter().all(|&a| a == 0) {
                    return Err(Error::NoOutgoingEdge {
                        level: n - 1,
                        index: i,
                    });
                }
            }
        }

        let mut computed: Vec<Vertex> = (0..sizes[0]).map(|i| Vertex::new(0, i)).collect();
        for (k, m) in incidence.iter().enumerate() {
            for j in 0..sizes[k + 1] {
                if m.iter().all(|row| row[j] == 0) {
                    computed.push(Vertex::new(k + 1, j));
                }
            }
        }
        if let Some(mut declared) = declared {
            declared.sort();
            declared.dedup();
            for v in &declared {
                if v.level >= sizes.len() || v.index >= sizes[v.level] {
                    return Err(Error::Sources(format!(
                        "({},{}) is not a vertex",
                        v.level, v.index
                    )));
                }
            }
            if declared != computed {
                let missing: Vec<_> = computed.iter().filter(|v| !declared.contains(v)).collect();
                let extra: Vec<_> = declared.iter().filter(|v| !computed.contains(v)).collect();
                return Err(Error::Sources(format!(
                    "declaration disagrees with column sums (undeclared: {missing:?}, with incoming edges: {extra:?})"
                )));
            }
        }

        let mut out_targets = Vec::with_capacity(incidence.len());
        let mut edge_offset = Vec::with_capacity(incidence.len());
        for m in &incidence {
            let mut targets = Vec::with_capacity(m.len());
            let mut offsets = Vec::with_capacity(m.len());
            let mut next = 0u32;
            for row in m {
                let mut t = Vec::new();
                for (j, &a) in row.iter().enumerate() {
                    for _ in 0..a {
                        t.push(j);
                    }
                }
                offsets.push(next);
                next = next
                    .checked_add(u32::try_from(t.len()).unwrap_or(u32::MAX))
                    .ok_or_else(|| Error::Dimension("too many edges at one level".into()))?;
                targets.push(t);
            }
            out_targets.push(targets);
            edge_offset.push(offsets);
        }

        Ok(Self {
            sizes,
            incidence,
            sources: computed,
            out_targets,
            edge_offset,
        })
    }

    /// The CAR diagram: one vertex per level, two edges between consecutive levels.
    pub fn car(levels: usize) -> Self {
        Self::stationary(&[vec![2]], levels)
    }

    /// Repeats a square incidence matrix `levels` times; all level-0 vertices are sources.
    pub fn stationary(matrix: &[Vec<u64>], levels: usize) -> Self {
        let n = matrix.len();
        Self::new(vec![n; levels + 1], vec![matrix.to_vec(); levels], None)
            .expect("stationary diagram must be valid")
    }

    /// Number of incidence matrices N; vertices occupy levels 0..=N.
    pub fn num_levels(&self) -> usize {
        self.incidence.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn size(&self, level: usize) -> usize {
        self.sizes[level]
    }

    /// Incidence matrix n (1-based): rows V_{n-1}, columns V_n.
    pub fn matrix(&self, n: usize) -> &[Vec<u64>] {
        &self.incidence[n - 1]
    }

    pub fn sources(&self) -> &[Vertex] {
        &self.sources
    }

    pub fn is_source(&self, v: Vertex) -> bool {
        self.sources.binary_search(&v).is_ok()
    }

    /// Deepest level carrying a source.
    pub fn deepest_source_level(&self) -> usize {
        self.sources.iter().map(|v| v.level).max().unwrap_or(0)
    }

    /// Number of edges leaving vertex `i` of V_{n-1} towards V_n.
    pub fn out_degree(&self, n: usize, i: usize) -> usize {
        self.out_targets[n - 1][i].len()
    }

    /// Target in V_n of local edge `e` leaving vertex `i` of V_{n-1}.
    pub fn edge_target(&self, n: usize, i: usize, e: usize) -> Option<usize> {
        self.out_targets[n - 1][i].get(e).copied()
    }

    /// Level-wide identifier of local edge `e` leaving vertex `i` of V_{n-1}.
    pub fn edge_id(&self, n: usize, i: usize, e: usize) -> u32 {
        self.edge_offset[n - 1][i] + e as u32
    }

    pub fn path_counts(&self) -> PathCountTable {
        PathCountTable::new(self)
    }

    /// Single-source augmentation: prepend a ghost vertex and route it to every
    /// source through a chain of ghost vertices, one per skipped level.
    pub fn augment(&self) -> BrattelDiagram {
        let n_levels = self.num_levels();
        // ghosts[level] lists the sources whose chain passes through that original level.
        let ghosts: Vec<Vec<Vertex>> = (0..=n_levels)
            .map(|lvl| self.sources.iter().copied().filter(|s| s.level > lvl).collect())
            .collect();
        let mut sizes = vec![1];
        sizes.extend(self.sizes.iter().zip(&ghosts).map(|(s, g)| s + g.len()));
        let mut incidence = Vec::with_capacity(n_levels + 1);
        incidence.push(vec![vec![1u64; sizes[1]]]);
        for n in 1..=n_levels {
            let (prev, next) = (n - 1, n);
            let mut m = vec![vec![0u64; sizes[next + 1]]; sizes[prev + 1]];
            for (i, row) in self.incidence[n - 1].iter().enumerate() {
                m[i][..row.len()].copy_from_slice(row);
            }
            for (g, s) in ghosts[prev].iter().enumerate() {
                let row = self.sizes[prev] + g;
                let col = if s.level == next {
                    s.index
                } else {
                    let pos = ghosts[next].iter().position(|t| t == s).expect("chain continues");
                    self.sizes[next] + pos
                };
                m[row][col] = 1;
            }
            incidence.push(m);
        }
        BrattelDiagram::new(sizes, incidence, None).expect("augmented diagram is valid")
    }

    /// Parses the line-oriented diagram format.
    pub fn parse(text: &str) -> Result<Self> {
        parse_diagram(text)
    }

    /// Canonical text form; `parse(to_text(d)) == d`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str("bratteli v1\n");
        let _ = writeln!(s, "levels {}", self.num_levels());
        let sizes: Vec<String> = self.sizes.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "sizes {}", sizes.join(" "));
        for (k, m) in self.incidence.iter().enumerate() {
            let rows: Vec<String> = m
                .iter()
                .map(|r| {
                    let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                    format!("[{}]", cells.join(","))
                })
                .collect();
            let _ = writeln!(s, "matrix {}: [{}]", k + 1, rows.join(","));
        }
        let src: Vec<String> = self
            .sources
            .iter()
            .map(|v| format!("({},{})", v.level, v.index))
            .collect();
        let _ = writeln!(s, "sources: {}", src.join(" "));
        s
    }
}

/// Exact path counts from the sources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCountTable {
    /// `counts[k][v]` = number of finite paths from any source to vertex v of V_k.
    pub counts: Vec<Vec<BigUint>>,
    /// `ell[k]` = total number of paths from sources to V_k.
    pub ell: Vec<BigUint>,
}

impl PathCountTable {
    pub fn new(d: &BrattelDiagram) -> Self {
        let mut counts: Vec<Vec<BigUint>> = Vec::with_capacity(d.num_levels() + 1);
        let mut level0 = vec![BigUint::zero(); d.size(0)];
        for v in d.sources().iter().filter(|v| v.level == 0) {
            level0[v.index] += 1u32;
        }
        counts.push(level0);
        for n in 1..=d.num_levels() {
            let prev = &counts[n - 1];
            let mut next = vec![BigUint::zero(); d.size(n)];
            for (i, row) in d.matrix(n).iter().enumerate() {
                for (j, &a) in row.iter().enumerate() {
                    if a > 0 {
                        next[j] += &prev[i] * a;
                    }
                }
            }
            for v in d.sources().iter().filter(|v| v.level == n) {
                next[v.index] += 1u32;
            }
            counts.push(next);
        }
        let ell = counts.iter().map(|c| c.iter().sum()).collect();
        Self { counts, ell }
    }

    pub fn levels(&self) -> usize {
        self.ell.len() - 1
    }

    /// ℓ_k as u128; panics only for counts beyond 2^128.
    pub fn ell_u128(&self, k: usize) -> u128 {
        self.ell[k].to_u128().expect("path count exceeds u128")
    }

    pub fn ell_f64(&self, k: usize) -> f64 {
        self.ell[k].to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn count_f64(&self, k: usize, v: usize) -> f64 {
        self.counts[k][v].to_f64().unwrap_or(f64::INFINITY)
    }
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line,
            _src: src,
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            column: self.pos + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => Err(self.err(format!("expected '{c}', found '{x}'"))),
            None => Err(self.err(format!("expected '{c}', found end of line"))),
        }
    }

    fn word(&mut self) -> String {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_alphanumeric() || self.chars[self.pos] == '_')
        {
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn number(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            self.pos = start;
            return Err(self.err("expected a nonnegative integer"));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse().map_err(|_| {
            self.pos = start;
            self.err("integer out of range")
        })
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn finish(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(c) => Err(self.err(format!("unexpected trailing '{c}'"))),
        }
    }

    fn matrix(&mut self) -> Result<Vec<Vec<u64>>> {
        self.expect('[')?;
        let mut rows = Vec::new();
        if self.peek() == Some(']') {
            self.pos += 1;
            return Ok(rows);
        }
        loop {
            self.expect('[')?;
            let mut row = Vec::new();
            if self.peek() != Some(']') {
                loop {
                    row.push(self.number()?);
                    match self.peek() {
                        Some(',') => self.pos += 1,
                        Some(']') => break,
                        _ => return Err(self.err("expected ',' or ']' in matrix row")),
                    }
                }
            }
            self.expect(']')?;
            rows.push(row);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(']') => {
                    self.pos += 1;
                    return Ok(rows);
                }
                _ => return Err(self.err("expected ',' or ']' after matrix row")),
            }
        }
    }
}

fn parse_diagram(text: &str) -> Result<BrattelDiagram> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("")))
        .filter(|(_, l)| !l.trim().is_empty());

    let eof = |what: &str| Error::Syntax {
        line: text.lines().count().max(1),
        column: 1,
        message: format!("unexpected end of input, expected {what}"),
    };

    let (ln, l) = lines.next().ok_or_else(|| eof("'bratteli v1'"))?;
    let mut c = Cursor::new(l, ln);
    if c.word() != "bratteli" {
        c.pos = 0;
        return Err(c.err("expected header 'bratteli v1'"));
    }
    let ver = c.word();
    if ver != "v1" {
        return Err(c.err(format!("unsupported version '{ver}'")));
    }
    c.finish()?;

    let (ln, l) = lines.next().ok_or_else(|| eof("'levels <N>'"))?;
    let mut c = Cursor::new(l, ln);
    if c.word() != "levels" {
        c.pos = 0;
        return Err(c.err("expected 'levels <N>'"));
    }
    let n_levels = c.number()? as usize;
    c.finish()?;

    let (ln, l) = lines.next().ok_or_else(|| eof("'sizes ...'"))?;
    let mut c = Cursor::new(l, ln);
    if c.word() != "sizes" {
        c.pos = 0;
        return Err(c.err("expected 'sizes <|V_0|> ... <|V_N|>'"));
    }
    let mut sizes = Vec::new();
    while !c.at_end() {
        sizes.push(c.number()? as usize);
    }
    if sizes.len() != n_levels + 1 {
        return Err(Error::Dimension(format!(
            "line {ln}: 'sizes' lists {} levels, expected {}",
            sizes.len(),
            n_levels + 1
        )));
    }

    let mut incidence = Vec::with_capacity(n_levels);
    let mut declared: Option<Vec<Vertex>> = None;
    for (ln, l) in lines {
        let mut c = Cursor::new(l, ln);
        let kw = c.word();
        match kw.as_str() {
            "matrix" => {
                if declared.is_some() {
                    return Err(c.err("'matrix' after 'sources:'"));
                }
                let n = c.number()? as usize;
                if n != incidence.len() + 1 {
                    return Err(c.err(format!(
                        "matrix {n} out of order, expected matrix {}",
                        incidence.len() + 1
                    )));
                }
                if n > n_levels {
                    return Err(c.err(format!("matrix {n} exceeds declared levels {n_levels}")));
                }
                c.expect(':')?;
                let m = c.matrix()?;
                c.finish()?;
                incidence.push(m);
            }
            "sources" => {
                if declared.is_some() {
                    return Err(c.err("duplicate 'sources:' line"));
                }
                c.expect(':')?;
                let mut v = Vec::new();
                while !c.at_end() {
                    c.expect('(')?;
                    let level = c.number()? as usize;
                    c.expect(',')?;
                    let index = c.number()? as usize;
                    c.expect(')')?;
                    v.push(Vertex::new(level, index));
                }
                declared = Some(v);
            }
            _ => {
                c.pos = 0;
                return Err(c.err(format!("unknown directive '{kw}'")));
            }
        }
    }
    if incidence.len() != n_levels {
        return Err(Error::Dimension(format!(
            "declared {n_levels} levels but found {} matrices",
            incidence.len()
        )));
    }
    BrattelDiagram::new(sizes, incidence, declared)
}

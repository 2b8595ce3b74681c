//! Decomposition graph, colorings and cost evaluation.
//!
//! A decomposition graph has one vertex per layout feature and two disjoint
//! edge sets: conflict edges (endpoints closer than the minimum coloring
//! distance) and stitch edges (abutting pieces of one polygon). An optional
//! third set records color-friendly pairs used as a coloring hint.
//!
//! Edges carry an integer multiplicity. Graphs built from layouts or `.dg`
//! files always have unit weights; contracted graphs produced by the
//! relaxation solver aggregate parallel edges into weights.

use std::collections::HashSet;

use crate::error::{param, Error, Result, Violation};

pub type Vertex = usize;
pub type Color = u8;

/// Largest supported mask count.
pub const MAX_K: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Conflict,
    Stitch,
}

impl EdgeKind {
    pub fn tag(self) -> &'static str {
        match self {
            EdgeKind::Conflict => "ce",
            EdgeKind::Stitch => "se",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
    pub weight: u32,
}

impl Edge {
    pub fn unit(u: Vertex, v: Vertex) -> Self {
        let (u, v) = if u <= v { (u, v) } else { (v, u) };
        Edge { u, v, weight: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incidence {
    pub to: Vertex,
    pub kind: EdgeKind,
    pub weight: u32,
}

/// Unvalidated edge lists, as read from a file or produced by a generator.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphInput {
    pub vertex_count: usize,
    pub conflict_edges: Vec<(Vertex, Vertex)>,
    pub stitch_edges: Vec<(Vertex, Vertex)>,
    pub friendly_edges: Vec<(Vertex, Vertex)>,
}

fn canon(u: Vertex, v: Vertex) -> (Vertex, Vertex) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

impl GraphInput {
    pub fn new(vertex_count: usize) -> Self {
        GraphInput { vertex_count, ..Default::default() }
    }

    /// Every invariant violation, in input order. An empty list means the
    /// input is a well-formed decomposition graph.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.vertex_count;
        let mut seen: [HashSet<(Vertex, Vertex)>; 3] = Default::default();
        let sets = [("ce", &self.conflict_edges), ("se", &self.stitch_edges), ("fe", &self.friendly_edges)];
        for (idx, (kind, edges)) in sets.iter().enumerate() {
            for &(a, b) in edges.iter() {
                if a == b {
                    out.push(Violation::SelfLoop { kind, vertex: a });
                    continue;
                }
                let mut dangling = false;
                for x in [a, b] {
                    if x >= n {
                        out.push(Violation::DanglingEndpoint { kind, vertex: x });
                        dangling = true;
                    }
                }
                if dangling {
                    continue;
                }
                let (u, v) = canon(a, b);
                if !seen[idx].insert((u, v)) {
                    out.push(Violation::Duplicate { kind, u, v });
                }
            }
        }
        for &(u, v) in &self.stitch_edges {
            let key = canon(u, v);
            if u != v && seen[0].contains(&key) {
                out.push(Violation::Overlap { u: key.0, v: key.1 });
            }
        }
        out
    }
}

/// Immutable decomposition graph with dense vertex ids `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionGraph {
    n: usize,
    conflict: Vec<Edge>,
    stitch: Vec<Edge>,
    friendly: Vec<(Vertex, Vertex)>,
    adj: Vec<Vec<Incidence>>,
    friends: Vec<Vec<Vertex>>,
}

impl TryFrom<GraphInput> for DecompositionGraph {
    type Error = Error;

    fn try_from(input: GraphInput) -> Result<Self> {
        let violations = input.validate();
        if !violations.is_empty() {
            return Err(Error::InvalidGraph(violations));
        }
        let unit = |edges: &[(Vertex, Vertex)]| -> Vec<Edge> {
            let mut out: Vec<Edge> = edges.iter().map(|&(u, v)| Edge::unit(u, v)).collect();
            out.sort_unstable();
            out
        };
        let conflict = unit(&input.conflict_edges);
        let stitch = unit(&input.stitch_edges);
        let mut friendly: Vec<_> = input.friendly_edges.iter().map(|&(u, v)| canon(u, v)).collect();
        friendly.sort_unstable();
        Ok(Self::assemble(input.vertex_count, conflict, stitch, friendly))
    }
}

impl DecompositionGraph {
    /// Validated construction from conflict and stitch pairs.
    pub fn from_edges(n: usize, conflict: &[(Vertex, Vertex)], stitch: &[(Vertex, Vertex)]) -> Result<Self> {
        Self::try_from(GraphInput {
            vertex_count: n,
            conflict_edges: conflict.to_vec(),
            stitch_edges: stitch.to_vec(),
            friendly_edges: Vec::new(),
        })
    }

    /// Multiplicity graph. Parallel edges of one kind are summed; a vertex
    /// pair may carry both a conflict and a stitch weight. Self-loops are
    /// rejected.
    pub fn weighted(n: usize, conflict: Vec<Edge>, stitch: Vec<Edge>) -> Result<Self> {
        let collapse = |edges: Vec<Edge>| -> Result<Vec<Edge>> {
            let mut out: Vec<Edge> = Vec::with_capacity(edges.len());
            let mut keyed: Vec<Edge> = edges
                .into_iter()
                .map(|e| {
                    let (u, v) = canon(e.u, e.v);
                    Edge { u, v, weight: e.weight }
                })
                .collect();
            keyed.sort_unstable();
            for e in keyed {
                if e.u == e.v {
                    return Err(Error::InvalidGraph(vec![Violation::SelfLoop { kind: "edge", vertex: e.u }]));
                }
                if e.v >= n {
                    return Err(Error::InvalidGraph(vec![Violation::DanglingEndpoint { kind: "edge", vertex: e.v }]));
                }
                if e.weight == 0 {
                    continue;
                }
                match out.last_mut() {
                    Some(last) if last.u == e.u && last.v == e.v => last.weight += e.weight,
                    _ => out.push(e),
                }
            }
            Ok(out)
        };
        Ok(Self::assemble(n, collapse(conflict)?, collapse(stitch)?, Vec::new()))
    }

    fn assemble(n: usize, conflict: Vec<Edge>, stitch: Vec<Edge>, friendly: Vec<(Vertex, Vertex)>) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (kind, edges) in [(EdgeKind::Conflict, &conflict), (EdgeKind::Stitch, &stitch)] {
            for e in edges {
                adj[e.u].push(Incidence { to: e.v, kind, weight: e.weight });
                adj[e.v].push(Incidence { to: e.u, kind, weight: e.weight });
            }
        }
        let mut friends = vec![Vec::new(); n];
        for &(u, v) in &friendly {
            friends[u].push(v);
            friends[v].push(u);
        }
        DecompositionGraph { n, conflict, stitch, friendly, adj, friends }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn conflict_edges(&self) -> &[Edge] {
        &self.conflict
    }

    pub fn stitch_edges(&self) -> &[Edge] {
        &self.stitch
    }

    pub fn friendly_edges(&self) -> &[(Vertex, Vertex)] {
        &self.friendly
    }

    /// Conflict and stitch edges incident to `v`.
    pub fn incident(&self, v: Vertex) -> &[Incidence] {
        &self.adj[v]
    }

    pub fn friends(&self, v: Vertex) -> &[Vertex] {
        &self.friends[v]
    }

    pub fn has_unit_weights(&self) -> bool {
        self.conflict.iter().chain(&self.stitch).all(|e| e.weight == 1)
    }

    /// `(d_conf, d_stit)`: conflict and stitch edge counts at `v`
    /// (multiplicities included).
    pub fn degrees(&self, v: Vertex) -> Result<(usize, usize)> {
        if v >= self.n {
            return param(format!("vertex {v} out of range 0..{}", self.n));
        }
        Ok(self.degrees_unchecked(v))
    }

    pub(crate) fn degrees_unchecked(&self, v: Vertex) -> (usize, usize) {
        let mut dc = 0;
        let mut ds = 0;
        for inc in &self.adj[v] {
            match inc.kind {
                EdgeKind::Conflict => dc += inc.weight as usize,
                EdgeKind::Stitch => ds += inc.weight as usize,
            }
        }
        (dc, ds)
    }

    /// Subgraph induced by `vertices`; local id `i` maps to `vertices[i]`.
    pub fn induced(&self, vertices: &[Vertex]) -> DecompositionGraph {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let map = |edges: &[Edge]| -> Vec<Edge> {
            let mut out: Vec<Edge> = edges
                .iter()
                .filter(|e| local[e.u] != usize::MAX && local[e.v] != usize::MAX)
                .map(|e| {
                    let (u, v) = canon(local[e.u], local[e.v]);
                    Edge { u, v, weight: e.weight }
                })
                .collect();
            out.sort_unstable();
            out
        };
        let mut friendly: Vec<_> = self
            .friendly
            .iter()
            .filter(|&&(u, v)| local[u] != usize::MAX && local[v] != usize::MAX)
            .map(|&(u, v)| canon(local[u], local[v]))
            .collect();
        friendly.sort_unstable();
        Self::assemble(vertices.len(), map(&self.conflict), map(&self.stitch), friendly)
    }

    /// Same graph with every vertex `v` renamed to `perm[v]`.
    pub fn relabeled(&self, perm: &[Vertex]) -> Result<DecompositionGraph> {
        if perm.len() != self.n {
            return Err(Error::Dimension { expected: self.n, actual: perm.len() });
        }
        let map = |edges: &[Edge]| -> Vec<Edge> {
            let mut out: Vec<Edge> = edges
                .iter()
                .map(|e| {
                    let (u, v) = canon(perm[e.u], perm[e.v]);
                    Edge { u, v, weight: e.weight }
                })
                .collect();
            out.sort_unstable();
            out
        };
        let mut friendly: Vec<_> = self.friendly.iter().map(|&(u, v)| canon(perm[u], perm[v])).collect();
        friendly.sort_unstable();
        Ok(Self::assemble(self.n, map(&self.conflict), map(&self.stitch), friendly))
    }
}

/// Total assignment of a color in `0..k` to every vertex.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    colors: Vec<Color>,
    k: usize,
}

pub(crate) fn check_k(k: usize) -> Result<()> {
    if !(2..=MAX_K).contains(&k) {
        return param(format!("K must be in 2..={MAX_K}, got {k}"));
    }
    Ok(())
}

impl Coloring {
    pub fn new(colors: Vec<Color>, k: usize) -> Result<Self> {
        check_k(k)?;
        if let Some(&c) = colors.iter().find(|&&c| c as usize >= k) {
            return param(format!("color {c} outside 0..{k}"));
        }
        Ok(Coloring { colors, k })
    }

    pub fn uniform(n: usize, k: usize) -> Result<Self> {
        Self::new(vec![0; n], k)
    }

    pub(crate) fn from_raw(colors: Vec<Color>, k: usize) -> Self {
        debug_assert!(colors.iter().all(|&c| (c as usize) < k));
        Coloring { colors, k }
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn into_colors(self) -> Vec<Color> {
        self.colors
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn get(&self, v: Vertex) -> Color {
        self.colors[v]
    }

    /// Relabel colors by first appearance in vertex order. Costs are
    /// invariant under color permutation, so this picks a canonical
    /// representative of the permutation class.
    pub fn canonical(&self) -> Coloring {
        let mut map = vec![u8::MAX; self.k];
        let mut next = 0u8;
        let colors = self
            .colors
            .iter()
            .map(|&c| {
                if map[c as usize] == u8::MAX {
                    map[c as usize] = next;
                    next += 1;
                }
                map[c as usize]
            })
            .collect();
        Coloring { colors, k: self.k }
    }
}

/// Colors for a subset of vertices of some larger graph, used while
/// colorings of independently solved parts are stitched back together.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubColoring {
    pub vertices: Vec<Vertex>,
    pub colors: Vec<Color>,
}

impl SubColoring {
    pub fn new(vertices: Vec<Vertex>, coloring: &Coloring) -> Self {
        debug_assert_eq!(vertices.len(), coloring.len());
        SubColoring { vertices, colors: coloring.colors().to_vec() }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vertex, Color)> + '_ {
        self.vertices.iter().copied().zip(self.colors.iter().copied())
    }
}

/// Conflict count, stitch count and their weighted sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostReport {
    pub conflicts: u64,
    pub stitches: u64,
    pub weighted: f64,
    pub alpha: f64,
}

#[inline]
pub fn weighted_cost(conflicts: u64, stitches: u64, alpha: f64) -> f64 {
    conflicts as f64 + alpha * stitches as f64
}

impl CostReport {
    pub fn new(conflicts: u64, stitches: u64, alpha: f64) -> Self {
        CostReport { conflicts, stitches, weighted: weighted_cost(conflicts, stitches, alpha), alpha }
    }

    pub fn zero(alpha: f64) -> Self {
        Self::new(0, 0, alpha)
    }

    /// Strict improvement by weighted cost, then fewer stitches.
    pub fn better_than(&self, other: &CostReport) -> bool {
        if (self.weighted - other.weighted).abs() > 1e-9 {
            self.weighted < other.weighted
        } else {
            self.stitches < other.stitches
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return param(format!("alpha must be finite and >= 0, got {alpha}"));
    }
    Ok(())
}

/// Counts conflict edges with equal endpoint colors and stitch edges with
/// different endpoint colors.
pub fn evaluate_cost(graph: &DecompositionGraph, coloring: &Coloring, alpha: f64) -> Result<CostReport> {
    if coloring.len() != graph.vertex_count() {
        return Err(Error::Dimension { expected: graph.vertex_count(), actual: coloring.len() });
    }
    check_alpha(alpha)?;
    let c = coloring.colors();
    let conflicts = graph.conflict.iter().filter(|e| c[e.u] == c[e.v]).map(|e| e.weight as u64).sum();
    let stitches = graph.stitch.iter().filter(|e| c[e.u] != c[e.v]).map(|e| e.weight as u64).sum();
    Ok(CostReport::new(conflicts, stitches, alpha))
}

/// Shift the colors of `vertices` by `shift` modulo K.
pub fn rotate_colors(coloring: &Coloring, vertices: &[Vertex], shift: usize) -> Result<Coloring> {
    let k = coloring.k();
    if shift >= k {
        return param(format!("rotation {shift} outside 0..{k}"));
    }
    let mut colors = coloring.colors.clone();
    for &v in vertices {
        if v >= colors.len() {
            return param(format!("vertex {v} out of range"));
        }
        colors[v] = ((colors[v] as usize + shift) % k) as Color;
    }
    Ok(Coloring { colors, k })
}

//! Gomory-Hu trees and (K-1)-cut removal.
//!
//! The tree is built with Gusfield's method: `n - 1` maximum flows, all on
//! the original network, no contraction. Removing every tree edge whose
//! rounded weight is below K splits the graph into parts that can be
//! colored independently and re-joined by rotating whole parts; with at
//! most K-1 crossing conflict edges one of the K rotations is always
//! conflict-free on the cut.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::flow::{FlowNetwork, CAPACITY_SCALE};
use crate::graph::{check_k, Color, DecompositionGraph, EdgeKind, SubColoring, Vertex};

/// Stitch edges are weighted above conflict edges so that a small cut with
/// two stitch candidates rounds up and is kept.
pub const DEFAULT_STITCH_WEIGHT: f64 = 1.4;

/// Undirected flow network: capacity 1 per conflict edge and
/// `stitch_weight` per stitch edge (times multiplicity), in fixed point.
pub fn weighted_network(graph: &DecompositionGraph, stitch_weight: f64) -> Result<FlowNetwork> {
    if !(stitch_weight >= 0.0 && stitch_weight.is_finite()) {
        return Err(Error::Parameter(format!("stitch weight {stitch_weight} must be finite and >= 0")));
    }
    let se_cap = (stitch_weight * CAPACITY_SCALE as f64).round() as i64;
    let mut net = FlowNetwork::new(graph.vertex_count());
    for e in graph.conflict_edges() {
        net.add_edge(e.u, e.v, CAPACITY_SCALE * e.weight as i64)?;
    }
    for e in graph.stitch_edges() {
        net.add_edge(e.u, e.v, se_cap * e.weight as i64)?;
    }
    Ok(net)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeEdge {
    pub u: Vertex,
    pub v: Vertex,
    /// Fixed-point weight; divide by the tree's `scale` for real units.
    pub weight: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GomoryHuTree {
    n: usize,
    edges: Vec<TreeEdge>,
    scale: i64,
    adj: Vec<Vec<(Vertex, usize)>>,
}

impl GomoryHuTree {
    fn from_edges(n: usize, edges: Vec<TreeEdge>, scale: i64) -> Self {
        let mut adj = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adj[e.u].push((e.v, i));
            adj[e.v].push((e.u, i));
        }
        GomoryHuTree { n, edges, scale, adj }
    }

    /// Tree from explicit edges; `scale` fixed-point units per integer.
    pub fn new(n: usize, edges: Vec<TreeEdge>, scale: i64) -> Result<Self> {
        if scale <= 0 {
            return Err(Error::Parameter("scale must be positive".into()));
        }
        if edges.len() + 1 != n.max(1) {
            return Err(Error::Parameter(format!("{} edges cannot span {n} vertices", edges.len())));
        }
        if edges.iter().any(|e| e.u >= n || e.v >= n || e.u == e.v) {
            return Err(Error::Parameter("tree edge endpoint out of range".into()));
        }
        let tree = Self::from_edges(n, edges, scale);
        if n > 0 && tree.fundamental_cut_from(0).iter().any(|s| !s) {
            return Err(Error::Parameter("tree edges do not connect all vertices".into()));
        }
        Ok(tree)
    }

    fn fundamental_cut_from(&self, start: Vertex) -> Vec<bool> {
        let mut side = vec![false; self.n];
        side[start] = true;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &(y, _) in &self.adj[x] {
                if !side[y] {
                    side[y] = true;
                    stack.push(y);
                }
            }
        }
        side
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn weight_f64(&self, edge: usize) -> f64 {
        self.edges[edge].weight as f64 / self.scale as f64
    }

    /// Minimum fixed-point weight on the tree path between `a` and `b`.
    pub fn path_min(&self, a: Vertex, b: Vertex) -> Option<i64> {
        if a == b {
            return None;
        }
        let mut best = vec![None::<i64>; self.n];
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([a]);
        seen[a] = true;
        while let Some(x) = queue.pop_front() {
            if x == b {
                break;
            }
            for &(y, ei) in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    let w = self.edges[ei].weight;
                    best[y] = Some(best[x].map_or(w, |m| m.min(w)));
                    queue.push_back(y);
                }
            }
        }
        best[b]
    }

    /// Side of the tree containing `edges[edge].u` once that edge is cut.
    pub fn fundamental_cut(&self, edge: usize) -> Vec<bool> {
        let start = self.edges[edge].u;
        let mut side = vec![false; self.n];
        side[start] = true;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &(y, ei) in &self.adj[x] {
                if ei != edge && !side[y] {
                    side[y] = true;
                    stack.push(y);
                }
            }
        }
        side
    }

    /// `ghtree <u> <v> <weight>` lines, vertices mapped through `ids`.
    pub fn dump(&self, ids: &[u64]) -> String {
        let mut out = String::new();
        for (i, e) in self.edges.iter().enumerate() {
            out.push_str(&format!("ghtree {} {} {}\n", ids[e.u], ids[e.v], self.weight_f64(i)));
        }
        out
    }
}

fn is_connected(net: &FlowNetwork) -> bool {
    let n = net.vertex_count();
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for a in net.arcs() {
        adj[a.from].push(a.to);
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut stack = vec![0];
    let mut count = 1;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                count += 1;
                stack.push(y);
            }
        }
    }
    count == n
}

/// Gusfield's cut-tree construction. Each tree edge `(s, p[s])` carries the
/// `s`-`p[s]` minimum cut value, and removing it splits the vertices along
/// a minimum cut.
pub fn build_gomory_hu(net: &FlowNetwork) -> Result<GomoryHuTree> {
    if !is_connected(net) {
        return Err(Error::Disconnected);
    }
    let n = net.vertex_count();
    let mut parent = vec![0usize; n];
    let mut flow = vec![0i64; n];
    for s in 1..n {
        let t = parent[s];
        let cut = net.max_flow(s, t)?;
        flow[s] = cut.value;
        for i in 0..n {
            if i != s && cut.source_side[i] && parent[i] == t {
                parent[i] = s;
            }
        }
        if cut.source_side[parent[t]] {
            parent[s] = parent[t];
            parent[t] = s;
            flow[s] = flow[t];
            flow[t] = cut.value;
        }
    }
    let edges = (1..n).map(|s| TreeEdge { u: s, v: parent[s], weight: flow[s] }).collect();
    Ok(GomoryHuTree::from_edges(n, edges, CAPACITY_SCALE))
}

/// Round a fixed-point value with `scale` units per integer to the nearest
/// integer, halves away from zero.
pub fn round_half_away(value: i64, scale: i64) -> i64 {
    let half = scale / 2;
    if value >= 0 {
        (value + half).div_euclid(scale)
    } else {
        -((-value + half).div_euclid(scale))
    }
}

/// Snap a real weight to one decimal, then round half away from zero.
pub fn round_weight(w: f64) -> i64 {
    let tenths = (w * 10.0).round() as i64;
    round_half_away(tenths, 10)
}

/// Integer-rounded copy of the tree (scale 1).
pub fn refine_and_round(tree: &GomoryHuTree) -> GomoryHuTree {
    let edges = tree
        .edges
        .iter()
        .map(|e| {
            // snap to tenths first so any finer fixed point is absorbed
            let tenths = round_half_away(e.weight * 10, tree.scale);
            TreeEdge { weight: round_half_away(tenths, 10), ..*e }
        })
        .collect();
    GomoryHuTree::from_edges(tree.n, edges, 1)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossingEdge {
    pub u: Vertex,
    pub v: Vertex,
    pub kind: EdgeKind,
    pub weight: u32,
}

/// One removed tree edge and the graph edges crossing the bipartition it
/// induces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutRecord {
    pub tree_edge: TreeEdge,
    pub crossing: Vec<CrossingEdge>,
    /// Indices of the two parts joined by the tree edge.
    pub parts: (usize, usize),
}

impl CutRecord {
    pub fn stitch_count(&self) -> usize {
        self.crossing.iter().filter(|e| e.kind == EdgeKind::Stitch).map(|e| e.weight as usize).sum()
    }

    pub fn conflict_count(&self) -> usize {
        self.crossing.iter().filter(|e| e.kind == EdgeKind::Conflict).map(|e| e.weight as usize).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutPartition {
    /// Vertex sets of the parts, each sorted, ordered by smallest vertex.
    pub parts: Vec<Vec<Vertex>>,
    pub cuts: Vec<CutRecord>,
}

/// Drop every tree edge with weight below `k` (rounded tree expected) and
/// split the vertices along the remaining forest.
pub fn remove_kcuts(tree: &GomoryHuTree, graph: &DecompositionGraph, k: usize) -> Result<CutPartition> {
    check_k(k)?;
    if tree.n != graph.vertex_count() {
        return Err(Error::Dimension { expected: graph.vertex_count(), actual: tree.n });
    }
    let n = tree.n;
    let threshold = k as i64 * tree.scale;
    let removed: Vec<usize> = (0..tree.edges.len()).filter(|&i| tree.edges[i].weight < threshold).collect();

    let mut part_of = vec![usize::MAX; n];
    let mut parts: Vec<Vec<Vertex>> = Vec::new();
    for start in 0..n {
        if part_of[start] != usize::MAX {
            continue;
        }
        let id = parts.len();
        let mut members = vec![start];
        part_of[start] = id;
        let mut stack = vec![start];
        while let Some(x) = stack.pop() {
            for &(y, ei) in &tree.adj[x] {
                if tree.edges[ei].weight >= threshold && part_of[y] == usize::MAX {
                    part_of[y] = id;
                    members.push(y);
                    stack.push(y);
                }
            }
        }
        members.sort_unstable();
        parts.push(members);
    }

    let cuts = removed
        .into_iter()
        .map(|ei| {
            let side = tree.fundamental_cut(ei);
            let mut crossing = Vec::new();
            for (kind, edges) in
                [(EdgeKind::Conflict, graph.conflict_edges()), (EdgeKind::Stitch, graph.stitch_edges())]
            {
                for e in edges {
                    if side[e.u] != side[e.v] {
                        crossing.push(CrossingEdge { u: e.u, v: e.v, kind, weight: e.weight });
                    }
                }
            }
            let te = tree.edges[ei];
            CutRecord { tree_edge: te, crossing, parts: (part_of[te.u], part_of[te.v]) }
        })
        .collect();
    Ok(CutPartition { parts, cuts })
}

/// Result of rejoining parts: merged colors plus the rotation applied to
/// each input part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RotationMerge {
    pub merged: SubColoring,
    pub rotations: Vec<usize>,
}

/// Attach parts one at a time, breadth-first over the cut tree from the
/// largest part. Each attaching part takes the rotation minimizing
/// (crossing conflicts, crossing stitches, rotation index) against the
/// parts already placed.
pub fn merge_with_rotation(parts: &[SubColoring], cuts: &[CutRecord], k: usize) -> Result<RotationMerge> {
    check_k(k)?;
    let mut owner: HashMap<Vertex, usize> = HashMap::new();
    for (i, p) in parts.iter().enumerate() {
        for &v in &p.vertices {
            owner.insert(v, i);
        }
    }
    let mut neighbors = vec![Vec::new(); parts.len()];
    let mut crossing_by_part: Vec<Vec<&CrossingEdge>> = vec![Vec::new(); parts.len()];
    let mut seen_edge = std::collections::HashSet::new();
    for cut in cuts {
        let (a, b) = cut.parts;
        if a >= parts.len() || b >= parts.len() {
            return Err(Error::Parameter(format!("cut references part {a} or {b} of {}", parts.len())));
        }
        neighbors[a].push(b);
        neighbors[b].push(a);
        for e in &cut.crossing {
            if !seen_edge.insert((e.u, e.v, e.kind)) {
                continue;
            }
            let (Some(&pu), Some(&pv)) = (owner.get(&e.u), owner.get(&e.v)) else {
                return Err(Error::Parameter(format!("crossing edge ({},{}) outside parts", e.u, e.v)));
            };
            if pu != pv {
                crossing_by_part[pu].push(e);
                crossing_by_part[pv].push(e);
            }
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
        list.dedup();
    }

    let mut color: HashMap<Vertex, Color> = HashMap::new();
    let mut placed = vec![false; parts.len()];
    let mut rotations = vec![0usize; parts.len()];
    let mut by_size: Vec<usize> = (0..parts.len()).collect();
    by_size.sort_by_key(|&i| (std::cmp::Reverse(parts[i].len()), i));

    for &root in &by_size {
        if placed[root] {
            continue;
        }
        let mut queue = VecDeque::from([root]);
        placed[root] = true;
        while let Some(p) = queue.pop_front() {
            let rot = if p == root { 0 } else { best_rotation(&parts[p], &crossing_by_part[p], &owner, p, &color, k) };
            rotations[p] = rot;
            for (v, c) in parts[p].iter() {
                color.insert(v, ((c as usize + rot) % k) as Color);
            }
            for &q in &neighbors[p] {
                if !placed[q] {
                    placed[q] = true;
                    queue.push_back(q);
                }
            }
        }
    }

    let mut vertices: Vec<Vertex> = color.keys().copied().collect();
    vertices.sort_unstable();
    let colors = vertices.iter().map(|v| color[v]).collect();
    Ok(RotationMerge { merged: SubColoring { vertices, colors }, rotations })
}

fn best_rotation(
    part: &SubColoring,
    crossing: &[&CrossingEdge],
    owner: &HashMap<Vertex, usize>,
    me: usize,
    placed: &HashMap<Vertex, Color>,
    k: usize,
) -> usize {
    let local: HashMap<Vertex, Color> = part.iter().collect();
    let mut best = (u64::MAX, u64::MAX, 0usize);
    for rot in 0..k {
        let (mut conf, mut stit) = (0u64, 0u64);
        for e in crossing {
            let (mine, other) = if owner[&e.u] == me { (e.u, e.v) } else { (e.v, e.u) };
            let Some(&oc) = placed.get(&other) else {
                continue;
            };
            let mc = ((local[&mine] as usize + rot) % k) as Color;
            match e.kind {
                EdgeKind::Conflict if mc == oc => conf += e.weight as u64,
                EdgeKind::Stitch if mc != oc => stit += e.weight as u64,
                _ => {}
            }
        }
        if (conf, stit) < (best.0, best.1) {
            best = (conf, stit, rot);
        }
    }
    best.2
}

//! Vector relaxation of K-coloring and the two ways of turning it back into
//! colors.
//!
//! Every vertex gets a unit vector in K-1 dimensions. At a discrete
//! solution the vectors are corners of a regular simplex, so two vertices
//! share a color exactly when their inner product is 1 and otherwise the
//! product is -1/(K-1). Relaxing to arbitrary unit vectors and minimizing
//! `Σ_CE v_i·v_j - α Σ_SE v_i·v_j` gives affinities `x_ij` that guide either
//! a greedy mapping or a threshold merge followed by exact search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Error, Result};
use crate::exact::{solve_exact, SearchLimits, SearchStatus};
use crate::graph::{check_alpha, check_k, Color, Coloring, DecompositionGraph, Edge, EdgeKind, Vertex};
use crate::linear;

/// K unit vectors in K-1 dimensions with pairwise product -1/(K-1).
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexVectors {
    pub k: usize,
    pub vectors: Vec<Vec<f64>>,
}

pub const MAX_RELAX_K: usize = 16;

/// Built recursively: the first vector is the last axis, the others put
/// -1/(K-1) on that axis and a scaled (K-1)-simplex on the remaining ones.
pub fn simplex_vectors(k: usize) -> Result<SimplexVectors> {
    if !(2..=MAX_RELAX_K).contains(&k) {
        return param(format!("simplex vectors need 2 <= K <= {MAX_RELAX_K}, got {k}"));
    }
    fn build(k: usize) -> Vec<Vec<f64>> {
        if k == 2 {
            return vec![vec![1.0], vec![-1.0]];
        }
        let d = k - 1;
        let h = -1.0 / (k as f64 - 1.0);
        let scale = (1.0 - h * h).sqrt();
        let mut out = Vec::with_capacity(k);
        let mut top = vec![0.0; d];
        top[d - 1] = 1.0;
        out.push(top);
        for v in build(k - 1) {
            let mut w: Vec<f64> = v.iter().map(|x| x * scale).collect();
            w.push(h);
            out.push(w);
        }
        out
    }
    Ok(SimplexVectors { k, vectors: build(k) })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pairwise affinities. Either an explicit symmetric matrix or the Gram
/// matrix of per-vertex vectors (the form the relaxation produces, O(n·d)
/// memory).
#[derive(Debug, Clone, PartialEq)]
pub enum AffinityMatrix {
    Dense { n: usize, values: Vec<f64> },
    Gram { n: usize, dim: usize, factors: Vec<f64> },
}

impl AffinityMatrix {
    /// Row-major n×n values; must be symmetric with unit diagonal and
    /// entries in [-1, 1].
    pub fn dense(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::Dimension { expected: n * n, actual: values.len() });
        }
        for i in 0..n {
            if (values[i * n + i] - 1.0).abs() > 1e-9 {
                return param(format!("x[{i}][{i}] must be 1"));
            }
            for j in 0..n {
                let x = values[i * n + j];
                if x.abs() > 1.0 + 1e-9 || (x - values[j * n + i]).abs() > 1e-12 {
                    return param(format!("x[{i}][{j}] out of range or asymmetric"));
                }
            }
        }
        Ok(AffinityMatrix::Dense { n, values })
    }

    /// Rows of `vectors` must have unit norm.
    pub fn from_vectors(vectors: &[Vec<f64>]) -> Result<Self> {
        let n = vectors.len();
        let dim = vectors.first().map_or(0, Vec::len);
        let mut factors = Vec::with_capacity(n * dim);
        for (i, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::Dimension { expected: dim, actual: v.len() });
            }
            if (dot(v, v) - 1.0).abs() > 1e-9 {
                return param(format!("vector {i} is not unit length"));
            }
            factors.extend_from_slice(v);
        }
        Ok(AffinityMatrix::Gram { n, dim, factors })
    }

    /// Simplex embedding of a coloring.
    pub fn embedding(coloring: &Coloring) -> Result<Self> {
        let s = simplex_vectors(coloring.k())?;
        let rows: Vec<Vec<f64>> = coloring.colors().iter().map(|&c| s.vectors[c as usize].clone()).collect();
        Self::from_vectors(&rows)
    }

    pub fn len(&self) -> usize {
        match self {
            AffinityMatrix::Dense { n, .. } | AffinityMatrix::Gram { n, .. } => *n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            AffinityMatrix::Dense { n, values } => values[i * n + j],
            AffinityMatrix::Gram { dim, factors, .. } => {
                if i == j {
                    1.0
                } else {
                    dot(&factors[i * dim..(i + 1) * dim], &factors[j * dim..(j + 1) * dim]).clamp(-1.0, 1.0)
                }
            }
        }
    }

    /// `x <i> <j> <value>` for every pair `i < j`, ids mapped through `ids`.
    pub fn dump(&self, ids: &[u64]) -> String {
        let mut out = String::new();
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                out.push_str(&format!("x {} {} {:.6}\n", ids[i], ids[j], self.get(i, j)));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxParams {
    /// Coordinate sweeps per restart.
    pub iterations: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Weight of the squared hinge keeping CE products above -1/(K-1).
    pub penalty: f64,
    pub t_th: f64,
}

impl Default for RelaxParams {
    fn default() -> Self {
        RelaxParams { iterations: 500, restarts: 5, seed: 1, penalty: 10.0, t_th: 0.9 }
    }
}

impl RelaxParams {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.restarts == 0 {
            return param("iterations and restarts must be >= 1");
        }
        if !(self.t_th > 0.0 && self.t_th <= 1.0) {
            return param(format!("t_th must be in (0, 1], got {}", self.t_th));
        }
        if !(self.penalty >= 0.0 && self.penalty.is_finite()) {
            return param("penalty must be finite and >= 0");
        }
        Ok(())
    }
}

/// Relaxed objective for given unit vectors (row per vertex).
pub fn relaxation_objective(
    graph: &DecompositionGraph,
    vectors: &[Vec<f64>],
    k: usize,
    alpha: f64,
    penalty: f64,
) -> f64 {
    let floor = -1.0 / (k as f64 - 1.0);
    let mut obj = 0.0;
    for e in graph.conflict_edges() {
        let x = dot(&vectors[e.u], &vectors[e.v]);
        let slack = (floor - x).max(0.0);
        obj += e.weight as f64 * (x + penalty * slack * slack);
    }
    for e in graph.stitch_edges() {
        obj -= alpha * e.weight as f64 * dot(&vectors[e.u], &vectors[e.v]);
    }
    obj
}

/// Map a vector objective to conflicts + α·stitches units. Exact at simplex
/// embeddings: `(K-1)/K · (obj + |CE|/(K-1) + α|SE|)`.
pub fn discrete_equivalent(graph: &DecompositionGraph, objective: f64, k: usize, alpha: f64) -> f64 {
    let km1 = k as f64 - 1.0;
    let ce: f64 = graph.conflict_edges().iter().map(|e| e.weight as f64).sum();
    let se: f64 = graph.stitch_edges().iter().map(|e| e.weight as f64).sum();
    km1 / k as f64 * (objective + ce / km1 + alpha * se)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Relaxation {
    pub affinity: AffinityMatrix,
    pub vectors: Vec<Vec<f64>>,
    pub objective: f64,
    /// Restart that produced the result; the warm start, when given, is
    /// restart 0.
    pub restart: usize,
}

struct Local<'a> {
    graph: &'a DecompositionGraph,
    alpha: f64,
    penalty: f64,
    floor: f64,
}

impl Local<'_> {
    /// Terms of the objective involving vertex `i` placed at `v`.
    fn value(&self, vectors: &[Vec<f64>], i: usize, v: &[f64]) -> f64 {
        let mut f = 0.0;
        for inc in self.graph.incident(i) {
            let x = dot(v, &vectors[inc.to]);
            let w = inc.weight as f64;
            match inc.kind {
                EdgeKind::Conflict => {
                    let slack = (self.floor - x).max(0.0);
                    f += w * (x + self.penalty * slack * slack);
                }
                EdgeKind::Stitch => f -= self.alpha * w * x,
            }
        }
        f
    }

    fn gradient(&self, vectors: &[Vec<f64>], i: usize, v: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; v.len()];
        for inc in self.graph.incident(i) {
            let u = &vectors[inc.to];
            let w = inc.weight as f64;
            let coef = match inc.kind {
                EdgeKind::Conflict => {
                    let slack = (self.floor - dot(v, u)).max(0.0);
                    w * (1.0 - 2.0 * self.penalty * slack)
                }
                EdgeKind::Stitch => -self.alpha * w,
            };
            for (gd, ud) in g.iter_mut().zip(u) {
                *gd += coef * ud;
            }
        }
        g
    }

    /// Try to lower vertex i's terms; returns the decrease (0 if none).
    fn improve(&self, vectors: &mut [Vec<f64>], i: usize) -> f64 {
        let current = vectors[i].clone();
        let before = self.value(vectors, i, &current);
        let g = self.gradient(vectors, i, &current);
        let gn = dot(&g, &g).sqrt();
        if gn < 1e-15 {
            return 0.0;
        }
        let mut candidates: Vec<Vec<f64>> = vec![g.iter().map(|x| -x / gn).collect()];
        let mut step = 1.0;
        for _ in 0..12 {
            candidates.push(current.iter().zip(&g).map(|(c, gd)| c - step * gd / gn).collect());
            step *= 0.5;
        }
        for mut cand in candidates {
            let norm = dot(&cand, &cand).sqrt();
            if norm < 1e-12 {
                continue;
            }
            cand.iter_mut().for_each(|x| *x /= norm);
            let after = self.value(vectors, i, &cand);
            if after < before - 1e-15 {
                vectors[i] = cand;
                return before - after;
            }
        }
        0.0
    }
}

fn random_unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-9 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Low-rank local optimization of the relaxation with restarts. Each sweep
/// visits vertices in id order and only accepts improving moves, so the
/// objective never increases within a restart. With `warm_start` the first
/// restart begins at that coloring's simplex embedding.
pub fn solve_relaxation(
    graph: &DecompositionGraph,
    k: usize,
    alpha: f64,
    params: &RelaxParams,
    warm_start: Option<&Coloring>,
) -> Result<Relaxation> {
    simplex_vectors(k)?;
    check_alpha(alpha)?;
    params.validate()?;
    let n = graph.vertex_count();
    let dim = k - 1;
    let simplex = simplex_vectors(k)?;
    if let Some(w) = warm_start {
        if w.len() != n {
            return Err(Error::Dimension { expected: n, actual: w.len() });
        }
        if w.k() != k {
            return param(format!("warm start has K={}, expected {k}", w.k()));
        }
    }
    let local = Local { graph, alpha, penalty: params.penalty, floor: -1.0 / (k as f64 - 1.0) };

    let mut best: Option<(f64, usize, Vec<Vec<f64>>)> = None;
    for restart in 0..params.restarts {
        let mut vectors: Vec<Vec<f64>> = match (restart, warm_start) {
            (0, Some(w)) => w.colors().iter().map(|&c| simplex.vectors[c as usize].clone()).collect(),
            _ => {
                let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                rng.set_stream(restart as u64);
                (0..n).map(|_| random_unit(&mut rng, dim)).collect()
            }
        };
        let mut obj = relaxation_objective(graph, &vectors, k, alpha, params.penalty);
        for _ in 0..params.iterations {
            let mut gained = 0.0;
            for i in 0..n {
                gained += local.improve(&mut vectors, i);
            }
            let next = relaxation_objective(graph, &vectors, k, alpha, params.penalty);
            debug_assert!(next <= obj + 1e-9, "relaxation objective rose from {obj} to {next}");
            obj = next;
            if gained < 1e-12 {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| obj < b.0 - 1e-12) {
            best = Some((obj, restart, vectors));
        }
    }
    let (objective, restart, vectors) = best.unwrap();
    let affinity = if n == 0 {
        AffinityMatrix::Gram { n: 0, dim, factors: Vec::new() }
    } else {
        AffinityMatrix::from_vectors(&vectors)?
    };
    Ok(Relaxation { affinity, vectors, objective, restart })
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns (kept root, absorbed root).
    fn union(&mut self, a: usize, b: usize) -> (usize, usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return (a, b);
        }
        if self.size[a] < self.size[b] || (self.size[a] == self.size[b] && b < a) {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        (a, b)
    }
}

fn sorted_pairs(x: &AffinityMatrix) -> Vec<(f64, usize, usize)> {
    let n = x.len();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((x.get(i, j), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    pairs
}

/// Merge vertex pairs in descending affinity while more than K groups
/// remain or the merge keeps every group free of internal conflict edges;
/// then color groups largest first, each taking the color with the least
/// added cost (smallest index on ties).
pub fn greedy_mapping(x: &AffinityMatrix, graph: &DecompositionGraph, k: usize, alpha: f64) -> Result<Coloring> {
    check_k(k)?;
    check_alpha(alpha)?;
    let n = graph.vertex_count();
    if x.len() != n {
        return Err(Error::Dimension { expected: n, actual: x.len() });
    }
    let mut uf = UnionFind::new(n);
    // CE adjacency between groups, keyed by root
    let mut ce_adj: Vec<std::collections::HashSet<usize>> = vec![Default::default(); n];
    for e in graph.conflict_edges() {
        ce_adj[e.u].insert(e.v);
        ce_adj[e.v].insert(e.u);
    }
    let mut groups = n;
    for (_, i, j) in sorted_pairs(x) {
        let (a, b) = (uf.find(i), uf.find(j));
        if a == b {
            continue;
        }
        if !(groups > k || !ce_adj[a].contains(&b)) {
            continue;
        }
        let (keep, gone) = uf.union(a, b);
        let moved = std::mem::take(&mut ce_adj[gone]);
        for other in moved {
            if other == keep {
                ce_adj[keep].remove(&gone);
                continue;
            }
            ce_adj[other].remove(&gone);
            ce_adj[other].insert(keep);
            ce_adj[keep].insert(other);
        }
        groups -= 1;
    }

    let mut members: std::collections::BTreeMap<usize, Vec<Vertex>> = Default::default();
    for v in 0..n {
        members.entry(uf.find(v)).or_default().push(v);
    }
    let mut order: Vec<Vec<Vertex>> = members.into_values().collect();
    order.sort_by_key(|g| (std::cmp::Reverse(g.len()), g[0]));
    let mut colors: Vec<Option<Color>> = vec![None; n];
    for group in &order {
        let mut cost = vec![0.0; k];
        for &v in group {
            for inc in graph.incident(v) {
                if let Some(c) = colors[inc.to] {
                    let w = inc.weight as f64;
                    match inc.kind {
                        EdgeKind::Conflict => cost[c as usize] += w,
                        EdgeKind::Stitch => {
                            for (d, slot) in cost.iter_mut().enumerate() {
                                if d != c as usize {
                                    *slot += alpha * w;
                                }
                            }
                        }
                    }
                }
            }
        }
        let best = (0..k).min_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(a.cmp(&b))).unwrap();
        for &v in group {
            colors[v] = Some(best as Color);
        }
    }
    Coloring::new(colors.into_iter().map(Option::unwrap).collect(), k)
}

/// Graph with one vertex per affinity group.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedGraph {
    pub graph: DecompositionGraph,
    /// Original vertex to group.
    pub group_of: Vec<usize>,
    pub groups: Vec<Vec<Vertex>>,
    /// CE weight inside groups; paid whatever the coloring.
    pub forced_conflicts: u64,
}

impl MergedGraph {
    pub fn expand(&self, coloring: &Coloring) -> Result<Coloring> {
        if coloring.len() != self.groups.len() {
            return Err(Error::Dimension { expected: self.groups.len(), actual: coloring.len() });
        }
        Coloring::new(self.group_of.iter().map(|&g| coloring.get(g)).collect(), coloring.k())
    }
}

/// Union every pair with `x_ij >= t_th` (transitively). Groups are numbered
/// by their smallest member.
pub fn threshold_merge(x: &AffinityMatrix, graph: &DecompositionGraph, t_th: f64) -> Result<MergedGraph> {
    if !(t_th > 0.0 && t_th <= 1.0) {
        return param(format!("t_th must be in (0, 1], got {t_th}"));
    }
    let n = graph.vertex_count();
    if x.len() != n {
        return Err(Error::Dimension { expected: n, actual: x.len() });
    }
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if x.get(i, j) >= t_th {
                uf.union(i, j);
            }
        }
    }
    let mut group_of = vec![usize::MAX; n];
    let mut root_group = vec![usize::MAX; n];
    let mut groups: Vec<Vec<Vertex>> = Vec::new();
    for v in 0..n {
        let r = uf.find(v);
        if root_group[r] == usize::MAX {
            root_group[r] = groups.len();
            groups.push(Vec::new());
        }
        group_of[v] = root_group[r];
        groups[root_group[r]].push(v);
    }
    let mut forced_conflicts = 0;
    let mut ce = Vec::new();
    for e in graph.conflict_edges() {
        let (a, b) = (group_of[e.u], group_of[e.v]);
        if a == b {
            forced_conflicts += e.weight as u64;
        } else {
            ce.push(Edge { u: a, v: b, weight: e.weight });
        }
    }
    let se = graph
        .stitch_edges()
        .iter()
        .filter(|e| group_of[e.u] != group_of[e.v])
        .map(|e| Edge { u: group_of[e.u], v: group_of[e.v], weight: e.weight })
        .collect();
    let merged = DecompositionGraph::weighted(groups.len(), ce, se)?;
    Ok(MergedGraph { graph: merged, group_of, groups, forced_conflicts })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktrackResult {
    pub coloring: Coloring,
    pub budget_exhausted: bool,
    /// Set when the merged graph exceeded the search limits and the linear
    /// solver was used instead.
    pub fell_back: bool,
}

/// Exact search on the merged graph, expanded to original vertices.
pub fn backtrack_color(merged: &MergedGraph, k: usize, alpha: f64, limits: &SearchLimits) -> Result<BacktrackResult> {
    match solve_exact(&merged.graph, k, alpha, limits) {
        Ok(sol) => Ok(BacktrackResult {
            coloring: merged.expand(&sol.coloring)?,
            budget_exhausted: sol.status == SearchStatus::BudgetExhausted,
            fell_back: false,
        }),
        Err(Error::SizeLimit { .. }) => {
            let c = linear::linear_assign(&merged.graph, k, alpha)?;
            Ok(BacktrackResult { coloring: merged.expand(&c)?, budget_exhausted: false, fell_back: true })
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::tests::random_graph;
    use crate::graph::evaluate_cost;

    #[test]
    fn simplex_k4_matches_closed_form() {
        let s = simplex_vectors(4).unwrap();
        let r2 = 2f64.sqrt();
        let r6 = 6f64.sqrt();
        let expected = [
            [0.0, 0.0, 1.0],
            [0.0, 2.0 * r2 / 3.0, -1.0 / 3.0],
            [r6 / 3.0, -r2 / 3.0, -1.0 / 3.0],
            [-r6 / 3.0, -r2 / 3.0, -1.0 / 3.0],
        ];
        for (v, e) in s.vectors.iter().zip(expected) {
            for (a, b) in v.iter().zip(e) {
                assert!((a - b).abs() < 1e-9, "{v:?} vs {e:?}");
            }
        }
    }

    #[test]
    fn simplex_invariants_all_k() {
        for k in 2..=16 {
            let s = simplex_vectors(k).unwrap();
            assert_eq!(s.vectors.len(), k);
            for i in 0..k {
                assert_eq!(s.vectors[i].len(), k - 1);
                assert!((dot(&s.vectors[i], &s.vectors[i]) - 1.0).abs() < 1e-9);
                for j in i + 1..k {
                    assert!((dot(&s.vectors[i], &s.vectors[j]) + 1.0 / (k as f64 - 1.0)).abs() < 1e-9);
                }
            }
        }
        assert_eq!(simplex_vectors(2).unwrap().vectors, vec![vec![1.0], vec![-1.0]]);
        assert!(simplex_vectors(1).is_err());
        assert!(simplex_vectors(17).is_err());
    }

    #[test]
    fn embedding_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in [4, 5] {
            let s = simplex_vectors(k).unwrap();
            for _ in 0..50 {
                let g = random_graph(&mut rng, 8, 0.5, 0.3);
                let c = Coloring::new((0..8).map(|_| rng.gen_range(0..k) as Color).collect(), k).unwrap();
                let vecs: Vec<Vec<f64>> = c.colors().iter().map(|&x| s.vectors[x as usize].clone()).collect();
                let obj = relaxation_objective(&g, &vecs, k, 0.1, 10.0);
                let disc = evaluate_cost(&g, &c, 0.1).unwrap().weighted;
                assert!((discrete_equivalent(&g, obj, k, 0.1) - disc).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn two_vertex_relaxations() {
        let ce = DecompositionGraph::from_edges(2, &[(0, 1)], &[]).unwrap();
        let r = solve_relaxation(&ce, 4, 0.1, &RelaxParams::default(), None).unwrap();
        assert!(r.affinity.get(0, 1) <= -1.0 / 3.0 + 1e-6, "{}", r.affinity.get(0, 1));
        let se = DecompositionGraph::from_edges(2, &[], &[(0, 1)]).unwrap();
        let r = solve_relaxation(&se, 4, 0.1, &RelaxParams::default(), None).unwrap();
        assert!(r.affinity.get(0, 1) >= 1.0 - 1e-6, "{}", r.affinity.get(0, 1));
    }

    #[test]
    fn warm_start_dominance() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let g = random_graph(&mut rng, 8, 0.5, 0.2);
            let opt = solve_exact(&g, 4, 0.1, &SearchLimits::default()).unwrap();
            let params = RelaxParams { iterations: 50, restarts: 2, ..Default::default() };
            let r = solve_relaxation(&g, 4, 0.1, &params, Some(&opt.coloring)).unwrap();
            assert!(discrete_equivalent(&g, r.objective, 4, 0.1) <= opt.cost.weighted + 1e-9);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_graph(&mut rng, 12, 0.4, 0.2);
        let p = RelaxParams { iterations: 30, ..Default::default() };
        assert_eq!(solve_relaxation(&g, 4, 0.1, &p, None).unwrap(), solve_relaxation(&g, 4, 0.1, &p, None).unwrap());
    }

    #[test]
    fn greedy_examples() {
        let g = DecompositionGraph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 5)], &[]).unwrap();
        let proper = Coloring::new(vec![0, 1, 0, 1, 2, 3], 4).unwrap();
        let c = greedy_mapping(&AffinityMatrix::embedding(&proper).unwrap(), &g, 4, 0.1).unwrap();
        assert_eq!(evaluate_cost(&g, &c, 0.1).unwrap().weighted, 0.0);

        let empty = DecompositionGraph::from_edges(2, &[], &[]).unwrap();
        let x = AffinityMatrix::dense(2, vec![1.0, 0.99, 0.99, 1.0]).unwrap();
        let c = greedy_mapping(&x, &empty, 4, 0.1).unwrap();
        assert_eq!(c.get(0), c.get(1));
    }

    #[test]
    fn greedy_never_beats_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let g = random_graph(&mut rng, 9, 0.5, 0.2);
            let r = solve_relaxation(&g, 4, 0.1, &RelaxParams { iterations: 50, ..Default::default() }, None).unwrap();
            let c = greedy_mapping(&r.affinity, &g, 4, 0.1).unwrap();
            let opt = solve_exact(&g, 4, 0.1, &SearchLimits::default()).unwrap();
            assert!(evaluate_cost(&g, &c, 0.1).unwrap().weighted >= opt.cost.weighted - 1e-9);
        }
    }

    #[test]
    fn threshold_examples() {
        let g = DecompositionGraph::from_edges(3, &[(0, 2)], &[]).unwrap();
        let x = AffinityMatrix::dense(3, vec![1.0, 0.95, 0.0, 0.95, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let m = threshold_merge(&x, &g, 0.9).unwrap();
        assert_eq!(m.groups, vec![vec![0, 1], vec![2]]);

        let low = AffinityMatrix::dense(3, vec![1.0, 0.5, 0.1, 0.5, 1.0, 0.2, 0.1, 0.2, 1.0]).unwrap();
        let m = threshold_merge(&low, &g, 0.9).unwrap();
        assert_eq!(m.graph, g);

        let chain = AffinityMatrix::dense(3, vec![1.0, 0.95, 0.5, 0.95, 1.0, 0.92, 0.5, 0.92, 1.0]).unwrap();
        let m = threshold_merge(&chain, &g, 0.9).unwrap();
        assert_eq!(m.groups, vec![vec![0, 1, 2]]);
        assert_eq!(m.forced_conflicts, 1);
        let b = backtrack_color(&m, 4, 0.1, &SearchLimits::default()).unwrap();
        assert_eq!(evaluate_cost(&g, &b.coloring, 0.1).unwrap().conflicts, 1);
    }

    #[test]
    fn backtrack_k5_and_triangle() {
        let ce: Vec<_> = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).collect();
        let k5 = DecompositionGraph::from_edges(5, &ce, &[]).unwrap();
        let ident = AffinityMatrix::dense(5, (0..25).map(|i| if i % 6 == 0 { 1.0 } else { -0.25 }).collect()).unwrap();
        let m = threshold_merge(&ident, &k5, 0.9).unwrap();
        let b = backtrack_color(&m, 4, 0.1, &SearchLimits::default()).unwrap();
        assert_eq!(evaluate_cost(&k5, &b.coloring, 0.1).unwrap().conflicts, 1);

        let tri = DecompositionGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)], &[]).unwrap();
        let r = solve_relaxation(&tri, 4, 0.1, &RelaxParams::default(), None).unwrap();
        let m = threshold_merge(&r.affinity, &tri, 1.0).unwrap();
        let b = backtrack_color(&m, 4, 0.1, &SearchLimits::default()).unwrap();
        assert_eq!(evaluate_cost(&tri, &b.coloring, 0.1).unwrap().weighted, 0.0);
    }

    #[test]
    fn backtrack_falls_back_when_large() {
        let ce: Vec<_> = (0..30).map(|i| (i, (i + 1) % 30)).collect();
        let g = DecompositionGraph::from_edges(30, &ce, &[]).unwrap();
        let x = AffinityMatrix::embedding(&Coloring::uniform(30, 4).unwrap()).unwrap();
        let m = threshold_merge(
            &AffinityMatrix::dense(30, (0..900).map(|i| if i % 31 == 0 { 1.0 } else { 0.0 }).collect()).unwrap(),
            &g,
            0.9,
        )
        .unwrap();
        assert_eq!(m.groups.len(), 30);
        let b = backtrack_color(&m, 4, 0.1, &SearchLimits::default()).unwrap();
        assert!(b.fell_back);
        assert_eq!(x.get(0, 1), 1.0);
    }
}

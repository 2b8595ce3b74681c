//! Branch-and-bound optimal coloring for small graphs.
//!
//! Depth-first over vertices by descending conflict degree. A new color may
//! only be opened in index order, which removes the K! relabelings of every
//! solution. Pruning uses the cost already fixed among colored vertices
//! plus, for each uncolored vertex, the cheapest color against its colored
//! neighbors; both are lower bounds on any completion.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::graph::{check_alpha, check_k, evaluate_cost, Color, Coloring, CostReport, DecompositionGraph, EdgeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_vertices: usize,
    /// Search-tree nodes visited before giving up.
    pub max_nodes: u64,
    pub time_budget_ms: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_vertices: 24, max_nodes: 5_000_000, time_budget_ms: 10_000 }
    }
}

impl SearchLimits {
    pub fn validate(&self) -> Result<()> {
        if self.max_vertices == 0 || self.max_nodes == 0 || self.time_budget_ms == 0 {
            return Err(Error::Parameter("search limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Optimal,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub coloring: Coloring,
    pub cost: CostReport,
    pub status: SearchStatus,
    pub nodes: u64,
}

const EPS: f64 = 1e-9;

struct Search {
    k: usize,
    alpha: f64,
    order: Vec<usize>,
    /// Neighbors as (vertex, kind, weight), per vertex.
    adj: Vec<Vec<(usize, EdgeKind, f64)>>,
    colors: Vec<Option<Color>>,
    /// `conf[v*k + c]`: CE weight from v to colored neighbors of color c.
    conf: Vec<f64>,
    /// `same[v*k + c]`: SE weight from v to colored neighbors of color c.
    same: Vec<f64>,
    stitch_seen: Vec<f64>,
    best_cost: f64,
    best: Vec<Color>,
    nodes: u64,
    max_nodes: u64,
    deadline: Instant,
    exhausted: bool,
}

impl Search {
    fn incremental(&self, v: usize, c: usize) -> f64 {
        self.conf[v * self.k + c] + self.alpha * (self.stitch_seen[v] - self.same[v * self.k + c])
    }

    fn bound(&self, depth: usize) -> f64 {
        self.order[depth..]
            .iter()
            .map(|&v| (0..self.k).map(|c| self.incremental(v, c)).fold(f64::INFINITY, f64::min))
            .sum()
    }

    fn assign(&mut self, v: usize, c: usize, sign: f64) {
        for i in 0..self.adj[v].len() {
            let (u, kind, w) = self.adj[v][i];
            match kind {
                EdgeKind::Conflict => self.conf[u * self.k + c] += sign * w,
                EdgeKind::Stitch => {
                    self.same[u * self.k + c] += sign * w;
                    self.stitch_seen[u] += sign * w;
                }
            }
        }
        self.colors[v] = if sign > 0.0 { Some(c as Color) } else { None };
    }

    fn dfs(&mut self, depth: usize, cost: f64, used: usize) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes >= self.max_nodes || (self.nodes & 0xfff == 0 && Instant::now() >= self.deadline) {
            self.exhausted = true;
            return;
        }
        if depth == self.order.len() {
            if cost < self.best_cost - EPS {
                self.best_cost = cost;
                self.best = self.colors.iter().map(|c| c.unwrap()).collect();
            }
            return;
        }
        if cost + self.bound(depth) >= self.best_cost - EPS {
            return;
        }
        let v = self.order[depth];
        let open = (used + 1).min(self.k);
        let mut cands: Vec<(f64, usize)> = (0..open).map(|c| (self.incremental(v, c), c)).collect();
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (inc, c) in cands {
            if cost + inc >= self.best_cost - EPS {
                continue;
            }
            self.assign(v, c, 1.0);
            self.dfs(depth + 1, cost + inc, used.max(c + 1));
            self.assign(v, c, -1.0);
            if self.exhausted {
                return;
            }
        }
    }
}

/// Minimize conflicts + alpha * stitches exactly. The returned coloring is
/// relabeled so colors first appear in index order.
pub fn solve_exact(graph: &DecompositionGraph, k: usize, alpha: f64, limits: &SearchLimits) -> Result<ExactSolution> {
    check_k(k)?;
    check_alpha(alpha)?;
    limits.validate()?;
    let n = graph.vertex_count();
    if n > limits.max_vertices {
        return Err(Error::SizeLimit { vertices: n, limit: limits.max_vertices });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(graph.degrees_unchecked(v).0), v));
    let adj = (0..n).map(|v| graph.incident(v).iter().map(|i| (i.to, i.kind, i.weight as f64)).collect()).collect();

    let mut search = Search {
        k,
        alpha,
        order,
        adj,
        colors: vec![None; n],
        conf: vec![0.0; n * k],
        same: vec![0.0; n * k],
        stitch_seen: vec![0.0; n],
        best_cost: f64::INFINITY,
        best: Vec::new(),
        nodes: 0,
        max_nodes: limits.max_nodes,
        deadline: Instant::now() + Duration::from_millis(limits.time_budget_ms),
        exhausted: false,
    };

    // greedy incumbent in search order
    let mut cost = 0.0;
    for i in 0..n {
        let v = search.order[i];
        let c = (0..k)
            .min_by(|&a, &b| search.incremental(v, a).total_cmp(&search.incremental(v, b)).then(a.cmp(&b)))
            .unwrap();
        cost += search.incremental(v, c);
        search.assign(v, c, 1.0);
    }
    search.best = search.colors.iter().map(|c| c.unwrap()).collect();
    search.best_cost = cost;
    for i in 0..n {
        let v = search.order[i];
        let c = search.colors[v].unwrap() as usize;
        search.assign(v, c, -1.0);
    }

    search.dfs(0, 0.0, 0);
    let status = if search.exhausted { SearchStatus::BudgetExhausted } else { SearchStatus::Optimal };
    let coloring = Coloring::from_raw(search.best, k).canonical();
    let cost = evaluate_cost(graph, &coloring, alpha)?;
    Ok(ExactSolution { coloring, cost, status, nodes: search.nodes })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::graph::Edge;
    use rand::{Rng, SeedableRng};

    /// Minimum weighted cost over all K^n colorings.
    pub(crate) fn brute_force(graph: &DecompositionGraph, k: usize, alpha: f64) -> f64 {
        fn rec(
            g: &DecompositionGraph,
            k: usize,
            alpha: f64,
            v: usize,
            colors: &mut Vec<usize>,
            cost: f64,
            best: &mut f64,
        ) {
            if v == colors.len() {
                *best = best.min(cost);
                return;
            }
            for c in 0..k {
                let mut inc = 0.0;
                for i in g.incident(v) {
                    if i.to < v {
                        let same = colors[i.to] == c;
                        match i.kind {
                            EdgeKind::Conflict if same => inc += i.weight as f64,
                            EdgeKind::Stitch if !same => inc += alpha * i.weight as f64,
                            _ => {}
                        }
                    }
                }
                colors[v] = c;
                rec(g, k, alpha, v + 1, colors, cost + inc, best);
            }
        }
        let mut best = f64::INFINITY;
        rec(graph, k, alpha, 0, &mut vec![0; graph.vertex_count()], 0.0, &mut best);
        best
    }

    pub(crate) fn random_graph(rng: &mut impl Rng, n: usize, density: f64, se_rate: f64) -> DecompositionGraph {
        let mut ce = Vec::new();
        let mut se = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(density) {
                    if rng.gen_bool(se_rate) {
                        se.push((u, v));
                    } else {
                        ce.push((u, v));
                    }
                }
            }
        }
        DecompositionGraph::from_edges(n, &ce, &se).unwrap()
    }

    fn complete(n: usize) -> DecompositionGraph {
        let ce: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        DecompositionGraph::from_edges(n, &ce, &[]).unwrap()
    }

    #[test]
    fn cliques() {
        let s = solve_exact(&complete(4), 4, 0.1, &SearchLimits::default()).unwrap();
        assert_eq!(s.cost.weighted, 0.0);
        assert_eq!(s.coloring.colors(), &[0, 1, 2, 3]);
        let s = solve_exact(&complete(5), 4, 0.1, &SearchLimits::default()).unwrap();
        assert_eq!((s.cost.conflicts, s.cost.stitches), (1, 0));
        assert_eq!(s.status, SearchStatus::Optimal);
    }

    #[test]
    fn matches_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = rng.gen_range(1..=9);
            let k = rng.gen_range(3..=5);
            let g = random_graph(&mut rng, n, 0.5, 0.2);
            let s = solve_exact(&g, k, 0.1, &SearchLimits::default()).unwrap();
            assert!((s.cost.weighted - brute_force(&g, k, 0.1)).abs() < 1e-9);
        }
    }

    #[test]
    fn weighted_edges_count_multiplicity() {
        let g = DecompositionGraph::weighted(
            3,
            vec![Edge { u: 0, v: 1, weight: 3 }, Edge::unit(1, 2), Edge::unit(0, 2)],
            vec![],
        )
        .unwrap();
        let s = solve_exact(&g, 2, 0.1, &SearchLimits::default()).unwrap();
        assert_eq!(s.cost.conflicts, 1);
        assert_ne!(s.coloring.get(0), s.coloring.get(1));
    }

    #[test]
    fn adding_conflict_never_helps() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let g = random_graph(&mut rng, 8, 0.5, 0.2);
            let base = solve_exact(&g, 3, 0.1, &SearchLimits::default()).unwrap().cost.weighted;
            let mut ce: Vec<_> = g.conflict_edges().iter().map(|e| (e.u, e.v)).collect();
            let se: Vec<_> = g.stitch_edges().iter().map(|e| (e.u, e.v)).collect();
            if let Some(extra) =
                (0..8).flat_map(|u| (u + 1..8).map(move |v| (u, v))).find(|p| !ce.contains(p) && !se.contains(p))
            {
                ce.push(extra);
                let g2 = DecompositionGraph::from_edges(8, &ce, &se).unwrap();
                assert!(solve_exact(&g2, 3, 0.1, &SearchLimits::default()).unwrap().cost.weighted >= base - 1e-9);
            }
        }
    }

    #[test]
    fn bipartite_alpha_zero() {
        let g = DecompositionGraph::from_edges(6, &[(0, 3), (0, 4), (1, 4), (1, 5), (2, 5), (2, 3)], &[]).unwrap();
        assert_eq!(solve_exact(&g, 2, 0.0, &SearchLimits::default()).unwrap().cost.conflicts, 0);
    }

    #[test]
    fn limits() {
        let g = complete(5);
        let tight = SearchLimits { max_vertices: 4, ..Default::default() };
        assert!(matches!(solve_exact(&g, 4, 0.1, &tight), Err(Error::SizeLimit { vertices: 5, limit: 4 })));
        let budget = SearchLimits { max_nodes: 2, ..Default::default() };
        let s = solve_exact(&complete(12), 4, 0.1, &budget).unwrap();
        assert_eq!(s.status, SearchStatus::BudgetExhausted);
        assert_eq!(s.coloring.len(), 12);
    }

    #[test]
    fn empty_graph() {
        let g = DecompositionGraph::from_edges(0, &[], &[]).unwrap();
        let s = solve_exact(&g, 4, 0.1, &SearchLimits::default()).unwrap();
        assert!(s.coloring.is_empty());
    }
}

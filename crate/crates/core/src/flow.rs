//! Dinic's blocking-flow maximum flow on integer capacities.

use std::collections::VecDeque;

use crate::error::{param, Result};

/// Capacities are fixed-point integers: one unit of real capacity is
/// `CAPACITY_SCALE` integer units, so first-decimal weights stay exact.
pub const CAPACITY_SCALE: i64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub cap: i64,
}

/// Residual network. Arcs are stored in pairs: arc `2i` and arc `2i + 1`
/// are reverses of one another.
#[derive(Debug, Clone)]
pub struct FlowNetwork {
    n: usize,
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxFlow {
    pub value: i64,
    /// Vertices reachable from the source in the final residual network.
    pub source_side: Vec<bool>,
}

impl FlowNetwork {
    pub fn new(n: usize) -> Self {
        FlowNetwork { n, arcs: Vec::new(), out: vec![Vec::new(); n] }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    fn push_pair(&mut self, u: usize, v: usize, fwd: i64, back: i64) -> Result<()> {
        if u >= self.n || v >= self.n {
            return param(format!("arc ({u},{v}) outside 0..{}", self.n));
        }
        if fwd < 0 || back < 0 {
            return param("capacities must be non-negative");
        }
        self.out[u].push(self.arcs.len());
        self.arcs.push(Arc { from: u, to: v, cap: fwd });
        self.out[v].push(self.arcs.len());
        self.arcs.push(Arc { from: v, to: u, cap: back });
        Ok(())
    }

    /// Directed arc `u -> v`; its reverse starts at zero capacity.
    pub fn add_arc(&mut self, u: usize, v: usize, cap: i64) -> Result<()> {
        self.push_pair(u, v, cap, 0)
    }

    /// Undirected edge: both directions carry `cap`.
    pub fn add_edge(&mut self, u: usize, v: usize, cap: i64) -> Result<()> {
        self.push_pair(u, v, cap, cap)
    }

    /// Capacity of arc `i` in real units.
    pub fn capacity_f64(&self, i: usize) -> f64 {
        self.arcs[i].cap as f64 / CAPACITY_SCALE as f64
    }

    pub fn max_flow(&self, s: usize, t: usize) -> Result<MaxFlow> {
        if s >= self.n || t >= self.n {
            return param(format!("terminal outside 0..{}", self.n));
        }
        if s == t {
            return param("source equals sink");
        }
        let mut dinic = Dinic {
            net: self,
            residual: self.arcs.iter().map(|a| a.cap).collect(),
            level: vec![-1; self.n],
            next: vec![0; self.n],
        };
        let mut value = 0i64;
        while dinic.bfs(s, t) {
            dinic.next.iter_mut().for_each(|x| *x = 0);
            loop {
                let pushed = dinic.dfs(s, t, i64::MAX);
                if pushed == 0 {
                    break;
                }
                value += pushed;
            }
        }
        let source_side = dinic.level.iter().map(|&l| l >= 0).collect();
        Ok(MaxFlow { value, source_side })
    }
}

struct Dinic<'a> {
    net: &'a FlowNetwork,
    residual: Vec<i64>,
    level: Vec<i32>,
    next: Vec<usize>,
}

impl Dinic<'_> {
    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &a in &self.net.out[u] {
                let v = self.net.arcs[a].to;
                if self.residual[a] > 0 && self.level[v] < 0 {
                    self.level[v] = self.level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, limit: i64) -> i64 {
        if u == t {
            return limit;
        }
        while self.next[u] < self.net.out[u].len() {
            let a = self.net.out[u][self.next[u]];
            let v = self.net.arcs[a].to;
            if self.residual[a] > 0 && self.level[v] == self.level[u] + 1 {
                let pushed = self.dfs(v, t, limit.min(self.residual[a]));
                if pushed > 0 {
                    self.residual[a] -= pushed;
                    self.residual[a ^ 1] += pushed;
                    return pushed;
                }
            }
            self.next[u] += 1;
        }
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimum over all s/t-separating vertex bipartitions of the crossing
    /// capacity. Exponential; small graphs only.
    fn brute_min_cut(n: usize, edges: &[(usize, usize, i64)], s: usize, t: usize) -> i64 {
        let mut best = i64::MAX;
        for mask in 0u32..(1 << n) {
            if mask >> s & 1 == 0 || mask >> t & 1 == 1 {
                continue;
            }
            let cut = edges.iter().filter(|&&(u, v, _)| (mask >> u & 1) != (mask >> v & 1)).map(|e| e.2).sum();
            best = best.min(cut);
        }
        best
    }

    #[test]
    fn parallel_unit_arcs() {
        let mut net = FlowNetwork::new(2);
        for _ in 0..3 {
            net.add_edge(0, 1, 1).unwrap();
        }
        assert_eq!(net.max_flow(0, 1).unwrap().value, 3);
    }

    #[test]
    fn four_cycle_opposite() {
        let mut net = FlowNetwork::new(4);
        for (u, v) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            net.add_edge(u, v, 1).unwrap();
        }
        assert_eq!(net.max_flow(0, 2).unwrap().value, 2);
    }

    #[test]
    fn disconnected_terminals() {
        let mut net = FlowNetwork::new(4);
        net.add_edge(0, 1, 5).unwrap();
        net.add_edge(2, 3, 5).unwrap();
        let f = net.max_flow(0, 3).unwrap();
        assert_eq!(f.value, 0);
        assert_eq!(f.source_side, vec![true, true, false, false]);
    }

    #[test]
    fn directed_arcs() {
        let mut net = FlowNetwork::new(6);
        for (u, v, c) in [(0, 1, 10), (0, 2, 10), (1, 3, 4), (1, 4, 8), (2, 4, 9), (3, 5, 10), (4, 3, 6), (4, 5, 10)] {
            net.add_arc(u, v, c).unwrap();
        }
        assert_eq!(net.max_flow(0, 5).unwrap().value, 19);
    }

    #[test]
    fn bad_terminals() {
        let net = FlowNetwork::new(2);
        assert!(net.max_flow(0, 0).is_err());
        assert!(net.max_flow(0, 2).is_err());
        assert!(FlowNetwork::new(2).add_edge(0, 1, -1).is_err());
    }

    #[test]
    fn matches_cut_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(2..=10);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.4) {
                        edges.push((u, v, 1));
                    }
                }
            }
            let mut net = FlowNetwork::new(n);
            for &(u, v, c) in &edges {
                net.add_edge(u, v, c).unwrap();
            }
            let s = rng.gen_range(0..n);
            let t = (s + rng.gen_range(1..n)) % n;
            let f = net.max_flow(s, t).unwrap();
            assert_eq!(f.value, brute_min_cut(n, &edges, s, t));
            let crossing: i64 =
                edges.iter().filter(|&&(u, v, _)| f.source_side[u] != f.source_side[v]).map(|e| e.2).sum();
            assert_eq!(crossing, f.value);
            assert!(f.source_side[s] && !f.source_side[t]);
        }
    }

    #[test]
    fn arc_order_invariance() {
        use rand::seq::SliceRandom;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(3..=15);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.3) {
                        edges.push((u, v, *[10i64, 14].choose(&mut rng).unwrap()));
                    }
                }
            }
            let build = |es: &[(usize, usize, i64)]| {
                let mut net = FlowNetwork::new(n);
                for &(u, v, c) in es {
                    net.add_edge(u, v, c).unwrap();
                }
                net
            };
            let a = build(&edges).max_flow(0, n - 1).unwrap().value;
            edges.shuffle(&mut rng);
            assert_eq!(build(&edges).max_flow(0, n - 1).unwrap().value, a);
        }
    }
}

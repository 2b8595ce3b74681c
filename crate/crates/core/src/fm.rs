//! Fiduccia-Mattheyses style K-way refinement.
//!
//! A move recolors one vertex. Each pass moves every vertex exactly once,
//! always taking the best available move, then rolls back to the prefix
//! with the largest total gain. Passes repeat while that gain is positive.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{param, Error, Result};
use crate::graph::{check_alpha, check_k, Color, Coloring, DecompositionGraph, EdgeKind, Vertex};

/// Cost decrease of a move, split by edge kind so it can be compared
/// exactly with recomputed costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Gain {
    pub conflicts: i64,
    pub stitches: i64,
}

impl Gain {
    pub fn weighted(self, alpha: f64) -> f64 {
        self.conflicts as f64 + alpha * self.stitches as f64
    }
}

/// Decrease in (conflicts, stitches) from recoloring `v` to `to`.
pub fn compute_gain_parts(graph: &DecompositionGraph, coloring: &Coloring, v: Vertex, to: Color) -> Result<Gain> {
    if v >= graph.vertex_count() || coloring.len() != graph.vertex_count() {
        return param(format!("vertex {v} or coloring size out of range"));
    }
    if to as usize >= coloring.k() {
        return param(format!("color {to} outside 0..{}", coloring.k()));
    }
    let from = coloring.get(v);
    if from == to {
        return param(format!("vertex {v} already has color {to}"));
    }
    let mut g = Gain::default();
    for inc in graph.incident(v) {
        let c = coloring.get(inc.to);
        let w = inc.weight as i64;
        match inc.kind {
            EdgeKind::Conflict => g.conflicts += w * ((c == from) as i64 - (c == to) as i64),
            // a stitch is paid when colors differ
            EdgeKind::Stitch => g.stitches += w * ((c == to) as i64 - (c == from) as i64),
        }
    }
    Ok(g)
}

/// Weighted cost decrease of recoloring `v` to `to`.
pub fn compute_gain(graph: &DecompositionGraph, coloring: &Coloring, v: Vertex, to: Color, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(compute_gain_parts(graph, coloring, v, to)?.weighted(alpha))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveRecord {
    pub vertex: Vertex,
    pub from: Color,
    pub to: Color,
    pub gain: f64,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassRecord {
    pub moves: Vec<MoveRecord>,
    /// Moves kept after rollback.
    pub kept: usize,
    /// Total gain of the kept prefix.
    pub gain: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FmRun {
    pub coloring: Coloring,
    pub passes: Vec<PassRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    gain: f64,
    vertex: Vertex,
    color: Color,
    version: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    // max gain first, then smaller vertex, then smaller color
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then(other.vertex.cmp(&self.vertex)).then(other.color.cmp(&self.color))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct State<'a> {
    graph: &'a DecompositionGraph,
    k: usize,
    alpha: f64,
    colors: Vec<Color>,
    scratch_conf: Vec<i64>,
    scratch_same: Vec<i64>,
}

impl State<'_> {
    /// Best move for `v`: (gain, color).
    fn best_move(&mut self, v: Vertex) -> (f64, Color) {
        let k = self.k;
        self.scratch_conf.iter_mut().for_each(|x| *x = 0);
        self.scratch_same.iter_mut().for_each(|x| *x = 0);
        for inc in self.graph.incident(v) {
            let c = self.colors[inc.to] as usize;
            match inc.kind {
                EdgeKind::Conflict => self.scratch_conf[c] += inc.weight as i64,
                EdgeKind::Stitch => self.scratch_same[c] += inc.weight as i64,
            }
        }
        let from = self.colors[v] as usize;
        let mut best: Option<(f64, Color)> = None;
        for to in 0..k {
            if to == from {
                continue;
            }
            let g = Gain {
                conflicts: self.scratch_conf[from] - self.scratch_conf[to],
                stitches: self.scratch_same[to] - self.scratch_same[from],
            }
            .weighted(self.alpha);
            if best.is_none_or(|(b, _)| g > b) {
                best = Some((g, to as Color));
            }
        }
        best.expect("K >= 2 leaves a target color")
    }

    /// `|CE| - conflicts - α·stitches`: the cut value the moves maximize.
    fn cut_value(&self) -> f64 {
        let c = &self.colors;
        let ce: f64 = self.graph.conflict_edges().iter().filter(|e| c[e.u] != c[e.v]).map(|e| e.weight as f64).sum();
        let se: f64 = self.graph.stitch_edges().iter().filter(|e| c[e.u] != c[e.v]).map(|e| e.weight as f64).sum();
        ce - self.alpha * se
    }
}

const GAIN_EPS: f64 = 1e-9;

fn run_pass(state: &mut State) -> PassRecord {
    let n = state.graph.vertex_count();
    let mut version = vec![0u32; n];
    let mut locked = vec![false; n];
    let mut heap = BinaryHeap::with_capacity(n);
    for v in 0..n {
        let (gain, color) = state.best_move(v);
        heap.push(Entry { gain, vertex: v, color, version: 0 });
    }
    let check_framing = cfg!(debug_assertions) && n <= 64;
    let mut moves = Vec::with_capacity(n);
    let (mut total, mut best_total, mut best_len) = (0.0, 0.0, 0);
    while let Some(e) = heap.pop() {
        if locked[e.vertex] || e.version != version[e.vertex] {
            continue;
        }
        let v = e.vertex;
        let before = if check_framing { state.cut_value() } else { 0.0 };
        let from = state.colors[v];
        state.colors[v] = e.color;
        locked[v] = true;
        if check_framing {
            debug_assert!((state.cut_value() - before - e.gain).abs() < 1e-9, "cut and cost framings disagree");
        }
        moves.push(MoveRecord { vertex: v, from, to: e.color, gain: e.gain, index: moves.len() });
        total += e.gain;
        if total > best_total + GAIN_EPS {
            best_total = total;
            best_len = moves.len();
        }
        for i in 0..state.graph.incident(v).len() {
            let u = state.graph.incident(v)[i].to;
            if locked[u] {
                continue;
            }
            version[u] += 1;
            let (gain, color) = state.best_move(u);
            heap.push(Entry { gain, vertex: u, color, version: version[u] });
        }
    }
    for m in moves[best_len..].iter().rev() {
        state.colors[m.vertex] = m.from;
    }
    let accepted = best_total > GAIN_EPS;
    if !accepted {
        for m in moves[..best_len].iter().rev() {
            state.colors[m.vertex] = m.from;
        }
    }
    PassRecord { moves, kept: if accepted { best_len } else { 0 }, gain: best_total, accepted }
}

/// FM from a seeded uniform random coloring.
pub fn fm_color_detailed(
    graph: &DecompositionGraph,
    k: usize,
    alpha: f64,
    seed: u64,
    max_passes: usize,
) -> Result<FmRun> {
    check_k(k)?;
    check_alpha(alpha)?;
    if max_passes == 0 {
        return param("max_passes must be >= 1");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let colors: Vec<Color> = (0..graph.vertex_count()).map(|_| rng.gen_range(0..k) as Color).collect();
    fm_refine(graph, Coloring::new(colors, k)?, alpha, max_passes)
}

/// FM passes starting from `start`.
pub fn fm_refine(graph: &DecompositionGraph, start: Coloring, alpha: f64, max_passes: usize) -> Result<FmRun> {
    check_alpha(alpha)?;
    if start.len() != graph.vertex_count() {
        return Err(Error::Dimension { expected: graph.vertex_count(), actual: start.len() });
    }
    let k = start.k();
    let mut state =
        State { graph, k, alpha, colors: start.into_colors(), scratch_conf: vec![0; k], scratch_same: vec![0; k] };
    let mut passes = Vec::new();
    for _ in 0..max_passes {
        let pass = run_pass(&mut state);
        let accepted = pass.accepted;
        passes.push(pass);
        if !accepted {
            break;
        }
    }
    Ok(FmRun { coloring: Coloring::new(state.colors, k)?, passes })
}

pub fn fm_color(graph: &DecompositionGraph, k: usize, alpha: f64, seed: u64, max_passes: usize) -> Result<Coloring> {
    fm_color_detailed(graph, k, alpha, seed, max_passes).map(|r| r.coloring)
}

/// Best of `seeds` runs with seeds `seed, seed + 1, ...`; ties keep the
/// earlier seed.
pub fn fm_best_of(
    graph: &DecompositionGraph,
    k: usize,
    alpha: f64,
    seed: u64,
    seeds: usize,
    max_passes: usize,
) -> Result<Coloring> {
    if seeds == 0 {
        return param("need at least one seed");
    }
    let mut best: Option<(crate::graph::CostReport, Coloring)> = None;
    for i in 0..seeds as u64 {
        let c = fm_color(graph, k, alpha, seed.wrapping_add(i), max_passes)?;
        let cost = crate::graph::evaluate_cost(graph, &c, alpha)?;
        if best.as_ref().is_none_or(|(b, _)| cost.better_than(b)) {
            best = Some((cost, c));
        }
    }
    Ok(best.unwrap().1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::tests::random_graph;
    use crate::exact::{solve_exact, SearchLimits};
    use crate::graph::evaluate_cost;

    #[test]
    fn single_conflict_move() {
        let g = DecompositionGraph::from_edges(2, &[(0, 1)], &[]).unwrap();
        let start = Coloring::new(vec![0, 0], 4).unwrap();
        assert_eq!(compute_gain(&g, &start, 0, 1, 0.1).unwrap(), 1.0);
        let run = fm_refine(&g, start, 0.1, 10).unwrap();
        assert_eq!(run.passes[0].moves[0].gain, 1.0);
        assert_eq!(evaluate_cost(&g, &run.coloring, 0.1).unwrap().weighted, 0.0);
    }

    #[test]
    fn stitch_alignment_move() {
        let g = DecompositionGraph::from_edges(2, &[], &[(0, 1)]).unwrap();
        let start = Coloring::new(vec![0, 1], 4).unwrap();
        assert!((compute_gain(&g, &start, 0, 1, 0.1).unwrap() - 0.1).abs() < 1e-15);
        let run = fm_refine(&g, start, 0.1, 10).unwrap();
        assert_eq!(evaluate_cost(&g, &run.coloring, 0.1).unwrap().stitches, 0);
    }

    #[test]
    fn gain_examples() {
        let g = DecompositionGraph::from_edges(4, &[(0, 1), (0, 2)], &[]).unwrap();
        let c = Coloring::new(vec![0, 0, 0, 1], 4).unwrap();
        assert_eq!(compute_gain(&g, &c, 0, 2, 0.1).unwrap(), 2.0);
        for to in 0..4 {
            if to != 1 {
                assert_eq!(compute_gain(&g, &c, 3, to, 0.1).unwrap(), 0.0);
            }
        }
        assert!(compute_gain(&g, &c, 0, 0, 0.1).is_err());
    }

    #[test]
    fn passes_are_positive_and_never_beat_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let n = rng.gen_range(2..=10);
            let g = random_graph(&mut rng, n, 0.5, 0.2);
            let opt = solve_exact(&g, 4, 0.1, &SearchLimits::default()).unwrap().cost.weighted;
            for seed in 0..5 {
                let run = fm_color_detailed(&g, 4, 0.1, seed, 20).unwrap();
                for p in &run.passes {
                    assert_eq!(p.moves.len(), n);
                    if p.accepted {
                        assert!(p.gain > 0.0);
                    }
                }
                assert!(evaluate_cost(&g, &run.coloring, 0.1).unwrap().weighted >= opt - 1e-9);
            }
        }
    }

    #[test]
    fn best_of_seeds_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_graph(&mut rng, 30, 0.2, 0.2);
        assert_eq!(fm_best_of(&g, 4, 0.1, 1, 4, 10).unwrap(), fm_best_of(&g, 4, 0.1, 1, 4, 10).unwrap());
    }
}

//! Coloring strategies behind one trait, looked up by name.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exact::{solve_exact, SearchLimits, SearchStatus};
use crate::fm::fm_best_of;
use crate::graph::{Coloring, DecompositionGraph};
use crate::linear::{linear_assign, linear_assign_detailed, LinearReport};
use crate::relax::{backtrack_color, greedy_mapping, solve_relaxation, threshold_merge, AffinityMatrix, RelaxParams};

/// Everything a solver may need besides the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveContext {
    pub k: usize,
    pub alpha: f64,
    pub seed: u64,
    pub limits: SearchLimits,
    pub relax: RelaxParams,
    pub fm_passes: usize,
    pub fm_seeds: usize,
    pub refine_to_fixpoint: bool,
    /// Keep the affinity matrix in the outcome.
    pub keep_affinity: bool,
}

impl Default for SolveContext {
    fn default() -> Self {
        SolveContext {
            k: 4,
            alpha: 0.1,
            seed: 1,
            limits: SearchLimits::default(),
            relax: RelaxParams::default(),
            fm_passes: 50,
            fm_seeds: 1,
            refine_to_fixpoint: false,
            keep_affinity: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub coloring: Coloring,
    /// The search stopped early; the coloring is the best found.
    pub budget_exhausted: bool,
    /// Why a different solver produced the coloring, if one did.
    pub fallback: Option<String>,
    pub orders: Option<LinearReport>,
    pub affinity: Option<AffinityMatrix>,
}

impl SolveOutcome {
    fn plain(coloring: Coloring) -> Self {
        SolveOutcome { coloring, budget_exhausted: false, fallback: None, orders: None, affinity: None }
    }
}

pub trait ColorSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, graph: &DecompositionGraph, ctx: &SolveContext) -> Result<SolveOutcome>;
}

pub struct ExactSolver;

impl ColorSolver for ExactSolver {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn solve(&self, graph: &DecompositionGraph, ctx: &SolveContext) -> Result<SolveOutcome> {
        match solve_exact(graph, ctx.k, ctx.alpha, &ctx.limits) {
            Ok(sol) => Ok(SolveOutcome {
                budget_exhausted: sol.status == SearchStatus::BudgetExhausted,
                ..SolveOutcome::plain(sol.coloring)
            }),
            Err(Error::SizeLimit { vertices, limit }) => {
                let c = linear_assign(graph, ctx.k, ctx.alpha)?;
                Ok(SolveOutcome {
                    fallback: Some(format!("exact->linear ({vertices} vertices > {limit})")),
                    ..SolveOutcome::plain(c)
                })
            }
            Err(e) => Err(e),
        }
    }
}

fn relax_for(graph: &DecompositionGraph, ctx: &SolveContext) -> Result<AffinityMatrix> {
    // warm start from the linear result so the relaxation starts no worse
    let warm = linear_assign(graph, ctx.k, ctx.alpha)?;
    let params = RelaxParams { seed: ctx.seed, ..ctx.relax };
    Ok(solve_relaxation(graph, ctx.k, ctx.alpha, &params, Some(&warm))?.affinity)
}

pub struct SdpBacktrackSolver;

impl ColorSolver for SdpBacktrackSolver {
    fn name(&self) -> &'static str {
        "sdp-backtrack"
    }

    fn solve(&self, graph: &DecompositionGraph, ctx: &SolveContext) -> Result<SolveOutcome> {
        let x = relax_for(graph, ctx)?;
        let merged = threshold_merge(&x, graph, ctx.relax.t_th)?;
        let r = backtrack_color(&merged, ctx.k, ctx.alpha, &ctx.limits)?;
        Ok(SolveOutcome {
            coloring: r.coloring,
            budget_exhausted: r.budget_exhausted,
            fallback: r.fell_back.then(|| format!("backtrack->linear ({} groups)", merged.groups.len())),
            orders: None,
            affinity: ctx.keep_affinity.then_some(x),
        })
    }
}

pub struct SdpGreedySolver;

impl ColorSolver for SdpGreedySolver {
    fn name(&self) -> &'static str {
        "sdp-greedy"
    }

    fn solve(&self, graph: &DecompositionGraph, ctx: &SolveContext) -> Result<SolveOutcome> {
        let x = relax_for(graph, ctx)?;
        let c = greedy_mapping(&x, graph, ctx.k, ctx.alpha)?;
        Ok(SolveOutcome { affinity: ctx.keep_affinity.then_some(x), ..SolveOutcome::plain(c) })
    }
}

pub struct LinearSolver;

impl ColorSolver for LinearSolver {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn solve(&self, graph: &DecompositionGraph, ctx: &SolveContext) -> Result<SolveOutcome> {
        let (c, report) = linear_assign_detailed(graph, ctx.k, ctx.alpha, ctx.refine_to_fixpoint)?;
        Ok(SolveOutcome { orders: Some(report), ..SolveOutcome::plain(c) })
    }
}

pub struct FmSolver;

impl ColorSolver for FmSolver {
    fn name(&self) -> &'static str {
        "fm"
    }

    fn solve(&self, graph: &DecompositionGraph, ctx: &SolveContext) -> Result<SolveOutcome> {
        let c = fm_best_of(graph, ctx.k, ctx.alpha, ctx.seed, ctx.fm_seeds, ctx.fm_passes)?;
        Ok(SolveOutcome::plain(c))
    }
}

/// Solvers keyed by name.
pub struct SolverRegistry {
    solvers: BTreeMap<&'static str, Box<dyn ColorSolver>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        SolverRegistry { solvers: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(ExactSolver));
        r.register(Box::new(SdpBacktrackSolver));
        r.register(Box::new(SdpGreedySolver));
        r.register(Box::new(LinearSolver));
        r.register(Box::new(FmSolver));
        r
    }

    /// Replaces any solver already registered under the same name.
    pub fn register(&mut self, solver: Box<dyn ColorSolver>) {
        self.solvers.insert(solver.name(), solver);
    }

    pub fn get(&self, name: &str) -> Result<&dyn ColorSolver> {
        self.solvers
            .get(name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::Parameter(format!("unknown algorithm '{name}' (known: {})", self.names().join(", "))))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.keys().copied().collect()
    }
}

impl Default for SolverRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::evaluate_cost;

    #[test]
    fn builtins_registered() {
        let r = SolverRegistry::with_builtins();
        assert_eq!(r.names(), vec!["exact", "fm", "linear", "sdp-backtrack", "sdp-greedy"]);
        assert!(r.get("ilp").is_err());
    }

    #[test]
    fn every_solver_handles_a_triangle() {
        let g = DecompositionGraph::from_edges(3, &[(0, 1), (1, 2), (0, 2)], &[]).unwrap();
        let r = SolverRegistry::with_builtins();
        for name in r.names() {
            let out = r.get(name).unwrap().solve(&g, &SolveContext::default()).unwrap();
            assert_eq!(evaluate_cost(&g, &out.coloring, 0.1).unwrap().weighted, 0.0, "{name}");
        }
    }

    #[test]
    fn exact_falls_back_on_size() {
        let ce: Vec<_> = (0..40).map(|i| (i, (i + 1) % 40)).collect();
        let g = DecompositionGraph::from_edges(40, &ce, &[]).unwrap();
        let out = ExactSolver.solve(&g, &SolveContext::default()).unwrap();
        assert!(out.fallback.is_some());
    }
}

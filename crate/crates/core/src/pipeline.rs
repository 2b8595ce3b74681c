//! Divide, solve every piece, reassemble, re-verify.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::division::{assemble, divide, DivisionOptions};
use crate::error::{Error, Result};
use crate::graph::{check_alpha, check_k, evaluate_cost, Coloring, CostReport, DecompositionGraph};
use crate::solver::{SolveContext, SolveOutcome, SolverRegistry};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub algorithm: String,
    pub division: DivisionOptions,
    pub solve: SolveContext,
    /// Worker threads for piece solving; 0 uses rayon's default.
    pub workers: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            algorithm: "sdp-backtrack".into(),
            division: DivisionOptions::default(),
            solve: SolveContext::default(),
            workers: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        check_k(self.solve.k)?;
        check_alpha(self.solve.alpha)?;
        self.solve.limits.validate()?;
        self.solve.relax.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PieceReport {
    pub vertices: usize,
    pub cost: CostReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub algorithm: String,
    pub k: usize,
    pub alpha: f64,
    pub vertices: usize,
    pub pieces: Vec<PieceReport>,
    /// Recomputed on the full graph from the final coloring.
    pub cost: CostReport,
    pub stage_ms: Vec<(&'static str, u64)>,
    pub peeled: usize,
    pub components: usize,
    pub blocks: usize,
    pub removed_cuts: usize,
    pub budget_exhausted: bool,
    pub fallbacks: Vec<String>,
}

impl RunReport {
    /// `key=value` lines.
    pub fn to_stats(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "algorithm={}", self.algorithm);
        let _ = writeln!(out, "k={}", self.k);
        let _ = writeln!(out, "alpha={}", self.alpha);
        let _ = writeln!(out, "vertices={}", self.vertices);
        let _ = writeln!(out, "conflicts={}", self.cost.conflicts);
        let _ = writeln!(out, "stitches={}", self.cost.stitches);
        let _ = writeln!(out, "cost={}", self.cost.weighted);
        let _ = writeln!(out, "peeled={}", self.peeled);
        let _ = writeln!(out, "components={}", self.components);
        let _ = writeln!(out, "blocks={}", self.blocks);
        let _ = writeln!(out, "pieces={}", self.pieces.len());
        let _ = writeln!(out, "removed_cuts={}", self.removed_cuts);
        let largest = self.pieces.iter().map(|p| p.vertices).max().unwrap_or(0);
        let _ = writeln!(out, "largest_piece={largest}");
        let _ = writeln!(out, "budget_exhausted={}", self.budget_exhausted);
        let _ = writeln!(out, "fallbacks={}", self.fallbacks.len());
        for (i, f) in self.fallbacks.iter().enumerate() {
            let _ = writeln!(out, "fallback.{i}={f}");
        }
        for (stage, ms) in &self.stage_ms {
            let _ = writeln!(out, "time_ms.{stage}={ms}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub coloring: Coloring,
    pub report: RunReport,
    pub ghtree_dump: String,
    pub orders_dump: String,
    pub affinity_dump: String,
}

/// Run the configured division and solver on `graph`. `ids` maps dense
/// vertices to external ids for the diagnostic dumps.
pub fn run_pipeline(
    graph: &DecompositionGraph,
    ids: &[u64],
    config: &PipelineConfig,
    registry: &SolverRegistry,
) -> Result<RunOutput> {
    config.validate()?;
    if ids.len() != graph.vertex_count() {
        return Err(Error::Dimension { expected: graph.vertex_count(), actual: ids.len() });
    }
    let solver = registry.get(&config.algorithm)?;
    let ctx = &config.solve;
    let mut stage_ms = Vec::new();

    let t = Instant::now();
    let plan = divide(graph, ctx.k, &config.division)?;
    stage_ms.push(("divide", t.elapsed().as_millis() as u64));

    let t = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Parameter(format!("worker pool: {e}")))?;
    let outcomes: Vec<SolveOutcome> =
        pool.install(|| plan.pieces.par_iter().map(|p| solver.solve(&p.graph, ctx)).collect::<Result<Vec<_>>>())?;
    stage_ms.push(("solve", t.elapsed().as_millis() as u64));

    let t = Instant::now();
    let colorings: Vec<Coloring> = outcomes.iter().map(|o| o.coloring.clone()).collect();
    let coloring = assemble(&plan, graph, &colorings)?;
    stage_ms.push(("merge", t.elapsed().as_millis() as u64));

    let t = Instant::now();
    let cost = evaluate_cost(graph, &coloring, ctx.alpha)?;
    stage_ms.push(("evaluate", t.elapsed().as_millis() as u64));

    let mut pieces = Vec::with_capacity(plan.pieces.len());
    let mut fallbacks = Vec::new();
    let mut orders_dump = String::new();
    let mut affinity_dump = String::new();
    for (i, (piece, out)) in plan.pieces.iter().zip(&outcomes).enumerate() {
        pieces.push(PieceReport {
            vertices: piece.vertices.len(),
            cost: evaluate_cost(&piece.graph, &out.coloring, ctx.alpha)?,
        });
        if let Some(f) = &out.fallback {
            fallbacks.push(format!("piece {i}: {f}"));
        }
        if let Some(o) = &out.orders {
            let _ = writeln!(orders_dump, "piece {i} vertices={}", piece.vertices.len());
            orders_dump.push_str(&o.dump());
        }
        if let Some(x) = &out.affinity {
            let piece_ids: Vec<u64> = piece.vertices.iter().map(|&v| ids[v]).collect();
            let _ = writeln!(affinity_dump, "piece {i} vertices={}", piece.vertices.len());
            affinity_dump.push_str(&x.dump(&piece_ids));
        }
    }
    for (ci, comp) in plan.components.iter().enumerate() {
        for (bi, block) in comp.blocks.iter().enumerate() {
            if block.ghtree_skipped {
                fallbacks
                    .push(format!("component {ci} block {bi}: cut tree skipped ({} vertices)", block.vertices.len()));
            }
        }
    }

    let report = RunReport {
        algorithm: config.algorithm.clone(),
        k: ctx.k,
        alpha: ctx.alpha,
        vertices: graph.vertex_count(),
        pieces,
        cost,
        stage_ms,
        peeled: plan.peel_stack.len(),
        components: plan.components.len(),
        blocks: plan.components.iter().map(|c| c.blocks.len()).sum(),
        removed_cuts: plan.removed_cuts(),
        budget_exhausted: outcomes.iter().any(|o| o.budget_exhausted),
        fallbacks,
    };
    Ok(RunOutput { coloring, report, ghtree_dump: plan.dump_ghtrees(ids), orders_dump, affinity_dump })
}

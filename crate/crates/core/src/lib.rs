//! Multiple-patterning layout decomposition.
//!
//! Build a decomposition graph from rectangles (or read one), split it into
//! independently colorable pieces, color each piece with K masks using one
//! of several solvers, and stitch the colorings back together.

pub mod dgfile;
pub mod division;
pub mod error;
pub mod exact;
pub mod flow;
pub mod fm;
pub mod ghtree;
pub mod graph;
pub mod layout;
pub mod linear;
pub mod pipeline;
pub mod relax;
pub mod solver;
pub mod synth;

pub use error::{Error, Result};
pub use graph::{evaluate_cost, Color, Coloring, CostReport, DecompositionGraph, Edge, EdgeKind, Vertex};
pub use pipeline::{run_pipeline, PipelineConfig, RunOutput, RunReport};
pub use solver::{ColorSolver, SolveContext, SolveOutcome, SolverRegistry};

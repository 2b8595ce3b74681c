//! `mpld`: decompose a layout or graph into K masks, or generate test layouts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use mpld::dgfile::{parse_graph_file, write_coloring, write_graph_file, GraphFile};
use mpld::division::PeelRule;
use mpld::layout::{build_graph, emit_svg, parse_layout_file, write_layout_file, Layout, Metric};
use mpld::synth::{generate_synthetic, SynthParams};
use mpld::{run_pipeline, Error, PipelineConfig, SolverRegistry};

#[derive(Parser)]
#[command(name = "mpld", version, about = "Multiple-patterning layout decomposition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Color a layout or decomposition graph with K masks.
    Decompose(DecomposeArgs),
    /// Write a seeded synthetic layout.
    Gen(GenArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Dg,
    Lay,
}

#[derive(clap::Args)]
struct DecomposeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Defaults to the input file extension.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Defaults to `param k` in a graph file, else 4.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Overrides the layout file value.
    #[arg(long)]
    min_s: Option<i64>,
    #[arg(long)]
    hp: Option<i64>,
    #[arg(long, default_value = "euclidean")]
    metric: String,
    #[arg(long, default_value = "sdp-backtrack")]
    algo: String,
    #[arg(long, default_value_t = 0.9)]
    t_th: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    no_peel: bool,
    #[arg(long, default_value = "strict")]
    peel_rule: String,
    #[arg(long)]
    no_bcc: bool,
    #[arg(long)]
    no_ghtree: bool,
    /// Solver threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long, default_value_t = 50)]
    fm_passes: usize,
    #[arg(long, default_value_t = 1)]
    fm_seeds: usize,
    /// Largest piece the exact search accepts.
    #[arg(long, default_value_t = 24)]
    exact_max_vertices: usize,
    #[arg(long, default_value_t = 10_000)]
    time_budget_ms: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long)]
    dump_orders: Option<PathBuf>,
    #[arg(long)]
    dump_affinity: Option<PathBuf>,
    #[arg(long)]
    dump_ghtree: Option<PathBuf>,
    /// Write zero for every timing so outputs are byte-reproducible.
    #[arg(long)]
    no_timing: bool,
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long)]
    polygons: usize,
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    #[arg(long, default_value_t = 0.1)]
    stitch_rate: f64,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Write the decomposition graph (.dg) instead of the layout.
    #[arg(long)]
    as_graph: bool,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Input { .. } => 2,
            CliError::Core(Error::Internal(_)) => 1,
            CliError::Core(_) => 3,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

/// Ok(true) when a solver ran out of budget.
fn decompose(a: &DecomposeArgs) -> Result<bool, CliError> {
    let started = Instant::now();
    let format = match a.format {
        Some(f) => f,
        None if a.input.extension().is_some_and(|e| e == "lay") => Format::Lay,
        None => Format::Dg,
    };
    let text = read(&a.input)?;
    let input_err = |source| CliError::Input { path: a.input.clone(), source };
    let metric: Metric = a.metric.parse()?;

    let (graph, ids, k, layout): (_, _, _, Option<Layout>) = match format {
        Format::Dg => {
            let file = parse_graph_file(&text).map_err(input_err)?;
            let k = a.k.or(file.k).unwrap_or(4);
            (file.graph, file.ids, k, None)
        }
        Format::Lay => {
            let mut layout = parse_layout_file(&text).map_err(input_err)?;
            let k = a.k.unwrap_or(4);
            if let Some(s) = a.min_s {
                layout.min_s = s;
            }
            if let Some(hp) = a.hp {
                layout.hp = hp;
            }
            let layout = Layout::new(layout.rects, layout.min_s, layout.hp)?;
            let built = build_graph(&layout, metric).map_err(input_err)?;
            for w in &built.warnings {
                eprintln!("warning: {w}");
            }
            let ids = (0..built.graph.vertex_count() as u64).collect();
            (built.graph, ids, k, Some(layout))
        }
    };

    if a.svg.is_some() && layout.is_none() {
        return Err(Error::Parameter("--svg needs a layout input".into()).into());
    }
    let mut config = PipelineConfig { algorithm: a.algo.clone(), workers: a.workers, ..Default::default() };
    let d = &mut config.division;
    d.peel = !a.no_peel;
    d.peel_rule = a.peel_rule.parse::<PeelRule>()?;
    d.bcc = !a.no_bcc;
    d.ghtree = !a.no_ghtree;
    let s = &mut config.solve;
    s.k = k;
    s.alpha = a.alpha;
    s.seed = a.seed;
    s.relax.seed = a.seed;
    s.relax.t_th = a.t_th;
    s.fm_passes = a.fm_passes;
    s.fm_seeds = a.fm_seeds;
    s.limits.max_vertices = a.exact_max_vertices;
    s.limits.time_budget_ms = a.time_budget_ms;
    s.keep_affinity = a.dump_affinity.is_some();
    if a.fm_passes == 0 || a.fm_seeds == 0 {
        return Err(Error::Parameter("--fm-passes and --fm-seeds must be >= 1".into()).into());
    }

    let registry = SolverRegistry::with_builtins();
    let mut out = run_pipeline(&graph, &ids, &config, &registry)?;
    let elapsed = if a.no_timing { 0 } else { started.elapsed().as_millis() as u64 };
    if a.no_timing {
        out.report.stage_ms.iter_mut().for_each(|(_, ms)| *ms = 0);
    }
    out.report.stage_ms.push(("total", elapsed));

    let coloring_text = write_coloring(&ids, &out.coloring, &out.report.cost, elapsed);
    match &a.out {
        Some(p) => write(p, &coloring_text)?,
        None => print!("{coloring_text}"),
    }
    if let Some(p) = &a.stats {
        let mut stats = out.report.to_stats();
        if layout.is_some() {
            stats.push_str(&format!("metric={}\n", metric.name()));
        }
        write(p, &stats)?;
    }
    if let Some(p) = &a.svg {
        if let Some(layout) = &layout {
            write(p, &emit_svg(layout, &out.coloring)?)?;
        }
    }
    for (path, text) in
        [(&a.dump_orders, &out.orders_dump), (&a.dump_affinity, &out.affinity_dump), (&a.dump_ghtree, &out.ghtree_dump)]
    {
        if let Some(p) = path {
            write(p, text)?;
        }
    }
    for f in &out.report.fallbacks {
        eprintln!("note: {f}");
    }
    Ok(out.report.budget_exhausted)
}

fn generate(a: &GenArgs) -> Result<(), CliError> {
    let p = SynthParams { polygons: a.polygons, density: a.density, stitch_rate: a.stitch_rate, k: a.k, seed: a.seed };
    let layout = generate_synthetic(&p)?;
    let text = if a.as_graph {
        let graph = build_graph(&layout, Metric::Euclidean)?.graph;
        write_graph_file(&GraphFile::identity(graph, Some(a.k)))
    } else {
        write_layout_file(&layout)
    };
    write(&a.out, &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Decompose(a) => decompose(a),
        Command::Gen(a) => generate(a).map(|()| false),
    };
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("warning: search budget exhausted; best coloring found was written");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

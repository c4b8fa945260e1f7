//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nearcut::graph::laplacian;
use nearcut::objective::FunctionalKind;
use nearcut::outer::{newton_bisection, OuterConfig};
use nearcut::reference::{brute_force_mincut, fiedler_partition, stoer_wagner_sq};
use nearcut::spectral::smallest_eigenpairs;
use nearcut::{Graph, Report};
use rayon::prelude::*;
use thiserror::Error;

use crate::io::{self, ParseError, SweepQuery};
use crate::report::{self, Body, DistanceOut, Document, FunctionalOut, GraphInfo, OracleOut, PartitionOut, SolverOut, SweepEntry};

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Solver(#[from] nearcut::Error),
    #[error("{path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

/// How a successful run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Certified,
    Uncertified,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Self::Certified => 0,
            Self::Uncertified => 2,
        }
    }

    fn of(certified: bool) -> Self {
        if certified {
            Self::Certified
        } else {
            Self::Uncertified
        }
    }
}

/// Distance of a weighted graph to disconnection or to spectral ambiguity.
///
/// Graph files are edge lists (`i j [w]`, 1-based, `#` comments, optional
/// `n <count>` line) or symmetric coordinate MatrixMarket files (`.mtx`).
/// Relative paths that do not exist are also looked up under
/// `$NEARCUT_FIXTURES`.
///
/// Exit status: 0 on a certified result, 2 when the solver finished without a
/// certificate, 1 on errors.
#[derive(Debug, Parser)]
#[command(name = "nearcut", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sign split of the Fiedler vector of the unperturbed graph.
    Fiedler {
        graph: PathBuf,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Smallest perturbation that disconnects the graph, optionally with
    /// membership or cardinality constraints.
    Mincut {
        graph: PathBuf,
        /// Require at least N vertices on each side.
        #[arg(long, value_name = "N")]
        cardinality: Option<usize>,
        /// Margin used to pick the cardinality sets; default 1% of the
        /// Fiedler vector's range.
        #[arg(long, value_name = "D", requires = "cardinality")]
        delta: Option<f64>,
        /// File of `+ v` / `- v` lines fixing vertices to either side.
        #[arg(long, value_name = "FILE")]
        membership: Option<PathBuf>,
        /// File of `+ v` / `- v` queries, each solved with the base
        /// membership extended by that one vertex.
        #[arg(long, value_name = "FILE", requires = "membership", conflicts_with = "cardinality")]
        membership_sweep: Option<PathBuf>,
        /// Penalty weight for a single constraint.
        #[arg(long, default_value_t = 3.0)]
        alpha: f64,
        /// Cardinality weight when both constraints are given.
        #[arg(long, default_value_t = 3.0)]
        alpha_c: f64,
        /// Membership weight when both constraints are given.
        #[arg(long, default_value_t = 10.0)]
        alpha_m: f64,
        /// Let cut edges regrow during the inner flow.
        #[arg(long)]
        release_cuts: bool,
        #[command(flatten)]
        solver: SolverOpts,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Smallest perturbation that makes the second and third Laplacian
    /// eigenvalues coincide.
    Ambiguity {
        graph: PathBuf,
        #[command(flatten)]
        solver: SolverOpts,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Exact minimum of the squared-weight cut cost.
    Oracle {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = OracleMethod::Sw)]
        method: OracleMethod,
        #[command(flatten)]
        out: OutputOpts,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMethod {
    /// Enumerate all bipartitions (small graphs only).
    Brute,
    /// Stoer-Wagner on squared weights.
    Sw,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct SolverOpts {
    /// Target for the functional and width of the final bracket.
    #[arg(long, default_value_t = 1e-5)]
    pub tol: f64,
    /// Maximum outer iterations.
    #[arg(long, default_value_t = 50)]
    pub k_max: usize,
    /// Initial inner step size.
    #[arg(long, default_value_t = 0.1)]
    pub h0: f64,
    /// Relative threshold below which an edge counts as cut.
    #[arg(long, default_value_t = 0.05)]
    pub theta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum inner steps per outer iteration.
    #[arg(long, default_value_t = 10_000)]
    pub max_steps: usize,
    /// Keep iterating after the iterate already encodes a valid cut.
    #[arg(long)]
    pub no_early_stop: bool,
}

impl SolverOpts {
    pub fn config(&self, irreversible: bool) -> OuterConfig<f64> {
        let mut cfg = OuterConfig::with_tol(self.tol);
        cfg.k_max = self.k_max;
        cfg.theta = self.theta;
        cfg.seed = self.seed;
        cfg.early_extract = !self.no_early_stop;
        cfg.flow.h0 = self.h0;
        cfg.flow.max_steps = self.max_steps;
        cfg.flow.irreversible_cuts = irreversible;
        cfg
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputOpts {
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
    /// Write every inner step as CSV.
    #[arg(long, value_name = "FILE")]
    pub trace_csv: Option<PathBuf>,
    /// Write the graph with the partition in Graphviz format.
    #[arg(long, value_name = "FILE")]
    pub dot: Option<PathBuf>,
}

fn write_file(path: &Path, text: &str) -> Result<(), AppError> {
    std::fs::write(path, text).map_err(|source| AppError::Write { path: path.to_path_buf(), source })
}

fn emit(doc: &Document, out: &OutputOpts) -> Result<(), AppError> {
    let json = doc.to_json();
    match &out.json {
        Some(path) => write_file(path, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

fn document(command: &'static str, input: &Path, g: &Graph, solver: Option<SolverOut>, body: Body) -> Document {
    Document {
        schema_version: report::SCHEMA_VERSION,
        command,
        input: input.display().to_string(),
        graph: GraphInfo::of(g),
        solver,
        body,
    }
}

fn no_csv(out: &OutputOpts, command: &str) -> Result<(), AppError> {
    match out.trace_csv {
        Some(_) => Err(AppError::Usage(format!("--trace-csv does not apply to `{command}`"))),
        None => Ok(()),
    }
}

pub fn run(cli: &Cli) -> Result<Status, AppError> {
    match &cli.command {
        Command::Fiedler { graph, out } => {
            no_csv(out, "fiedler")?;
            let g = io::load_graph(graph)?;
            let p = fiedler_partition(&g)?;
            let l = laplacian(&g, None, 0.0, 0.0)?;
            let lambda2 = smallest_eigenpairs(&l, 2)?.lambda(2);
            if let Some(path) = &out.dot {
                write_file(path, &report::dot(&g, Some(&p)))?;
            }
            let body = Body::Fiedler { lambda2, partition: PartitionOut::of(&g, &p) };
            emit(&document("fiedler", graph, &g, None, body), out)?;
            Ok(Status::Certified)
        }
        Command::Oracle { graph, method, out } => {
            no_csv(out, "oracle")?;
            let g = io::load_graph(graph)?;
            let mut oracles = Vec::new();
            let mut best = None;
            if matches!(method, OracleMethod::Sw | OracleMethod::Both) {
                let p = stoer_wagner_sq(&g)?;
                oracles.push(OracleOut { method: "stoer-wagner", partition: PartitionOut::of(&g, &p) });
                best = Some(p);
            }
            if matches!(method, OracleMethod::Brute | OracleMethod::Both) {
                let p = brute_force_mincut(&g)?;
                oracles.push(OracleOut { method: "brute-force", partition: PartitionOut::of(&g, &p) });
                best.get_or_insert(p);
            }
            if let Some(path) = &out.dot {
                write_file(path, &report::dot(&g, best.as_ref()))?;
            }
            emit(&document("oracle", graph, &g, None, Body::Oracle { oracles }), out)?;
            Ok(Status::Certified)
        }
        Command::Ambiguity { graph, solver, out } => {
            let g = io::load_graph(graph)?;
            let cfg = solver.config(true);
            let r = newton_bisection(&g, &FunctionalKind::Ambiguity, &cfg)?;
            finish_single("ambiguity", graph, &g, &cfg, &r, out)
        }
        Command::Mincut {
            graph,
            cardinality,
            delta,
            membership,
            membership_sweep,
            alpha,
            alpha_c,
            alpha_m,
            release_cuts,
            solver,
            out,
        } => {
            let g = io::load_graph(graph)?;
            let cfg = solver.config(!release_cuts);
            let sets = match membership {
                Some(path) => Some(io::parse_membership(&io::read_input(path)?, g.n())?),
                None => None,
            };
            if let Some(path) = membership_sweep {
                let (minus, plus) = sets.expect("clap enforces --membership");
                let queries = io::parse_sweep(&io::read_input(path)?, g.n())?;
                if out.trace_csv.is_some() || out.dot.is_some() {
                    return Err(AppError::Usage("--trace-csv and --dot do not apply to a sweep".into()));
                }
                return sweep(graph, &g, &cfg, minus, plus, *alpha, queries, out);
            }
            let kind = match (sets, *cardinality) {
                (None, None) => FunctionalKind::MinCut,
                (Some((minus, plus)), None) => FunctionalKind::Membership { minus, plus, alpha: *alpha },
                (None, Some(nbar)) => FunctionalKind::Cardinality { nbar, delta: *delta, alpha: *alpha },
                (Some((minus, plus)), Some(nbar)) => {
                    FunctionalKind::Combined { minus, plus, nbar, delta: *delta, alpha_c: *alpha_c, alpha_m: *alpha_m }
                }
            };
            let r = newton_bisection(&g, &kind, &cfg)?;
            finish_single("mincut", graph, &g, &cfg, &r, out)
        }
    }
}

fn finish_single(
    command: &'static str,
    input: &Path,
    g: &Graph,
    cfg: &OuterConfig<f64>,
    r: &Report,
    out: &OutputOpts,
) -> Result<Status, AppError> {
    if let Some(path) = &out.trace_csv {
        write_file(path, &report::trace_csv(r))?;
    }
    if let Some(path) = &out.dot {
        write_file(path, &report::dot(g, r.partition.as_ref()))?;
    }
    let body = Body::Distance(DistanceOut::of(g, r));
    emit(&document(command, input, g, Some(SolverOut::of(cfg)), body), out)?;
    Ok(Status::of(r.certified))
}

/// Adds `q.vertex` to one side of the base sets, taking it off the other.
fn extended(minus: &[usize], plus: &[usize], q: SweepQuery) -> (Vec<usize>, Vec<usize>) {
    let (mut minus, mut plus) = (minus.to_vec(), plus.to_vec());
    minus.retain(|&v| v != q.vertex);
    plus.retain(|&v| v != q.vertex);
    if q.plus {
        plus.push(q.vertex);
        plus.sort_unstable();
    } else {
        minus.push(q.vertex);
        minus.sort_unstable();
    }
    (minus, plus)
}

#[allow(clippy::too_many_arguments)]
fn sweep(
    input: &Path,
    g: &Graph,
    cfg: &OuterConfig<f64>,
    minus: Vec<usize>,
    plus: Vec<usize>,
    alpha: f64,
    mut queries: Vec<SweepQuery>,
    out: &OutputOpts,
) -> Result<Status, AppError> {
    queries.sort_unstable();
    queries.dedup();
    let base = FunctionalKind::Membership { minus: minus.clone(), plus: plus.clone(), alpha };
    let entries: Vec<SweepEntry> = queries
        .par_iter()
        .map(|&q| {
            let (m, p) = extended(&minus, &plus, q);
            let side = if q.plus { "plus" } else { "minus" };
            let kind = FunctionalKind::Membership { minus: m, plus: p, alpha };
            let (result, error) = match newton_bisection(g, &kind, cfg) {
                Ok(r) => (Some(DistanceOut::of(g, &r)), None),
                Err(err) => (None, Some(err.to_string())),
            };
            SweepEntry { vertex: q.vertex + 1, side, result, error }
        })
        .collect();
    let all = entries.iter().all(|e| e.result.as_ref().is_some_and(|r| r.certified));
    let body = Body::Sweep { base: FunctionalOut::of(&base), sweep: entries };
    emit(&document("mincut", input, g, Some(SolverOut::of(cfg)), body), out)?;
    Ok(Status::of(all))
}

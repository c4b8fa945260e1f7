//! JSON reports, trace CSV and DOT export. Vertex ids are 1-based.

use std::fmt::Write as _;

use nearcut::objective::FunctionalKind;
use nearcut::outer::OuterConfig;
use nearcut::{Graph, Partition, Report};
use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct GraphInfo {
    pub n: usize,
    pub edges: usize,
    pub connected: bool,
}

impl GraphInfo {
    pub fn of(g: &Graph) -> Self {
        Self { n: g.n(), edges: g.edge_count(), connected: g.is_connected() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CutEdge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionOut {
    /// Class (0 or 1) of each vertex, vertex 1 first.
    pub labels: Vec<u8>,
    pub classes: [Vec<usize>; 2],
    pub sizes: [usize; 2],
    pub cut_edges: Vec<CutEdge>,
    /// Sum of squared weights of the cut edges.
    pub cut_cost: f64,
    /// Frobenius norm of the cut, `sqrt(2 * cut_cost)`.
    pub cut_norm: f64,
}

impl PartitionOut {
    pub fn of(g: &Graph, p: &Partition) -> Self {
        let (a, b) = p.sizes();
        let one_based = |c| p.class(c).into_iter().map(|v| v + 1).collect();
        Self {
            labels: p.labels.clone(),
            classes: [one_based(0), one_based(1)],
            sizes: [a, b],
            cut_edges: p
                .cut_edges
                .iter()
                .map(|k| {
                    let (i, j) = g.edges()[k];
                    CutEdge { i: i + 1, j: j + 1, weight: g.weights()[k] }
                })
                .collect(),
            cut_cost: p.cost,
            cut_norm: (2.0 * p.cost).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FunctionalOut {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minus: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plus: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nbar: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_m: Option<f64>,
}

impl FunctionalOut {
    pub fn of(kind: &FunctionalKind<f64>) -> Self {
        let ids = |s: &[usize]| Some(s.iter().map(|v| v + 1).collect());
        let mut out = Self { kind: kind.name(), minus: None, plus: None, nbar: None, delta: None, alpha: None, alpha_c: None, alpha_m: None };
        match kind {
            FunctionalKind::MinCut | FunctionalKind::Ambiguity => {}
            FunctionalKind::Membership { minus, plus, alpha } => {
                out.minus = ids(minus);
                out.plus = ids(plus);
                out.alpha = Some(*alpha);
            }
            FunctionalKind::Cardinality { nbar, delta, alpha } => {
                out.nbar = Some(*nbar);
                out.delta = *delta;
                out.alpha = Some(*alpha);
            }
            FunctionalKind::Combined { minus, plus, nbar, delta, alpha_c, alpha_m } => {
                out.minus = ids(minus);
                out.plus = ids(plus);
                out.nbar = Some(*nbar);
                out.delta = *delta;
                out.alpha_c = Some(*alpha_c);
                out.alpha_m = Some(*alpha_m);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverOut {
    pub tol: f64,
    pub k_max: usize,
    pub h0: f64,
    pub theta: f64,
    pub seed: u64,
    pub max_steps: usize,
    pub irreversible_cuts: bool,
    pub early_extract: bool,
}

impl SolverOut {
    pub fn of(cfg: &OuterConfig<f64>) -> Self {
        Self {
            tol: cfg.tol,
            k_max: cfg.k_max,
            h0: cfg.flow.h0,
            theta: cfg.theta,
            seed: cfg.seed,
            max_steps: cfg.flow.max_steps,
            irreversible_cuts: cfg.flow.irreversible_cuts,
            early_extract: cfg.early_extract,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InnerSummary {
    pub steps: usize,
    pub stop: &'static str,
    pub f_start: Option<f64>,
    pub final_h: Option<f64>,
    pub active: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OuterRowOut {
    pub k: usize,
    pub eps: f64,
    /// `null` when the functional was undefined at this size.
    pub f: Option<f64>,
    pub mode: &'static str,
    pub f_prime: Option<f64>,
    pub lb: f64,
    pub ub: f64,
    pub inner: InnerSummary,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct DistanceOut {
    pub functional: FunctionalOut,
    pub eps_star: f64,
    pub bracket: [f64; 2],
    pub eps0: f64,
    pub certified: bool,
    pub converged: bool,
    pub early_stop: bool,
    pub components: usize,
    pub partition: Option<PartitionOut>,
    pub trace: Vec<OuterRowOut>,
}

impl DistanceOut {
    pub fn of(g: &Graph, r: &Report) -> Self {
        let trace = r
            .trace
            .iter()
            .map(|row| OuterRowOut {
                k: row.k,
                eps: row.eps,
                f: finite(row.f),
                mode: row.mode.as_str(),
                f_prime: row.f_prime.and_then(finite),
                lb: row.lb,
                ub: row.ub,
                inner: InnerSummary {
                    steps: row.inner_steps,
                    stop: row.inner_stop.as_str(),
                    f_start: row.inner_trace.first().map(|t| t.f),
                    final_h: row.inner_trace.last().map(|t| t.h),
                    active: row.inner_trace.last().map_or(0, |t| t.active),
                },
            })
            .collect();
        Self {
            functional: FunctionalOut::of(&r.kind),
            eps_star: r.eps_star,
            bracket: [r.bracket.0, r.bracket.1],
            eps0: r.eps0,
            certified: r.certified,
            converged: r.converged,
            early_stop: r.early_stop,
            components: r.components,
            partition: r.partition.as_ref().map(|p| PartitionOut::of(g, p)),
            trace,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepEntry {
    /// 1-based vertex added to the base constraint.
    pub vertex: usize,
    /// `"plus"` or `"minus"`.
    pub side: &'static str,
    pub result: Option<DistanceOut>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleOut {
    pub method: &'static str,
    pub partition: PartitionOut,
}

#[derive(Debug, Clone, Serialize)]
#[serde(untagged)]
pub enum Body {
    Fiedler { lambda2: f64, partition: PartitionOut },
    Distance(DistanceOut),
    Sweep { base: FunctionalOut, sweep: Vec<SweepEntry> },
    Oracle { oracles: Vec<OracleOut> },
}

/// Top-level JSON document written by every subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct Document {
    pub schema_version: u32,
    pub command: &'static str,
    pub input: String,
    pub graph: GraphInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverOut>,
    #[serde(flatten)]
    pub body: Body,
}

impl Document {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// One line per inner step of every outer iteration.
pub fn trace_csv(r: &Report) -> String {
    let mut out = String::from("outer_k,eps,mode,step,f,h,active,kappa,norm,min_weight\n");
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:?}"));
    for row in &r.trace {
        for t in &row.inner_trace {
            let _ = writeln!(
                out,
                "{},{:?},{},{},{:?},{:?},{},{},{:?},{:?}",
                row.k,
                row.eps,
                row.mode.as_str(),
                t.step,
                t.f,
                t.h,
                t.active,
                opt(t.kappa),
                t.norm,
                t.min_weight
            );
        }
    }
    out
}

/// Undirected DOT graph with vertices filled by class and cut edges dashed.
pub fn dot(g: &Graph, p: Option<&Partition>) -> String {
    const FILL: [&str; 2] = ["lightblue", "salmon"];
    let mut out = String::from("graph nearcut {\n  node [style=filled];\n");
    for v in 0..g.n() {
        let color = p.map_or("white", |p| FILL[usize::from(p.labels[v])]);
        let _ = writeln!(out, "  {} [fillcolor={color}];", v + 1);
    }
    for (k, (&(i, j), w)) in g.edges().iter().zip(g.weights()).enumerate() {
        let cut = p.is_some_and(|p| p.cut_edges.contains(k));
        let style = if cut { ", style=dashed" } else { "" };
        let _ = writeln!(out, "  {} -- {} [weight={w:?}{style}];", i + 1, j + 1);
    }
    out.push_str("}\n");
    out
}

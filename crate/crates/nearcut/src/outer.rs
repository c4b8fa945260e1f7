//! Outer level: Newton–bisection on the perturbation size `ε`.
//!
//! `f(ε)` is the value of the inner minimizer at `ε`. The search keeps a
//! bracket `[ε_lb, ε_ub]` where `ε_ub` is the smallest size seen with
//! `f < tol`. From the left it takes Newton steps with the analytic `f′`;
//! after a success it bisects.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::flow::{project_feasible, run_inner, FlowConfig, InnerResult, StopReason, TraceRow};
use crate::graph::{components_from_edges, component_count, laplacian, EdgeSet, PatternMatrix, WeightedGraph};
use crate::objective::{evaluate, FunctionalKind};
use crate::reference::Partition;
use crate::spectral::smallest_eigenpairs;
use crate::{Error, Real, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OuterConfig<T> {
    /// Target for `f`, also the bracket width at which the search stops.
    pub tol: T,
    pub k_max: usize,
    /// Edge classification threshold ϑ for cut extraction.
    pub theta: T,
    /// Stop as soon as the current iterate already encodes a valid cut.
    pub early_extract: bool,
    /// Seed for the random start used when the initial gradient vanishes.
    pub seed: u64,
    pub flow: FlowConfig<T>,
}

impl<T: Real> Default for OuterConfig<T> {
    fn default() -> Self {
        Self::with_tol(T::lit(1e-5))
    }
}

impl<T: Real> OuterConfig<T> {
    /// Defaults with the same `tol` for the outer and inner levels.
    pub fn with_tol(tol: T) -> Self {
        Self {
            tol,
            k_max: 50,
            theta: T::lit(0.05),
            early_extract: true,
            seed: 0,
            flow: FlowConfig { tol, ..FlowConfig::default() },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.flow.validate()?;
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        if !(self.theta > T::zero() && self.theta < T::one()) {
            return Err(Error::InvalidParameter("theta must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMode {
    Initial,
    Newton,
    Bisection,
}

impl StepMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Initial => "initial",
            Self::Newton => "newton",
            Self::Bisection => "bisection",
        }
    }
}

/// One outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRow<T> {
    pub k: usize,
    pub eps: T,
    /// NaN when the functional was undefined at the start of the inner solve.
    pub f: T,
    /// How `eps` was chosen.
    pub mode: StepMode,
    /// `f′(eps)` when it was used for the next Newton step.
    pub f_prime: Option<T>,
    pub lb: T,
    pub ub: T,
    pub inner_steps: usize,
    pub inner_stop: StopReason,
    pub inner_trace: Vec<TraceRow<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport<T: Real> {
    pub kind: FunctionalKind<T>,
    /// Upper end of the bracket, or the lower end if no trial reached `f < tol`.
    pub eps_star: T,
    pub bracket: (T, T),
    pub eps0: T,
    /// Two-way split of a certified cut problem.
    pub partition: Option<Partition<T>>,
    /// Components of the thresholded graph behind `partition`.
    pub components: usize,
    /// Cut problems: the thresholded perturbed graph is disconnected and meets
    /// the constraints. Ambiguity: some `ε` reached `f < tol`.
    pub certified: bool,
    /// The bracket closed below `tol` or the cut was extracted early.
    pub converged: bool,
    pub early_stop: bool,
    pub trace: Vec<OuterRow<T>>,
    /// Perturbation direction at `eps_star`, if one was computed.
    pub e_star: Option<PatternMatrix<T>>,
}

/// `f′(ε) = −‖ΠG‖‖ΠE‖ − ε⁻² (‖ΠG‖/‖ΠE‖) ‖P_{ℰ₀}W‖²` at a converged minimizer.
pub fn f_prime<T: Real>(g: &WeightedGraph<T>, eps: T, e: &PatternMatrix<T>, grad: &PatternMatrix<T>, active: &EdgeSet) -> Result<T> {
    let pe = e.free_part(active).norm();
    if !(pe > T::zero()) {
        return Err(Error::NoFreeMass);
    }
    let pg = grad.free_part(active).norm();
    let w = PatternMatrix::from_values(g.weights().to_vec()).active_part(active).norm_squared();
    Ok(-pg * pe - pg / pe * w / (eps * eps))
}

/// Starting size and direction: `E⁰ = −G(0)/‖G(0)‖` and the largest `ε`
/// keeping `W + εE⁰ ≥ 0`, capped at `‖W‖_F`.
///
/// For the ambiguity functional the nonnegativity bound is usually far too
/// loose, so `ε₀` is further capped by the Newton step from `ε = 0`,
/// `f(0)/‖G(0)‖`.
pub fn init_eps0<T: Real>(g: &WeightedGraph<T>, kind: &FunctionalKind<T>, seed: u64) -> Result<(T, PatternMatrix<T>)> {
    let m = g.edge_count();
    let zero = PatternMatrix::zeros(m);
    let eval = evaluate(kind, g, &zero, T::one())?;
    let gnorm = eval.gradient.as_ref().map_or(T::zero(), |gr| gr.norm());
    let e0 = match &eval.gradient {
        Some(gr) if gnorm > T::zero() => gr.scaled(-T::one() / gnorm),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = PatternMatrix::from_values((0..m).map(|_| T::lit(rng.random::<f64>() - 0.5)).collect());
            let n = r.norm();
            if !(n > T::zero()) {
                return Err(Error::InvalidGraph("graph has no edges".into()));
            }
            r.scaled(T::one() / n)
        }
    };
    let cap = g.frobenius_norm();
    let mut eps0 = g
        .weights()
        .iter()
        .zip(e0.values())
        .filter(|(_, &v)| v < T::zero())
        .fold(cap, |acc, (&w, &v)| acc.min(w / -v));
    if matches!(kind, FunctionalKind::Ambiguity) && gnorm > T::zero() {
        eps0 = eps0.min(eval.value / gnorm);
    }
    Ok((eps0, e0))
}

/// Projects a previous minimizer onto the feasible set at a new `ε`,
/// starting from an empty active set.
pub fn warm_start<T: Real>(e_old: &PatternMatrix<T>, g: &WeightedGraph<T>, eps_new: T, tol_zero: T) -> Result<PatternMatrix<T>> {
    project_feasible(e_old, g, eps_new, &EdgeSet::new(), None, tol_zero).map(|(e, _)| e)
}

/// Outcome of classifying every edge as cut or kept.
#[derive(Debug, Clone, PartialEq)]
pub struct CutFragment<T> {
    /// Component labels of the graph of kept edges.
    pub labels: Vec<usize>,
    pub components: usize,
    /// Edges with `w + εe ≤ ϑw`.
    pub removed: EdgeSet,
    /// λ₂ of the graph of kept edges.
    pub lambda2: T,
}

/// Classifies each edge as cut (`w + εe ≤ ϑw`) or kept (`|εe| ≤ ϑw`); cut
/// wins when both hold. Returns `None` if some edge is neither, or if the
/// kept edges still connect the graph.
pub fn extract_cut<T: Real>(g: &WeightedGraph<T>, eps: T, e: &PatternMatrix<T>, theta: T) -> Option<CutFragment<T>> {
    let mut removed = EdgeSet::new();
    for (k, (&w, &v)) in g.weights().iter().zip(e.values()).enumerate() {
        if w + eps * v <= theta * w {
            removed.insert(k);
        } else if (eps * v).abs() > theta * w {
            return None;
        }
    }
    threshold_fragment(g, removed)
}

/// Removes the edges with `w + εe ≤ ϑw` regardless of the rest.
fn threshold_cut<T: Real>(g: &WeightedGraph<T>, eps: T, e: &PatternMatrix<T>, theta: T) -> Option<CutFragment<T>> {
    let removed = g
        .weights()
        .iter()
        .zip(e.values())
        .enumerate()
        .filter(|(_, (&w, &v))| w + eps * v <= theta * w)
        .map(|(k, _)| k)
        .collect();
    threshold_fragment(g, removed)
}

fn threshold_fragment<T: Real>(g: &WeightedGraph<T>, removed: EdgeSet) -> Option<CutFragment<T>> {
    let kept = removed.complement(g.edge_count());
    let labels = components_from_edges(g.n(), kept.iter().map(|k| g.edges()[k]));
    let components = component_count(&labels);
    if components < 2 {
        return None;
    }
    let mut w = g.weights().to_vec();
    for k in removed.iter() {
        w[k] = T::zero();
    }
    let lambda2 = g
        .with_weights(w)
        .ok()
        .and_then(|gs| laplacian(&gs, None, T::zero(), T::zero()).ok())
        .and_then(|l| smallest_eigenpairs(&l, 2).ok())
        .map_or(T::zero(), |s| s.lambda(2));
    Some(CutFragment { labels, components, removed, lambda2 })
}

/// Fiedler vector of `Lap(W + εE)`, used to group surplus components.
fn perturbed_fiedler<T: Real>(g: &WeightedGraph<T>, eps: T, e: &PatternMatrix<T>) -> Option<DVector<T>> {
    let tol = T::rel_tol(1e-10) * g.max_weight().max(T::one());
    let l = laplacian(g, Some(e), eps, tol).ok()?;
    smallest_eigenpairs(&l, 2).ok().map(|s| s.vector(2).clone())
}

/// Merges the components of a fragment into two sides that respect the
/// constraints of `kind`, or `None` if that is impossible.
///
/// Components holding prescribed vertices go to their side. The rest follow
/// the sign of the mean Fiedler entry of the perturbed graph.
pub fn bipartition<T: Real>(
    g: &WeightedGraph<T>,
    kind: &FunctionalKind<T>,
    frag: &CutFragment<T>,
    fiedler: Option<&DVector<T>>,
) -> Option<Partition<T>> {
    let c = frag.components;
    let mut side: Vec<Option<u8>> = vec![None; c];
    if let Some((minus, plus)) = kind.membership() {
        for (&v, s) in minus.iter().map(|v| (v, 0u8)).chain(plus.iter().map(|v| (v, 1u8))) {
            let comp = frag.labels[v];
            match side[comp] {
                Some(t) if t != s => return None,
                _ => side[comp] = Some(s),
            }
        }
    }
    let mut mean = vec![T::zero(); c];
    let mut count = vec![0usize; c];
    for v in 0..g.n() {
        count[frag.labels[v]] += 1;
        if let Some(x) = fiedler {
            mean[frag.labels[v]] += x[v];
        }
    }
    // Orientation: the Fiedler sign that the "minus" vertices lean to is side 0.
    let orient = match (kind.membership(), fiedler) {
        (Some((minus, _)), Some(x)) => {
            if minus.iter().fold(T::zero(), |s, &v| s + x[v]) > T::zero() {
                1u8
            } else {
                0u8
            }
        }
        _ => 0u8,
    };
    for comp in 0..c {
        if side[comp].is_none() {
            let nonneg = u8::from(mean[comp] >= T::zero());
            side[comp] = Some(nonneg ^ orient);
        }
    }
    let mut side: Vec<u8> = side.into_iter().map(|s| s.unwrap_or(0)).collect();
    if side.iter().all(|&s| s == side[0]) {
        // Send the unconstrained component of the most extreme mean across.
        let forced: Vec<bool> = (0..c)
            .map(|comp| kind.membership().is_some_and(|(m, p)| m.iter().chain(p).any(|&v| frag.labels[v] == comp)))
            .collect();
        let pick = (0..c)
            .filter(|&comp| !forced[comp])
            .max_by(|&a, &b| {
                let ma = (mean[a] / T::from_usize(count[a]).unwrap()).abs();
                let mb = (mean[b] / T::from_usize(count[b]).unwrap()).abs();
                ma.partial_cmp(&mb).unwrap_or(std::cmp::Ordering::Equal)
            })?;
        side[pick] ^= 1;
    }
    let labels: Vec<u8> = (0..g.n()).map(|v| side[frag.labels[v]]).collect();
    let part = Partition::from_labels(g, &labels).ok()?;
    if let Some(nbar) = kind.cardinality() {
        let (a, b) = part.sizes();
        if a < nbar || b < nbar {
            return None;
        }
    }
    Some(part)
}

fn certify<T: Real>(
    g: &WeightedGraph<T>,
    kind: &FunctionalKind<T>,
    eps: T,
    e: &PatternMatrix<T>,
    frag: Option<CutFragment<T>>,
) -> Option<(Partition<T>, usize)> {
    let frag = frag?;
    let x = perturbed_fiedler(g, eps, e);
    bipartition(g, kind, &frag, x.as_ref()).map(|p| (p, frag.components))
}

fn trivial_report<T: Real>(kind: &FunctionalKind<T>, partition: Option<Partition<T>>, components: usize, certified: bool) -> DistanceReport<T> {
    DistanceReport {
        kind: kind.clone(),
        eps_star: T::zero(),
        bracket: (T::zero(), T::zero()),
        eps0: T::zero(),
        partition,
        components,
        certified,
        converged: true,
        early_stop: false,
        trace: Vec::new(),
        e_star: None,
    }
}

/// Smallest `ε` with `f(ε) < tol`, found by Newton steps from the left and
/// bisection, each inner solve warm-started from the latest minimizer.
pub fn newton_bisection<T: Real>(g: &WeightedGraph<T>, kind: &FunctionalKind<T>, cfg: &OuterConfig<T>) -> Result<DistanceReport<T>> {
    cfg.validate()?;
    kind.validate(g.n())?;
    if g.n() < 2 || g.edge_count() == 0 {
        return Err(Error::InvalidGraph("need at least one edge".into()));
    }
    let m = g.edge_count();
    let zero = PatternMatrix::zeros(m);

    if kind.is_cut() && !g.is_connected() {
        let frag = threshold_fragment(g, EdgeSet::new());
        let cert = certify(g, kind, T::zero(), &zero, frag);
        let comps = cert.as_ref().map_or(0, |c| c.1);
        let certified = cert.is_some();
        return Ok(trivial_report(kind, cert.map(|c| c.0), comps, certified));
    }
    if !kind.is_cut() {
        let ev = evaluate(kind, g, &zero, T::zero())?;
        if ev.value <= T::zero() {
            return Ok(trivial_report(kind, None, 0, true));
        }
    }

    let tol_zero = cfg.flow.tol_zero(g);
    let (eps0, e0) = init_eps0(g, kind, cfg.seed)?;
    let half = T::lit(0.5);
    let mut lb = T::zero();
    let mut ub = g.frobenius_norm();
    let mut eps = eps0;
    let mut mode = StepMode::Initial;
    let mut e = e0;
    let mut best: Option<InnerResult<T>> = None;
    let mut trace = Vec::new();
    let mut converged = false;
    // Upper limit for the next trial set by degenerate solves; not a bound on ε*.
    let mut ceiling = ub;

    for k in 0..=cfg.k_max {
        let start = warm_start(&e, g, eps, tol_zero)?;
        let inner = match run_inner(g, eps, &start, kind, &cfg.flow) {
            Ok(inner) => inner,
            // The penalty is undefined at this start; back off like a degenerate solve.
            Err(Error::SetsOverlap(_) | Error::OneSigned) if eps < ceiling => {
                ceiling = eps;
                trace.push(OuterRow {
                    k,
                    eps,
                    f: T::lit(f64::NAN),
                    mode,
                    f_prime: None,
                    lb,
                    ub,
                    inner_steps: 0,
                    inner_stop: StopReason::Degenerate,
                    inner_trace: Vec::new(),
                });
                if ceiling - lb < cfg.tol {
                    break;
                }
                eps = (lb + ceiling) * half;
                mode = StepMode::Bisection;
                continue;
            }
            Err(err) => return Err(err),
        };
        let f = inner.state.eval.value;
        e = inner.state.e.clone();
        let mut row = OuterRow {
            k,
            eps,
            f,
            mode,
            f_prime: None,
            lb,
            ub,
            inner_steps: inner.state.step_count,
            inner_stop: inner.stop,
            inner_trace: inner.trace.clone(),
        };

        if cfg.early_extract && kind.is_cut() {
            if let Some((part, comps)) = certify(g, kind, eps, &e, extract_cut(g, eps, &e, cfg.theta)) {
                ub = ub.min(eps);
                row.ub = ub;
                trace.push(row);
                return Ok(DistanceReport {
                    kind: kind.clone(),
                    eps_star: eps,
                    bracket: (lb, ub),
                    eps0,
                    partition: Some(part),
                    components: comps,
                    certified: true,
                    converged: true,
                    early_stop: true,
                    trace,
                    e_star: Some(e),
                });
            }
        }

        let mut next;
        if f < cfg.tol {
            if eps <= ub {
                ub = eps;
                best = Some(inner);
            }
            next = (lb + ub) * half;
            mode = StepMode::Bisection;
        } else if inner.stop == StopReason::Degenerate && eps < ceiling {
            ceiling = eps;
            next = (lb + ceiling) * half;
            mode = StepMode::Bisection;
        } else {
            lb = lb.max(eps);
            if ceiling - lb < cfg.tol {
                ceiling = ub;
            }
            next = (lb + ceiling.min(ub)) * half;
            mode = StepMode::Bisection;
            if let Some(grad) = inner.state.eval.gradient.as_ref() {
                if let Ok(fp) = f_prime(g, eps, &inner.state.e, grad, &inner.state.active) {
                    row.f_prime = Some(fp);
                    if fp < T::zero() && fp.is_finite() {
                        next = eps - f / fp;
                        mode = StepMode::Newton;
                    }
                }
            }
        }
        ceiling = ceiling.min(ub);
        if !(lb < next && next < ceiling) {
            next = (lb + ceiling) * half;
            mode = StepMode::Bisection;
        }
        row.lb = lb;
        row.ub = ub;
        trace.push(row);
        if ub - lb < cfg.tol {
            converged = true;
            break;
        }
        eps = next;
    }

    let (partition, components, certified, e_star) = match &best {
        Some(b) if kind.is_cut() => {
            let frag = threshold_cut(g, ub, &b.state.e, cfg.theta);
            match certify(g, kind, ub, &b.state.e, frag) {
                Some((p, c)) => (Some(p), c, true, Some(b.state.e.clone())),
                None => (None, 0, false, Some(b.state.e.clone())),
            }
        }
        Some(b) => (None, 0, true, Some(b.state.e.clone())),
        None => (None, 0, false, None),
    };
    // Without any success `ub` is still `‖W‖_F`; the last failed size says more.
    let eps_star = if best.is_some() { ub } else { lb };
    Ok(DistanceReport {
        kind: kind.clone(),
        eps_star,
        bracket: (lb, ub),
        eps0,
        partition,
        components,
        certified,
        converged,
        early_stop: false,
        trace,
        e_star,
    })
}

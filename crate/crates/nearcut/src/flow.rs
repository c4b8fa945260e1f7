//! Inner level: the norm- and nonnegativity-constrained gradient flow at
//! fixed `ε`, discretized by a clipped Euler step, a feasibility projection
//! and step-size control by halving/doubling.

use crate::graph::{active_cut_set, EdgeSet, PatternMatrix, WeightedGraph};
use crate::objective::{evaluate, Evaluation, FunctionalKind};
use crate::{Error, Real, Result};

/// Smallest step size tried before the flow is declared stationary.
pub const H_MIN: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig<T> {
    pub h0: T,
    pub tol: T,
    /// Defaults to `10·tol`.
    pub beta: Option<T>,
    /// Defaults to `tol/100`.
    pub delta: Option<T>,
    pub max_steps: usize,
    /// Keep cut edges at zero for good once they get there.
    pub irreversible_cuts: bool,
    /// Defaults to [`WeightedGraph::default_tol_zero`].
    pub tol_zero: Option<T>,
    /// Upper limit for the step size when doubling; unlimited if `None`.
    pub h_max: Option<T>,
}

impl<T: Real> Default for FlowConfig<T> {
    fn default() -> Self {
        Self {
            h0: T::lit(0.1),
            tol: T::lit(1e-5),
            beta: None,
            delta: None,
            max_steps: 10_000,
            irreversible_cuts: true,
            tol_zero: None,
            h_max: None,
        }
    }
}

impl<T: Real> FlowConfig<T> {
    pub fn beta(&self) -> T {
        self.beta.unwrap_or(self.tol * T::lit(10.0))
    }

    pub fn delta(&self) -> T {
        self.delta.unwrap_or(self.tol / T::lit(100.0))
    }

    pub fn tol_zero(&self, g: &WeightedGraph<T>) -> T {
        self.tol_zero.unwrap_or_else(|| g.default_tol_zero())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h0 > T::zero()) || !(self.tol > T::zero()) {
            return Err(Error::InvalidParameter("h0 and tol must be positive".into()));
        }
        if self.h_max.is_some_and(|hm| !(hm >= self.h0)) {
            return Err(Error::InvalidParameter("h_max must be at least h0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState<T: Real> {
    pub e: PatternMatrix<T>,
    pub eps: T,
    pub eval: Evaluation<T>,
    pub h: T,
    pub active: EdgeSet,
    pub kappa: Option<T>,
    pub step_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow<T> {
    pub step: usize,
    pub f: T,
    pub h: T,
    pub active: usize,
    pub kappa: Option<T>,
    /// `‖E‖_F` of the accepted iterate.
    pub norm: T,
    /// `min (w + εe)` over the edges.
    pub min_weight: T,
    /// Whether the active set contains the previous one.
    pub active_grew: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `F ≤ tol`.
    Tolerance,
    /// The decrease fell below `β h F + δ`.
    Stalled,
    /// No step size down to [`H_MIN`] decreased `F`.
    Stationary,
    /// The entry state has no gradient (eigenvalue not simple).
    Degenerate,
    MaxSteps,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Tolerance => "tolerance",
            Self::Stalled => "stalled",
            Self::Stationary => "stationary",
            Self::Degenerate => "degenerate",
            Self::MaxSteps => "max_steps",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerResult<T: Real> {
    pub state: FlowState<T>,
    pub trace: Vec<TraceRow<T>>,
    pub stop: StopReason,
}

/// `κ = −⟨G, ΠE⟩ / ‖ΠE‖²` with `Π` the restriction to edges outside `active`.
pub fn kappa<T: Real>(e: &PatternMatrix<T>, grad: &PatternMatrix<T>, active: &EdgeSet) -> Result<T> {
    let pe = e.free_part(active);
    let nn = pe.norm_squared();
    if nn <= T::zero() {
        return Err(Error::NoFreeMass);
    }
    Ok(-grad.dot(&pe) / nn)
}

/// Distance of `ΠG` from the line through `ΠE`, and `‖ΠG‖`.
pub fn stationarity_residual<T: Real>(e: &PatternMatrix<T>, grad: &PatternMatrix<T>, active: &EdgeSet) -> (T, T) {
    let pg = grad.free_part(active);
    let pe = e.free_part(active);
    let nn = pe.norm_squared();
    let r = if nn > T::zero() { pg.add_scaled(-pg.dot(&pe) / nn, &pe) } else { pg.clone() };
    (r.norm(), pg.norm())
}

/// Clipped Euler step `E − hG`.
///
/// An entry whose free step would make `w + εẽ` negative is stopped exactly
/// at `−w/ε`. Active entries stay there, unless cuts are reversible and the
/// flow direction `−g − κe` points back into the feasible region.
pub fn euler_step<T: Real>(g: &WeightedGraph<T>, state: &FlowState<T>, h: T, irreversible: bool) -> Result<PatternMatrix<T>> {
    let grad = state.eval.gradient()?;
    let eps = state.eps;
    let kap = if irreversible { None } else { kappa(&state.e, grad, &state.active).ok() };
    let out = g
        .weights()
        .iter()
        .zip(state.e.values().iter().zip(grad.values()))
        .enumerate()
        .map(|(k, (&w, (&e, &gk)))| {
            let floor = -w / eps;
            if state.active.contains(k) {
                let release = kap.is_some_and(|kap| -gk - kap * e > T::zero());
                if !release {
                    return floor;
                }
            }
            let t = e - h * gk;
            if w + eps * t < T::zero() {
                floor
            } else {
                t
            }
        })
        .collect();
    Ok(PatternMatrix::from_values(out))
}

/// Maps `raw` to a unit-norm matrix with `W + εE ≥ 0`.
///
/// Alternates between rescaling the free part (keeping the active part fixed)
/// and resetting violating entries onto `−w/ε`, which makes them active. The
/// active set starts from the entries of `seed` still at zero plus any entry
/// of `raw` at zero. If the active part alone already has unit norm, it is
/// replaced by the corresponding part of `prev` once.
pub fn project_feasible<T: Real>(
    raw: &PatternMatrix<T>,
    g: &WeightedGraph<T>,
    eps: T,
    seed: &EdgeSet,
    prev: Option<&PatternMatrix<T>>,
    tol_zero: T,
) -> Result<(PatternMatrix<T>, EdgeSet)> {
    let m = g.edge_count();
    if raw.len() != m {
        return Err(Error::Dimension { expected: m, got: raw.len() });
    }
    let w = g.weights();
    let at_zero = |e: &PatternMatrix<T>, k: usize| (w[k] + eps * e.values()[k]).abs() <= tol_zero;
    let mut e = raw.clone();
    let mut active: EdgeSet = seed.iter().filter(|&k| k < m && at_zero(&e, k)).collect();
    active = active.union(&active_cut_set(g, &e, eps, tol_zero));
    let mut replaced = false;
    let limit = T::one() - T::rel_tol(1e-10);
    for _ in 0..=m + 1 {
        let n0 = e.active_part(&active).norm_squared();
        // Everything sits at zero already with unit norm: nothing to rescale.
        let free = e.free_part(&active).norm_squared();
        if free <= T::rel_tol(1e-10) && (n0 - T::one()).abs() <= T::rel_tol(1e-10) {
            return Ok((e, active));
        }
        if n0 >= limit {
            match prev {
                Some(p) if !replaced => {
                    replaced = true;
                    active = seed.clone();
                    for k in active.iter() {
                        e.values_mut()[k] = p.values()[k];
                    }
                    continue;
                }
                _ => return Err(Error::Breakdown),
            }
        }
        let nf = e.free_part(&active).norm();
        if !(nf > T::zero()) {
            return Err(Error::Breakdown);
        }
        let rho = (T::one() - n0).sqrt() / nf;
        let mut violated = false;
        for k in 0..m {
            if active.contains(k) {
                continue;
            }
            let v = &mut e.values_mut()[k];
            *v *= rho;
            if w[k] + eps * *v < T::zero() {
                *v = -w[k] / eps;
                active.insert(k);
                violated = true;
            }
        }
        if !violated {
            let active = active.union(&active_cut_set(g, &e, eps, tol_zero));
            return Ok((e, active));
        }
    }
    Err(Error::ProjectionRounds(m + 2))
}

pub enum StepOutcome<T: Real> {
    Accepted(FlowState<T>),
    Stationary,
}

fn candidate<T: Real>(
    g: &WeightedGraph<T>,
    state: &FlowState<T>,
    h: T,
    cfg: &FlowConfig<T>,
    evaluator: &dyn Fn(&PatternMatrix<T>) -> Result<Evaluation<T>>,
) -> Option<(PatternMatrix<T>, EdgeSet, Evaluation<T>)> {
    let raw = euler_step(g, state, h, cfg.irreversible_cuts).ok()?;
    let (e, active) = project_feasible(&raw, g, state.eps, &state.active, Some(&state.e), cfg.tol_zero(g)).ok()?;
    let eval = evaluator(&e).ok()?;
    let usable = eval.gradient.is_some() || eval.value <= cfg.tol;
    (usable && eval.value < state.eval.value).then_some((e, active, eval))
}

/// One accepted step with step-size control.
///
/// The step is halved until `F` decreases at the projected candidate. If the
/// incoming `h` works at once, `2h` is tried as well and kept when it is no
/// worse.
pub fn adapt_step<T: Real>(
    g: &WeightedGraph<T>,
    state: &FlowState<T>,
    cfg: &FlowConfig<T>,
    evaluator: &dyn Fn(&PatternMatrix<T>) -> Result<Evaluation<T>>,
) -> StepOutcome<T> {
    let h_min = T::lit(H_MIN);
    let mut h = state.h;
    let mut found = None;
    while h >= h_min {
        if let Some(c) = candidate(g, state, h, cfg, evaluator) {
            found = Some(c);
            break;
        }
        h *= T::lit(0.5);
    }
    let Some(mut best) = found else {
        return StepOutcome::Stationary;
    };
    if h == state.h && cfg.h_max.is_none_or(|hm| h + h <= hm) {
        let h2 = h + h;
        if let Some(c) = candidate(g, state, h2, cfg, evaluator) {
            if c.2.value <= best.2.value {
                best = c;
                h = h2;
            }
        }
    }
    let (e, active, eval) = best;
    let kappa = eval.gradient.as_ref().and_then(|gr| kappa(&e, gr, &active).ok());
    StepOutcome::Accepted(FlowState { e, eps: state.eps, eval, h, active, kappa, step_count: state.step_count + 1 })
}

/// Runs the flow from a feasible `e0` until `F ≤ tol`, the decrease stalls,
/// the step size underflows or `max_steps` is reached.
pub fn run_inner<T: Real>(
    g: &WeightedGraph<T>,
    eps: T,
    e0: &PatternMatrix<T>,
    kind: &FunctionalKind<T>,
    cfg: &FlowConfig<T>,
) -> Result<InnerResult<T>> {
    cfg.validate()?;
    let evaluator = |e: &PatternMatrix<T>| evaluate(kind, g, e, eps);
    let eval = evaluator(e0)?;
    let active = active_cut_set(g, e0, eps, cfg.tol_zero(g));
    let kap = eval.gradient.as_ref().and_then(|gr| kappa(e0, gr, &active).ok());
    let mut state = FlowState { e: e0.clone(), eps, eval, h: cfg.h0, active, kappa: kap, step_count: 0 };
    let row = |s: &FlowState<T>, prev: &EdgeSet| TraceRow {
        step: s.step_count,
        f: s.eval.value,
        h: s.h,
        active: s.active.len(),
        kappa: s.kappa,
        norm: s.e.norm(),
        min_weight: g.weights().iter().zip(s.e.values()).fold(T::max_value().unwrap_or(T::one()), |m, (&w, &v)| m.min(w + eps * v)),
        active_grew: prev.is_subset(&s.active),
    };
    let mut trace = vec![row(&state, &state.active)];
    let (beta, delta) = (cfg.beta(), cfg.delta());

    let stop = loop {
        if state.eval.value <= cfg.tol {
            break StopReason::Tolerance;
        }
        if state.eval.gradient.is_none() {
            break StopReason::Degenerate;
        }
        if state.step_count >= cfg.max_steps {
            break StopReason::MaxSteps;
        }
        let f_old = state.eval.value;
        let prev_active = state.active.clone();
        match adapt_step(g, &state, cfg, &evaluator) {
            StepOutcome::Stationary => break StopReason::Stationary,
            StepOutcome::Accepted(next) => state = next,
        }
        trace.push(row(&state, &prev_active));
        let f = state.eval.value;
        if f <= cfg.tol {
            break StopReason::Tolerance;
        }
        if f_old - f <= beta * state.h * f_old + delta {
            break StopReason::Stalled;
        }
    };
    Ok(InnerResult { state, trace, stop })
}

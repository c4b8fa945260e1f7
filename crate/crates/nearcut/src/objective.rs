//! Spectral functionals `F_ε(E)` of the perturbed Laplacian `Lap(W + εE)` and
//! their gradients on the edge pattern.
//!
//! Gradients are scaled so that `d/dt F_ε(E(t)) = ε ⟨G, Ė⟩` with the Frobenius
//! inner product of the mirrored matrices.

use nalgebra::{DMatrix, DVector};

use crate::graph::{laplacian, PatternMatrix, WeightedGraph};
use crate::spectral::{deflated, pseudo_solve, simplicity_guard, smallest_eigenpairs, SpectralSlice};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalKind<T> {
    /// λ₂ of the perturbed Laplacian.
    MinCut,
    /// λ₂ plus a penalty pulling `minus` and `plus` onto the two sign classes
    /// of the Fiedler vector.
    Membership { minus: Vec<usize>, plus: Vec<usize>, alpha: T },
    /// Like `Membership`, with the sets taken from the `nbar` smallest and
    /// largest Fiedler entries. `delta = None` uses `0.01·(max x − min x)`.
    Cardinality { nbar: usize, delta: Option<T>, alpha: T },
    /// Cardinality and membership penalties added together.
    Combined { minus: Vec<usize>, plus: Vec<usize>, nbar: usize, delta: Option<T>, alpha_c: T, alpha_m: T },
    /// λ₃ − λ₂.
    Ambiguity,
}

/// One penalty term of a constrained functional.
#[derive(Debug, Clone, PartialEq)]
enum Term<'a, T> {
    Fixed { minus: &'a [usize], plus: &'a [usize], alpha: T },
    Ranked { nbar: usize, delta: Option<T>, alpha: T },
}

impl<T: Real> FunctionalKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Self::MinCut => "mincut",
            Self::Membership { .. } => "membership",
            Self::Cardinality { .. } => "cardinality",
            Self::Combined { .. } => "combined",
            Self::Ambiguity => "ambiguity",
        }
    }

    /// Whether the functional targets a disconnection (everything except
    /// ambiguity).
    pub fn is_cut(&self) -> bool {
        !matches!(self, Self::Ambiguity)
    }

    /// Prescribed membership sets, if any.
    pub fn membership(&self) -> Option<(&[usize], &[usize])> {
        match self {
            Self::Membership { minus, plus, .. } | Self::Combined { minus, plus, .. } => Some((minus, plus)),
            _ => None,
        }
    }

    pub fn cardinality(&self) -> Option<usize> {
        match self {
            Self::Cardinality { nbar, .. } | Self::Combined { nbar, .. } => Some(*nbar),
            _ => None,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let positive = |a: T, what: &str| {
            if a > T::zero() && a.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{what} must be positive, got {a}")))
            }
        };
        let sets = |minus: &[usize], plus: &[usize]| {
            if minus.is_empty() || plus.is_empty() {
                return Err(Error::InvalidParameter("membership sets must be nonempty".into()));
            }
            if let Some(&v) = minus.iter().chain(plus).find(|&&v| v >= n) {
                return Err(Error::InvalidParameter(format!("vertex {v} out of range")));
            }
            if let Some(&v) = minus.iter().find(|v| plus.contains(v)) {
                return Err(Error::SetsOverlap(v));
            }
            Ok(())
        };
        let card = |nbar: usize, delta: Option<T>| {
            if nbar == 0 || 2 * nbar > n {
                return Err(Error::InvalidParameter(format!("need 1 <= nbar <= n/2, got {nbar}")));
            }
            if delta.is_some_and(|d| d < T::zero() || !d.is_finite()) {
                return Err(Error::InvalidParameter("delta must be nonnegative".into()));
            }
            Ok(())
        };
        match self {
            Self::MinCut | Self::Ambiguity => Ok(()),
            Self::Membership { minus, plus, alpha } => {
                positive(*alpha, "alpha")?;
                sets(minus, plus)
            }
            Self::Cardinality { nbar, delta, alpha } => {
                positive(*alpha, "alpha")?;
                card(*nbar, *delta)
            }
            Self::Combined { minus, plus, nbar, delta, alpha_c, alpha_m } => {
                positive(*alpha_c, "alpha_c")?;
                positive(*alpha_m, "alpha_m")?;
                sets(minus, plus)?;
                card(*nbar, *delta)
            }
        }
    }

    fn terms(&self) -> Vec<Term<'_, T>> {
        match self {
            Self::Membership { minus, plus, alpha } => vec![Term::Fixed { minus, plus, alpha: *alpha }],
            Self::Cardinality { nbar, delta, alpha } => vec![Term::Ranked { nbar: *nbar, delta: *delta, alpha: *alpha }],
            Self::Combined { minus, plus, nbar, delta, alpha_c, alpha_m } => vec![
                Term::Ranked { nbar: *nbar, delta: *delta, alpha: *alpha_c },
                Term::Fixed { minus, plus, alpha: *alpha_m },
            ],
            Self::MinCut | Self::Ambiguity => Vec::new(),
        }
    }
}

/// Per-term details of a penalty evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct TermAux<T: Real> {
    pub minus: Vec<usize>,
    pub plus: Vec<usize>,
    pub alpha: T,
    /// Mean of the negative entries of `x` and their count.
    pub mean_minus: T,
    pub n_minus: usize,
    /// Mean of the nonnegative entries of `x` and their count.
    pub mean_plus: T,
    pub n_plus: usize,
    /// Unweighted penalty `½Σ_{V⁻}(x_i − ⟨x⁻⟩)² + ½Σ_{V⁺}(x_i − ⟨x⁺⟩)²`.
    pub penalty: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PenaltyAux<T: Real> {
    pub terms: Vec<TermAux<T>>,
    /// Eigenvector with the sign that gave the smaller value.
    pub x: DVector<T>,
    /// `Σ α v` over the terms.
    pub v: DVector<T>,
    /// `(L − λ₂I)† v`, absent when λ₂ is not simple.
    pub z: Option<DVector<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T: Real> {
    pub value: T,
    /// `None` when the eigenvalues involved are not simple.
    pub gradient: Option<PatternMatrix<T>>,
    pub spectral: SpectralSlice<T>,
    pub aux: Option<PenaltyAux<T>>,
    /// The simplicity failure that withheld the gradient.
    pub degeneracy: Option<Error>,
}

impl<T: Real> Evaluation<T> {
    pub fn lambda2(&self) -> T {
        self.spectral.lambda(2)
    }

    pub fn gradient(&self) -> Result<&PatternMatrix<T>> {
        self.gradient.as_ref().ok_or_else(|| self.degeneracy.clone().unwrap_or(Error::Singular))
    }
}

struct Spectrum<T: Real> {
    l: DMatrix<T>,
    slice: SpectralSlice<T>,
}

fn spectrum<T: Real>(g: &WeightedGraph<T>, e: &PatternMatrix<T>, eps: T, k: usize) -> Result<Spectrum<T>> {
    let tol_feas = T::rel_tol(1e-10) * g.max_weight().max(T::one());
    let l = laplacian(g, Some(e), eps, tol_feas)?;
    let k = k.min(g.n()).max(2);
    if g.n() < 2 {
        return Err(Error::InvalidGraph("need at least two vertices".into()));
    }
    let slice = smallest_eigenpairs(&l, k)?;
    Ok(Spectrum { l, slice })
}

/// `½ (a_i − a_j)(b_i − b_j)` per edge.
fn edge_products<T: Real>(g: &WeightedGraph<T>, a: &DVector<T>, b: &DVector<T>) -> Vec<T> {
    let half = T::lit(0.5);
    g.edges().iter().map(|&(i, j)| half * (a[i] - a[j]) * (b[i] - b[j])).collect()
}

pub fn evaluate<T: Real>(kind: &FunctionalKind<T>, g: &WeightedGraph<T>, e: &PatternMatrix<T>, eps: T) -> Result<Evaluation<T>> {
    match kind {
        FunctionalKind::MinCut => evaluate_mincut(g, e, eps),
        FunctionalKind::Ambiguity => evaluate_ambiguity(g, e, eps),
        _ => evaluate_penalized(g, e, eps, &kind.terms()),
    }
}

/// λ₂ with gradient `P_ℰ(sym(x²1ᵀ) − xxᵀ)`, i.e. `½(x_i − x_j)²` per edge.
pub fn evaluate_mincut<T: Real>(g: &WeightedGraph<T>, e: &PatternMatrix<T>, eps: T) -> Result<Evaluation<T>> {
    let s = spectrum(g, e, eps, 3)?;
    let value = s.slice.lambda(2).max(T::zero());
    let (gradient, degeneracy) = match s.slice.check_simple(2) {
        Ok(()) => {
            let x = s.slice.vector(2);
            (Some(PatternMatrix::from_values(edge_products(g, x, x))), None)
        }
        Err(err) => (None, Some(err)),
    };
    Ok(Evaluation { value, gradient, spectral: s.slice, aux: None, degeneracy })
}

pub fn evaluate_membership<T: Real>(
    g: &WeightedGraph<T>,
    e: &PatternMatrix<T>,
    eps: T,
    minus: &[usize],
    plus: &[usize],
    alpha: T,
) -> Result<Evaluation<T>> {
    evaluate_penalized(g, e, eps, &[Term::Fixed { minus, plus, alpha }])
}

pub fn evaluate_cardinality<T: Real>(
    g: &WeightedGraph<T>,
    e: &PatternMatrix<T>,
    eps: T,
    nbar: usize,
    delta: Option<T>,
    alpha: T,
) -> Result<Evaluation<T>> {
    if nbar == 0 || 2 * nbar > g.n() {
        return Err(Error::InvalidParameter(format!("need 1 <= nbar <= n/2, got {nbar}")));
    }
    evaluate_penalized(g, e, eps, &[Term::Ranked { nbar, delta, alpha }])
}

/// λ₃ − λ₂ with gradient `−½[(x_i − x_j)² − (y_i − y_j)²]` per edge.
///
/// At coalescence (gap below the guard) the value is reported as zero and the
/// gradient is withheld.
pub fn evaluate_ambiguity<T: Real>(g: &WeightedGraph<T>, e: &PatternMatrix<T>, eps: T) -> Result<Evaluation<T>> {
    if g.n() < 3 {
        return Err(Error::InvalidParameter("ambiguity needs at least three vertices".into()));
    }
    let s = spectrum(g, e, eps, 4)?;
    let (l2, l3) = (s.slice.lambda(2), s.slice.lambda(3));
    let gap = (l3 - l2).max(T::zero());
    if gap < simplicity_guard(l3) {
        let err = Error::Degenerate { gap: gap.as_f64(), guard: simplicity_guard(l3).as_f64() };
        return Ok(Evaluation { value: T::zero(), gradient: None, spectral: s.slice, aux: None, degeneracy: Some(err) });
    }
    let (gradient, degeneracy) = match s.slice.check_simple(3) {
        Ok(()) => {
            let (x, y) = (s.slice.vector(2), s.slice.vector(3));
            let gx = edge_products(g, x, x);
            let gy = edge_products(g, y, y);
            (Some(PatternMatrix::from_values(gx.iter().zip(gy).map(|(&a, b)| b - a).collect())), None)
        }
        Err(err) => (None, Some(err)),
    };
    Ok(Evaluation { value: gap, gradient, spectral: s.slice, aux: None, degeneracy })
}

/// Sets of the `nbar` smallest and largest entries of `x`, each widened by the
/// entries within `delta` of its mean. Ties go to the lower vertex index.
pub fn cardinality_sets<T: Real>(x: &DVector<T>, nbar: usize, delta: Option<T>) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = x.len();
    let cmp = |a: &usize, b: &usize| x[*a].partial_cmp(&x[*b]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(b));
    let mut asc: Vec<usize> = (0..n).collect();
    asc.sort_by(cmp);
    let mut desc: Vec<usize> = (0..n).collect();
    desc.sort_by(|a, b| cmp(b, a).then(a.cmp(b)));
    let lo = &asc[..nbar];
    let hi = &desc[..nbar];
    let (xmin, xmax) = (x.min(), x.max());
    let delta = delta.unwrap_or_else(|| T::lit(0.01) * (xmax - xmin));
    let count = T::from_usize(nbar).unwrap();
    let widen = |base: &[usize]| {
        let mean = base.iter().fold(T::zero(), |s, &i| s + x[i]) / count;
        let mut set: Vec<usize> = (0..n).filter(|&i| base.contains(&i) || (x[i] - mean).abs() <= delta).collect();
        set.sort_unstable();
        set
    };
    let (minus, plus) = (widen(lo), widen(hi));
    if let Some(&v) = minus.iter().find(|v| plus.contains(v)) {
        return Err(Error::SetsOverlap(v));
    }
    Ok((minus, plus))
}

struct SignedPenalty<T: Real> {
    value: T,
    x: DVector<T>,
    v: DVector<T>,
    terms: Vec<TermAux<T>>,
}

fn term_penalty<T: Real>(x: &DVector<T>, minus: &[usize], plus: &[usize], alpha: T) -> Result<(TermAux<T>, DVector<T>)> {
    let n = x.len();
    let neg: Vec<bool> = x.iter().map(|&v| v < T::zero()).collect();
    let n_minus = neg.iter().filter(|&&b| b).count();
    let n_plus = n - n_minus;
    if n_minus == 0 || n_plus == 0 {
        return Err(Error::OneSigned);
    }
    let (mut sm, mut sp) = (T::zero(), T::zero());
    for i in 0..n {
        if neg[i] {
            sm += x[i];
        } else {
            sp += x[i];
        }
    }
    let cm = T::from_usize(n_minus).unwrap();
    let cp = T::from_usize(n_plus).unwrap();
    let (mean_minus, mean_plus) = (sm / cm, sp / cp);
    let mut penalty = T::zero();
    let mut v = DVector::zeros(n);
    for (set, mean, side, count) in [(minus, mean_minus, true, cm), (plus, mean_plus, false, cp)] {
        for &i in set {
            let d = x[i] - mean;
            penalty += d * d;
            v[i] -= d;
            for j in 0..n {
                if neg[j] == side {
                    v[j] += d / count;
                }
            }
        }
    }
    let aux = TermAux {
        minus: minus.to_vec(),
        plus: plus.to_vec(),
        alpha,
        mean_minus,
        n_minus,
        mean_plus,
        n_plus,
        penalty: penalty * T::lit(0.5),
    };
    Ok((aux, v))
}

fn signed_penalty<T: Real>(x: DVector<T>, lambda: T, terms: &[Term<'_, T>]) -> Result<SignedPenalty<T>> {
    let mut value = lambda;
    let mut vtot = DVector::zeros(x.len());
    let mut aux = Vec::with_capacity(terms.len());
    for term in terms {
        let (minus, plus, alpha) = match term {
            Term::Fixed { minus, plus, alpha } => (minus.to_vec(), plus.to_vec(), *alpha),
            Term::Ranked { nbar, delta, alpha } => {
                let (m, p) = cardinality_sets(&x, *nbar, *delta)?;
                (m, p, *alpha)
            }
        };
        let (t, v) = term_penalty(&x, &minus, &plus, alpha)?;
        value += alpha * t.penalty;
        vtot.axpy(alpha, &v, T::one());
        aux.push(t);
    }
    Ok(SignedPenalty { value, x, v: vtot, terms: aux })
}

/// λ₂ plus the summed penalties; one bordered solve for the combined `v`.
///
/// Both signs of the Fiedler vector are tried and the smaller value is kept.
/// The gradient per edge is `½[(x_i − x_j)² + (x_i − x_j)(z_i − z_j)]` with
/// `z = (L − λ₂I)† Σ α v`.
fn evaluate_penalized<T: Real>(g: &WeightedGraph<T>, e: &PatternMatrix<T>, eps: T, terms: &[Term<'_, T>]) -> Result<Evaluation<T>> {
    let s = spectrum(g, e, eps, 3)?;
    let lambda = s.slice.lambda(2).max(T::zero());
    let x = s.slice.vector(2).clone();
    let pos = signed_penalty(x.clone(), lambda, terms);
    let neg = signed_penalty(-x, lambda, terms);
    let best = match (pos, neg) {
        (Ok(a), Ok(b)) => {
            if b.value < a.value {
                b
            } else {
                a
            }
        }
        (Ok(a), Err(_)) => a,
        (Err(_), Ok(b)) => b,
        (Err(err), Err(_)) => return Err(err),
    };

    let mut aux = PenaltyAux { terms: best.terms, x: best.x, v: best.v, z: None };
    let (gradient, degeneracy) = match s.slice.check_simple(2) {
        Ok(()) => {
            let z = pseudo_solve(&deflated(&s.l), s.slice.lambda(2), &aux.x, &aux.v)?;
            let xx = edge_products(g, &aux.x, &aux.x);
            let xz = edge_products(g, &aux.x, &z);
            aux.z = Some(z);
            (Some(PatternMatrix::from_values(xx.iter().zip(xz).map(|(&a, b)| a + b).collect())), None)
        }
        Err(err) => (None, Some(err)),
    };
    Ok(Evaluation { value: best.value, gradient, spectral: s.slice, aux: Some(aux), degeneracy })
}

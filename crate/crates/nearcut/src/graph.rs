//! Weighted undirected graphs, pattern-supported symmetric matrices and the
//! Laplacian.
//!
//! Edges are stored once as `(i, j)` with `i < j`, sorted. A [`PatternMatrix`]
//! holds one value per stored edge and stands for the symmetric `n × n` matrix
//! that mirrors it, so its Frobenius quantities count every value twice.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::{Error, Real, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph<T> {
    n: usize,
    edges: Vec<(usize, usize)>,
    weights: Vec<T>,
    index: HashMap<(usize, usize), usize>,
}

impl<T: Real> WeightedGraph<T> {
    /// Builds a graph from `(i, j, w)` triples with 0-based ids in any
    /// orientation.
    pub fn new(n: usize, triples: impl IntoIterator<Item = (usize, usize, T)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        let mut list = Vec::new();
        for (a, b, w) in triples {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range for n = {n}")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if !w.is_finite() || w < T::zero() {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) has weight {w}")));
            }
            list.push(((a.min(b), a.max(b)), w));
        }
        list.sort_by(|x, y| x.0.cmp(&y.0));
        for pair in list.windows(2) {
            if pair[0].0 == pair[1].0 {
                let (i, j) = pair[0].0;
                return Err(Error::InvalidGraph(format!("duplicate edge ({i}, {j})")));
            }
        }
        let edges: Vec<_> = list.iter().map(|e| e.0).collect();
        let weights = list.iter().map(|e| e.1).collect();
        let index = edges.iter().enumerate().map(|(k, &e)| (e, k)).collect();
        Ok(Self { n, edges, weights, index })
    }

    /// Same pattern, new weights (one per stored edge).
    pub fn with_weights(&self, weights: Vec<T>) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::Dimension { expected: self.edges.len(), got: weights.len() });
        }
        Self::new(self.n, self.edges.iter().zip(weights).map(|(&(i, j), w)| (i, j, w)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.index.get(&(i.min(j), i.max(j))).copied()
    }

    pub fn max_weight(&self) -> T {
        self.weights.iter().fold(T::zero(), |m, &w| m.max(w))
    }

    /// `‖W‖_F` of the full symmetric matrix.
    pub fn frobenius_norm(&self) -> T {
        PatternMatrix::from_values(self.weights.clone()).norm()
    }

    /// The dense symmetric weight matrix.
    pub fn weight_matrix(&self) -> DMatrix<T> {
        let mut w = DMatrix::zeros(self.n, self.n);
        for (&(i, j), &v) in self.edges.iter().zip(&self.weights) {
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
        w
    }

    /// Default threshold for treating a perturbed weight as zero.
    pub fn default_tol_zero(&self) -> T {
        let rel = T::lit(1e-12).max(T::machine_eps() * T::lit(16.0));
        let mw = self.max_weight();
        if mw > T::zero() { rel * mw } else { rel }
    }

    pub fn is_connected(&self) -> bool {
        component_count(&connected_components(self, T::zero())) == 1
    }
}

/// Sorted set of edge indices into a parent graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeSet {
    idx: Vec<usize>,
}

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.idx.binary_search(&k).is_ok()
    }

    pub fn insert(&mut self, k: usize) -> bool {
        match self.idx.binary_search(&k) {
            Ok(_) => false,
            Err(pos) => {
                self.idx.insert(pos, k);
                true
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.idx.iter().copied()
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        self.iter().chain(other.iter()).collect()
    }

    /// Edges of `0..m` not in the set.
    pub fn complement(&self, m: usize) -> EdgeSet {
        (0..m).filter(|&k| !self.contains(k)).collect()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.iter().all(|k| other.contains(k))
    }

    /// Boolean membership mask over `0..m`.
    pub fn mask(&self, m: usize) -> Vec<bool> {
        let mut out = vec![false; m];
        for k in self.iter().filter(|&k| k < m) {
            out[k] = true;
        }
        out
    }
}

impl FromIterator<usize> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut idx: Vec<usize> = iter.into_iter().collect();
        idx.sort_unstable();
        idx.dedup();
        Self { idx }
    }
}

/// Symmetric matrix supported on an edge pattern, one value per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternMatrix<T> {
    values: Vec<T>,
}

impl<T: Real> PatternMatrix<T> {
    pub fn zeros(m: usize) -> Self {
        Self { values: vec![T::zero(); m] }
    }

    pub fn from_values(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Frobenius inner product of the mirrored matrices.
    pub fn dot(&self, other: &Self) -> T {
        let s = self.values.iter().zip(&other.values).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        s + s
    }

    pub fn norm_squared(&self) -> T {
        self.dot(self)
    }

    pub fn norm(&self) -> T {
        self.norm_squared().sqrt()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { values: self.values.iter().map(|&v| v * c).collect() }
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: T, other: &Self) -> Self {
        Self { values: self.values.iter().zip(&other.values).map(|(&a, &b)| a + c * b).collect() }
    }

    /// Keeps the entries whose mask bit is set, zeroing the rest.
    pub fn masked(&self, mask: &[bool]) -> Self {
        Self {
            values: self.values.iter().zip(mask).map(|(&v, &keep)| if keep { v } else { T::zero() }).collect(),
        }
    }

    /// Restriction to the edges outside `active`.
    pub fn free_part(&self, active: &EdgeSet) -> Self {
        let mut out = self.clone();
        for k in active.iter() {
            out.values[k] = T::zero();
        }
        out
    }

    /// Restriction to the edges in `active`.
    pub fn active_part(&self, active: &EdgeSet) -> Self {
        let mut out = Self::zeros(self.len());
        for k in active.iter() {
            out.values[k] = self.values[k];
        }
        out
    }

    pub fn to_dense(&self, g: &WeightedGraph<T>) -> DMatrix<T> {
        let mut a = DMatrix::zeros(g.n(), g.n());
        for (&(i, j), &v) in g.edges().iter().zip(&self.values) {
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
        a
    }
}

fn check_pattern<T: Real>(g: &WeightedGraph<T>, e: &PatternMatrix<T>) -> Result<()> {
    if e.len() != g.edge_count() {
        return Err(Error::Dimension { expected: g.edge_count(), got: e.len() });
    }
    Ok(())
}

/// `w + ε e` per edge, without clamping.
pub fn perturbed_weights<T: Real>(g: &WeightedGraph<T>, e: &PatternMatrix<T>, eps: T) -> Result<Vec<T>> {
    check_pattern(g, e)?;
    Ok(g.weights().iter().zip(e.values()).map(|(&w, &v)| w + eps * v).collect())
}

/// Laplacian of `W + εE` (or of `W` when `e` is `None`).
///
/// Perturbed weights in `[-tol_feas, 0)` are clamped to zero; anything lower
/// is rejected. The diagonal is the negated sum of the assembled off-diagonal
/// row, so `L·1` vanishes up to rounding in that sum.
pub fn laplacian<T: Real>(
    g: &WeightedGraph<T>,
    e: Option<&PatternMatrix<T>>,
    eps: T,
    tol_feas: T,
) -> Result<DMatrix<T>> {
    let w = match e {
        Some(e) => perturbed_weights(g, e, eps)?,
        None => g.weights().to_vec(),
    };
    laplacian_from_weights(g, &w, tol_feas)
}

pub(crate) fn laplacian_from_weights<T: Real>(g: &WeightedGraph<T>, w: &[T], tol_feas: T) -> Result<DMatrix<T>> {
    let n = g.n();
    let mut l = DMatrix::zeros(n, n);
    for (&(i, j), &v) in g.edges().iter().zip(w) {
        if v < -tol_feas {
            return Err(Error::Infeasible { i, j, value: v.as_f64() });
        }
        let v = v.max(T::zero());
        l[(i, j)] -= v;
        l[(j, i)] -= v;
    }
    for i in 0..n {
        let mut s = T::zero();
        for j in 0..n {
            if j != i {
                s += l[(i, j)];
            }
        }
        l[(i, i)] = -s;
    }
    Ok(l)
}

/// Orthogonal projection of a dense matrix onto symmetric matrices supported
/// on the edge pattern.
pub fn project_pattern<T: Real>(a: &DMatrix<T>, g: &WeightedGraph<T>) -> Result<PatternMatrix<T>> {
    if a.nrows() != g.n() || a.ncols() != g.n() {
        return Err(Error::Dimension { expected: g.n(), got: a.nrows().max(a.ncols()) });
    }
    let half = T::lit(0.5);
    Ok(PatternMatrix::from_values(g.edges().iter().map(|&(i, j)| (a[(i, j)] + a[(j, i)]) * half).collect()))
}

/// Edges whose perturbed weight is within `tol_zero` of zero.
pub fn active_cut_set<T: Real>(g: &WeightedGraph<T>, e: &PatternMatrix<T>, eps: T, tol_zero: T) -> EdgeSet {
    g.weights()
        .iter()
        .zip(e.values())
        .enumerate()
        .filter(|(_, (&w, &v))| (w + eps * v).abs() <= tol_zero)
        .map(|(k, _)| k)
        .collect()
}

/// Component labels (numbered in order of first vertex) of the subgraph of
/// edges with weight above `weight_floor`.
pub fn connected_components<T: Real>(g: &WeightedGraph<T>, weight_floor: T) -> Vec<usize> {
    components_from_edges(
        g.n(),
        g.edges().iter().zip(g.weights()).filter(|(_, &w)| w > weight_floor).map(|(&e, _)| e),
    )
}

/// Component labels of the graph on `n` vertices with the given edges.
pub fn components_from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut out = vec![0; n];
    let mut next = 0;
    for v in 0..n {
        let r = find(&mut parent, v);
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        out[v] = label[r];
    }
    out
}

pub fn component_count(labels: &[usize]) -> usize {
    labels.iter().max().map_or(0, |&m| m + 1)
}

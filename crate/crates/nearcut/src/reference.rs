//! Baselines, exact oracles and graph generators.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{component_count, connected_components, laplacian, EdgeSet, WeightedGraph};
use crate::spectral::smallest_eigenpairs;
use crate::{Error, Real, Result};

/// Largest vertex count accepted by [`brute_force_mincut`].
pub const BRUTE_FORCE_MAX_N: usize = 22;

/// A two-way vertex split with its crossing edges and `Σ w²` over them.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<T> {
    pub labels: Vec<u8>,
    pub cut_edges: EdgeSet,
    pub cost: T,
}

impl<T: Real> Partition<T> {
    /// Builds the partition for 0/1 labels; both classes must be nonempty.
    /// Labels are flipped if needed so that vertex 0 is in class 0.
    pub fn from_labels(g: &WeightedGraph<T>, labels: &[u8]) -> Result<Self> {
        if labels.len() != g.n() {
            return Err(Error::Dimension { expected: g.n(), got: labels.len() });
        }
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::InvalidParameter("labels must be 0 or 1".into()));
        }
        let ones = labels.iter().filter(|&&l| l == 1).count();
        if ones == 0 || ones == labels.len() {
            return Err(Error::InvalidParameter("both classes must be nonempty".into()));
        }
        let flip = labels[0];
        let labels: Vec<u8> = labels.iter().map(|&l| l ^ flip).collect();
        let cut_edges: EdgeSet =
            g.edges().iter().enumerate().filter(|(_, &(i, j))| labels[i] != labels[j]).map(|(k, _)| k).collect();
        let cost = cut_cost(g, &cut_edges);
        Ok(Self { labels, cut_edges, cost })
    }

    /// Sizes of class 0 and class 1.
    pub fn sizes(&self) -> (usize, usize) {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        (self.labels.len() - ones, ones)
    }

    /// Vertices in class `c`.
    pub fn class(&self, c: u8) -> Vec<usize> {
        (0..self.labels.len()).filter(|&v| self.labels[v] == c).collect()
    }
}

/// `Σ w²` over the given edges, summed in edge order.
pub fn cut_cost<T: Real>(g: &WeightedGraph<T>, edges: &EdgeSet) -> T {
    edges.iter().fold(T::zero(), |acc, k| {
        let w = g.weights()[k];
        acc + w * w
    })
}

/// Split by the sign of the Fiedler vector; zero entries join the
/// nonnegative class.
pub fn fiedler_partition<T: Real>(g: &WeightedGraph<T>) -> Result<Partition<T>> {
    let l = laplacian(g, None, T::zero(), T::zero())?;
    let s = smallest_eigenpairs(&l, 3.min(g.n()))?;
    s.check_simple(2)?;
    let labels: Vec<u8> = s.vector(2).iter().map(|&x| u8::from(x >= T::zero())).collect();
    Partition::from_labels(g, &labels)
}

/// Exact Frobenius min-cut by enumerating all bipartitions.
///
/// Ties go to the lexicographically smallest label vector with vertex 0 in
/// class 0.
pub fn brute_force_mincut<T: Real>(g: &WeightedGraph<T>) -> Result<Partition<T>> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::TooLarge(n));
    }
    if n < 2 {
        return Err(Error::InvalidGraph("need at least two vertices".into()));
    }
    let sq: Vec<T> = g.weights().iter().map(|&w| w * w).collect();
    let mut best: Option<(T, u32)> = None;
    let mut labels = vec![0u8; n];
    // Vertex i (i ≥ 1) reads bit n-1-i, so increasing masks are increasing
    // label vectors in lexicographic order.
    for mask in 1u32..(1u32 << (n - 1)) {
        for (i, l) in labels.iter_mut().enumerate().skip(1) {
            *l = ((mask >> (n - 1 - i)) & 1) as u8;
        }
        let cost = g
            .edges()
            .iter()
            .zip(&sq)
            .filter(|(&(i, j), _)| labels[i] != labels[j])
            .fold(T::zero(), |acc, (_, &s)| acc + s);
        if best.is_none_or(|(c, _)| cost < c) {
            best = Some((cost, mask));
        }
    }
    let (_, mask) = best.expect("n >= 2 gives at least one split");
    for (i, l) in labels.iter_mut().enumerate().skip(1) {
        *l = ((mask >> (n - 1 - i)) & 1) as u8;
    }
    Partition::from_labels(g, &labels)
}

/// Global minimum cut of the graph with squared weights (Stoer–Wagner).
///
/// A disconnected input yields a zero-cost split along its components.
pub fn stoer_wagner_sq<T: Real>(g: &WeightedGraph<T>) -> Result<Partition<T>> {
    let n = g.n();
    if n < 2 {
        return Err(Error::InvalidGraph("need at least two vertices".into()));
    }
    let comps = connected_components(g, T::zero());
    if component_count(&comps) > 1 {
        let labels: Vec<u8> = comps.iter().map(|&c| u8::from(c != 0)).collect();
        return Partition::from_labels(g, &labels);
    }
    let mut w = DMatrix::<T>::zeros(n, n);
    for (&(i, j), &v) in g.edges().iter().zip(g.weights()) {
        w[(i, j)] = v * v;
        w[(j, i)] = v * v;
    }
    let mut groups: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    let mut alive: Vec<usize> = (0..n).collect();
    let mut best: Option<(T, Vec<usize>)> = None;
    while alive.len() > 1 {
        let mut added = vec![false; n];
        let mut conn = vec![T::zero(); n];
        let (mut prev, mut last) = (alive[0], alive[0]);
        for step in 0..alive.len() {
            let next = alive
                .iter()
                .copied()
                .filter(|&v| !added[v])
                .fold(None, |acc: Option<usize>, v| match acc {
                    Some(u) if conn[u] >= conn[v] => Some(u),
                    _ => Some(v),
                })
                .expect("unvisited vertex remains");
            if step + 1 == alive.len() && best.as_ref().is_none_or(|(c, _)| conn[next] < *c) {
                best = Some((conn[next], groups[next].clone()));
            }
            added[next] = true;
            for &v in &alive {
                if !added[v] {
                    conn[v] += w[(next, v)];
                }
            }
            prev = last;
            last = next;
        }
        // Merge the last vertex of the phase into the one before it.
        let moved = std::mem::take(&mut groups[last]);
        groups[prev].extend(moved);
        for &v in &alive {
            if v != prev && v != last {
                let s = w[(prev, v)] + w[(last, v)];
                w[(prev, v)] = s;
                w[(v, prev)] = s;
            }
        }
        alive.retain(|&v| v != last);
    }
    let (_, side) = best.expect("at least one phase ran");
    let mut labels = vec![0u8; n];
    for v in side {
        labels[v] = 1;
    }
    Partition::from_labels(g, &labels)
}

/// The ladder-like graph on which the flow finds a wrong local minimum for
/// larger `n`: vertex 1 hangs off vertex 2, and every vertex from 2 on is
/// joined to its next two successors. Ids here are 0-based.
pub fn ladder_graph<T: Real>(n: usize) -> Result<WeightedGraph<T>> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("ladder needs n >= 4, got {n}")));
    }
    let mut edges = vec![(0, 1, T::one())];
    for i in 1..n - 1 {
        edges.push((i, i + 1, T::one()));
        if i + 2 < n {
            edges.push((i, i + 2, T::one()));
        }
    }
    WeightedGraph::new(n, edges)
}

/// Unweighted planted-partition graph with `n_blocks` blocks of
/// `block_size` vertices. Redrawn until connected when `p_out > 0`.
pub fn planted_partition<T: Real>(n_blocks: usize, block_size: usize, p_in: f64, p_out: f64, seed: u64) -> Result<WeightedGraph<T>> {
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) {
        return Err(Error::InvalidParameter("probabilities must lie in [0, 1]".into()));
    }
    let n = n_blocks * block_size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let p = if i / block_size == j / block_size { p_in } else { p_out };
                if rng.random::<f64>() < p {
                    edges.push((i, j, T::one()));
                }
            }
        }
        let g = WeightedGraph::new(n, edges)?;
        if p_out == 0.0 || g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::Disconnected)
}

/// How edge weights of random test graphs are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightLaw {
    /// Integers uniform in `lo..=hi`.
    Integer(u32, u32),
    /// Reals uniform in `[lo, hi)`.
    Uniform(f64, f64),
}

/// Random connected graph: each pair is an edge with probability `density`;
/// redrawn until connected.
pub fn random_connected<T: Real, R: Rng>(n: usize, density: f64, law: WeightLaw, rng: &mut R) -> Result<WeightedGraph<T>> {
    if n < 2 || !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidParameter("need n >= 2 and density in (0, 1]".into()));
    }
    loop {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < density {
                    let w = match law {
                        WeightLaw::Integer(lo, hi) => f64::from(rng.random_range(lo..=hi)),
                        WeightLaw::Uniform(lo, hi) => rng.random_range(lo..hi),
                    };
                    edges.push((i, j, T::lit(w)));
                }
            }
        }
        let g = WeightedGraph::new(n, edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
}

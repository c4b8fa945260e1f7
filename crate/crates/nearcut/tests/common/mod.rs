#![allow(dead_code)]

use nearcut::graph::{PatternMatrix, WeightedGraph};
use nearcut::objective::{evaluate, FunctionalKind};
use nearcut::reference::{random_connected, WeightLaw};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Connected graph with n in 5..=12, density in [0.3, 0.7], weights U(0.5, 2).
pub fn random_graph(r: &mut ChaCha8Rng) -> WeightedGraph<f64> {
    let n = r.random_range(5..=12);
    let d = r.random_range(0.3..0.7);
    random_connected(n, d, WeightLaw::Uniform(0.5, 2.0), r).unwrap()
}

pub fn random_pattern(m: usize, r: &mut ChaCha8Rng) -> PatternMatrix<f64> {
    let p = PatternMatrix::from_values((0..m).map(|_| r.random_range(-1.0..1.0)).collect());
    p.scaled(1.0 / p.norm())
}

/// Relative mismatch between `ε⟨G, D⟩` and a central difference of `F_ε`
/// along `D` with step `t`.
pub fn fd_mismatch(
    kind: &FunctionalKind<f64>,
    g: &WeightedGraph<f64>,
    e: &PatternMatrix<f64>,
    eps: f64,
    d: &PatternMatrix<f64>,
    t: f64,
) -> f64 {
    let ev = evaluate(kind, g, e, eps).unwrap();
    let analytic = eps * ev.gradient().unwrap().dot(d);
    let fp = evaluate(kind, g, &e.add_scaled(t, d), eps).unwrap().value;
    let fm = evaluate(kind, g, &e.add_scaled(-t, d), eps).unwrap().value;
    let fd = (fp - fm) / (2.0 * t);
    (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-8)
}

/// Dense Laplacian of `W + εE` built straight from the edge list.
pub fn dense_laplacian(g: &WeightedGraph<f64>, e: &PatternMatrix<f64>, eps: f64) -> Vec<Vec<f64>> {
    let n = g.n();
    let mut l = vec![vec![0.0; n]; n];
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        let w = (g.weights()[k] + eps * e.values()[k]).max(0.0);
        l[i][j] -= w;
        l[j][i] -= w;
        l[i][i] += w;
        l[j][j] += w;
    }
    l
}

/// Cyclic Jacobi eigensolver. Returns ascending eigenvalues and the matching
/// eigenvectors as columns `v[.][k]`.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x][x].partial_cmp(&a[y][y]).unwrap());
    let vals = order.iter().map(|&k| a[k][k]).collect();
    let vecs = (0..n).map(|i| order.iter().map(|&k| v[i][k]).collect()).collect();
    (vals, vecs)
}

pub fn column(v: &[Vec<f64>], k: usize) -> Vec<f64> {
    v.iter().map(|row| row[k]).collect()
}

/// Connected graph with n in 4..=12, density in [0.3, 0.7] and integer
/// weights 1..=5, so that cut costs are exact.
pub fn integer_graph(r: &mut ChaCha8Rng) -> WeightedGraph<f64> {
    let n = r.random_range(4..=12);
    let d = r.random_range(0.3..0.7);
    random_connected(n, d, WeightLaw::Integer(1, 5), r).unwrap()
}

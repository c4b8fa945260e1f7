//! Smallest Laplacian eigenpairs and the bordered solve for `(L − λI)† v`.
//!
//! Eigenpairs are computed densely on the deflated matrix `L + s·11ᵀ/n`, where
//! the shift `s` exceeds the spectral radius. That pushes the known kernel
//! vector `1` to the top of the spectrum, so the returned λ₂, λ₃, … come with
//! eigenvectors orthogonal to `1` even when the graph is disconnected.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Real, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPair<T: Real> {
    pub value: T,
    pub vector: DVector<T>,
    /// 1-based position in the ascending spectrum.
    pub index: usize,
}

/// The `k` smallest eigenpairs of one Laplacian, `pairs[0]` being λ₁.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSlice<T: Real> {
    pub pairs: Vec<SpectralPair<T>>,
}

impl<T: Real> SpectralSlice<T> {
    /// Eigenvalue λ_k with 1-based `k`.
    pub fn lambda(&self, k: usize) -> T {
        self.pairs[k - 1].value
    }

    pub fn vector(&self, k: usize) -> &DVector<T> {
        &self.pairs[k - 1].vector
    }

    /// λ₃ − λ₂, if λ₃ was computed.
    pub fn gap(&self) -> Option<T> {
        (self.pairs.len() >= 3).then(|| self.lambda(3) - self.lambda(2))
    }

    /// Fails when λ_{k+1} − λ_k falls below the simplicity guard.
    pub fn check_simple(&self, k: usize) -> Result<()> {
        if self.pairs.len() <= k {
            return Ok(());
        }
        let (lo, hi) = (self.lambda(k), self.lambda(k + 1));
        let guard = simplicity_guard(hi);
        if hi - lo < guard {
            return Err(Error::Degenerate { gap: (hi - lo).as_f64(), guard: guard.as_f64() });
        }
        Ok(())
    }
}

/// Gap below which two neighbouring eigenvalues count as coalesced.
pub fn simplicity_guard<T: Real>(upper: T) -> T {
    T::rel_tol(1e-8) * T::one().max(upper)
}

/// Shift used for deflating the constant vector.
fn kernel_shift<T: Real>(l: &DMatrix<T>) -> T {
    let s = l.iter().fold(T::zero(), |acc, &v| acc + v.abs());
    s + s + T::one()
}

/// `L + s·11ᵀ/n` with `s` above the spectral radius of `L`.
pub fn deflated<T: Real>(l: &DMatrix<T>) -> DMatrix<T> {
    let n = l.nrows();
    let add = kernel_shift(l) / T::from_usize(n).unwrap();
    l.map(|v| v + add)
}

/// Flips `x` so that its first entry with magnitude above `1e-10` is positive.
pub fn canonical_sign<T: Real>(x: &mut DVector<T>) {
    let thr = T::lit(1e-10);
    if let Some(&first) = x.iter().find(|v| v.abs() > thr) {
        if first < T::zero() {
            x.neg_mut();
        }
    }
}

fn check_symmetric<T: Real>(l: &DMatrix<T>) -> Result<T> {
    if l.nrows() != l.ncols() {
        return Err(Error::Dimension { expected: l.nrows(), got: l.ncols() });
    }
    let norm = l.norm();
    let asym = (l - l.transpose()).amax();
    if asym > T::rel_tol(1e-12) * norm {
        return Err(Error::Asymmetric(asym.as_f64()));
    }
    Ok(norm)
}

/// The `k` smallest eigenpairs of a Laplacian, `2 ≤ k ≤ n`.
///
/// λ₁ is reported with the normalized constant vector; the rest come from the
/// deflated matrix and are orthogonal to it.
pub fn smallest_eigenpairs<T: Real>(l: &DMatrix<T>, k: usize) -> Result<SpectralSlice<T>> {
    let norm = check_symmetric(l)?;
    let n = l.nrows();
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!("need 2 <= k <= n, got k = {k}, n = {n}")));
    }
    let shifted = deflated(l);
    let eig = SymmetricEigen::try_new(shifted, T::machine_eps(), 1000 * n.max(10))
        .ok_or(Error::NoConvergence(f64::NAN))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap_or(std::cmp::Ordering::Equal));

    let tol = T::rel_tol(1e-10) * norm.max(T::one());
    let ones = DVector::from_element(n, T::one() / T::from_usize(n).unwrap().sqrt());
    let lam1 = (l * &ones).dot(&ones);
    let mut pairs = vec![SpectralPair { value: lam1, vector: ones, index: 1 }];
    for (pos, &c) in order.iter().take(k - 1).enumerate() {
        let mut x = eig.eigenvectors.column(c).into_owned();
        let nx = x.norm();
        x /= nx;
        canonical_sign(&mut x);
        let value = (l * &x).dot(&x);
        let residual = (l * &x - &x * value).norm();
        if residual > tol {
            return Err(Error::NoConvergence(residual.as_f64()));
        }
        pairs.push(SpectralPair { value, vector: x, index: pos + 2 });
    }
    Ok(SpectralSlice { pairs })
}

/// Solves `[[M − λI, x], [xᵀ, 0]] [z; μ] = [v; 0]` and returns `z`.
///
/// When λ is a simple eigenvalue of `M` with unit eigenvector `x`, this is
/// `z = (M − λI)† v`: it satisfies `(M − λI) z = v − x xᵀv` and `xᵀz = 0`.
/// A second LU solve refines the result once if the residual is not small.
pub fn pseudo_solve<T: Real>(m: &DMatrix<T>, lam: T, x: &DVector<T>, v: &DVector<T>) -> Result<DVector<T>> {
    let n = m.nrows();
    if m.ncols() != n || x.len() != n || v.len() != n {
        return Err(Error::Dimension { expected: n, got: x.len().max(v.len()).max(m.ncols()) });
    }
    let mut b = DMatrix::zeros(n + 1, n + 1);
    b.view_mut((0, 0), (n, n)).copy_from(m);
    for i in 0..n {
        b[(i, i)] -= lam;
        b[(i, n)] = x[i];
        b[(n, i)] = x[i];
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs.rows_mut(0, n).copy_from(v);

    let lu = b.clone().lu();
    let mut sol = lu.solve(&rhs).ok_or(Error::Singular)?;
    let residual = &rhs - &b * &sol;
    let scale = b.norm() * sol.norm() + rhs.norm();
    if residual.norm() > T::rel_tol(1e-10) * scale {
        if let Some(d) = lu.solve(&residual) {
            sol += d;
        }
    }
    if sol.iter().any(|s| !s.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(sol.rows(0, n).into_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{laplacian, WeightedGraph};

    fn lap(n: usize, edges: &[(usize, usize, f64)]) -> DMatrix<f64> {
        laplacian(&WeightedGraph::new(n, edges.iter().copied()).unwrap(), None, 0.0, 0.0).unwrap()
    }

    #[test]
    fn triangle_spectrum() {
        let s = smallest_eigenpairs(&lap(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]), 3).unwrap();
        assert!(s.lambda(1).abs() < 1e-12);
        assert!((s.lambda(2) - 3.0).abs() < 1e-12);
        assert!((s.lambda(3) - 3.0).abs() < 1e-12);
        assert!(s.gap().unwrap().abs() < 1e-12);
        assert!(s.check_simple(2).is_err());
    }

    #[test]
    fn two_disjoint_edges() {
        let s = smallest_eigenpairs(&lap(4, &[(0, 1, 1.0), (2, 3, 1.0)]), 2).unwrap();
        assert!(s.lambda(2).abs() < 1e-12);
        let x = s.vector(2);
        assert!((x[0] - x[1]).abs() < 1e-12 && (x[2] - x[3]).abs() < 1e-12);
        assert!(x[0] * x[2] < 0.0);
        assert!(x[0] > 0.0);
    }

    #[test]
    fn path_lambda2_is_one() {
        let s = smallest_eigenpairs(&lap(3, &[(0, 1, 1.0), (1, 2, 1.0)]), 2).unwrap();
        assert!((s.lambda(2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_asymmetric_and_bad_k() {
        let mut m = lap(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert!(smallest_eigenpairs(&m, 4).is_err());
        m[(0, 1)] += 1e-3;
        assert!(matches!(smallest_eigenpairs(&m, 2), Err(Error::Asymmetric(_))));
    }

    #[test]
    fn pseudo_solve_trivial_rhs() {
        let l = lap(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let s = smallest_eigenpairs(&l, 3).unwrap();
        let x = s.vector(2).clone();
        let z = pseudo_solve(&l, s.lambda(2), &x, &x).unwrap();
        assert!(z.norm() < 1e-12);
        let z = pseudo_solve(&l, s.lambda(2), &x, &DVector::zeros(3)).unwrap();
        assert!(z.norm() < 1e-15);
    }

    #[test]
    fn pseudo_solve_residuals_on_path() {
        let l = lap(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let s = smallest_eigenpairs(&l, 3).unwrap();
        let (lam, x) = (s.lambda(2), s.vector(2).clone());
        let v = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let z = pseudo_solve(&l, lam, &x, &v).unwrap();
        let lhs = &l * &z - &z * lam;
        let rhs = &v - &x * x.dot(&v);
        assert!((lhs - rhs).norm() < 1e-10);
        assert!(x.dot(&z).abs() < 1e-10);
    }

    #[test]
    fn sign_convention() {
        let mut x = DVector::from_vec(vec![1e-12, -0.5, 0.5]);
        canonical_sign(&mut x);
        assert_eq!(x[1], 0.5);
    }
}

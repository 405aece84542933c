//! Dense complex matrices: factorizations, norms, eigen-decompositions,
//! resolvents and matrix functions.

mod function;
pub mod market;
pub mod random;

pub use function::{expm, logm, matrix_function, matrix_function_with, schur_parlett, sqrtm_upper};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

use crate::config::Tolerances;
use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Square dense complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    pub fn new(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() == 0 {
            return Err(Error::InvalidMatrix("matrix is empty".into()));
        }
        if inner.nrows() != inner.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "matrix is {}×{}, expected square",
                inner.nrows(),
                inner.ncols()
            )));
        }
        if let Some((k, z)) = inner.iter().enumerate().find(|(_, z)| !(z.re.is_finite() && z.im.is_finite())) {
            let n = inner.nrows();
            return Err(Error::InvalidMatrix(format!("entry ({}, {}) = {z} is not finite", k % n, k / n)));
        }
        Ok(Self { inner })
    }

    /// Builds an n×n matrix from `f(row, col)`.
    ///
    /// Panics if n = 0 or an entry is not finite.
    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::new(DMatrix::from_fn(n, n, f)).expect("from_fn produced an invalid matrix")
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: r.len() });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows.get(i).map_or(ZERO, |r| r[j])))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_fn(n, |_, _| ZERO)
    }

    pub fn diag(values: &[C64]) -> Self {
        Self::from_fn(values.len(), |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.inner
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    /// (A + A*)/2.
    pub fn hermitian_part(&self) -> Self {
        Self { inner: (&self.inner + self.inner.adjoint()) * C64::new(0.5, 0.0) }
    }

    /// (A − A*)/(2i), so that A = H + iK with H, K Hermitian.
    pub fn skew_hermitian_part(&self) -> Self {
        Self { inner: (&self.inner - self.inner.adjoint()) * C64::new(0.0, -0.5) }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { inner: &self.inner * c }
    }

    /// A + cI.
    pub fn shift(&self, c: C64) -> Self {
        let mut inner = self.inner.clone();
        for i in 0..self.dim() {
            inner[(i, i)] += c;
        }
        Self { inner }
    }

    pub fn mul_vec(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.inner * v
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        norm_one(&self.inner)
    }

    /// ‖A‖₂, the largest singular value.
    pub fn operator_norm(&self) -> f64 {
        operator_norm(&self.inner)
    }

    /// Smallest singular value.
    pub fn min_singular_value(&self) -> f64 {
        self.inner.clone().svd(false, false).singular_values.min()
    }

    pub fn lu(&self) -> Result<Lu> {
        Lu::factor(&self.inner, Tolerances::DEFAULT.pivot)
    }

    pub fn solve_vec(&self, b: &DVector<C64>) -> Result<DVector<C64>> {
        if b.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: b.len() });
        }
        Ok(self.lu()?.solve_vec(b))
    }

    pub fn solve_mat(&self, b: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if b.nrows() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: b.nrows() });
        }
        Ok(self.lu()?.solve_mat(b))
    }

    /// AX = B for square B.
    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        Ok(Self { inner: self.solve_mat(&b.inner)? })
    }

    pub fn inverse(&self) -> Result<ComplexMatrix> {
        Ok(Self { inner: self.lu()?.inverse() })
    }

    /// (σI − A)⁻¹.
    pub fn resolvent(&self, sigma: C64) -> Result<ComplexMatrix> {
        self.scale(-ONE).shift(sigma).inverse()
    }

    pub fn hermitian_eig(&self) -> Result<HermitianEig> {
        hermitian_eig(self, &Tolerances::DEFAULT)
    }

    pub fn eig(&self) -> Result<EigenSystem> {
        eig(self, &Tolerances::DEFAULT)
    }

    /// Eigenvalues only (diagonal of the complex Schur form).
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        Ok(Schur::new(self)?.eigenvalues())
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> Result<f64> {
        Ok(self.eigenvalues()?.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner * &rhs.inner }
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner + &rhs.inner }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix { inner: &self.inner - &rhs.inner }
    }
}

pub(crate) fn norm_one(m: &DMatrix<C64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// Largest singular value of a (possibly rectangular) matrix.
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Partial-pivoting LU factorization PA = LU.
#[derive(Debug, Clone)]
pub struct Lu {
    factors: DMatrix<C64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Fails with `SingularMatrix` when a pivot is below `pivot_tol · ‖A‖_F`.
    pub fn factor(a: &DMatrix<C64>, pivot_tol: f64) -> Result<Lu> {
        let n = a.nrows();
        let threshold = pivot_tol * a.norm();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) =
                (k..n).map(|i| (i, lu[(i, k)].norm())).fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pmax <= threshold || pmax == 0.0 {
                return Err(Error::SingularMatrix { pivot: pmax, threshold });
            }
            if p != k {
                lu.swap_rows(p, k);
                perm.swap(p, k);
            }
            let inv = ONE / lu[(k, k)];
            for i in k + 1..n {
                lu[(i, k)] *= inv;
            }
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                if ukj == ZERO {
                    continue;
                }
                for i in k + 1..n {
                    let lik = lu[(i, k)];
                    lu[(i, j)] -= lik * ukj;
                }
            }
        }
        Ok(Lu { factors: lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    fn solve_in_place(&self, x: &mut [C64]) {
        let n = self.dim();
        let lu = &self.factors;
        for j in 0..n {
            let xj = x[j];
            if xj != ZERO {
                for i in j + 1..n {
                    x[i] -= lu[(i, j)] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            x[j] /= lu[(j, j)];
            let xj = x[j];
            if xj != ZERO {
                for i in 0..j {
                    x[i] -= lu[(i, j)] * xj;
                }
            }
        }
    }

    pub fn solve_vec(&self, b: &DVector<C64>) -> DVector<C64> {
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        self.solve_in_place(&mut x);
        DVector::from_vec(x)
    }

    pub fn solve_mat(&self, b: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(b.nrows(), b.ncols());
        let mut x = vec![ZERO; self.dim()];
        for c in 0..b.ncols() {
            for (xi, &p) in x.iter_mut().zip(&self.perm) {
                *xi = b[(p, c)];
            }
            self.solve_in_place(&mut x);
            out.column_mut(c).copy_from_slice(&x);
        }
        out
    }

    pub fn inverse(&self) -> DMatrix<C64> {
        self.solve_mat(&DMatrix::identity(self.dim(), self.dim()))
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, matching `values`.
    pub vectors: DMatrix<C64>,
}

impl HermitianEig {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn top_vector(&self) -> DVector<C64> {
        self.vectors.column(self.values.len() - 1).into_owned()
    }
}

pub fn hermitian_eig(h: &ComplexMatrix, tol: &Tolerances) -> Result<HermitianEig> {
    let m = h.as_matrix();
    let asym = (m - m.adjoint()).norm();
    if asym > tol.hermitian * m.norm() {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    Ok(hermitian_eig_unchecked(m))
}

/// Symmetrizes and diagonalizes without the Hermitian precondition check.
pub(crate) fn hermitian_eig_unchecked(m: &DMatrix<C64>) -> HermitianEig {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let n = sym.nrows();
    if n == 1 {
        return HermitianEig { values: vec![sym[(0, 0)].re], vectors: DMatrix::identity(1, 1) };
    }
    let e = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let values = order.iter().map(|&k| e.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| e.eigenvectors[(i, order[j])]);
    HermitianEig { values, vectors }
}

/// Eigenvalues only (unsorted) of the symmetrized matrix.
fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    if sym.nrows() == 1 {
        return vec![sym[(0, 0)].re];
    }
    sym.symmetric_eigenvalues().iter().copied().collect()
}

/// Largest eigenvalue of a Hermitian matrix (symmetrized first).
pub(crate) fn lambda_max(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m).into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Smallest eigenvalue of a Hermitian matrix (symmetrized first).
pub(crate) fn lambda_min(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m).into_iter().fold(f64::INFINITY, f64::min)
}

/// Complex Schur form A = Q T Q*.
#[derive(Debug, Clone)]
pub struct Schur {
    pub q: DMatrix<C64>,
    pub t: DMatrix<C64>,
}

impl Schur {
    pub fn new(a: &ComplexMatrix) -> Result<Schur> {
        let n = a.dim();
        if n == 1 {
            return Ok(Schur { q: DMatrix::identity(1, 1), t: a.inner.clone() });
        }
        let s = nalgebra::Schur::try_new(a.inner.clone(), f64::EPSILON, 200 * n)
            .ok_or_else(|| Error::NoConvergence(format!("Schur iteration cap reached for n = {n}")))?;
        let (q, mut t) = s.unpack();
        for j in 0..n {
            for i in j + 1..n {
                t[(i, j)] = ZERO;
            }
        }
        Ok(Schur { q, t })
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    /// Eigenvectors of T by back substitution, one per column.
    fn triangular_eigenvectors(&self) -> DMatrix<C64> {
        let t = &self.t;
        let n = t.nrows();
        let small = f64::EPSILON * t.norm().max(f64::MIN_POSITIVE);
        let mut y = DMatrix::zeros(n, n);
        for k in 0..n {
            let lambda = t[(k, k)];
            y[(k, k)] = ONE;
            for j in (0..k).rev() {
                let mut s = ZERO;
                for l in j + 1..=k {
                    s += t[(j, l)] * y[(l, k)];
                }
                let mut d = t[(j, j)] - lambda;
                if d.norm() < small {
                    d = C64::new(small, 0.0);
                }
                y[(j, k)] = -s / d;
            }
            let nrm = y.column(k).norm();
            y.column_mut(k).scale_mut(1.0 / nrm);
        }
        y
    }
}

/// Eigenvalues, unit right eigenvectors and the eigenvector condition number.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<C64>,
    pub vectors: DMatrix<C64>,
    /// κ₂(V) with unit-norm columns; infinite when V is numerically singular.
    pub condition: f64,
    /// max_k ‖A v_k − λ_k v_k‖ / ‖A‖.
    pub max_residual: f64,
    /// False when some eigenpair misses the residual tolerance.
    pub valid: bool,
}

pub fn eig(a: &ComplexMatrix, tol: &Tolerances) -> Result<EigenSystem> {
    let schur = Schur::new(a)?;
    Ok(eigensystem_from_schur(a, &schur, tol))
}

pub(crate) fn eigensystem_from_schur(a: &ComplexMatrix, schur: &Schur, tol: &Tolerances) -> EigenSystem {
    let values = schur.eigenvalues();
    let vectors = &schur.q * schur.triangular_eigenvectors();
    let anorm = a.operator_norm().max(f64::MIN_POSITIVE);
    let av = &a.inner * &vectors;
    let max_residual =
        (0..values.len()).map(|k| (av.column(k) - vectors.column(k) * values[k]).norm() / anorm).fold(0.0, f64::max);
    let sv = vectors.clone().svd(false, false).singular_values;
    let condition = if sv.min() > 0.0 { sv.max() / sv.min() } else { f64::INFINITY };
    EigenSystem { values, vectors, condition, max_residual, valid: max_residual <= tol.eig_residual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::grcar;
    use crate::matrix::random::{gaussian_matrix, random_unitary, rng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert!(ComplexMatrix::new(DMatrix::zeros(0, 0)).is_err());
        assert!(ComplexMatrix::new(DMatrix::from_element(2, 2, c(f64::NAN, 0.0))).is_err());
        assert!(ComplexMatrix::new(DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn operator_norm_examples() {
        assert!((ComplexMatrix::identity(3).operator_norm() - 1.0).abs() < 1e-12);
        let d = ComplexMatrix::diag(&[c(2.0, 0.0), c(0.0, -3.0)]);
        assert!((d.operator_norm() - 3.0).abs() < 1e-12);
        let g = grcar(100).operator_norm();
        assert!((g - 3.2).abs() < 0.1, "‖grcar(100)‖ = {g}");
    }

    #[test]
    fn solve_examples() {
        let b = DVector::from_vec(vec![c(1.0, 2.0), c(-3.0, 0.5)]);
        let x = ComplexMatrix::identity(2).solve_vec(&b).unwrap();
        assert!((x - &b).norm() < 1e-15);

        let d = ComplexMatrix::diag(&[c(2.0, 0.0), c(4.0, 0.0)]);
        let x = d.solve_vec(&DVector::from_vec(vec![c(2.0, 0.0), c(4.0, 0.0)])).unwrap();
        assert!((x - DVector::from_element(2, ONE)).norm() < 1e-15);

        let g = grcar(4);
        let e1 = DVector::from_fn(4, |i, _| if i == 0 { ONE } else { ZERO });
        let x = g.solve_vec(&e1).unwrap();
        assert!((g.mul_vec(&x) - e1).norm() <= 1e-12);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let s = ComplexMatrix::from_real_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(s.lu(), Err(Error::SingularMatrix { .. })));
        let d = ComplexMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        assert!(matches!(d.resolvent(c(1.0, 0.0)), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn resolvent_examples() {
        let r = ComplexMatrix::zeros(1).resolvent(c(2.0, 0.0)).unwrap();
        assert!((r.get(0, 0) - c(0.5, 0.0)).norm() < 1e-15);

        let d = ComplexMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let r = d.resolvent(c(3.0, 0.0)).unwrap();
        let expect = ComplexMatrix::diag(&[c(0.5, 0.0), c(0.25, 0.0)]);
        assert!((&r - &expect).frobenius_norm() < 1e-15);

        let g = grcar(5);
        let m = g.resolvent(c(10.0, 0.0)).unwrap();
        let res = &(&g.scale(-ONE).shift(c(10.0, 0.0)) * &m) - &ComplexMatrix::identity(5);
        assert!(res.operator_norm() <= 1e-12);
    }

    #[test]
    fn hermitian_eig_examples() {
        let d = ComplexMatrix::diag(&[c(3.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let e = d.hermitian_eig().unwrap();
        assert_eq!(e.values.len(), 3);
        for (v, want) in e.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - want).abs() < 1e-14);
        }
        let x = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let e = x.hermitian_eig().unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);

        let not_h = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(not_h.hermitian_eig(), Err(Error::NotHermitian { .. })));
    }

    /// Roots of the quartic characteristic polynomial of the Hermitian part
    /// of grcar(4), found by bisection on Sturm-free sign changes of det(H − x).
    #[test]
    fn hermitian_eig_matches_characteristic_polynomial() {
        let h = grcar(4).hermitian_part();
        let det = |x: f64| {
            let m = h.shift(c(-x, 0.0));
            m.as_matrix().determinant().re
        };
        let mut roots = Vec::new();
        let steps = 40_000;
        let (lo, hi) = (-4.0, 4.0);
        let mut prev = det(lo);
        for k in 1..=steps {
            let x = lo + (hi - lo) * k as f64 / steps as f64;
            let cur = det(x);
            if prev.signum() != cur.signum() {
                let (mut a, mut b) = (x - (hi - lo) / steps as f64, x);
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if det(a).signum() == det(m).signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
            prev = cur;
        }
        let e = h.hermitian_eig().unwrap();
        assert_eq!(roots.len(), 4);
        for (r, v) in roots.iter().zip(&e.values) {
            assert!((r - v).abs() < 1e-10, "{r} vs {v}");
        }
    }

    #[test]
    fn eig_examples() {
        let d = ComplexMatrix::diag(&[c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.0)]);
        let e = d.eig().unwrap();
        for want in [c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.0)] {
            assert!(e.values.iter().any(|v| (v - want).norm() < 1e-14));
        }
        assert!(e.valid);

        let g = grcar(100);
        let e = g.eig().unwrap();
        assert_eq!(e.values.len(), 100);
        assert!(e.max_residual <= 1e-8, "residual {}", e.max_residual);
    }

    #[test]
    fn unitary_invariance_of_norm() {
        let mut r = rng(crate::config::DEFAULT_SEED);
        for _ in 0..5 {
            let a = gaussian_matrix(6, &mut r);
            let u = random_unitary(6, &mut r);
            let v = random_unitary(6, &mut r);
            let b = &(&u * &a) * &v;
            assert!((a.operator_norm() - b.operator_norm()).abs() <= 1e-12 * a.operator_norm());
        }
    }

    #[test]
    fn resolvent_identity() {
        let mut r = rng(crate::config::DEFAULT_SEED);
        let a = gaussian_matrix(5, &mut r);
        let rho = a.spectral_radius().unwrap();
        for k in 0..5 {
            let s1 = C64::from_polar(rho + 1.0 + k as f64, 0.3 * k as f64);
            let s2 = C64::from_polar(rho + 2.0, 1.0 + k as f64);
            let r1 = a.resolvent(s1).unwrap();
            let r2 = a.resolvent(s2).unwrap();
            let lhs = &r1 - &r2;
            let rhs = (&r1 * &r2).scale(s2 - s1);
            assert!((&lhs - &rhs).operator_norm() <= 1e-10);
        }
    }

    #[test]
    fn hermitian_eig_unitary_invariance() {
        let mut r = rng(crate::config::DEFAULT_SEED);
        let a = gaussian_matrix(7, &mut r).hermitian_part();
        let u = random_unitary(7, &mut r);
        let b = &(&u.adjoint() * &a) * &u;
        let ea = a.hermitian_eig().unwrap();
        let eb = b.hermitian_eig().unwrap();
        for (x, y) in ea.values.iter().zip(&eb.values) {
            assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn schur_reconstructs() {
        for a in [gaussian_matrix(8, &mut rng(5)), grcar(30)] {
            let s = Schur::new(&a).unwrap();
            let back = &s.q * &s.t * s.q.adjoint();
            let rel = (&back - a.as_matrix()).norm() / a.frobenius_norm();
            assert!(rel < 1e-12, "rel {rel}");
            let qq = s.q.adjoint() * &s.q - DMatrix::<C64>::identity(a.dim(), a.dim());
            assert!(qq.norm() < 1e-12);
        }
    }

    #[test]
    fn adjoint_is_involution() {
        let mut r = rng(1);
        let a = gaussian_matrix(4, &mut r);
        assert_eq!(a.adjoint().adjoint(), a);
    }
}

use nalgebra::DMatrix;

use super::{eigensystem_from_schur, norm_one, ComplexMatrix, Lu, Schur, C64, ZERO};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
// Backward-error thresholds on ‖A‖₁ for the Padé degrees above.
#[allow(clippy::excessive_precision)]
const THETA: [(usize, f64); 4] =
    [(3, 1.495585217958292e-2), (5, 2.539398330063230e-1), (7, 9.504178996162932e-1), (9, 2.097847961257068)];
const THETA13: f64 = 5.371920351148152;

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn eye(n: usize) -> DMatrix<C64> {
    DMatrix::identity(n, n)
}

/// Matrix exponential by scaling and squaring with a Padé approximant.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let m = a.as_matrix();
    let n = m.nrows();
    let norm = norm_one(m);
    let id = eye(n);
    let a2 = m * m;

    let pade = |u: DMatrix<C64>, v: DMatrix<C64>| -> Result<DMatrix<C64>> {
        let lu = Lu::factor(&(&v - &u), Tolerances::DEFAULT.pivot)?;
        Ok(lu.solve_mat(&(&v + &u)))
    };

    for &(deg, theta) in &THETA {
        if norm <= theta {
            let b: &[f64] = match deg {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let mut u = &id * real(b[1]);
            let mut v = &id * real(b[0]);
            let mut power = id.clone();
            for k in 1..=deg / 2 {
                power = &power * &a2;
                u += &power * real(b[2 * k + 1]);
                v += &power * real(b[2 * k]);
            }
            let u = m * u;
            return ComplexMatrix::new(pade(u, v)?);
        }
    }

    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let scaled = m * real(0.5f64.powi(s));
    let b = &PADE13;
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * real(b[13]) + &a4 * real(b[11]) + &a2 * real(b[9]))
        + &a6 * real(b[7])
        + &a4 * real(b[5])
        + &a2 * real(b[3])
        + &id * real(b[1]);
    let u = &scaled * u_inner;
    let v = &a6 * (&a6 * real(b[12]) + &a4 * real(b[10]) + &a2 * real(b[8]))
        + &a6 * real(b[6])
        + &a4 * real(b[4])
        + &a2 * real(b[2])
        + &id * real(b[0]);
    let mut r = pade(u, v)?;
    for _ in 0..s {
        r = &r * &r;
    }
    ComplexMatrix::new(r).map_err(|_| Error::InvalidMatrix("exp(A) overflowed".into()))
}

/// Principal square root of an upper-triangular matrix whose diagonal avoids (−∞, 0].
pub fn sqrtm_upper(t: &DMatrix<C64>) -> DMatrix<C64> {
    let n = t.nrows();
    let mut u = DMatrix::zeros(n, n);
    for i in 0..n {
        u[(i, i)] = t[(i, i)].sqrt();
    }
    for p in 1..n {
        for i in 0..n - p {
            let j = i + p;
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= u[(i, k)] * u[(k, j)];
            }
            u[(i, j)] = s / (u[(i, i)] + u[(j, j)]);
        }
    }
    u
}

/// Principal logarithm by inverse scaling and squaring on the Schur form.
///
/// Square roots are taken until ‖T − I‖₁ ≤ 1/4, then log(I + X) is evaluated
/// as the Gauss–Legendre rule for ∫₀¹ X (I + tX)⁻¹ dt.
pub fn logm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let tol = Tolerances::DEFAULT;
    let schur = Schur::new(a)?;
    for lambda in schur.eigenvalues() {
        let dist = if lambda.re <= 0.0 { lambda.im.abs() } else { lambda.norm() };
        if dist <= tol.log_branch {
            return Err(Error::LogBranchCut { eigenvalue: lambda });
        }
    }
    let n = a.dim();
    let id = eye(n);
    let mut t = schur.t.clone();
    let mut k = 0;
    while norm_one(&(&t - &id)) > 0.25 {
        if k >= 64 {
            return Err(Error::NoConvergence("logm: square-root phase did not reach ‖T − I‖ ≤ 1/4".into()));
        }
        t = sqrtm_upper(&t);
        k += 1;
    }
    let x = &t - &id;
    let (nodes, weights) = gauss_legendre(16);
    let mut log = DMatrix::zeros(n, n);
    for (&node, &w) in nodes.iter().zip(&weights) {
        let tau = 0.5 * (node + 1.0);
        let lu = Lu::factor(&(&id + &x * real(tau)), tol.pivot)?;
        log += lu.solve_mat(&x) * real(0.5 * w);
    }
    log *= real(2f64.powi(k));
    ComplexMatrix::new(&schur.q * log * schur.q.adjoint())
}

/// Result of the triangular Parlett recurrence.
#[derive(Debug, Clone)]
pub struct ParlettResult {
    pub f: DMatrix<C64>,
    /// Smallest |t_ii − t_jj| over i ≠ j.
    pub min_separation: f64,
}

/// f(A) = Q f(T) Q* with the scalar Parlett recurrence on the Schur factor.
pub fn schur_parlett(a: &ComplexMatrix, f: &dyn Fn(C64) -> C64) -> Result<ParlettResult> {
    let schur = Schur::new(a)?;
    Ok(parlett_from_schur(&schur, f))
}

fn parlett_from_schur(schur: &Schur, f: &dyn Fn(C64) -> C64) -> ParlettResult {
    let t = &schur.t;
    let n = t.nrows();
    let mut fm = DMatrix::zeros(n, n);
    for i in 0..n {
        fm[(i, i)] = f(t[(i, i)]);
    }
    let mut min_sep = f64::INFINITY;
    for p in 1..n {
        for i in 0..n - p {
            let j = i + p;
            let mut d = t[(j, j)] - t[(i, i)];
            min_sep = min_sep.min(d.norm());
            if d == ZERO {
                d = real(f64::EPSILON * t.norm().max(1.0));
            }
            let mut s = t[(i, j)] * (fm[(j, j)] - fm[(i, i)]);
            for k in i + 1..j {
                s += t[(i, k)] * fm[(k, j)] - fm[(i, k)] * t[(k, j)];
            }
            fm[(i, j)] = s / d;
        }
    }
    ParlettResult { f: &schur.q * fm * schur.q.adjoint(), min_separation: min_sep }
}

/// f(A) for a scalar function analytic near the spectrum, with default tolerances.
pub fn matrix_function(a: &ComplexMatrix, f: &dyn Fn(C64) -> C64) -> Result<ComplexMatrix> {
    matrix_function_with(a, f, &Tolerances::DEFAULT)
}

/// f(A) = V f(Λ) V⁻¹ when the eigenvector matrix has condition ≤
/// `eig_condition_max`, otherwise the Schur–Parlett form. When the Parlett
/// recurrence meets nearly confluent eigenvalues both results are compared
/// and `IllConditionedFunction` is returned if they disagree.
pub fn matrix_function_with(a: &ComplexMatrix, f: &dyn Fn(C64) -> C64, tol: &Tolerances) -> Result<ComplexMatrix> {
    let schur = Schur::new(a)?;
    let es = eigensystem_from_schur(a, &schur, tol);
    let diagonal_path = || -> Result<DMatrix<C64>> {
        let fv: Vec<C64> = es.values.iter().map(|&z| f(z)).collect();
        let mut vf = es.vectors.clone();
        for (j, fj) in fv.iter().enumerate() {
            for z in vf.column_mut(j).iter_mut() {
                *z *= fj;
            }
        }
        // V f(Λ) V⁻¹ = (V⁻* (V f(Λ))*)*
        let lu = Lu::factor(&es.vectors.adjoint(), tol.pivot)?;
        Ok(lu.solve_mat(&vf.adjoint()).adjoint())
    };

    if es.valid && es.condition <= tol.eig_condition_max {
        return ComplexMatrix::new(diagonal_path()?);
    }
    let parlett = parlett_from_schur(&schur, f);
    let scale = schur.t.norm().max(f64::MIN_POSITIVE);
    if parlett.min_separation < 1e-8 * scale {
        let diag = diagonal_path()?;
        let disagreement = (&diag - &parlett.f).norm() / diag.norm().max(f64::MIN_POSITIVE);
        if !(disagreement <= tol.function_disagreement) {
            return Err(Error::IllConditionedFunction { disagreement });
        }
    }
    ComplexMatrix::new(parlett.f).map_err(|_| Error::IllConditionedFunction { disagreement: f64::INFINITY })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::grcar;
    use crate::matrix::random::{gaussian_matrix, rng};
    use crate::matrix::ONE;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_function_returns_matrix() {
        let a = gaussian_matrix(5, &mut rng(3));
        let fa = matrix_function(&a, &|z| z).unwrap();
        assert!((&fa - &a).operator_norm() <= 1e-10 * a.operator_norm());
    }

    #[test]
    fn exp_of_diagonal() {
        let a = ComplexMatrix::diag(&[ZERO, c(2f64.ln(), 0.0)]);
        let e = expm(&a).unwrap();
        assert!((e.get(0, 0) - ONE).norm() < 1e-14);
        assert!((e.get(1, 1) - c(2.0, 0.0)).norm() < 1e-14);
        let e2 = matrix_function(&a, &|z| z.exp()).unwrap();
        assert!((&e - &e2).operator_norm() < 1e-14);
    }

    #[test]
    fn inv_one_minus_exp_on_grcar6() {
        let a = grcar(6);
        let m = matrix_function(&a, &|z| ONE / (ONE - z.exp())).unwrap();
        let e = expm(&a).unwrap();
        let lhs = &(&ComplexMatrix::identity(6) - &e) * &m;
        let res = (&lhs - &ComplexMatrix::identity(6)).operator_norm();
        assert!(res <= 1e-10, "residual {res}");
    }

    #[test]
    fn polynomial_is_respected() {
        let a = gaussian_matrix(6, &mut rng(11));
        let fa = matrix_function(&a, &|z| z * z + ONE).unwrap();
        let direct = (&a * &a).shift(ONE);
        assert!((&fa - &direct).operator_norm() <= 1e-10 * direct.operator_norm());
    }

    #[test]
    fn schur_parlett_matches_diagonalization() {
        let a = gaussian_matrix(8, &mut rng(5));
        let p = schur_parlett(&a, &|z| z.exp()).unwrap();
        let e = expm(&a).unwrap();
        assert!((&p.f - e.as_matrix()).norm() <= 1e-10 * e.frobenius_norm());
    }

    #[test]
    fn expm_scaling_and_squaring_matches_parlett_on_grcar() {
        let a = grcar(30);
        let e = expm(&a).unwrap();
        let p = schur_parlett(&a, &|z| z.exp()).unwrap();
        let rel = (&p.f - e.as_matrix()).norm() / e.frobenius_norm();
        assert!(rel < 1e-8, "rel {rel}");
    }

    #[test]
    fn logm_inverts_expm() {
        let a = gaussian_matrix(6, &mut rng(9)).scale(c(0.3, 0.0));
        let l = logm(&expm(&a).unwrap()).unwrap();
        assert!((&l - &a).operator_norm() <= 1e-11);
        let g = grcar(40);
        let lg = logm(&g).unwrap();
        let back = expm(&lg).unwrap();
        assert!((&back - &g).operator_norm() <= 1e-9 * g.operator_norm());
    }

    #[test]
    fn logm_rejects_branch_cut() {
        let a = ComplexMatrix::diag(&[c(-1.0, 0.0), ONE]);
        assert!(matches!(logm(&a), Err(Error::LogBranchCut { .. })));
    }

    #[test]
    fn sqrtm_upper_squares_back() {
        let a = grcar(10).shift(c(1.0, 0.0));
        let s = Schur::new(&a).unwrap();
        let u = sqrtm_upper(&s.t);
        assert!((&u * &u - &s.t).norm() < 1e-12 * s.t.norm());
    }
}

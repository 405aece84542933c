use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::BoundTrace;
use crate::error::{Error, Result};
use crate::kconst::KCertificate;
use crate::matrix::{ComplexMatrix, C64};
use crate::minimax::poly_minmax_sweep;
use crate::regions::Region;

/// Steps between recomputations of the true residual.
const TRUE_RESIDUAL_EVERY: usize = 10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmresResult {
    /// ‖r_k‖ for k = 0..=steps.
    pub residuals: Vec<f64>,
    #[serde(skip)]
    pub x: DVector<C64>,
    /// Happy breakdown: the last iterate solves Ax = b.
    pub exact: bool,
    /// Largest |‖b − Ax_k‖ − recurrence value| / ‖b‖ seen at the checkpoints.
    pub max_drift: f64,
}

impl GmresResult {
    pub fn relative(&self) -> Vec<f64> {
        let r0 = self.residuals[0];
        self.residuals.iter().map(|r| r / r0).collect()
    }
}

fn givens(a: C64, b: C64) -> (f64, C64) {
    // [c s; −conj(s) c] [a; b] = [r; 0] with c real.
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let r = na.hypot(nb);
    let phase = a / na;
    (na / r, phase * b.conj() / r)
}

fn solution(v: &DMatrix<C64>, r: &DMatrix<C64>, g: &[C64], k: usize) -> DVector<C64> {
    let mut y = vec![C64::new(0.0, 0.0); k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= r[(i, j)] * y[j];
        }
        y[i] = s / r[(i, i)];
    }
    let mut x = DVector::<C64>::zeros(v.nrows());
    for (j, yj) in y.iter().enumerate() {
        x += v.column(j) * *yj;
    }
    x
}

/// Full GMRES from x₀ = 0 for at most `kmax` steps.
pub fn gmres(a: &ComplexMatrix, b: &DVector<C64>, kmax: usize) -> Result<GmresResult> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let beta = b.norm();
    if beta == 0.0 {
        return Ok(GmresResult { residuals: vec![0.0], x: DVector::zeros(n), exact: true, max_drift: 0.0 });
    }
    let kmax = kmax.min(n);
    let breakdown = 1e-14 * a.operator_norm();
    let mut v = DMatrix::<C64>::zeros(n, kmax + 1);
    v.set_column(0, &(b / C64::new(beta, 0.0)));
    let mut r = DMatrix::<C64>::zeros(kmax + 1, kmax);
    let mut rotations: Vec<(f64, C64)> = Vec::with_capacity(kmax);
    let mut g = vec![C64::new(0.0, 0.0); kmax + 1];
    g[0] = C64::new(beta, 0.0);
    let mut residuals = vec![beta];
    let mut exact = false;
    let mut max_drift: f64 = 0.0;
    for k in 0..kmax {
        let mut w = a.mul_vec(&v.column(k).into_owned());
        let mut h = vec![C64::new(0.0, 0.0); k + 2];
        for _ in 0..2 {
            for (i, hi) in h.iter_mut().enumerate().take(k + 1) {
                let hik = v.column(i).dotc(&w);
                *hi += hik;
                w -= v.column(i) * hik;
            }
        }
        let hnext = w.norm();
        h[k + 1] = C64::new(hnext, 0.0);
        for (i, &(c, s)) in rotations.iter().enumerate() {
            let (x, y) = (h[i], h[i + 1]);
            h[i] = x * c + s * y;
            h[i + 1] = -s.conj() * x + y * c;
        }
        let (c, s) = givens(h[k], h[k + 1]);
        h[k] = h[k] * c + s * h[k + 1];
        h[k + 1] = C64::new(0.0, 0.0);
        rotations.push((c, s));
        let gk = g[k];
        g[k] = gk * c;
        g[k + 1] = -s.conj() * gk;
        for i in 0..=k {
            r[(i, k)] = h[i];
        }
        let mut res = g[k + 1].norm();
        let happy = hnext <= breakdown;
        if happy || (k + 1) % TRUE_RESIDUAL_EVERY == 0 || k + 1 == kmax {
            let x = solution(&v, &r, &g, k + 1);
            let true_res = (b - a.mul_vec(&x)).norm();
            max_drift = max_drift.max((true_res - res).abs() / beta);
            res = true_res;
        }
        residuals.push(res);
        if happy {
            exact = true;
            let x = solution(&v, &r, &g, k + 1);
            return Ok(GmresResult { residuals, x, exact, max_drift });
        }
        v.set_column(k + 1, &(w / C64::new(hnext, 0.0)));
    }
    let x = solution(&v, &r, &g, kmax);
    Ok(GmresResult { residuals, x, exact, max_drift })
}

/// bound[k] = K · min max_{∂Ω} |p_k| with p_k(0) = 1, for k = 0..=kmax.
pub fn gmres_bound(region: &Region, certificate: &KCertificate, kmax: usize) -> Result<Vec<f64>> {
    let zero = C64::new(0.0, 0.0);
    if region.contains(zero) || region.distance_to_boundary(zero) <= 1e-12 * region.diameter() {
        return Err(Error::ConstraintInRegion(zero));
    }
    let mut bound = vec![certificate.k];
    if kmax > 0 {
        bound.extend(poly_minmax_sweep(region, kmax, zero)?.iter().map(|r| certificate.k * r.value));
    }
    Ok(bound)
}

/// GMRES relative residuals next to the certified bound.
pub fn gmres_trace(
    a: &ComplexMatrix,
    b: &DVector<C64>,
    region: &Region,
    certificate: &KCertificate,
    kmax: usize,
) -> Result<BoundTrace> {
    let run = gmres(a, b, kmax)?;
    let actual = run.relative();
    let bound = gmres_bound(region, certificate, actual.len() - 1)?;
    Ok(BoundTrace { steps: (0..actual.len()).collect(), actual, bound, certificate: certificate.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::grcar;
    use crate::matrix::random::{gaussian_vector, rng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_converges_in_one_step() {
        let b = DVector::from_vec(vec![c(1.0, 2.0), c(-1.0, 0.0), c(0.5, 0.5)]);
        let out = gmres(&ComplexMatrix::identity(3), &b, 3).unwrap();
        assert!(out.exact);
        assert_eq!(out.residuals.len(), 2);
        assert!(out.residuals[1] < 1e-14);
    }

    #[test]
    fn unitary_diagonal_within_n_steps() {
        let z: Vec<C64> = (0..5).map(|k| C64::from_polar(1.0, 0.3 + 1.1 * k as f64)).collect();
        let a = ComplexMatrix::diag(&z);
        let b = gaussian_vector(5, &mut rng(3));
        let out = gmres(&a, &b, 5).unwrap();
        assert!(*out.residuals.last().unwrap() < 1e-10 * b.norm());
    }

    #[test]
    fn residuals_decrease_and_match_true_residual() {
        let a = grcar(30);
        let b = gaussian_vector(30, &mut rng(1));
        let out = gmres(&a, &b, 25).unwrap();
        for w in out.residuals.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        assert!(out.max_drift < 1e-8);
        let x = out.x;
        let true_res = (&b - a.mul_vec(&x)).norm();
        assert!((true_res - out.residuals.last().unwrap()).abs() < 1e-8 * b.norm());
    }

    #[test]
    fn von_neumann_bound_on_a_disk() {
        // Normal A with spectrum in |z − 3| ≤ 1: bound_k = (1/3)^k.
        let z: Vec<C64> = (0..6).map(|k| c(3.0, 0.0) + C64::from_polar(0.9, k as f64)).collect();
        let a = ComplexMatrix::diag(&z);
        let disk = Region::disk(c(3.0, 0.0), 1.0).unwrap();
        let cert = crate::kconst::certify(&a, &disk).unwrap();
        assert_eq!(cert.k, 1.0);
        let bound = gmres_bound(&disk, &cert, 4).unwrap();
        assert_eq!(bound[0], 1.0);
        for (k, b) in bound.iter().enumerate().skip(1) {
            assert!((b - (1.0f64 / 3.0).powi(k as i32)).abs() < 1e-6 * b);
        }
        let b = gaussian_vector(6, &mut rng(2));
        let trace = gmres_trace(&a, &b, &disk, &cert, 4).unwrap();
        assert!(trace.violations(1.0).is_empty());
    }
}

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::ScalarFunction;
use crate::geometry::numerical_radius;
use crate::kconst::{certify, KCertificate};
use crate::matrix::{expm, ComplexMatrix, C64};
use crate::minimax::{rational_fixed_pole_fit, MinimaxResult, MinimaxSummary};
use crate::regions::Region;

/// Orthonormal basis V_m of q_{m−1}(A)⁻¹ span{b, Ab, …, A^{m−1}b} and the
/// compression A_m = V_m* A V_m.
#[derive(Debug, Clone)]
pub struct RationalKrylov {
    pub v: DMatrix<C64>,
    pub am: ComplexMatrix,
    /// The space became A-invariant before reaching dimension m.
    pub exact: bool,
}

fn finite_poles(poles: &[C64]) -> impl Iterator<Item = C64> + '_ {
    poles.iter().copied().filter(|p| p.is_finite())
}

/// q_{m−1}(A)⁻¹ b, normalized after each solve. Infinite poles are skipped.
fn rational_start(a: &ComplexMatrix, b: &DVector<C64>, poles: &[C64]) -> Result<DVector<C64>> {
    let mut w = b / C64::new(b.norm(), 0.0);
    for p in finite_poles(poles) {
        let shifted = a.shift(-p);
        let lu = shifted.lu().map_err(|_| Error::PoleHitsSpectrum(p))?;
        w = lu.solve_vec(&w);
        let nrm = w.norm();
        if !nrm.is_finite() || nrm == 0.0 {
            return Err(Error::PoleHitsSpectrum(p));
        }
        w /= C64::new(nrm, 0.0);
    }
    Ok(w)
}

/// m = poles.len() + 1.
pub fn rational_arnoldi_basis(a: &ComplexMatrix, b: &DVector<C64>, poles: &[C64]) -> Result<RationalKrylov> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    if b.norm() == 0.0 {
        return Err(Error::InvalidArgument("starting vector b is zero".into()));
    }
    let m = (poles.len() + 1).min(n);
    let w = rational_start(a, b, poles)?;
    // Frobenius norm: an upper bound on ‖A‖ that costs no SVD.
    let breakdown = 1e-14 * a.as_matrix().norm().max(1.0);
    let mut cols: Vec<DVector<C64>> = vec![w];
    let mut exact = false;
    while cols.len() < m {
        let mut next = a.mul_vec(cols.last().expect("nonempty"));
        let scale = next.norm();
        for _ in 0..2 {
            for q in &cols {
                let h = q.dotc(&next);
                next -= q * h;
            }
        }
        let nrm = next.norm();
        if nrm <= breakdown.max(1e-13 * scale) {
            exact = true;
            break;
        }
        cols.push(next / C64::new(nrm, 0.0));
    }
    let v = DMatrix::from_columns(&cols);
    let am = ComplexMatrix::new(v.adjoint() * a.as_matrix() * &v)?;
    Ok(RationalKrylov { v, am, exact })
}

#[derive(Debug, Clone)]
pub struct RationalArnoldiApprox {
    pub krylov: RationalKrylov,
    /// V_m f(A_m) V_m* b.
    pub approx: DVector<C64>,
    pub reference: DVector<C64>,
    /// ‖f(A)b − f_m‖/‖b‖.
    pub error: f64,
}

/// f(A)b, cross-checked for 1/(1 − e^z) against a direct solve of
/// (I − e^A)x = b.
pub fn reference_fab(a: &ComplexMatrix, b: &DVector<C64>, f: &ScalarFunction) -> Result<DVector<C64>> {
    let fab = f.apply(a)?.mul_vec(b);
    if *f == ScalarFunction::Inv1mExp {
        let m = &ComplexMatrix::identity(a.dim()) - &expm(a)?;
        let x = m.solve_vec(b)?;
        let disagreement = (&x - &fab).norm() / fab.norm();
        if disagreement > 1e-8 {
            return Err(Error::IllConditionedFunction { disagreement });
        }
    }
    Ok(fab)
}

pub fn rational_arnoldi_fa(
    a: &ComplexMatrix,
    b: &DVector<C64>,
    poles: &[C64],
    f: &ScalarFunction,
) -> Result<RationalArnoldiApprox> {
    let reference = reference_fab(a, b, f)?;
    rational_arnoldi_with_reference(a, b, poles, f, reference)
}

pub(crate) fn rational_arnoldi_with_reference(
    a: &ComplexMatrix,
    b: &DVector<C64>,
    poles: &[C64],
    f: &ScalarFunction,
    reference: DVector<C64>,
) -> Result<RationalArnoldiApprox> {
    let krylov = rational_arnoldi_basis(a, b, poles)?;
    let coords = krylov.v.adjoint() * b;
    let fam = f.apply(&krylov.am)?;
    let approx = &krylov.v * (fam.as_matrix() * coords);
    let error = (&reference - &approx).norm() / b.norm();
    Ok(RationalArnoldiApprox { krylov, approx, reference, error })
}

/// How A_m compares with A on the quantities the regions depend on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompressionDiagnostics {
    pub norm_a: f64,
    pub norm_am: f64,
    pub numradius_a: f64,
    pub numradius_am: f64,
    pub inv_numradius_a: f64,
    pub inv_numradius_am: f64,
    /// ‖A_m‖ ≤ ‖A‖ and w(A_m) ≤ w(A), which always hold up to rounding.
    pub norm_and_numradius_ok: bool,
    /// w(A_m⁻¹) ≤ w(A⁻¹), which is not guaranteed.
    pub inverse_numradius_ok: bool,
}

impl CompressionDiagnostics {
    pub fn compute(a: &ComplexMatrix, am: &ComplexMatrix) -> Result<Self> {
        let norm_a = a.operator_norm();
        let norm_am = am.operator_norm();
        let numradius_a = numerical_radius(a);
        let numradius_am = numerical_radius(am);
        let inv_numradius_a = numerical_radius(&a.inverse()?);
        let inv_numradius_am = numerical_radius(&am.inverse()?);
        let tol = 1e-10 * norm_a.max(1.0);
        Ok(Self {
            norm_a,
            norm_am,
            numradius_a,
            numradius_am,
            inv_numradius_a,
            inv_numradius_am,
            norm_and_numradius_ok: norm_am <= norm_a + tol && numradius_am <= numradius_a + tol,
            inverse_numradius_ok: inv_numradius_am <= inv_numradius_a * (1.0 + 1e-10),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NearOptReport {
    pub poles: Vec<C64>,
    pub region_kind: String,
    pub certificate: KCertificate,
    /// Certificate for A_m on the same region, when one exists.
    pub compression_certificate: Option<KCertificate>,
    pub fit: MinimaxSummary,
    /// 2·K·max_{∂Ω} |f − r|, a bound on ‖f(A)b − f_m‖/‖b‖.
    pub bound: f64,
    pub actual: f64,
    pub diagnostics: CompressionDiagnostics,
    /// Set when A_m is not certified on the region with a constant ≤ K.
    pub conditional: Option<String>,
    pub holds: bool,
}

/// The near-optimality bound 2·K·max_{∂Ω}|f − r| with r the fixed-pole fit
/// of numerator degree m − 1, together with the actual error.
pub fn near_opt_bound(
    a: &ComplexMatrix,
    b: &DVector<C64>,
    poles: &[C64],
    f: &ScalarFunction,
    region: &Region,
    certificate: &KCertificate,
) -> Result<NearOptReport> {
    let ra = rational_arnoldi_fa(a, b, poles, f)?;
    Ok(near_opt_from(a, poles, f, region, certificate, &ra)?.0)
}

/// [`near_opt_bound`] for an existing rational Arnoldi run, also returning the fit.
pub fn near_opt_from(
    a: &ComplexMatrix,
    poles: &[C64],
    f: &ScalarFunction,
    region: &Region,
    certificate: &KCertificate,
    ra: &RationalArnoldiApprox,
) -> Result<(NearOptReport, MinimaxResult)> {
    let finite: Vec<C64> = finite_poles(poles).collect();
    let degree = poles.len();
    let fit = rational_fixed_pole_fit(&|z| f.eval(z), &finite, region, degree)?;
    let bound = 2.0 * certificate.k * fit.value;
    let diagnostics = CompressionDiagnostics::compute(a, &ra.krylov.am)?;
    let (compression_certificate, conditional) = match certify(&ra.krylov.am, region) {
        Ok(c) if c.k <= certificate.k => (Some(c), None),
        Ok(c) => {
            let note = format!("A_m is only {}-spectral on the region (K = {})", c.k, certificate.k);
            (Some(c), Some(note))
        }
        Err(Error::NoApplicableResult { failed }) => (None, Some(failed.join("; "))),
        Err(Error::SpectrumLeak { eigenvalue }) => {
            (None, Some(format!("eigenvalue {eigenvalue} of A_m is outside the region")))
        }
        Err(e) => return Err(e),
    };
    let report = NearOptReport {
        poles: poles.to_vec(),
        region_kind: region.shape().kind().to_string(),
        certificate: certificate.clone(),
        compression_certificate,
        fit: fit.summary(),
        bound,
        actual: ra.error,
        diagnostics,
        conditional,
        holds: bound >= ra.error,
    };
    Ok((report, fit))
}

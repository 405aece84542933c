//! Numerical checks of the lower bounds on λ_min(μ(σ₀, A)) and of |g| ≤ 1
//! on the annulus.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{numerical_radius, RotatedHermitian};
use crate::matrix::random::{gaussian, gaussian_matrix, rng, TestRng};
use crate::matrix::{hermitian_eig_unchecked, ComplexMatrix, C64};
use crate::potential::{mu_operator, HYPOTHESIS_SLACK};
use crate::rational::{random_family, FamilySpec};
use crate::regions::{cauchy_transform_g_with, Region};

/// Margins at or above this value pass.
pub const MARGIN_TOL: f64 = -1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lemma {
    /// W(A) lies left of the tangent line at σ₀: λ_min ≥ 0.
    HalfPlane = 4,
    /// ‖A − ωI‖ ≤ R on |σ − ω| = R: λ_min ≥ 1/(2πR).
    Norm = 5,
    /// ‖(A − ωI)⁻¹‖ ≤ R on |σ − ω| = 1/R: λ_min ≥ −R/(2π).
    InverseNorm = 6,
    /// w((A − ωI)⁻¹) ≤ R on |σ − ω| = 1/R: λ_min ≥ −R/π.
    InverseNumradius = 7,
}

impl Lemma {
    pub const ALL: [Lemma; 4] = [Lemma::HalfPlane, Lemma::Norm, Lemma::InverseNorm, Lemma::InverseNumradius];

    pub fn from_id(id: u32) -> Result<Lemma> {
        match id {
            4 => Ok(Lemma::HalfPlane),
            5 => Ok(Lemma::Norm),
            6 => Ok(Lemma::InverseNorm),
            7 => Ok(Lemma::InverseNumradius),
            _ => Err(Error::InvalidArgument(format!("no λ_min lemma with id {id} (expected 4..=7)"))),
        }
    }

    pub fn id(self) -> u32 {
        self as u32
    }

    pub fn lower_bound(self, r: f64) -> f64 {
        match self {
            Lemma::HalfPlane => 0.0,
            Lemma::Norm => 1.0 / (2.0 * PI * r),
            Lemma::InverseNorm => -r / (2.0 * PI),
            Lemma::InverseNumradius => -r / PI,
        }
    }
}

/// One (A, ω, R, σ₀, σ₀′) configuration. ω and R are ignored by the
/// half-plane lemma.
#[derive(Debug, Clone)]
pub struct LemmaInstance {
    pub a: ComplexMatrix,
    pub omega: C64,
    pub r: f64,
    pub sigma: C64,
    pub tangent: C64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub lemma: u32,
    pub hypothesis_met: bool,
    /// Checked quantity and the threshold it must not exceed.
    pub hypothesis_value: f64,
    pub hypothesis_threshold: f64,
    pub lambda_min: f64,
    pub bound: f64,
    pub margin: f64,
    pub passed: bool,
}

/// How far σ₀, σ₀′ are from the circle the lemma lives on. Zero for the
/// half-plane lemma, which allows any boundary point.
fn placement_error(lemma: Lemma, inst: &LemmaInstance) -> f64 {
    let d = inst.sigma - inst.omega;
    match lemma {
        Lemma::HalfPlane => (inst.tangent.norm() - 1.0).abs(),
        Lemma::Norm => {
            let expected = C64::new(0.0, 1.0) * d / d.norm();
            (d.norm() - inst.r).abs() / inst.r + (inst.tangent - expected).norm()
        }
        Lemma::InverseNorm | Lemma::InverseNumradius => {
            let expected = C64::new(0.0, -1.0) * d / d.norm();
            (d.norm() * inst.r - 1.0).abs() + (inst.tangent - expected).norm()
        }
    }
}

/// (checked value, threshold) of the operator hypothesis.
fn hypothesis(lemma: Lemma, inst: &LemmaInstance) -> Result<(f64, f64)> {
    let shifted = inst.a.shift(-inst.omega);
    Ok(match lemma {
        Lemma::HalfPlane => {
            // W(A) ⊂ {Re(conj(n)(z − σ₀)) ≤ 0} with outward normal n = −iσ₀′.
            let n = C64::new(0.0, -1.0) * inst.tangent;
            let theta = n.arg();
            let h = RotatedHermitian::new(&inst.a).support(theta);
            (h, (n.conj() * inst.sigma).re)
        }
        Lemma::Norm => (shifted.operator_norm(), inst.r),
        Lemma::InverseNorm => (shifted.inverse()?.operator_norm(), inst.r),
        Lemma::InverseNumradius => (numerical_radius(&shifted.inverse()?), inst.r),
    })
}

pub fn check_lemma(lemma: Lemma, inst: &LemmaInstance) -> Result<LemmaCheck> {
    let (value, threshold) = hypothesis(lemma, inst)?;
    let scale = inst.sigma.norm().max(inst.a.operator_norm()).max(1.0);
    let slack = HYPOTHESIS_SLACK * threshold.abs().max(scale);
    let hypothesis_met = value <= threshold + slack && placement_error(lemma, inst) <= 1e-10;
    let sample = mu_operator(inst.sigma, inst.tangent, &inst.a)?;
    let bound = lemma.lower_bound(inst.r);
    let margin = sample.lambda_min - bound;
    Ok(LemmaCheck {
        lemma: lemma.id(),
        hypothesis_met,
        hypothesis_value: value,
        hypothesis_threshold: threshold,
        lambda_min: sample.lambda_min,
        bound,
        margin,
        passed: hypothesis_met && margin >= MARGIN_TOL,
    })
}

/// The supporting point of W(A) with outward normal e^{iθ}.
pub fn support_point(a: &ComplexMatrix, theta: f64) -> C64 {
    let eig = hermitian_eig_unchecked(&RotatedHermitian::new(a).at(theta));
    let v = eig.top_vector();
    v.dotc(&a.mul_vec(&v))
}

/// Instance kinds drawn by the randomized suite.
fn random_instance(lemma: Lemma, rng: &mut TestRng, touch: bool) -> Result<LemmaInstance> {
    let n = rng.random_range(2..=12);
    let a = gaussian_matrix(n, rng).scale(C64::new(1.0 / (n as f64).sqrt(), 0.0));
    let omega = gaussian(rng) * 0.5;
    let phi = TAU * rng.random::<f64>();
    // Inflation of the tight radius; the equality case keeps the 1e−8 margin.
    let inflate = if touch { 1.0 + 1e-8 } else { 1.0 + rng.random::<f64>() };
    Ok(match lemma {
        Lemma::HalfPlane => {
            let p = support_point(&a, phi);
            let e = C64::from_polar(1.0, phi);
            let (offset, slide) =
                if touch { (0.0, 0.0) } else { (rng.random::<f64>(), 2.0 * rng.random::<f64>() - 1.0) };
            let sigma = p + e * offset + C64::new(0.0, 1.0) * e * slide;
            LemmaInstance { a, omega, r: 0.0, sigma, tangent: C64::new(0.0, 1.0) * e }
        }
        Lemma::Norm => {
            let r = a.shift(-omega).operator_norm() * inflate;
            let e = C64::from_polar(1.0, phi);
            LemmaInstance { a, omega, r, sigma: omega + e * r, tangent: C64::new(0.0, 1.0) * e }
        }
        Lemma::InverseNorm | Lemma::InverseNumradius => {
            let inv = a.shift(-omega).inverse()?;
            let tight = if lemma == Lemma::InverseNorm { inv.operator_norm() } else { numerical_radius(&inv) };
            let r = tight * inflate;
            let e = C64::from_polar(1.0, -phi);
            LemmaInstance { a, omega, r, sigma: omega + e / r, tangent: C64::new(0.0, -1.0) * e }
        }
    })
}

/// Report in the `{lemma, instances, min_margin, seed}` layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: u32,
    pub instances: usize,
    pub min_margin: f64,
    pub seed: u64,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.min_margin >= MARGIN_TOL
    }
}

/// Detailed outcome of a randomized suite.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub report: LemmaReport,
    pub hypothesis_failures: usize,
    /// Largest |λ_min| over boundary-touch instances (half-plane lemma only).
    pub touch_max_abs: Option<f64>,
}

/// Runs `instances` seeded random checks; every 10th instance is an
/// equality (boundary-touch) case.
pub fn lemma_suite(lemma: Lemma, instances: usize, seed: u64) -> Result<SuiteOutcome> {
    let mut r = rng(seed ^ ((lemma.id() as u64) << 32));
    let drawn: Vec<(LemmaInstance, bool)> = (0..instances)
        .map(|k| {
            let touch = k % 10 == 0;
            random_instance(lemma, &mut r, touch).map(|i| (i, touch))
        })
        .collect::<Result<_>>()?;
    let checks = exec::map_indexed(drawn.len(), |k| check_lemma(lemma, &drawn[k].0));
    let mut min_margin = f64::INFINITY;
    let mut hypothesis_failures = 0;
    let mut touch_max: Option<f64> = None;
    for (check, (_, touch)) in checks.into_iter().zip(&drawn) {
        let check = check?;
        if !check.hypothesis_met {
            hypothesis_failures += 1;
            continue;
        }
        min_margin = min_margin.min(check.margin);
        if *touch && lemma == Lemma::HalfPlane {
            touch_max = Some(touch_max.unwrap_or(0.0).max(check.lambda_min.abs()));
        }
    }
    Ok(SuiteOutcome {
        report: LemmaReport { lemma: lemma.id(), instances, min_margin, seed },
        hypothesis_failures,
        touch_max_abs: touch_max,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lemma8Outcome {
    pub max_abs_g: f64,
    pub passed: bool,
}

/// max |g(z)| over the given functions and sample points; passes when at
/// most 1 + 1e−6.
pub fn check_lemma8(region: &Region, fs: &[&(dyn Fn(C64) -> C64 + Sync)], zs: &[C64]) -> Result<Lemma8Outcome> {
    let per_f = exec::map_indexed(fs.len(), |k| -> Result<f64> {
        let mut best: f64 = 0.0;
        for &z in zs {
            best = best.max(cauchy_transform_g_with(fs[k], region, z)?.norm());
        }
        Ok(best)
    });
    let mut max_abs_g: f64 = 0.0;
    for v in per_f {
        max_abs_g = max_abs_g.max(v?);
    }
    Ok(Lemma8Outcome { max_abs_g, passed: max_abs_g <= 1.0 + 1e-6 })
}

/// Half interior points (uniform in area) and half boundary nodes.
pub fn annulus_samples(region: &Region, big_r: f64, count: usize, rng: &mut TestRng) -> Vec<C64> {
    let r = 1.0 / big_r;
    let nodes = region.nodes();
    (0..count)
        .map(|k| {
            if k % 2 == 0 {
                let rad = (r * r + (big_r * big_r - r * r) * rng.random::<f64>()).sqrt();
                C64::from_polar(rad, TAU * rng.random::<f64>())
            } else {
                nodes[rng.random_range(0..nodes.len())].point
            }
        })
        .collect()
}

/// Lemma 8 suite on the annulus 1/R < |z| < R with seeded random rational f.
pub fn lemma8_suite(big_r: f64, functions: usize, samples: usize, seed: u64) -> Result<LemmaReport> {
    let region = Region::annulus(big_r)?;
    let family = random_family(&region, &FamilySpec::default(), functions, seed)?;
    let mut r = rng(seed.wrapping_add(1));
    let zs = annulus_samples(&region, big_r, samples, &mut r);
    let closures: Vec<Box<dyn Fn(C64) -> C64 + Sync>> =
        family.iter().map(|f| Box::new(move |z| f.eval(z)) as Box<dyn Fn(C64) -> C64 + Sync>).collect();
    let refs: Vec<&(dyn Fn(C64) -> C64 + Sync)> = closures.iter().map(|b| b.as_ref()).collect();
    let outcome = check_lemma8(&region, &refs, &zs)?;
    Ok(LemmaReport { lemma: 8, instances: functions * samples, min_margin: 1.0 + 1e-6 - outcome.max_abs_g, seed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::grcar;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn norm_lemma_with_scalar_multiple_of_identity() {
        let omega = c(0.2, -0.1);
        let a = ComplexMatrix::identity(3).scale(omega);
        let e = C64::from_polar(1.0, 0.7);
        let inst = LemmaInstance { a, omega, r: 2.0, sigma: omega + e * 2.0, tangent: c(0.0, 1.0) * e };
        let check = check_lemma(Lemma::Norm, &inst).unwrap();
        assert!(check.passed);
        // λ_min = 1/(πR) at the centre, twice the bound.
        assert!((check.lambda_min - 1.0 / (2.0 * PI)).abs() < 1e-14);
    }

    #[test]
    fn half_plane_touch_gives_zero() {
        let a = grcar(8);
        for theta in [0.0, 1.0, 2.5, 4.0] {
            let p = support_point(&a, theta);
            let inst = LemmaInstance {
                a: a.clone(),
                omega: c(0.0, 0.0),
                r: 0.0,
                sigma: p,
                tangent: c(0.0, 1.0) * C64::from_polar(1.0, theta),
            };
            let check = check_lemma(Lemma::HalfPlane, &inst).unwrap();
            assert!(check.hypothesis_met);
            assert!(check.lambda_min.abs() < 1e-8, "{}", check.lambda_min);
        }
    }

    #[test]
    fn unmet_hypothesis_is_not_a_pass() {
        let a = grcar(6);
        let e = c(1.0, 0.0);
        let inst = LemmaInstance { a, omega: c(0.0, 0.0), r: 1.0, sigma: e, tangent: c(0.0, 1.0) };
        let check = check_lemma(Lemma::Norm, &inst).unwrap();
        assert!(!check.hypothesis_met);
        assert!(!check.passed);
    }

    #[test]
    fn small_suites_pass() {
        for lemma in Lemma::ALL {
            let out = lemma_suite(lemma, 60, 7).unwrap();
            assert_eq!(out.hypothesis_failures, 0, "{lemma:?}");
            assert!(out.report.passed(), "{lemma:?}: {}", out.report.min_margin);
        }
    }

    #[test]
    fn lemma8_constant_function() {
        let region = Region::annulus(2.0).unwrap();
        let one = |_: C64| c(1.0, 0.0);
        let zs = [c(1.0, 0.0), c(0.0, -1.5), region.nodes()[3].point];
        let out = check_lemma8(&region, &[&one], &zs).unwrap();
        assert!((out.max_abs_g - 1.0).abs() < 1e-12);
    }
}

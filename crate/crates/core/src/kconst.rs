//! K-spectral constants: the catalog of closed-form values, the general
//! formula K = c₂ + √(c₂² + c₁ + γ̂), and certificates tying a constant to
//! the operator facts that were verified for it.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{numerical_radius, numrange_margin_disk, numrange_margin_polygon};
use crate::matrix::{logm, ComplexMatrix, C64};
use crate::potential::{check_spectrum, gamma_hat_integral, HYPOTHESIS_SLACK};
use crate::quadrature::integrate;
use crate::regions::{c1_estimate, ConvexOuter, Region, Shape};

pub const ONE_PLUS_SQRT2: f64 = 1.0 + SQRT_2;

pub fn three_plus_two_sqrt3() -> f64 {
    3.0 + 2.0 * 3f64.sqrt()
}

pub fn three_plus_sqrt10() -> f64 {
    3.0 + 10f64.sqrt()
}

/// Interval ends for the piecewise annulus bound.
pub const BREAKPOINTS: [f64; 3] = [1.8837, 2.3639, 2.3912];

/// K = c₂ + √(c₂² + c₁ + γ̂).
pub fn theorem2_k(c1: f64, c2: f64, gamma_hat: f64) -> Result<f64> {
    for (name, value) in [("c1", c1), ("c2", c2), ("gamma_hat", gamma_hat)] {
        if !(value >= 0.0) {
            return Err(Error::NegativeInput { name, value });
        }
    }
    Ok(c2 + (c2 * c2 + c1 + gamma_hat).sqrt())
}

fn check_r(r: f64) -> Result<()> {
    if r > 1.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::DivergentInput(r))
    }
}

/// ψ(R) = Σ_{n≥1} 4/(R^{2n} − 1), summed until a term drops below 1e−14.
pub fn psi(r: f64) -> Result<f64> {
    check_r(r)?;
    let r2 = r * r;
    let mut power = r2;
    let mut sum = 0.0;
    for _ in 0..100_000 {
        let term = 4.0 / (power - 1.0);
        sum += term;
        if term < 1e-14 {
            break;
        }
        power *= r2;
    }
    Ok(sum)
}

/// 4 + (2/π)∫₀^π |(R² + e^{iθ})/(R² − e^{iθ})| dθ.
pub fn k_r_integral(r: f64) -> Result<f64> {
    check_r(r)?;
    let r2 = r * r;
    let integrand = |theta: f64| {
        let e = C64::from_polar(1.0, theta);
        ((r2 + e) / (r2 - e)).norm()
    };
    Ok(4.0 + 2.0 / PI * integrate(integrand, 0.0, PI, 1e-13, 1e-13))
}

fn k_r_piece(piece: usize, r: f64) -> Result<f64> {
    Ok(match piece {
        0 => three_plus_sqrt10(),
        1 => k_r_integral(r)?,
        2 => 4.0 + 2.0 * psi(r)?,
        _ => 6.0,
    })
}

/// Best known upper bound on K for the annulus 1/R < |z| < R under
/// numerical-radius hypotheses. The breakpoints are data; at a breakpoint
/// the smaller of the two adjacent formulas is returned.
pub fn k_r_piecewise(r: f64) -> Result<f64> {
    check_r(r)?;
    if let Some(k) = BREAKPOINTS.iter().position(|&b| b == r) {
        return Ok(k_r_piece(k, r)?.min(k_r_piece(k + 1, r)?));
    }
    let piece = BREAKPOINTS.iter().take_while(|&&b| b < r).count();
    k_r_piece(piece, r)
}

/// γ(R) = 2(1 − R⁻²)∏_{n≥1}((1 − R^{−8n})/(1 − R^{4−8n}))², a lower bound
/// for the optimal annulus constant.
pub fn gamma_lower(r: f64) -> Result<f64> {
    check_r(r)?;
    let inv = 1.0 / r;
    let mut product = 1.0;
    for n in 1..1_000_000 {
        let n = n as f64;
        let factor = (1.0 - inv.powf(8.0 * n)) / (1.0 - inv.powf(8.0 * n - 4.0));
        product *= factor * factor;
        if (factor - 1.0).abs() < 1e-15 {
            break;
        }
    }
    Ok(2.0 * (1.0 - inv * inv) * product)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    ConvexNumrange,
    Disk,
    AnnulusNorm,
    AnnulusNumradius,
    TwoDisks,
    Cutout,
    ExpLogNumrange,
    GenericTheorem2,
}

/// One verified operator fact: `value` (relation) `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// "<=" or "<".
    pub relation: String,
}

impl Hypothesis {
    fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, relation: "<=".into() }
    }

    fn below(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, relation: "<".into() }
    }

    /// Non-strict comparisons get a relative slack of 1e−10.
    pub fn holds(&self) -> bool {
        let slack = HYPOTHESIS_SLACK * self.threshold.abs().max(1.0);
        match self.relation.as_str() {
            "<" => self.value < self.threshold,
            _ => self.value <= self.threshold + slack,
        }
    }

    fn describe(&self) -> String {
        format!("{}: {} {} {} fails", self.name, self.value, self.relation, self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KCertificate {
    #[serde(rename = "K")]
    pub k: f64,
    pub region_kind: RegionKind,
    pub hypotheses: Vec<Hypothesis>,
    pub provenance: String,
}

impl KCertificate {
    /// Builds the certificate only when every hypothesis holds.
    pub fn issue(k: f64, region_kind: RegionKind, hypotheses: Vec<Hypothesis>, provenance: &str) -> Result<Self> {
        let failed: Vec<String> = hypotheses.iter().filter(|h| !h.holds()).map(Hypothesis::describe).collect();
        if !failed.is_empty() {
            return Err(Error::NoApplicableResult { failed });
        }
        if !(k >= 1.0) {
            return Err(Error::InvalidArgument(format!("spectral constant {k} is below 1")));
        }
        Ok(Self { k, region_kind, hypotheses, provenance: provenance.to_string() })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn inverse_shift(a: &ComplexMatrix, c: C64) -> Result<ComplexMatrix> {
    a.shift(-c).inverse()
}

fn disk_routes(a: &ComplexMatrix, center: C64, radius: f64) -> Vec<Result<KCertificate>> {
    let norm = a.shift(-center).operator_norm();
    let von_neumann = KCertificate::issue(
        1.0,
        RegionKind::Disk,
        vec![Hypothesis::at_most("||A - wI||", norm, radius)],
        "von Neumann inequality for a contraction on a disk",
    );
    let margin = numrange_margin_disk(a, center, radius);
    let numrange = KCertificate::issue(
        ONE_PLUS_SQRT2,
        RegionKind::ConvexNumrange,
        vec![Hypothesis::at_most("w(A - wI)", radius - margin, radius)],
        "a convex domain containing W(A) is (1+sqrt 2)-spectral",
    );
    vec![von_neumann, numrange]
}

fn annulus_routes(a: &ComplexMatrix, center: C64, inner: f64, outer: f64) -> Result<Vec<Result<KCertificate>>> {
    let shifted = a.shift(-center);
    let inv = inverse_shift(a, center)?;
    // Rescaling z ↦ (z − c)/√(inner·outer) maps the annulus onto 1/R′ < |z| < R′.
    let r_eff = (outer / inner).sqrt();
    let norm = KCertificate::issue(
        ONE_PLUS_SQRT2,
        RegionKind::AnnulusNorm,
        vec![
            Hypothesis::at_most("||A - cI||", shifted.operator_norm(), outer),
            Hypothesis::at_most("||(A - cI)^-1||", inv.operator_norm(), 1.0 / inner),
        ],
        "annulus with norm bounds on A - cI and its inverse",
    );
    let k = three_plus_sqrt10().min(k_r_piecewise(r_eff)?);
    let numradius = KCertificate::issue(
        k,
        RegionKind::AnnulusNumradius,
        vec![
            Hypothesis::at_most("w(A - cI)", numerical_radius(&shifted), outer),
            Hypothesis::at_most("w((A - cI)^-1)", numerical_radius(&inv), 1.0 / inner),
        ],
        "annulus with numerical-radius bounds, best of the piecewise K(R) estimates",
    );
    Ok(vec![norm, numradius])
}

fn cutout_routes(
    a: &ComplexMatrix,
    outer: &ConvexOuter,
    hole_center: C64,
    hole_radius: f64,
) -> Result<Vec<Result<KCertificate>>> {
    let big_r = 1.0 / hole_radius;
    let inv = inverse_shift(a, hole_center)?;
    let margin = match outer {
        ConvexOuter::Polygon { polygon } => numrange_margin_polygon(a, polygon),
        ConvexOuter::Disk { center, radius } => numrange_margin_disk(a, *center, *radius),
    };
    let mut routes = vec![KCertificate::issue(
        three_plus_two_sqrt3(),
        RegionKind::Cutout,
        vec![
            Hypothesis::below("distance of closure W(A) outside the convex part", -margin, 0.0),
            Hypothesis::at_most("w((A - wI)^-1)", numerical_radius(&inv), big_r),
        ],
        "convex domain containing closure W(A) minus a disk, numerical radius bound on the resolvent at the hole centre",
    )];
    if let ConvexOuter::Disk { center, radius } = outer {
        routes.push(KCertificate::issue(
            ONE_PLUS_SQRT2,
            RegionKind::TwoDisks,
            vec![
                Hypothesis::at_most("||A - w1 I||", a.shift(-*center).operator_norm(), *radius),
                Hypothesis::at_most("||(A - w2 I)^-1||", inv.operator_norm(), big_r),
            ],
            "intersection of two disks of the Riemann sphere with norm bounds",
        ));
    }
    Ok(routes)
}

fn exp_image_route(a: &ComplexMatrix, log_polygon: &crate::geometry::ConvexPolygon) -> Result<KCertificate> {
    let log_a = logm(a)?;
    let margin = numrange_margin_polygon(&log_a, log_polygon);
    KCertificate::issue(
        ONE_PLUS_SQRT2,
        RegionKind::ExpLogNumrange,
        vec![Hypothesis::at_most("distance of W(log A) outside the log-plane polygon", -margin, 0.0)],
        "exp of a convex set containing W(log A), image of a (1+sqrt 2)-spectral set under exp",
    )
}

/// Smallest applicable catalog constant for A on the region.
pub fn certify(a: &ComplexMatrix, region: &Region) -> Result<KCertificate> {
    if !region.is_bounded() {
        return Err(Error::NoApplicableResult {
            failed: vec![format!("{} region is unbounded", region.shape().kind())],
        });
    }
    check_spectrum(a, region)?;
    let routes: Vec<Result<KCertificate>> = match region.shape() {
        Shape::Disk { center, radius } => disk_routes(a, *center, *radius),
        Shape::Annulus { center, inner, outer } => annulus_routes(a, *center, *inner, *outer)?,
        Shape::Convex { polygon } => {
            let margin = numrange_margin_polygon(a, polygon);
            vec![KCertificate::issue(
                ONE_PLUS_SQRT2,
                RegionKind::ConvexNumrange,
                vec![Hypothesis::at_most("distance of W(A) outside the polygon", -margin, 0.0)],
                "a convex domain containing W(A) is (1+sqrt 2)-spectral",
            )]
        }
        Shape::Cutout { outer, hole_center, hole_radius } => cutout_routes(a, outer, *hole_center, *hole_radius)?,
        Shape::ExpImage { log_polygon } => vec![exp_image_route(a, log_polygon)],
        Shape::ExteriorDisk { .. } => unreachable!("unbounded regions are rejected above"),
    };
    let mut failed = Vec::new();
    let mut best: Option<KCertificate> = None;
    for route in routes {
        match route {
            Ok(cert) => {
                if best.as_ref().is_none_or(|b| cert.k < b.k) {
                    best = Some(cert);
                }
            }
            Err(Error::NoApplicableResult { failed: f }) => failed.extend(f),
            Err(e) => return Err(e),
        }
    }
    best.ok_or(Error::NoApplicableResult { failed })
}

/// Constants entering the general formula, computed by quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Inputs {
    pub c1: f64,
    pub c2: f64,
    pub delta: f64,
    pub gamma_hat: f64,
}

/// K from c₁ (the region), c₂ = 1 + δ/2 and γ̂, valid for any region
/// containing Sp(A). The constants are quadrature values, so the result is
/// a numerical rather than a closed-form certificate.
pub fn certify_generic(a: &ComplexMatrix, region: &Region) -> Result<(KCertificate, Theorem2Inputs)> {
    let report = gamma_hat_integral(a, region, &[])?;
    let c1 = c1_estimate(region).value;
    let c2 = 1.0 + report.delta / 2.0;
    let inputs = Theorem2Inputs { c1, c2, delta: report.delta, gamma_hat: report.gamma_hat };
    let k = theorem2_k(c1, c2.max(0.0), report.gamma_hat)?;
    let cert = KCertificate::issue(
        k,
        RegionKind::GenericTheorem2,
        vec![Hypothesis::at_most("-delta", -report.delta, 2.0)],
        "general boundary-integral bound with quadrature values of c1, delta and gamma-hat",
    )?;
    Ok((cert, inputs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::grcar;
    use crate::geometry::numerical_range_boundary;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn theorem2_examples() {
        assert!((theorem2_k(1.0, 1.0, 0.0).unwrap() - ONE_PLUS_SQRT2).abs() < 1e-15);
        assert!((theorem2_k(3.0, 3.0, 0.0).unwrap() - three_plus_two_sqrt3()).abs() < 1e-14);
        assert!((theorem2_k(1.0, 3.0, 0.0).unwrap() - three_plus_sqrt10()).abs() < 1e-14);
        assert!(matches!(theorem2_k(-1.0, 1.0, 0.0), Err(Error::NegativeInput { name: "c1", .. })));
    }

    #[test]
    fn psi_matches_partial_sums() {
        let oracle: f64 = (1..=50).map(|n| 4.0 / (4f64.powi(n) - 1.0)).sum();
        assert!((psi(2.0).unwrap() - oracle).abs() < 1e-14);
        assert!(psi(100.0).unwrap() < 4.1e-4);
        assert!(psi(2.0).unwrap() > psi(3.0).unwrap());
        assert!(matches!(psi(1.0), Err(Error::DivergentInput(_))));
    }

    #[test]
    fn piecewise_values() {
        assert_eq!(k_r_piecewise(1.5).unwrap(), three_plus_sqrt10());
        assert_eq!(k_r_piecewise(3.0).unwrap(), 6.0);
        assert_eq!(k_r_piecewise(2.38).unwrap(), 4.0 + 2.0 * psi(2.38).unwrap());
        let at = k_r_piecewise(BREAKPOINTS[2]).unwrap();
        assert!(at <= 6.0);
    }

    #[test]
    fn gamma_lower_values() {
        for r in [1.1, 2.0, 10.0] {
            assert!(gamma_lower(r).unwrap() <= 2.0);
        }
        let far = gamma_lower(1000.0).unwrap();
        assert!((far - 2.0 * (1.0 - 1e-6)).abs() < 1e-10);
    }

    #[test]
    fn von_neumann_on_unit_disk() {
        let a = grcar(6).scale(c(0.2, 0.0));
        let disk = Region::disk(c(0.0, 0.0), 1.0).unwrap();
        let cert = certify(&a, &disk).unwrap();
        assert_eq!(cert.k, 1.0);
        assert_eq!(cert.region_kind, RegionKind::Disk);
    }

    #[test]
    fn normal_matrix_with_mismatched_hypotheses() {
        // Spectrum inside a small annulus but ‖A‖ and w(A) exceed its radius.
        let a = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(5.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]).unwrap();
        let annulus = Region::annulus(1.5).unwrap();
        assert!(matches!(certify(&a, &annulus), Err(Error::NoApplicableResult { .. })));
    }

    #[test]
    fn convex_numrange_certificate() {
        let a = grcar(10);
        let poly = numerical_range_boundary(&a, 64).unwrap().circumscribed_polygon(1e-6).unwrap();
        let cert = certify(&a, &Region::convex(poly)).unwrap();
        assert_eq!(cert.k, ONE_PLUS_SQRT2);
        let json = cert.to_json().unwrap();
        assert!(json.contains("\"K\"") && json.contains("convex-numrange"));
    }

    #[test]
    fn generic_certificate_for_convex_hull() {
        let a = grcar(5);
        let poly = numerical_range_boundary(&a, 64).unwrap().circumscribed_polygon(0.05).unwrap();
        let (cert, inputs) = certify_generic(&a, &Region::convex(poly)).unwrap();
        assert!(inputs.delta <= 1e-8);
        assert!((inputs.c1 - 1.0).abs() < 1e-10);
        assert!(cert.k >= 1.0);
    }
}

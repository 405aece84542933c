//! Rational functions p(z)/∏(z − ξ_j)^{m_j} and seeded random families of
//! them normalized to sup |f| ≤ 1 on a region boundary.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::random::{gaussian, TestRng};
use crate::matrix::{ComplexMatrix, C64};
use crate::regions::Region;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub at: C64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    /// Numerator coefficients, ascending degree.
    pub numerator: Vec<C64>,
    pub poles: Vec<Pole>,
    pub scale: C64,
}

fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

impl RationalFunction {
    pub fn new(numerator: Vec<C64>, poles: Vec<Pole>) -> Self {
        Self { numerator, poles, scale: C64::new(1.0, 0.0) }
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c], Vec::new())
    }

    pub fn polynomial(coeffs: Vec<C64>) -> Self {
        Self::new(coeffs, Vec::new())
    }

    /// Simple poles at each listed point.
    pub fn with_simple_poles(numerator: Vec<C64>, poles: &[C64]) -> Self {
        Self::new(numerator, poles.iter().map(|&at| Pole { at, multiplicity: 1 }).collect())
    }

    pub fn scaled(mut self, s: C64) -> Self {
        self.scale *= s;
        self
    }

    pub fn numerator_degree(&self) -> usize {
        self.numerator.len().saturating_sub(1)
    }

    pub fn denominator(&self, z: C64) -> C64 {
        self.poles.iter().fold(C64::new(1.0, 0.0), |acc, p| acc * (z - p.at).powu(p.multiplicity as u32))
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.scale * horner(&self.numerator, z) / self.denominator(z)
    }

    /// f(A) = scale · p(A) · ∏(A − ξ_j I)^{−m_j}.
    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = a.dim();
        let mut acc = ComplexMatrix::zeros(n);
        for &c in self.numerator.iter().rev() {
            acc = (&acc * a).shift(c);
        }
        let mut m = acc.into_inner();
        for p in &self.poles {
            let shifted = a.shift(-p.at);
            let lu = shifted.lu().map_err(|_| Error::PoleHitsSpectrum(p.at))?;
            for _ in 0..p.multiplicity {
                m = lu.solve_mat(&m);
            }
        }
        ComplexMatrix::new(m * self.scale)
    }

    /// PoleInRegion if a pole lies in the closed region (margin 1e−9·diam).
    pub fn check_pole_free(&self, region: &Region) -> Result<()> {
        let margin = 1e-9 * region.diameter();
        for p in &self.poles {
            if region.contains(p.at) || region.distance_to_boundary(p.at) < margin {
                return Err(Error::PoleInRegion { pole: p.at });
            }
        }
        Ok(())
    }
}

/// sup |h| over the region boundary: maximum over the 4×-dense node set,
/// then golden-section refinement along the piece around the largest values.
pub fn boundary_sup(h: &dyn Fn(C64) -> C64, region: &Region) -> Result<f64> {
    let dense = region.refined(4);
    let nodes = dense.nodes();
    let mut values = Vec::with_capacity(nodes.len());
    for n in nodes {
        let v = h(n.point);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::NonFiniteValue(n.point));
        }
        values.push(v.norm());
    }
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut best = values[order[0]];
    for &k in order.iter().take(8) {
        let node = nodes[k];
        let piece = &region.pieces()[node.piece].0;
        let mut lo = nodes[k.saturating_sub(1)].t.min(node.t);
        let mut hi = nodes[(k + 1).min(nodes.len() - 1)].t.max(node.t);
        if nodes[k.saturating_sub(1)].piece != node.piece {
            lo = 0.0;
        }
        if nodes[(k + 1).min(nodes.len() - 1)].piece != node.piece {
            hi = 1.0;
        }
        let f = |t: f64| h(piece.point(t)).norm();
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        let (mut f1, mut f2) = (f(x1), f(x2));
        for _ in 0..60 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = f(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = f(x1);
            }
            best = best.max(f1).max(f2);
        }
    }
    Ok(best)
}

/// Settings of the random bounded family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub max_numerator_degree: usize,
    pub max_poles: usize,
    /// Poles keep at least this fraction of the region diameter away from ∂Ω.
    pub pole_clearance: f64,
    /// Functions are scaled to sup |f| = 1 − margin on the boundary.
    pub margin: f64,
}

impl Default for FamilySpec {
    fn default() -> Self {
        Self { max_numerator_degree: 8, max_poles: 4, pole_clearance: 0.1, margin: 1e-6 }
    }
}

fn random_pole(region: &Region, clearance: f64, rng: &mut TestRng) -> Result<C64> {
    let diam = region.diameter();
    let (center, holes) = region_center_and_holes(region);
    for _ in 0..10_000 {
        let z = if !holes.is_empty() && rng.random_bool(0.5) {
            let (c, r) = holes[rng.random_range(0..holes.len())];
            c + C64::from_polar(r * rng.random::<f64>().sqrt(), std::f64::consts::TAU * rng.random::<f64>())
        } else {
            center
                + C64::from_polar(diam * (0.5 + 1.5 * rng.random::<f64>()), std::f64::consts::TAU * rng.random::<f64>())
        };
        if !region.contains(z) && region.distance_to_boundary(z) >= clearance * diam {
            return Ok(z);
        }
    }
    Err(Error::InvalidRegion("could not place a pole away from the region".into()))
}

fn region_center_and_holes(region: &Region) -> (C64, Vec<(C64, f64)>) {
    use crate::regions::{ConvexOuter, Shape};
    match region.shape() {
        Shape::Disk { center, .. } | Shape::ExteriorDisk { center, .. } => (*center, Vec::new()),
        Shape::Annulus { center, inner, .. } => (*center, vec![(*center, *inner)]),
        Shape::Convex { polygon } => (polygon.centroid(), Vec::new()),
        Shape::Cutout { outer, hole_center, hole_radius } => {
            let c = match outer {
                ConvexOuter::Polygon { polygon } => polygon.centroid(),
                ConvexOuter::Disk { center, .. } => *center,
            };
            (c, vec![(*hole_center, *hole_radius)])
        }
        Shape::ExpImage { log_polygon } => (log_polygon.centroid().exp(), vec![(C64::new(0.0, 0.0), 0.0)]),
    }
}

/// One random rational function normalized to sup_{∂Ω} |f| = 1 − margin.
pub fn random_bounded(region: &Region, spec: &FamilySpec, rng: &mut TestRng) -> Result<RationalFunction> {
    let degree = rng.random_range(0..=spec.max_numerator_degree);
    let n_poles = rng.random_range(0..=spec.max_poles);
    let numerator: Vec<C64> = (0..=degree).map(|_| gaussian(rng)).collect();
    let mut poles = Vec::with_capacity(n_poles);
    for _ in 0..n_poles {
        poles.push(Pole { at: random_pole(region, spec.pole_clearance, rng)?, multiplicity: 1 });
    }
    let f = RationalFunction::new(numerator, poles);
    let sup = boundary_sup(&|z| f.eval(z), region)?;
    if !(sup > 0.0) {
        return random_bounded(region, spec, rng);
    }
    Ok(f.scaled(C64::new((1.0 - spec.margin) / sup, 0.0)))
}

/// `count` functions from a fixed seed.
pub fn random_family(region: &Region, spec: &FamilySpec, count: usize, seed: u64) -> Result<Vec<RationalFunction>> {
    let mut rng = crate::matrix::random::rng(seed);
    (0..count).map(|_| random_bounded(region, spec, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::grcar;
    use crate::matrix::matrix_function;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eval_is_numerator_over_denominator() {
        let f = RationalFunction::with_simple_poles(vec![c(1.0, 0.0), c(0.0, 2.0)], &[c(3.0, 0.0), c(0.0, -1.0)])
            .scaled(c(0.5, 0.0));
        let z = c(0.3, 0.7);
        let expected = c(0.5, 0.0) * (c(1.0, 0.0) + c(0.0, 2.0) * z) / ((z - 3.0) * (z - c(0.0, -1.0)));
        assert!((f.eval(z) - expected).norm() < 1e-15);
    }

    #[test]
    fn apply_matches_matrix_function() {
        let a = grcar(6);
        let f = RationalFunction::new(
            vec![c(1.0, 0.0), c(-0.5, 0.1), c(0.2, 0.0)],
            vec![Pole { at: c(5.0, 0.0), multiplicity: 2 }, Pole { at: c(0.0, 4.0), multiplicity: 1 }],
        );
        let fa = f.apply(&a).unwrap();
        let reference = matrix_function(&a, &|z| f.eval(z)).unwrap();
        assert!((&fa - &reference).operator_norm() < 1e-10 * reference.operator_norm());
    }

    #[test]
    fn family_is_bounded_and_pole_free() {
        let region = Region::annulus(2.0).unwrap();
        let fam = random_family(&region, &FamilySpec::default(), 10, 7).unwrap();
        for f in &fam {
            f.check_pole_free(&region).unwrap();
            let sup = boundary_sup(&|z| f.eval(z), &region.refined(4)).unwrap();
            assert!(sup <= 1.0 && sup > 0.999);
        }
        let again = random_family(&region, &FamilySpec::default(), 10, 7).unwrap();
        assert_eq!(fam, again);
    }

    #[test]
    fn pole_in_region_is_reported() {
        let region = Region::disk(c(0.0, 0.0), 1.0).unwrap();
        let f = RationalFunction::with_simple_poles(vec![c(1.0, 0.0)], &[c(0.5, 0.0)]);
        assert!(matches!(f.check_pole_free(&region), Err(Error::PoleInRegion { .. })));
    }
}

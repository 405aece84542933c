//! Numerical range, numerical radius and convex polygons.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::matrix::{hermitian_eig_unchecked, lambda_max, logm, ComplexMatrix, C64};

/// Sampled boundary of W(A): support function h(θ) = max Re(e^{−iθ}W(A))
/// and the supporting points p(θ) on a uniform angle grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NumericalRangeBoundary {
    pub angles: Vec<f64>,
    pub points: Vec<C64>,
    pub support_values: Vec<f64>,
}

/// Hermitian and skew parts so that Herm(e^{−iθ}A) = cos θ·Hr + sin θ·Hi.
#[derive(Debug, Clone)]
pub struct RotatedHermitian {
    hr: DMatrix<C64>,
    hi: DMatrix<C64>,
}

impl RotatedHermitian {
    pub fn new(a: &ComplexMatrix) -> Self {
        Self { hr: a.hermitian_part().into_inner(), hi: a.skew_hermitian_part().into_inner() }
    }

    pub fn at(&self, theta: f64) -> DMatrix<C64> {
        let (s, c) = theta.sin_cos();
        &self.hr * C64::new(c, 0.0) + &self.hi * C64::new(s, 0.0)
    }

    /// h(θ) = λ_max(Herm(e^{−iθ}A)).
    pub fn support(&self, theta: f64) -> f64 {
        lambda_max(&self.at(theta))
    }
}

pub fn support_function(a: &ComplexMatrix, theta: f64) -> f64 {
    RotatedHermitian::new(a).support(theta)
}

pub fn numerical_range_boundary(a: &ComplexMatrix, n_theta: usize) -> Result<NumericalRangeBoundary> {
    if n_theta < 8 {
        return Err(Error::InvalidArgument(format!("need at least 8 boundary angles, got {n_theta}")));
    }
    let rot = RotatedHermitian::new(a);
    let angles: Vec<f64> = (0..n_theta).map(|k| TAU * k as f64 / n_theta as f64).collect();
    let samples = exec::map_indexed(n_theta, |k| {
        let eig = hermitian_eig_unchecked(&rot.at(angles[k]));
        let v = eig.top_vector();
        let av = a.mul_vec(&v);
        (v.dotc(&av), eig.max())
    });
    let (points, support_values) = samples.into_iter().unzip();
    Ok(NumericalRangeBoundary { angles, points, support_values })
}

impl NumericalRangeBoundary {
    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Half-plane membership: Re(e^{−iθ_k}z) ≤ h_k + tol for every k.
    pub fn contains(&self, z: C64, tol: f64) -> bool {
        self.angles.iter().zip(&self.support_values).all(|(&t, &h)| (C64::from_polar(1.0, -t) * z).re <= h + tol)
    }

    /// Polygon cut out by the support lines, each pushed outward by `inflate`.
    /// It contains W(A) whenever the support values are exact.
    pub fn circumscribed_polygon(&self, inflate: f64) -> Result<ConvexPolygon> {
        let h: Vec<f64> = self.support_values.iter().map(|h| h + inflate).collect();
        ConvexPolygon::from_support_lines(&self.angles, &h)
    }

    pub fn diameter(&self) -> f64 {
        let n = self.len();
        (0..n / 2 + 1)
            .map(|k| {
                let opposite = (k + n / 2) % n;
                self.support_values[k] + self.support_values[opposite]
            })
            .fold(0.0, f64::max)
    }

    /// CSV with header `theta,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta,re,im\n");
        for (t, p) in self.angles.iter().zip(&self.points) {
            out.push_str(&format!("{t:.17e},{:.17e},{:.17e}\n", p.re, p.im));
        }
        out
    }
}

/// Numerical radius w(A) = max_θ h(θ): a uniform grid followed by
/// golden-section refinement around the best local maxima.
pub fn numerical_radius(a: &ComplexMatrix) -> f64 {
    let rot = RotatedHermitian::new(a);
    let n = 180;
    let step = TAU / n as f64;
    let grid = exec::map_indexed(n, |k| rot.support(k as f64 * step));
    let mut candidates: Vec<usize> =
        (0..n).filter(|&k| grid[k] >= grid[(k + n - 1) % n] && grid[k] >= grid[(k + 1) % n]).collect();
    candidates.sort_by(|&x, &y| grid[y].total_cmp(&grid[x]));
    candidates.truncate(4);
    let tol = 1e-10 * a.operator_norm().max(f64::MIN_POSITIVE);
    let refined = exec::map_indexed(candidates.len(), |c| {
        let k = candidates[c];
        let center = k as f64 * step;
        golden_max(|t| rot.support(t), center - step, center + step, tol).max(grid[k])
    });
    refined.into_iter().chain(grid.iter().copied()).fold(f64::NEG_INFINITY, f64::max)
}

/// Maximum of a unimodal function on [lo, hi] by golden-section search.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut best = f1.max(f2);
    for _ in 0..80 {
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
        if (f1 - f2).abs() <= tol && hi - lo <= 1e-9 {
            break;
        }
    }
    best
}

/// W(A) ⊂ closed disk(c, ρ) is equivalent to w(A − cI) ≤ ρ. Returns w(A − cI).
pub fn numerical_radius_about(a: &ComplexMatrix, c: C64) -> f64 {
    numerical_radius(&a.shift(-c))
}

/// min over edges of (edge support value − h_A(edge normal)): nonnegative iff
/// W(A) lies in the closed polygon, positive iff strictly inside.
pub fn numrange_margin_polygon(a: &ComplexMatrix, polygon: &ConvexPolygon) -> f64 {
    let rot = RotatedHermitian::new(a);
    let margins = exec::map_indexed(polygon.len(), |k| {
        let (p, q) = polygon.edge(k);
        let d = q - p;
        if d.norm() == 0.0 {
            return f64::INFINITY;
        }
        let theta = (d * C64::new(0.0, -1.0)).arg();
        let edge_support = (C64::from_polar(1.0, -theta) * p).re;
        edge_support - rot.support(theta)
    });
    margins.into_iter().fold(f64::INFINITY, f64::min)
}

/// radius − w(A − cI): nonnegative iff W(A) lies in the closed disk.
pub fn numrange_margin_disk(a: &ComplexMatrix, center: C64, radius: f64) -> f64 {
    radius - numerical_radius_about(a, center)
}

/// The curve exp(∂W(log A)) together with the log-plane boundary it came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpLogCurve {
    pub log_boundary: NumericalRangeBoundary,
    pub points: Vec<C64>,
}

pub fn exp_numrange_log(a: &ComplexMatrix, n_theta: usize) -> Result<ExpLogCurve> {
    let l = logm(a)?;
    let log_boundary = numerical_range_boundary(&l, n_theta)?;
    let points = log_boundary.points.iter().map(|p| p.exp()).collect();
    Ok(ExpLogCurve { log_boundary, points })
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    pub vertices: Vec<C64>,
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

impl ConvexPolygon {
    /// Validates counter-clockwise convexity (collinear vertices allowed).
    pub fn new(vertices: Vec<C64>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidRegion(format!("polygon needs at least 3 vertices, got {n}")));
        }
        if vertices.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidRegion("non-finite polygon vertex".into()));
        }
        let poly = ConvexPolygon { vertices };
        let d = poly.diameter();
        if !(poly.area() > 1e-14 * d * d) {
            return Err(Error::InvalidRegion("polygon is degenerate or clockwise".into()));
        }
        for k in 0..n {
            let e1 = poly.vertices[(k + 1) % n] - poly.vertices[k];
            let e2 = poly.vertices[(k + 2) % n] - poly.vertices[(k + 1) % n];
            if cross(e1, e2) < -1e-12 * d * d {
                return Err(Error::InvalidRegion(format!("polygon is not convex at vertex {}", (k + 1) % n)));
            }
        }
        Ok(poly)
    }

    /// Intersection of half-planes Re(e^{−iθ_k}z) ≤ h_k with increasing angles
    /// covering the circle (consecutive gaps below π).
    pub fn from_support_lines(angles: &[f64], h: &[f64]) -> Result<Self> {
        let n = angles.len();
        if n < 3 || h.len() != n {
            return Err(Error::InvalidArgument("need at least 3 support lines".into()));
        }
        let mut vertices = Vec::with_capacity(n);
        for k in 0..n {
            let j = (k + 1) % n;
            let (s1, c1) = angles[k].sin_cos();
            let (s2, c2) = angles[j].sin_cos();
            let det = c1 * s2 - s1 * c2;
            if det <= 0.0 {
                return Err(Error::InvalidArgument("support angles must increase by less than π".into()));
            }
            let x = (h[k] * s2 - h[j] * s1) / det;
            let y = (c1 * h[j] - c2 * h[k]) / det;
            vertices.push(C64::new(x, y));
        }
        ConvexPolygon::new(vertices)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edge(&self, k: usize) -> (C64, C64) {
        (self.vertices[k], self.vertices[(k + 1) % self.len()])
    }

    pub fn area(&self) -> f64 {
        (0..self.len())
            .map(|k| {
                let (a, b) = self.edge(k);
                cross(a, b)
            })
            .sum::<f64>()
            / 2.0
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.len())
            .map(|k| {
                let (a, b) = self.edge(k);
                (b - a).norm()
            })
            .sum()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for a in &self.vertices {
            for b in &self.vertices {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    /// Signed distance to the boundary: positive inside, negative outside
    /// (exact inside, a lower bound on the true distance outside).
    pub fn signed_distance(&self, z: C64) -> f64 {
        (0..self.len())
            .map(|k| {
                let (a, b) = self.edge(k);
                let e = b - a;
                cross(e, z - a) / e.norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, z: C64) -> bool {
        self.signed_distance(z) > 0.0
    }

    pub fn centroid(&self) -> C64 {
        self.vertices.iter().sum::<C64>() / self.len() as f64
    }

    pub fn translate(&self, c: C64) -> Self {
        ConvexPolygon { vertices: self.vertices.iter().map(|v| v + c).collect() }
    }
}

/// Angle of the counter-clockwise unit tangent at the support point with
/// outward normal e^{iθ}.
pub fn support_tangent(theta: f64) -> C64 {
    C64::from_polar(1.0, theta + PI / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::grcar;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn normal_matrix_gives_segment() {
        let a = ComplexMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let b = numerical_range_boundary(&a, 8).unwrap();
        for p in &b.points {
            assert!(p.im.abs() < 1e-12 && p.re.abs() <= 1.0 + 1e-12);
        }
        assert!((b.support_values[0] - 1.0).abs() < 1e-12);
        assert!((b.support_values[4] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nilpotent_gives_disk() {
        let a = ComplexMatrix::from_real_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        let b = numerical_range_boundary(&a, 64).unwrap();
        for (h, p) in b.support_values.iter().zip(&b.points) {
            assert!((h - 1.0).abs() < 1e-10);
            assert!((p.norm() - 1.0).abs() < 1e-10);
        }
        assert!((numerical_radius(&a) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn radius_of_diagonal() {
        let a = ComplexMatrix::diag(&[c(0.0, 2.0), c(1.0, 0.0)]);
        assert!((numerical_radius(&a) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn points_are_supporting() {
        let a = grcar(12);
        let b = numerical_range_boundary(&a, 64).unwrap();
        for k in 0..b.len() {
            let re = (C64::from_polar(1.0, -b.angles[k]) * b.points[k]).re;
            assert!((re - b.support_values[k]).abs() < 1e-10);
        }
        let poly = b.circumscribed_polygon(1e-9).unwrap();
        for lambda in a.eigenvalues().unwrap() {
            assert!(poly.contains(lambda));
        }
        for p in &b.points {
            assert!(poly.signed_distance(*p) > -1e-12);
        }
    }

    #[test]
    fn margin_of_circumscribed_polygon_is_the_inflation() {
        let a = grcar(10);
        let b = numerical_range_boundary(&a, 64).unwrap();
        let poly = b.circumscribed_polygon(1e-3).unwrap();
        assert!((numrange_margin_polygon(&a, &poly) - 1e-3).abs() < 1e-10);
        let w = numerical_radius(&a);
        assert!((numrange_margin_disk(&a, C64::new(0.0, 0.0), 2.0 * w) - w).abs() < 1e-9);
    }

    #[test]
    fn polygon_rejects_clockwise_and_nonconvex() {
        let sq = vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0)];
        assert!(ConvexPolygon::new(sq.clone()).is_ok());
        let mut cw = sq.clone();
        cw.reverse();
        assert!(ConvexPolygon::new(cw).is_err());
        let dart = vec![c(0.0, 0.0), c(2.0, 0.0), c(0.5, 0.5), c(0.0, 2.0)];
        assert!(ConvexPolygon::new(dart).is_err());
    }

    #[test]
    fn exp_log_of_positive_diagonal_is_real_segment() {
        let a = ComplexMatrix::diag(&[c(1.0, 0.0), c(std::f64::consts::E, 0.0)]);
        let curve = exp_numrange_log(&a, 16).unwrap();
        for p in &curve.points {
            assert!(p.im.abs() < 1e-10);
            assert!(p.re >= 1.0 - 1e-10 && p.re <= std::f64::consts::E + 1e-10);
        }
    }

    #[test]
    fn exp_log_of_scalar_is_point() {
        let z = c(2.0, 1.0);
        let a = ComplexMatrix::identity(3).scale(z);
        let curve = exp_numrange_log(&a, 16).unwrap();
        for p in &curve.points {
            assert!((p - z).norm() < 1e-10);
        }
    }
}

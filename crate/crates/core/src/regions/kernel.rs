//! Scalar double-layer kernel μ(σ, z) = (1/π) d arg(σ − z)/ds, its boundary
//! integrals, and the Cauchy transform g of conj(f).

use std::f64::consts::PI;

use super::{Node, Piece, Region};
use crate::error::{Error, Result};
use crate::exec;
use crate::matrix::C64;
use crate::rational::RationalFunction;

/// Largest density multiplier tried by the converging point integrals.
const MAX_DENSITY: usize = 64;

/// μ(σ, z) = (1/2πi)(σ′/(σ − z) − conj(σ′)/conj(σ − z)).
pub fn mu_scalar(sigma: C64, tangent: C64, z: C64) -> Result<f64> {
    let scale = sigma.norm().max(z.norm()).max(1.0);
    let d = sigma - z;
    if d.norm() < 1e-13 * scale {
        return Err(Error::CoincidentPoint(z));
    }
    let w = tangent / d;
    let value = (w - w.conj()) / C64::new(0.0, 2.0 * PI);
    debug_assert!(value.im.abs() <= 1e-14 * value.re.abs().max(1.0));
    Ok(value.re)
}

/// μ at a node, using the curvature limit κ/(2π) when z is the node itself.
pub fn mu_at_node(node: &Node, z: C64) -> f64 {
    mu_scalar(node.point, node.tangent, z).unwrap_or(node.curvature / (2.0 * PI))
}

/// Repeats `f` on successively doubled node sets until two values agree to
/// `tol` (relative to max(1, |value|)).
fn converge(region: &Region, tol: f64, f: impl Fn(&Region) -> C64) -> C64 {
    let mut prev = f(region);
    let mut density = 2;
    while density <= MAX_DENSITY {
        let next = f(&region.refined(density));
        if (next - prev).norm() <= tol * next.norm().max(1.0) {
            return next;
        }
        prev = next;
        density *= 2;
    }
    prev
}

/// ∫_{∂Ω} μ(σ, z) ds: 2 inside Ω, 1 at smooth boundary points, 0 outside.
pub fn gauss_integral(region: &Region, z: C64) -> f64 {
    converge(region, 1e-13, |r| {
        let s: f64 = r.nodes().iter().map(|n| mu_at_node(n, z) * n.weight).sum();
        C64::new(s, 0.0)
    })
    .re
}

/// g(z) for z in the closure of Ω, in the subtracted form
/// g(z) = ∫ (conj f(σ) − conj f(z)) μ(σ, z) ds + conj f(z),
/// which equals the Cauchy integral (1/2πi)∮ conj f(σ)/(σ − z) dσ inside Ω
/// and is the continuous extension on ∂Ω.
pub fn cauchy_transform_g_with(f: &dyn Fn(C64) -> C64, region: &Region, z: C64) -> Result<C64> {
    let scale = region.diameter();
    if !region.contains(z) && region.distance_to_boundary(z) > 1e-12 * scale {
        return Err(Error::InvalidArgument(format!("evaluation point {z} is outside the region")));
    }
    let fz = f(z).conj();
    let value = converge(region, 1e-12, |r| {
        r.nodes()
            .iter()
            .map(|n| {
                let d = (n.point - z).norm();
                if d < 1e-13 * scale.max(1.0) {
                    C64::new(0.0, 0.0)
                } else {
                    (f(n.point).conj() - fz) * mu_at_node(n, z) * n.weight
                }
            })
            .sum::<C64>()
    });
    Ok(value + fz)
}

pub fn cauchy_transform_g(f: &RationalFunction, region: &Region, z: C64) -> Result<C64> {
    f.check_pole_free(region)?;
    cauchy_transform_g_with(&|w| f.eval(w), region, z)
}

/// Direction from σ₀ to σ(t), replaced by ±σ′(t) when the two coincide.
fn direction(piece: &Piece, sigma0: C64, t: f64, forward: bool, tiny: f64) -> C64 {
    let d = piece.point(t) - sigma0;
    if d.norm() > tiny {
        d
    } else if forward {
        piece.tangent(t)
    } else {
        -piece.tangent(t)
    }
}

/// Sign-carrying part of μ: Im(σ′ conj(σ − σ₀)).
fn mu_numerator(piece: &Piece, sigma0: C64, t: f64) -> f64 {
    (piece.derivative(t) * (piece.point(t) - sigma0).conj()).im
}

fn turn(from: C64, to: C64) -> f64 {
    (to * from.conj()).arg().abs()
}

/// Total variation of arg(σ(t) − σ₀) over t ∈ [a, b], t taken modulo 1.
fn interval_variation(piece: &Piece, sigma0: C64, a: f64, b: f64, samples: usize, tiny: f64) -> f64 {
    let wrap = |t: f64| if t > 1.0 { t - 1.0 } else { t };
    let ts: Vec<f64> = (0..=samples).map(|k| a + (b - a) * k as f64 / samples as f64).collect();
    let dirs: Vec<C64> = ts.iter().enumerate().map(|(k, &t)| direction(piece, sigma0, wrap(t), k == 0, tiny)).collect();
    let signs: Vec<f64> = ts
        .iter()
        .map(|&t| {
            let d = piece.point(wrap(t)) - sigma0;
            if d.norm() <= tiny {
                0.0
            } else {
                mu_numerator(piece, sigma0, wrap(t)).signum()
            }
        })
        .collect();
    let mut total = 0.0;
    for k in 0..samples {
        if signs[k] * signs[k + 1] < 0.0 {
            let (mut lo, mut hi) = (ts[k], ts[k + 1]);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if mu_numerator(piece, sigma0, wrap(mid)).signum() == signs[k] {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let r = piece.point(wrap(0.5 * (lo + hi))) - sigma0;
            total += turn(dirs[k], r) + turn(r, dirs[k + 1]);
        } else {
            total += turn(dirs[k], dirs[k + 1]);
        }
    }
    total
}

fn variation_samples(piece: &Piece) -> usize {
    match piece {
        Piece::Segment { .. } => 1,
        Piece::ExpSegment { .. } => 64,
        Piece::Circle { .. } | Piece::Arc { .. } => 128,
    }
}

/// ∫ |μ(σ, σ₀)| ds over each piece, for σ₀ = point of piece `on` at parameter
/// `t0`. Computed exactly as (1/π)·(total variation of arg(σ − σ₀)), with
/// the turning points located by bisection.
pub fn abs_mu_integral_by_piece(region: &Region, on: usize, t0: f64) -> Vec<f64> {
    let pieces = region.pieces();
    let sigma0 = pieces[on].0.point(t0);
    let tiny = 1e-12 * region.diameter().max(1.0);
    pieces
        .iter()
        .enumerate()
        .map(|(k, (piece, _))| {
            let m = variation_samples(piece);
            let tv = if k == on {
                if piece.is_closed() {
                    interval_variation(piece, sigma0, t0, t0 + 1.0, 2 * m, tiny)
                } else {
                    interval_variation(piece, sigma0, 0.0, t0, m, tiny)
                        + interval_variation(piece, sigma0, t0, 1.0, m, tiny)
                }
            } else {
                interval_variation(piece, sigma0, 0.0, 1.0, m, tiny)
            };
            tv / PI
        })
        .collect()
}

pub fn abs_mu_integral(region: &Region, on: usize, t0: f64) -> f64 {
    abs_mu_integral_by_piece(region, on, t0).iter().sum()
}

/// Node quadrature of ∫ |μ(σ, σ₀)| ds at σ₀ = node `i`, with the curvature
/// limit at the singular node. Cross-check for [`abs_mu_integral`].
pub fn abs_mu_quadrature(region: &Region, i: usize) -> f64 {
    let nodes = region.nodes();
    let s0 = nodes[i].point;
    nodes
        .iter()
        .enumerate()
        .map(|(j, n)| {
            let mu = if j == i { n.curvature / (2.0 * PI) } else { mu_at_node(n, s0) };
            mu.abs() * n.weight
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct C1Estimate {
    pub value: f64,
    /// Boundary point where the maximum was attained.
    pub at: C64,
}

/// max over boundary nodes σ₀ of ∫ |μ(σ, σ₀)| ds.
pub fn c1_estimate(region: &Region) -> C1Estimate {
    let nodes = region.nodes();
    let values = exec::map_indexed(nodes.len(), |i| abs_mu_integral(region, nodes[i].piece, nodes[i].t));
    let (k, value) =
        values
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best });
    C1Estimate { value, at: nodes[k].point }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ConvexPolygon;
    use crate::regions::{ConvexOuter, Label};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn mu_on_circle_about_center() {
        let r = 3.0;
        for k in 0..8 {
            let phi = k as f64 * 0.7;
            let sigma = C64::from_polar(r, phi);
            let tangent = C64::from_polar(1.0, phi + PI / 2.0);
            let mu = mu_scalar(sigma, tangent, c(0.0, 0.0)).unwrap();
            assert!((mu - 1.0 / (PI * r)).abs() < 1e-15);
        }
        assert!(matches!(mu_scalar(c(1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)), Err(Error::CoincidentPoint(_))));
    }

    #[test]
    fn mu_closed_forms_on_annulus() {
        let big_r: f64 = 2.0;
        let r = 1.0 / big_r;
        for k in 0..12 {
            let theta = 0.3 + k as f64 * 0.5;
            // inner circle, clockwise: σ = r e^{−iθ}
            let sigma = C64::from_polar(r, -theta);
            let tangent = C64::from_polar(1.0, -theta - PI / 2.0);
            let mu = mu_scalar(sigma, tangent, c(r, 0.0)).unwrap();
            assert!((mu + big_r / (2.0 * PI)).abs() < 1e-13);
            // outer circle
            let sigma = C64::from_polar(big_r, theta);
            let tangent = C64::from_polar(1.0, theta + PI / 2.0);
            let mu = mu_scalar(sigma, tangent, c(r, 0.0)).unwrap();
            let r2 = big_r * big_r;
            let expected = big_r / PI * (r2 - theta.cos()) / (r2 * r2 - 2.0 * r2 * theta.cos() + 1.0);
            assert!((mu - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn gauss_integral_values() {
        let a = Region::annulus(2.0).unwrap();
        assert!((gauss_integral(&a, c(1.0, 0.3)) - 2.0).abs() < 1e-10);
        assert!(gauss_integral(&a, c(0.1, 0.0)).abs() < 1e-10);
        assert!(gauss_integral(&a, c(3.0, 0.0)).abs() < 1e-10);
        let sq = ConvexPolygon::new(vec![c(-1.0, -1.0), c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0)]).unwrap();
        let cut = Region::cutout(ConvexOuter::Polygon { polygon: sq }, c(-1.0, 0.0), 0.5).unwrap();
        assert!((gauss_integral(&cut, c(0.3, 0.2)) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn cauchy_transform_examples() {
        let disk = Region::disk(c(0.0, 0.0), 1.0).unwrap();
        let one = |_: C64| c(1.0, 0.0);
        assert!((cauchy_transform_g_with(&one, &disk, c(0.2, 0.1)).unwrap() - 1.0).norm() < 1e-12);
        // f(z) = z on the unit disk: conj f = 1/σ on the circle, g = 0 inside.
        let id = |z: C64| z;
        assert!(cauchy_transform_g_with(&id, &disk, c(0.0, 0.0)).unwrap().norm() < 1e-12);
        assert!(cauchy_transform_g_with(&id, &disk, c(0.3, -0.4)).unwrap().norm() < 1e-12);
        assert!(cauchy_transform_g_with(&id, &disk, c(2.0, 0.0)).is_err());
    }

    #[test]
    fn cauchy_subtracted_form_matches_direct_integral() {
        let a = Region::annulus(1.5).unwrap();
        let f = |z: C64| (z * 0.3).exp() / (z - c(3.0, 1.0));
        let z = c(0.2, 1.0);
        let direct: C64 =
            a.nodes().iter().map(|n| f(n.point).conj() / (n.point - z) * n.tangent * n.weight).sum::<C64>()
                / C64::new(0.0, 2.0 * PI);
        let g = cauchy_transform_g_with(&f, &a, z).unwrap();
        assert!((g - direct).norm() < 1e-12);
    }

    #[test]
    fn abs_mu_closed_forms_on_annulus() {
        for big_r in [1.2, 2.0, 4.0] {
            let a = Region::annulus(big_r).unwrap();
            let r: f64 = 1.0 / big_r;
            let outer = a.pieces().iter().position(|(_, l)| *l == Label::Outer).unwrap();
            let inner = a.pieces().iter().position(|(_, l)| *l == Label::Hole).unwrap();
            for t0 in [0.0, 0.13, 0.5] {
                let parts = abs_mu_integral_by_piece(&a, outer, t0);
                assert!((parts[inner] - 4.0 / PI * (r * r).asin()).abs() < 1e-12);
                assert!((parts[outer] - 1.0).abs() < 1e-12);
                let parts = abs_mu_integral_by_piece(&a, inner, t0);
                assert!((parts[outer] - 2.0).abs() < 1e-12);
            }
            assert!(c1_estimate(&a).value <= 3.0 + 1e-10);
        }
    }

    #[test]
    fn abs_mu_on_convex_is_one() {
        let sq = ConvexPolygon::new(vec![c(-1.0, -1.0), c(2.0, -1.0), c(1.0, 1.0), c(-1.0, 1.5)]).unwrap();
        let region = Region::convex(sq);
        for (i, n) in region.nodes().iter().enumerate().step_by(7) {
            assert!((abs_mu_integral(&region, n.piece, n.t) - 1.0).abs() < 1e-12);
            // Plain quadrature cannot resolve the kernel peak next to a corner.
            if (0.25..=0.75).contains(&n.t) {
                assert!((abs_mu_quadrature(&region, i) - 1.0).abs() < 5e-2);
            }
        }
        assert!((c1_estimate(&region).value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_cross_check_on_annulus() {
        let a = Region::annulus(2.0).unwrap();
        for i in [0, 100, 700] {
            let n = a.nodes()[i];
            let exact = abs_mu_integral(&a, n.piece, n.t);
            assert!((abs_mu_quadrature(&a, i) - exact).abs() < 1e-4);
        }
    }
}

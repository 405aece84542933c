//! Reduction of a nested disk / exterior-disk pair to a centred annulus.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::C64;

/// z ↦ (az + b)/(cz + d).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moebius {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Moebius {
    pub fn apply(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }
}

/// For D₁ = {|z − ω₁| < R₁} and D₂ = {|z − ω₂| > ρ₂} with the circle ∂D₂
/// inside D₁, returns φ and R such that φ maps D₁ ∩ D₂ onto 1/R < |w| < R,
/// D₁ onto |w| < R and D₂ onto |w| > 1/R.
///
/// Uses the common inverse points p (inside ∂D₂) and q (outside ∂D₁) of the
/// two circles: (z − p)/(z − q) sends both circles to circles about 0, and a
/// real scaling makes the radii reciprocal.
pub fn moebius_to_annulus(w1: C64, r1: f64, w2: C64, rho2: f64) -> Result<(Moebius, f64)> {
    if !(r1 > 0.0) || !(rho2 > 0.0) {
        return Err(Error::InvalidRadius(r1.min(rho2)));
    }
    let offset = w2 - w1;
    let dist = offset.norm();
    if dist + rho2 >= r1 {
        return Err(Error::NotNested);
    }
    let one = C64::new(1.0, 0.0);
    let (rot, p, q) = if dist <= 1e-15 * r1 {
        (one, None, None)
    } else {
        let rot = (offset / dist).conj();
        let b = r1 * r1 + dist * dist - rho2 * rho2;
        let disc = (b * b - 4.0 * dist * dist * r1 * r1).max(0.0).sqrt();
        let x1 = (b - disc) / (2.0 * dist);
        let x2 = r1 * r1 / x1;
        (rot, Some(x1), Some(x2))
    };
    // ψ(z) = (u − p)/(u − q) with u = rot·(z − ω₁); ψ(z) = u when concentric.
    let (a0, b0, c0, d0) = match (p, q) {
        (Some(p), Some(q)) => (rot, -rot * w1 - p, rot, -rot * w1 - q),
        _ => (rot, -rot * w1, C64::new(0.0, 0.0), one),
    };
    let psi = Moebius { a: a0, b: b0, c: c0, d: d0 };
    let a1 = psi.apply(w1 + r1).norm();
    let a2 = psi.apply(w2 + rho2).norm();
    if !(a1 > a2) {
        return Err(Error::NotNested);
    }
    let k = 1.0 / (a1 * a2).sqrt();
    let phi = Moebius { a: a0 * k, b: b0 * k, c: c0, d: d0 };
    let big_r = (a1 / a2).sqrt();

    for j in 0..16 {
        let theta = std::f64::consts::TAU * j as f64 / 16.0;
        let outer = phi.apply(w1 + C64::from_polar(r1, theta)).norm();
        let inner = phi.apply(w2 + C64::from_polar(rho2, theta)).norm();
        if (outer - big_r).abs() > 1e-9 * big_r || (inner - 1.0 / big_r).abs() > 1e-9 / big_r {
            return Err(Error::NoConvergence("Möbius reduction failed its boundary check".into()));
        }
    }
    Ok((phi, big_r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn centred_pair_is_identity() {
        let (phi, r) = moebius_to_annulus(c(0.0, 0.0), 2.0, c(0.0, 0.0), 0.5).unwrap();
        assert!((r - 2.0).abs() < 1e-14);
        assert!((phi.apply(c(0.7, 0.2)) - c(0.7, 0.2)).norm() < 1e-14);
    }

    #[test]
    fn translated_pair_is_translation() {
        let w = c(1.0, -2.0);
        let (phi, r) = moebius_to_annulus(w, 3.0, w, 1.0 / 3.0).unwrap();
        assert!((r - 3.0).abs() < 1e-14);
        assert!((phi.apply(w + c(0.5, 0.5)) - c(0.5, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn offset_pair_maps_circles_to_concentric_circles() {
        let (phi, r) = moebius_to_annulus(c(0.0, 0.0), 2.0, c(0.3, 0.0), 0.4).unwrap();
        for j in 0..32 {
            let theta = std::f64::consts::TAU * j as f64 / 32.0;
            let o = phi.apply(C64::from_polar(2.0, theta)).norm();
            let i = phi.apply(c(0.3, 0.0) + C64::from_polar(0.4, theta)).norm();
            assert!((o - r).abs() < 1e-9 * r);
            assert!((i - 1.0 / r).abs() < 1e-9 / r);
        }
        // A point of D₁ ∩ D₂ lands in the annulus.
        let w = phi.apply(c(-1.0, 0.5)).norm();
        assert!(w > 1.0 / r && w < r);
    }

    #[test]
    fn crossing_pair_is_rejected() {
        assert!(matches!(moebius_to_annulus(c(0.0, 0.0), 1.0, c(1.0, 0.0), 0.5), Err(Error::NotNested)));
    }
}

//! Operator-valued double-layer kernel
//! μ(σ, A) = (1/2πi)(σ′(σI − A)⁻¹ − conj(σ′)(conj(σ)I − A*)⁻¹)
//! and the boundary integrals built from it.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::geometry::{numerical_radius, numrange_margin_disk, numrange_margin_polygon};
use crate::matrix::{hermitian_eig_unchecked, lambda_min, ComplexMatrix, C64};
use crate::regions::{ConvexOuter, Label, Node, Region, Shape};

/// Slack for strict operator hypotheses such as w((A − ωI)⁻¹) < R.
pub const HYPOTHESIS_SLACK: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct KernelSample {
    pub sigma: C64,
    pub tangent: C64,
    /// Hermitian value of μ(σ, A).
    pub m: DMatrix<C64>,
    pub lambda_min: f64,
}

/// X = σ′(σI − A)⁻¹.
fn weighted_resolvent(sigma: C64, tangent: C64, a: &ComplexMatrix) -> Result<DMatrix<C64>> {
    Ok(a.resolvent(sigma)?.into_inner() * tangent)
}

/// (X − X*)/(2πi), Hermitian by construction.
fn hermitian_kernel(x: &DMatrix<C64>) -> DMatrix<C64> {
    let factor = C64::new(0.0, -1.0 / (2.0 * PI));
    (x - x.adjoint()) * factor
}

pub fn mu_operator(sigma: C64, tangent: C64, a: &ComplexMatrix) -> Result<KernelSample> {
    let x = weighted_resolvent(sigma, tangent, a)?;
    let m = hermitian_kernel(&x);
    let lambda_min = lambda_min(&m);
    Ok(KernelSample { sigma, tangent, m, lambda_min })
}

/// ν(σ, A) = μ(σ, A) − (1/2πi)(σ′/(σ − ω)) I for an annulus centred at ω.
pub fn nu_operator_annulus(sigma: C64, tangent: C64, a: &ComplexMatrix, center: C64) -> Result<DMatrix<C64>> {
    let d = sigma - center;
    if d.norm() == 0.0 {
        return Err(Error::CoincidentPoint(sigma));
    }
    let sample = mu_operator(sigma, tangent, a)?;
    let shift = (tangent / d / C64::new(0.0, 2.0 * PI)).re;
    let n = a.dim();
    Ok(sample.m - DMatrix::<C64>::identity(n, n) * C64::new(shift, 0.0))
}

/// Eigenvalues of A, after checking each lies in Ω at least 1e−8·diam from ∂Ω.
pub fn check_spectrum(a: &ComplexMatrix, region: &Region) -> Result<Vec<C64>> {
    let eigenvalues = a.eigenvalues()?;
    let margin = 1e-8 * region.diameter();
    for &lambda in &eigenvalues {
        if !region.contains_with_margin(lambda, margin) {
            return Err(Error::SpectrumLeak { eigenvalue: lambda });
        }
    }
    Ok(eigenvalues)
}

/// S(f, A) with its optional three-way split.
#[derive(Debug, Clone)]
pub struct SBundle {
    pub s: ComplexMatrix,
    pub gamma: C64,
    pub parts: Option<[ComplexMatrix; 3]>,
}

impl SBundle {
    pub fn part_norms(&self) -> Option<[f64; 3]> {
        self.parts.as_ref().map(|p| [p[0].operator_norm(), p[1].operator_norm(), p[2].operator_norm()])
    }
}

/// S(f, A) and g(A) for one function.
#[derive(Debug, Clone)]
pub struct Transforms {
    pub s: ComplexMatrix,
    pub g: ComplexMatrix,
}

/// Per-node accumulation shared by every integral below: for each function
/// f_k the sums Σ f_k(σ)·M·w and Σ conj f_k(σ)·X·w/(2πi).
struct Accumulator {
    s: Vec<DMatrix<C64>>,
    g: Vec<DMatrix<C64>>,
}

impl Accumulator {
    fn zeros(count: usize, n: usize) -> Self {
        Self { s: vec![DMatrix::zeros(n, n); count], g: vec![DMatrix::zeros(n, n); count] }
    }

    fn add(&mut self, other: Accumulator) {
        for (a, b) in self.s.iter_mut().zip(other.s) {
            *a += b;
        }
        for (a, b) in self.g.iter_mut().zip(other.g) {
            *a += b;
        }
    }
}

/// Sweeps the quadrature nodes selected by `keep`, with `values[k][i]` the
/// value of function k at node i.
fn sweep(
    a: &ComplexMatrix,
    nodes: &[Node],
    values: &[Vec<C64>],
    keep: &(dyn Fn(&Node) -> bool + Sync),
) -> Result<Accumulator> {
    let n = a.dim();
    let count = values.len();
    let inv_2pi_i = C64::new(0.0, -1.0 / (2.0 * PI));
    let acc = exec::fold_chunks(
        nodes.len(),
        Ok(Accumulator::zeros(count, n)),
        |range| -> Result<Accumulator> {
            let mut part = Accumulator::zeros(count, n);
            for i in range {
                let node = &nodes[i];
                if !keep(node) {
                    continue;
                }
                let x = weighted_resolvent(node.point, node.tangent, a)?;
                let m = hermitian_kernel(&x);
                for ((s, g), vals) in part.s.iter_mut().zip(part.g.iter_mut()).zip(values) {
                    let f = vals[i];
                    *s += &m * (f * node.weight);
                    *g += &x * (f.conj() * node.weight * inv_2pi_i);
                }
            }
            Ok(part)
        },
        |acc: &mut Result<Accumulator>, part| match (acc.as_mut(), part) {
            (Ok(total), Ok(p)) => total.add(p),
            (Ok(_), Err(e)) => *acc = Err(e),
            (Err(_), _) => {}
        },
    )?;
    Ok(acc)
}

fn node_values(fs: &[&(dyn Fn(C64) -> C64 + Sync)], nodes: &[Node]) -> Vec<Vec<C64>> {
    fs.iter().map(|f| nodes.iter().map(|n| f(n.point)).collect()).collect()
}

/// S(f, A) = ∫ f(σ) μ(σ, A) ds and g(A) = (1/2πi)∫ conj f(σ)(σI − A)⁻¹ dσ
/// for several functions in one pass over the boundary nodes.
pub fn transforms_family(
    fs: &[&(dyn Fn(C64) -> C64 + Sync)],
    a: &ComplexMatrix,
    region: &Region,
) -> Result<Vec<Transforms>> {
    check_spectrum(a, region)?;
    let nodes = region.nodes();
    let values = node_values(fs, nodes);
    let acc = sweep(a, nodes, &values, &|_| true)?;
    acc.s
        .into_iter()
        .zip(acc.g)
        .map(|(s, g)| Ok(Transforms { s: ComplexMatrix::new(s)?, g: ComplexMatrix::new(g)? }))
        .collect()
}

pub fn s_operator(f: &(dyn Fn(C64) -> C64 + Sync), a: &ComplexMatrix, region: &Region) -> Result<SBundle> {
    let t = transforms_family(&[f], a, region)?.remove(0);
    Ok(SBundle { s: t.s, gamma: C64::new(0.0, 0.0), parts: None })
}

pub fn g_operator(f: &(dyn Fn(C64) -> C64 + Sync), a: &ComplexMatrix, region: &Region) -> Result<ComplexMatrix> {
    Ok(transforms_family(&[f], a, region)?.remove(0).g)
}

/// Hypotheses of the cutout split: closure(W(A)) inside the convex part and
/// w((A − ωI)⁻¹) < R where R = 1/(hole radius). Returns (W margin, w, R).
pub fn cutout_hypotheses(a: &ComplexMatrix, region: &Region) -> Result<(f64, f64, f64)> {
    let Shape::Cutout { outer, hole_center, hole_radius } = region.shape() else {
        return Err(Error::InvalidRegion(format!("expected a cutout region, got {}", region.shape().kind())));
    };
    let margin = match outer {
        ConvexOuter::Polygon { polygon } => numrange_margin_polygon(a, polygon),
        ConvexOuter::Disk { center, radius } => numrange_margin_disk(a, *center, *radius),
    };
    let inv = a.shift(-*hole_center).inverse()?;
    let w = numerical_radius(&inv);
    Ok((margin, w, 1.0 / hole_radius))
}

/// S = S₁ + S₂ + S₃ on a cutout region with
/// S₁ = ∫_{Γ₁} f μ ds, S₂ = ∫_{Γ₂} f (μ + (R/π)I) ds, S₃ = −(R/π)∫_{Γ₂} f ds · I.
pub fn s_split_cutout(fs: &[&(dyn Fn(C64) -> C64 + Sync)], a: &ComplexMatrix, region: &Region) -> Result<Vec<SBundle>> {
    let (margin, w, big_r) = cutout_hypotheses(a, region)?;
    let scale = region.diameter();
    if !(margin > 0.0) {
        return Err(Error::HypothesisViolated(format!(
            "closure of W(A) is not inside the convex part (margin {margin:e})"
        )));
    }
    if !(w < big_r * (1.0 + HYPOTHESIS_SLACK)) {
        return Err(Error::HypothesisViolated(format!("w((A - wI)^-1) = {w} exceeds R = {big_r} (scale {scale})")));
    }
    check_spectrum(a, region)?;
    let nodes = region.nodes();
    let values = node_values(fs, nodes);
    let labels: Vec<Label> = region.pieces().iter().map(|(_, l)| *l).collect();
    let outer = sweep(a, nodes, &values, &|n| labels[n.piece] == Label::Outer)?;
    let hole = sweep(a, nodes, &values, &|n| labels[n.piece] == Label::Hole)?;
    let n = a.dim();
    let eye = DMatrix::<C64>::identity(n, n);
    let mut out = Vec::with_capacity(fs.len());
    for (k, (s1, mu2)) in outer.s.into_iter().zip(hole.s).enumerate() {
        let f_int: C64 = nodes
            .iter()
            .enumerate()
            .filter(|(_, nd)| labels[nd.piece] == Label::Hole)
            .map(|(i, nd)| values[k][i] * nd.weight)
            .sum();
        let shift = f_int * (big_r / PI);
        let s2 = &mu2 + &eye * shift;
        let s3 = &eye * (-shift);
        let s = &s1 + &mu2;
        out.push(SBundle {
            s: ComplexMatrix::new(s)?,
            gamma: C64::new(0.0, 0.0),
            parts: Some([ComplexMatrix::new(s1)?, ComplexMatrix::new(s2)?, ComplexMatrix::new(s3)?]),
        });
    }
    Ok(out)
}

/// λ_min(μ(σ_i, A)) at every boundary node.
pub fn lambda_min_table(a: &ComplexMatrix, region: &Region) -> Result<Vec<f64>> {
    check_spectrum(a, region)?;
    let nodes = region.nodes();
    let values =
        exec::map_indexed(nodes.len(), |i| mu_operator(nodes[i].point, nodes[i].tangent, a).map(|s| s.lambda_min));
    values.into_iter().collect()
}

/// δ = −∫ λ_min(μ(σ, A)) ds.
pub fn delta_integral(a: &ComplexMatrix, region: &Region) -> Result<f64> {
    let table = lambda_min_table(a, region)?;
    Ok(-region.nodes().iter().zip(&table).map(|(n, l)| l * n.weight).sum::<f64>())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaReport {
    pub delta: f64,
    /// γ̂ = ∫ |λ_min| ds.
    pub gamma_hat: f64,
    /// γ(f) = −∫ f λ_min ds for each supplied function.
    pub gammas: Vec<C64>,
}

pub fn gamma_hat_integral(
    a: &ComplexMatrix,
    region: &Region,
    fs: &[&(dyn Fn(C64) -> C64 + Sync)],
) -> Result<GammaReport> {
    let table = lambda_min_table(a, region)?;
    let nodes = region.nodes();
    let delta = -nodes.iter().zip(&table).map(|(n, l)| l * n.weight).sum::<f64>();
    let gamma_hat = nodes.iter().zip(&table).map(|(n, l)| l.abs() * n.weight).sum();
    let gammas =
        fs.iter().map(|f| -nodes.iter().zip(&table).map(|(n, l)| f(n.point) * (l * n.weight)).sum::<C64>()).collect();
    Ok(GammaReport { delta, gamma_hat, gammas })
}

/// Eigen-decomposition of a kernel sample, for callers needing vectors.
pub fn kernel_eigenvalues(sample: &KernelSample) -> Vec<f64> {
    hermitian_eig_unchecked(&sample.m).values
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::grcar;
    use crate::geometry::{numerical_range_boundary, ConvexPolygon};
    use crate::matrix::random::{gaussian_matrix, random_unitary, rng};
    use crate::regions::mu_scalar;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn scalar_case_matches_scalar_kernel() {
        let a = ComplexMatrix::diag(&[c(0.3, -0.2)]);
        let sigma = c(2.0, 1.0);
        let t = C64::from_polar(1.0, 0.4);
        let s = mu_operator(sigma, t, &a).unwrap();
        assert!((s.m[(0, 0)].re - mu_scalar(sigma, t, c(0.3, -0.2)).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn normal_case_has_scalar_eigenvalues() {
        let z = [c(0.3, -0.2), c(-1.0, 0.5), c(0.0, 1.2)];
        let a = ComplexMatrix::diag(&z);
        let sigma = c(2.0, 1.0);
        let t = C64::from_polar(1.0, 2.4);
        let mut expected: Vec<f64> = z.iter().map(|&w| mu_scalar(sigma, t, w).unwrap()).collect();
        expected.sort_by(f64::total_cmp);
        let got = kernel_eigenvalues(&mu_operator(sigma, t, &a).unwrap());
        for (e, g) in expected.iter().zip(&got) {
            assert!((e - g).abs() < 1e-14);
        }
    }

    #[test]
    fn lemma5_example_on_grcar8() {
        let s = mu_operator(c(4.0, 0.0), c(0.0, 1.0), &grcar(8)).unwrap();
        assert!(s.lambda_min >= 1.0 / (2.0 * PI * 4.0) - 1e-10);
        let asym = (&s.m - s.m.adjoint()).norm();
        assert!(asym <= 1e-12 * s.m.norm());
    }

    #[test]
    fn unitary_covariance() {
        let mut r = rng(21);
        let a = gaussian_matrix(5, &mut r);
        let u = random_unitary(5, &mut r);
        let b = &(&u.adjoint() * &a) * &u;
        let sigma = c(6.0, 1.0);
        let t = c(0.0, 1.0);
        let ma = mu_operator(sigma, t, &a).unwrap().m;
        let mb = mu_operator(sigma, t, &b).unwrap().m;
        let conj = u.adjoint().as_matrix() * ma * u.as_matrix();
        assert!((conj - mb).norm() < 1e-12);
    }

    #[test]
    fn constant_function_gives_two_identity() {
        let a = grcar(6).scale(c(0.3, 0.0));
        let disk = Region::disk(c(0.0, 0.0), 2.0).unwrap();
        let one = |_: C64| c(1.0, 0.0);
        let t = transforms_family(&[&one], &a, &disk).unwrap().remove(0);
        let eye = ComplexMatrix::identity(6);
        assert!((&t.s - &eye.scale(c(2.0, 0.0))).operator_norm() < 1e-8);
        assert!((&t.g - &eye).operator_norm() < 1e-8);
    }

    #[test]
    fn scalar_disk_center_delta() {
        // λ_min = 1/(πR) on the whole circle: δ = −2 and γ̂ = 2.
        let a = ComplexMatrix::diag(&[c(0.5, 0.5)]);
        let disk = Region::disk(c(0.5, 0.5), 1.5).unwrap();
        let report = gamma_hat_integral(&a, &disk, &[]).unwrap();
        assert!((report.delta + 2.0).abs() < 1e-12);
        assert!((report.gamma_hat - 2.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_leak_is_reported() {
        let a = ComplexMatrix::diag(&[c(3.0, 0.0)]);
        let disk = Region::disk(c(0.0, 0.0), 2.0).unwrap();
        assert!(matches!(delta_integral(&a, &disk), Err(Error::SpectrumLeak { .. })));
    }

    #[test]
    fn nu_shifts_on_annulus() {
        let a = ComplexMatrix::diag(&[c(0.7, 0.2)]);
        let big_r = 2.0;
        let theta: f64 = 0.8;
        let outer = C64::from_polar(big_r, theta);
        let t_out = C64::from_polar(1.0, theta + PI / 2.0);
        let nu = nu_operator_annulus(outer, t_out, &a, c(0.0, 0.0)).unwrap();
        let mu = mu_scalar(outer, t_out, c(0.7, 0.2)).unwrap();
        assert!((nu[(0, 0)].re - (mu - 1.0 / (2.0 * PI * big_r))).abs() < 1e-14);
        let inner = C64::from_polar(1.0 / big_r, -theta);
        let t_in = C64::from_polar(1.0, -theta - PI / 2.0);
        let nu = nu_operator_annulus(inner, t_in, &a, c(0.0, 0.0)).unwrap();
        let mu = mu_scalar(inner, t_in, c(0.7, 0.2)).unwrap();
        assert!((nu[(0, 0)].re - (mu + big_r / (2.0 * PI))).abs() < 1e-13);
    }

    #[test]
    fn cutout_split_sums_to_two_identity_for_constant() {
        let a = grcar(5).scale(c(0.4, 0.0)).shift(c(1.5, 0.0));
        let b = numerical_range_boundary(&a, 64).unwrap();
        let poly: ConvexPolygon = b.circumscribed_polygon(0.3).unwrap();
        let hole_center = c(1.5, 0.0);
        let inv = a.shift(-hole_center).inverse().unwrap();
        let w = numerical_radius(&inv);
        let region = Region::cutout(ConvexOuter::Polygon { polygon: poly }, hole_center, 1.0 / (w * 1.01));
        let Ok(region) = region else { return };
        let one = |_: C64| c(1.0, 0.0);
        let split = s_split_cutout(&[&one], &a, &region).unwrap().remove(0);
        let parts = split.parts.as_ref().unwrap();
        let sum = &(&parts[0] + &parts[1]) + &parts[2];
        assert!((&sum - &split.s).operator_norm() < 1e-10 * split.s.operator_norm());
        assert!((&split.s - &ComplexMatrix::identity(5).scale(c(2.0, 0.0))).operator_norm() < 1e-7);
    }
}

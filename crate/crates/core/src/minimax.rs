//! Discrete complex Chebyshev problems on boundary nodes, solved by Lawson's
//! iteratively reweighted least squares in a discrete orthonormal basis.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::C64;
use crate::regions::Region;

/// Lawson stops once the max error changes by less than this (relative).
pub const LAWSON_TOL: f64 = 1e-8;
pub const LAWSON_MAX_ITER: usize = 200;
pub const WEIGHT_FLOOR: f64 = 1e-14;
/// Validation nodes are this many times denser than the quadrature nodes.
pub const VALIDATION_DENSITY: usize = 4;

/// Functions z^j / ∏(z − ξ) for j = 0..=degree, orthonormalized on a node
/// set by an Arnoldi sweep. The Hessenberg coefficients let the basis be
/// re-evaluated at new points with the same recurrence.
#[derive(Debug, Clone)]
pub struct ArnoldiBasis {
    pub poles: Vec<C64>,
    /// (degree + 1) × degree upper Hessenberg matrix.
    pub hessenberg: DMatrix<C64>,
    pub start_norm: f64,
}

fn inv_denominator(poles: &[C64], z: C64) -> C64 {
    poles.iter().fold(C64::new(1.0, 0.0), |acc, &p| acc / (z - p))
}

impl ArnoldiBasis {
    /// Builds the basis and returns it with its values on `nodes`.
    pub fn build(nodes: &[C64], poles: &[C64], degree: usize) -> Result<(Self, DMatrix<C64>)> {
        let m = nodes.len();
        let mf = m as f64;
        let mut q = DMatrix::<C64>::zeros(m, degree + 1);
        let mut h = DMatrix::<C64>::zeros(degree + 1, degree);
        let start = DVector::from_iterator(m, nodes.iter().map(|&z| inv_denominator(poles, z)));
        let start_norm = start.norm() / mf.sqrt();
        if !(start_norm > 0.0) || !start_norm.is_finite() {
            return Err(Error::InvalidArgument("degenerate starting vector for the Arnoldi basis".into()));
        }
        q.set_column(0, &(start / C64::new(start_norm, 0.0)));
        let z = DVector::from_column_slice(nodes);
        for j in 0..degree {
            let mut v = q.column(j).component_mul(&z);
            for _ in 0..2 {
                for i in 0..=j {
                    let hij = q.column(i).dotc(&v) / mf;
                    h[(i, j)] += hij;
                    v -= q.column(i) * hij;
                }
            }
            let nrm = v.norm() / mf.sqrt();
            if !(nrm > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "Arnoldi basis breaks down at degree {} (only {m} distinct nodes?)",
                    j + 1
                )));
            }
            h[(j + 1, j)] = C64::new(nrm, 0.0);
            q.set_column(j + 1, &(v / C64::new(nrm, 0.0)));
        }
        Ok((Self { poles: poles.to_vec(), hessenberg: h, start_norm }, q))
    }

    pub fn degree(&self) -> usize {
        self.hessenberg.ncols()
    }

    /// Basis values at one point.
    pub fn eval(&self, z: C64) -> Vec<C64> {
        let d = self.degree();
        let mut phi = Vec::with_capacity(d + 1);
        phi.push(inv_denominator(&self.poles, z) / self.start_norm);
        for j in 0..d {
            let mut v = z * phi[j];
            for (i, p) in phi.iter().enumerate() {
                v -= self.hessenberg[(i, j)] * p;
            }
            phi.push(v / self.hessenberg[(j + 1, j)]);
        }
        phi
    }

    pub fn eval_combination(&self, coefficients: &[C64], z: C64) -> C64 {
        self.eval(z).iter().zip(coefficients).map(|(p, c)| p * c).sum()
    }
}

#[derive(Debug, Clone)]
pub struct MinimaxResult {
    pub degree: usize,
    /// Coefficients in the Arnoldi basis.
    pub coefficients: Vec<C64>,
    pub basis: ArnoldiBasis,
    /// Max modulus of p (or of f − r) over `nodes`, recomputed after the solve.
    pub value: f64,
    /// Max error of each Lawson iterate.
    pub history: Vec<f64>,
    pub iterations: usize,
    /// The iteration cap was hit before the stopping test passed.
    pub stagnated: bool,
    pub nodes: Vec<C64>,
}

/// The `{degree, value, nodes, iterations}` report layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimaxSummary {
    pub degree: usize,
    pub value: f64,
    pub nodes: usize,
    pub iterations: usize,
}

impl MinimaxResult {
    /// p(z) for the constrained polynomial, r(z) for a rational fit.
    pub fn eval(&self, z: C64) -> C64 {
        self.basis.eval_combination(&self.coefficients, z)
    }

    pub fn summary(&self) -> MinimaxSummary {
        MinimaxSummary { degree: self.degree, value: self.value, nodes: self.nodes.len(), iterations: self.iterations }
    }

    pub fn coefficients_csv(&self) -> String {
        let mut out = String::from("index,re,im\n");
        for (k, c) in self.coefficients.iter().enumerate() {
            out.push_str(&format!("{k},{:e},{:e}\n", c.re, c.im));
        }
        out
    }
}

struct LawsonOutcome {
    coefficients: DVector<C64>,
    history: Vec<f64>,
    stagnated: bool,
    weights: Vec<f64>,
}

/// min_a max_i |t_i − (Ψa)_i| by Lawson's iteration with exponent 1,
/// starting from uniform weights unless `initial` is given.
fn lawson(psi: &DMatrix<C64>, target: &DVector<C64>, initial: Option<&[f64]>) -> LawsonOutcome {
    let m = psi.nrows();
    let mut weights = match initial {
        Some(w) => w.to_vec(),
        None => vec![1.0 / m as f64; m],
    };
    let mut best: Option<(DVector<C64>, f64)> = None;
    let mut history = Vec::new();
    let mut prev = f64::INFINITY;
    let mut stagnated = true;
    for _ in 0..LAWSON_MAX_ITER {
        let a = weighted_least_squares(psi, target, &weights);
        let err = target - psi * &a;
        let abs: Vec<f64> = err.iter().map(|e| e.norm()).collect();
        let emax = abs.iter().copied().fold(0.0, f64::max);
        history.push(emax);
        if best.as_ref().is_none_or(|(_, b)| emax < *b) {
            best = Some((a, emax));
        }
        if emax == 0.0 || (prev - emax).abs() <= LAWSON_TOL * emax {
            stagnated = false;
            break;
        }
        prev = emax;
        let mut total = 0.0;
        for (w, e) in weights.iter_mut().zip(&abs) {
            *w *= e;
            total += *w;
        }
        let mut total2 = 0.0;
        for w in weights.iter_mut() {
            *w = (*w / total).max(WEIGHT_FLOOR);
            total2 += *w;
        }
        for w in weights.iter_mut() {
            *w /= total2;
        }
    }
    let (coefficients, _) = best.expect("at least one iteration");
    LawsonOutcome { coefficients, history, stagnated, weights }
}

fn weighted_least_squares(psi: &DMatrix<C64>, target: &DVector<C64>, weights: &[f64]) -> DVector<C64> {
    let n = psi.ncols();
    if n == 0 {
        return DVector::zeros(0);
    }
    let mut scaled = psi.clone();
    let mut rhs = target.clone();
    for (i, &w) in weights.iter().enumerate() {
        let s = w.sqrt();
        scaled.row_mut(i).scale_mut(s);
        rhs[i] *= s;
    }
    let qr = scaled.qr();
    qr.q_tr_mul(&mut rhs);
    let qtb = rhs.rows(0, n).into_owned();
    let r = qr.r();
    r.solve_upper_triangular(&qtb).unwrap_or_else(|| {
        // Rank-deficient: fall back to the pseudo-inverse.
        let svd = r.svd(true, true);
        svd.solve(&qtb, 1e-14).expect("svd solve with both factors")
    })
}

/// Boundary nodes of the 4×-dense validation grid.
pub fn validation_nodes(region: &Region) -> Vec<C64> {
    region.refined(VALIDATION_DENSITY).nodes().iter().map(|n| n.point).collect()
}

/// Approximately min max_{∂Ω} |p| over polynomials of degree ≤ k with
/// p(constraint) = 1.
pub fn poly_minmax_constrained(region: &Region, k: usize, constraint: C64) -> Result<MinimaxResult> {
    poly_minmax_on_nodes(&validation_nodes(region), region, k, constraint)
}

fn check_constrained(nodes: &[C64], region: &Region, k: usize, constraint: C64) -> Result<()> {
    if region.contains(constraint) || region.distance_to_boundary(constraint) <= 1e-12 * region.diameter() {
        return Err(Error::ConstraintInRegion(constraint));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("degree must be at least 1".into()));
    }
    if nodes.len() < 4 * (k + 1) {
        return Err(Error::InvalidArgument(format!("{} nodes are too few for degree {k}", nodes.len())));
    }
    Ok(())
}

pub fn poly_minmax_on_nodes(nodes: &[C64], region: &Region, k: usize, constraint: C64) -> Result<MinimaxResult> {
    check_constrained(nodes, region, k, constraint)?;
    let (basis, phi) = ArnoldiBasis::build(nodes, &[], k)?;
    Ok(constrained_fit(nodes, &basis, &phi, k, constraint, None).0)
}

/// Degrees 1..=kmax on one nested basis, fitted on the quadrature nodes.
/// Each solve starts from the previous degree's weights. `value` is the max
/// of |p| over the validation nodes, and a degree never reports a larger
/// value than the one before it (the lower-degree polynomial stays feasible).
pub fn poly_minmax_sweep(region: &Region, kmax: usize, constraint: C64) -> Result<Vec<MinimaxResult>> {
    let nodes: Vec<C64> = region.nodes().iter().map(|n| n.point).collect();
    check_constrained(&nodes, region, kmax, constraint)?;
    let (basis, phi) = ArnoldiBasis::build(&nodes, &[], kmax)?;
    let check = validation_nodes(region);
    let mut phi_check = DMatrix::<C64>::zeros(check.len(), kmax + 1);
    for (i, &z) in check.iter().enumerate() {
        for (j, v) in basis.eval(z).into_iter().enumerate() {
            phi_check[(i, j)] = v;
        }
    }
    let mut out: Vec<MinimaxResult> = Vec::with_capacity(kmax);
    let mut weights: Option<Vec<f64>> = None;
    for k in 1..=kmax {
        let (mut res, w) = constrained_fit(&nodes, &basis, &phi, k, constraint, weights.as_deref());
        let p = phi_check.columns(0, k + 1) * DVector::from_column_slice(&res.coefficients);
        res.value = p.iter().map(|v| v.norm()).fold(res.value, f64::max);
        if let Some(prev) = out.last() {
            if res.value > prev.value {
                res.coefficients = prev.coefficients.clone();
                res.coefficients.push(C64::new(0.0, 0.0));
                res.value = prev.value;
            }
        }
        weights = Some(w);
        out.push(res);
    }
    Ok(out)
}

/// Solves on the first k + 1 columns of `phi` with p(constraint) = 1
/// imposed by eliminating the coefficient with the largest |φ_j(c)|.
fn constrained_fit(
    nodes: &[C64],
    basis: &ArnoldiBasis,
    phi_full: &DMatrix<C64>,
    k: usize,
    constraint: C64,
    warm: Option<&[f64]>,
) -> (MinimaxResult, Vec<f64>) {
    let phi = phi_full.columns(0, k + 1);
    let phi_c = basis.eval(constraint);
    let pivot = (0..=k).max_by(|&i, &j| phi_c[i].norm().total_cmp(&phi_c[j].norm())).expect("k ≥ 1");
    let free: Vec<usize> = (0..=k).filter(|&j| j != pivot).collect();
    let f0 = phi.column(pivot) / phi_c[pivot];
    let mut psi = DMatrix::<C64>::zeros(nodes.len(), k);
    for (col, &j) in free.iter().enumerate() {
        psi.set_column(col, &(phi.column(j) - &f0 * phi_c[j]));
    }
    let target = -f0;
    let out = lawson(&psi, &target, warm);
    let mut coefficients = vec![C64::new(0.0, 0.0); k + 1];
    let mut rest = C64::new(0.0, 0.0);
    for (col, &j) in free.iter().enumerate() {
        coefficients[j] = out.coefficients[col];
        rest += out.coefficients[col] * phi_c[j];
    }
    coefficients[pivot] = (C64::new(1.0, 0.0) - rest) / phi_c[pivot];
    let p_nodes = phi * DVector::from_column_slice(&coefficients);
    let value = p_nodes.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let result = MinimaxResult {
        degree: k,
        coefficients,
        basis: basis.clone(),
        value,
        history: out.history.clone(),
        iterations: out.history.len(),
        stagnated: out.stagnated,
        nodes: nodes.to_vec(),
    };
    (result, out.weights)
}

/// Near min-max fit of r = p/∏(z − ξ_j), deg p ≤ degree, to f on the
/// validation nodes; `value` is max |f − r| there.
pub fn rational_fixed_pole_fit(
    f: &(dyn Fn(C64) -> C64 + Sync),
    poles: &[C64],
    region: &Region,
    degree: usize,
) -> Result<MinimaxResult> {
    for &p in poles {
        if region.contains(p) || region.distance_to_boundary(p) <= 1e-9 * region.diameter() {
            return Err(Error::PoleInRegion { pole: p });
        }
    }
    let nodes = validation_nodes(region);
    let values: Vec<C64> = nodes.iter().map(|&z| f(z)).collect();
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue(nodes[k]));
    }
    let (basis, phi) = ArnoldiBasis::build(&nodes, poles, degree)?;
    let target = DVector::from_vec(values);
    let out = lawson(&phi, &target, None);
    let coefficients: Vec<C64> = out.coefficients.iter().copied().collect();
    let residual = &target - &phi * &out.coefficients;
    let value = residual.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(MinimaxResult {
        degree,
        coefficients,
        basis,
        value,
        history: out.history.clone(),
        iterations: out.history.len(),
        stagnated: out.stagnated,
        nodes,
    })
}

/// max |h| over the validation nodes (attained on ∂Ω for analytic h).
pub fn sup_on_region(h: &(dyn Fn(C64) -> C64 + Sync), region: &Region) -> Result<f64> {
    sup_on_nodes(h, &validation_nodes(region))
}

pub fn sup_on_nodes(h: &(dyn Fn(C64) -> C64 + Sync), nodes: &[C64]) -> Result<f64> {
    let mut best: f64 = 0.0;
    for &z in nodes {
        let v = h(z);
        if !v.is_finite() {
            return Err(Error::NonFiniteValue(z));
        }
        best = best.max(v.norm());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn one_disk_values() {
        let center = c(2.0, 1.0);
        let rho = 1.2;
        let disk = Region::disk(center, rho).unwrap();
        for k in 1..=8 {
            let res = poly_minmax_constrained(&disk, k, c(0.0, 0.0)).unwrap();
            let exact = (rho / center.norm()).powi(k as i32);
            assert!(
                (res.value - exact).abs() <= 1e-6 * exact,
                "k={k}: {} vs {exact} after {}",
                res.value,
                res.iterations
            );
            assert!((res.eval(c(0.0, 0.0)) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn value_is_recomputable() {
        let disk = Region::disk(c(3.0, 0.0), 1.0).unwrap();
        let res = poly_minmax_constrained(&disk, 3, c(0.0, 0.0)).unwrap();
        let direct = sup_on_region(&|z| res.eval(z), &disk).unwrap();
        assert!((direct - res.value).abs() <= 1e-12 * res.value);
    }

    #[test]
    fn constraint_inside_is_rejected() {
        let disk = Region::disk(c(0.0, 0.0), 1.0).unwrap();
        assert!(matches!(poly_minmax_constrained(&disk, 2, c(0.1, 0.0)), Err(Error::ConstraintInRegion(_))));
    }

    #[test]
    fn exact_rational_recovery() {
        let region = Region::annulus(2.0).unwrap();
        let poles = [c(0.0, 0.0), c(3.0, 0.5), c(-2.5, -1.0)];
        let f = move |z: C64| (z * z - 2.0 * z + c(0.5, 1.0)) / ((z - poles[0]) * (z - poles[1]) * (z - poles[2]));
        let fit = rational_fixed_pole_fit(&f, &poles, &region, 3).unwrap();
        assert!(fit.value <= 1e-10, "{}", fit.value);
    }

    #[test]
    fn sup_of_simple_functions() {
        let a = Region::annulus(2.0).unwrap();
        assert!((sup_on_region(&|_| c(0.0, 3.0), &a).unwrap() - 3.0).abs() < 1e-15);
        assert!((sup_on_region(&|z| z, &a).unwrap() - 2.0).abs() < 1e-12);
        assert!(matches!(sup_on_region(&|_| c(f64::NAN, 0.0), &a), Err(Error::NonFiniteValue(_))));
    }

    #[test]
    fn sweep_matches_single_solves_on_a_disk() {
        let disk = Region::disk(c(2.0, 1.0), 1.2).unwrap();
        let sweep = poly_minmax_sweep(&disk, 8, c(0.0, 0.0)).unwrap();
        for (k, res) in sweep.iter().enumerate() {
            let exact = (1.2 / c(2.0, 1.0).norm()).powi(k as i32 + 1);
            assert!((res.value - exact).abs() <= 1e-6 * exact);
            assert!((res.eval(c(0.0, 0.0)) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn degree_monotonicity() {
        let disk = Region::disk(c(2.0, 0.5), 1.0).unwrap();
        let mut prev = f64::INFINITY;
        for k in 1..=6 {
            let v = poly_minmax_constrained(&disk, k, c(0.0, 0.0)).unwrap().value;
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }
}

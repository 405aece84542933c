//! Pole placement for rational Arnoldi. Fixed poles are kept as given and
//! the remaining ones come in conjugate pairs, chosen by Nelder–Mead on
//! log₁₀ of the relative error ‖f(A)b − f_m‖/‖b‖ from seeded random starts.

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::rational::{rational_arnoldi_with_reference, reference_fab};
use crate::error::{Error, Result};
use crate::functions::ScalarFunction;
use crate::matrix::random::rng;
use crate::matrix::{ComplexMatrix, C64};

/// Cost assigned to pole sets where the Arnoldi run fails (pole on an
/// eigenvalue and the like); far above any log₁₀ error.
const FAILED_COST: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleSearch {
    pub fixed: Vec<C64>,
    pub pairs: usize,
    pub starts: usize,
    pub max_iter: u64,
    pub seed: u64,
}

impl Default for PoleSearch {
    fn default() -> Self {
        Self { fixed: vec![C64::new(0.0, 0.0)], pairs: 2, starts: 6, max_iter: 800, seed: crate::config::DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoleSearchResult {
    pub poles: Vec<C64>,
    pub error: f64,
    /// Error of the best pole set from each start, in start order.
    pub start_errors: Vec<f64>,
}

fn assemble(fixed: &[C64], x: &[f64]) -> Vec<C64> {
    let mut poles = fixed.to_vec();
    for pair in x.chunks(2) {
        let p = C64::new(pair[0], pair[1]);
        poles.push(p);
        poles.push(p.conj());
    }
    poles
}

#[derive(Clone, Copy)]
struct Objective<'a> {
    a: &'a ComplexMatrix,
    b: &'a DVector<C64>,
    f: &'a ScalarFunction,
    reference: &'a DVector<C64>,
    fixed: &'a [C64],
}

impl Objective<'_> {
    fn error(&self, x: &[f64]) -> Option<f64> {
        let poles = assemble(self.fixed, x);
        rational_arnoldi_with_reference(self.a, self.b, &poles, self.f, self.reference.clone())
            .ok()
            .map(|r| r.error)
            .filter(|e| e.is_finite())
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, x: &Vec<f64>) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.error(x).map_or(FAILED_COST, |e| e.max(1e-300).log10()))
    }
}

/// Searches `pairs` conjugate pole pairs next to `fixed`. Starts put pair j
/// at radius ‖A‖·(1 + 2j)·u, u ∈ [1, 3), at a random angle in the upper
/// half plane.
pub fn search_poles(
    a: &ComplexMatrix,
    b: &DVector<C64>,
    f: &ScalarFunction,
    spec: &PoleSearch,
) -> Result<PoleSearchResult> {
    if spec.starts == 0 {
        return Err(Error::InvalidArgument("pole search needs at least one start".into()));
    }
    let reference = reference_fab(a, b, f)?;
    let objective = Objective { a, b, f, reference: &reference, fixed: &spec.fixed };
    let scale = a.operator_norm().max(1.0);
    let mut r = rng(spec.seed);
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut start_errors = Vec::with_capacity(spec.starts);
    for _ in 0..spec.starts {
        let mut x0 = Vec::with_capacity(2 * spec.pairs);
        for j in 0..spec.pairs {
            let radius = scale * (1.0 + 2.0 * j as f64) * r.random_range(1.0..3.0);
            let p = C64::from_polar(radius, std::f64::consts::PI * r.random::<f64>());
            x0.extend([p.re, p.im]);
        }
        let (x, err) = if x0.is_empty() {
            (x0, objective.error(&[]).unwrap_or(f64::INFINITY))
        } else {
            let mut simplex = vec![x0.clone()];
            for i in 0..x0.len() {
                let mut v = x0.clone();
                v[i] += 0.25 * x0[i].abs().max(scale);
                simplex.push(v);
            }
            let solver =
                NelderMead::new(simplex).with_sd_tolerance(1e-10).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            let res = Executor::new(objective, solver)
                .configure(|state| state.max_iters(spec.max_iter))
                .run()
                .map_err(|e| Error::NoConvergence(format!("pole search: {e}")))?;
            let x = res.state.best_param.unwrap_or(x0);
            let err = objective.error(&x).unwrap_or(f64::INFINITY);
            (x, err)
        };
        start_errors.push(err);
        if best.as_ref().is_none_or(|(_, e)| err < *e) {
            best = Some((x, err));
        }
    }
    let (x, error) = best.expect("at least one start");
    if !error.is_finite() {
        return Err(Error::NoConvergence("no start produced a usable pole set".into()));
    }
    Ok(PoleSearchResult { poles: assemble(&spec.fixed, &x), error, start_errors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::grcar;
    use crate::matrix::random::real_gaussian_vector;
    use crate::rational::RationalFunction;

    #[test]
    fn recovers_a_pole_pair_of_a_rational_function() {
        let a = grcar(16);
        let b = real_gaussian_vector(16, &mut rng(3));
        let target = [C64::new(0.0, 0.0), C64::new(-1.0, 4.0), C64::new(-1.0, -4.0)];
        let f = ScalarFunction::Rational(RationalFunction::with_simple_poles(vec![C64::new(1.0, 0.0)], &target));
        let spec = PoleSearch { pairs: 1, starts: 3, ..PoleSearch::default() };
        let out = search_poles(&a, &b, &f, &spec).unwrap();
        assert!(out.error < 1e-9, "{}", out.error);
        assert_eq!(out.poles.len(), 3);
        assert_eq!(out.poles[1], out.poles[2].conj());
    }

    #[test]
    fn no_pairs_is_a_single_evaluation() {
        let a = grcar(10);
        let b = real_gaussian_vector(10, &mut rng(3));
        let spec = PoleSearch { pairs: 0, starts: 1, ..PoleSearch::default() };
        let out = search_poles(&a, &b, &ScalarFunction::Exp, &spec).unwrap();
        assert_eq!(out.poles, vec![C64::new(0.0, 0.0)]);
    }
}

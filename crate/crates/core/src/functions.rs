//! Scalar functions that can be evaluated at points and at matrices.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::matrix::{expm, logm, ComplexMatrix, C64};
use crate::rational::RationalFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarFunction {
    Identity,
    Exp,
    Log,
    /// z ↦ 1/(1 − e^z).
    #[serde(rename = "inv1mexp")]
    Inv1mExp,
    Rational(RationalFunction),
}

impl ScalarFunction {
    pub fn eval(&self, z: C64) -> C64 {
        let one = C64::new(1.0, 0.0);
        match self {
            ScalarFunction::Identity => z,
            ScalarFunction::Exp => z.exp(),
            ScalarFunction::Log => z.ln(),
            ScalarFunction::Inv1mExp => one / (one - z.exp()),
            ScalarFunction::Rational(r) => r.eval(z),
        }
    }

    /// f(A) by the method suited to each function: Padé exponential,
    /// inverse scaling-and-squaring logarithm, a linear solve for
    /// 1/(1 − e^z), and shifted solves for rational functions.
    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        match self {
            ScalarFunction::Identity => Ok(a.clone()),
            ScalarFunction::Exp => expm(a),
            ScalarFunction::Log => logm(a),
            ScalarFunction::Inv1mExp => {
                let n = a.dim();
                let m = &ComplexMatrix::identity(n) - &expm(a)?;
                m.solve(&ComplexMatrix::identity(n))
            }
            ScalarFunction::Rational(r) => r.apply(a),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ScalarFunction::Identity => "identity",
            ScalarFunction::Exp => "exp",
            ScalarFunction::Log => "log",
            ScalarFunction::Inv1mExp => "inv1mexp",
            ScalarFunction::Rational(_) => "rational",
        }
    }
}

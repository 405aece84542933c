//! GMRES with certified residual bounds and rational Arnoldi approximation
//! of f(A)b with its near-optimality bound.

mod gmres;
mod poles;
mod rational;

pub use gmres::{gmres, gmres_bound, gmres_trace, GmresResult};
pub use poles::{search_poles, PoleSearch, PoleSearchResult};
pub use rational::{
    near_opt_bound, near_opt_from, rational_arnoldi_basis, rational_arnoldi_fa, reference_fab, CompressionDiagnostics,
    NearOptReport, RationalArnoldiApprox, RationalKrylov,
};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::kconst::KCertificate;

/// Per-step actual residual or error next to its certified bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundTrace {
    pub steps: Vec<usize>,
    pub actual: Vec<f64>,
    pub bound: Vec<f64>,
    pub certificate: KCertificate,
}

impl BoundTrace {
    /// Steps where the bound falls below the actual value by more than
    /// 1e−12·scale.
    pub fn violations(&self, scale: f64) -> Vec<usize> {
        self.steps
            .iter()
            .zip(self.actual.iter().zip(&self.bound))
            .filter(|(_, (a, b))| **b < **a - 1e-12 * scale)
            .map(|(k, _)| *k)
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,actual,bound,K\n");
        for ((k, a), b) in self.steps.iter().zip(&self.actual).zip(&self.bound) {
            out.push_str(&format!("{k},{a:e},{b:e},{:e}\n", self.certificate.k));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

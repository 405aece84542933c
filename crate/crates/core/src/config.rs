//! Centralized numerical tolerances.

use serde::{Deserialize, Serialize};

/// Default seed for every randomized routine.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Tolerances shared by the dense linear-algebra layer. All of them are
/// relative to ‖A‖ unless stated otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// ‖Av − λv‖ ≤ eig_residual · ‖A‖ for accepted eigenpairs.
    pub eig_residual: f64,
    /// ‖AX − B‖ ≤ solve_residual · ‖A‖‖X‖.
    pub solve_residual: f64,
    /// LU pivots below pivot · ‖A‖ mean the matrix is singular.
    pub pivot: f64,
    /// Above this eigenvector condition number matrix functions use Schur–Parlett.
    pub eig_condition_max: f64,
    /// ‖H − H*‖ ≤ hermitian · ‖H‖ for Hermitian input.
    pub hermitian: f64,
    /// Allowed relative disagreement between the two matrix-function paths.
    pub function_disagreement: f64,
    /// Absolute distance from (−∞, 0] below which log(A) is refused.
    pub log_branch: f64,
    pub seed: u64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        eig_residual: 1e-10,
        solve_residual: 1e-12,
        pivot: 1e-14,
        eig_condition_max: 1e6,
        hermitian: 1e-12,
        function_disagreement: 1e-6,
        log_branch: 1e-12,
        seed: DEFAULT_SEED,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

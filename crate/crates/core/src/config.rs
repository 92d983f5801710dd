//! Numerical tolerances shared by every module.

use serde::{Deserialize, Serialize};

/// Tolerances for the floating-point realisations of exact algebraic
/// statements. Every threshold the library compares against lives here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Algebraic identities: antisymmetry, Jacobi, bracket closure.
    pub algebraic: f64,
    /// Spectral tests: real parts of eigenvalues, eigen-cluster merging.
    pub spectral: f64,
    /// Singular-value cutoff (relative) used by rank and null-space routines.
    pub rank: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        algebraic: 1e-10,
        spectral: 1e-9,
        rank: 1e-8,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Seed used whenever the caller does not provide one.
pub const DEFAULT_SEED: u64 = 42;

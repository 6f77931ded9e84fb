//! Numerical tolerances shared by the whole crate.
//!
//! The defaults are used unless a process-wide override is installed with
//! [`set_tolerances`]. Every kernel reads the current values through
//! [`tolerances`] at call time.

use std::sync::RwLock;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative Frobenius asymmetry accepted by the symmetric eigensolver.
    pub symmetry: f64,
    /// Eigenvalue (or pivot) below which a matrix counts as rank deficient.
    pub rank: f64,
    /// Accepted `‖XᵀX − I‖_F` for a Stiefel point.
    pub orthogonality: f64,
    /// Defect up to which a near-orthonormal input is re-projected instead
    /// of rejected.
    pub reorthonormalize: f64,
    /// Accepted `‖XᵀV + VᵀX‖_F` for a tangent vector.
    pub tangency: f64,
    /// Residual target of the iterative Stiefel logarithm.
    pub log_residual: f64,
    /// Iteration cap of the Stiefel logarithm.
    pub log_max_iter: usize,
    /// Sweep cap of the Jacobi eigensolver.
    pub jacobi_max_sweeps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        DEFAULT
    }
}

const DEFAULT: Tolerances = Tolerances {
    symmetry: 1e-10,
    rank: 1e-12,
    orthogonality: 1e-8,
    reorthonormalize: 1e-6,
    tangency: 1e-8,
    log_residual: 1e-10,
    log_max_iter: 100,
    jacobi_max_sweeps: 100,
};

static CURRENT: RwLock<Tolerances> = RwLock::new(DEFAULT);

/// Current tolerance set.
pub fn tolerances() -> Tolerances {
    *CURRENT.read().unwrap_or_else(|e| e.into_inner())
}

/// Installs a process-wide override. Returns the previous values.
pub fn set_tolerances(t: Tolerances) -> Tolerances {
    let mut guard = CURRENT.write().unwrap_or_else(|e| e.into_inner());
    std::mem::replace(&mut *guard, t)
}

//! Tolerance constants shared by every module.

use serde::{Deserialize, Serialize};

/// Centralised numerical tolerances.
///
/// Finite-difference tolerances scale with the step: `fd_factor * h^2` for
/// first-derivative identities and `nested_fd_factor * h^2` for quantities
/// that need third derivatives of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Exact algebraic identities (unitarity, R^2 = I, ...).
    pub algebraic: f64,
    /// Identities that hold exactly but pass through analytic derivatives.
    pub analytic: f64,
    /// Default finite-difference step.
    pub fd_step: f64,
    pub fd_factor: f64,
    pub nested_fd_factor: f64,
    /// Hermiticity correction above which a warning is logged.
    pub hermiticity_warn: f64,
    /// Hermiticity defect of -i V^dag dV above which the frame is rejected.
    pub frame_hermiticity: f64,
    /// Magnitude below which a form component counts as zero.
    pub wedge_zero: f64,
    /// Distance from an excluded pole below which a chart query fails.
    pub pole_guard: f64,
    /// Gram-Schmidt pivot threshold.
    pub pivot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            algebraic: 1e-10,
            analytic: 1e-9,
            fd_step: 1e-3,
            fd_factor: 10.0,
            nested_fd_factor: 100.0,
            hermiticity_warn: 1e-8,
            frame_hermiticity: 1e-6,
            wedge_zero: 1e-6,
            pole_guard: 1e-6,
            pivot: 1e-8,
        }
    }
}

impl Tolerances {
    /// `fd_factor * h^2` for the configured step.
    pub fn fd(&self) -> f64 {
        self.fd_factor * self.fd_step * self.fd_step
    }

    /// `nested_fd_factor * h^2`.
    pub fn nested_fd(&self) -> f64 {
        self.nested_fd_factor * self.fd_step * self.fd_step
    }
}

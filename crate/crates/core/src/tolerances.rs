//! Numerical thresholds used by the verification harness and the theorem
//! runs, in one place. Every field can be overridden from the experiment
//! config.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Allowed growth of μ along a flow run.
    pub tol_mu: f64,
    /// Slack on the π/4 contact-angle bound, radians.
    pub tol_alpha: f64,
    /// Relative asymmetry `|Z(i,j) − Z(j,i)|/Z` allowed at a maximizer.
    pub tol_sym: f64,
    /// Relative slack on `κ(i) ≤ κ(j) ≤ Z` at a maximizer.
    pub tol_order: f64,
    /// Minimum residual reduction of the evolution equations per joint
    /// refinement `(n, dt) → (2n, dt/4)`.
    pub kappa_reduction: f64,
    /// Ceiling on the finest relative evolution-equation residual.
    pub kappa_ceiling: f64,
    /// Minimum reduction of the trig-identity residual per grid doubling.
    pub trig_reduction: f64,
    pub trig_ceiling: f64,
    /// Ceiling on the first-order condition residual in units of `κ² ds`.
    pub first_order_ceiling: f64,
    /// Ceiling on the relative gap between the raw and simplified
    /// second-variation blocks at curve-derived maximizers.
    pub first_block_ceiling: f64,
    pub rewrite_ceiling: f64,
    /// Residuals at or below this are treated as converged regardless of
    /// their observed reduction.
    pub roundoff_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_mu: 0.01,
            tol_alpha: 0.02,
            tol_sym: 5e-3,
            tol_order: 5e-3,
            kappa_reduction: 3.0,
            kappa_ceiling: 1e-2,
            trig_reduction: 1.8,
            trig_ceiling: 1e-2,
            first_order_ceiling: 10.0,
            first_block_ceiling: 1e-2,
            rewrite_ceiling: 1e-11,
            roundoff_floor: 1e-12,
        }
    }
}

//! Numerical verification of the evolution equations for κ and κᵖ, the
//! two-point identities at maximizing pairs, and the empirical
//! non-collapsing property along flow runs.

mod algebra;
mod evolution;
mod sweep;
mod theorem;
mod two_point;

pub use algebra::{
    expression_three, first_block, random_sample, rewrite_equivalence_check, rewrite_equivalence_suite,
    second_block, BlockValue, TwoPointSample,
};
pub use evolution::{
    kappa_evolution_residual, kappa_residual_field, marker_window, window_residual, KappaStudy, KappaVariant,
    WindowResidual,
};
pub use sweep::{bisect_threshold, mu0_sweep, SweepFamily, SweepOutcome, SweepRow, SweepVerdict};
pub use theorem::{theorem_property_run, MuSample, TheoremRun, TheoremRunConfig};
pub use two_point::{
    first_block_spot_check, first_order_condition_check, max_trig_residual, oriented_tangent_y, trig_identity_check, FirstOrderCheck,
    TrigCheck,
};

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolution {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

/// Residuals of one identity across a refinement sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub name: String,
    pub resolutions: Vec<Resolution>,
    pub residuals: Vec<f64>,
    /// `log₂` of successive residual ratios.
    pub orders: Vec<f64>,
    /// Smallest entry of `orders`.
    pub estimated_order: Option<f64>,
    /// Required order, `log₂` of the required reduction factor.
    pub order_floor: Option<f64>,
    pub ceiling: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResidualReport {
    /// Passes when the finest residual is under `ceiling` and every
    /// successive reduction reaches `2^order_floor`, or the finest residual
    /// is already at the roundoff floor.
    pub fn new(
        name: impl Into<String>,
        resolutions: Vec<Resolution>,
        residuals: Vec<f64>,
        order_floor: Option<f64>,
        ceiling: f64,
        roundoff_floor: f64,
    ) -> Self {
        let orders: Vec<f64> = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        let estimated_order = orders.iter().copied().reduce(f64::min);
        let last = residuals.last().copied().unwrap_or(f64::NAN);
        let within = last.is_finite() && last <= ceiling;
        let converging = match (order_floor, estimated_order) {
            (None, _) => true,
            (Some(f), Some(o)) => o >= f || last <= roundoff_floor,
            (Some(_), None) => last <= roundoff_floor,
        };
        ResidualReport {
            name: name.into(),
            resolutions,
            residuals,
            orders,
            estimated_order,
            order_floor,
            ceiling,
            pass: within && converging,
            error: None,
        }
    }

    /// A check that could not be evaluated.
    pub fn failed(name: impl Into<String>, ceiling: f64, err: &crate::Error) -> Self {
        ResidualReport {
            name: name.into(),
            resolutions: Vec::new(),
            residuals: Vec::new(),
            orders: Vec::new(),
            estimated_order: None,
            order_floor: None,
            ceiling,
            pass: false,
            error: Some(err.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res(n: usize) -> Resolution {
        Resolution { n, dt: None }
    }

    #[test]
    fn report_pass_logic() {
        let r = ResidualReport::new("a", vec![res(1), res(2), res(4)], vec![1e-2, 2e-3, 4e-4], Some(2f64.log2()), 1e-3, 1e-12);
        assert!(r.pass);
        assert!((r.estimated_order.unwrap() - 5f64.log2()).abs() < 1e-12);
        let r = ResidualReport::new("b", vec![res(1), res(2)], vec![1e-2, 8e-3], Some(1.0), 1.0, 1e-12);
        assert!(!r.pass);
        let r = ResidualReport::new("c", vec![res(1), res(2)], vec![1e-16, 2e-16], Some(1.0), 1.0, 1e-12);
        assert!(r.pass);
        let r = ResidualReport::new("d", vec![res(1)], vec![5e-12], None, 1e-11, 1e-12);
        assert!(r.pass && r.estimated_order.is_none());
        let r = ResidualReport::new("e", vec![res(1)], vec![f64::NAN], None, 1e-11, 1e-12);
        assert!(!r.pass);
    }
}

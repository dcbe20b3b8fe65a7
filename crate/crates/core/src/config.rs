//! Experiment configuration: JSON in, validated struct out.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curve::{construct_curve, CurveSpec, MIN_SUPPORT_SAMPLES};
use crate::error::{Error, Result};
use crate::identities::SweepFamily;
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Horizon {
    /// Absolute end time.
    TEnd(f64),
    /// Fraction of the equal-area circle extinction time.
    Until(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySettings {
    pub rewrite_samples: usize,
    /// Marker count of the coarsest evolution-equation level.
    pub kappa_n0: usize,
    pub kappa_levels: usize,
    pub kappa_steps: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings { rewrite_samples: 1000, kappa_n0: 128, kappa_levels: 3, kappa_steps: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSettings {
    /// Exponents to sweep; empty means the top-level `p`.
    pub p_values: Vec<f64>,
    pub families: Vec<SweepFamily>,
    /// Increasing family parameters: semi-axis for ellipses, amplitude for
    /// Fourier modes.
    pub grid: Vec<f64>,
    pub bisect_steps: usize,
    pub horizon_fraction: f64,
}

impl Default for SweepSettings {
    fn default() -> Self {
        SweepSettings {
            p_values: Vec::new(),
            families: vec![SweepFamily::Ellipse],
            grid: vec![1.02, 1.05, 1.1, 1.2],
            bisect_steps: 3,
            horizon_fraction: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub initial_curve: CurveSpec,
    pub p: f64,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_horizon")]
    pub horizon: Horizon,
    #[serde(default = "default_monitor_every")]
    pub monitor_every: u64,
    /// Steps between snapshot files; a multiple of `monitor_every`.
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: u64,
    /// Output directory. Not part of the config hash.
    #[serde(default = "default_outputs", skip_serializing)]
    pub outputs: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub verify: VerifySettings,
    #[serde(default)]
    pub sweep: SweepSettings,
    /// Flips the sign of the flow speed in verification runs. Test mode.
    #[serde(default)]
    pub inject_sign_error: bool,
}

fn default_n() -> usize {
    512
}
fn default_sigma() -> f64 {
    0.4
}
fn default_horizon() -> Horizon {
    Horizon::Until(0.8)
}
fn default_monitor_every() -> u64 {
    50
}
fn default_snapshot_every() -> u64 {
    500
}
fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::config(format!("p must exceed 1, got {}", self.p)));
        }
        if self.n < MIN_SUPPORT_SAMPLES || !self.n.is_power_of_two() {
            return Err(Error::config(format!("n must be a power of two >= {MIN_SUPPORT_SAMPLES}, got {}", self.n)));
        }
        if !(self.sigma > 0.0 && self.sigma <= 0.9) {
            return Err(Error::config(format!("sigma must lie in (0, 0.9], got {}", self.sigma)));
        }
        match self.horizon {
            Horizon::TEnd(t) => positive("horizon.t_end", t)?,
            Horizon::Until(f) if !(f > 0.0 && f < 1.0) => {
                return Err(Error::config(format!("horizon.until must lie in (0, 1), got {f}")));
            }
            Horizon::Until(_) => {}
        }
        if self.monitor_every == 0 {
            return Err(Error::config("monitor_every must be positive"));
        }
        if self.snapshot_every == 0 || !self.snapshot_every.is_multiple_of(self.monitor_every) {
            return Err(Error::config("snapshot_every must be a positive multiple of monitor_every"));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.tol_mu", t.tol_mu),
            ("tolerances.tol_alpha", t.tol_alpha),
            ("tolerances.tol_sym", t.tol_sym),
            ("tolerances.tol_order", t.tol_order),
            ("tolerances.kappa_ceiling", t.kappa_ceiling),
            ("tolerances.trig_ceiling", t.trig_ceiling),
            ("tolerances.first_order_ceiling", t.first_order_ceiling),
            ("tolerances.first_block_ceiling", t.first_block_ceiling),
            ("tolerances.rewrite_ceiling", t.rewrite_ceiling),
            ("tolerances.roundoff_floor", t.roundoff_floor),
        ] {
            positive(name, v)?;
        }
        if !(t.kappa_reduction > 1.0 && t.trig_reduction > 1.0) {
            return Err(Error::config("reduction factors must exceed 1"));
        }
        let v = &self.verify;
        if v.rewrite_samples == 0 || v.kappa_levels < 3 || v.kappa_steps < 2 {
            return Err(Error::config("verify needs rewrite_samples >= 1, kappa_levels >= 3, kappa_steps >= 2"));
        }
        if v.kappa_n0 < 16 {
            return Err(Error::config(format!("verify.kappa_n0 must be >= 16, got {}", v.kappa_n0)));
        }
        let s = &self.sweep;
        if let Some(p) = s.p_values.iter().find(|p| !(p.is_finite() && **p > 1.0)) {
            return Err(Error::config(format!("sweep.p_values: p must exceed 1, got {p}")));
        }
        if !(s.horizon_fraction > 0.0 && s.horizon_fraction <= 0.9) {
            return Err(Error::config(format!("sweep.horizon_fraction must lie in (0, 0.9], got {}", s.horizon_fraction)));
        }
        // Builds the initial curve so non-convex data fails here, not mid-run.
        construct_curve(&self.initial_curve, self.n)?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, output directory excluded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }
}

/// Parses and validates a JSON config. Every failure, including an initial
/// curve that is not convex, is reported as a config error.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
    cfg.validate().map_err(|e| match e {
        Error::ConfigInvalid(_) => e,
        other => Error::config(format!("initial_curve: {other}")),
    })?;
    Ok(cfg)
}

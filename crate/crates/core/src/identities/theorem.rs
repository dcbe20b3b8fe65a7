//! Flow runs monitored for preservation of the non-collapsing ratio μ.

use serde::Serialize;

use crate::curve::{construct_curve, CurveGeometry, CurveSpec};
use crate::error::{Error, Result};
use crate::flow::{estimated_extinction_time, run_flow, FlowConfig, FlowState, Snapshot, TerminalReason};
use crate::noncollapse::{alpha_check, mu_report, AlphaCheck, MaximizerCheck, TwoPointConfig};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremRunConfig {
    pub spec: CurveSpec,
    pub p: f64,
    pub n: usize,
    pub sigma: f64,
    /// Horizon as a fraction of the equal-area circle extinction time.
    pub horizon_fraction: f64,
    pub monitor_every: u64,
    pub tolerances: Tolerances,
}

impl TheoremRunConfig {
    pub fn new(spec: CurveSpec, p: f64) -> Self {
        TheoremRunConfig {
            spec,
            p,
            n: 512,
            sigma: 0.4,
            horizon_fraction: 0.8,
            monitor_every: 50,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuSample {
    pub t: f64,
    pub mu: f64,
    pub argmax: TwoPointConfig,
    #[serde(skip)]
    pub alpha: Option<AlphaCheck>,
    /// Per-point maximizing pairs `(i, partner(i))` with `d < 1/Z`.
    pub short_pairs: usize,
    /// Largest contact angle among those pairs, zero when there are none.
    pub short_alpha_max: f64,
    pub maximizer: MaximizerCheck,
}

impl MuSample {
    fn at(t: f64, g: &CurveGeometry) -> Result<Self> {
        let r = mu_report(g)?;
        let (i, j) = (r.argmax.i, r.argmax.j);
        let alpha = if r.argmax.z > 0.0 { Some(alpha_check(g, i, j)?) } else { None };
        let (mut short_pairs, mut short_alpha_max) = (0, 0.0f64);
        for (k, partner) in r.partner.iter().enumerate() {
            if let Some(l) = *partner {
                let a = alpha_check(g, k, l)?;
                if a.d_lt_inv_z {
                    short_pairs += 1;
                    short_alpha_max = short_alpha_max.max(a.alpha);
                }
            }
        }
        Ok(MuSample {
            t,
            mu: r.mu,
            argmax: r.argmax,
            alpha,
            short_pairs,
            short_alpha_max,
            maximizer: MaximizerCheck::at(g, i, j)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremRun {
    pub mu0: f64,
    pub max_mu: f64,
    pub final_mu: f64,
    /// `max μ(t) ≤ μ(0) + tol_mu`.
    pub pass: bool,
    /// `μ` at the horizon is below `μ(0)`.
    pub decreasing: bool,
    pub t_hat: f64,
    pub horizon: f64,
    pub samples: Vec<MuSample>,
}

impl TheoremRun {
    /// Every sampled maximizing pair with `d < 1/Z` has contact angle at
    /// most `π/4 + tol_alpha`.
    pub fn alpha_bound_holds(&self, tol_alpha: f64) -> bool {
        let bound = std::f64::consts::FRAC_PI_4 + tol_alpha;
        self.samples.iter().all(|s| s.alpha.is_none_or(|a| a.holds(tol_alpha)) && s.short_alpha_max <= bound)
    }

    pub fn maximizers_ordered(&self, rel_tol: f64) -> bool {
        self.samples.iter().all(|s| s.maximizer.ordered(rel_tol))
    }

    pub fn maximizers_symmetric(&self, rel_tol: f64) -> bool {
        self.samples.iter().all(|s| s.maximizer.symmetric(rel_tol))
    }
}

/// Runs the support-form flow to `horizon_fraction · T̂`, sampling μ at the
/// start, every `monitor_every` steps and at the horizon.
pub fn theorem_property_run(cfg: &TheoremRunConfig) -> Result<TheoremRun> {
    if !(cfg.horizon_fraction > 0.0 && cfg.horizon_fraction <= 0.9) {
        return Err(Error::config(format!("horizon fraction must lie in (0, 0.9], got {}", cfg.horizon_fraction)));
    }
    let curve = construct_curve(&cfg.spec, cfg.n)?;
    let t_hat = estimated_extinction_time(curve.area()?, cfg.p)?;
    let horizon = cfg.horizon_fraction * t_hat;
    let flow = FlowConfig {
        sigma: cfg.sigma,
        t_end: Some(horizon),
        monitor_every: cfg.monitor_every,
        ..FlowConfig::new(cfg.p)
    };
    let mut samples: Vec<Result<MuSample>> = Vec::new();
    let mut monitor = |snap: &Snapshot, g: &CurveGeometry| samples.push(MuSample::at(snap.state.t, g));
    let traj = run_flow(FlowState::support(curve), &flow, &mut [&mut monitor])?;
    if let TerminalReason::Aborted(e) = traj.terminal {
        return Err(e);
    }
    let samples = samples.into_iter().collect::<Result<Vec<_>>>()?;
    let mu0 = samples[0].mu;
    let final_mu = samples.last().expect("initial sample").mu;
    let max_mu = samples.iter().map(|s| s.mu).fold(f64::NEG_INFINITY, f64::max);
    Ok(TheoremRun {
        mu0,
        max_mu,
        final_mu,
        pass: max_mu <= mu0 + cfg.tolerances.tol_mu,
        decreasing: final_mu < mu0,
        t_hat,
        horizon,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_stays_round() {
        let cfg = TheoremRunConfig { n: 128, ..TheoremRunConfig::new(CurveSpec::circle(1.0), 2.0) };
        let run = theorem_property_run(&cfg).unwrap();
        assert!(run.pass);
        assert!(run.samples.iter().all(|s| (s.mu - 1.0).abs() < 1e-6));
        assert!((run.samples.last().unwrap().t - run.horizon).abs() < 1e-15);
    }

    #[test]
    fn near_round_ellipse_preserves_mu() {
        let cfg = TheoremRunConfig { n: 256, ..TheoremRunConfig::new(CurveSpec::ellipse(1.05, 1.0), 2.0) };
        let run = theorem_property_run(&cfg).unwrap();
        assert!(run.pass && run.decreasing, "{} {} {}", run.mu0, run.max_mu, run.final_mu);
        assert!(run.alpha_bound_holds(0.02));
        assert!(run.maximizers_ordered(5e-3) && run.maximizers_symmetric(5e-3));
    }

    #[test]
    fn horizon_fraction_is_validated() {
        let cfg = TheoremRunConfig { horizon_fraction: 0.95, ..TheoremRunConfig::new(CurveSpec::circle(1.0), 2.0) };
        assert!(matches!(theorem_property_run(&cfg), Err(Error::ConfigInvalid(_))));
    }
}

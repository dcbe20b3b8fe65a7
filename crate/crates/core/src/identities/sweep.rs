//! Empirical search for the largest initial μ whose flow run keeps μ from
//! growing. The threshold is a property of the sampled family and
//! resolution only.

use serde::{Deserialize, Serialize};

use super::theorem::{theorem_property_run, TheoremRunConfig};
use crate::curve::CurveSpec;
use crate::error::{Error, Result};
use crate::par::{self, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SweepFamily {
    /// The round endpoint; the parameter is ignored.
    Circle,
    /// Ellipse with semi-axes `(param, 1)`.
    Ellipse,
    /// `h = 1 + param · cos(kθ + phase)`.
    Fourier { k: u32, phase: f64 },
}

impl SweepFamily {
    pub fn spec(&self, param: f64) -> CurveSpec {
        match *self {
            SweepFamily::Circle => CurveSpec::circle(1.0),
            SweepFamily::Ellipse => CurveSpec::ellipse(param, 1.0),
            SweepFamily::Fourier { k, phase } => CurveSpec::fourier(1.0, &[(k, param, phase)]),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SweepFamily::Circle => "circle".into(),
            SweepFamily::Ellipse => "ellipse".into(),
            SweepFamily::Fourier { k, .. } => format!("fourier{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVerdict {
    /// Passing runs form a non-empty prefix of the grid.
    True,
    /// No grid point passed; μ₀ is reported as the round value 1.
    False,
    /// A failing grid point precedes a passing one.
    Ambiguous,
}

impl SweepVerdict {
    pub fn label(self) -> &'static str {
        match self {
            SweepVerdict::True => "true",
            SweepVerdict::False => "false",
            SweepVerdict::Ambiguous => "ambiguous",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub param: f64,
    pub mu0: f64,
    pub verdict: SweepVerdict,
}

/// Evaluates `eval(param) -> (passed, μ(0))` over an increasing grid and
/// refines the last pass/first fail bracket by `bisect_steps` bisections.
pub fn bisect_threshold<F>(grid: &[f64], eval: F, bisect_steps: usize, exec: Exec) -> Result<SweepOutcome>
where
    F: Fn(f64) -> Result<(bool, f64)> + Sync,
{
    if grid.is_empty() {
        return Err(Error::config("sweep grid is empty"));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("sweep grid must be finite and strictly increasing"));
    }
    let results = par::map_slice(exec, grid, |&x| eval(x)).into_iter().collect::<Result<Vec<_>>>()?;
    let prefix = results.iter().take_while(|r| r.0).count();
    if results[prefix..].iter().any(|r| r.0) {
        let (param, mu0) = if prefix == 0 { (grid[0], 1.0) } else { (grid[prefix - 1], results[prefix - 1].1) };
        return Ok(SweepOutcome { param, mu0, verdict: SweepVerdict::Ambiguous });
    }
    if prefix == 0 {
        return Ok(SweepOutcome { param: grid[0], mu0: 1.0, verdict: SweepVerdict::False });
    }
    let (mut lo, mut mu_lo) = (grid[prefix - 1], results[prefix - 1].1);
    if prefix < grid.len() {
        let mut hi = grid[prefix];
        for _ in 0..bisect_steps {
            let mid = 0.5 * (lo + hi);
            let (ok, mu) = eval(mid)?;
            if ok {
                lo = mid;
                mu_lo = mu;
            } else {
                hi = mid;
            }
        }
    }
    Ok(SweepOutcome { param: lo, mu0: mu_lo, verdict: SweepVerdict::True })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub family: String,
    pub param: f64,
    pub mu0_empirical: f64,
    pub pass: SweepVerdict,
}

/// One row per `(p, family)`, in input order.
pub fn mu0_sweep(
    ps: &[f64],
    families: &[SweepFamily],
    grid: &[f64],
    base: &TheoremRunConfig,
    bisect_steps: usize,
    exec: Exec,
) -> Result<Vec<SweepRow>> {
    if ps.is_empty() || families.is_empty() {
        return Err(Error::config("sweep needs at least one p and one family"));
    }
    let mut rows = Vec::with_capacity(ps.len() * families.len());
    for &p in ps {
        for family in families {
            let eval = |param: f64| {
                let cfg = TheoremRunConfig { spec: family.spec(param), p, ..base.clone() };
                theorem_property_run(&cfg).map(|r| (r.pass, r.mu0))
            };
            let out = match family {
                SweepFamily::Circle => bisect_threshold(&[1.0], eval, 0, exec)?,
                _ => bisect_threshold(grid, eval, bisect_steps, exec)?,
            };
            rows.push(SweepRow { p, family: family.label(), param: out.param, mu0_empirical: out.mu0, pass: out.verdict });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_threshold_is_bisected() {
        let out = bisect_threshold(&[1.0, 2.0, 3.0], |x| Ok((x <= 1.7, x)), 20, Exec::default()).unwrap();
        assert_eq!(out.verdict, SweepVerdict::True);
        assert!((out.param - 1.7).abs() < 1e-5 && out.mu0 == out.param);
        let all = bisect_threshold(&[1.0, 2.0], |x| Ok((true, x)), 5, Exec::default()).unwrap();
        assert_eq!((all.param, all.verdict), (2.0, SweepVerdict::True));
    }

    #[test]
    fn non_monotone_pattern_is_ambiguous() {
        let out = bisect_threshold(&[1.0, 2.0, 3.0, 4.0], |x| Ok((x != 2.0, x)), 5, Exec::default()).unwrap();
        assert_eq!(out.verdict, SweepVerdict::Ambiguous);
        assert_eq!(out.mu0, 1.0);
    }

    #[test]
    fn all_failing_reports_round_value() {
        let out = bisect_threshold(&[1.0, 2.0], |x| Ok((false, x + 1.0)), 5, Exec::default()).unwrap();
        assert_eq!((out.mu0, out.verdict), (1.0, SweepVerdict::False));
    }

    #[test]
    fn grid_validation() {
        let eval = |x: f64| Ok((true, x));
        assert!(matches!(bisect_threshold(&[], eval, 1, Exec::default()), Err(Error::ConfigInvalid(_))));
        assert!(matches!(bisect_threshold(&[2.0, 1.0], eval, 1, Exec::default()), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn circle_row_per_p() {
        let base = TheoremRunConfig { n: 64, ..TheoremRunConfig::new(CurveSpec::circle(1.0), 2.0) };
        let rows = mu0_sweep(&[1.5, 2.0, 3.0], &[SweepFamily::Circle], &[], &base, 0, Exec::default()).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.mu0_empirical >= 1.0 && r.pass == SweepVerdict::True));
    }
}

//! Residuals of the curvature evolution equations along marker runs.
//!
//! Markers move purely normally, so the per-marker time difference of κ is
//! the material derivative that appears in
//!
//! ```text
//! ∂ₜκ    − p κᵖ⁻¹ Δκ    = κ²⁺ᵖ + p(p−1) κᵖ⁻² |Dκ|²
//! ∂ₜ(κᵖ) − p κᵖ⁻¹ Δ(κᵖ) = p κᵖ⁻¹ κ²⁺ᵖ
//! ```

use serde::Serialize;

use super::{Resolution, ResidualReport};
use crate::curve::{arclength_derivatives, construct_curve, CurveGeometry, CurveSpec};
use crate::error::{Error, Result};
use crate::flow::{stable_dt, step_markers, FlowConfig, FlowCurve, FlowState};
use crate::par::{self, Exec};
use crate::tolerances::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaVariant {
    Kappa,
    KappaPow,
}

impl KappaVariant {
    pub fn label(self) -> &'static str {
        match self {
            KappaVariant::Kappa => "kappa",
            KappaVariant::KappaPow => "kappa_pow",
        }
    }
}

/// Signed residual per marker at the middle of three consecutive snapshots
/// spaced `dt` apart, plus the magnitude of the source term used to
/// normalize it.
pub fn kappa_residual_field(
    prev: &CurveGeometry,
    cur: &CurveGeometry,
    next: &CurveGeometry,
    dt: f64,
    p: f64,
    variant: KappaVariant,
) -> (Vec<f64>, f64) {
    let k = &cur.kappa;
    let m = k.len();
    let mut res = Vec::with_capacity(m);
    let mut scale: f64 = 0.0;
    match variant {
        KappaVariant::Kappa => {
            let (ks, kss) = arclength_derivatives(&cur.position, k);
            for i in 0..m {
                let dtk = (next.kappa[i] - prev.kappa[i]) / (2.0 * dt);
                let source = k[i].powf(2.0 + p);
                let rhs = p * k[i].powf(p - 1.0) * kss[i] + source + p * (p - 1.0) * k[i].powf(p - 2.0) * ks[i] * ks[i];
                res.push(dtk - rhs);
                scale = scale.max(source.abs());
            }
        }
        KappaVariant::KappaPow => {
            let kp: Vec<f64> = k.iter().map(|v| v.powf(p)).collect();
            let (_, lap) = arclength_derivatives(&cur.position, &kp);
            for i in 0..m {
                let dtk = (next.kappa[i].powf(p) - prev.kappa[i].powf(p)) / (2.0 * dt);
                let factor = p * k[i].powf(p - 1.0);
                let source = factor * k[i].powf(2.0 + p);
                res.push(dtk - factor * lap[i] - source);
                scale = scale.max(source.abs());
            }
        }
    }
    (res, scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowResidual {
    pub max_abs: f64,
    pub scale: f64,
    /// `max_abs / scale`.
    pub relative: f64,
}

/// Largest residual over the interior snapshots of a marker window with
/// uniform steps and unbroken material identity.
pub fn window_residual(window: &[FlowState], p: f64, variant: KappaVariant) -> Result<WindowResidual> {
    if window.len() < 3 {
        return Err(Error::config(format!("evolution residual needs >= 3 snapshots, got {}", window.len())));
    }
    let mut generation = None;
    for s in window {
        let FlowCurve::Markers(m) = &s.curve else {
            return Err(Error::config("evolution residual needs marker-form snapshots"));
        };
        match generation {
            None => generation = Some((m.generation(), m.len())),
            Some(g) if g != (m.generation(), m.len()) => {
                return Err(Error::config("remeshing occurred inside the residual window"));
            }
            _ => {}
        }
    }
    let dt = window[1].t - window[0].t;
    if !(dt > 0.0) || window.windows(2).any(|w| ((w[1].t - w[0].t) - dt).abs() > 1e-9 * dt) {
        return Err(Error::config("evolution residual needs uniformly spaced snapshots"));
    }
    let geoms = window.iter().map(FlowState::geometry).collect::<Result<Vec<_>>>()?;
    let mut max_abs: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 1..geoms.len() - 1 {
        let (r, s) = kappa_residual_field(&geoms[k - 1], &geoms[k], &geoms[k + 1], dt, p, variant);
        max_abs = r.iter().fold(max_abs, |a, v| a.max(v.abs()));
        scale = scale.max(s);
    }
    if !max_abs.is_finite() {
        return Err(Error::non_finite("evolution residual"));
    }
    Ok(WindowResidual { max_abs, scale, relative: max_abs / scale })
}

/// Fixed-step marker run from the embedded support samples of `spec`.
pub fn marker_window(spec: &CurveSpec, cfg: &FlowConfig, n: usize, dt: f64, steps: usize) -> Result<Vec<FlowState>> {
    let (m, _) = construct_curve(spec, n)?.embed()?;
    let mut states = vec![FlowState::markers(m)];
    for _ in 0..steps {
        let next = step_markers(states.last().expect("non-empty"), cfg, dt)?;
        states.push(next);
    }
    Ok(states)
}

/// Joint refinement study `(n, dt) → (2n, dt/4)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaStudy {
    pub spec: CurveSpec,
    pub p: f64,
    pub n0: usize,
    pub levels: usize,
    pub steps: usize,
    pub sigma: f64,
    pub reverse_speed: bool,
}

impl KappaStudy {
    pub fn new(spec: CurveSpec, p: f64) -> Self {
        KappaStudy { spec, p, n0: 128, levels: 3, steps: 50, sigma: 0.4, reverse_speed: false }
    }
}

pub fn kappa_evolution_residual(study: &KappaStudy, variant: KappaVariant, tol: &Tolerances) -> Result<ResidualReport> {
    if study.levels < 3 {
        return Err(Error::config("evolution study needs at least three refinement levels"));
    }
    if study.steps < 2 {
        return Err(Error::config("evolution study needs at least two steps"));
    }
    let cfg = FlowConfig { sigma: study.sigma, reverse_speed: study.reverse_speed, ..FlowConfig::new(study.p) };
    cfg.validate()?;
    let (m0, _) = construct_curve(&study.spec, study.n0)?.embed()?;
    let dt0 = stable_dt(&FlowState::markers(m0), &cfg)?;
    let levels: Vec<(usize, f64)> =
        (0..study.levels).map(|k| (study.n0 << k, dt0 / 4f64.powi(k as i32))).collect();
    let results = par::map_slice(Exec::default(), &levels, |&(n, dt)| {
        let window = marker_window(&study.spec, &cfg, n, dt, study.steps)?;
        window_residual(&window, study.p, variant)
    });
    let residuals = results.into_iter().map(|r| r.map(|w| w.relative)).collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::new(
        format!("kappa_evolution[{}]", variant.label()),
        levels.iter().map(|&(n, dt)| Resolution { n, dt: Some(dt) }).collect(),
        residuals,
        Some(tol.kappa_reduction.log2()),
        tol.kappa_ceiling,
        tol.roundoff_floor,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_residual_is_first_order_in_dt() {
        let cfg = FlowConfig::new(2.0);
        let spec = CurveSpec::circle(1.0);
        let r1 = window_residual(&marker_window(&spec, &cfg, 128, 1e-4, 10).unwrap(), 2.0, KappaVariant::Kappa).unwrap();
        let r2 = window_residual(&marker_window(&spec, &cfg, 128, 5e-5, 10).unwrap(), 2.0, KappaVariant::Kappa).unwrap();
        assert!(r1.relative < 1e-3, "{r1:?}");
        assert!(r1.relative / r2.relative > 1.8, "{r1:?} {r2:?}");
    }

    #[test]
    fn ellipse_refinement_reduces_residual() {
        let tol = Tolerances::default();
        for variant in [KappaVariant::Kappa, KappaVariant::KappaPow] {
            let rep = kappa_evolution_residual(&KappaStudy::new(CurveSpec::ellipse(1.2, 1.0), 2.0), variant, &tol).unwrap();
            assert!(rep.pass, "{rep:?}");
            for w in rep.residuals.windows(2) {
                assert!(w[0] / w[1] >= 3.0, "{rep:?}");
            }
        }
    }

    #[test]
    fn variants_agree_through_chain_rule() {
        let cfg = FlowConfig::new(2.0);
        let p = 2.0;
        let spec = CurveSpec::ellipse(1.2, 1.0);
        let gap = |n: usize, dt: f64| {
            let w = marker_window(&spec, &cfg, n, dt, 2).unwrap();
            let g: Vec<_> = w.iter().map(|s| s.geometry().unwrap()).collect();
            let (rk, sk) = kappa_residual_field(&g[0], &g[1], &g[2], dt, p, KappaVariant::Kappa);
            let (rp, sp) = kappa_residual_field(&g[0], &g[1], &g[2], dt, p, KappaVariant::KappaPow);
            let k = &g[1].kappa;
            let d = (0..k.len()).map(|i| (rp[i] - p * k[i].powf(p - 1.0) * rk[i]).abs()).fold(0.0, f64::max);
            (d / sp, sk)
        };
        let (g1, _) = gap(128, 1e-4);
        let (g2, _) = gap(256, 2.5e-5);
        assert!(g1 < 1e-2, "{g1}");
        assert!(g2 < g1, "{g2} >= {g1}");
    }

    #[test]
    fn reversed_speed_is_detected() {
        let tol = Tolerances::default();
        let study = KappaStudy { reverse_speed: true, ..KappaStudy::new(CurveSpec::ellipse(1.2, 1.0), 2.0) };
        if let Ok(rep) = kappa_evolution_residual(&study, KappaVariant::Kappa, &tol) {
            assert!(!rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn window_preconditions() {
        let cfg = FlowConfig::new(2.0);
        let spec = CurveSpec::ellipse(1.2, 1.0);
        let mut w = marker_window(&spec, &cfg, 64, 1e-4, 3).unwrap();
        assert!(matches!(window_residual(&w[..2], 2.0, KappaVariant::Kappa), Err(Error::ConfigInvalid(_))));
        let FlowCurve::Markers(m) = &w[2].curve else { unreachable!() };
        w[2].curve = FlowCurve::Markers(m.resample_arclength(64).unwrap());
        assert!(matches!(window_residual(&w, 2.0, KappaVariant::Kappa), Err(Error::ConfigInvalid(_))));
    }
}

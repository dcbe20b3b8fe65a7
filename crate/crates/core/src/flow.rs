//! Explicit time integration of power curvature flow.
//!
//! The support form evolves `∂h/∂t = −κᵖ` on the fixed Gauss-angle grid.
//! The marker form moves every material point along its outward normal,
//! `xᵢ ← xᵢ − dt κᵢᵖ νᵢ`, and never remeshes on its own.

use serde::Serialize;

use crate::curve::{isoperimetric_ratio, CurveGeometry, MarkerCurve, SupportCurve};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    /// Flow exponent, strictly greater than one.
    pub p: f64,
    /// Timestep safety factor in `(0, 0.9]`. Above 0.75 the highest grid
    /// mode of the support form is amplified by the fourth-order stencil;
    /// the growth saturates but leaves grid-scale ripples.
    pub sigma: f64,
    /// Stop once max κ reaches this value. Defaults to `1e3 · max κ(0)`.
    pub kappa_stop: Option<f64>,
    /// Stop once the enclosed area drops to this value. Defaults to
    /// `1e-4 · A(0)`.
    pub area_stop: Option<f64>,
    pub t_end: Option<f64>,
    pub max_steps: Option<u64>,
    pub monitor_every: u64,
    /// Steps between O(m²) self-intersection checks of marker curves.
    pub simplicity_every: u64,
    /// Moves the curve outward with speed κᵖ instead of inward. Only used to
    /// confirm that the verification harness detects a wrong sign.
    pub reverse_speed: bool,
}

impl FlowConfig {
    pub fn new(p: f64) -> Self {
        FlowConfig {
            p,
            sigma: 0.4,
            kappa_stop: None,
            area_stop: None,
            t_end: None,
            max_steps: None,
            monitor_every: 50,
            simplicity_every: 50,
            reverse_speed: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::config(format!("p must exceed 1, got {}", self.p)));
        }
        if !(self.sigma > 0.0 && self.sigma <= 0.9) {
            return Err(Error::config(format!("sigma must lie in (0, 0.9], got {}", self.sigma)));
        }
        for (name, v) in [("kappa_stop", self.kappa_stop), ("area_stop", self.area_stop)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::config(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if let Some(t) = self.t_end {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::config(format!("t_end must be nonnegative, got {t}")));
            }
        }
        if self.monitor_every == 0 || self.simplicity_every == 0 {
            return Err(Error::config("monitor_every and simplicity_every must be positive"));
        }
        Ok(())
    }

    fn speed_sign(&self) -> f64 {
        if self.reverse_speed {
            -1.0
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowCurve {
    Support(SupportCurve),
    Markers(MarkerCurve),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub curve: FlowCurve,
    pub steps: u64,
    pub last_dt: f64,
}

impl FlowState {
    pub fn support(c: SupportCurve) -> Self {
        FlowState { t: 0.0, curve: FlowCurve::Support(c), steps: 0, last_dt: 0.0 }
    }

    pub fn markers(m: MarkerCurve) -> Self {
        FlowState { t: 0.0, curve: FlowCurve::Markers(m), steps: 0, last_dt: 0.0 }
    }

    pub fn geometry(&self) -> Result<CurveGeometry> {
        match &self.curve {
            FlowCurve::Support(c) => c.geometry(),
            FlowCurve::Markers(m) => m.geometry(),
        }
    }
}

/// Largest explicit Euler step allowed by the linearized diffusion
/// coefficient: `p κᵖ⁺¹` in Gauss angle for the support form, `p κᵖ⁻¹` in
/// arc length for markers.
pub fn stable_dt(state: &FlowState, cfg: &FlowConfig) -> Result<f64> {
    cfg.validate()?;
    let p = cfg.p;
    let dt = match &state.curve {
        FlowCurve::Support(c) => {
            let kmax = max_finite(&c.curvature()?)?;
            cfg.sigma * c.dtheta().powi(2) / (2.0 * p * kmax.powf(p + 1.0))
        }
        FlowCurve::Markers(m) => {
            let g = m.geometry()?;
            let kmax = max_finite(&g.kappa)?;
            let ds_min = g.ds.iter().copied().fold(f64::INFINITY, f64::min);
            cfg.sigma * ds_min * ds_min / (2.0 * p * kmax.powf(p - 1.0))
        }
    };
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::non_finite(format!("stable timestep {dt}")));
    }
    Ok(dt)
}

fn max_finite(v: &[f64]) -> Result<f64> {
    let mut m = f64::NEG_INFINITY;
    for (i, &x) in v.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::non_finite(format!("curvature {x} at sample {i}")));
        }
        m = m.max(x);
    }
    Ok(m)
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("timestep must be positive, got {dt}")))
    }
}

/// One Euler step of `∂h/∂t = −κᵖ`.
pub fn step_support(state: &FlowState, cfg: &FlowConfig, dt: f64) -> Result<FlowState> {
    check_dt(dt)?;
    let FlowCurve::Support(c) = &state.curve else {
        return Err(Error::config("step_support requires a support-form state"));
    };
    let kappa = c.curvature()?;
    let s = cfg.speed_sign();
    let h: Vec<f64> = c
        .values()
        .iter()
        .zip(&kappa)
        .map(|(h, k)| h - s * dt * k.powf(cfg.p))
        .collect();
    let next = SupportCurve::from_values(h)?;
    Ok(FlowState { t: state.t + dt, curve: FlowCurve::Support(next), steps: state.steps + 1, last_dt: dt })
}

/// One Euler step of `xᵢ ← xᵢ − dt κᵢᵖ νᵢ`. Purely normal; material identity
/// is preserved.
pub fn step_markers(state: &FlowState, cfg: &FlowConfig, dt: f64) -> Result<FlowState> {
    check_dt(dt)?;
    let FlowCurve::Markers(m) = &state.curve else {
        return Err(Error::config("step_markers requires a marker-form state"));
    };
    let g = m.geometry()?;
    let s = cfg.speed_sign();
    let pts = g
        .position
        .iter()
        .zip(&g.normal)
        .zip(&g.kappa)
        .map(|((x, nu), k)| x - nu * (s * dt * k.powf(cfg.p)))
        .collect();
    let next = MarkerCurve::from_parts_unchecked(pts, m.generation());
    next.check_convex()?;
    let steps = state.steps + 1;
    if steps.is_multiple_of(cfg.simplicity_every) {
        next.check_simple()?;
    }
    Ok(FlowState { t: state.t + dt, curve: FlowCurve::Markers(next), steps, last_dt: dt })
}

pub fn step(state: &FlowState, cfg: &FlowConfig, dt: f64) -> Result<FlowState> {
    match state.curve {
        FlowCurve::Support(_) => step_support(state, cfg, dt),
        FlowCurve::Markers(_) => step_markers(state, cfg, dt),
    }
}

/// Extinction time `R₀ᵖ⁺¹/(p+1)` of a circle.
pub fn circle_extinction_time(r0: f64, p: f64) -> Result<f64> {
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(Error::config(format!("R0 must be positive, got {r0}")));
    }
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::config(format!("p must exceed 1, got {p}")));
    }
    Ok(r0.powf(p + 1.0) / (p + 1.0))
}

/// Extinction time of the circle with the same enclosed area.
pub fn estimated_extinction_time(area: f64, p: f64) -> Result<f64> {
    circle_extinction_time((area / std::f64::consts::PI).sqrt(), p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnapshotStats {
    pub area: f64,
    pub length: f64,
    pub isoperimetric: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
}

impl SnapshotStats {
    pub fn of(g: &CurveGeometry) -> Result<Self> {
        Ok(SnapshotStats {
            area: g.area,
            length: g.length,
            isoperimetric: isoperimetric_ratio(g)?,
            kappa_min: g.kappa_min(),
            kappa_max: g.kappa_max(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state: FlowState,
    pub stats: SnapshotStats,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TerminalReason {
    TEnd,
    KappaStop,
    AreaStop,
    MaxSteps,
    /// ConvexityLost or NonFinite during a step. The trajectory up to the
    /// failing step is kept.
    Aborted(Error),
}

impl TerminalReason {
    pub fn label(&self) -> &'static str {
        match self {
            TerminalReason::TEnd => "t_end",
            TerminalReason::KappaStop => "kappa_stop",
            TerminalReason::AreaStop => "area_stop",
            TerminalReason::MaxSteps => "max_steps",
            TerminalReason::Aborted(_) => "aborted",
        }
    }

    pub fn is_aborted(&self) -> bool {
        matches!(self, TerminalReason::Aborted(_))
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub terminal: TerminalReason,
    /// State at termination (also the last snapshot when any were taken).
    pub final_state: FlowState,
}

/// Observer invoked on every recorded snapshot.
pub trait Monitor {
    fn observe(&mut self, snap: &Snapshot, geometry: &CurveGeometry);
}

impl<F: FnMut(&Snapshot, &CurveGeometry)> Monitor for F {
    fn observe(&mut self, snap: &Snapshot, geometry: &CurveGeometry) {
        self(snap, geometry)
    }
}

/// Steps `state` until `t_end`, `kappa_stop`, `area_stop` or `max_steps`.
///
/// Snapshots are recorded at the start, every `monitor_every` steps (only
/// when monitors are attached) and at termination.
pub fn run_flow(state: FlowState, cfg: &FlowConfig, monitors: &mut [&mut dyn Monitor]) -> Result<Trajectory> {
    cfg.validate()?;
    if let Some(t_end) = cfg.t_end {
        if t_end <= state.t {
            return Ok(Trajectory { snapshots: Vec::new(), terminal: TerminalReason::TEnd, final_state: state });
        }
    }
    let g0 = state.geometry()?;
    let kappa_stop = cfg.kappa_stop.unwrap_or(1e3 * g0.kappa_max());
    let area_stop = cfg.area_stop.unwrap_or(1e-4 * g0.area);

    let record = |state: &FlowState, g: &CurveGeometry, monitors: &mut [&mut dyn Monitor]| -> Result<Snapshot> {
        let snap = Snapshot { state: state.clone(), stats: SnapshotStats::of(g)? };
        for m in monitors.iter_mut() {
            m.observe(&snap, g);
        }
        Ok(snap)
    };

    let mut snapshots = vec![record(&state, &g0, monitors)?];
    let mut cur = state;
    let mut g = g0;
    let terminal = loop {
        if g.area <= area_stop {
            break TerminalReason::AreaStop;
        }
        if g.kappa_max() >= kappa_stop {
            break TerminalReason::KappaStop;
        }
        if cfg.t_end.is_some_and(|t_end| cur.t >= t_end) {
            break TerminalReason::TEnd;
        }
        if cfg.max_steps.is_some_and(|m| cur.steps >= m) {
            break TerminalReason::MaxSteps;
        }
        let next = stable_dt(&cur, cfg).and_then(|dt| {
            let (dt, hit_end) = match cfg.t_end {
                Some(t_end) if cur.t + dt >= t_end => (t_end - cur.t, Some(t_end)),
                _ => (dt, None),
            };
            let mut s = step(&cur, cfg, dt)?;
            if let Some(t_end) = hit_end {
                s.t = t_end;
            }
            let g = s.geometry()?;
            Ok((s, g))
        });
        match next {
            Ok((s, gn)) => {
                cur = s;
                g = gn;
            }
            Err(e) => break TerminalReason::Aborted(e),
        }
        if !monitors.is_empty() && cur.steps.is_multiple_of(cfg.monitor_every) {
            snapshots.push(record(&cur, &g, monitors)?);
        }
    };
    let already = snapshots.last().is_some_and(|s| s.state.steps == cur.steps);
    if !already {
        snapshots.push(record(&cur, &g, monitors)?);
    }
    Ok(Trajectory { snapshots, terminal, final_state: cur })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{construct_curve, CurveSpec, Vec2};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn circle_state(r: f64, n: usize) -> FlowState {
        FlowState::support(construct_curve(&CurveSpec::circle(r), n).unwrap())
    }

    fn support_values(s: &FlowState) -> &[f64] {
        match &s.curve {
            FlowCurve::Support(c) => c.values(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn stable_dt_formula() {
        let cfg = FlowConfig::new(2.0);
        let dt = stable_dt(&circle_state(1.0, 256), &cfg).unwrap();
        let expected = 0.4 * (2.0 * PI / 256.0).powi(2) / 4.0;
        assert_abs_diff_eq!(dt, expected, epsilon = 1e-18);
        assert_abs_diff_eq!(dt, 6.02e-5, epsilon = 1e-7);
        // κ doubled.
        let dt_half = stable_dt(&circle_state(0.5, 256), &cfg).unwrap();
        assert_abs_diff_eq!(dt_half / dt, 2f64.powf(-3.0), epsilon = 1e-12);

        let bad = FlowConfig { sigma: 0.0, ..FlowConfig::new(2.0) };
        assert!(matches!(stable_dt(&circle_state(1.0, 256), &bad), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn single_support_step_on_circle() {
        let cfg = FlowConfig::new(2.0);
        let s = step_support(&circle_state(1.0, 256), &cfg, 1e-4).unwrap();
        for h in support_values(&s) {
            assert_abs_diff_eq!(*h, 1.0 - 1e-4, epsilon = 1e-12);
        }
        assert_eq!(s.steps, 1);
        assert_abs_diff_eq!(s.t, 1e-4);
    }

    #[test]
    fn circle_radius_follows_closed_form() {
        let cfg = FlowConfig { t_end: Some(0.2), ..FlowConfig::new(2.0) };
        let traj = run_flow(circle_state(1.0, 256), &cfg, &mut []).unwrap();
        assert_eq!(traj.terminal, TerminalReason::TEnd);
        assert_abs_diff_eq!(traj.final_state.t, 0.2, epsilon = 1e-15);
        let expected = (1.0f64 - 3.0 * 0.2).powf(1.0 / 3.0);
        assert_abs_diff_eq!(expected, 0.7368, epsilon = 1e-4);
        for h in support_values(&traj.final_state) {
            assert_abs_diff_eq!(*h, expected, epsilon = 1e-4);
        }
    }

    #[test]
    fn nearly_round_ellipse_becomes_rounder() {
        let c = construct_curve(&CurveSpec::ellipse(1.05, 1.0), 256).unwrap();
        let ratio = |g: &CurveGeometry| g.kappa_max() / g.kappa_min();
        let r0 = ratio(&c.geometry().unwrap());
        let cfg = FlowConfig { t_end: Some(0.05), ..FlowConfig::new(2.0) };
        let traj = run_flow(FlowState::support(c), &cfg, &mut []).unwrap();
        let r1 = ratio(&traj.final_state.geometry().unwrap());
        assert!(r1 < r0, "{r1} >= {r0}");
    }

    #[test]
    fn marker_step_on_regular_polygon() {
        let pts: Vec<Vec2> = (0..128)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / 128.0;
                Vec2::new(t.cos(), t.sin())
            })
            .collect();
        let state = FlowState::markers(MarkerCurve::new(pts).unwrap());
        let cfg = FlowConfig::new(2.0);
        let dt = stable_dt(&state, &cfg).unwrap();
        let s = step_markers(&state, &cfg, dt).unwrap();
        let FlowCurve::Markers(m) = &s.curve else { unreachable!() };
        for p in m.points() {
            assert_abs_diff_eq!(p.norm(), 1.0 - dt, epsilon = 1e-12);
        }
    }

    #[test]
    fn marker_step_failure_leaves_state_unchanged() {
        let (m, _) = construct_curve(&CurveSpec::ellipse(2.0, 1.0), 128).unwrap().embed().unwrap();
        let state = FlowState::markers(m);
        let before = state.clone();
        let cfg = FlowConfig::new(2.0);
        let err = step_markers(&state, &cfg, 0.1).unwrap_err();
        assert!(matches!(err, Error::ConvexityLost { .. }), "{err:?}");
        assert_eq!(state, before);
    }

    #[test]
    fn marker_and_support_integrators_agree() {
        // Max distance of markers to the support-form polygon after the same
        // horizon, at two resolutions.
        let run = |n: usize| {
            let c = construct_curve(&CurveSpec::ellipse(1.2, 1.0), n).unwrap();
            let (m, _) = c.embed().unwrap();
            let horizon = 0.1 * estimated_extinction_time(c.area().unwrap(), 2.0).unwrap();
            let cfg = FlowConfig { t_end: Some(horizon), ..FlowConfig::new(2.0) };
            let ts = run_flow(FlowState::support(c), &cfg, &mut []).unwrap();
            let tm = run_flow(FlowState::markers(m), &cfg, &mut []).unwrap();
            assert_eq!(tm.terminal, TerminalReason::TEnd);
            let poly = ts.final_state.geometry().unwrap().position;
            let FlowCurve::Markers(mk) = &tm.final_state.curve else { unreachable!() };
            mk.points().iter().map(|p| distance_to_polygon(p, &poly)).fold(0.0, f64::max)
        };
        let (e1, e2) = (run(128), run(256));
        assert!(e1 < 2e-3, "e1 = {e1}");
        assert!(e2 < e1, "{e2} >= {e1}");
    }

    fn distance_to_polygon(p: &Vec2, poly: &[Vec2]) -> f64 {
        let m = poly.len();
        (0..m)
            .map(|i| {
                let (a, b) = (poly[i], poly[(i + 1) % m]);
                let ab = b - a;
                let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
                (p - (a + ab * t)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn run_stops_at_area_floor_before_extinction() {
        // Euler overshoots the extinction time by a relative O(dt); the floor
        // must sit above that margin.
        let cfg = FlowConfig { area_stop: Some(1e-3 * PI), ..FlowConfig::new(2.0) };
        let traj = run_flow(circle_state(1.0, 512), &cfg, &mut []).unwrap();
        assert_eq!(traj.terminal, TerminalReason::AreaStop);
        assert!(traj.final_state.t < 1.0 / 3.0);
        assert_eq!(traj.snapshots.len(), 2);
    }

    #[test]
    fn zero_horizon_gives_empty_trajectory() {
        let cfg = FlowConfig { t_end: Some(0.0), ..FlowConfig::new(2.0) };
        let traj = run_flow(circle_state(1.0, 128), &cfg, &mut []).unwrap();
        assert!(traj.snapshots.is_empty());
        assert_eq!(traj.terminal, TerminalReason::TEnd);
    }

    #[test]
    fn monitors_see_every_recorded_snapshot() {
        let cfg = FlowConfig { t_end: Some(0.01), monitor_every: 10, ..FlowConfig::new(2.0) };
        let mut seen = Vec::new();
        let mut mon = |s: &Snapshot, _: &CurveGeometry| seen.push(s.state.steps);
        let traj = run_flow(circle_state(1.0, 128), &cfg, &mut [&mut mon]).unwrap();
        assert_eq!(seen.len(), traj.snapshots.len());
        assert!(seen.len() > 2);
        assert!(seen.windows(2).all(|w| w[0] < w[1]));
        assert!(seen[1..seen.len() - 1].iter().all(|s| s % 10 == 0));
    }

    #[test]
    fn extinction_time_examples() {
        assert_abs_diff_eq!(circle_extinction_time(1.0, 2.0).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(circle_extinction_time(2.0, 1.5).unwrap(), 2.2627, epsilon = 1e-4);
        assert!(matches!(circle_extinction_time(1.0, 1.0), Err(Error::ConfigInvalid(_))));
        assert!(matches!(circle_extinction_time(-1.0, 2.0), Err(Error::ConfigInvalid(_))));
    }

    #[test]
    fn invariants_along_support_run() {
        let spec = CurveSpec::fourier(1.0, &[(2, 0.03, 0.4), (3, 0.02, 1.1)]);
        let c0 = construct_curve(&spec, 128).unwrap();
        let h0 = c0.values().to_vec();
        let cfg = FlowConfig::new(2.0);
        let mut s = FlowState::support(c0);
        let mut area = s.geometry().unwrap().area;
        for _ in 0..400 {
            let dt = stable_dt(&s, &cfg).unwrap();
            s = step(&s, &cfg, dt).unwrap();
            let a = s.geometry().unwrap().area;
            assert!(a < area - 1e-12 * area, "area not strictly decreasing");
            area = a;
            for (h, h0) in support_values(&s).iter().zip(&h0) {
                assert!(h <= h0);
            }
        }
    }

    #[test]
    fn circles_stay_circles() {
        let cfg = FlowConfig { t_end: Some(0.3), ..FlowConfig::new(3.0) };
        let mut spread: f64 = 0.0;
        let mut mon = |s: &Snapshot, _: &CurveGeometry| {
            let h = support_values(&s.state);
            let (lo, hi) = h.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
            spread = spread.max(hi - lo);
        };
        let cfg = FlowConfig { monitor_every: 1, ..cfg };
        run_flow(circle_state(1.3, 128), &cfg, &mut [&mut mon]).unwrap();
        assert!(spread <= 1e-10);
    }

    #[test]
    fn circle_error_drops_under_refinement() {
        let err = |n: usize| {
            let cfg = FlowConfig { t_end: Some(0.25), ..FlowConfig::new(2.0) };
            let traj = run_flow(circle_state(1.0, n), &cfg, &mut []).unwrap();
            let r = support_values(&traj.final_state)[0];
            (r - (1.0f64 - 3.0 * 0.25).powf(1.0 / 3.0)).abs()
        };
        let (e1, e2) = (err(64), err(128));
        assert!(e1 / e2 >= 3.0, "ratio {}", e1 / e2);
    }
}

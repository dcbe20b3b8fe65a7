//! Two-point non-collapsing diagnostics.
//!
//! For samples `i ≠ j` of a convex curve,
//!
//! ```text
//! Z(i, j) = 2⟨X(i) − X(j), ν(i)⟩ / ‖X(i) − X(j)‖²
//! ```
//!
//! is the curvature of the circle tangent to the curve at `X(i)` that passes
//! through `X(j)`. Its supremum over `j` is the curvature of the largest
//! interior disc touching at `X(i)`, and the curve is μ-non-collapsed when
//! that supremum never exceeds `μ κ(i)`. Equivalently every point admits an
//! interior tangent disc of radius `δ/κ` with `δ = 1/μ`.

use serde::Serialize;

use crate::curve::{CurveGeometry, Vec2};
use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// Pairs with periodic index distance at most this are excluded from the
/// scan; `κ(i)` stands in for the diagonal limit.
pub const DIAGONAL_WINDOW: usize = 2;

const MIN_CHORD: f64 = 1e-12;
const ORACLE_MAX_ITER: usize = 200;

/// Periodic index distance on a closed curve of `n` samples.
pub fn index_gap(i: usize, j: usize, n: usize) -> usize {
    let d = i.abs_diff(j);
    d.min(n - d)
}

#[inline]
fn z_unchecked(g: &CurveGeometry, i: usize, j: usize) -> f64 {
    let c = g.position[i] - g.position[j];
    2.0 * c.dot(&g.normal[i]) / c.norm_squared()
}

/// `Z(i, j)`.
pub fn z_value(g: &CurveGeometry, i: usize, j: usize) -> Result<f64> {
    Ok(two_point(g, i, j)?.z)
}

/// A chord `X(i) − X(j)` with its derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoPointConfig {
    pub i: usize,
    pub j: usize,
    pub d: f64,
    /// Unit chord direction `(X(i) − X(j))/d`.
    #[serde(skip)]
    pub chord_dir: Vec2,
    #[serde(rename = "Z")]
    pub z: f64,
    /// Contact angle, `sin α = |⟨chord_dir, ν(i)⟩|`, in `[0, π/2]`.
    pub alpha: f64,
}

pub fn two_point(g: &CurveGeometry, i: usize, j: usize) -> Result<TwoPointConfig> {
    let n = g.len();
    if i >= n || j >= n {
        return Err(Error::config(format!("sample index out of range ({i}, {j}) for {n} samples")));
    }
    if i == j {
        return Err(Error::DegenerateChord { i, j });
    }
    let c = g.position[i] - g.position[j];
    let d = c.norm();
    if !(d >= MIN_CHORD) {
        return Err(Error::DegenerateChord { i, j });
    }
    let w = c / d;
    let s = w.dot(&g.normal[i]);
    Ok(TwoPointConfig { i, j, d, chord_dir: w, z: 2.0 * s / d, alpha: s.abs().min(1.0).asin() })
}

/// Largest admissible `Z(i, ·)`, with the partner attaining it. `partner` is
/// `None` when the diagonal candidate `κ(i)` wins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSup {
    pub z_sup: f64,
    pub partner: Option<usize>,
    /// Best off-window value `max_{gap > window} Z(i, j)` and its index.
    pub best_pair: (f64, usize),
}

pub fn point_sup(g: &CurveGeometry, i: usize) -> PointSup {
    let n = g.len();
    let mut best = (f64::NEG_INFINITY, usize::MAX);
    for j in 0..n {
        if index_gap(i, j, n) <= DIAGONAL_WINDOW {
            continue;
        }
        let z = z_unchecked(g, i, j);
        if z > best.0 {
            best = (z, j);
        }
    }
    let kappa = g.kappa[i];
    if best.0 > kappa {
        PointSup { z_sup: best.0, partner: Some(best.1), best_pair: best }
    } else {
        PointSup { z_sup: kappa, partner: None, best_pair: best }
    }
}

/// Curvature of the largest interior disc touching the curve at sample `i`.
pub fn inscribed_curvature(g: &CurveGeometry, i: usize) -> f64 {
    point_sup(g, i).z_sup
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonCollapseReport {
    pub z_sup: Vec<f64>,
    pub partner: Vec<Option<usize>>,
    /// `max_i Z_sup(i)/κ(i)`; at least one.
    pub mu: f64,
    /// Scanned pair with the largest `Z(i, j)/κ(i)`, ties broken by the
    /// smallest `(i, j)`.
    pub argmax: TwoPointConfig,
    /// `1/μ`, the radius factor of the equivalent tangent-ball statement.
    pub delta_equiv: f64,
}

impl NonCollapseReport {
    /// `Z(i, j) ≤ μ κ(i)` over every scanned pair, up to `rel_tol`.
    pub fn check_defining_inequality(&self, g: &CurveGeometry, rel_tol: f64) -> Result<()> {
        let n = g.len();
        for i in 0..n {
            for j in 0..n {
                if index_gap(i, j, n) <= DIAGONAL_WINDOW {
                    continue;
                }
                let z = z_unchecked(g, i, j);
                if z > self.mu * g.kappa[i] * (1.0 + rel_tol) {
                    return Err(Error::non_finite(format!(
                        "Z({i},{j}) = {z} exceeds mu*kappa = {}",
                        self.mu * g.kappa[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn mu_report(g: &CurveGeometry) -> Result<NonCollapseReport> {
    mu_report_with(g, Exec::default())
}

/// Exhaustive O(n²) pair scan. The result does not depend on `exec`.
pub fn mu_report_with(g: &CurveGeometry, exec: Exec) -> Result<NonCollapseReport> {
    let n = g.len();
    if n <= 2 * DIAGONAL_WINDOW + 1 {
        return Err(Error::config(format!("pair scan needs more than {} samples", 2 * DIAGONAL_WINDOW + 1)));
    }
    if let Some(i) = g.kappa.iter().position(|k| !(k.is_finite() && *k > 0.0)) {
        return Err(Error::ConvexityLost { index: i, value: g.kappa[i] });
    }
    let sups = par::map_range(exec, n, |i| point_sup(g, i));

    let mut best: Option<(f64, usize, usize)> = None;
    for (i, s) in sups.iter().enumerate() {
        let ratio = s.best_pair.0 / g.kappa[i];
        if !ratio.is_finite() {
            return Err(Error::non_finite(format!("pair ratio at sample {i}")));
        }
        if best.is_none_or(|(r, _, _)| ratio > r) {
            best = Some((ratio, i, s.best_pair.1));
        }
    }
    let (pair_ratio, i, j) = best.expect("non-empty scan");
    let mu = pair_ratio.max(1.0);
    Ok(NonCollapseReport {
        z_sup: sups.iter().map(|s| s.z_sup).collect(),
        partner: sups.iter().map(|s| s.partner).collect(),
        mu,
        argmax: two_point(g, i, j)?,
        delta_equiv: 1.0 / mu,
    })
}

fn disc_contained(g: &CurveGeometry, center: &Vec2, r: f64, tol: f64) -> bool {
    g.position.iter().all(|p| (p - center).norm() >= r - tol)
}

/// Radius of the largest disc tangent at `X(i)` from inside, by bisection on
/// the radius with a containment test against all samples. Independent of
/// the pair scan.
pub fn inscribed_radius_oracle(g: &CurveGeometry, i: usize) -> Result<f64> {
    inscribed_radius_oracle_with_diameter(g, i, g.diameter())
}

fn inscribed_radius_oracle_with_diameter(g: &CurveGeometry, i: usize, diameter: f64) -> Result<f64> {
    if i >= g.len() {
        return Err(Error::config(format!("sample index {i} out of range")));
    }
    if !(diameter.is_finite() && diameter > 0.0) {
        return Err(Error::non_finite(format!("diameter {diameter}")));
    }
    let tol_geom = 1e-12 * diameter;
    let tol_r = 1e-10 * diameter;
    let (x, nu) = (g.position[i], g.normal[i]);
    let (mut lo, mut hi) = (0.0, diameter);
    for _ in 0..ORACLE_MAX_ITER {
        if hi - lo < tol_r {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if disc_contained(g, &(x - nu * mid), mid, tol_geom) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NotConverged { what: "inscribed radius bisection", iterations: ORACLE_MAX_ITER })
}

/// Oracle radii at every sample.
pub fn oracle_radii(g: &CurveGeometry, exec: Exec) -> Result<Vec<f64>> {
    let diameter = g.diameter();
    par::map_range(exec, g.len(), |i| inscribed_radius_oracle_with_diameter(g, i, diameter))
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaCheck {
    pub alpha: f64,
    /// Whether the chord is shorter than the radius `1/Z`.
    pub d_lt_inv_z: bool,
}

impl AlphaCheck {
    /// A short chord forces the contact angle to be at most π/4.
    pub fn holds(&self, tol_alpha: f64) -> bool {
        !self.d_lt_inv_z || self.alpha <= std::f64::consts::FRAC_PI_4 + tol_alpha
    }
}

pub fn alpha_check(g: &CurveGeometry, i: usize, j: usize) -> Result<AlphaCheck> {
    let tp = two_point(g, i, j)?;
    if !(tp.z > 0.0) {
        return Err(Error::config(format!("alpha check requires Z > 0, got {}", tp.z)));
    }
    Ok(AlphaCheck { alpha: tp.alpha, d_lt_inv_z: tp.d < 1.0 / tp.z })
}

/// Ordering and symmetry at a maximizing pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaximizerCheck {
    pub kappa_i: f64,
    pub kappa_j: f64,
    pub z_ij: f64,
    pub z_ji: f64,
}

impl MaximizerCheck {
    pub fn at(g: &CurveGeometry, i: usize, j: usize) -> Result<Self> {
        Ok(MaximizerCheck { kappa_i: g.kappa[i], kappa_j: g.kappa[j], z_ij: z_value(g, i, j)?, z_ji: z_value(g, j, i)? })
    }

    /// `κ(i) ≤ κ(j) ≤ Z(i, j)` up to `rel_tol · κ(i)`.
    pub fn ordered(&self, rel_tol: f64) -> bool {
        let tol = rel_tol * self.kappa_i;
        self.kappa_i <= self.kappa_j + tol && self.kappa_j <= self.z_ij + tol
    }

    /// `|Z(i, j) − Z(j, i)| ≤ rel_tol · Z(i, j)`.
    pub fn symmetric(&self, rel_tol: f64) -> bool {
        (self.z_ij - self.z_ji).abs() <= rel_tol * self.z_ij
    }
}

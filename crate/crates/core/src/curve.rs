//! Closed convex plane curves.
//!
//! Two representations are used throughout the crate:
//!
//! * [`SupportCurve`]: the support function `h(θ)` sampled on a uniform
//!   Gauss-angle grid `θᵢ = 2πi/n`. The outward normal at sample `i` is
//!   exactly `(cos θᵢ, sin θᵢ)` and the curvature is `1/(h + h'')`.
//! * [`MarkerCurve`]: a counterclockwise polyline of material points whose
//!   differential quantities come from three-point stencils in arc length.
//!
//! Both produce a [`CurveGeometry`], the common input of the two-point
//! diagnostics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec2 = nalgebra::Vector2<f64>;

pub const MIN_SUPPORT_SAMPLES: usize = 64;
pub const MIN_MARKERS: usize = 16;
/// Threshold on `h + h''` below which a support curve counts as non-convex.
pub const EPS_CONVEX: f64 = 1e-9;

/// Clockwise rotation by π/2. Maps the counterclockwise tangent to the
/// outward normal.
#[inline]
pub fn rot_cw(v: &Vec2) -> Vec2 {
    Vec2::new(v.y, -v.x)
}

#[inline]
fn unit_normal(theta: f64) -> Vec2 {
    Vec2::new(theta.cos(), theta.sin())
}

#[inline]
fn unit_tangent(theta: f64) -> Vec2 {
    Vec2::new(-theta.sin(), theta.cos())
}

/// One Fourier mode `a·cos(kθ + φ)`, written as `[k, a, φ]` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierMode(pub u32, pub f64, pub f64);

/// Analytic initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum CurveSpec {
    Circle {
        #[serde(rename = "R")]
        r: f64,
    },
    Ellipse {
        a: f64,
        b: f64,
    },
    Fourier {
        #[serde(rename = "R")]
        r: f64,
        modes: Vec<FourierMode>,
    },
}

impl CurveSpec {
    pub fn circle(r: f64) -> Self {
        CurveSpec::Circle { r }
    }

    pub fn ellipse(a: f64, b: f64) -> Self {
        CurveSpec::Ellipse { a, b }
    }

    pub fn fourier(r: f64, modes: &[(u32, f64, f64)]) -> Self {
        CurveSpec::Fourier {
            r,
            modes: modes.iter().map(|&(k, a, p)| FourierMode(k, a, p)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self {
            CurveSpec::Circle { r } => pos("R", *r),
            CurveSpec::Ellipse { a, b } => {
                pos("a", *a)?;
                pos("b", *b)?;
                if a < b {
                    return Err(Error::config(format!("ellipse requires a >= b, got a={a}, b={b}")));
                }
                Ok(())
            }
            CurveSpec::Fourier { r, modes } => {
                pos("R", *r)?;
                for m in modes {
                    if m.0 < 2 {
                        return Err(Error::config(format!("fourier mode index must be >= 2, got {}", m.0)));
                    }
                    if !m.1.is_finite() || !m.2.is_finite() {
                        return Err(Error::config("fourier amplitude and phase must be finite"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Exact support function.
    pub fn support(&self, theta: f64) -> f64 {
        match self {
            CurveSpec::Circle { r } => *r,
            CurveSpec::Ellipse { a, b } => {
                let (s, c) = theta.sin_cos();
                (a * a * c * c + b * b * s * s).sqrt()
            }
            CurveSpec::Fourier { r, modes } => {
                r + modes
                    .iter()
                    .map(|m| m.1 * (m.0 as f64 * theta + m.2).cos())
                    .sum::<f64>()
            }
        }
    }

    /// Scale (largest support value) used for relative tolerances.
    pub fn scale(&self) -> f64 {
        match self {
            CurveSpec::Circle { r } => *r,
            CurveSpec::Ellipse { a, .. } => *a,
            CurveSpec::Fourier { r, modes } => r + modes.iter().map(|m| m.1.abs()).sum::<f64>(),
        }
    }
}

/// Fourth-order periodic central first derivative.
pub fn periodic_d1(f: &[f64], spacing: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let (m2, m1, p1, p2) = (f[(i + n - 2) % n], f[(i + n - 1) % n], f[(i + 1) % n], f[(i + 2) % n]);
            (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * spacing)
        })
        .collect()
}

/// Fourth-order periodic central second derivative.
pub fn periodic_d2(f: &[f64], spacing: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let (m2, m1, p1, p2) = (f[(i + n - 2) % n], f[(i + n - 1) % n], f[(i + 1) % n], f[(i + 2) % n]);
            (-p2 + 16.0 * p1 - 30.0 * f[i] + 16.0 * m1 - m2) / (12.0 * spacing * spacing)
        })
        .collect()
}

/// Support function sampled at `θᵢ = 2πi/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportCurve {
    h: Vec<f64>,
}

impl SupportCurve {
    /// Validates grid size, positivity and discrete convexity.
    pub fn from_values(h: Vec<f64>) -> Result<Self> {
        let n = h.len();
        if n < MIN_SUPPORT_SAMPLES || !n.is_power_of_two() {
            return Err(Error::config(format!(
                "support grid size must be a power of two >= {MIN_SUPPORT_SAMPLES}, got {n}"
            )));
        }
        if let Some((i, v)) = h.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::non_finite(format!("support value {v} at sample {i}")));
        }
        if let Some((i, &v)) = h.iter().enumerate().find(|(_, v)| **v <= 0.0) {
            return Err(Error::config(format!(
                "support value must be positive (origin interior), got {v} at sample {i}"
            )));
        }
        let c = SupportCurve { h };
        c.radius_of_curvature()?;
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n() as f64
    }

    pub fn theta(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.n() as f64
    }

    pub fn h_prime(&self) -> Vec<f64> {
        periodic_d1(&self.h, self.dtheta())
    }

    /// `h + h''`, the radius of curvature as a function of the normal angle.
    /// Fails with `ConvexityLost` at the first sample at or below
    /// [`EPS_CONVEX`].
    pub fn radius_of_curvature(&self) -> Result<Vec<f64>> {
        let d2 = periodic_d2(&self.h, self.dtheta());
        let rho: Vec<f64> = self.h.iter().zip(&d2).map(|(h, d)| h + d).collect();
        for (i, &r) in rho.iter().enumerate() {
            if !r.is_finite() {
                return Err(Error::non_finite(format!("h + h'' = {r} at sample {i}")));
            }
            if r <= EPS_CONVEX {
                return Err(Error::ConvexityLost { index: i, value: r });
            }
        }
        Ok(rho)
    }

    /// `κᵢ = 1/(hᵢ + h''ᵢ)`.
    pub fn curvature(&self) -> Result<Vec<f64>> {
        Ok(self.radius_of_curvature()?.into_iter().map(|r| 1.0 / r).collect())
    }

    /// `L = ∮ h dθ` by the trapezoidal rule.
    pub fn length(&self) -> f64 {
        self.h.iter().sum::<f64>() * self.dtheta()
    }

    /// `A = ½ ∮ h (h + h'') dθ`.
    pub fn area(&self) -> Result<f64> {
        let rho = self.radius_of_curvature()?;
        Ok(0.5 * self.h.iter().zip(&rho).map(|(h, r)| h * r).sum::<f64>() * self.dtheta())
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        SupportCurve::from_values(self.h.iter().map(|h| h * factor).collect())
    }

    /// Geometry of the embedding `X(θ) = h ν(θ) + h' ∂(θ)`. The normal at
    /// each sample is exactly `(cos θ, sin θ)`.
    pub fn geometry(&self) -> Result<CurveGeometry> {
        let rho = self.radius_of_curvature()?;
        let hp = self.h_prime();
        let dth = self.dtheta();
        let n = self.n();
        let mut g = CurveGeometry::with_capacity(n);
        for i in 0..n {
            let th = self.theta(i);
            let nu = unit_normal(th);
            let tau = unit_tangent(th);
            g.position.push(nu * self.h[i] + tau * hp[i]);
            g.tangent.push(tau);
            g.normal.push(nu);
            g.kappa.push(1.0 / rho[i]);
            g.ds.push(rho[i] * dth);
        }
        g.length = self.length();
        g.area = 0.5 * self.h.iter().zip(&rho).map(|(h, r)| h * r).sum::<f64>() * dth;
        Ok(g)
    }

    /// Marker curve through the embedded support points.
    pub fn embed(&self) -> Result<(MarkerCurve, CurveGeometry)> {
        let g = self.geometry()?;
        let m = MarkerCurve::new(g.position.clone())?;
        Ok((m, g))
    }
}

/// Samples `spec` on `n` Gauss angles.
pub fn construct_curve(spec: &CurveSpec, n: usize) -> Result<SupportCurve> {
    spec.validate()?;
    let dth = 2.0 * PI / n as f64;
    SupportCurve::from_values((0..n).map(|i| spec.support(i as f64 * dth)).collect())
}

/// Closed counterclockwise polyline of material points.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerCurve {
    points: Vec<Vec2>,
    /// Incremented on every remesh; material identity holds only between
    /// snapshots of equal generation.
    generation: u64,
}

impl MarkerCurve {
    pub fn new(points: Vec<Vec2>) -> Result<Self> {
        let m = MarkerCurve { points, generation: 0 };
        m.validate()?;
        Ok(m)
    }

    pub(crate) fn from_parts_unchecked(points: Vec<Vec2>, generation: u64) -> Self {
        MarkerCurve { points, generation }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    fn validate(&self) -> Result<()> {
        let m = self.points.len();
        if m < MIN_MARKERS {
            return Err(Error::config(format!("marker curve needs >= {MIN_MARKERS} points, got {m}")));
        }
        for (i, p) in self.points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::non_finite(format!("marker {i} = ({}, {})", p.x, p.y)));
            }
            if (self.points[(i + 1) % m] - p).norm() == 0.0 {
                return Err(Error::config(format!("markers {i} and {} coincide", (i + 1) % m)));
            }
        }
        if signed_area(&self.points) <= 0.0 {
            return Err(Error::config("marker curve must be counterclockwise"));
        }
        self.check_convex()?;
        self.check_simple()
    }

    /// Every vertex turns left and the exterior angles sum to one full turn.
    pub fn check_convex(&self) -> Result<()> {
        let m = self.points.len();
        let mut turning = 0.0;
        for i in 0..m {
            let a = self.points[(i + m - 1) % m];
            let b = self.points[i];
            let c = self.points[(i + 1) % m];
            let turn = (b - a).perp(&(c - b));
            if !turn.is_finite() {
                return Err(Error::non_finite(format!("turn at marker {i}")));
            }
            if turn <= 0.0 {
                return Err(Error::ConvexityLost { index: i, value: turn });
            }
            turning += turn.atan2((b - a).dot(&(c - b)));
        }
        if (turning - 2.0 * PI).abs() > 1e-6 {
            // Locally convex but wound more than once.
            return Err(Error::ConvexityLost { index: 0, value: turning / (2.0 * PI) });
        }
        Ok(())
    }

    /// O(m²) test for proper intersections between non-adjacent edges.
    pub fn check_simple(&self) -> Result<()> {
        let m = self.points.len();
        let pts = &self.points;
        for i in 0..m {
            let (a, b) = (pts[i], pts[(i + 1) % m]);
            for j in (i + 2)..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                let (c, d) = (pts[j], pts[(j + 1) % m]);
                if segments_intersect(&a, &b, &c, &d) {
                    return Err(Error::config(format!("polyline self-intersects at edges {i} and {j}")));
                }
            }
        }
        Ok(())
    }

    /// Discrete geometry by three-point stencils in arc length.
    ///
    /// Curvature is the inverse circumradius of consecutive triples (exact on
    /// regular polygons); the tangent is the derivative of the interpolating
    /// parabola in chord length.
    pub fn geometry(&self) -> Result<CurveGeometry> {
        let pts = &self.points;
        let m = pts.len();
        if m < 3 {
            return Err(Error::config("geometry needs at least three markers"));
        }
        let mut g = CurveGeometry::with_capacity(m);
        let mut length = 0.0;
        for i in 0..m {
            let prev = pts[(i + m - 1) % m];
            let cur = pts[i];
            let next = pts[(i + 1) % m];
            let e1 = cur - prev;
            let e2 = next - cur;
            let (h1, h2) = (e1.norm(), e2.norm());
            if !(h1 > 0.0 && h2 > 0.0) || !(h1.is_finite() && h2.is_finite()) {
                return Err(Error::non_finite(format!("degenerate spacing at marker {i}")));
            }
            let d = e2 * (h1 / (h2 * (h1 + h2))) + e1 * (h2 / (h1 * (h1 + h2)));
            let t = d / d.norm();
            let kappa = 2.0 * e1.perp(&e2) / (h1 * h2 * (next - prev).norm());
            if !kappa.is_finite() || !t.x.is_finite() {
                return Err(Error::non_finite(format!("curvature at marker {i}")));
            }
            if kappa <= 0.0 {
                return Err(Error::ConvexityLost { index: i, value: kappa });
            }
            g.position.push(cur);
            g.tangent.push(t);
            g.normal.push(rot_cw(&t));
            g.kappa.push(kappa);
            g.ds.push(0.5 * (h1 + h2));
            length += h2;
        }
        g.length = length;
        g.area = signed_area(pts);
        Ok(g)
    }

    /// Redistributes `m_new` markers uniformly in arc length along the
    /// periodic cubic spline through the current markers. Breaks material
    /// identity, so the generation counter advances.
    pub fn resample_arclength(&self, m_new: usize) -> Result<MarkerCurve> {
        if m_new < MIN_MARKERS {
            return Err(Error::config(format!("resample target must be >= {MIN_MARKERS}, got {m_new}")));
        }
        let m = self.points.len();
        let mut knots = Vec::with_capacity(m + 1);
        knots.push(0.0);
        for i in 0..m {
            let step = (self.points[(i + 1) % m] - self.points[i]).norm();
            knots.push(knots[i] + step);
        }
        let xs: Vec<f64> = self.points.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = self.points.iter().map(|p| p.y).collect();
        let sx = PeriodicSpline::new(&knots, &xs)?;
        let sy = PeriodicSpline::new(&knots, &ys)?;
        let speed = |t: f64| Vec2::new(sx.derivative(t), sy.derivative(t)).norm();

        // Arc length of each spline segment by 5-point Gauss-Legendre.
        let seg_len = |a: f64, b: f64| -> f64 {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            GL5.iter().map(|(x, w)| w * speed(mid + half * x)).sum::<f64>() * half
        };
        let mut cum = Vec::with_capacity(m + 1);
        cum.push(0.0);
        for i in 0..m {
            cum.push(cum[i] + seg_len(knots[i], knots[i + 1]));
        }
        let total = cum[m];
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::non_finite("spline arc length"));
        }

        let mut out = Vec::with_capacity(m_new);
        let mut seg = 0;
        for k in 0..m_new {
            let target = total * k as f64 / m_new as f64;
            while seg + 1 < m && cum[seg + 1] <= target {
                seg += 1;
            }
            let (a, b) = (knots[seg], knots[seg + 1]);
            let want = target - cum[seg];
            // Safeguarded Newton on the within-segment arc length.
            let (mut lo, mut hi) = (a, b);
            let mut t = a + (b - a) * (want / (cum[seg + 1] - cum[seg])).clamp(0.0, 1.0);
            let mut converged = want == 0.0;
            if converged {
                t = a;
            }
            for _ in 0..50 {
                if converged {
                    break;
                }
                let f = seg_len(a, t) - want;
                if f.abs() <= 1e-14 * total {
                    converged = true;
                    break;
                }
                if f > 0.0 {
                    hi = t;
                } else {
                    lo = t;
                }
                let next = t - f / speed(t);
                t = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            }
            if !converged {
                return Err(Error::NotConverged { what: "arc-length inversion", iterations: 50 });
            }
            let p = Vec2::new(sx.eval(t), sy.eval(t));
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::non_finite("spline interpolation"));
            }
            out.push(p);
        }
        let mut curve = MarkerCurve::new(out)?;
        curve.generation = self.generation + 1;
        Ok(curve)
    }
}

/// Shoelace formula; positive for counterclockwise polygons.
pub fn signed_area(pts: &[Vec2]) -> f64 {
    let m = pts.len();
    0.5 * (0..m).map(|i| pts[i].perp(&pts[(i + 1) % m])).sum::<f64>()
}

fn orient(a: &Vec2, b: &Vec2, c: &Vec2) -> f64 {
    (b - a).perp(&(c - a))
}

fn segments_intersect(a: &Vec2, b: &Vec2, c: &Vec2, d: &Vec2) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Periodic cubic spline on strictly increasing knots `t₀ < … < t_m`, where
/// `t_m` closes the period and `y` holds the `m` values at `t₀..t_{m-1}`.
struct PeriodicSpline {
    knots: Vec<f64>,
    y: Vec<f64>,
    m2: Vec<f64>,
}

impl PeriodicSpline {
    fn new(knots: &[f64], y: &[f64]) -> Result<Self> {
        let m = y.len();
        let h: Vec<f64> = (0..m).map(|i| knots[i + 1] - knots[i]).collect();
        if h.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::non_finite("spline knots must be strictly increasing"));
        }
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            let hp = h[(i + m - 1) % m];
            let hc = h[i];
            sub[i] = hp;
            diag[i] = 2.0 * (hp + hc);
            sup[i] = hc;
            rhs[i] = 6.0 * ((y[(i + 1) % m] - y[i]) / hc - (y[i] - y[(i + m - 1) % m]) / hp);
        }
        let m2 = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs)?;
        Ok(PeriodicSpline { knots: knots.to_vec(), y: y.to_vec(), m2 })
    }

    fn locate(&self, t: f64) -> usize {
        let m = self.y.len();
        match self.knots.binary_search_by(|k| k.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less)) {
            Ok(i) => i.min(m - 1),
            Err(i) => i.saturating_sub(1).min(m - 1),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let m = self.y.len();
        let i = self.locate(t);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        let b = (t - self.knots[i]) / h;
        let (y0, y1) = (self.y[i], self.y[(i + 1) % m]);
        let (m0, m1) = (self.m2[i], self.m2[(i + 1) % m]);
        a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
    }

    fn derivative(&self, t: f64) -> f64 {
        let m = self.y.len();
        let i = self.locate(t);
        let h = self.knots[i + 1] - self.knots[i];
        let a = (self.knots[i + 1] - t) / h;
        let b = (t - self.knots[i]) / h;
        let (y0, y1) = (self.y[i], self.y[(i + 1) % m]);
        let (m0, m1) = (self.m2[i], self.m2[(i + 1) % m]);
        (y1 - y0) / h - (3.0 * a * a - 1.0) / 6.0 * h * m0 + (3.0 * b * b - 1.0) / 6.0 * h * m1
    }
}

/// Solves the cyclic tridiagonal system
/// `sub[i]·x[i-1] + diag[i]·x[i] + sup[i]·x[i+1] = rhs[i]` (indices mod n)
/// with the Sherman-Morrison correction.
fn solve_cyclic_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let alpha = sup[n - 1]; // row n-1, column 0
    let beta = sub[0]; // row 0, column n-1
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;
    let x = thomas(sub, &b, sup, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = thomas(sub, &b, sup, &u)?;
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::non_finite("singular spline system"));
    }
    c[0] = sup[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c[i - 1];
        if denom == 0.0 {
            return Err(Error::non_finite("singular spline system"));
        }
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

/// Per-sample geometry shared by both representations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurveGeometry {
    pub position: Vec<Vec2>,
    /// Unit tangent, counterclockwise.
    pub tangent: Vec<Vec2>,
    /// Outward unit normal, the tangent rotated by −π/2.
    pub normal: Vec<Vec2>,
    pub kappa: Vec<f64>,
    /// Arc-length weight of each sample.
    pub ds: Vec<f64>,
    pub length: f64,
    pub area: f64,
}

impl CurveGeometry {
    fn with_capacity(n: usize) -> Self {
        CurveGeometry {
            position: Vec::with_capacity(n),
            tangent: Vec::with_capacity(n),
            normal: Vec::with_capacity(n),
            kappa: Vec::with_capacity(n),
            ds: Vec::with_capacity(n),
            length: 0.0,
            area: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.position.len()
    }

    pub fn is_empty(&self) -> bool {
        self.position.is_empty()
    }

    pub fn kappa_min(&self) -> f64 {
        self.kappa.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn kappa_max(&self) -> f64 {
        self.kappa.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Σ κ ds`; equals 2π for a simple closed convex curve.
    pub fn total_turning(&self) -> f64 {
        self.kappa.iter().zip(&self.ds).map(|(k, s)| k * s).sum()
    }

    /// Largest pairwise distance between samples.
    pub fn diameter(&self) -> f64 {
        let p = &self.position;
        let mut best: f64 = 0.0;
        for i in 0..p.len() {
            for j in (i + 1)..p.len() {
                best = best.max((p[i] - p[j]).norm_squared());
            }
        }
        best.sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CurveGeometry {
            position: self.position.iter().map(|p| p * factor).collect(),
            tangent: self.tangent.clone(),
            normal: self.normal.clone(),
            kappa: self.kappa.iter().map(|k| k / factor).collect(),
            ds: self.ds.iter().map(|s| s * factor).collect(),
            length: self.length * factor,
            area: self.area * factor * factor,
        }
    }
}

/// `L²/(4πA)`, at least one with equality only for circles.
pub fn isoperimetric_ratio(g: &CurveGeometry) -> Result<f64> {
    let (l, a) = (g.length, g.area);
    if !(l.is_finite() && a.is_finite()) || a <= 0.0 {
        return Err(Error::non_finite(format!("length {l}, area {a}")));
    }
    let ratio = l * l / (4.0 * PI * a);
    if ratio < 1.0 - 1e-6 {
        return Err(Error::non_finite(format!("isoperimetric ratio {ratio} below one")));
    }
    Ok(ratio)
}

/// First and second derivatives of periodic samples `f` with respect to arc
/// length along the polyline `points`, by nonuniform three-point stencils
/// with chord lengths as arc-length increments.
pub fn arclength_derivatives(points: &[Vec2], f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = points.len();
    let mut d1 = Vec::with_capacity(m);
    let mut d2 = Vec::with_capacity(m);
    for i in 0..m {
        let ip = (i + m - 1) % m;
        let inx = (i + 1) % m;
        let h1 = (points[i] - points[ip]).norm();
        let h2 = (points[inx] - points[i]).norm();
        let (fm, f0, fp) = (f[ip], f[i], f[inx]);
        d1.push((h1 * h1 * (fp - f0) + h2 * h2 * (f0 - fm)) / (h1 * h2 * (h1 + h2)));
        d2.push(2.0 * (h1 * fp - (h1 + h2) * f0 + h2 * fm) / (h1 * h2 * (h1 + h2)));
    }
    (d1, d2)
}

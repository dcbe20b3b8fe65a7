//! Term-by-term evaluation of the second-variation inequality at a
//! two-point maximum, in three successively regrouped forms.
//!
//! Notation: `∂ˣ`, `∂ʸ` are unit tangents at the two points, `w` the unit
//! chord `(X − Y)/d`, `ν` the outer normal at `X`, and `c = ⟨∂ʸ, ∂ˣ⟩`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Resolution, ResidualReport};
use crate::curve::{rot_cw, Vec2};
use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

/// Scalars and frames of one two-point configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointSample {
    pub p: f64,
    pub mu: f64,
    pub kappa: f64,
    pub kappa_y: f64,
    pub z: f64,
    pub d: f64,
    /// `∂ₛκ` at `X`.
    pub grad_kappa: f64,
    /// `∂ₛ²κ` at `X`.
    pub kappa_ss: f64,
    /// `∂ₜκ` at `X`.
    pub dt_kappa: f64,
    pub dx: Vec2,
    pub dy: Vec2,
    pub w: Vec2,
    pub nu: Vec2,
    pub nu_y: Vec2,
}

/// A sum together with the sum of absolute values of its terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockValue {
    pub value: f64,
    pub scale: f64,
}

fn sum(terms: &[f64]) -> BlockValue {
    BlockValue { value: terms.iter().sum(), scale: terms.iter().map(|t| t.abs()).sum() }
}

/// Raw expansion, before the evolution equation and tangency are used.
pub fn first_block(s: &TwoPointSample) -> BlockValue {
    let TwoPointSample { p, mu, kappa: k, kappa_y: ky, z, d, grad_kappa: gk, .. } = *s;
    let kp1 = k.powf(p - 1.0);
    let kp = k.powf(p);
    let a = s.w.dot(&s.dx);
    let b = s.w.dot(&s.dy);
    let c = s.dy.dot(&s.dx);
    let d2 = d * d;
    sum(&[
        -mu * s.dt_kappa,
        -2.0 / d2 * kp,
        2.0 / d2 * ky.powf(p) * s.nu_y.dot(&(s.nu - s.w * (d * z))),
        2.0 / d * p * kp1 * gk * a,
        z * z * kp,
        2.0 * p / d2 * kp1 * (z - k),
        p * k.powf(p + 1.0) * z,
        -2.0 * p / d * kp1 * gk * a,
        -p * kp * z * z,
        4.0 * p * mu / d * kp1 * gk * a,
        mu * p * kp1 * s.kappa_ss,
        -4.0 * p / d2 * kp1 * (z - k) * c,
        -4.0 * p * mu / d * kp1 * gk * b,
        2.0 * p / d2 * kp1 * (z - ky),
    ])
}

/// The block after inserting the evolution equation for `κ` and exact
/// tangency at `Y`.
pub fn second_block(s: &TwoPointSample) -> BlockValue {
    let TwoPointSample { p, mu, kappa: k, kappa_y: ky, z, d, grad_kappa: gk, .. } = *s;
    let kp1 = k.powf(p - 1.0);
    let kp = k.powf(p);
    let c = s.dy.dot(&s.dx);
    let d2 = d * d;
    sum(&[
        -mu * k.powf(p + 2.0),
        -mu * p * (p - 1.0) * k.powf(p - 2.0) * gk * gk,
        p * k.powf(p + 1.0) * z,
        -2.0 * (1.0 + p) / d2 * kp,
        4.0 * p / d2 * kp * c,
        2.0 / d2 * ky.powf(p),
        -2.0 * p / d2 * kp1 * ky,
        4.0 * p / d2 * kp1 * z,
        -4.0 * p / d2 * kp1 * z * c,
        (1.0 - p) * kp * z * z,
        4.0 * p * mu / d * kp1 * gk * s.w.dot(&(s.dx - s.dy)),
    ])
}

/// The regrouped form, valid once `∂ₛκ` satisfies the first-order condition.
pub fn expression_three(s: &TwoPointSample) -> BlockValue {
    let TwoPointSample { p, mu, kappa: k, kappa_y: ky, z, d, grad_kappa: gk, .. } = *s;
    let kp1 = k.powf(p - 1.0);
    let kp = k.powf(p);
    let c = s.dy.dot(&s.dx);
    let a = s.w.dot(&s.dx);
    let d2 = d * d;
    let bracket = 1.0 - c + 2.0 * s.w.dot(&(s.dy - s.dx)) * a + (1.0 - p) / (2.0 * p);
    sum(&[
        -(mu * k - p * z) * k.powf(p + 1.0),
        -mu * p * (p - 1.0) * k.powf(p - 2.0) * gk * gk,
        2.0 / d2 * ky.powf(p),
        -2.0 * p / d2 * kp1 * ky,
        (1.0 - p) * kp * z * z,
        4.0 * p / d2 * kp1 * (z - k) * bracket,
        2.0 * (p - 1.0) / d2 * z * kp1,
    ])
}

fn check_sample(s: &TwoPointSample) -> Result<()> {
    let positive = [s.kappa, s.kappa_y, s.z, s.d, s.mu];
    if !(s.p > 1.0) || positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::config("sample needs p > 1 and positive finite kappa, kappa_y, Z, d, mu"));
    }
    for (name, v) in [("dx", s.dx), ("dy", s.dy), ("w", s.w)] {
        if (v.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::config(format!("{name} is not a unit vector")));
        }
    }
    if (s.nu - rot_cw(&s.dx)).norm() > 1e-12 {
        return Err(Error::config("nu must be dx rotated by -pi/2"));
    }
    let z = 2.0 * s.w.dot(&s.nu) / s.d;
    if (s.z - z).abs() > 1e-12 * s.z.abs().max(1.0) {
        return Err(Error::config(format!("Z = {} violates Z = 2<w, nu>/d = {z}", s.z)));
    }
    Ok(())
}

/// Relative difference between the second block and the regrouped form
/// with `∂ₛκ` set from the first-order condition.
pub fn rewrite_equivalence_check(sample: &TwoPointSample) -> Result<f64> {
    check_sample(sample)?;
    let s = TwoPointSample {
        grad_kappa: 2.0 / (sample.mu * sample.d) * (sample.kappa - sample.z) * sample.w.dot(&sample.dx),
        ..*sample
    };
    let b = second_block(&s);
    let e = expression_three(&s);
    Ok((b.value - e.value).abs() / b.scale.max(e.scale))
}

fn unit(angle: f64) -> Vec2 {
    Vec2::new(angle.cos(), angle.sin())
}

/// A random consistent configuration: `Z` is derived from the chord and
/// normal, which are drawn so that `Z > 0`.
pub fn random_sample<R: Rng>(rng: &mut R) -> TwoPointSample {
    let tau = std::f64::consts::TAU;
    let dx = unit(rng.gen_range(0.0..tau));
    let nu = rot_cw(&dx);
    let dy = unit(rng.gen_range(0.0..tau));
    let nu_y = rot_cw(&dy);
    // Chord within ±(π/2 − 0.05) of ν keeps ⟨w, ν⟩ bounded away from zero.
    let nu_angle = nu.y.atan2(nu.x);
    let w = unit(nu_angle + rng.gen_range(-1.52..1.52));
    let d = rng.gen_range(0.05..4.0);
    TwoPointSample {
        p: rng.gen_range(1.01..5.0),
        mu: rng.gen_range(1.0..3.0),
        kappa: rng.gen_range(0.1..5.0),
        kappa_y: rng.gen_range(0.1..5.0),
        z: 2.0 * w.dot(&nu) / d,
        d,
        grad_kappa: rng.gen_range(-3.0..3.0),
        kappa_ss: rng.gen_range(-10.0..10.0),
        dt_kappa: rng.gen_range(-10.0..10.0),
        dx,
        dy,
        w,
        nu,
        nu_y,
    }
}

/// Largest rewrite residual over `count` seeded samples.
pub fn rewrite_equivalence_suite(count: usize, seed: u64, tol: &Tolerances) -> Result<ResidualReport> {
    if count == 0 {
        return Err(Error::config("rewrite suite needs at least one sample"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        worst = worst.max(rewrite_equivalence_check(&random_sample(&mut rng))?);
    }
    Ok(ResidualReport::new(
        "rewrite_equivalence",
        vec![Resolution { n: count, dt: None }],
        vec![worst],
        None,
        tol.rewrite_ceiling,
        tol.roundoff_floor,
    ))
}

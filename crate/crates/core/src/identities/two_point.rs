//! Identities evaluated on curve-derived two-point configurations.

use serde::Serialize;

use super::algebra::{first_block, second_block, TwoPointSample};
use crate::curve::{arclength_derivatives, CurveGeometry, Vec2};
use crate::error::{Error, Result};
use crate::noncollapse::{two_point, NonCollapseReport, TwoPointConfig};

/// Tangent at `j` signed to lie closest to the reflection of `∂ˣ` in the
/// line orthogonal to the chord. At an interior tangency that reflection is
/// the tangent of the touching circle at `j`, which gives
/// `⟨∂ʸ, ∂ˣ⟩ = −cos 2α` without the sign ambiguity of matching the cosine
/// directly at `α = π/4`. Returns whether the curve tangent was negated.
pub fn oriented_tangent_y(g: &CurveGeometry, tp: &TwoPointConfig) -> (Vec2, bool) {
    let tx = g.tangent[tp.i];
    let w = tp.chord_dir;
    let mirror = tx - w * (2.0 * w.dot(&tx));
    let ty = g.tangent[tp.j];
    if ty.dot(&mirror) <= 0.0 {
        (-ty, true)
    } else {
        (ty, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrigCheck {
    pub i: usize,
    pub j: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Whether the tangent at `j` was negated to match `⟨∂ʸ, ∂ˣ⟩ = −cos 2α`.
    pub flipped: bool,
}

/// `1 − ⟨∂ʸ, ∂ˣ⟩ + 2⟨w, ∂ʸ − ∂ˣ⟩⟨w, ∂ˣ⟩` against `−2cos²α`.
///
/// The tangent at `j` enters with the sign given by [`oriented_tangent_y`].
pub fn trig_identity_check(g: &CurveGeometry, i: usize, j: usize) -> Result<TrigCheck> {
    let tp = two_point(g, i, j)?;
    let w = tp.chord_dir;
    let tx = g.tangent[i];
    let (dy, flipped) = oriented_tangent_y(g, &tp);
    let lhs = 1.0 - dy.dot(&tx) + 2.0 * w.dot(&(dy - tx)) * w.dot(&tx);
    let rhs = -2.0 * tp.alpha.cos().powi(2);
    Ok(TrigCheck { i, j, lhs, rhs, residual: (lhs - rhs).abs(), flipped })
}

/// Largest trig residual over the pairs `(i, partner(i))` that realize an
/// off-diagonal supremum.
pub fn max_trig_residual(g: &CurveGeometry, report: &NonCollapseReport) -> Result<Option<TrigCheck>> {
    let mut worst: Option<TrigCheck> = None;
    for (i, partner) in report.partner.iter().enumerate() {
        if let Some(j) = *partner {
            let c = trig_identity_check(g, i, j)?;
            if worst.is_none_or(|w| c.residual > w.residual) {
                worst = Some(c);
            }
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstOrderCheck {
    pub i: usize,
    pub j: usize,
    pub kappa_s: f64,
    pub predicted: f64,
    pub residual: f64,
    /// `κ(i)² Δs(i)`, the size of an O(Δ) error in `∂ₛκ`.
    pub scale: f64,
    /// `residual / scale`.
    pub normalized: f64,
}

/// `∂ₛκ(i) = (2/(μd))(κ(i) − Z)⟨w, ∂ˣ⟩` at a pair maximizing
/// `Z(i, j) − μκ(i)`.
pub fn first_order_condition_check(g: &CurveGeometry, mu: f64, i: usize, j: usize) -> Result<FirstOrderCheck> {
    if !(mu >= 1.0 && mu.is_finite()) {
        return Err(Error::config(format!("mu must be finite and >= 1, got {mu}")));
    }
    let tp = two_point(g, i, j)?;
    let (ks, _) = arclength_derivatives(&g.position, &g.kappa);
    let k = g.kappa[i];
    let predicted = 2.0 / (mu * tp.d) * (k - tp.z) * tp.chord_dir.dot(&g.tangent[i]);
    let residual = (ks[i] - predicted).abs();
    let scale = k * k * g.ds[i];
    Ok(FirstOrderCheck { i, j, kappa_s: ks[i], predicted, residual, scale, normalized: residual / scale })
}

/// Relative gap between the first and second blocks of the second-variation
/// inequality at the argmax pair, with every derivative taken from the
/// curve. The two blocks differ only by the tangency defect
/// `(2/d²)κ_yᵖ(⟨ν_y, ν − dZw⟩ − 1)`, which vanishes as the pair becomes an
/// exact interior tangency.
pub fn first_block_spot_check(g: &CurveGeometry, report: &NonCollapseReport, p: f64) -> Result<f64> {
    let (i, j) = (report.argmax.i, report.argmax.j);
    let tp = two_point(g, i, j)?;
    let (ks, kss) = arclength_derivatives(&g.position, &g.kappa);
    let k = g.kappa[i];
    let dt_kappa = p * k.powf(p - 1.0) * kss[i] + k.powf(2.0 + p) + p * (p - 1.0) * k.powf(p - 2.0) * ks[i] * ks[i];
    let tx = g.tangent[i];
    let (dy, _) = oriented_tangent_y(g, &tp);
    let s = TwoPointSample {
        p,
        mu: report.mu,
        kappa: k,
        kappa_y: g.kappa[j],
        z: tp.z,
        d: tp.d,
        grad_kappa: ks[i],
        kappa_ss: kss[i],
        dt_kappa,
        dx: tx,
        dy,
        w: tp.chord_dir,
        nu: g.normal[i],
        nu_y: g.normal[j],
    };
    let f = first_block(&s);
    let b = second_block(&s);
    Ok((f.value - b.value).abs() / f.scale.max(b.scale))
}

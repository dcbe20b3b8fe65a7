//! Power curvature flow `ẋ = −κᵖν` (p > 1) of closed convex plane curves,
//! with two-point non-collapsing diagnostics and a verification harness for
//! the evolution equations behind them.

pub mod cli;
pub mod config;
pub mod curve;
pub mod flow;
pub mod noncollapse;
pub mod error;
pub mod identities;
pub mod par;
pub mod report;
pub mod tolerances;

pub use curve::{construct_curve, CurveGeometry, CurveSpec, MarkerCurve, SupportCurve, Vec2};
pub use error::{Error, Result};

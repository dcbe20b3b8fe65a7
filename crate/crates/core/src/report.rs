//! Output files: CSV series, JSON reports and SVG snapshots. Every file
//! carries the config hash, and the bytes depend only on the inputs.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::curve::{CurveGeometry, Vec2};
use crate::error::{Error, Result};
use crate::noncollapse::NonCollapseReport;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// CSV with leading `# ` comment lines.
pub fn write_csv<I>(path: &Path, comments: &[String], header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = BufWriter::new(File::create(path)?);
    for c in comments {
        writeln!(out, "# {c}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerPoint {
    pub i: usize,
    pub kappa: f64,
    #[serde(rename = "Z_sup")]
    pub z_sup: f64,
    pub r_oracle: f64,
}

/// Contents of a `noncollapse_<k>.json` file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonCollapseFile<'a> {
    pub config_hash: &'a str,
    pub t: f64,
    pub step: u64,
    pub mu: f64,
    pub delta_equiv: f64,
    pub argmax: crate::noncollapse::TwoPointConfig,
    pub per_point: Vec<PerPoint>,
}

impl<'a> NonCollapseFile<'a> {
    pub fn new(config_hash: &'a str, t: f64, step: u64, g: &CurveGeometry, r: &NonCollapseReport, radii: &[f64]) -> Self {
        let per_point = (0..g.len())
            .map(|i| PerPoint { i, kappa: g.kappa[i], z_sup: r.z_sup[i], r_oracle: radii[i] })
            .collect();
        NonCollapseFile { config_hash, t, step, mu: r.mu, delta_equiv: r.delta_equiv, argmax: r.argmax, per_point }
    }
}

/// Standalone SVG of the closed curve, y up, with the bounding box padded
/// by 10% on every side. With a report, the largest interior circle
/// touching at the μ-argmax is drawn as well.
pub fn snapshot_svg(g: &CurveGeometry, report: Option<&NonCollapseReport>, config_hash: &str) -> Result<String> {
    if g.is_empty() {
        return Err(Error::config("cannot draw an empty curve"));
    }
    let (mut lo, mut hi) = (g.position[0], g.position[0]);
    for p in &g.position {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let center = (lo + hi) * 0.5;
    let half = (hi - lo) * 0.5;
    if !(half.x > 0.0 && half.y > 0.0 && half.x.is_finite() && half.y.is_finite()) {
        return Err(Error::config("curve has a degenerate bounding box"));
    }
    let (x0, y0) = (center.x - 1.1 * half.x, -center.y - 1.1 * half.y);
    let (w, h) = (2.2 * half.x, 2.2 * half.y);
    let stroke = 0.004 * w.max(h);

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(s, "<!-- config_hash={config_hash} -->");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x0:.9} {y0:.9} {w:.9} {h:.9}\" width=\"600\" height=\"{:.0}\">",
        600.0 * h / w
    );
    s.push_str("<path d=\"");
    for (k, p) in g.position.iter().enumerate() {
        let _ = write!(s, "{}{:.9} {:.9} ", if k == 0 { "M" } else { "L" }, p.x, -p.y);
    }
    let _ = writeln!(s, "Z\" fill=\"none\" stroke=\"black\" stroke-width=\"{stroke:.9}\"/>");
    if let Some(r) = report {
        let i = r.argmax.i;
        let z = r.z_sup[i];
        let c: Vec2 = g.position[i] - g.normal[i] / z;
        let _ = writeln!(
            s,
            "<circle cx=\"{:.9}\" cy=\"{:.9}\" r=\"{:.9}\" fill=\"none\" stroke=\"red\" stroke-width=\"{stroke:.9}\"/>",
            c.x,
            -c.y,
            1.0 / z
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn write_snapshot_svg(
    g: &CurveGeometry,
    report: Option<&NonCollapseReport>,
    config_hash: &str,
    path: &Path,
) -> Result<()> {
    let s = snapshot_svg(g, report, config_hash)?;
    std::fs::write(path, s)?;
    Ok(())
}

//! Standalone log-log SVG figures for fitted scaling laws.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::FitReport;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Maps log10 data coordinates into the plot rectangle.
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, lx: f64) -> f64 {
        MARGIN_LEFT + (lx - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, ly: f64) -> f64 {
        HEIGHT
            - MARGIN_BOTTOM
            - (ly - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = (hi - lo).max(1e-3);
    (lo - 0.05 * span, hi + 0.05 * span)
}

/// Renders the figure as a string.
pub fn loglog_svg(report: &FitReport, pairs: &[(f64, f64)]) -> Result<String> {
    if pairs.len() < 2 {
        return Err(Error::InvalidArgument(
            "figure needs at least 2 points".into(),
        ));
    }
    if pairs
        .iter()
        .any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()))
    {
        return Err(Error::InvalidArgument(
            "log-log figure needs positive data".into(),
        ));
    }
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.log10()).collect();
    let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // fitted line in log10 coordinates: the slope is base independent
    let b = report.intercept / std::f64::consts::LN_10;
    let line = |x: f64| b + report.slope * x;
    let (x0, x1) = padded(min(&lx), max(&lx));
    let (fy0, fy1) = (line(x0), line(x1));
    let (y0, y1) = padded(min(&ly).min(fy0.min(fy1)), max(&ly).max(fy0.max(fy1)));
    let f = Frame { x0, x1, y0, y1 };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT,
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    );
    for k in x0.ceil() as i64..=x1.floor() as i64 {
        let x = f.px(k as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" font-size="12" text-anchor="middle">1e{k}</text>"#,
            HEIGHT - MARGIN_BOTTOM,
            HEIGHT - MARGIN_BOTTOM + 6.0,
            HEIGHT - MARGIN_BOTTOM + 20.0
        );
    }
    for k in y0.ceil() as i64..=y1.floor() as i64 {
        let y = f.py(k as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN_LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">1e{k}</text>"#,
            MARGIN_LEFT - 6.0,
            MARGIN_LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">eps</text>"#,
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(&report.observable)
    );
    let _ = writeln!(
        s,
        r#"<line class="fit" x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}" stroke="crimson" stroke-width="1.5"/>"#,
        f.px(x0),
        f.py(fy0),
        f.px(x1),
        f.py(fy1)
    );
    for (x, y) in lx.iter().zip(&ly) {
        let _ = writeln!(
            s,
            r#"<circle class="data" cx="{:.4}" cy="{:.4}" r="4" fill="none" stroke="navy"/>"#,
            f.px(*x),
            f.py(*y)
        );
    }
    let _ = writeln!(
        s,
        r#"<text class="annotation" x="{:.2}" y="30" font-size="14">fitted slope {:.4} (theory {:.4}), R^2 = {:.4}</text>"#,
        MARGIN_LEFT, report.slope, report.theory_slope, report.r2
    );
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_loglog_svg(report: &FitReport, pairs: &[(f64, f64)], path: &Path) -> Result<()> {
    let svg = loglog_svg(report, pairs)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

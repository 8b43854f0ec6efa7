//! Point clouds as SVG 1.1.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvgStyle {
    /// Canvas side in user units.
    pub size: f64,
    /// Circle radius in user units.
    pub radius: f64,
    pub fill: String,
    pub background: String,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle {
            size: 800.0,
            radius: 0.6,
            fill: "#b2182b".into(),
            background: "#ffffff".into(),
        }
    }
}

/// One circle per point of the unit square, y axis pointing up.
pub fn render_svg(points: &[(f64, f64)], style: &SvgStyle) -> String {
    let s = style.size;
    let mut out = String::with_capacity(120 + points.len() * 48);
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{s:.0}\" height=\"{s:.0}\" viewBox=\"0 0 {s:.3} {s:.3}\">"
    );
    let _ = writeln!(
        out,
        "<rect width=\"{s:.3}\" height=\"{s:.3}\" fill=\"{}\"/>",
        style.background
    );
    let _ = writeln!(out, "<g fill=\"{}\">", style.fill);
    for &(x, y) in points {
        let _ = writeln!(
            out,
            "<circle cx=\"{:.3}\" cy=\"{:.3}\" r=\"{:.3}\"/>",
            x * s,
            (1.0 - y) * s,
            style.radius
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Read `(step, x, y)` rows (header required) from a CSV file.
pub fn read_points_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let shown = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::Parse {
            path: shown.clone(),
            line: 0,
            message: e.to_string(),
        })?;
    let headers = rdr.headers().map_err(|e| Error::Parse {
        path: shown.clone(),
        line: 1,
        message: e.to_string(),
    })?;
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (xi, yi) = match (col("x"), col("y")) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            return Err(Error::Parse {
                path: shown,
                line: 1,
                message: "header must name x and y columns".into(),
            })
        }
    };
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            path: shown.clone(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| Error::Parse {
            path: shown.clone(),
            line,
            message,
        };
        let field = |i: usize| -> Result<f64> {
            let raw = rec.get(i).ok_or_else(|| bad("missing field".into()))?;
            raw.trim()
                .parse::<f64>()
                .map_err(|_| bad(format!("not a number: {raw:?}")))
        };
        let (x, y) = (field(xi)?, field(yi)?);
        if !((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y)) {
            return Err(bad(format!("point ({x}, {y}) outside the unit square")));
        }
        points.push((x, y));
    }
    Ok(points)
}

/// Render the points of a CSV dump to an SVG file.
pub fn emit_svg_points(csv_path: &Path, svg_path: &Path, style: &SvgStyle) -> Result<()> {
    let points = read_points_csv(csv_path)?;
    std::fs::write(svg_path, render_svg(&points, style))?;
    Ok(())
}

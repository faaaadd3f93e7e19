use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};

/// Column names for a phase vector of the given dimension.
pub fn header(dim: usize) -> &'static str {
    if dim == 4 {
        "t,x,v,y,vy"
    } else {
        "t,x,v"
    }
}

fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_string(rows: &[(f64, Vec<f64>)], dim: usize) -> String {
    let mut out = String::with_capacity(rows.len() * 24 * (dim + 1));
    out.push_str(header(dim));
    out.push('\n');
    for (t, y) in rows {
        out.push_str(&fmt_float(*t));
        for v in y {
            out.push(',');
            out.push_str(&fmt_float(*v));
        }
        out.push('\n');
    }
    out
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            fs::write(p, contents).with_context(|| format!("writing {}", p.display()))
        }
        None => {
            io::stdout().write_all(contents.as_bytes())?;
            Ok(())
        }
    }
}

/// Minimal SVG polyline of `points`, autoscaled into its viewBox.
pub fn svg_polyline(points: &[(f64, f64)], x_label: &str, y_label: &str) -> String {
    let finite: Vec<_> = points.iter().filter(|(a, b)| a.is_finite() && b.is_finite()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for (a, b) in &finite {
        x0 = x0.min(*a);
        x1 = x1.max(*a);
        y0 = y0.min(*b);
        y1 = y1.max(*b);
    }
    if finite.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let w = (x1 - x0).max(1e-12);
    let h = (y1 - y0).max(1e-12);
    let pad = 0.05 * w.max(h);
    let mut pts = String::new();
    for (a, b) in &finite {
        // SVG y grows downwards.
        let _ = write!(pts, "{:.6},{:.6} ", a, y1 + y0 - b);
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\" preserveAspectRatio=\"none\">\n\
         <title>{y_label} vs {x_label}</title>\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"{:.6}\" vector-effect=\"non-scaling-stroke\" points=\"{}\"/>\n\
         </svg>\n",
        x0 - pad,
        y0 - pad,
        w + 2.0 * pad,
        h + 2.0 * pad,
        0.002 * w.max(h),
        pts.trim_end()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrips_bits() {
        let rows = vec![(0.1, vec![1.0 / 3.0, -2e-300]), (1e10, vec![f64::MIN_POSITIVE, 7.0])];
        let text = csv_string(&rows, 2);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,x,v"));
        for (line, (t, y)) in lines.zip(&rows) {
            let vals: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
            assert_eq!(vals[0].to_bits(), t.to_bits());
            assert_eq!(vals[1].to_bits(), y[0].to_bits());
            assert_eq!(vals[2].to_bits(), y[1].to_bits());
        }
    }

    #[test]
    fn svg_has_polyline() {
        let s = svg_polyline(&[(0.0, 0.0), (1.0, 2.0)], "t", "x");
        assert!(s.contains("<polyline") && s.contains("viewBox"));
        assert!(svg_polyline(&[], "t", "x").contains("points=\"\""));
    }
}

//! Minimal SVG line charts of a result CSV, one panel per metric.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 360.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

type Series = BTreeMap<String, Vec<(f64, f64)>>;

/// Groups `(sweep_value, value)` pairs by metric, then by scheme.
fn parse(csv: &str) -> Result<(String, BTreeMap<String, Series>)> {
    let mut lines = csv.lines();
    if lines.next() != Some(super::CSV_HEADER) {
        return Err(Error::Config {
            key: "csv".into(),
            reason: "missing result header".into(),
        });
    }
    let mut sweep_var = String::new();
    let mut panels: BTreeMap<String, Series> = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        let bad = || Error::Config {
            key: "csv".into(),
            reason: format!("malformed row {}", i + 2),
        };
        if f.len() != 7 {
            return Err(bad());
        }
        let x: f64 = f[1].parse().map_err(|_| bad())?;
        let y: f64 = f[4].parse().map_err(|_| bad())?;
        sweep_var = f[0].to_string();
        panels
            .entry(f[3].to_string())
            .or_default()
            .entry(f[2].to_string())
            .or_default()
            .push((x, y));
    }
    Ok((sweep_var, panels))
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Renders result CSV text as an SVG document.
pub fn render_svg(csv: &str) -> Result<String> {
    let (sweep_var, panels) = parse(csv)?;
    let height = PANEL_H * panels.len().max(1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    for (p, (metric, series)) in panels.iter().enumerate() {
        let top = p as f64 * PANEL_H;
        let (x0, x1) = range(series.values().flatten().map(|v| v.0));
        let (y0, y1) = range(series.values().flatten().map(|v| v.1));
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (PANEL_W - 2.0 * MARGIN);
        let sy = |y: f64| top + PANEL_H - MARGIN + (y0 - y) / (y1 - y0) * (PANEL_H - 2.0 * MARGIN);
        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            top + MARGIN,
            PANEL_W - 2.0 * MARGIN,
            PANEL_H - 2.0 * MARGIN
        );
        let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{metric}</text>"#, PANEL_W / 2.0, top + 30.0);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{sweep_var}</text>"#,
            PANEL_W / 2.0,
            top + PANEL_H - 20.0
        );
        for (v, anchor, x) in [(x0, "start", MARGIN), (x1, "end", PANEL_W - MARGIN)] {
            let _ = writeln!(
                svg,
                r#"<text x="{x}" y="{}" text-anchor="{anchor}">{}</text>"#,
                top + PANEL_H - MARGIN + 15.0,
                super::format_sig(v)
            );
        }
        for (v, y) in [(y0, top + PANEL_H - MARGIN), (y1, top + MARGIN)] {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{y}" text-anchor="end">{}</text>"#,
                MARGIN - 5.0,
                super::format_sig((v * 1e4).round() / 1e4)
            );
        }
        for (s, (scheme, points)) in series.iter().enumerate() {
            let color = COLORS[s % COLORS.len()];
            let path: Vec<String> = points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
            for pt in &path {
                let (cx, cy) = pt.split_once(',').expect("formatted pair");
                let _ = writeln!(svg, r#"<circle cx="{cx}" cy="{cy}" r="2" fill="{color}"/>"#);
            }
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" fill="{color}">{scheme}</text>"#,
                PANEL_W - MARGIN + 5.0,
                top + MARGIN + 15.0 * (s as f64 + 1.0)
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn render_csv_file(csv_path: &Path, svg_path: &Path) -> Result<()> {
    let csv = std::fs::read_to_string(csv_path)?;
    std::fs::write(svg_path, render_svg(&csv)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_panel_per_metric() {
        let csv = format!(
            "{}\nt,0,a,m1,1,0,1\nt,1,a,m1,2,0,1\nt,0,b,m2,3,0,1\n",
            super::super::CSV_HEADER
        );
        let svg = render_svg(&csv).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">m1<") && svg.contains(">m2<"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn rejects_foreign_csv() {
        assert!(render_svg("a,b\n1,2\n").is_err());
        let bad = format!("{}\nt,x,a,m,1,0,1\n", super::super::CSV_HEADER);
        assert!(render_svg(&bad).is_err());
    }
}

//! Minimal log-log scatter plots as standalone SVG.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// A straight line in log-log coordinates, `y = exp(intercept) x^slope`.
pub struct FitLine {
    pub label: String,
    pub slope: f64,
    pub intercept: f64,
}

pub struct LogLogPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub fits: Vec<FitLine>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick values 1, 2, 5 × 10^k inside [lo, hi] (log10 bounds); only the
/// powers of ten when the range spans several decades.
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let mults: &[f64] = if hi - lo > 3.0 { &[1.0] } else { &[1.0, 2.0, 5.0] };
    let mut out = Vec::new();
    for k in lo.floor() as i32..=hi.ceil() as i32 {
        for &m in mults {
            let v = m * 10f64.powi(k);
            let l = v.log10();
            if l >= lo - 1e-12 && l <= hi + 1e-12 {
                out.push(v);
            }
        }
    }
    out
}

fn label(v: f64) -> String {
    if (1e-3..1e4).contains(&v.abs()) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.0e}")
    }
}

impl LogLogPlot {
    /// Renders the plot. Points with a non-positive coordinate cannot be
    /// placed on log axes and are left out (their count is noted under the
    /// title).
    pub fn to_svg(&self) -> String {
        let mut dropped = 0;
        let visible: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|s| {
                let pts: Vec<(f64, f64)> = s.points.iter().copied().filter(|&(x, y)| x > 0.0 && y > 0.0).collect();
                dropped += s.points.len() - pts.len();
                pts
            })
            .collect();
        let all: Vec<(f64, f64)> = visible.iter().flatten().map(|&(x, y)| (x.log10(), y.log10())).collect();
        let (mut x0, mut x1, mut y0, mut y1) = (0.0, 1.0, 0.0, 1.0);
        if !all.is_empty() {
            x0 = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            x1 = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
            y0 = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            y1 = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        }
        let pad = |a: f64, b: f64| {
            let w = (b - a).max(0.2);
            let mid = 0.5 * (a + b);
            (mid - 0.55 * w, mid + 0.55 * w)
        };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        let px = |lx: f64| LEFT + (lx - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT);
        let py = |ly: f64| HEIGHT - BOTTOM - (ly - y0) / (y1 - y0) * (HEIGHT - TOP - BOTTOM);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        if dropped > 0 {
            let _ = writeln!(
                s,
                r#"<text x="{}" y="36" text-anchor="middle" fill="gray">{dropped} non-positive point(s) not shown</text>"#,
                WIDTH / 2.0
            );
        }
        let (fx0, fx1, fy0, fy1) = (px(x0), px(x1), py(y0), py(y1));
        let _ = writeln!(s, r#"<rect x="{fx0:.1}" y="{fy1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, fx1 - fx0, fy0 - fy1);
        for v in ticks(x0, x1) {
            let x = px(v.log10());
            let _ = writeln!(s, r#"<line x1="{x:.1}" y1="{fy1:.1}" x2="{x:.1}" y2="{fy0:.1}" stroke="gainsboro"/>"#);
            let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, fy0 + 16.0, label(v));
        }
        for v in ticks(y0, y1) {
            let y = py(v.log10());
            let _ = writeln!(s, r#"<line x1="{fx0:.1}" y1="{y:.1}" x2="{fx1:.1}" y2="{y:.1}" stroke="gainsboro"/>"#);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, fx0 - 6.0, y + 4.0, label(v));
        }
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, (fx0 + fx1) / 2.0, HEIGHT - 16.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            (fy0 + fy1) / 2.0,
            (fy0 + fy1) / 2.0,
            escape(&self.y_label)
        );

        let mut legend = Vec::new();
        for (k, (series, pts)) in self.series.iter().zip(&visible).enumerate() {
            let color = COLORS[k % COLORS.len()];
            for &(x, y) in pts {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#, px(x.log10()), py(y.log10()));
            }
            legend.push((series.label.clone(), color, false));
        }
        for (k, fit) in self.fits.iter().enumerate() {
            let color = COLORS[(k + self.series.len()) % COLORS.len()];
            let e = std::f64::consts::LN_10;
            let line = |lx: f64| (fit.intercept + fit.slope * lx * e) / e;
            let _ = writeln!(
                s,
                r#"<polyline points="{:.2},{:.2} {:.2},{:.2}" fill="none" stroke="{color}" stroke-dasharray="6 4" clip-path="url(#frame)"/>"#,
                px(x0),
                py(line(x0)),
                px(x1),
                py(line(x1))
            );
            legend.push((fit.label.clone(), color, true));
        }
        let _ = writeln!(
            s,
            r#"<defs><clipPath id="frame"><rect x="{fx0:.1}" y="{fy1:.1}" width="{:.1}" height="{:.1}"/></clipPath></defs>"#,
            fx1 - fx0,
            fy0 - fy1
        );
        for (k, (text, color, dashed)) in legend.iter().enumerate() {
            let y = fy1 + 18.0 + 16.0 * k as f64;
            if *dashed {
                let _ = writeln!(s, r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-dasharray="6 4"/>"#, fx0 + 10.0, y - 4.0, fx0 + 30.0, y - 4.0);
            } else {
                let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="4" fill="{color}"/>"#, fx0 + 20.0, y - 4.0);
            }
            let _ = writeln!(s, r#"<text x="{:.1}" y="{y:.1}">{}</text>"#, fx0 + 36.0, escape(text));
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_range() {
        assert_eq!(ticks(0.0, 1.0), vec![1.0, 2.0, 5.0, 10.0]);
        assert_eq!(ticks(-2.0, 3.5), vec![0.01, 0.1, 1.0, 10.0, 100.0, 1000.0]);
    }

    #[test]
    fn svg_has_points_and_fit() {
        let plot = LogLogPlot {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series { label: "data".into(), points: vec![(0.1, 10.0), (0.05, 40.0), (0.0, 1.0)] }],
            fits: vec![FitLine { label: "slope -2".into(), slope: -2.0, intercept: (0.1f64).ln() }],
        };
        let svg = plot.to_svg();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("a &lt; b"));
        assert!(svg.contains("1 non-positive point(s) not shown"));
        assert!(svg.contains("<polyline"));
    }
}

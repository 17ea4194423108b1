//! SVG rendering of JROC plots: TC on x, MC on y.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::jroc::{isometric_slope, select_best, Hull};
use crate::lattice::EvalPoint;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 230.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 48.0;
const MARGIN: f64 = 1.05;

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Clone, Copy)]
enum Glyph {
    Circle,
    Square,
    Triangle,
    Diamond,
}

const GLYPHS: [Glyph; 4] = [Glyph::Circle, Glyph::Square, Glyph::Triangle, Glyph::Diamond];

/// Upper ends of the axes: the largest TC and MC over all clouds plus 5%.
/// An axis whose values are all zero spans `[0, 1]`.
pub fn axis_ranges(clouds: &[Vec<EvalPoint>]) -> (f64, f64) {
    let (mut tc, mut mc) = (0.0f64, 0.0f64);
    for p in clouds.iter().flatten() {
        tc = tc.max(p.mean_tc);
        mc = mc.max(p.mean_mc);
    }
    let span = |v: f64| if v > 0.0 { v * MARGIN } else { 1.0 };
    (span(tc), span(mc))
}

struct Frame {
    x_max: f64,
    y_max: f64,
}

impl Frame {
    fn px(&self, tc: f64) -> f64 {
        LEFT + tc / self.x_max * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, mc: f64) -> f64 {
        HEIGHT - BOTTOM - mc / self.y_max * (HEIGHT - TOP - BOTTOM)
    }
}

fn glyph(out: &mut String, g: Glyph, x: f64, y: f64, color: &str) {
    let r = 3.5;
    match g {
        Glyph::Circle => {
            let _ = writeln!(
                out,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{color}" fill-opacity="0.7"/>"#
            );
        }
        Glyph::Square => {
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.7"/>"#,
                x - r,
                y - r,
                2.0 * r,
                2.0 * r
            );
        }
        Glyph::Triangle => {
            let _ = writeln!(
                out,
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}" fill-opacity="0.7"/>"#,
                x,
                y - r,
                x - r,
                y + r,
                x + r,
                y + r
            );
        }
        Glyph::Diamond => {
            let _ = writeln!(
                out,
                r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}" fill-opacity="0.7"/>"#,
                x,
                y - r,
                x + r,
                y,
                x,
                y + r,
                x - r,
                y
            );
        }
    }
}

/// Clips the line through `p` with the isometric slope for `alpha` to the
/// plotting box, in data coordinates.
fn isometric_segment(p: &EvalPoint, alpha: f64, x_max: f64, y_max: f64) -> Option<[(f64, f64); 2]> {
    let (x0, y0) = (p.mean_tc, p.mean_mc);
    let Some(s) = isometric_slope(alpha) else {
        return Some([(x0, 0.0), (x0, y_max)]);
    };
    if s == 0.0 {
        return Some([(0.0, y0), (x_max, y0)]);
    }
    let eps = 1e-12 * (1.0 + x_max + y_max);
    let inside = |(x, y): (f64, f64)| x >= -eps && x <= x_max + eps && y >= -eps && y <= y_max + eps;
    let mut hits: Vec<(f64, f64)> = [
        (0.0, y0 - s * x0),
        (x_max, y0 + s * (x_max - x0)),
        (x0 - y0 / s, 0.0),
        (x0 + (y_max - y0) / s, y_max),
    ]
    .into_iter()
    .filter(|&q| inside(q))
    .collect();
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    match (hits.first(), hits.last()) {
        (Some(&a), Some(&b)) => Some([a, b]),
        _ => None,
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Renders clouds (one glyph and color per model), hull polylines and one
/// isometric per alpha through the best pooled point. Output bytes depend
/// only on the inputs.
pub fn render_svg(clouds: &[Vec<EvalPoint>], hulls: &[Hull], isometric_alphas: &[f64]) -> Result<String> {
    let (x_max, y_max) = axis_ranges(clouds);
    let frame = Frame { x_max, y_max };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);

    // Axes and ticks.
    let (x0, y0) = (frame.px(0.0), frame.py(0.0));
    let (x1, y1) = (frame.px(x_max), frame.py(y_max));
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="black" data-tc-max="{x_max}" data-mc-max="{y_max}"><line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/></g>"#
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let (tx, ty) = (frame.px(t * x_max), frame.py(t * y_max));
        let _ = writeln!(
            out,
            r#"<text x="{tx:.2}" y="{:.2}" text-anchor="middle">{:.3}</text>"#,
            y0 + 16.0,
            t * x_max
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{:.3}</text>"#,
            x0 - 6.0,
            ty + 4.0,
            t * y_max
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">TC</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">MC</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    for (i, cloud) in clouds.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let g = GLYPHS[i % GLYPHS.len()];
        let id = cloud.first().map(|p| p.model_id.as_str()).unwrap_or("");
        let _ = writeln!(out, r#"<g class="cloud" data-model="{}">"#, escape(id));
        for p in cloud {
            glyph(&mut out, g, frame.px(p.mean_tc), frame.py(p.mean_mc), color);
        }
        let _ = writeln!(out, "</g>");
        let ly = TOP + 16.0 * i as f64 + 8.0;
        let lx = WIDTH - RIGHT + 16.0;
        glyph(&mut out, g, lx, ly, color);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 10.0,
            ly + 4.0,
            escape(id)
        );
    }

    for (i, hull) in hulls.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = hull
            .vertices
            .iter()
            .map(|p| format!("{:.2},{:.2}", frame.px(p.mean_tc), frame.py(p.mean_mc)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="hull" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            pts.join(" ")
        );
    }

    if !isometric_alphas.is_empty() {
        let pooled: Vec<EvalPoint> = clouds.iter().flatten().cloned().collect();
        for &alpha in isometric_alphas {
            let best = select_best(&pooled, alpha)?;
            let Some([(ax, ay), (bx, by)]) = isometric_segment(best, alpha, x_max, y_max) else {
                continue;
            };
            let slope = match isometric_slope(alpha) {
                Some(s) => format!("{s}"),
                None => "vertical".to_string(),
            };
            let _ = writeln!(
                out,
                r#"<line class="isometric" data-alpha="{alpha}" data-slope="{slope}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
                frame.px(ax),
                frame.py(ay),
                frame.px(bx),
                frame.py(by)
            );
        }
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Writes [`render_svg`] output to `out`.
pub fn render_plot(
    clouds: &[Vec<EvalPoint>],
    hulls: &[Hull],
    isometric_alphas: &[f64],
    out: impl AsRef<Path>,
) -> Result<()> {
    let svg = render_svg(clouds, hulls, isometric_alphas)?;
    let out = out.as_ref();
    fs::write(out, svg).map_err(|e| Error::io(out, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureConfiguration;
    use crate::jroc::lower_hull;

    fn cloud(id: &str, pts: &[(f64, f64)]) -> Vec<EvalPoint> {
        pts.iter()
            .enumerate()
            .map(|(i, &(t, m))| EvalPoint::new(id, FeatureConfiguration::new(i as u64, 3).unwrap(), t, m))
            .collect()
    }

    fn sample() -> Vec<Vec<EvalPoint>> {
        vec![
            cloud("tree", &[(0.0, 1.0), (0.4, 0.3), (1.0, 0.2)]),
            cloud("knn", &[(0.0, 0.9), (0.5, 0.5), (0.8, 0.1)]),
        ]
    }

    #[test]
    fn empty_isometric_list_draws_scatter_and_hulls() {
        let clouds = sample();
        let hulls: Vec<Hull> = clouds.iter().map(|c| lower_hull(c).unwrap()).collect();
        let svg = render_svg(&clouds, &hulls, &[]).unwrap();
        assert!(!svg.contains("isometric"));
        assert_eq!(svg.matches(r#"class="hull""#).count(), 2);
        assert_eq!(svg.matches(r#"class="cloud""#).count(), 2);
        assert!(svg.contains("<circle") && svg.contains("<rect x="));
    }

    #[test]
    fn half_alpha_isometric_has_unit_negative_slope() {
        let svg = render_svg(&sample(), &[], &[0.5]).unwrap();
        assert!(svg.contains(r#"data-alpha="0.5" data-slope="-1""#));
        let svg = render_svg(&sample(), &[], &[0.0, 1.0]).unwrap();
        assert!(svg.contains(r#"data-slope="vertical""#));
        assert!(svg.contains(r#"data-slope="0""#) || svg.contains(r#"data-slope="-0""#));
    }

    #[test]
    fn isometric_segment_passes_through_point() {
        let p = EvalPoint::new("m", FeatureConfiguration::empty(0), 0.4, 0.3);
        let [(ax, ay), (bx, by)] = isometric_segment(&p, 0.5, 1.05, 1.05).unwrap();
        assert!(((by - ay) / (bx - ax) + 1.0).abs() < 1e-12);
        // p is on the segment.
        assert!((ay - (0.4 - ax) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn axes_cover_data_with_margin() {
        let (x, y) = axis_ranges(&sample());
        assert!((x - 1.05).abs() < 1e-12);
        assert!((y - 1.05).abs() < 1e-12);
        let flat = vec![cloud("z", &[(0.0, 0.0)])];
        assert_eq!(axis_ranges(&flat), (1.0, 1.0));
    }

    #[test]
    fn output_is_deterministic_and_written() {
        let a = render_svg(&sample(), &[], &[0.3, 0.7]).unwrap();
        let b = render_svg(&sample(), &[], &[0.3, 0.7]).unwrap();
        assert_eq!(a, b);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("plot.svg");
        render_plot(&sample(), &[], &[0.3], &p).unwrap();
        assert!(std::fs::read_to_string(&p).unwrap().starts_with("<svg"));
        assert!(render_plot(&sample(), &[], &[], dir.path().join("missing/plot.svg")).is_err());
    }
}

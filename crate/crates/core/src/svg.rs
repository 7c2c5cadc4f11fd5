//! Self-contained SVG phase portraits: trajectory polyline, level-set
//! ellipses and an optional vertical threshold line. The view box is fitted
//! to everything drawn plus a 10% margin; `x2` points up.

use std::f64::consts::TAU;
use std::fmt::Write;

use crate::planar::{SublevelSet, Vec2};

/// Vertices per ellipse polygon.
pub const ELLIPSE_VERTICES: usize = 128;
/// Longest polyline emitted; denser trajectories are thinned by stride.
const MAX_POLYLINE: usize = 20_000;

#[derive(Debug, Clone)]
pub struct Ellipse {
    pub set: SublevelSet,
    pub label: String,
    pub stroke: String,
    pub fill: String,
}

#[derive(Debug, Clone, Default)]
pub struct PhasePortrait {
    pub trajectory: Vec<Vec2>,
    pub ellipses: Vec<Ellipse>,
    pub threshold: Option<f64>,
    pub title: String,
}

fn ellipse_polygon(set: &SublevelSet) -> Vec<Vec2> {
    (0..ELLIPSE_VERTICES)
        .map(|i| set.lyapunov.boundary_point(set.k, TAU * i as f64 / ELLIPSE_VERTICES as f64))
        .collect()
}

fn points_attr(points: &[Vec2]) -> String {
    let mut s = String::with_capacity(points.len() * 24);
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.6},{:.6}", p.x, -p.y);
    }
    s
}

impl PhasePortrait {
    pub fn render(&self) -> String {
        let polygons: Vec<(Vec<Vec2>, &Ellipse)> =
            self.ellipses.iter().map(|e| (ellipse_polygon(&e.set), e)).collect();
        let stride = self.trajectory.len().div_ceil(MAX_POLYLINE).max(1);
        let mut path: Vec<Vec2> = self.trajectory.iter().step_by(stride).copied().collect();
        if let Some(last) = self.trajectory.last() {
            if path.last() != Some(last) {
                path.push(*last);
            }
        }

        let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in path.iter().chain(polygons.iter().flat_map(|(pts, _)| pts.iter())) {
            x_lo = x_lo.min(p.x);
            x_hi = x_hi.max(p.x);
            y_lo = y_lo.min(p.y);
            y_hi = y_hi.max(p.y);
        }
        if let Some(v) = self.threshold {
            x_lo = x_lo.min(v);
            x_hi = x_hi.max(v);
        }
        if !x_lo.is_finite() {
            (x_lo, x_hi, y_lo, y_hi) = (-1.0, 1.0, -1.0, 1.0);
        }
        let (w0, h0) = ((x_hi - x_lo).max(1e-9), (y_hi - y_lo).max(1e-9));
        let (mx, my) = (0.1 * w0, 0.1 * h0);
        let (vx, vy, vw, vh) = (x_lo - mx, -(y_hi + my), w0 + 2.0 * mx, h0 + 2.0 * my);
        let stroke = 0.004 * vw.max(vh);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx:.6} {vy:.6} {vw:.6} {vh:.6}" width="800" height="{:.0}">"#,
            800.0 * vh / vw
        );
        if !self.title.is_empty() {
            let _ = writeln!(out, "  <title>{}</title>", escape(&self.title));
        }
        for (pts, e) in &polygons {
            let _ = writeln!(
                out,
                r#"  <polygon points="{}" style="fill:{};stroke:{};stroke-width:{stroke:.6}"><title>{}</title></polygon>"#,
                points_attr(pts),
                e.fill,
                e.stroke,
                escape(&e.label)
            );
        }
        if let Some(v) = self.threshold {
            let _ = writeln!(
                out,
                r#"  <line x1="{v:.6}" y1="{vy:.6}" x2="{v:.6}" y2="{:.6}" style="stroke:#c0392b;stroke-width:{stroke:.6};stroke-dasharray:{:.6}"><title>v_th</title></line>"#,
                vy + vh,
                4.0 * stroke
            );
        }
        if !path.is_empty() {
            let _ = writeln!(
                out,
                r#"  <polyline points="{}" style="fill:none;stroke:#1f3a93;stroke-width:{stroke:.6}"/>"#,
                points_attr(&path)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::QuadraticLyapunov;

    #[test]
    fn renders_all_layers() {
        let v = QuadraticLyapunov::new(1.0, 0.15, [0.0, 0.0], 0.7).unwrap();
        let pic = PhasePortrait {
            trajectory: vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, -1.0)],
            ellipses: vec![Ellipse {
                set: v.sublevel(0.2),
                label: "N_OFF^k".into(),
                stroke: "#555".into(),
                fill: "#999".into(),
            }],
            threshold: Some(2.6),
            title: "a < b".into(),
        };
        let svg = pic.render();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polygon").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("<line").count(), 1);
        assert!(svg.contains("a &lt; b"));
        let poly = svg.lines().find(|l| l.contains("<polygon")).unwrap();
        let pts = poly.split('"').nth(1).unwrap();
        assert_eq!(pts.split(' ').count(), ELLIPSE_VERTICES);
    }

    #[test]
    fn view_box_has_margin() {
        let pic = PhasePortrait {
            trajectory: vec![Vec2::new(0.0, 0.0), Vec2::new(10.0, 5.0)],
            ..Default::default()
        };
        let svg = pic.render();
        assert!(svg.contains(r#"viewBox="-1.000000 -5.500000 12.000000 6.000000""#), "{svg}");
    }
}

//! Minimal hand-formatted SVG output. Coordinates are printed with a fixed
//! number of decimals so identical inputs give identical bytes.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 64.0;

/// Data-to-pixel transform for a rectangular data range.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self { x: widen(x), y: widen(y) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn sx(&self, dx: f64) -> f64 {
        dx / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn sy(&self, dy: f64) -> f64 {
        dy / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH:.0}" height="{HEIGHT:.0}" viewBox="0 0 {WIDTH:.0} {HEIGHT:.0}">"#
    );
    let _ = writeln!(out, r#"<rect x="0" y="0" width="{WIDTH:.0}" height="{HEIGHT:.0}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="28" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (l, r) = (MARGIN, WIDTH - MARGIN);
    let (t, b) = (MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(out, r#"<rect x="{l:.1}" y="{t:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#, r - l, b - t);
    for i in 0..=4 {
        let u = i as f64 / 4.0;
        let xv = f.x.0 + u * (f.x.1 - f.x.0);
        let yv = f.y.0 + u * (f.y.1 - f.y.0);
        let (xp, yp) = (f.px(xv), f.py(yv));
        let _ = writeln!(out, r#"<line x1="{xp:.1}" y1="{b:.1}" x2="{xp:.1}" y2="{:.1}" stroke="black"/>"#, b + 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{xp:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="middle">{xv:.3}</text>"#,
            b + 18.0
        );
        let _ = writeln!(out, r#"<line x1="{:.1}" y1="{yp:.1}" x2="{l:.1}" y2="{yp:.1}" stroke="black"/>"#, l - 5.0);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11" text-anchor="end">{yv:.3}</text>"#,
            l - 8.0,
            yp + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 20.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    );
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Scatter plot with equal scaling on both axes.
pub fn scatter(title: &str, xlabel: &str, ylabel: &str, points: &[[f64; 2]]) -> String {
    let (x0, x1) = range(points.iter().map(|p| p[0]));
    let (y0, y1) = range(points.iter().map(|p| p[1]));
    let half = 0.5 * (x1 - x0).max(y1 - y0) * 1.05;
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let f = Frame::new((cx - half, cx + half), (cy - half, cy + half));
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &f, xlabel, ylabel);
    out.push_str("<g fill=\"#1f4e79\">\n");
    for p in points {
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="1.2"/>"#, f.px(p[0]), f.py(p[1]));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// A shaded cell on an `nx × ny` raster; `shade` in `1..=4`, darker is higher.
pub struct Cell {
    pub ix: usize,
    pub iy: usize,
    pub shade: u8,
}

const SHADES: [&str; 5] = ["#ffffff", "#d9d9d9", "#a6a6a6", "#595959", "#1a1a1a"];

/// Data ranges and cell counts of a raster.
#[derive(Debug, Clone, Copy)]
pub struct Raster {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

/// Raster of shaded cells with a legend line.
pub fn cell_map(title: &str, xlabel: &str, ylabel: &str, raster: &Raster, cells: &[Cell], legend: &str) -> String {
    let Raster { x_range, y_range, nx, ny } = *raster;
    let f = Frame::new(x_range, y_range);
    let (dx, dy) = ((x_range.1 - x_range.0) / nx as f64, (y_range.1 - y_range.0) / ny as f64);
    let mut out = String::new();
    header(&mut out, title);
    for c in cells {
        let x = x_range.0 + c.ix as f64 * dx;
        let y = y_range.0 + (c.iy + 1) as f64 * dy;
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            f.px(x),
            f.py(y),
            f.sx(dx),
            f.sy(dy),
            SHADES[c.shade.min(4) as usize]
        );
    }
    axes(&mut out, &f, xlabel, ylabel);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="48" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(legend)
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scatter_is_deterministic_and_closed() {
        let pts = [[0.0, 0.0], [1.0, 2.0], [-1.0, 0.5]];
        let a = scatter("t", "x", "y", &pts);
        assert_eq!(a, scatter("t", "x", "y", &pts));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert_eq!(a.matches("<circle").count(), 3);
    }

    #[test]
    fn labels_are_escaped() {
        let s = cell_map("a<b", "x", "y", &Raster { x_range: (0.0, 1.0), y_range: (0.0, 1.0), nx: 2, ny: 2 }, &[Cell { ix: 0, iy: 1, shade: 2 }], "l&m");
        assert!(s.contains("a&lt;b") && s.contains("l&amp;m"));
        assert_eq!(s.matches("#a6a6a6").count(), 1);
    }
}

//! Minimal SVG emission: deterministic text, no native dependencies.

use crowdmpc_core::vec2::Vec2;
use std::fmt::Write;

pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Svg {
        Svg {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str, width: f64) {
        let mut points = String::new();
        for (x, y) in pts {
            let _ = write!(points, "{:.2},{:.2} ", x, y);
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="{:.2}" />"#,
            points.trim_end(),
            stroke,
            width
        );
    }

    pub fn circle(&mut self, x: f64, y: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="{}" />"#,
            x, y, r, fill
        );
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}" />"#,
            x, y, w, h, fill
        );
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{:.2}" y="{:.2}" font-size="{:.1}" font-family="sans-serif">{}</text>"#,
            x, y, size, content
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\" />\n{}</svg>\n",
            self.width, self.height, self.width, self.height, self.body
        )
    }
}

/// Map world coordinates into an SVG viewport that fits the given points
/// with a margin, y flipped.
pub struct WorldFrame {
    min: Vec2,
    scale: f64,
    height: f64,
    pub width_px: f64,
    pub height_px: f64,
}

impl WorldFrame {
    pub fn fit(points: impl Iterator<Item = Vec2>, target_px: f64) -> WorldFrame {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        if !min.is_finite() || !max.is_finite() {
            min = Vec2::new(-1.0, -1.0);
            max = Vec2::new(1.0, 1.0);
        }
        let margin = 1.0;
        min -= Vec2::new(margin, margin);
        max += Vec2::new(margin, margin);
        let span = (max.x - min.x).max(max.y - min.y).max(1e-6);
        let scale = target_px / span;
        WorldFrame {
            min,
            scale,
            height: (max.y - min.y) * scale,
            width_px: (max.x - min.x) * scale,
            height_px: (max.y - min.y) * scale,
        }
    }

    pub fn map(&self, p: Vec2) -> (f64, f64) {
        (
            (p.x - self.min.x) * self.scale,
            self.height - (p.y - self.min.y) * self.scale,
        )
    }
}

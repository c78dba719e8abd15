//! Static SVG line plots.

use std::fmt::Write as _;
use std::path::PathBuf;

pub const WIDTH: f64 = 800.0;
pub const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 90.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 70.0;
const TICKS: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct CurveSpec {
    points: Vec<(f64, f64)>,
    pub x_label: String,
    pub y_label: String,
    pub output: PathBuf,
}

impl CurveSpec {
    /// Requires at least one point, finite coordinates and strictly
    /// increasing `x`.
    pub fn new(
        points: Vec<(f64, f64)>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
        output: impl Into<PathBuf>,
    ) -> Result<Self, String> {
        if points.is_empty() {
            return Err("curve has no points".into());
        }
        if let Some((x, y)) = points
            .iter()
            .find(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(format!("non-finite point ({x}, {y})"));
        }
        if let Some(w) = points.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(format!(
                "x must be strictly increasing ({} then {})",
                w[0].0, w[1].0
            ));
        }
        Ok(Self {
            points,
            x_label: x_label.into(),
            y_label: y_label.into(),
            output: output.into(),
        })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn render_svg(spec: &CurveSpec) -> String {
    let (x0, x1) = range(spec.points.iter().map(|p| p.0));
    let (y0, y1) = range(spec.points.iter().map(|p| p.1));
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - x0) / (x1 - x0) * plot_w;
    let sy = |y: f64| MARGIN_TOP + (y1 - y) / (y1 - y0) * plot_h;
    let bottom = MARGIN_TOP + plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<g stroke="black" stroke-width="1"><line x1="{MARGIN_LEFT}" y1="{bottom}" x2="{}" y2="{bottom}"/><line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" y2="{bottom}"/></g>"#,
        WIDTH - MARGIN_RIGHT
    );
    let _ = writeln!(
        s,
        r#"<g font-family="sans-serif" font-size="11" fill="black">"#
    );
    for t in 0..TICKS {
        let f = t as f64 / (TICKS - 1) as f64;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.3}" y1="{bottom}" x2="{px:.3}" y2="{:.3}" stroke="black"/><text x="{px:.3}" y="{:.3}" text-anchor="middle">{xv:.6}</text>"#,
            bottom + 5.0,
            bottom + 20.0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.3}" y1="{py:.3}" x2="{MARGIN_LEFT}" y2="{py:.3}" stroke="black"/><text x="{:.3}" y="{:.3}" text-anchor="end">{yv:.6}</text>"#,
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle" font-size="14">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 20.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.3}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {:.3})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(&spec.y_label)
    );
    let _ = writeln!(s, "</g>");

    let coords: Vec<String> = spec
        .points
        .iter()
        .map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
        coords.join(" ")
    );
    s.push_str("</svg>\n");
    s
}

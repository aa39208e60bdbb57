//! Minimal hand-rolled SVG 1.1 emission: complex-plane scatter/loop plots
//! and eigenstate profile plots.

use std::fmt::Write;

use nhse_core::Complex64;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

pub struct Plot {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    body: String,
}

impl Plot {
    /// Data-space bounds are padded by 5% on each side.
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Plot {
        let pad = |lo: f64, hi: f64| {
            let span = (hi - lo).max(1e-9);
            (lo - 0.05 * span, hi + 0.05 * span)
        };
        let (x_min, x_max) = pad(x_min, x_max);
        let (y_min, y_max) = pad(y_min, y_max);
        Plot {
            x_min,
            x_max,
            y_min,
            y_max,
            body: String::new(),
        }
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - 2.0 * MARGIN)
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], color: &str, closed: bool) {
        if points.is_empty() {
            return;
        }
        let mut attr = String::new();
        for &(x, y) in points {
            let _ = write!(attr, "{:.2},{:.2} ", self.sx(x), self.sy(y));
        }
        if closed {
            let _ = write!(
                attr,
                "{:.2},{:.2}",
                self.sx(points[0].0),
                self.sy(points[0].1)
            );
        }
        let _ = writeln!(
            self.body,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" points=\"{}\"/>",
            attr.trim_end()
        );
    }

    pub fn circle(&mut self, x: f64, y: f64, color: &str) {
        let _ = writeln!(
            self.body,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>",
            self.sx(x),
            self.sy(y)
        );
    }

    /// Axis frame plus labels; call last.
    pub fn finish(mut self, x_label: &str, y_label: &str) -> String {
        let frame = format!(
            "<rect x=\"{m}\" y=\"{m}\" width=\"{w}\" height=\"{h}\" fill=\"none\" stroke=\"black\"/>",
            m = MARGIN,
            w = WIDTH - 2.0 * MARGIN,
            h = HEIGHT - 2.0 * MARGIN
        );
        let labels = format!(
            concat!(
                "<text x=\"{cx}\" y=\"{by}\" text-anchor=\"middle\" font-size=\"14\">{xl}</text>",
                "<text x=\"16\" y=\"{cy}\" text-anchor=\"middle\" font-size=\"14\" ",
                "transform=\"rotate(-90 16 {cy})\">{yl}</text>",
                "<text x=\"{m}\" y=\"{ty}\" font-size=\"10\">{x0}</text>",
                "<text x=\"{rx}\" y=\"{ty}\" text-anchor=\"end\" font-size=\"10\">{x1}</text>"
            ),
            cx = WIDTH / 2.0,
            by = HEIGHT - 16.0,
            cy = HEIGHT / 2.0,
            xl = x_label,
            yl = y_label,
            m = MARGIN,
            rx = WIDTH - MARGIN,
            ty = HEIGHT - MARGIN + 16.0,
            x0 = format_tick(self.x_min),
            x1 = format_tick(self.x_max),
        );
        self.body.insert_str(0, &frame);
        self.body.push_str(&labels);
        format!(
            concat!(
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" ",
                "width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n",
                "<g>{body}</g>\n</svg>\n"
            ),
            w = WIDTH,
            h = HEIGHT,
            body = self.body
        )
    }
}

fn format_tick(v: f64) -> String {
    format!("{v:.3}")
}

pub fn label_color(label: &str) -> &'static str {
    match label {
        "skin" => "#d62728",
        "defect" => "#1f77b4",
        "hybrid" => "#9467bd",
        "edge" => "#2ca02c",
        _ => "#7f7f7f",
    }
}

/// Complex-plane scatter of labeled OBC eigenvalues over the loop curves.
pub fn spectrum_plot(loops: &[Vec<Complex64>], points: &[(Complex64, String)]) -> String {
    let all = loops
        .iter()
        .flatten()
        .copied()
        .chain(points.iter().map(|(e, _)| *e))
        .collect::<Vec<_>>();
    let (x_min, x_max, y_min, y_max) = bounds(&all);
    let mut plot = Plot::new(x_min, x_max, y_min, y_max);
    for path in loops {
        let pts: Vec<(f64, f64)> = path.iter().map(|z| (z.re, z.im)).collect();
        plot.polyline(&pts, "#aa0000", true);
    }
    for (e, label) in points {
        plot.circle(e.re, e.im, label_color(label));
    }
    plot.finish("Re E", "Im E")
}

/// |ψ_n| vs site index for the selected states; an empty selection still
/// yields a valid document.
pub fn profiles_plot(profiles: &[(String, Vec<f64>)]) -> String {
    let n = profiles.iter().map(|(_, p)| p.len()).max().unwrap_or(2);
    let y_max = profiles
        .iter()
        .flat_map(|(_, p)| p.iter().copied())
        .fold(1e-12, f64::max);
    let mut plot = Plot::new(0.0, (n - 1).max(1) as f64, 0.0, y_max);
    for (label, profile) in profiles {
        let pts: Vec<(f64, f64)> = profile
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as f64, v))
            .collect();
        plot.polyline(&pts, label_color(label), false);
    }
    plot.finish("site index", "|psi_n|")
}

fn bounds(points: &[Complex64]) -> (f64, f64, f64, f64) {
    let mut b = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for z in points {
        b.0 = b.0.min(z.re);
        b.1 = b.1.max(z.re);
        b.2 = b.2.min(z.im);
        b.3 = b.3.max(z.im);
    }
    if points.is_empty() {
        (0.0, 1.0, 0.0, 1.0)
    } else {
        b
    }
}

//! Plain SVG figures built from lines, polygons, circles and text.
//!
//! Output is fully deterministic: coordinates are printed with two decimals
//! and no timestamps or ids are embedded.

use std::fmt::Write;

use crate::csr::GlobalEnvelopeResult;
use crate::inference::FitResult;
use crate::model::PointSequence;
use crate::summaries::{EnvelopeBand, SummaryCurve};

const BAND_FILL: &str = "#c8c8c8";

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Self {
            body: String::new(),
            width,
            height,
        }
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }

    fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"{size:.0}\" text-anchor=\"{anchor}\">{}</text>",
            escape(s)
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Maps a data rectangle onto a pixel rectangle.
#[derive(Clone, Copy)]
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(
        left: f64,
        top: f64,
        width: f64,
        height: f64,
        (x0, x1): (f64, f64),
        (y0, y1): (f64, f64),
    ) -> Self {
        let (y0, y1) = if y1 > y0 {
            (y0, y1)
        } else {
            (y0 - 0.5, y0 + 0.5)
        };
        let (x0, x1) = if x1 > x0 {
            (x0, x1)
        } else {
            (x0 - 0.5, x0 + 0.5)
        };
        Self {
            left,
            top,
            width,
            height,
            x0,
            x1,
            y0,
            y1,
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * self.width
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.height - (y - self.y0) / (self.y1 - self.y0) * self.height
    }

    fn axes(&self, svg: &mut Svg, title: &str, xlabel: &str) {
        let _ = writeln!(
            svg.body,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
            self.left, self.top, self.width, self.height
        );
        svg.text(
            self.left + self.width / 2.0,
            self.top - 8.0,
            13.0,
            "middle",
            title,
        );
        svg.text(
            self.left + self.width / 2.0,
            self.top + self.height + 32.0,
            11.0,
            "middle",
            xlabel,
        );
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = self.x0 + t * (self.x1 - self.x0);
            let yv = self.y0 + t * (self.y1 - self.y0);
            let (xp, yp) = (self.px(xv), self.py(yv));
            let bottom = self.top + self.height;
            let _ = writeln!(
                svg.body,
                "<line x1=\"{xp:.2}\" y1=\"{bottom:.2}\" x2=\"{xp:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
                bottom + 4.0
            );
            svg.text(xp, bottom + 16.0, 10.0, "middle", &tick(xv));
            let _ = writeln!(
                svg.body,
                "<line x1=\"{:.2}\" y1=\"{yp:.2}\" x2=\"{:.2}\" y2=\"{yp:.2}\" stroke=\"black\"/>",
                self.left - 4.0,
                self.left
            );
            svg.text(self.left - 6.0, yp + 3.0, 10.0, "end", &tick(yv));
        }
    }

    fn polyline(&self, svg: &mut Svg, xs: &[f64], ys: &[f64], stroke: &str, dash: Option<&str>) {
        let pts: Vec<String> = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| format!("{:.2},{:.2}", self.px(*x), self.py(*y)))
            .collect();
        let dash = dash
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        let _ = writeln!(
            svg.body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\"{dash}/>",
            pts.join(" ")
        );
    }

    fn band(&self, svg: &mut Svg, xs: &[f64], lower: &[f64], upper: &[f64]) {
        let mut pts: Vec<String> = xs
            .iter()
            .zip(upper)
            .map(|(x, y)| format!("{:.2},{:.2}", self.px(*x), self.py(*y)))
            .collect();
        pts.extend(
            xs.iter()
                .zip(lower)
                .rev()
                .map(|(x, y)| format!("{:.2},{:.2}", self.px(*x), self.py(*y))),
        );
        let _ = writeln!(
            svg.body,
            "<polygon points=\"{}\" fill=\"{BAND_FILL}\" stroke=\"none\"/>",
            pts.join(" ")
        );
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else if v.abs() >= 10.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.2}")
    }
}

fn range(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

fn as_f64(index: &[usize]) -> Vec<f64> {
    index.iter().map(|&i| i as f64).collect()
}

/// Point pattern with disc radius `0.02 * DBH` meters when marks exist
/// (2 x DBH with DBH read in cm), small dots otherwise.
pub fn pattern_svg(seq: &PointSequence, title: &str) -> String {
    let w = seq.window();
    let size = 420.0;
    let scale = size / w.width().max(w.height());
    let (pw, ph) = (w.width() * scale, w.height() * scale);
    let mut svg = Svg::new(pw + 90.0, ph + 90.0);
    let frame = Frame::new(
        60.0,
        40.0,
        pw,
        ph,
        (w.xmin(), w.xmax()),
        (w.ymin(), w.ymax()),
    );
    frame.axes(&mut svg, title, "x");
    for (i, p) in seq.points().iter().enumerate() {
        let r = match seq.marks() {
            Some(m) => 0.02 * m[i] * scale,
            None => 2.5,
        };
        let _ = writeln!(
            svg.body,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
            frame.px(p.x),
            frame.py(p.y),
            r.max(1.0)
        );
    }
    svg.finish()
}

const PANEL_W: f64 = 300.0;
const PANEL_H: f64 = 220.0;

fn panel_frame(slot: usize, xr: (f64, f64), yr: (f64, f64)) -> Frame {
    let col = (slot % 2) as f64;
    let row = (slot / 2) as f64;
    Frame::new(
        70.0 + col * (PANEL_W + 90.0),
        40.0 + row * (PANEL_H + 80.0),
        PANEL_W,
        PANEL_H,
        xr,
        yr,
    )
}

fn grid_canvas(n: usize) -> Svg {
    let rows = n.div_ceil(2).max(1) as f64;
    Svg::new(
        2.0 * (PANEL_W + 90.0) + 20.0,
        rows * (PANEL_H + 80.0) + 20.0,
    )
}

fn curve_title(c: &SummaryCurve) -> String {
    if c.cumulative {
        format!("Cumulative {}", c.kind.title().to_lowercase())
    } else {
        c.kind.title().to_string()
    }
}

/// Up to four curves laid out two per row.
pub fn curves_panel_svg(curves: &[SummaryCurve]) -> String {
    let mut svg = grid_canvas(curves.len());
    for (slot, c) in curves.iter().enumerate() {
        let xs = as_f64(&c.index);
        let frame = panel_frame(
            slot,
            range(xs.iter().copied()),
            range(c.values.iter().copied()),
        );
        frame.axes(&mut svg, &curve_title(c), "index");
        frame.polyline(&mut svg, &xs, &c.values, "black", None);
    }
    svg.finish()
}

/// Grey pointwise bands with the data curve in black.
pub fn bands_panel_svg(bands: &[EnvelopeBand]) -> String {
    let mut svg = grid_canvas(bands.len());
    for (slot, b) in bands.iter().enumerate() {
        let xs = as_f64(&b.index);
        let yr = range(
            b.lower
                .iter()
                .chain(&b.upper)
                .chain(&b.data_curve.values)
                .copied(),
        );
        let frame = panel_frame(slot, range(xs.iter().copied()), yr);
        frame.band(&mut svg, &xs, &b.lower, &b.upper);
        frame.axes(&mut svg, &curve_title(&b.data_curve), "index");
        frame.polyline(&mut svg, &xs, &b.data_curve.values, "black", None);
    }
    svg.finish()
}

/// Global envelope for `L(r) - r`: grey band, data curve, dashed mean of
/// the simulations and a zero reference line.
pub fn csr_svg(result: &GlobalEnvelopeResult) -> String {
    let mut svg = Svg::new(PANEL_W + 110.0, PANEL_H + 100.0);
    let r = &result.data_curve.r_grid;
    let yr = range(
        result
            .lower
            .iter()
            .chain(&result.upper)
            .chain(&result.data_curve.values)
            .copied()
            .chain([0.0]),
    );
    let frame = Frame::new(70.0, 40.0, PANEL_W, PANEL_H, range(r.iter().copied()), yr);
    frame.band(&mut svg, r, &result.lower, &result.upper);
    frame.axes(
        &mut svg,
        &format!("L(r) - r, ERL p = {:.4}", result.p_value),
        "r",
    );
    frame.polyline(&mut svg, r, &vec![0.0; r.len()], "#808080", Some("2,2"));
    frame.polyline(&mut svg, r, &result.central, "black", Some("6,4"));
    frame.polyline(&mut svg, r, &result.data_curve.values, "black", None);
    svg.finish()
}

/// Log-likelihood surface as a grey-scale heat map with the estimate marked.
pub fn surface_svg(fit: &FitResult) -> String {
    let thetas = unique_sorted(fit.surface.iter().map(|s| s.theta));
    let radii = unique_sorted(fit.surface.iter().map(|s| s.r));
    let mut svg = Svg::new(PANEL_W + 110.0, PANEL_H + 100.0);
    let frame = Frame::new(
        70.0,
        40.0,
        PANEL_W,
        PANEL_H,
        range(radii.iter().copied()),
        range(thetas.iter().copied()),
    );
    let (lo, hi) = range(fit.surface.iter().map(|s| s.loglik));
    let cw = PANEL_W / radii.len().max(1) as f64;
    let ch = PANEL_H / thetas.len().max(1) as f64;
    for s in &fit.surface {
        let ri = radii.iter().position(|&r| r == s.r).unwrap_or(0);
        let ti = thetas.iter().position(|&t| t == s.theta).unwrap_or(0);
        let level = if hi > lo && s.loglik.is_finite() {
            (s.loglik - lo) / (hi - lo)
        } else {
            1.0
        };
        let g = (255.0 * (1.0 - level)).round() as u8;
        let _ = writeln!(
            svg.body,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({g},{g},{g})\"/>",
            70.0 + ri as f64 * cw,
            40.0 + PANEL_H - (ti + 1) as f64 * ch,
            cw + 0.01,
            ch + 0.01
        );
    }
    frame.axes(&mut svg, "Log-likelihood surface", "r");
    let _ = writeln!(
        svg.body,
        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"red\"/>",
        frame.px(fit.r_hat),
        frame.py(fit.theta_hat)
    );
    svg.finish()
}

fn unique_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v.dedup();
    v
}

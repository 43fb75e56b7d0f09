//! Standalone SVG displays. Elements that tests count carry fixed ids:
//! `cell-i-j`, `node-<var>`, `edge-<u>-<v>` and `panel-k`, all 0-based.

mod heatmap;
mod network;
mod pdp;
mod scale;

use std::fmt::Write as _;
use std::path::Path;

pub use heatmap::render_heatmap;
pub use network::{render_network, Layout, NetworkOptions};
pub use pdp::{render_pdp_pairs, render_pdp_vars, render_pdp_zen, FitLims};
pub use scale::{make_scale, ColorScale, ScaleKind};

use crate::error::{Result, VividError};

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub width: f64,
    pub height: f64,
    /// Rotation of x-axis labels, degrees.
    pub angle: f64,
    pub title: Option<String>,
}

impl Default for PlotSpec {
    fn default() -> Self {
        Self {
            width: 800.0,
            height: 800.0,
            angle: 0.0,
            title: None,
        }
    }
}

impl PlotSpec {
    fn validate(&self) -> Result<()> {
        if !(self.width > 0.0 && self.height > 0.0) || !self.angle.is_finite() {
            return Err(crate::error::invalid(
                "plot width and height must be positive",
            ));
        }
        Ok(())
    }
}

pub fn write_svg(path: impl AsRef<Path>, svg: &str) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, svg).map_err(|source| VividError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Compact fixed-precision number for coordinates.
pub(crate) fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Short label for a data value.
pub(crate) fn label(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let digits = (3 - x.abs().log10().floor() as i32).clamp(0, 6) as usize;
    let s = format!("{x:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// Minimal SVG writer.
pub(crate) struct Doc {
    buf: String,
}

impl Doc {
    pub fn new(spec: &PlotSpec) -> Self {
        let (w, h) = (num(spec.width), num(spec.height));
        let mut buf = String::new();
        buf.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            buf,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">"
        );
        let _ = writeln!(
            buf,
            "<rect class=\"background\" x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"#FFFFFF\"/>"
        );
        let mut doc = Self { buf };
        if let Some(t) = &spec.title {
            doc.text(spec.width / 2.0, 22.0, t, "middle", 16.0, None, "title");
        }
        doc
    }

    pub fn raw(&mut self, s: &str) {
        self.buf.push_str(s);
        self.buf.push('\n');
    }

    pub fn open(&mut self, attrs: &str) {
        let _ = writeln!(self.buf, "<g {attrs}>");
    }

    pub fn close(&mut self) {
        self.buf.push_str("</g>\n");
    }

    #[allow(clippy::too_many_arguments)]
    pub fn rect(&mut self, id: Option<&str>, class: &str, x: f64, y: f64, w: f64, h: f64, fill: &str, extra: &str) {
        let id = id.map(|i| format!(" id=\"{}\"", escape(i))).unwrap_or_default();
        let _ = writeln!(
            self.buf,
            "<rect{id} class=\"{class}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\"{extra}/>",
            num(x),
            num(y),
            num(w),
            num(h)
        );
    }

    pub fn line(&mut self, class: &str, (x1, y1): (f64, f64), (x2, y2): (f64, f64), stroke: &str, width: f64) {
        let _ = writeln!(
            self.buf,
            "<line class=\"{class}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{stroke}\" stroke-width=\"{}\"/>",
            num(x1),
            num(y1),
            num(x2),
            num(y2),
            num(width)
        );
    }

    pub fn polyline(&mut self, class: &str, pts: &[(f64, f64)], stroke: &str, width: f64) {
        let pts: Vec<String> = pts.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
        let _ = writeln!(
            self.buf,
            "<polyline class=\"{class}\" points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"{}\"/>",
            pts.join(" "),
            num(width)
        );
    }

    #[allow(clippy::too_many_arguments)]
    pub fn text(&mut self, x: f64, y: f64, s: &str, anchor: &str, size: f64, rotate: Option<f64>, class: &str) {
        let transform = match rotate {
            Some(a) if a != 0.0 => format!(
                " transform=\"rotate({} {} {})\"",
                num(-a),
                num(x),
                num(y)
            ),
            _ => String::new(),
        };
        let _ = writeln!(
            self.buf,
            "<text class=\"{class}\" x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" font-size=\"{}\"{transform}>{}</text>",
            num(x),
            num(y),
            num(size),
            escape(s)
        );
    }

    /// Vertical color bar with its limits written at both ends.
    pub fn legend(&mut self, scale: &ColorScale, x: f64, y: f64, w: f64, h: f64, title: &str) {
        let name = scale.kind.name();
        self.open(&format!(
            "id=\"legend-{name}\" class=\"legend\" data-lo=\"{}\" data-hi=\"{}\"",
            scale.lo, scale.hi
        ));
        self.text(x, y - 8.0, title, "start", 11.0, None, "legend-title");
        const STEPS: usize = 24;
        let step = h / STEPS as f64;
        for k in 0..STEPS {
            // Top of the bar is the high end.
            let t = 1.0 - (k as f64 + 0.5) / STEPS as f64;
            let v = scale.lo + t * (scale.hi - scale.lo);
            self.rect(None, "legend-key", x, y + k as f64 * step, w, step + 0.2, &scale.color(v), "");
        }
        self.text(x + w + 4.0, y + 4.0, &label(scale.hi), "start", 10.0, None, "legend-label");
        self.text(x + w + 4.0, y + h, &label(scale.lo), "start", 10.0, None, "legend-label");
        self.close();
    }

    pub fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

/// Linear map from a data interval onto a pixel interval.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Axis {
    pub d0: f64,
    pub d1: f64,
    pub p0: f64,
    pub p1: f64,
}

impl Axis {
    /// Padded data range so that degenerate inputs still map sensibly.
    pub fn new(lo: f64, hi: f64, p0: f64, p1: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Self { d0: lo, d1: hi, p0, p1 }
    }

    pub fn at(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

pub(crate) fn range(values: impl IntoIterator<Item = f64>) -> Option<(f64, f64)> {
    values.into_iter().fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

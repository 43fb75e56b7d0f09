use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleKind {
    SequentialImportance,
    SequentialInteraction,
    DivergingPrediction,
}

const BLUES: [&str; 5] = ["#F7FBFF", "#C6DBEF", "#6BAED6", "#2171B5", "#08306B"];
const PURPLES: [&str; 5] = ["#FCFBFD", "#DADAEB", "#9E9AC8", "#6A51A3", "#3F007D"];
const DIVERGING: [&str; 5] = ["#053061", "#4393C3", "#FFFF00", "#D6604D", "#67001F"];

impl ScaleKind {
    pub fn stops(self) -> &'static [&'static str] {
        match self {
            ScaleKind::SequentialImportance => &BLUES,
            ScaleKind::SequentialInteraction => &PURPLES,
            ScaleKind::DivergingPrediction => &DIVERGING,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ScaleKind::SequentialImportance => "importance",
            ScaleKind::SequentialInteraction => "interaction",
            ScaleKind::DivergingPrediction => "prediction",
        }
    }
}

/// Piecewise-linear color map over equally spaced stops. Values outside
/// the limits take the nearest end color.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorScale {
    pub kind: ScaleKind,
    pub lo: f64,
    pub hi: f64,
    pub stops: Vec<String>,
}

pub fn make_scale(kind: ScaleKind, limits: (f64, f64)) -> Result<ColorScale> {
    let (mut lo, mut hi) = limits;
    if !lo.is_finite() || !hi.is_finite() {
        return Err(invalid(format!(
            "{} limits must be finite, got ({lo}, {hi})",
            kind.name()
        )));
    }
    if lo > hi {
        return Err(invalid(format!(
            "{} limits are reversed: ({lo}, {hi})",
            kind.name()
        )));
    }
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    Ok(ColorScale {
        kind,
        lo,
        hi,
        stops: kind.stops().iter().map(|s| s.to_string()).collect(),
    })
}

fn rgb(hex: &str) -> [f64; 3] {
    let p = |i: usize| f64::from(u8::from_str_radix(&hex[i..i + 2], 16).expect("hex stop"));
    [p(1), p(3), p(5)]
}

impl ColorScale {
    /// Position of `v` in [0, 1] after squishing.
    pub fn unit(&self, v: f64) -> f64 {
        ((v - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    pub fn color(&self, v: f64) -> String {
        let t = self.unit(v);
        let segments = (self.stops.len() - 1) as f64;
        let x = t * segments;
        let k = (x.floor() as usize).min(self.stops.len() - 2);
        let f = x - k as f64;
        let (a, b) = (rgb(&self.stops[k]), rgb(&self.stops[k + 1]));
        let c: Vec<u8> = (0..3)
            .map(|i| (a[i] + f * (b[i] - a[i])).round() as u8)
            .collect();
        format!("#{:02X}{:02X}{:02X}", c[0], c[1], c[2])
    }
}

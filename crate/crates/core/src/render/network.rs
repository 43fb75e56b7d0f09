use std::collections::BTreeMap;

use super::heatmap::default_limits;
use super::{label, make_scale, num, Doc, PlotSpec, ScaleKind};
use crate::error::{invalid, Result};
use crate::pdp::convex_hull;
use crate::vivi::ViviMatrix;

const GROUP_COLORS: [&str; 8] = [
    "#66C2A5", "#FC8D62", "#8DA0CB", "#E78AC3", "#A6D854", "#FFD92F", "#E5C494", "#B3B3B3",
];

#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    /// Clockwise from twelve o'clock in matrix order.
    Circle,
    /// First variable in the middle, the rest on a circle.
    Star,
    /// One point per matrix variable, rescaled to the canvas.
    Custom(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkOptions {
    /// Edges at or below this interaction are not drawn.
    pub int_threshold: Option<f64>,
    /// Drop nodes left without edges.
    pub remove_node: bool,
    pub cluster: Option<BTreeMap<String, usize>>,
    pub layout: Layout,
    pub imp_lims: Option<(f64, f64)>,
    pub int_lims: Option<(f64, f64)>,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self {
            int_threshold: None,
            remove_node: false,
            cluster: None,
            layout: Layout::Circle,
            imp_lims: None,
            int_lims: None,
        }
    }
}

fn ring(n: usize, cx: f64, cy: f64, r: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / n as f64;
            (cx + r * a.sin(), cy - r * a.cos())
        })
        .collect()
}

pub fn render_network(v: &ViviMatrix, opts: &NetworkOptions, spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    let m = v.len();
    if let Layout::Custom(c) = &opts.layout {
        if c.len() != m {
            return Err(invalid(format!(
                "custom layout has {} coordinates for {m} variables",
                c.len()
            )));
        }
    }
    if let Some(groups) = &opts.cluster {
        if let Some(missing) = v.vars.iter().find(|n| !groups.contains_key(*n)) {
            return Err(invalid(format!("cluster membership is missing `{missing}`")));
        }
    }
    let (di, dn) = default_limits(v);
    let imp = make_scale(ScaleKind::SequentialImportance, opts.imp_lims.unwrap_or(di))?;
    let int = make_scale(ScaleKind::SequentialInteraction, opts.int_lims.unwrap_or(dn))?;

    let edges: Vec<(usize, usize, f64)> = v
        .pairs()
        .into_iter()
        .filter(|p| opts.int_threshold.is_none_or(|t| p.2 > t))
        .collect();
    let shown: Vec<usize> = (0..m)
        .filter(|&i| !opts.remove_node || edges.iter().any(|e| e.0 == i || e.1 == i))
        .collect();

    let legend_w = 110.0;
    let top = if spec.title.is_some() { 40.0 } else { 10.0 };
    let (cx, cy) = ((spec.width - legend_w) / 2.0, top + (spec.height - top) / 2.0);
    let radius = ((spec.width - legend_w).min(spec.height - top) / 2.0 - 60.0).max(10.0);
    let mut pos = vec![(cx, cy); m];
    match &opts.layout {
        Layout::Circle => {
            for (k, p) in ring(shown.len(), cx, cy, radius).into_iter().enumerate() {
                pos[shown[k]] = p;
            }
        }
        Layout::Star => {
            if let Some((&first, rest)) = shown.split_first() {
                pos[first] = (cx, cy);
                for (k, p) in ring(rest.len(), cx, cy, radius).into_iter().enumerate() {
                    pos[rest[k]] = p;
                }
            }
        }
        Layout::Custom(c) => {
            let fit = |vals: &mut dyn Iterator<Item = f64>| {
                vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x), hi.max(x))
                })
            };
            let (x0, x1) = fit(&mut c.iter().map(|p| p.0));
            let (y0, y1) = fit(&mut c.iter().map(|p| p.1));
            let span = (x1 - x0).max(y1 - y0);
            for (i, &(x, y)) in c.iter().enumerate() {
                pos[i] = if span > 0.0 {
                    (
                        cx + (x - (x0 + x1) / 2.0) / span * 2.0 * radius,
                        cy - (y - (y0 + y1) / 2.0) / span * 2.0 * radius,
                    )
                } else {
                    (cx, cy)
                };
            }
        }
    }
    let node_r = |i: usize| 6.0 + 18.0 * imp.unit(v.matrix[i][i]);

    let mut doc = Doc::new(spec);
    if let Some(groups) = &opts.cluster {
        let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &i in &shown {
            members.entry(groups[&v.vars[i]]).or_default().push(i);
        }
        doc.open("id=\"clusters\"");
        for (k, (g, idx)) in members.iter().enumerate() {
            let color = GROUP_COLORS[k % GROUP_COLORS.len()];
            let pad = idx.iter().map(|&i| node_r(i)).fold(0.0, f64::max) + 10.0;
            let hull = convex_hull(&idx.iter().map(|&i| pos[i]).collect::<Vec<_>>());
            if hull.len() == 1 {
                doc.raw(&format!(
                    "<circle id=\"cluster-{g}\" class=\"cluster\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{color}\" fill-opacity=\"0.3\"/>",
                    num(hull[0].0),
                    num(hull[0].1),
                    num(pad)
                ));
            } else {
                let pts: Vec<String> = hull.iter().map(|p| format!("{},{}", num(p.0), num(p.1))).collect();
                doc.raw(&format!(
                    "<polygon id=\"cluster-{g}\" class=\"cluster\" points=\"{}\" fill=\"{color}\" stroke=\"{color}\" stroke-width=\"{}\" stroke-linejoin=\"round\" fill-opacity=\"0.3\" stroke-opacity=\"0.3\"/>",
                    pts.join(" "),
                    num(2.0 * pad)
                ));
            }
        }
        doc.close();
    }
    doc.open("id=\"edges\"");
    for &(i, j, x) in &edges {
        let (a, b) = (pos[i], pos[j]);
        doc.raw(&format!(
            "<line id=\"edge-{}-{}\" class=\"edge\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\" stroke-linecap=\"round\" data-value=\"{}\"/>",
            super::escape(&v.vars[i]),
            super::escape(&v.vars[j]),
            num(a.0),
            num(a.1),
            num(b.0),
            num(b.1),
            int.color(x),
            num(1.0 + 7.0 * int.unit(x)),
            label(x)
        ));
    }
    doc.close();
    doc.open("id=\"nodes\"");
    for &i in &shown {
        let (x, y) = pos[i];
        let r = node_r(i);
        doc.raw(&format!(
            "<circle id=\"node-{}\" class=\"node\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" stroke=\"#404040\" stroke-width=\"1\" data-value=\"{}\"/>",
            super::escape(&v.vars[i]),
            num(x),
            num(y),
            num(r),
            imp.color(v.matrix[i][i]),
            label(v.matrix[i][i])
        ));
        doc.text(x, y - r - 5.0, &v.vars[i], "middle", 11.0, None, "node-label");
    }
    doc.close();
    let lx = spec.width - legend_w + 20.0;
    doc.legend(&imp, lx, top + 30.0, 14.0, 150.0, "Vimp");
    doc.legend(&int, lx, top + 230.0, 14.0, 150.0, "Vint");
    Ok(doc.finish())
}

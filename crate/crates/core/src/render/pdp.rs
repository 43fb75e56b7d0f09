use super::{label, make_scale, num, range, Axis, ColorScale, Doc, PlotSpec, ScaleKind};
use crate::dataset::{ColumnKind, Dataset};
use crate::error::{invalid, Result, VividError};
use crate::pdp::{Grid1D, PdSurface};
use crate::zenpath::ZPath;

/// Where the shared prediction color limits come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitLims {
    /// The union of the partial dependence surfaces.
    Pdp,
    /// Everything drawn: surfaces, ICE curves and fitted values.
    All,
}

impl std::str::FromStr for FitLims {
    type Err = VividError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pdp" => Ok(Self::Pdp),
            "all" => Ok(Self::All),
            other => Err(invalid(format!("fitlims must be `pdp` or `all`, got `{other}`"))),
        }
    }
}

/// Panel rectangle in pixels.
#[derive(Debug, Clone, Copy)]
struct Frame {
    x: f64,
    y: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn x_axis(&self, lo: f64, hi: f64) -> Axis {
        Axis::new(lo, hi, self.x, self.x + self.w)
    }

    fn y_axis(&self, lo: f64, hi: f64) -> Axis {
        Axis::new(lo, hi, self.y + self.h, self.y)
    }
}

/// Cell boundaries around each grid point, in data units.
fn cell_edges(points: &[f64]) -> Vec<f64> {
    let n = points.len();
    if n == 1 {
        return vec![points[0] - 0.5, points[0] + 0.5];
    }
    let mut e = Vec::with_capacity(n + 1);
    e.push(points[0] - (points[1] - points[0]) / 2.0);
    for w in points.windows(2) {
        e.push((w[0] + w[1]) / 2.0);
    }
    e.push(points[n - 1] + (points[n - 1] - points[n - 2]) / 2.0);
    e
}

fn grid_extent(g: &Grid1D) -> (f64, f64) {
    let e = cell_edges(&g.points);
    (e[0], e[e.len() - 1])
}

fn open_panel(doc: &mut Doc, k: usize, class: &str, vars: &[&str], f: Frame) {
    doc.open(&format!(
        "id=\"panel-{k}\" class=\"panel {class}\" data-vars=\"{}\"",
        super::escape(&vars.join(","))
    ));
    doc.rect(None, "frame", f.x, f.y, f.w, f.h, "none", " stroke=\"#808080\" stroke-width=\"0.5\"");
}

/// Bivariate surface with `s.grids[0]` across and `s.grids[1]` up.
fn draw_cells(doc: &mut Doc, s: &PdSurface, f: Frame, scale: &ColorScale) {
    let (ex, ey) = (cell_edges(&s.grids[0].points), cell_edges(&s.grids[1].points));
    let xa = f.x_axis(ex[0], ex[ex.len() - 1]);
    let ya = f.y_axis(ey[0], ey[ey.len() - 1]);
    for a in 0..s.grids[0].len() {
        for b in 0..s.grids[1].len() {
            if s.masked(a, b) {
                continue;
            }
            let (x0, x1) = (xa.at(ex[a]), xa.at(ex[a + 1]));
            let (y0, y1) = (ya.at(ey[b + 1]), ya.at(ey[b]));
            doc.rect(None, "pd-cell", x0, y0, x1 - x0, y1 - y0, &scale.color(s.value_at(a, b)), "");
        }
    }
}

/// Univariate surface: ICE segments in prediction colors, mean in black.
fn draw_curves(doc: &mut Doc, s: &PdSurface, f: Frame, ylims: (f64, f64), scale: &ColorScale) {
    let g = &s.grids[0];
    let (lo, hi) = if g.len() == 1 {
        (g.points[0] - 0.5, g.points[0] + 0.5)
    } else {
        (g.points[0], g.points[g.len() - 1])
    };
    let xa = f.x_axis(lo, hi);
    let ya = f.y_axis(ylims.0, ylims.1);
    let xs: Vec<f64> = if g.len() == 1 {
        vec![xa.at(lo), xa.at(hi)]
    } else {
        g.points.iter().map(|&p| xa.at(p)).collect()
    };
    let widen = |c: &[f64]| -> Vec<f64> {
        if c.len() == 1 {
            vec![c[0], c[0]]
        } else {
            c.to_vec()
        }
    };
    if let Some(ice) = &s.ice {
        doc.open("class=\"ice\"");
        for curve in &ice.curves {
            let c = widen(curve);
            for k in 0..c.len() - 1 {
                let mid = (c[k] + c[k + 1]) / 2.0;
                doc.line(
                    "ice-seg",
                    (xs[k], ya.at(c[k])),
                    (xs[k + 1], ya.at(c[k + 1])),
                    &scale.color(mid),
                    0.8,
                );
            }
        }
        doc.close();
    }
    let mean = widen(&s.values);
    let pts: Vec<(f64, f64)> = xs.iter().zip(&mean).map(|(&x, &v)| (x, ya.at(v))).collect();
    doc.polyline("pdp", &pts, "#000000", 2.0);
}

fn axis_labels(doc: &mut Doc, f: Frame, g: &Grid1D, vertical: bool) {
    let (lo, hi) = match g.kind {
        ColumnKind::Numeric => (label(g.points[0]), label(g.points[g.len() - 1])),
        ColumnKind::Categorical => (g.label(0), g.label(g.len() - 1)),
    };
    if vertical {
        doc.text(f.x - 3.0, f.y + f.h, &lo, "end", 8.0, None, "tick");
        doc.text(f.x - 3.0, f.y + 8.0, &hi, "end", 8.0, None, "tick");
    } else {
        doc.text(f.x, f.y + f.h + 10.0, &lo, "start", 8.0, None, "tick");
        doc.text(f.x + f.w, f.y + f.h + 10.0, &hi, "end", 8.0, None, "tick");
    }
}

fn union_range(parts: impl IntoIterator<Item = (f64, f64)>) -> Option<(f64, f64)> {
    parts
        .into_iter()
        .fold(None, |acc: Option<(f64, f64)>, (lo, hi)| match acc {
            None => Some((lo, hi)),
            Some((a, b)) => Some((a.min(lo), b.max(hi))),
        })
}

pub fn render_pdp_vars(
    surfaces: &[PdSurface],
    limits: Option<(f64, f64)>,
    spec: &PlotSpec,
) -> Result<String> {
    spec.validate()?;
    if surfaces.is_empty() {
        return Err(invalid("no surfaces to draw"));
    }
    if let Some(s) = surfaces.iter().find(|s| s.is_2d()) {
        return Err(invalid(format!(
            "pdp-vars draws 1-D surfaces; got ({})",
            s.vars.join(", ")
        )));
    }
    let ylims = union_range(surfaces.iter().map(|s| s.range(true))).expect("nonempty");
    let scale = make_scale(ScaleKind::DivergingPrediction, limits.unwrap_or(ylims))?;
    let k = surfaces.len();
    let cols = (k as f64).sqrt().ceil() as usize;
    let rows = k.div_ceil(cols);
    let top = if spec.title.is_some() { 40.0 } else { 10.0 };
    let legend_w = 90.0;
    let cw = (spec.width - legend_w - 10.0) / cols as f64;
    let ch = (spec.height - top) / rows as f64;
    let mut doc = Doc::new(spec);
    for (i, s) in surfaces.iter().enumerate() {
        let f = Frame {
            x: 10.0 + (i % cols) as f64 * cw + 40.0,
            y: top + (i / cols) as f64 * ch + 10.0,
            w: cw - 50.0,
            h: ch - 44.0,
        };
        open_panel(&mut doc, i, "pdp", &[&s.vars[0]], f);
        draw_curves(&mut doc, s, f, ylims, &scale);
        axis_labels(&mut doc, f, &s.grids[0], false);
        doc.text(f.x + f.w / 2.0, f.y + f.h + 24.0, &s.vars[0], "middle", 11.0, None, "axis-title");
        doc.text(f.x - 3.0, f.y + f.h, &label(ylims.0), "end", 8.0, None, "tick");
        doc.text(f.x - 3.0, f.y + 8.0, &label(ylims.1), "end", 8.0, None, "tick");
        doc.close();
    }
    doc.legend(&scale, spec.width - legend_w + 16.0, top + 30.0, 14.0, 160.0, "y-hat");
    Ok(doc.finish())
}

/// The surface over `(x, y)`, transposed from `(y, x)` when needed.
fn find_pair(bi: &[PdSurface], x: &str, y: &str) -> Result<PdSurface> {
    for s in bi.iter().filter(|s| s.is_2d()) {
        if s.vars[0] == x && s.vars[1] == y {
            return Ok(s.clone());
        }
        if s.vars[0] == y && s.vars[1] == x {
            return Ok(s.transposed());
        }
    }
    Err(VividError::MissingSurface(x.to_string(), y.to_string()))
}

#[allow(clippy::too_many_arguments)]
pub fn render_pdp_pairs(
    d: &Dataset,
    vars: &[String],
    uni: &[PdSurface],
    bi: &[PdSurface],
    fitted: &[f64],
    fitlims: FitLims,
    limits: Option<(f64, f64)>,
    spec: &PlotSpec,
) -> Result<String> {
    spec.validate()?;
    let p = vars.len();
    if p == 0 {
        return Err(invalid("no variables to draw"));
    }
    if fitted.len() != d.n_rows() {
        return Err(invalid(format!(
            "{} fitted values for {} rows",
            fitted.len(),
            d.n_rows()
        )));
    }
    let diag = vars
        .iter()
        .map(|v| {
            uni.iter()
                .find(|s| !s.is_2d() && s.vars[0] == *v)
                .cloned()
                .ok_or_else(|| VividError::MissingSurface(v.clone(), v.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pairs = vec![None; p * p];
    for i in 0..p {
        for j in i + 1..p {
            // Upper panel (i, j): column variable across, row variable up.
            pairs[i * p + j] = Some(find_pair(bi, &vars[j], &vars[i])?);
        }
    }
    let pd_range = union_range(
        diag.iter()
            .map(|s| s.range(false))
            .chain(pairs.iter().flatten().map(|s| s.range(false))),
    )
    .expect("nonempty");
    let auto = match fitlims {
        FitLims::Pdp => pd_range,
        FitLims::All => union_range(
            [pd_range]
                .into_iter()
                .chain(diag.iter().map(|s| s.range(true)))
                .chain(range(fitted.iter().copied())),
        )
        .expect("nonempty"),
    };
    let scale = make_scale(ScaleKind::DivergingPrediction, limits.unwrap_or(auto))?;
    let ylims = union_range(diag.iter().map(|s| s.range(true))).expect("nonempty");

    let top = if spec.title.is_some() { 40.0 } else { 10.0 };
    let (left, bottom, legend_w) = (40.0, 40.0, 90.0);
    let size = ((spec.width - left - legend_w) / p as f64).min((spec.height - top - bottom) / p as f64);
    let columns = vars
        .iter()
        .map(|v| d.column(v).map(<[f64]>::to_vec))
        .collect::<Result<Vec<_>>>()?;
    let mut doc = Doc::new(spec);
    for i in 0..p {
        for j in 0..p {
            let k = i * p + j;
            let f = Frame {
                x: left + j as f64 * size + 2.0,
                y: top + i as f64 * size + 2.0,
                w: size - 4.0,
                h: size - 4.0,
            };
            if i == j {
                open_panel(&mut doc, k, "diag", &[&vars[i]], f);
                draw_curves(&mut doc, &diag[i], f, ylims, &scale);
            } else if i < j {
                let s = pairs[k].as_ref().expect("filled above");
                open_panel(&mut doc, k, "upper", &[&vars[j], &vars[i]], f);
                draw_cells(&mut doc, s, f, &scale);
            } else {
                open_panel(&mut doc, k, "lower", &[&vars[j], &vars[i]], f);
                let (gx, gy) = (&diag[j].grids[0], &diag[i].grids[0]);
                let (xl, xh) = grid_extent(gx);
                let (yl, yh) = grid_extent(gy);
                let (xa, ya) = (f.x_axis(xl, xh), f.y_axis(yl, yh));
                let r = (size / 80.0).clamp(1.0, 3.0);
                for (row, fit) in fitted.iter().enumerate() {
                    doc.raw(&format!(
                        "<circle class=\"obs\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\"/>",
                        num(xa.at(columns[j][row])),
                        num(ya.at(columns[i][row])),
                        num(r),
                        scale.color(*fit)
                    ));
                }
            }
            doc.close();
            if i == p - 1 {
                doc.text(f.x + f.w / 2.0, f.y + f.h + 16.0, &vars[j], "middle", 11.0, None, "axis-title");
            }
            if j == 0 {
                doc.text(f.x - 8.0, f.y + f.h / 2.0, &vars[i], "middle", 11.0, Some(90.0), "axis-title");
            }
        }
    }
    doc.legend(&scale, spec.width - legend_w + 16.0, top + 30.0, 14.0, 160.0, "y-hat");
    Ok(doc.finish())
}

/// Marginal ticks of observed values along the bottom or left edge.
fn rug(doc: &mut Doc, values: &[f64], axis: &Axis, f: Frame, vertical: bool) {
    let mut vals = values.to_vec();
    vals.sort_by(f64::total_cmp);
    vals.dedup();
    doc.open("class=\"rug\"");
    for v in vals {
        let p = axis.at(v);
        if vertical {
            doc.line("rug-tick", (f.x, p), (f.x + 4.0, p), "#404040", 0.5);
        } else {
            doc.line("rug-tick", (p, f.y + f.h), (p, f.y + f.h - 4.0), "#404040", 0.5);
        }
    }
    doc.close();
}

pub fn render_pdp_zen(
    zp: &ZPath,
    bi: &[PdSurface],
    d: &Dataset,
    limits: Option<(f64, f64)>,
    spec: &PlotSpec,
) -> Result<String> {
    spec.validate()?;
    // Panel k of a sequence shows (v[k], v[k+1]); even panels put v[k]
    // across, odd panels put it up, so neighbours share an axis.
    let mut panels = Vec::new();
    let mut row0 = 0usize;
    let mut max_col = 0usize;
    for seq in &zp.sequences {
        if seq.len() < 2 {
            return Err(invalid("zen-path sequences need at least two variables"));
        }
        for k in 0..seq.len() - 1 {
            let (x, y) = if k % 2 == 0 {
                (&seq[k], &seq[k + 1])
            } else {
                (&seq[k + 1], &seq[k])
            };
            let s = find_pair(bi, x, y)?;
            let (col, row) = ((k + 1) / 2, row0 + k / 2);
            max_col = max_col.max(col);
            panels.push((col, row, s));
        }
        row0 += (seq.len() - 2) / 2 + 1;
    }
    if panels.is_empty() {
        return Err(invalid("zen-path has no panels"));
    }
    let auto = union_range(panels.iter().map(|p| p.2.range(false))).expect("nonempty");
    let scale = make_scale(ScaleKind::DivergingPrediction, limits.unwrap_or(auto))?;
    let top = if spec.title.is_some() { 40.0 } else { 10.0 };
    let (left, legend_w) = (50.0, 90.0);
    let size = ((spec.width - left - legend_w) / (max_col + 1) as f64)
        .min((spec.height - top - 30.0) / row0 as f64);
    let mut doc = Doc::new(spec);
    for (k, (col, row, s)) in panels.iter().enumerate() {
        let f = Frame {
            x: left + *col as f64 * size + 4.0,
            y: top + *row as f64 * size + 4.0,
            w: size - 8.0,
            h: size - 8.0,
        };
        open_panel(&mut doc, k, "zen", &[&s.vars[0], &s.vars[1]], f);
        draw_cells(&mut doc, s, f, &scale);
        let (gx, gy) = (&s.grids[0], &s.grids[1]);
        let (xl, xh) = grid_extent(gx);
        let (yl, yh) = grid_extent(gy);
        rug(&mut doc, d.column(&gx.var)?, &f.x_axis(xl, xh), f, false);
        rug(&mut doc, d.column(&gy.var)?, &f.y_axis(yl, yh), f, true);
        axis_labels(&mut doc, f, gx, false);
        axis_labels(&mut doc, f, gy, true);
        doc.text(f.x + f.w / 2.0, f.y + f.h + 20.0, &gx.var, "middle", 10.0, None, "axis-title");
        doc.text(f.x - 26.0, f.y + f.h / 2.0, &gy.var, "middle", 10.0, Some(90.0), "axis-title");
        doc.close();
    }
    doc.legend(&scale, spec.width - legend_w + 16.0, top + 30.0, 14.0, 160.0, "y-hat");
    Ok(doc.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_bracket_the_points() {
        assert_eq!(cell_edges(&[0.0, 1.0, 2.0]), vec![-0.5, 0.5, 1.5, 2.5]);
        assert_eq!(cell_edges(&[3.0]), vec![2.5, 3.5]);
    }
}

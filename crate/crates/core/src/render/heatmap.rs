use super::{label, make_scale, range, Doc, PlotSpec, ScaleKind};
use crate::error::Result;
use crate::vivi::ViviMatrix;

/// Default importance and interaction limits: the diagonal and
/// off-diagonal ranges.
pub(crate) fn default_limits(v: &ViviMatrix) -> ((f64, f64), (f64, f64)) {
    let imp = range(v.importance()).unwrap_or((0.0, 0.0));
    let int = range(v.pairs().into_iter().map(|p| p.2)).unwrap_or((0.0, 0.0));
    (imp, int)
}

pub fn render_heatmap(
    v: &ViviMatrix,
    imp_lims: Option<(f64, f64)>,
    int_lims: Option<(f64, f64)>,
    spec: &PlotSpec,
) -> Result<String> {
    spec.validate()?;
    let (di, dn) = default_limits(v);
    let imp = make_scale(ScaleKind::SequentialImportance, imp_lims.unwrap_or(di))?;
    let int = make_scale(ScaleKind::SequentialInteraction, int_lims.unwrap_or(dn))?;
    let m = v.len();
    let longest = v.vars.iter().map(|s| s.chars().count()).max().unwrap_or(1) as f64;
    let left = 16.0 + 7.0 * longest;
    let top = if spec.title.is_some() { 44.0 } else { 20.0 };
    let bottom = 16.0 + 7.0 * longest * spec.angle.to_radians().sin().abs().max(0.3);
    let legend_w = 120.0;
    let cell = ((spec.width - left - legend_w) / m as f64)
        .min((spec.height - top - bottom) / m as f64)
        .max(1.0);

    let mut doc = Doc::new(spec);
    doc.open("id=\"cells\"");
    for i in 0..m {
        for j in 0..m {
            let x = v.matrix[i][j];
            let fill = if i == j { imp.color(x) } else { int.color(x) };
            let class = if i == j { "cell diag" } else { "cell" };
            doc.rect(
                Some(&format!("cell-{i}-{j}")),
                class,
                left + j as f64 * cell,
                top + i as f64 * cell,
                cell,
                cell,
                &fill,
                &format!(" stroke=\"#FFFFFF\" stroke-width=\"0.5\" data-value=\"{}\"", label(x)),
            );
        }
    }
    doc.close();
    doc.open("id=\"labels\"");
    for (k, name) in v.vars.iter().enumerate() {
        let mid = (k as f64 + 0.5) * cell;
        doc.text(left - 6.0, top + mid + 4.0, name, "end", 11.0, None, "row-label");
        let anchor = if spec.angle == 0.0 { "middle" } else { "end" };
        doc.text(
            left + mid,
            top + m as f64 * cell + 14.0,
            name,
            anchor,
            11.0,
            Some(spec.angle),
            "col-label",
        );
    }
    doc.close();
    let lx = left + m as f64 * cell + 24.0;
    let lh = (m as f64 * cell / 2.0 - 40.0).clamp(40.0, 200.0);
    doc.legend(&imp, lx, top + 16.0, 14.0, lh, "Vimp");
    doc.legend(&int, lx, top + lh + 64.0, 14.0, lh, "Vint");
    Ok(doc.finish())
}

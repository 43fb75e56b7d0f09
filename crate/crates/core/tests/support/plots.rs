//! Fixed 2- and 3-variable inputs for the five displays.

use vivid_core::dataset::{Dataset, SampleSpec};
use vivid_core::parallel::Workers;
use vivid_core::pdp::{pd_1d, pd_2d, IceSpec, PdConfig, PdSurface};
use vivid_core::predictor::{FnModel, Model};
use vivid_core::render::{
    render_heatmap, render_network, render_pdp_pairs, render_pdp_vars, render_pdp_zen, FitLims,
    NetworkOptions, PlotSpec,
};
use vivid_core::vivi::{Meta, ViviMatrix};
use vivid_core::zenpath::{build_graph, zpath_strict};

pub const KINDS: [&str; 5] = ["heatmap", "network", "pdp-vars", "pdp-pairs", "pdp-zen"];
pub const IMP_LIMS: (f64, f64) = (0.0, 8.0);
pub const INT_LIMS: (f64, f64) = (0.0, 1.0);

const NAMES: [&str; 3] = ["a", "b", "c"];

/// Importance 9 and interaction 1.5 sit above the forced limits.
pub fn matrix(p: usize) -> ViviMatrix {
    let full = [[9.0, 1.5, 0.2], [1.5, 3.0, 0.6], [0.2, 0.6, 0.5]];
    ViviMatrix::new(
        NAMES[..p].iter().map(|s| s.to_string()).collect(),
        (0..p).map(|i| full[i][..p].to_vec()).collect(),
        "agnostic",
        false,
        Meta::default(),
    )
    .unwrap()
}

pub fn dataset(p: usize) -> Dataset {
    let rows: Vec<Vec<f64>> = (0..12)
        .map(|i| {
            let x: Vec<f64> = (0..p).map(|j| ((i * (j + 3) + j) % 7) as f64 - 3.0).collect();
            let mut r = x.clone();
            r.push(model_fn(&x));
            r
        })
        .collect();
    let mut names: Vec<&str> = NAMES[..p].to_vec();
    names.push("y");
    Dataset::from_rows(&names, &rows, "y").unwrap()
}

fn model_fn(r: &[f64]) -> f64 {
    r[0] * r[1] + r.get(2).copied().unwrap_or(0.0)
}

pub fn model(p: usize) -> FnModel {
    FnModel::new(&NAMES[..p], model_fn)
}

fn config() -> PdConfig {
    PdConfig {
        grid_size: 4,
        sample: SampleSpec::new(500, 1701).unwrap(),
    }
}

fn pairs(m: &dyn Model, d: &Dataset, vars: &[String], w: &Workers) -> Vec<PdSurface> {
    let mut bi = Vec::new();
    for (i, x) in vars.iter().enumerate() {
        for y in &vars[i + 1..] {
            bi.push(pd_2d(m, d, x, y, &config(), false, w).unwrap());
        }
    }
    bi
}

/// One SVG per display kind, in [`KINDS`] order.
pub fn render_all(p: usize, workers: &Workers) -> Vec<(String, String)> {
    let v = matrix(p);
    let d = dataset(p);
    let m = model(p);
    let spec = PlotSpec::default();
    let vars = v.vars.clone();
    let uni: Vec<PdSurface> = vars
        .iter()
        .map(|x| pd_1d(&m, &d, x, &config(), &IceSpec::Count(3), workers).unwrap())
        .collect();
    let bi = pairs(&m, &d, &vars, workers);
    let fitted = m.predict(&d.features()).unwrap();
    let zp = zpath_strict(&build_graph(&v, 0.0).unwrap(), false);
    let net = NetworkOptions {
        imp_lims: Some(IMP_LIMS),
        int_lims: Some(INT_LIMS),
        ..NetworkOptions::default()
    };
    let svgs = [
        render_heatmap(&v, Some(IMP_LIMS), Some(INT_LIMS), &spec).unwrap(),
        render_network(&v, &net, &spec).unwrap(),
        render_pdp_vars(&uni, None, &spec).unwrap(),
        render_pdp_pairs(&d, &vars, &uni, &bi, &fitted, FitLims::Pdp, None, &spec).unwrap(),
        render_pdp_zen(&zp, &bi, &d, None, &spec).unwrap(),
    ];
    KINDS.iter().map(|k| k.to_string()).zip(svgs).collect()
}

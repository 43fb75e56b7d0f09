use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use serde_json::json;
use vivid_core::dataset::{load_csv, ColumnKind, Dataset, SampleSpec};
use vivid_core::parallel::Workers;
use vivid_core::pdp::{pd_1d, pd_2d, IceSpec, PdConfig, DEFAULT_N_ICE};
use vivid_core::predictor::{
    fit_builtin, BuiltinKind, ClassWrapper, ExternalConfig, ExternalModel, Hyperparams, Model,
    Predictor, DEFAULT_EPS,
};
use vivid_core::render::{self, FitLims, Layout, NetworkOptions, PlotSpec};
use vivid_core::seriation;
use vivid_core::vivi::{
    self, ImportanceType, ViviMatrix, ViviOptions, DEFAULT_GRID_SIZE, DEFAULT_NMAX,
    DEFAULT_NUM_PERM, DEFAULT_SEED,
};
use vivid_core::zenpath::{self, Method, ZPath};

use crate::config::{Lims, List, Settings};
use crate::{
    AverageArgs, BenchArgs, Cli, Cmd, ComputeArgs, DefaultsArgs, HeatmapArgs, ImportArgs,
    ModelArgs, NetworkArgs, PdpArgs, PdpPairsArgs, PdpVarsArgs, PdpZenArgs, PlotArgs, PlotCmd,
    ReorderArgs, TableArgs, ZenSelect, ZpathArgs,
};

const DEFAULT_PREDICTOR: &str = "builtin:bagged-trees";
const DEFAULT_TOP: usize = 5;

pub fn run(cli: Cli) -> Result<()> {
    let s = Settings::load(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Compute(a) => compute(&s, a),
        Cmd::Reorder(a) => reorder(&s, a),
        Cmd::Average(a) => average(&s, a),
        Cmd::Plot(PlotCmd::Heatmap(a)) => heatmap(&s, a),
        Cmd::Plot(PlotCmd::Network(a)) => network(&s, a),
        Cmd::Plot(PlotCmd::PdpVars(a)) => pdp_vars(&s, a),
        Cmd::Plot(PlotCmd::PdpPairs(a)) => pdp_pairs(&s, a),
        Cmd::Plot(PlotCmd::PdpZen(a)) => pdp_zen(&s, a),
        Cmd::Zpath(a) => zpath(&s, a),
        Cmd::Table(a) => table(&s, a),
        Cmd::Import(a) => import(&s, a),
        Cmd::Bench(a) => bench(&s, a),
        Cmd::Defaults(a) => defaults(&s, a),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn read_matrix(s: &Settings, flag: Option<PathBuf>) -> Result<ViviMatrix> {
    let path: PathBuf = s.require(flag, "matrix")?;
    Ok(ViviMatrix::read_json(&path)?)
}

fn matrix_list(s: &Settings, flag: Vec<PathBuf>, key: &str) -> Result<Vec<PathBuf>> {
    if !flag.is_empty() {
        return Ok(flag);
    }
    Ok(s.get(None::<List>, key)?
        .map(|l| l.0.into_iter().map(PathBuf::from).collect())
        .unwrap_or_default())
}

fn lims(l: Option<Lims>) -> Option<(f64, f64)> {
    l.map(|Lims(lo, hi)| (lo, hi))
}

fn plot_spec(s: &Settings, p: &PlotArgs) -> Result<PlotSpec> {
    let d = PlotSpec::default();
    Ok(PlotSpec {
        width: s.or(p.width, "width", d.width)?,
        height: s.or(p.height, "height", d.height)?,
        angle: s.or(p.angle, "angle", d.angle)?,
        title: s.get(p.title.clone(), "title")?,
    })
}

fn save_svg(s: &Settings, p: &PlotArgs, svg: &str) -> Result<()> {
    let out: PathBuf = s.require(p.out.clone(), "out")?;
    render::write_svg(&out, svg)?;
    Ok(())
}

/// A dataset with a fitted or attached predictor.
pub struct Session {
    pub data: Dataset,
    pub model: Predictor,
    pub positive_class: Option<String>,
    pub eps: f64,
    pub seed: u64,
    pub workers: Workers,
}

impl Session {
    fn wrapper(&self) -> Result<ClassWrapper<'_>> {
        Ok(ClassWrapper::for_dataset(
            &self.model,
            &self.data,
            self.positive_class.as_deref(),
            self.eps,
        )?)
    }
}

fn predictor_specs(s: &Settings, m: &ModelArgs) -> Result<Vec<String>> {
    if !m.predictor.is_empty() {
        return Ok(m.predictor.clone());
    }
    Ok(vec![s.or(None, "predictor", DEFAULT_PREDICTOR.to_string())?])
}

fn load_data(s: &Settings, m: &ModelArgs) -> Result<Dataset> {
    let path: PathBuf = s.require(m.data.clone(), "data")?;
    let response: String = s.require(m.response.clone(), "response")?;
    let overrides: HashMap<String, ColumnKind> = s
        .get(m.categorical.clone(), "categorical")?
        .map(|l| l.0.into_iter().map(|c| (c, ColumnKind::Categorical)).collect())
        .unwrap_or_default();
    Ok(load_csv(&path, &response, &overrides)?)
}

fn attach(s: &Settings, m: &ModelArgs, d: &Dataset, spec: &str, seed: u64) -> Result<Predictor> {
    if let Some(kind) = spec.strip_prefix("builtin:") {
        let kind: BuiltinKind = kind.parse()?;
        let mut hp = Hyperparams {
            positive_class: s.get(m.positive_class.clone(), "positive-class")?,
            ..Hyperparams::default()
        };
        hp.k = s.or(m.k, "k", hp.k)?;
        hp.trees.n_trees = s.or(m.n_trees, "n-trees", hp.trees.n_trees)?;
        hp.trees.max_depth = s.or(m.max_depth, "max-depth", hp.trees.max_depth)?;
        hp.trees.min_leaf = s.or(m.min_leaf, "min-leaf", hp.trees.min_leaf)?;
        hp.trees.seed = seed;
        return Ok(fit_builtin(kind, d, &hp)?);
    }
    if let Some(cmd) = spec.strip_prefix("external:") {
        let command = shlex::split(cmd)
            .filter(|c| !c.is_empty())
            .ok_or_else(|| anyhow!("cannot parse external command `{cmd}`"))?;
        let cfg = ExternalConfig {
            command,
            pool: s.or(m.pool, "pool", 1)?,
        };
        return Ok(Predictor::External(ExternalModel::spawn(&cfg, d.predictor_names())?));
    }
    bail!("predictor must be `builtin:<kind>` or `external:<command>`, got `{spec}`")
}

fn session(s: &Settings, m: &ModelArgs) -> Result<Session> {
    let specs = predictor_specs(s, m)?;
    let [spec] = &specs[..] else {
        bail!("this command takes a single --predictor");
    };
    let data = load_data(s, m)?;
    let seed = s.seed(m.seed, DEFAULT_SEED)?;
    let model = attach(s, m, &data, spec, seed)?;
    Ok(Session {
        model,
        positive_class: s.get(m.positive_class.clone(), "positive-class")?,
        eps: s.or(m.eps, "eps", DEFAULT_EPS)?,
        seed,
        workers: Workers::new(s.or(m.workers, "workers", 1)?)?,
        data,
    })
}

fn vivi_options(
    s: &Settings,
    seed: u64,
    grid_size: Option<usize>,
    nmax: Option<usize>,
    num_perm: Option<usize>,
) -> Result<ViviOptions> {
    Ok(ViviOptions {
        grid_size: s.or(grid_size, "grid-size", DEFAULT_GRID_SIZE)?,
        nmax: s.or(nmax, "nmax", DEFAULT_NMAX)?,
        num_perm: s.or(num_perm, "num-perm", DEFAULT_NUM_PERM)?,
        normalized: s.or(None, "normalized", false)?,
        importance_type: s.or(None, "importance-type", ImportanceType::Agnostic)?,
        seed,
        reorder: s.or(None, "reorder", false)?,
    })
}

fn summary(v: &ViviMatrix) -> String {
    let mut imp: Vec<(&str, f64)> = v.vars.iter().map(String::as_str).zip(v.importance()).collect();
    imp.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    let mut int: Vec<(String, f64)> = v
        .pairs()
        .into_iter()
        .map(|(i, j, x)| (format!("{} x {}", v.vars[i], v.vars[j]), x))
        .collect();
    int.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut out = String::from("top importance\n");
    for (name, x) in imp.iter().take(DEFAULT_TOP) {
        let _ = writeln!(out, "  {name:<20} {x:.6}");
    }
    out.push_str("top interaction\n");
    for (name, x) in int.iter().take(DEFAULT_TOP) {
        let _ = writeln!(out, "  {name:<20} {x:.6}");
    }
    out
}

fn compute(s: &Settings, a: ComputeArgs) -> Result<()> {
    let out: PathBuf = s.require(a.out.clone(), "out")?;
    let seed = s.seed(a.model.seed, DEFAULT_SEED)?;
    let mut opts = vivi_options(s, seed, a.grid_size, a.nmax, a.num_perm)?;
    opts.normalized = s.or(a.normalized, "normalized", opts.normalized)?;
    opts.reorder = s.or(a.reorder, "reorder", opts.reorder)?;
    if let Some(t) = a.importance_type {
        opts.importance_type = t.parse()?;
    }
    opts.validate()?;
    let ses = session(s, &a.model)?;
    let v = vivi::compute(&ses.wrapper()?, &ses.data, &opts, &ses.workers)?;
    write(&out, &v.to_json_string()?)?;
    if let Some(t) = s.get(a.table, "table")? {
        write_table(&v, &t)?;
    }
    print!("{}", summary(&v));
    Ok(())
}

fn write_table(v: &ViviMatrix, path: &Path) -> Result<()> {
    let f = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    vivi::write_long_table(v, f)?;
    Ok(())
}

fn reorder(s: &Settings, a: ReorderArgs) -> Result<()> {
    let apply = matrix_list(s, a.apply_to, "apply-to")?;
    let mut inputs = matrix_list(s, a.matrix, "matrix")?;
    if inputs.is_empty() {
        inputs = apply.clone();
    }
    if inputs.is_empty() {
        bail!("missing --matrix");
    }
    let list = inputs
        .iter()
        .map(ViviMatrix::read_json)
        .collect::<vivid_core::Result<Vec<_>>>()?;
    let base = if list.len() == 1 {
        list[0].clone()
    } else {
        seriation::average_matrices(&list)?
    };
    let ordered = seriation::reorder(&base);
    if let Some(out) = s.get(a.out, "out")? {
        write(&out, &ordered.to_json_string()?)?;
    }
    let dir: Option<PathBuf> = s.get(a.apply_out, "apply-out")?;
    for path in &apply {
        let v = seriation::apply_order(&ViviMatrix::read_json(path)?, &ordered.vars)?;
        let stem = path.file_stem().and_then(|x| x.to_str()).unwrap_or("matrix");
        let name = format!("{stem}.reordered.json");
        let target = match &dir {
            Some(d) => d.join(name),
            None => path.with_file_name(name),
        };
        write(&target, &v.to_json_string()?)?;
    }
    println!("{}", ordered.vars.join(","));
    Ok(())
}

fn average(s: &Settings, a: AverageArgs) -> Result<()> {
    let inputs = matrix_list(s, a.matrix, "matrix")?;
    if inputs.is_empty() {
        bail!("missing --matrix");
    }
    let out: PathBuf = s.require(a.out, "out")?;
    let list = inputs
        .iter()
        .map(ViviMatrix::read_json)
        .collect::<vivid_core::Result<Vec<_>>>()?;
    write(&out, &seriation::average_matrices(&list)?.to_json_string()?)
}

fn heatmap(s: &Settings, a: HeatmapArgs) -> Result<()> {
    let v = read_matrix(s, a.matrix)?;
    let svg = render::render_heatmap(
        &v,
        lims(s.get(a.imp_lims, "imp-lims")?),
        lims(s.get(a.int_lims, "int-lims")?),
        &plot_spec(s, &a.plot)?,
    )?;
    save_svg(s, &a.plot, &svg)
}

fn network(s: &Settings, a: NetworkArgs) -> Result<()> {
    let v = read_matrix(s, a.matrix)?;
    let cluster = if let Some(path) = s.get(a.cluster, "cluster")? {
        let text = fs::read_to_string(&path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        Some(serde_json::from_str::<BTreeMap<String, usize>>(&text)?)
    } else if let Some(k) = s.get(a.cluster_k, "cluster-k")? {
        let groups = seriation::cluster_groups(&v, k)?;
        Some(v.vars.iter().cloned().zip(groups).collect())
    } else {
        None
    };
    let layout = match s.or(a.layout, "layout", "circle".to_string())?.as_str() {
        "circle" => Layout::Circle,
        "star" => Layout::Star,
        "custom" => {
            let path: PathBuf = s
                .get(a.coords, "coords")?
                .ok_or_else(|| anyhow!("the custom layout needs --coords"))?;
            let text = fs::read_to_string(&path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            Layout::Custom(serde_json::from_str(&text)?)
        }
        other => bail!("layout must be `circle`, `star` or `custom`, got `{other}`"),
    };
    let opts = NetworkOptions {
        int_threshold: s.get(a.int_threshold, "int-threshold")?,
        remove_node: s.or(a.remove_node, "remove-node", false)?,
        cluster,
        layout,
        imp_lims: lims(s.get(a.imp_lims, "imp-lims")?),
        int_lims: lims(s.get(a.int_lims, "int-lims")?),
    };
    let svg = render::render_network(&v, &opts, &plot_spec(s, &a.plot)?)?;
    save_svg(s, &a.plot, &svg)
}

fn pd_config(s: &Settings, p: &PdpArgs, seed: u64) -> Result<PdConfig> {
    Ok(PdConfig {
        grid_size: s.or(p.grid_size, "grid-size", DEFAULT_GRID_SIZE)?,
        sample: SampleSpec::new(s.or(p.nmax, "nmax", DEFAULT_NMAX)?, seed)?,
    })
}

/// Explicit variables, else the most important ones from a matrix, else
/// every predictor.
fn choose_vars(
    s: &Settings,
    vars: Option<List>,
    matrix: Option<PathBuf>,
    top: Option<usize>,
    d: &Dataset,
) -> Result<Vec<String>> {
    if let Some(List(v)) = s.get(vars, "vars")? {
        if v.is_empty() {
            bail!("--vars is empty");
        }
        return Ok(v);
    }
    if let Some(path) = s.get(matrix, "matrix")? {
        let v = ViviMatrix::read_json(&path)?;
        let mut imp: Vec<(usize, f64)> = v.importance().into_iter().enumerate().collect();
        imp.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let n = s.or(top, "top", DEFAULT_TOP)?;
        return Ok(imp.into_iter().take(n).map(|(i, _)| v.vars[i].clone()).collect());
    }
    Ok(d.predictor_names())
}

fn pdp_vars(s: &Settings, a: PdpVarsArgs) -> Result<()> {
    let ses = session(s, &a.model)?;
    let vars = choose_vars(s, a.vars, a.matrix, a.top, &ses.data)?;
    let cfg = pd_config(s, &a.pdp, ses.seed)?;
    let ice = IceSpec::Count(s.or(a.n_ice, "n-ice", DEFAULT_N_ICE)?);
    let w = ses.wrapper()?;
    let surfaces = vars
        .iter()
        .map(|v| pd_1d(&w, &ses.data, v, &cfg, &ice, &ses.workers))
        .collect::<vivid_core::Result<Vec<_>>>()?;
    let svg = render::render_pdp_vars(
        &surfaces,
        lims(s.get(a.pdp.lims, "lims")?),
        &plot_spec(s, &a.plot)?,
    )?;
    save_svg(s, &a.plot, &svg)
}

fn pdp_pairs(s: &Settings, a: PdpPairsArgs) -> Result<()> {
    let ses = session(s, &a.model)?;
    let vars = choose_vars(s, a.vars, a.matrix, a.top, &ses.data)?;
    let cfg = pd_config(s, &a.pdp, ses.seed)?;
    let ice = IceSpec::Count(s.or(a.n_ice, "n-ice", DEFAULT_N_ICE)?);
    let hull = s.or(a.convex_hull, "convex-hull", false)?;
    let fitlims: FitLims = s.or(a.fitlims, "fitlims", "pdp".to_string())?.parse()?;
    let w = ses.wrapper()?;
    let uni = vars
        .iter()
        .map(|v| pd_1d(&w, &ses.data, v, &cfg, &ice, &ses.workers))
        .collect::<vivid_core::Result<Vec<_>>>()?;
    let mut bi = Vec::new();
    for (i, x) in vars.iter().enumerate() {
        for y in &vars[i + 1..] {
            bi.push(pd_2d(&w, &ses.data, x, y, &cfg, hull, &ses.workers)?);
        }
    }
    let fitted = w.predict(&ses.data.features())?;
    let svg = render::render_pdp_pairs(
        &ses.data,
        &vars,
        &uni,
        &bi,
        &fitted,
        fitlims,
        lims(s.get(a.pdp.lims, "lims")?),
        &plot_spec(s, &a.plot)?,
    )?;
    save_svg(s, &a.plot, &svg)
}

fn build_zpath(s: &Settings, z: &ZenSelect, v: &ViviMatrix) -> Result<ZPath> {
    let method: Method = s.or(z.zpath_method.clone(), "zpath-method", "greedy.weighted".into())?.parse()?;
    let cutoff = match (s.get(z.cutoff, "cutoff")?, s.get(z.cutoff_quantile, "cutoff-quantile")?) {
        (Some(_), Some(_)) => bail!("give either --cutoff or --cutoff-quantile, not both"),
        (Some(c), None) => c,
        (None, Some(q)) => zenpath::offdiag_quantile(v, q)?,
        // Interactions are nonnegative, so this keeps every pair.
        (None, None) => -1.0,
    };
    let connect = if z.no_connect {
        false
    } else {
        s.or(z.connect, "connect", true)?
    };
    let g = zenpath::build_graph(v, cutoff)?;
    Ok(match method {
        Method::StrictlyWeighted => zenpath::zpath_strict(&g, connect),
        Method::GreedyWeighted => {
            let (mut zp, _) = zenpath::zpath_greedy(&g);
            if connect && zp.sequences.len() > 1 {
                zp.sequences = vec![zp.sequences.concat()];
                zp.connected = true;
            }
            zp
        }
    })
}

fn read_zpath(path: &Path) -> Result<ZPath> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(serde_json::from_str(&text).with_context(|| format!("bad zen-path {}", path.display()))?)
}

fn zpath(s: &Settings, a: ZpathArgs) -> Result<()> {
    let v = read_matrix(s, a.matrix)?;
    let zp = build_zpath(s, &a.zen, &v)?;
    let text = zp.to_json_string()?;
    match s.get(a.out, "out")? {
        Some(out) => write(&out, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pdp_zen(s: &Settings, a: PdpZenArgs) -> Result<()> {
    let zp = match s.get(a.zpath, "zpath")? {
        Some(p) => read_zpath(&p)?,
        None => {
            let v = read_matrix(s, a.matrix)
                .context("pdp-zen needs --zpath or --matrix")?;
            build_zpath(s, &a.zen, &v)?
        }
    };
    let ses = session(s, &a.model)?;
    let cfg = pd_config(s, &a.pdp, ses.seed)?;
    let hull = s.or(a.convex_hull, "convex-hull", false)?;
    let w = ses.wrapper()?;
    let mut seen = std::collections::BTreeSet::new();
    let mut bi = Vec::new();
    for (x, y) in zp.pairs() {
        let key = if x < y { (x.clone(), y.clone()) } else { (y.clone(), x.clone()) };
        if seen.insert(key) {
            bi.push(pd_2d(&w, &ses.data, &x, &y, &cfg, hull, &ses.workers)?);
        }
    }
    let svg = render::render_pdp_zen(
        &zp,
        &bi,
        &ses.data,
        lims(s.get(a.pdp.lims, "lims")?),
        &plot_spec(s, &a.plot)?,
    )?;
    save_svg(s, &a.plot, &svg)
}

fn table(s: &Settings, a: TableArgs) -> Result<()> {
    let v = read_matrix(s, a.matrix)?;
    match s.get(a.out, "out")? {
        Some(out) => write_table(&v, &out),
        None => Ok(vivi::write_long_table(&v, std::io::stdout().lock())?),
    }
}

#[derive(Deserialize)]
struct ImportFile {
    importance: Vec<(String, f64)>,
    #[serde(default)]
    interaction: Vec<(String, String, f64)>,
}

fn import(s: &Settings, a: ImportArgs) -> Result<()> {
    let out: PathBuf = s.require(a.out, "out")?;
    let text = fs::read_to_string(&a.input)
        .with_context(|| format!("cannot read {}", a.input.display()))?;
    let f: ImportFile = serde_json::from_str(&text)
        .with_context(|| format!("bad import file {}", a.input.display()))?;
    let v = vivi::import_external(&f.importance, &f.interaction)?;
    write(&out, &v.to_json_string()?)
}

fn bench(s: &Settings, a: BenchArgs) -> Result<()> {
    let data = load_data(s, &a.model)?;
    let seed = s.seed(a.model.seed, DEFAULT_SEED)?;
    let workers = Workers::new(s.or(a.model.workers, "workers", 1)?)?;
    let reps = s.or(a.reps, "reps", 5)?;
    if reps == 0 {
        bail!("--reps must be at least 1");
    }
    let opts = vivi_options(s, seed, a.grid_size, a.nmax, a.num_perm)?;
    opts.validate()?;
    let pos: Option<String> = s.get(a.model.positive_class.clone(), "positive-class")?;
    let eps = s.or(a.model.eps, "eps", DEFAULT_EPS)?;
    let mut csv = String::from("predictor,mean_seconds\n");
    for spec in predictor_specs(s, &a.model)? {
        let model = attach(s, &a.model, &data, &spec, seed)?;
        let w = ClassWrapper::for_dataset(&model, &data, pos.as_deref(), eps)?;
        let mut total = 0.0;
        for _ in 0..reps {
            let t = Instant::now();
            vivi::compute(&w, &data, &opts, &workers)?;
            total += t.elapsed().as_secs_f64();
        }
        let _ = writeln!(csv, "{},{:.6}", csv_field(&spec), total / reps as f64);
    }
    match s.get(a.out, "out")? {
        Some(out) => write(&out, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn defaults(s: &Settings, a: DefaultsArgs) -> Result<()> {
    let seed = s.seed(a.seed, DEFAULT_SEED)?;
    let o = vivi_options(s, seed, None, None, None)?;
    let plot = PlotSpec::default();
    let value = json!({
        "grid-size": o.grid_size,
        "nmax": o.nmax,
        "num-perm": o.num_perm,
        "n-ice": s.or(None, "n-ice", DEFAULT_N_ICE)?,
        "normalized": o.normalized,
        "importance-type": o.importance_type.as_str(),
        "reorder": o.reorder,
        "seed": o.seed,
        "predictor": s.or(None, "predictor", DEFAULT_PREDICTOR.to_string())?,
        "eps": s.or(None, "eps", DEFAULT_EPS)?,
        "workers": s.or(None, "workers", 1usize)?,
        "zpath-method": s.or(None, "zpath-method", "greedy.weighted".to_string())?,
        "connect": s.or(None, "connect", true)?,
        "convex-hull": s.or(None, "convex-hull", false)?,
        "fitlims": s.or(None, "fitlims", "pdp".to_string())?,
        "width": s.or(None, "width", plot.width)?,
        "height": s.or(None, "height", plot.height)?,
        "angle": s.or(None, "angle", plot.angle)?,
    });
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

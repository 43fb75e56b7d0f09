//! The VIVI matrix: permutation (or embedded) importance on the diagonal,
//! pairwise Friedman H off the diagonal.

mod stats;

use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use stats::{h_from_surfaces, permutation_importance, permuted_rmse, rmse, Importance};

use crate::dataset::{sample_rows, Dataset, SampleSpec};
use crate::error::{invalid, Result, VividError};
use crate::parallel::Workers;
use crate::pdp::{make_grid, PdConfig};
use crate::predictor::{ClassWrapper, Model};

pub const DEFAULT_GRID_SIZE: usize = 50;
pub const DEFAULT_NMAX: usize = 500;
pub const DEFAULT_NUM_PERM: usize = 4;
pub const DEFAULT_SEED: u64 = 1701;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImportanceType {
    Agnostic,
    Impurity,
}

impl ImportanceType {
    pub fn as_str(self) -> &'static str {
        match self {
            ImportanceType::Agnostic => "agnostic",
            ImportanceType::Impurity => "impurity",
        }
    }
}

impl std::str::FromStr for ImportanceType {
    type Err = VividError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "agnostic" => Ok(Self::Agnostic),
            "impurity" => Ok(Self::Impurity),
            other => Err(invalid(format!(
                "importance type must be `agnostic` or `impurity`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ViviOptions {
    pub grid_size: usize,
    pub nmax: usize,
    pub num_perm: usize,
    pub normalized: bool,
    pub importance_type: ImportanceType,
    pub seed: u64,
    pub reorder: bool,
}

impl Default for ViviOptions {
    fn default() -> Self {
        Self {
            grid_size: DEFAULT_GRID_SIZE,
            nmax: DEFAULT_NMAX,
            num_perm: DEFAULT_NUM_PERM,
            normalized: false,
            importance_type: ImportanceType::Agnostic,
            seed: DEFAULT_SEED,
            reorder: false,
        }
    }
}

impl ViviOptions {
    pub fn validate(&self) -> Result<()> {
        if self.grid_size < 1 {
            return Err(invalid("gridSize must be at least 1"));
        }
        if self.nmax < 1 {
            return Err(invalid("nmax must be at least 1"));
        }
        if self.num_perm < 1 {
            return Err(invalid("numPerm must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmax: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_perm: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    /// Per-variable importance of each permutation replicate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub averaged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViviMatrix {
    pub vars: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    pub importance_type: String,
    pub normalized: bool,
    #[serde(default)]
    pub meta: Meta,
}

impl ViviMatrix {
    pub fn new(
        vars: Vec<String>,
        matrix: Vec<Vec<f64>>,
        importance_type: impl Into<String>,
        normalized: bool,
        meta: Meta,
    ) -> Result<Self> {
        let v = Self {
            vars,
            matrix,
            importance_type: importance_type.into(),
            normalized,
            meta,
        };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.vars.len();
        if m == 0 {
            return Err(invalid("VIVI matrix has no variables"));
        }
        let mut seen = HashSet::new();
        for v in &self.vars {
            if v.is_empty() || !seen.insert(v.as_str()) {
                return Err(invalid(format!("bad or duplicate variable name `{v}`")));
            }
        }
        if self.matrix.len() != m || self.matrix.iter().any(|r| r.len() != m) {
            return Err(invalid(format!("VIVI matrix must be {m}x{m}")));
        }
        for i in 0..m {
            for j in 0..m {
                let x = self.matrix[i][j];
                if !x.is_finite() {
                    return Err(invalid(format!("non-finite entry at ({i}, {j})")));
                }
                if i != j {
                    if x != self.matrix[j][i] {
                        return Err(invalid(format!("matrix is not symmetric at ({i}, {j})")));
                    }
                    if x < 0.0 {
                        return Err(invalid(format!("negative interaction at ({i}, {j})")));
                    }
                    if self.normalized && x > 1.0 + 1e-9 {
                        return Err(invalid(format!(
                            "normalized interaction above 1 at ({i}, {j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn index_of(&self, var: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == var)
    }

    pub fn importance(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.matrix[i][i]).collect()
    }

    /// Off-diagonal entries of the upper triangle as `(i, j, value)`.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let m = self.len();
        (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, self.matrix[i][j]))
            .collect()
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_reader<R: Read>(r: R) -> Result<Self> {
        let v: Self = serde_json::from_reader(r)?;
        v.validate()?;
        Ok(v)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| VividError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_reader(std::io::BufReader::new(file))
    }
}

/// Friedman's H for one pair. The pair is evaluated in dataset column
/// order, so `h(a, b)` and `h(b, a)` agree bit for bit.
pub fn h_statistic(
    model: &dyn Model,
    d: &Dataset,
    var_a: &str,
    var_b: &str,
    cfg: &PdConfig,
    normalized: bool,
    workers: &Workers,
) -> Result<f64> {
    if var_a == var_b {
        return Err(invalid(format!("H needs two distinct variables, got `{var_a}` twice")));
    }
    let (mut ja, mut jb) = (d.predictor_index(var_a)?, d.predictor_index(var_b)?);
    let (mut va, mut vb) = (var_a, var_b);
    if ja > jb {
        std::mem::swap(&mut ja, &mut jb);
        std::mem::swap(&mut va, &mut vb);
    }
    let ga = make_grid(d, va, cfg.grid_size)?.points;
    let gb = make_grid(d, vb, cfg.grid_size)?.points;
    let x = sample_rows(d, cfg.sample).features();
    let fa = model.grid_means(&x, &[ja], &[&ga], workers)?;
    let fb = model.grid_means(&x, &[jb], &[&gb], workers)?;
    let fab = model.grid_means(&x, &[ja, jb], &[&ga, &gb], workers)?;
    Ok(h_from_surfaces(&fab, &fa, &fb, normalized))
}

/// Builds the full VIVI matrix for `model` on `d`.
pub fn compute(
    model: &ClassWrapper<'_>,
    d: &Dataset,
    opts: &ViviOptions,
    workers: &Workers,
) -> Result<ViviMatrix> {
    opts.validate()?;
    let vars = d.predictor_names();
    if vars.is_empty() {
        return Err(VividError::EmptyData("dataset has no predictors".into()));
    }
    let kept = sample_rows(d, SampleSpec::new(opts.nmax, opts.seed)?);
    let x = kept.features();
    x.check_names(model.feature_names())?;
    let m = vars.len();

    let (importance, replicates) = match opts.importance_type {
        ImportanceType::Agnostic => {
            let y = model.target(&kept)?;
            let imp = permutation_importance(model, &x, &y, opts.num_perm, opts.seed, workers)?;
            (imp.mean, Some(imp.replicates))
        }
        ImportanceType::Impurity => {
            let imp = model.inner().embedded_importance().ok_or_else(|| {
                invalid("impurity importance needs a bagged-trees predictor")
            })?;
            (imp, None)
        }
    };

    let grids = vars
        .iter()
        .map(|v| make_grid(d, v, opts.grid_size).map(|g| g.points))
        .collect::<Result<Vec<_>>>()?;
    let marginals = workers.try_map(m, |j| model.grid_means(&x, &[j], &[&grids[j]], workers))?;
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|j| (j + 1..m).map(move |k| (j, k)))
        .collect();
    let h = workers.try_map(pairs.len(), |p| {
        let (j, k) = pairs[p];
        let fab = model.grid_means(&x, &[j, k], &[&grids[j], &grids[k]], workers)?;
        Ok(h_from_surfaces(&fab, &marginals[j], &marginals[k], opts.normalized))
    })?;

    let mut matrix = vec![vec![0.0; m]; m];
    for (j, &v) in importance.iter().enumerate() {
        matrix[j][j] = v;
    }
    for (&(j, k), &v) in pairs.iter().zip(&h) {
        matrix[j][k] = v;
        matrix[k][j] = v;
    }
    let task = match model.task() {
        crate::predictor::Task::Regression => "regression".to_string(),
        crate::predictor::Task::BinaryClassification { positive_class, .. } => {
            format!("classification:{positive_class}")
        }
    };
    let meta = Meta {
        grid_size: Some(opts.grid_size),
        nmax: Some(opts.nmax),
        num_perm: Some(opts.num_perm),
        seed: Some(opts.seed),
        task: Some(task),
        replicates,
        averaged: false,
    };
    let v = ViviMatrix::new(
        vars,
        matrix,
        opts.importance_type.as_str(),
        opts.normalized,
        meta,
    )?;
    Ok(if opts.reorder {
        crate::seriation::reorder(&v)
    } else {
        v
    })
}

/// Assembles a matrix from importance and interaction values computed
/// elsewhere. Unlisted pairs are 0.
pub fn import_external(
    importance: &[(String, f64)],
    interaction: &[(String, String, f64)],
) -> Result<ViviMatrix> {
    let vars: Vec<String> = importance.iter().map(|(v, _)| v.clone()).collect();
    let m = vars.len();
    let mut matrix = vec![vec![0.0; m]; m];
    for (i, (_, x)) in importance.iter().enumerate() {
        matrix[i][i] = *x;
    }
    let index = |v: &str| {
        vars.iter()
            .position(|n| n == v)
            .ok_or_else(|| VividError::UnknownColumn(v.to_string()))
    };
    let mut set: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (a, b, x) in interaction {
        let (i, j) = (index(a)?, index(b)?);
        if i == j {
            return Err(invalid(format!("interaction of `{a}` with itself")));
        }
        let key = (i.min(j), i.max(j));
        if let Some(prev) = set.insert(key, *x) {
            if prev != *x {
                return Err(invalid(format!(
                    "conflicting interaction values for ({a}, {b}): {prev} and {x}"
                )));
            }
        }
        matrix[i][j] = *x;
        matrix[j][i] = *x;
    }
    ViviMatrix::new(vars, matrix, "external", false, Meta::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    Vimp,
    Vint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongRow {
    #[serde(rename = "Variable_1")]
    pub variable_1: String,
    #[serde(rename = "Variable_2")]
    pub variable_2: String,
    #[serde(rename = "Value")]
    pub value: f64,
    #[serde(rename = "Measure")]
    pub measure: Measure,
    #[serde(rename = "Row")]
    pub row: usize,
    #[serde(rename = "Col")]
    pub col: usize,
}

/// One row per matrix entry, column-major.
pub fn as_long_table(v: &ViviMatrix) -> Vec<LongRow> {
    let m = v.len();
    (0..m)
        .flat_map(|c| (0..m).map(move |r| (r, c)))
        .map(|(r, c)| LongRow {
            variable_1: v.vars[r].clone(),
            variable_2: v.vars[c].clone(),
            value: v.matrix[r][c],
            measure: if r == c { Measure::Vimp } else { Measure::Vint },
            row: r + 1,
            col: c + 1,
        })
        .collect()
}

/// Inverse of [`as_long_table`].
pub fn from_long_table(
    rows: &[LongRow],
    importance_type: &str,
    normalized: bool,
) -> Result<ViviMatrix> {
    let m = rows.iter().map(|r| r.row.max(r.col)).max().unwrap_or(0);
    if rows.len() != m * m {
        return Err(invalid(format!("{} rows cannot fill a {m}x{m} matrix", rows.len())));
    }
    let mut vars = vec![String::new(); m];
    let mut matrix = vec![vec![f64::NAN; m]; m];
    for r in rows {
        if r.row == 0 || r.col == 0 {
            return Err(invalid("row and column indices are 1-based"));
        }
        let (i, j) = (r.row - 1, r.col - 1);
        if (r.measure == Measure::Vimp) != (i == j) {
            return Err(invalid(format!("measure does not match position ({}, {})", r.row, r.col)));
        }
        vars[i].clone_from(&r.variable_1);
        vars[j].clone_from(&r.variable_2);
        matrix[i][j] = r.value;
    }
    ViviMatrix::new(vars, matrix, importance_type, normalized, Meta::default())
}

pub fn write_long_table<W: Write>(v: &ViviMatrix, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in as_long_table(v) {
        out.serialize(row)?;
    }
    out.flush().map_err(|e| VividError::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::FnModel;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn uniform_rows(n: usize, p: usize, seed: u64) -> Dataset {
        use rand::Rng;
        let mut rng = crate::seed::rng(seed, "fixture", &[]);
        let mut cols: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
        cols.push("y".into());
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..=p).map(|_| rng.gen::<f64>()).collect())
            .collect();
        let refs: Vec<&str> = cols.iter().map(String::as_str).collect();
        Dataset::from_rows(&refs, &rows, "y").unwrap()
    }

    #[test]
    fn additive_oracle_has_zero_interaction() {
        let d = uniform_rows(50, 2, 3);
        let f = FnModel::new(&["x1", "x2"], |r| r[0] + r[1]);
        let w = ClassWrapper::regression(&f);
        for normalized in [false, true] {
            let opts = ViviOptions {
                normalized,
                ..ViviOptions::default()
            };
            let v = compute(&w, &d, &opts, &Workers::sequential()).unwrap();
            assert!(v.matrix[0][1] <= 1e-9, "{}", v.matrix[0][1]);
            assert_eq!(v.vars, names(&["x1", "x2"]));
        }
    }

    #[test]
    fn unused_variable_is_exactly_zero() {
        let d = uniform_rows(40, 3, 5);
        let f = FnModel::new(&["x1", "x2", "x3"], |r| (r[0] * 3.0).sin() * r[2] + r[2] * r[2]);
        let w = ClassWrapper::regression(&f);
        let opts = ViviOptions {
            grid_size: 7,
            ..ViviOptions::default()
        };
        let v = compute(&w, &d, &opts, &Workers::sequential()).unwrap();
        assert_eq!(v.matrix[1][1], 0.0);
        assert_eq!(v.matrix[0][1], 0.0);
        assert_eq!(v.matrix[1][2], 0.0);
        assert!(v.matrix[0][2] > 0.0);
    }

    #[test]
    fn h_is_symmetric_in_its_arguments() {
        let d = uniform_rows(30, 3, 8);
        let f = FnModel::new(&["x1", "x2", "x3"], |r| r[0] * r[1] + r[2].exp() * r[0]);
        let cfg = PdConfig {
            grid_size: 6,
            sample: SampleSpec::new(500, 1).unwrap(),
        };
        let w = Workers::sequential();
        for normalized in [false, true] {
            let ab = h_statistic(&f, &d, "x1", "x3", &cfg, normalized, &w).unwrap();
            let ba = h_statistic(&f, &d, "x3", "x1", &cfg, normalized, &w).unwrap();
            assert_eq!(ab.to_bits(), ba.to_bits());
        }
        assert!(h_statistic(&f, &d, "x1", "x1", &cfg, false, &w).is_err());
    }

    #[test]
    fn impurity_needs_trees() {
        let d = uniform_rows(10, 2, 1);
        let f = FnModel::new(&["x1", "x2"], |r| r[0]);
        let opts = ViviOptions {
            importance_type: ImportanceType::Impurity,
            ..ViviOptions::default()
        };
        assert!(compute(&ClassWrapper::regression(&f), &d, &opts, &Workers::sequential()).is_err());
        let bad = ViviOptions {
            grid_size: 0,
            ..ViviOptions::default()
        };
        assert!(compute(&ClassWrapper::regression(&f), &d, &bad, &Workers::sequential()).is_err());
    }

    #[test]
    fn import_examples() {
        let imp = vec![("a".to_string(), 1.0), ("b".to_string(), 2.0)];
        let v = import_external(&imp, &[("a".into(), "b".into(), 0.5)]).unwrap();
        assert_eq!(v.matrix, vec![vec![1.0, 0.5], vec![0.5, 2.0]]);
        assert_eq!(v.importance_type, "external");
        let v = import_external(&imp, &[]).unwrap();
        assert_eq!(v.matrix, vec![vec![1.0, 0.0], vec![0.0, 2.0]]);
        assert!(import_external(
            &imp,
            &[("a".into(), "b".into(), 0.5), ("b".into(), "a".into(), 0.7)]
        )
        .is_err());
        assert!(import_external(&imp, &[("a".into(), "z".into(), 0.5)]).is_err());
        assert!(import_external(
            &imp,
            &[("a".into(), "b".into(), 0.5), ("b".into(), "a".into(), 0.5)]
        )
        .is_ok());
    }

    #[test]
    fn long_table_layout_and_round_trip() {
        let v = ViviMatrix::new(
            names(&["lstat", "nox"]),
            vec![vec![4.8, 0.06], vec![0.06, 1.2]],
            "agnostic",
            false,
            Meta::default(),
        )
        .unwrap();
        let rows = as_long_table(&v);
        assert_eq!(rows.len(), 4);
        assert_eq!(
            rows[0],
            LongRow {
                variable_1: "lstat".into(),
                variable_2: "lstat".into(),
                value: 4.8,
                measure: Measure::Vimp,
                row: 1,
                col: 1
            }
        );
        assert_eq!((rows[1].variable_1.as_str(), rows[1].row, rows[1].col), ("nox", 2, 1));
        assert_eq!(from_long_table(&rows, "agnostic", false).unwrap(), v);

        let mut csv = Vec::new();
        write_long_table(&v, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "Variable_1,Variable_2,Value,Measure,Row,Col"
        );
        assert_eq!(text.lines().nth(1).unwrap(), "lstat,lstat,4.8,Vimp,1,1");

        let one = ViviMatrix::new(names(&["a"]), vec![vec![3.0]], "agnostic", false, Meta::default())
            .unwrap();
        let rows = as_long_table(&one);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].measure, Measure::Vimp);
    }

    #[test]
    fn matrix_validation_and_json() {
        let bad = ViviMatrix::new(
            names(&["a", "b"]),
            vec![vec![1.0, 0.5], vec![0.4, 1.0]],
            "agnostic",
            false,
            Meta::default(),
        );
        assert!(bad.is_err());
        let v = ViviMatrix::new(
            names(&["a", "b"]),
            vec![vec![1.0, 0.5], vec![0.5, 1.0]],
            "agnostic",
            false,
            Meta {
                grid_size: Some(50),
                ..Meta::default()
            },
        )
        .unwrap();
        let text = v.to_json_string().unwrap();
        assert!(text.contains("\"gridSize\": 50"));
        assert_eq!(ViviMatrix::from_reader(text.as_bytes()).unwrap(), v);
    }
}

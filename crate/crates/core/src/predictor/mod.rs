//! Prediction contract shared by the built-in models, external model
//! processes, and the classification wrapper.

mod external;
mod knn;
mod linear;
mod trees;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use external::{ExternalConfig, ExternalModel};
pub use knn::KnnModel;
pub use linear::LinearModel;
pub use trees::{BaggedTrees, TreeParams};

use crate::dataset::{ColumnKind, ColumnSchema, Dataset, Features};
use crate::error::{invalid, Result, VividError};
use crate::parallel::Workers;

/// Anything that maps a batch of feature rows to one number per row.
///
/// Implementations must be pure: the same batch always yields the same
/// predictions, bit for bit.
pub trait Model: Send + Sync {
    /// Predictor columns the model expects, in order.
    fn feature_names(&self) -> &[String];

    fn predict(&self, batch: &Features) -> Result<Vec<f64>>;

    /// Mean prediction over the rows of `batch` at every cell of the grid
    /// cross `grids[0] x grids[1] x ...`, with column `vars[k]` set to the
    /// cell's value from `grids[k]`. Cells are in row-major order (first
    /// variable outermost).
    ///
    /// The default substitutes and calls [`Model::predict`], one cell at a
    /// time; models with structure to exploit may override it as long as
    /// each cell's mean matches up to floating-point summation order and is
    /// computed the same way whatever the worker count.
    fn grid_means(
        &self,
        batch: &Features,
        vars: &[usize],
        grids: &[&[f64]],
        workers: &Workers,
    ) -> Result<Vec<f64>> {
        substituted_grid_means(self, batch, vars, grids, workers)
    }

    /// Per-variable embedded importance, when the model has one.
    fn embedded_importance(&self) -> Option<Vec<f64>> {
        None
    }
}

/// Per-variable grid index of a row-major cell number.
pub(crate) fn cell_indices(dims: &[usize], mut cell: usize, out: &mut [usize]) {
    for (k, &d) in dims.iter().enumerate().rev() {
        out[k] = cell % d;
        cell /= d;
    }
}

/// Reference grid evaluation: overwrite the columns and predict, summing
/// each cell's predictions in row order. Parallel over cells.
pub fn substituted_grid_means<M: Model + ?Sized>(
    model: &M,
    batch: &Features,
    vars: &[usize],
    grids: &[&[f64]],
    workers: &Workers,
) -> Result<Vec<f64>> {
    if vars.len() != grids.len() {
        return Err(invalid("one grid per substituted variable"));
    }
    let dims: Vec<usize> = grids.iter().map(|g| g.len()).collect();
    let cells: usize = dims.iter().product();
    let n = batch.n_rows() as f64;
    workers
        .map_with_scratch(
            cells,
            || (batch.clone(), vec![0; dims.len()]),
            |(work, idx), cell| {
                cell_indices(&dims, cell, idx);
                for (k, &j) in vars.iter().enumerate() {
                    work.column_mut(j).fill(grids[k][idx[k]]);
                }
                let preds = model.predict(work)?;
                Ok(preds.iter().sum::<f64>() / n)
            },
        )
        .into_iter()
        .collect()
}

/// Checks a prediction vector against the batch it came from.
pub(crate) fn check_predictions(preds: &[f64], rows: usize) -> Result<()> {
    if preds.len() != rows {
        return Err(VividError::Prediction(format!(
            "{} predictions for {rows} rows",
            preds.len()
        )));
    }
    if let Some(i) = preds.iter().position(|p| !p.is_finite()) {
        return Err(VividError::Prediction(format!(
            "non-finite prediction {} at row {i}",
            preds[i]
        )));
    }
    Ok(())
}

type RowFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A model defined by a closure over one row of feature values.
#[derive(Clone)]
pub struct FnModel {
    names: Vec<String>,
    f: Arc<RowFn>,
}

impl FnModel {
    pub fn new<F>(names: &[&str], f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            names: names.iter().map(|s| s.to_string()).collect(),
            f: Arc::new(f),
        }
    }
}

impl std::fmt::Debug for FnModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FnModel").field("names", &self.names).finish()
    }
}

impl Model for FnModel {
    fn feature_names(&self) -> &[String] {
        &self.names
    }

    fn predict(&self, batch: &Features) -> Result<Vec<f64>> {
        batch.check_names(&self.names)?;
        let mut row = vec![0.0; batch.n_cols()];
        let preds: Vec<f64> = (0..batch.n_rows())
            .map(|i| {
                for (j, r) in row.iter_mut().enumerate() {
                    *r = batch.value(i, j);
                }
                (self.f)(&row)
            })
            .collect();
        check_predictions(&preds, batch.n_rows())?;
        Ok(preds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinKind {
    Linear,
    Knn,
    BaggedTrees,
}

impl std::str::FromStr for BuiltinKind {
    type Err = VividError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Self::Linear),
            "knn" => Ok(Self::Knn),
            "bagged-trees" | "bagged_trees" => Ok(Self::BaggedTrees),
            other => Err(invalid(format!("unknown builtin model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub k: usize,
    pub trees: TreeParams,
    /// Class modelled as the positive outcome for a binary response;
    /// defaults to the first level.
    pub positive_class: Option<String>,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            k: 5,
            trees: TreeParams::default(),
            positive_class: None,
        }
    }
}

/// A fitted model of one of the supported kinds.
#[derive(Debug)]
pub enum Predictor {
    Linear(LinearModel),
    Knn(KnnModel),
    BaggedTrees(BaggedTrees),
    External(ExternalModel),
}

impl Predictor {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Predictor::Linear(_) => "builtin_linear",
            Predictor::Knn(_) => "builtin_knn",
            Predictor::BaggedTrees(_) => "builtin_bagged_trees",
            Predictor::External(_) => "external_subprocess",
        }
    }

    fn inner(&self) -> &dyn Model {
        match self {
            Predictor::Linear(m) => m,
            Predictor::Knn(m) => m,
            Predictor::BaggedTrees(m) => m,
            Predictor::External(m) => m,
        }
    }
}

impl Model for Predictor {
    fn feature_names(&self) -> &[String] {
        self.inner().feature_names()
    }

    fn predict(&self, batch: &Features) -> Result<Vec<f64>> {
        self.inner().predict(batch)
    }

    fn grid_means(
        &self,
        batch: &Features,
        vars: &[usize],
        grids: &[&[f64]],
        workers: &Workers,
    ) -> Result<Vec<f64>> {
        self.inner().grid_means(batch, vars, grids, workers)
    }

    fn embedded_importance(&self) -> Option<Vec<f64>> {
        self.inner().embedded_importance()
    }
}

/// Numeric training target: the response itself, or the 0/1 indicator of
/// the positive class for a two-level categorical response.
pub fn training_target(d: &Dataset, positive_class: Option<&str>) -> Result<Vec<f64>> {
    let schema = d.response_schema();
    match schema.kind {
        ColumnKind::Numeric => Ok(d.response_values().to_vec()),
        ColumnKind::Categorical => {
            if schema.levels.len() != 2 {
                return Err(VividError::UnsupportedResponse(format!(
                    "response `{}` has {} levels; only binary classification is supported",
                    schema.name,
                    schema.levels.len()
                )));
            }
            let code = positive_code(schema, positive_class)?;
            Ok(d
                .response_values()
                .iter()
                .map(|&v| if v == code { 1.0 } else { 0.0 })
                .collect())
        }
    }
}

fn positive_code(schema: &ColumnSchema, positive_class: Option<&str>) -> Result<f64> {
    match positive_class {
        None => Ok(0.0),
        Some(p) => schema
            .levels
            .iter()
            .position(|l| l == p)
            .map(|i| i as f64)
            .ok_or_else(|| {
                invalid(format!(
                    "positive class `{p}` is not a level of `{}` ({:?})",
                    schema.name, schema.levels
                ))
            }),
    }
}

pub fn fit_builtin(kind: BuiltinKind, d: &Dataset, hp: &Hyperparams) -> Result<Predictor> {
    let features = d.features();
    if features.n_cols() == 0 {
        return Err(VividError::EmptyData("dataset has no predictor columns".into()));
    }
    let y = training_target(d, hp.positive_class.as_deref())?;
    Ok(match kind {
        BuiltinKind::Linear => Predictor::Linear(LinearModel::fit(&features, &y)?),
        BuiltinKind::Knn => Predictor::Knn(KnnModel::fit(&features, &y, hp.k)?),
        BuiltinKind::BaggedTrees => {
            Predictor::BaggedTrees(BaggedTrees::fit(&features, &y, &hp.trees)?)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum Task {
    Regression,
    BinaryClassification { positive_class: String, eps: f64 },
}

pub const DEFAULT_EPS: f64 = 1e-6;

fn logit(p: f64, eps: f64) -> f64 {
    let p = p.clamp(eps, 1.0 - eps);
    (p / (1.0 - p)).ln()
}

/// Puts a model's output on the scale used for importance and interaction:
/// unchanged for regression, clamped log-odds of the positive class for
/// binary classification.
pub struct ClassWrapper<'m> {
    inner: &'m dyn Model,
    task: Task,
}

impl<'m> ClassWrapper<'m> {
    pub fn regression(inner: &'m dyn Model) -> Self {
        Self {
            inner,
            task: Task::Regression,
        }
    }

    /// `response` is the schema of the (binary) response column.
    pub fn classification(
        inner: &'m dyn Model,
        response: &ColumnSchema,
        positive_class: &str,
        eps: f64,
    ) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(invalid(format!("eps must lie in (0, 0.5), got {eps}")));
        }
        positive_code(response, Some(positive_class))?;
        Ok(Self {
            inner,
            task: Task::BinaryClassification {
                positive_class: positive_class.to_string(),
                eps,
            },
        })
    }

    /// Chooses the task from the response kind: numeric responses are
    /// regression, categorical ones binary classification on
    /// `positive_class` (first level when absent).
    pub fn for_dataset(
        inner: &'m dyn Model,
        d: &Dataset,
        positive_class: Option<&str>,
        eps: f64,
    ) -> Result<Self> {
        let schema = d.response_schema();
        match schema.kind {
            ColumnKind::Numeric => Ok(Self::regression(inner)),
            ColumnKind::Categorical => {
                training_target(d, positive_class)?;
                let pos = positive_class.unwrap_or(&schema.levels[0]).to_string();
                Self::classification(inner, schema, &pos, eps)
            }
        }
    }

    pub fn task(&self) -> &Task {
        &self.task
    }

    pub fn inner(&self) -> &dyn Model {
        self.inner
    }

    /// Observed response on the prediction scale.
    pub fn target(&self, d: &Dataset) -> Result<Vec<f64>> {
        match &self.task {
            Task::Regression => {
                if d.response_schema().kind != ColumnKind::Numeric {
                    return Err(VividError::UnsupportedResponse(
                        "regression needs a numeric response".into(),
                    ));
                }
                Ok(d.response_values().to_vec())
            }
            Task::BinaryClassification {
                positive_class,
                eps,
            } => Ok(training_target(d, Some(positive_class))?
                .into_iter()
                .map(|y| logit(y, *eps))
                .collect()),
        }
    }
}

impl Model for ClassWrapper<'_> {
    fn feature_names(&self) -> &[String] {
        self.inner.feature_names()
    }

    fn predict(&self, batch: &Features) -> Result<Vec<f64>> {
        let preds = self.inner.predict(batch)?;
        match &self.task {
            Task::Regression => Ok(preds),
            Task::BinaryClassification { eps, .. } => {
                Ok(preds.into_iter().map(|p| logit(p, *eps)).collect())
            }
        }
    }

    fn grid_means(
        &self,
        batch: &Features,
        vars: &[usize],
        grids: &[&[f64]],
        workers: &Workers,
    ) -> Result<Vec<f64>> {
        match self.task {
            Task::Regression => self.inner.grid_means(batch, vars, grids, workers),
            // The logit does not commute with the mean.
            Task::BinaryClassification { .. } => {
                substituted_grid_means(self, batch, vars, grids, workers)
            }
        }
    }

    fn embedded_importance(&self) -> Option<Vec<f64>> {
        self.inner.embedded_importance()
    }
}

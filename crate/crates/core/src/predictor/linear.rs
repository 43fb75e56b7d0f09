use nalgebra::{DMatrix, DVector};

use super::{check_predictions, Model};
use crate::dataset::{ColumnKind, ColumnSchema, Features};
use crate::error::{Result, VividError};

/// Ordinary least squares with an intercept. Categorical columns enter as
/// treatment dummies (first level is the baseline).
#[derive(Debug, Clone)]
pub struct LinearModel {
    names: Vec<String>,
    schema: Vec<ColumnSchema>,
    intercept: f64,
    /// One coefficient per design column, in design order.
    coefs: Vec<f64>,
}

fn design_width(schema: &[ColumnSchema]) -> usize {
    schema
        .iter()
        .map(|s| match s.kind {
            ColumnKind::Numeric => 1,
            ColumnKind::Categorical => s.levels.len() - 1,
        })
        .sum()
}

fn design_row(batch: &Features, i: usize, out: &mut Vec<f64>) {
    out.clear();
    for (j, s) in batch.schema().iter().enumerate() {
        let v = batch.value(i, j);
        match s.kind {
            ColumnKind::Numeric => out.push(v),
            ColumnKind::Categorical => {
                for level in 1..s.levels.len() {
                    out.push(if v as usize == level { 1.0 } else { 0.0 });
                }
            }
        }
    }
}

impl LinearModel {
    pub fn fit(x: &Features, y: &[f64]) -> Result<Self> {
        let n = x.n_rows();
        if n == 0 || n != y.len() {
            return Err(VividError::EmptyData("linear fit needs rows".into()));
        }
        let p = design_width(x.schema());
        let mut rows = Vec::with_capacity(n * p);
        let mut buf = Vec::with_capacity(p);
        for i in 0..n {
            design_row(x, i, &mut buf);
            rows.extend_from_slice(&buf);
        }
        let mut a = DMatrix::from_row_slice(n, p, &rows);
        let means: Vec<f64> = (0..p).map(|c| a.column(c).sum() / n as f64).collect();
        for (c, m) in means.iter().enumerate() {
            a.column_mut(c).add_scalar_mut(-m);
        }
        let y_mean = y.iter().sum::<f64>() / n as f64;
        let b = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));

        let coefs: Vec<f64> = if p == 0 {
            Vec::new()
        } else {
            // Minimum-norm solution: constant (zero after centering) columns get 0.
            let svd = a.svd(true, true);
            let tol = 1e-10 * svd.singular_values.max().max(1.0);
            svd.solve(&b, tol)
                .map_err(|e| VividError::Prediction(format!("least squares failed: {e}")))?
                .iter()
                .copied()
                .collect()
        };
        let intercept = y_mean - coefs.iter().zip(&means).map(|(c, m)| c * m).sum::<f64>();
        Ok(Self {
            names: x.names().map(str::to_string).collect(),
            schema: x.schema().to_vec(),
            intercept,
            coefs,
        })
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefs
    }
}

impl Model for LinearModel {
    fn feature_names(&self) -> &[String] {
        &self.names
    }

    fn predict(&self, batch: &Features) -> Result<Vec<f64>> {
        batch.check_names(&self.names)?;
        if batch.schema() != self.schema.as_slice() {
            return Err(VividError::ColumnMismatch(
                "batch column kinds or levels differ from training".into(),
            ));
        }
        let mut buf = Vec::with_capacity(self.coefs.len());
        let preds: Vec<f64> = (0..batch.n_rows())
            .map(|i| {
                design_row(batch, i, &mut buf);
                self.intercept + buf.iter().zip(&self.coefs).map(|(x, c)| x * c).sum::<f64>()
            })
            .collect();
        check_predictions(&preds, batch.n_rows())?;
        Ok(preds)
    }
}

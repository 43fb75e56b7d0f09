use std::cmp::Ordering;

use super::{cell_indices, check_predictions, Model};
use crate::dataset::{ColumnKind, ColumnSchema, Features};
use crate::error::{invalid, Result, VividError};
use crate::parallel::Workers;

/// k-nearest-neighbour regression. Numeric columns are standardized with
/// the training mean and standard deviation; categorical columns contribute
/// 0 when levels match and 1 otherwise. Distance ties go to the earlier
/// training row.
#[derive(Debug, Clone)]
pub struct KnnModel {
    names: Vec<String>,
    schema: Vec<ColumnSchema>,
    k: usize,
    center: Vec<f64>,
    scale: Vec<f64>,
    /// Training rows after standardization, row-major.
    train: Vec<Vec<f64>>,
    y: Vec<f64>,
}

impl KnnModel {
    pub fn fit(x: &Features, y: &[f64], k: usize) -> Result<Self> {
        if k == 0 {
            return Err(invalid("knn needs k >= 1"));
        }
        let n = x.n_rows();
        if n == 0 || n != y.len() {
            return Err(VividError::EmptyData("knn fit needs rows".into()));
        }
        let mut center = vec![0.0; x.n_cols()];
        let mut scale = vec![1.0; x.n_cols()];
        for (j, s) in x.schema().iter().enumerate() {
            if s.kind == ColumnKind::Numeric {
                let col = x.column(j);
                let mean = col.iter().sum::<f64>() / n as f64;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                center[j] = mean;
                scale[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
            }
        }
        let mut model = Self {
            names: x.names().map(str::to_string).collect(),
            schema: x.schema().to_vec(),
            k: k.min(n),
            center,
            scale,
            train: Vec::with_capacity(n),
            y: y.to_vec(),
        };
        model.train = (0..n).map(|i| model.standardize(x, i)).collect();
        Ok(model)
    }

    fn scaled(&self, j: usize, x: f64) -> f64 {
        match self.schema[j].kind {
            ColumnKind::Numeric => (x - self.center[j]) / self.scale[j],
            ColumnKind::Categorical => x,
        }
    }

    fn standardize(&self, x: &Features, i: usize) -> Vec<f64> {
        (0..x.n_cols()).map(|j| self.scaled(j, x.value(i, j))).collect()
    }

    fn term(&self, j: usize, u: f64, v: f64) -> f64 {
        match self.schema[j].kind {
            ColumnKind::Numeric => (u - v).powi(2),
            ColumnKind::Categorical => {
                if u == v {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        (0..a.len()).map(|j| self.term(j, a[j], b[j])).sum()
    }

    /// Mean response of the `k` nearest rows; `dist` holds (distance, row).
    fn vote(&self, dist: &mut [(f64, usize)]) -> f64 {
        let key = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        };
        dist.select_nth_unstable_by(self.k - 1, key);
        let near = &mut dist[..self.k];
        near.sort_unstable_by(key);
        near.iter().map(|&(_, r)| self.y[r]).sum::<f64>() / self.k as f64
    }
}

impl Model for KnnModel {
    fn feature_names(&self) -> &[String] {
        &self.names
    }

    fn predict(&self, batch: &Features) -> Result<Vec<f64>> {
        batch.check_names(&self.names)?;
        let mut dist: Vec<(f64, usize)> = Vec::with_capacity(self.train.len());
        let preds: Vec<f64> = (0..batch.n_rows())
            .map(|i| {
                let q = self.standardize(batch, i);
                dist.clear();
                dist.extend(
                    self.train
                        .iter()
                        .enumerate()
                        .map(|(r, t)| (self.distance(&q, t), r)),
                );
                self.vote(&mut dist)
            })
            .collect();
        check_predictions(&preds, batch.n_rows())?;
        Ok(preds)
    }

    /// Distances over the fixed columns are computed once per batch row and
    /// the substituted columns' terms added per cell, so results match the
    /// substitution path up to summation order.
    fn grid_means(
        &self,
        batch: &Features,
        vars: &[usize],
        grids: &[&[f64]],
        workers: &Workers,
    ) -> Result<Vec<f64>> {
        batch.check_names(&self.names)?;
        if vars.len() != grids.len() {
            return Err(invalid("one grid per substituted variable"));
        }
        let rows = batch.n_rows();
        let base: Vec<Vec<f64>> = (0..rows)
            .map(|i| {
                let q = self.standardize(batch, i);
                self.train
                    .iter()
                    .map(|t| {
                        (0..q.len())
                            .filter(|j| !vars.contains(j))
                            .map(|j| self.term(j, q[j], t[j]))
                            .sum()
                    })
                    .collect()
            })
            .collect();
        let terms: Vec<Vec<Vec<f64>>> = vars
            .iter()
            .zip(grids)
            .map(|(&j, g)| {
                g.iter()
                    .map(|&x| {
                        let u = self.scaled(j, x);
                        self.train.iter().map(|t| self.term(j, u, t[j])).collect()
                    })
                    .collect()
            })
            .collect();
        let dims: Vec<usize> = grids.iter().map(|g| g.len()).collect();
        let cells: usize = dims.iter().product();
        let means: Vec<f64> = workers.map_with_scratch(
            cells,
            || (vec![0; dims.len()], Vec::with_capacity(self.train.len())),
            |(idx, dist), cell| {
                cell_indices(&dims, cell, idx);
                let mut total = 0.0;
                for b in &base {
                    dist.clear();
                    dist.extend(b.iter().enumerate().map(|(t, &d)| {
                        let extra: f64 = (0..idx.len()).map(|k| terms[k][idx[k]][t]).sum();
                        (d + extra, t)
                    }));
                    total += self.vote(dist);
                }
                total / rows as f64
            },
        );
        check_predictions(&means, cells)?;
        Ok(means)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;

    fn data() -> Dataset {
        Dataset::from_rows(
            &["a", "b", "y"],
            &[
                vec![0.0, 1.0, 3.0],
                vec![1.0, 0.0, 5.0],
                vec![4.0, 2.0, -1.0],
                vec![2.0, 7.0, 10.0],
            ],
            "y",
        )
        .unwrap()
    }

    #[test]
    fn one_neighbour_returns_training_response() {
        let d = data();
        let m = KnnModel::fit(&d.features(), d.response_values(), 1).unwrap();
        assert_eq!(m.predict(&d.features()).unwrap(), d.response_values());
    }

    #[test]
    fn all_neighbours_give_the_mean() {
        let d = data();
        let m = KnnModel::fit(&d.features(), d.response_values(), 4).unwrap();
        let mean = d.response_values().iter().sum::<f64>() / 4.0;
        for p in m.predict(&d.features()).unwrap() {
            assert!((p - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_means_match_substitution() {
        let d = data();
        let x = d.features();
        let m = KnnModel::fit(&x, d.response_values(), 2).unwrap();
        let ga = [0.0, 1.5, 3.0];
        let gb = [-1.0, 2.0];
        let w = Workers::sequential();
        let fast = m.grid_means(&x, &[0, 1], &[&ga, &gb], &w).unwrap();
        let slow = super::super::substituted_grid_means(&m, &x, &[0, 1], &[&ga, &gb], &w).unwrap();
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f - s).abs() < 1e-12);
        }
        let one = m.grid_means(&x, &[1], &[&gb], &w).unwrap();
        let one_slow = super::super::substituted_grid_means(&m, &x, &[1], &[&gb], &w).unwrap();
        for (f, s) in one.iter().zip(&one_slow) {
            assert!((f - s).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_k_rejected() {
        let d = data();
        assert!(KnnModel::fit(&d.features(), d.response_values(), 0).is_err());
    }
}

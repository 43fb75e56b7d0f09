use rand::seq::SliceRandom;

use crate::dataset::Features;
use crate::error::{invalid, Result, VividError};
use crate::parallel::Workers;
use crate::pdp::mean;
use crate::predictor::Model;
use crate::seed;

pub fn rmse(y: &[f64], pred: &[f64]) -> f64 {
    let ss: f64 = y.iter().zip(pred).map(|(a, b)| (a - b) * (a - b)).sum();
    (ss / y.len() as f64).sqrt()
}

/// Permutation importance per predictor column: the mean over replicates of
/// the RMSE increase after shuffling that column.
#[derive(Debug, Clone, PartialEq)]
pub struct Importance {
    pub mean: Vec<f64>,
    /// `replicates[j][r]`.
    pub replicates: Vec<Vec<f64>>,
}

pub fn permutation_importance(
    model: &dyn Model,
    x: &Features,
    y: &[f64],
    num_perm: usize,
    seed: u64,
    workers: &Workers,
) -> Result<Importance> {
    if num_perm == 0 {
        return Err(invalid("numPerm must be at least 1"));
    }
    if x.n_rows() != y.len() || y.is_empty() {
        return Err(VividError::EmptyData(
            "importance needs one response per row".into(),
        ));
    }
    let base = rmse(y, &model.predict(x)?);
    let p = x.n_cols();
    let deltas = workers.try_map(p * num_perm, |job| {
        let (j, r) = (job / num_perm, job % num_perm);
        let mut order: Vec<usize> = (0..x.n_rows()).collect();
        order.shuffle(&mut seed::rng(seed, "perm", &[j as u64, r as u64]));
        permuted_rmse(model, x, y, j, &order).map(|e| e - base)
    })?;
    let replicates: Vec<Vec<f64>> = deltas.chunks(num_perm).map(<[f64]>::to_vec).collect();
    let mean = replicates
        .iter()
        .map(|r| r.iter().sum::<f64>() / num_perm as f64)
        .collect();
    Ok(Importance { mean, replicates })
}

/// RMSE after replacing column `j` by `column[order[i]]` in row `i`.
pub fn permuted_rmse(
    model: &dyn Model,
    x: &Features,
    y: &[f64],
    j: usize,
    order: &[usize],
) -> Result<f64> {
    if order.len() != x.n_rows() {
        return Err(invalid("permutation length differs from the row count"));
    }
    let mut shuffled = x.clone();
    let src = x.column(j);
    for (dst, &o) in shuffled.column_mut(j).iter_mut().zip(order) {
        *dst = src[o];
    }
    Ok(rmse(y, &model.predict(&shuffled)?))
}

/// Friedman's H from the joint surface `fab` (row-major, `fa.len()` rows)
/// and the two marginal surfaces on the same grids. Every function is
/// centered over grid cells.
pub fn h_from_surfaces(fab: &[f64], fa: &[f64], fb: &[f64], normalized: bool) -> f64 {
    let nb = fb.len();
    debug_assert_eq!(fab.len(), fa.len() * nb);
    let ca = mean(fa);
    let cb = mean(fb);
    let row_means: Vec<f64> = fab.chunks(nb).map(mean).collect();
    let cab = mean(&row_means);
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, row) in fab.chunks(nb).enumerate() {
        for (b, &v) in row.iter().enumerate() {
            let joint = v - cab;
            let r = joint - (fa[a] - ca) - (fb[b] - cb);
            num += r * r;
            den += joint * joint;
        }
    }
    if normalized {
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    } else {
        (num / fab.len() as f64).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::predictor::FnModel;

    #[test]
    fn fixed_permutation_gives_sqrt_two() {
        let d = Dataset::from_rows(
            &["x", "y"],
            &[vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]],
            "y",
        )
        .unwrap();
        let f = FnModel::new(&["x"], |r| r[0]);
        let x = d.features();
        let y = d.response_values();
        assert_eq!(rmse(y, &f.predict(&x).unwrap()), 0.0);
        let e = permuted_rmse(&f, &x, y, 0, &[2, 0, 1]).unwrap();
        assert!((e - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ignored_column_has_zero_importance() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64, (i * 7 % 5) as f64, (i * i) as f64])
            .collect();
        let d = Dataset::from_rows(&["x1", "x2", "y"], &rows, "y").unwrap();
        let f = FnModel::new(&["x1", "x2"], |r| r[0] * 3.0);
        let imp = permutation_importance(
            &f,
            &d.features(),
            d.response_values(),
            4,
            9,
            &Workers::sequential(),
        )
        .unwrap();
        assert_eq!(imp.mean[1], 0.0);
        assert!(imp.mean[0] > 0.0);
        assert_eq!(imp.replicates[0].len(), 4);
        assert!(
            permutation_importance(&f, &d.features(), d.response_values(), 0, 9, &Workers::sequential())
                .is_err()
        );
    }

    #[test]
    fn additive_surfaces_have_no_interaction() {
        let fa = [0.0, 1.0, 2.0];
        let fb = [5.0, 7.0];
        let fab: Vec<f64> = fa.iter().flat_map(|a| fb.iter().map(move |b| a + b)).collect();
        assert_eq!(h_from_surfaces(&fab, &fa, &fb, false), 0.0);
        assert_eq!(h_from_surfaces(&fab, &fa, &fb, true), 0.0);
        assert_eq!(h_from_surfaces(&[1.0; 4], &[1.0; 2], &[1.0; 2], true), 0.0);
    }

    #[test]
    fn pure_interaction_is_fully_normalized() {
        // x*y on {-1,1}^2 with zero marginals.
        let fab = [1.0, -1.0, -1.0, 1.0];
        assert_eq!(h_from_surfaces(&fab, &[0.0, 0.0], &[0.0, 0.0], true), 1.0);
        assert_eq!(h_from_surfaces(&fab, &[0.0, 0.0], &[0.0, 0.0], false), 1.0);
    }
}

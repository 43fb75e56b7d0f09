//! Brute-force reference computations on plain rows, and a checker that
//! compares the library against them on a fixture.

use rand::seq::SliceRandom;
use vivid_core::dataset::{ColumnKind, SampleSpec};
use vivid_core::parallel::Workers;
use vivid_core::pdp::{pd_1d, pd_2d, IceSpec, PdConfig};
use vivid_core::predictor::ClassWrapper;
use vivid_core::vivi::{self, h_statistic, ImportanceType, ViviOptions};
use vivid_core::seed;

use super::fixtures::Fixture;

pub const REL: f64 = 1e-12;

/// Evenly spaced points from min to max, or the level codes.
pub fn grid(rows: &[Vec<f64>], j: usize, kind: ColumnKind, levels: usize, size: usize) -> Vec<f64> {
    if kind == ColumnKind::Categorical {
        return (0..levels).map(|k| k as f64).collect();
    }
    let lo = rows.iter().map(|r| r[j]).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max);
    if lo == hi || size == 1 {
        return vec![lo];
    }
    (0..size)
        .map(|k| lo + (hi - lo) * k as f64 / (size - 1) as f64)
        .collect()
}

fn with(row: &[f64], sets: &[(usize, f64)]) -> Vec<f64> {
    let mut r = row.to_vec();
    for &(j, v) in sets {
        r[j] = v;
    }
    r
}

fn avg(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn ice(rows: &[Vec<f64>], f: &dyn Fn(&[f64]) -> f64, j: usize, g: &[f64]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| g.iter().map(|&v| f(&with(r, &[(j, v)]))).collect())
        .collect()
}

pub fn pd1(rows: &[Vec<f64>], f: &dyn Fn(&[f64]) -> f64, j: usize, g: &[f64]) -> Vec<f64> {
    g.iter()
        .map(|&v| avg(&rows.iter().map(|r| f(&with(r, &[(j, v)]))).collect::<Vec<_>>()))
        .collect()
}

/// Row-major over (ga, gb).
pub fn pd2(
    rows: &[Vec<f64>],
    f: &dyn Fn(&[f64]) -> f64,
    (a, ga): (usize, &[f64]),
    (b, gb): (usize, &[f64]),
) -> Vec<f64> {
    let mut out = Vec::new();
    for &u in ga {
        for &v in gb {
            let preds: Vec<f64> = rows.iter().map(|r| f(&with(r, &[(a, u), (b, v)]))).collect();
            out.push(avg(&preds));
        }
    }
    out
}

/// Friedman's H with every surface centered by its plain mean over cells.
pub fn h(
    rows: &[Vec<f64>],
    f: &dyn Fn(&[f64]) -> f64,
    (a, ga): (usize, &[f64]),
    (b, gb): (usize, &[f64]),
    normalized: bool,
) -> f64 {
    let center = |xs: Vec<f64>| {
        let m = avg(&xs);
        xs.into_iter().map(|x| x - m).collect::<Vec<_>>()
    };
    let fa = center(pd1(rows, f, a, ga));
    let fb = center(pd1(rows, f, b, gb));
    let fab = center(pd2(rows, f, (a, ga), (b, gb)));
    let mut num = 0.0;
    let mut den = 0.0;
    for p in 0..ga.len() {
        for q in 0..gb.len() {
            let joint = fab[p * gb.len() + q];
            num += (joint - fa[p] - fb[q]).powi(2);
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

pub fn rmse(y: &[f64], p: &[f64]) -> f64 {
    (y.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / y.len() as f64).sqrt()
}

/// Mean RMSE increase per column over the given permutations,
/// `perms[j][r]`, where row `i` takes column `j` from row `perm[i]`.
pub fn importance(
    rows: &[Vec<f64>],
    y: &[f64],
    f: &dyn Fn(&[f64]) -> f64,
    perms: &[Vec<Vec<usize>>],
) -> Vec<f64> {
    let base = rmse(y, &rows.iter().map(|r| f(r)).collect::<Vec<_>>());
    perms
        .iter()
        .enumerate()
        .map(|(j, reps)| {
            let deltas: Vec<f64> = reps
                .iter()
                .map(|perm| {
                    let preds: Vec<f64> = rows
                        .iter()
                        .enumerate()
                        .map(|(i, r)| f(&with(r, &[(j, rows[perm[i]][j])])))
                        .collect();
                    rmse(y, &preds) - base
                })
                .collect();
            avg(&deltas)
        })
        .collect()
}

/// The permutations the library draws for `seed`.
pub fn library_perms(n: usize, p: usize, num_perm: usize, seed_value: u64) -> Vec<Vec<Vec<usize>>> {
    (0..p)
        .map(|j| {
            (0..num_perm)
                .map(|r| {
                    let mut order: Vec<usize> = (0..n).collect();
                    order.shuffle(&mut seed::rng(seed_value, "perm", &[j as u64, r as u64]));
                    order
                })
                .collect()
        })
        .collect()
}

pub fn close(got: f64, want: f64, scale: f64) -> bool {
    (got - want).abs() <= REL * got.abs().max(want.abs()).max(scale)
}

fn compare(what: &str, got: &[f64], want: &[f64]) -> Result<(), String> {
    compare_at(what, got, want, 0.0)
}

fn magnitude(xs: &[f64]) -> f64 {
    xs.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Relative comparison; values are measured against `floor` at least.
fn compare_at(what: &str, got: &[f64], want: &[f64], floor: f64) -> Result<(), String> {
    if got.len() != want.len() {
        return Err(format!("{what}: {} values, expected {}", got.len(), want.len()));
    }
    let scale = magnitude(want).max(floor);
    for (k, (g, w)) in got.iter().zip(want).enumerate() {
        if !close(*g, *w, scale) {
            return Err(format!("{what}[{k}]: got {g:e}, expected {w:e}"));
        }
    }
    Ok(())
}

/// Compares pd_1d (with ICE), pd_2d, H, permutation importance and the full
/// matrix against the brute-force versions.
pub fn check(fx: &Fixture) -> Result<(), String> {
    let rows = fx.rows();
    let f = |r: &[f64]| fx.predict_row(r);
    let d = &fx.data;
    let vars = fx.vars();
    let w = Workers::sequential();
    let cfg = PdConfig {
        grid_size: fx.grid_size,
        sample: SampleSpec::new(500, 3).unwrap(),
    };
    let err = |e: vivid_core::VividError| format!("{}: {e}", fx.name);
    let grids: Vec<Vec<f64>> = vars
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let s = d.predictor_schema(v).unwrap();
            grid(&rows, j, s.kind, s.levels.len(), fx.grid_size)
        })
        .collect();

    let all_rows: Vec<usize> = (0..rows.len()).collect();
    for (j, v) in vars.iter().enumerate() {
        let s = pd_1d(fx.model.as_ref(), d, v, &cfg, &IceSpec::Rows(all_rows.clone()), &w).map_err(err)?;
        compare(&format!("{} grid {v}", fx.name), &s.grids[0].points, &grids[j])?;
        compare(&format!("{} pd {v}", fx.name), &s.values, &pd1(&rows, &f, j, &grids[j]))?;
        let want = ice(&rows, &f, j, &grids[j]);
        let got = s.ice.as_ref().ok_or("missing ice")?;
        for (r, curve) in got.curves.iter().enumerate() {
            compare(&format!("{} ice {v} row {r}", fx.name), curve, &want[r])?;
        }
    }

    for a in 0..vars.len() {
        for b in 0..vars.len() {
            if a == b {
                continue;
            }
            let s = pd_2d(fx.model.as_ref(), d, &vars[a], &vars[b], &cfg, false, &w).map_err(err)?;
            let want = pd2(&rows, &f, (a, &grids[a]), (b, &grids[b]));
            compare(&format!("{} pd {}x{}", fx.name, vars[a], vars[b]), &s.values, &want)?;
            for normalized in [false, true] {
                let got = h_statistic(fx.model.as_ref(), d, &vars[a], &vars[b], &cfg, normalized, &w)
                    .map_err(err)?;
                let want = h(&rows, &f, (a, &grids[a]), (b, &grids[b]), normalized);
                // H is a difference of surfaces, so its natural unit is the
                // surface size (or 1 once normalized).
                let floor = if normalized { 1.0 } else { magnitude(&s.values) };
                compare_at(
                    &format!("{} H {}x{} normalized={normalized}", fx.name, vars[a], vars[b]),
                    &[got],
                    &[want],
                    floor,
                )?;
            }
        }
    }

    let y = d.response_values();
    let (num_perm, seed_value) = (3, 41);
    let imp = vivi::permutation_importance(
        fx.model.as_ref(),
        &d.features(),
        y,
        num_perm,
        seed_value,
        &w,
    )
    .map_err(err)?;
    let perms = library_perms(rows.len(), vars.len(), num_perm, seed_value);
    let want_imp = importance(&rows, y, &f, &perms);
    compare(&format!("{} importance", fx.name), &imp.mean, &want_imp)?;
    for (j, reps) in imp.replicates.iter().enumerate() {
        if reps.len() != num_perm {
            return Err(format!("{}: {} replicates for column {j}", fx.name, reps.len()));
        }
    }

    let opts = ViviOptions {
        grid_size: fx.grid_size,
        nmax: 500,
        num_perm,
        normalized: false,
        importance_type: ImportanceType::Agnostic,
        seed: seed_value,
        reorder: false,
    };
    let wrapper = ClassWrapper::regression(fx.model.as_ref());
    let v = vivi::compute(&wrapper, d, &opts, &w).map_err(err)?;
    for i in 0..vars.len() {
        for j in 0..vars.len() {
            let (want, floor) = if i == j {
                (want_imp[i], magnitude(&want_imp))
            } else {
                let surface = pd2(&rows, &f, (i, &grids[i]), (j, &grids[j]));
                (h(&rows, &f, (i, &grids[i]), (j, &grids[j]), false), magnitude(&surface))
            };
            compare_at(&format!("{} matrix[{i}][{j}]", fx.name), &[v.matrix[i][j]], &[want], floor)?;
        }
    }
    Ok(())
}

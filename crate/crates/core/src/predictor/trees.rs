//! Bagged CART regression trees.
//!
//! Splits maximise variance reduction. Candidates are scanned in column
//! order, then threshold (or level) order, and a candidate replaces the
//! incumbent only on a strictly larger gain, so fits are reproducible.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_predictions, Model};
use crate::dataset::{ColumnKind, Features};
use crate::error::{invalid, Result, VividError};
use crate::parallel::Workers;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            n_trees: 50,
            max_depth: 8,
            min_leaf: 5,
            seed: 1701,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Rule {
    /// Numeric: `x <= t` goes left.
    Le(f64),
    /// Categorical: level code equal goes left.
    Eq(f64),
}

impl Rule {
    #[inline]
    fn goes_left(self, x: f64) -> bool {
        match self {
            Rule::Le(t) => x <= t,
            Rule::Eq(c) => x == c,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        rule: Rule,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    #[inline]
    fn predict_row(&self, batch: &Features, i: usize) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    rule,
                    left,
                    right,
                } => {
                    at = if rule.goes_left(batch.value(i, feature)) {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}

struct Builder<'a> {
    x: &'a Features,
    y: &'a [f64],
    params: &'a TreeParams,
    nodes: Vec<Node>,
    gains: Vec<f64>,
}

struct Best {
    gain: f64,
    feature: usize,
    rule: Rule,
}

/// Variance reduction of splitting a node into two groups.
#[inline]
fn split_gain(n_left: usize, sum_left: f64, n: usize, sum: f64) -> f64 {
    let n_right = n - n_left;
    let mean_l = sum_left / n_left as f64;
    let mean_r = (sum - sum_left) / n_right as f64;
    (n_left as f64 * n_right as f64 / n as f64) * (mean_l - mean_r).powi(2)
}

impl Builder<'_> {
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let n = rows.len();
        let sum: f64 = rows.iter().map(|&r| self.y[r]).sum();
        let mean = sum / n as f64;
        let first = self.y[rows[0]];
        let pure = rows.iter().all(|&r| self.y[r] == first);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(mean));
        if pure || depth >= self.params.max_depth || n < 2 * self.params.min_leaf {
            return id;
        }
        let Some(best) = self.best_split(&rows, sum) else {
            return id;
        };
        self.gains[best.feature] += best.gain;
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| best.rule.goes_left(self.x.value(i, best.feature)));
        let left = self.build(l, depth + 1);
        let right = self.build(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            rule: best.rule,
            left,
            right,
        };
        id
    }

    fn best_split(&self, rows: &[usize], sum: f64) -> Option<Best> {
        let n = rows.len();
        let min_leaf = self.params.min_leaf.max(1);
        let mut best: Option<Best> = None;
        let mut consider = |gain: f64, feature: usize, rule: Rule| {
            if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(Best {
                    gain,
                    feature,
                    rule,
                });
            }
        };
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n);
        for (j, schema) in self.x.schema().iter().enumerate() {
            pairs.clear();
            pairs.extend(rows.iter().map(|&r| (self.x.value(r, j), self.y[r])));
            match schema.kind {
                ColumnKind::Numeric => {
                    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let mut left_sum = 0.0;
                    for k in 1..n {
                        left_sum += pairs[k - 1].1;
                        if k < min_leaf || n - k < min_leaf || pairs[k - 1].0 == pairs[k].0 {
                            continue;
                        }
                        let (lo, hi) = (pairs[k - 1].0, pairs[k].0);
                        let mut t = lo + (hi - lo) / 2.0;
                        if t >= hi {
                            t = lo;
                        }
                        consider(split_gain(k, left_sum, n, sum), j, Rule::Le(t));
                    }
                }
                ColumnKind::Categorical => {
                    for code in 0..schema.levels.len() {
                        let c = code as f64;
                        let (nl, sl) = pairs
                            .iter()
                            .filter(|p| p.0 == c)
                            .fold((0usize, 0.0), |(k, s), p| (k + 1, s + p.1));
                        if nl < min_leaf || n - nl < min_leaf {
                            continue;
                        }
                        consider(split_gain(nl, sl, n, sum), j, Rule::Eq(c));
                    }
                }
            }
        }
        best
    }
}

/// Bootstrap-aggregated regression trees with an embedded impurity
/// importance (total variance reduction per variable, averaged over trees).
#[derive(Debug, Clone)]
pub struct BaggedTrees {
    names: Vec<String>,
    trees: Vec<Tree>,
    importance: Vec<f64>,
}

impl BaggedTrees {
    pub fn fit(x: &Features, y: &[f64], params: &TreeParams) -> Result<Self> {
        if params.n_trees == 0 || params.max_depth == 0 {
            return Err(invalid("bagged trees need n_trees >= 1 and max_depth >= 1"));
        }
        let n = x.n_rows();
        if n == 0 || n != y.len() {
            return Err(VividError::EmptyData("tree fit needs rows".into()));
        }
        let mut builder = Builder {
            x,
            y,
            params,
            nodes: Vec::new(),
            gains: vec![0.0; x.n_cols()],
        };
        let mut trees = Vec::with_capacity(params.n_trees);
        for t in 0..params.n_trees {
            let mut rng = seed::rng(params.seed, "bootstrap", &[t as u64]);
            let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            builder.nodes = Vec::new();
            builder.build(rows, 0);
            trees.push(Tree {
                nodes: std::mem::take(&mut builder.nodes),
            });
        }
        let importance = builder
            .gains
            .iter()
            .map(|g| g / params.n_trees as f64)
            .collect();
        Ok(Self {
            names: x.names().map(str::to_string).collect(),
            trees,
            importance,
        })
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Adds `w * leaf value` to every grid cell routed to each leaf, where
    /// `w` counts the batch rows whose non-grid conditions reach that leaf.
    #[allow(clippy::too_many_arguments)]
    fn accumulate(
        &self,
        tree: &Tree,
        node: usize,
        batch: &Features,
        rows: &[usize],
        var_pos: &[Option<usize>],
        grids: &[&[f64]],
        allowed: &mut Vec<Vec<usize>>,
        dims: &[usize],
        total: &mut [f64],
    ) {
        match tree.nodes[node] {
            Node::Leaf(v) => {
                let term = rows.len() as f64 * v;
                add_to_cells(allowed, dims, term, total);
            }
            Node::Split {
                feature,
                rule,
                left,
                right,
            } => match var_pos[feature] {
                Some(k) => {
                    let (go_l, go_r): (Vec<usize>, Vec<usize>) = allowed[k]
                        .iter()
                        .partition(|&&g| rule.goes_left(grids[k][g]));
                    let saved = std::mem::replace(&mut allowed[k], go_l);
                    if !allowed[k].is_empty() {
                        self.accumulate(
                            tree, left, batch, rows, var_pos, grids, allowed, dims, total,
                        );
                    }
                    allowed[k] = go_r;
                    if !allowed[k].is_empty() {
                        self.accumulate(
                            tree, right, batch, rows, var_pos, grids, allowed, dims, total,
                        );
                    }
                    allowed[k] = saved;
                }
                None => {
                    let (l, r): (Vec<usize>, Vec<usize>) = rows
                        .iter()
                        .partition(|&&i| rule.goes_left(batch.value(i, feature)));
                    if !l.is_empty() {
                        self.accumulate(
                            tree, left, batch, &l, var_pos, grids, allowed, dims, total,
                        );
                    }
                    if !r.is_empty() {
                        self.accumulate(
                            tree, right, batch, &r, var_pos, grids, allowed, dims, total,
                        );
                    }
                }
            },
        }
    }
}

fn add_to_cells(allowed: &[Vec<usize>], dims: &[usize], term: f64, total: &mut [f64]) {
    match allowed.len() {
        1 => {
            for &a in &allowed[0] {
                total[a] += term;
            }
        }
        2 => {
            for &a in &allowed[0] {
                let base = a * dims[1];
                for &b in &allowed[1] {
                    total[base + b] += term;
                }
            }
        }
        _ => {
            // General cross product, row-major.
            let mut idx = vec![0usize; allowed.len()];
            loop {
                let cell = idx
                    .iter()
                    .zip(allowed)
                    .zip(dims)
                    .fold(0, |acc, ((&i, list), &d)| acc * d + list[i]);
                total[cell] += term;
                let mut k = allowed.len();
                loop {
                    if k == 0 {
                        return;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < allowed[k].len() {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        }
    }
}

impl Model for BaggedTrees {
    fn feature_names(&self) -> &[String] {
        &self.names
    }

    fn predict(&self, batch: &Features) -> Result<Vec<f64>> {
        batch.check_names(&self.names)?;
        let t = self.trees.len() as f64;
        let preds: Vec<f64> = (0..batch.n_rows())
            .map(|i| self.trees.iter().map(|tr| tr.predict_row(batch, i)).sum::<f64>() / t)
            .collect();
        check_predictions(&preds, batch.n_rows())?;
        Ok(preds)
    }

    /// Exact data-weighted partial dependence: a row's prediction at a cell
    /// only depends on which leaf it lands in, so each leaf contributes its
    /// value times the number of rows reaching it to the block of cells
    /// routed there.
    fn grid_means(
        &self,
        batch: &Features,
        vars: &[usize],
        grids: &[&[f64]],
        _workers: &Workers,
    ) -> Result<Vec<f64>> {
        batch.check_names(&self.names)?;
        if vars.len() != grids.len() || vars.is_empty() {
            return Err(invalid("one grid per substituted variable"));
        }
        let mut var_pos = vec![None; batch.n_cols()];
        for (k, &j) in vars.iter().enumerate() {
            if var_pos[j].replace(k).is_some() {
                return Err(invalid("grid variables must be distinct"));
            }
        }
        let dims: Vec<usize> = grids.iter().map(|g| g.len()).collect();
        let cells: usize = dims.iter().product();
        let mut total = vec![0.0; cells];
        let rows: Vec<usize> = (0..batch.n_rows()).collect();
        let mut allowed: Vec<Vec<usize>> = dims.iter().map(|&d| (0..d).collect()).collect();
        for tree in &self.trees {
            self.accumulate(
                tree,
                0,
                batch,
                &rows,
                &var_pos,
                grids,
                &mut allowed,
                &dims,
                &mut total,
            );
        }
        let denom = batch.n_rows() as f64 * self.trees.len() as f64;
        Ok(total.into_iter().map(|s| s / denom).collect())
    }

    fn embedded_importance(&self) -> Option<Vec<f64>> {
        Some(self.importance.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{ColumnSchema, Dataset};
    use crate::predictor::substituted_grid_means;

    fn step_data() -> Dataset {
        // y = 1{x1 > 0.5}; x2 carries no signal that x1 does not dominate.
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let x1 = i as f64 / 39.0;
                let x2 = ((i * 7) % 40) as f64;
                vec![x1, x2, if x1 > 0.5 { 1.0 } else { 0.0 }]
            })
            .collect();
        Dataset::from_rows(&["x1", "x2", "y"], &rows, "y").unwrap()
    }

    #[test]
    fn unused_variable_has_zero_impurity_importance() {
        let d = step_data();
        let m = BaggedTrees::fit(&d.features(), d.response_values(), &TreeParams::default())
            .unwrap();
        let imp = m.embedded_importance().unwrap();
        assert!(imp[0] > 0.0);
        assert_eq!(imp[1], 0.0);
    }

    #[test]
    fn fit_is_deterministic_and_seed_sensitive() {
        let d = step_data();
        let f = d.features();
        let p = TreeParams {
            n_trees: 5,
            ..TreeParams::default()
        };
        let a = BaggedTrees::fit(&f, d.response_values(), &p).unwrap();
        let b = BaggedTrees::fit(&f, d.response_values(), &p).unwrap();
        assert_eq!(a.predict(&f).unwrap(), b.predict(&f).unwrap());
    }

    #[test]
    fn invalid_params() {
        let d = step_data();
        let p = TreeParams {
            n_trees: 0,
            ..TreeParams::default()
        };
        assert!(BaggedTrees::fit(&d.features(), d.response_values(), &p).is_err());
    }

    #[test]
    fn categorical_splits() {
        let schema = vec![
            ColumnSchema::categorical("c", vec!["a".into(), "b".into(), "z".into()]),
            ColumnSchema::numeric("y"),
        ];
        let codes: Vec<f64> = (0..30).map(|i| (i % 3) as f64).collect();
        let y: Vec<f64> = codes.iter().map(|&c| if c == 2.0 { 5.0 } else { 1.0 }).collect();
        let d = Dataset::new(schema, vec![codes, y.clone()], "y").unwrap();
        let p = TreeParams {
            n_trees: 1,
            min_leaf: 1,
            ..TreeParams::default()
        };
        let m = BaggedTrees::fit(&d.features(), &y, &p).unwrap();
        assert_eq!(m.predict(&d.features()).unwrap(), y);
    }

    #[test]
    fn leaf_weighted_grid_means_match_substitution() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|i| {
                let a = (i % 10) as f64;
                let b = ((i * 3) % 7) as f64;
                let c = (i % 4) as f64;
                vec![a, b, c, a * b - 2.0 * c + if a > 4.0 { b } else { 0.0 }]
            })
            .collect();
        let d = Dataset::from_rows(&["a", "b", "c", "y"], &rows, "y").unwrap();
        let f = d.features();
        let p = TreeParams {
            n_trees: 7,
            min_leaf: 2,
            ..TreeParams::default()
        };
        let m = BaggedTrees::fit(&f, d.response_values(), &p).unwrap();
        let ga = [0.0, 2.5, 4.5, 9.0];
        let gb = [0.0, 3.0, 6.0];
        let w = Workers::sequential();
        for vars in [vec![0usize], vec![0, 1], vec![1, 2], vec![0, 1, 2]] {
            let grids: Vec<&[f64]> = vars
                .iter()
                .map(|&v| if v == 1 { &gb[..] } else { &ga[..] })
                .collect();
            let fast = m.grid_means(&f, &vars, &grids, &w).unwrap();
            let slow = substituted_grid_means(&m, &f, &vars, &grids, &w).unwrap();
            assert_eq!(fast.len(), slow.len());
            for (x, y) in fast.iter().zip(&slow) {
                assert!((x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0), "{x} vs {y}");
            }
        }
    }
}

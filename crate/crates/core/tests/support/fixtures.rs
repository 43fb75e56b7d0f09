use vivid_core::dataset::{ColumnSchema, Dataset, Features};
use vivid_core::predictor::{fit_builtin, BuiltinKind, FnModel, Hyperparams, Model};

/// A small dataset, a model on it and the grid size to use.
pub struct Fixture {
    pub name: &'static str,
    pub data: Dataset,
    pub model: Box<dyn Model>,
    pub grid_size: usize,
}

impl Fixture {
    pub fn rows(&self) -> Vec<Vec<f64>> {
        let x = self.data.features();
        (0..x.n_rows()).map(|i| x.row(i)).collect()
    }

    /// The model evaluated one row at a time.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let schema = self.data.features().schema().to_vec();
        let x = Features::new(schema, row.iter().map(|v| vec![*v]).collect()).unwrap();
        self.model.predict(&x).unwrap()[0]
    }

    pub fn vars(&self) -> Vec<String> {
        self.data.predictor_names()
    }
}

fn numeric(names: &[&str], rows: &[Vec<f64>]) -> Dataset {
    Dataset::from_rows(names, rows, names[names.len() - 1]).unwrap()
}

fn wobble(i: usize, j: usize) -> f64 {
    ((i * 37 + j * 11 + 5) % 17) as f64 / 4.0 - 2.0
}

pub fn product9() -> Fixture {
    let mut rows = Vec::new();
    for a in [-1.0, 0.0, 1.0] {
        for b in [-1.0, 0.0, 1.0] {
            rows.push(vec![a, b, a * b]);
        }
    }
    Fixture {
        name: "product9",
        data: numeric(&["x1", "x2", "y"], &rows),
        model: Box::new(FnModel::new(&["x1", "x2"], |r| r[0] * r[1])),
        grid_size: 3,
    }
}

fn additive() -> Fixture {
    let rows: Vec<Vec<f64>> = (0..10)
        .map(|i| {
            let (a, b, c) = (wobble(i, 0), wobble(i, 1), wobble(i, 2));
            vec![a, b, c, a + 2.0 * b - c + wobble(i, 3) / 10.0]
        })
        .collect();
    Fixture {
        name: "additive",
        data: numeric(&["x1", "x2", "x3", "y"], &rows),
        model: Box::new(FnModel::new(&["x1", "x2", "x3"], |r| r[0] + 2.0 * r[1] - r[2])),
        grid_size: 5,
    }
}

fn mixed() -> Fixture {
    let levels = vec!["lo".to_string(), "mid".to_string(), "hi".to_string()];
    let schema = vec![
        ColumnSchema::numeric("x1"),
        ColumnSchema::categorical("g", levels),
        ColumnSchema::numeric("x3"),
        ColumnSchema::numeric("y"),
    ];
    let n = 8;
    let x1: Vec<f64> = (0..n).map(|i| wobble(i, 4)).collect();
    let g: Vec<f64> = (0..n).map(|i| (i % 3) as f64).collect();
    let x3: Vec<f64> = (0..n).map(|i| wobble(i, 5)).collect();
    let y: Vec<f64> = (0..n).map(|i| x1[i] * g[i] + x3[i].sin()).collect();
    Fixture {
        name: "mixed",
        data: Dataset::new(schema, vec![x1, g, x3, y], "y").unwrap(),
        model: Box::new(FnModel::new(&["x1", "g", "x3"], |r| {
            r[0] * (r[1] - 1.0) + r[2].sin() * r[0]
        })),
        grid_size: 4,
    }
}

fn fitted(name: &'static str, kind: BuiltinKind, grid_size: usize) -> Fixture {
    let rows: Vec<Vec<f64>> = (0..10)
        .map(|i| {
            let (a, b, c) = (wobble(i, 6), wobble(i, 7), wobble(i, 8));
            vec![a, b, c, a * b + c]
        })
        .collect();
    let data = numeric(&["x1", "x2", "x3", "y"], &rows);
    let mut hp = Hyperparams {
        k: 3,
        ..Hyperparams::default()
    };
    hp.trees.n_trees = 4;
    hp.trees.max_depth = 3;
    hp.trees.min_leaf = 1;
    hp.trees.seed = 11;
    let model = fit_builtin(kind, &data, &hp).unwrap();
    Fixture {
        name,
        data,
        model: Box::new(model),
        grid_size,
    }
}

fn unused() -> Fixture {
    let rows: Vec<Vec<f64>> = (0..6)
        .map(|i| {
            let (a, b, c) = (wobble(i, 9), wobble(i, 10), wobble(i, 11));
            vec![a, b, c, a - b]
        })
        .collect();
    Fixture {
        name: "unused",
        data: numeric(&["x1", "x2", "x3", "y"], &rows),
        model: Box::new(FnModel::new(&["x1", "x2", "x3"], |r| r[0] * r[1] - r[1])),
        grid_size: 2,
    }
}

/// Every oracle fixture: at most 3 predictors, 10 rows and grid size 5.
pub fn all() -> Vec<Fixture> {
    vec![
        product9(),
        additive(),
        mixed(),
        fitted("trees", BuiltinKind::BaggedTrees, 5),
        fitted("knn", BuiltinKind::Knn, 4),
        fitted("linear", BuiltinKind::Linear, 5),
        unused(),
    ]
}

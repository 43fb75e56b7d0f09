//! Typed tabular data with a designated response column.
//!
//! Storage is column-major. Categorical cells hold their level index as an
//! `f64` so that every model and every grid substitution works on one value
//! type; the schema carries the level names.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, VividError};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    /// Ordered distinct levels; empty for numeric columns.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<String>,
}

impl ColumnSchema {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Numeric,
            levels: Vec::new(),
        }
    }

    pub fn categorical(name: impl Into<String>, levels: Vec<String>) -> Self {
        Self {
            name: name.into(),
            kind: ColumnKind::Categorical,
            levels,
        }
    }

    pub fn is_numeric(&self) -> bool {
        self.kind == ColumnKind::Numeric
    }

    fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(invalid("column names must be nonempty"));
        }
        match self.kind {
            ColumnKind::Numeric if !self.levels.is_empty() => Err(invalid(format!(
                "numeric column `{}` cannot have levels",
                self.name
            ))),
            ColumnKind::Categorical if self.levels.is_empty() => Err(invalid(format!(
                "categorical column `{}` needs at least one level",
                self.name
            ))),
            _ => Ok(()),
        }
    }

    /// Checks that a stored cell conforms to this column's kind.
    fn accepts(&self, v: f64) -> bool {
        match self.kind {
            ColumnKind::Numeric => v.is_finite(),
            ColumnKind::Categorical => {
                v >= 0.0 && v.fract() == 0.0 && (v as usize) < self.levels.len()
            }
        }
    }

    /// Renders a stored cell as text (level name for categoricals).
    pub fn format_value(&self, v: f64) -> String {
        match self.kind {
            ColumnKind::Numeric => format!("{v}"),
            ColumnKind::Categorical => self.levels[v as usize].clone(),
        }
    }
}

/// Column-major feature block: the predictor columns of a dataset, or any
/// batch handed to a model.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    schema: Vec<ColumnSchema>,
    columns: Vec<Vec<f64>>,
}

impl Features {
    pub fn new(schema: Vec<ColumnSchema>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if schema.len() != columns.len() {
            return Err(VividError::ColumnMismatch(format!(
                "{} schemas for {} columns",
                schema.len(),
                columns.len()
            )));
        }
        let n = columns.first().map_or(0, Vec::len);
        for (s, c) in schema.iter().zip(&columns) {
            s.validate()?;
            if c.len() != n {
                return Err(VividError::ColumnMismatch(format!(
                    "column `{}` has {} rows, expected {n}",
                    s.name,
                    c.len()
                )));
            }
            if let Some(i) = c.iter().position(|&v| !s.accepts(v)) {
                return Err(VividError::ColumnMismatch(format!(
                    "column `{}` row {i} does not conform to its kind",
                    s.name
                )));
            }
        }
        Ok(Self { schema, columns })
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.schema.iter().map(|s| s.name.as_str())
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.columns[j]
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|s| s.name == name)
    }

    pub fn select_rows(&self, rows: &[usize]) -> Features {
        Features {
            schema: self.schema.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&i| c[i]).collect())
                .collect(),
        }
    }

    /// Fails unless `names` matches this block's column names in order.
    pub fn check_names(&self, names: &[String]) -> Result<()> {
        if self.schema.len() != names.len()
            || self.schema.iter().zip(names).any(|(s, n)| &s.name != n)
        {
            let got: Vec<&str> = self.names().collect();
            return Err(VividError::ColumnMismatch(format!(
                "expected columns {names:?}, got {got:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<ColumnSchema>,
    columns: Vec<Vec<f64>>,
    response: usize,
    /// Row index in the originally loaded data, kept through subsampling.
    row_ids: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub nmax: usize,
    pub seed: u64,
}

impl SampleSpec {
    pub fn new(nmax: usize, seed: u64) -> Result<Self> {
        if nmax == 0 {
            return Err(invalid("nmax must be at least 1"));
        }
        Ok(Self { nmax, seed })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnRange {
    Numeric { min: f64, max: f64 },
    Levels(Vec<String>),
}

impl Dataset {
    pub fn new(schema: Vec<ColumnSchema>, columns: Vec<Vec<f64>>, response: &str) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for s in &schema {
            if !seen.insert(s.name.as_str()) {
                return Err(invalid(format!("duplicate column name `{}`", s.name)));
            }
        }
        let response = schema
            .iter()
            .position(|s| s.name == response)
            .ok_or_else(|| VividError::UnknownColumn(response.to_string()))?;
        // Reuse the per-column checks.
        let block = Features::new(schema, columns)?;
        let n = block.n_rows();
        if n == 0 {
            return Err(VividError::EmptyData("dataset has no rows".into()));
        }
        Ok(Self {
            schema: block.schema,
            columns: block.columns,
            response,
            row_ids: (0..n).collect(),
        })
    }

    /// All-numeric dataset from row-major values, for small fixtures.
    pub fn from_rows(names: &[&str], rows: &[Vec<f64>], response: &str) -> Result<Self> {
        let schema = names.iter().map(|n| ColumnSchema::numeric(*n)).collect();
        let mut columns = vec![Vec::with_capacity(rows.len()); names.len()];
        for (i, r) in rows.iter().enumerate() {
            if r.len() != names.len() {
                return Err(VividError::RaggedRow {
                    row: i + 1,
                    expected: names.len(),
                    found: r.len(),
                });
            }
            for (c, &v) in columns.iter_mut().zip(r) {
                c.push(v);
            }
        }
        Self::new(schema, columns, response)
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.row_ids
    }

    pub fn response_name(&self) -> &str {
        &self.schema[self.response].name
    }

    pub fn response_schema(&self) -> &ColumnSchema {
        &self.schema[self.response]
    }

    pub fn response_values(&self) -> &[f64] {
        &self.columns[self.response]
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        let j = self
            .schema
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| VividError::UnknownColumn(name.to_string()))?;
        Ok(&self.columns[j])
    }

    /// Predictor names in dataset column order.
    pub fn predictor_names(&self) -> Vec<String> {
        self.schema
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != self.response)
            .map(|(_, s)| s.name.clone())
            .collect()
    }

    /// Position of `var` among the predictors.
    pub fn predictor_index(&self, var: &str) -> Result<usize> {
        if var == self.response_name() {
            return Err(VividError::ResponseNotPredictor(var.to_string()));
        }
        let j = self
            .schema
            .iter()
            .position(|s| s.name == var)
            .ok_or_else(|| VividError::UnknownColumn(var.to_string()))?;
        Ok(if j > self.response { j - 1 } else { j })
    }

    pub fn predictor_schema(&self, var: &str) -> Result<&ColumnSchema> {
        self.predictor_index(var)?;
        Ok(self.schema.iter().find(|s| s.name == var).expect("checked"))
    }

    /// The predictor columns as a model batch.
    pub fn features(&self) -> Features {
        let (schema, columns) = self
            .schema
            .iter()
            .zip(&self.columns)
            .enumerate()
            .filter(|&(j, _)| j != self.response)
            .map(|(_, (s, c))| (s.clone(), c.clone()))
            .unzip();
        Features { schema, columns }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&i| c[i]).collect())
                .collect(),
            response: self.response,
            row_ids: rows.iter().map(|&i| self.row_ids[i]).collect(),
        }
    }

    pub fn column_range(&self, var: &str) -> Result<ColumnRange> {
        let s = self.predictor_schema(var)?;
        let values = self.column(var)?;
        Ok(match s.kind {
            ColumnKind::Numeric => {
                let (min, max) = values
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    });
                ColumnRange::Numeric { min, max }
            }
            ColumnKind::Categorical => ColumnRange::Levels(s.levels.clone()),
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.schema.iter().map(|s| s.name.as_str()))?;
        for i in 0..self.n_rows() {
            out.write_record(
                self.schema
                    .iter()
                    .zip(&self.columns)
                    .map(|(s, c)| s.format_value(c[i])),
            )?;
        }
        out.flush().map_err(|e| VividError::Csv(e.into()))?;
        Ok(())
    }
}

/// Uniform sample of at most `nmax` rows, returned in original row order.
pub fn sample_rows(d: &Dataset, spec: SampleSpec) -> Dataset {
    let n = d.n_rows();
    if n <= spec.nmax {
        return d.clone();
    }
    let mut rng = seed::rng(spec.seed, "nmax", &[]);
    let mut rows = rand::seq::index::sample(&mut rng, n, spec.nmax).into_vec();
    rows.sort_unstable();
    d.select_rows(&rows)
}

pub fn load_csv(
    path: impl AsRef<Path>,
    response: &str,
    overrides: &HashMap<String, ColumnKind>,
) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| VividError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, response, overrides)
}

pub fn read_csv<R: Read>(
    reader: R,
    response: &str,
    overrides: &HashMap<String, ColumnKind>,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if !header.iter().any(|h| h == response) {
        return Err(VividError::UnknownColumn(response.to_string()));
    }
    for name in overrides.keys() {
        if !header.contains(name) {
            return Err(VividError::UnknownColumn(name.clone()));
        }
    }

    let p = header.len();
    let mut cells: Vec<Vec<String>> = vec![Vec::new(); p];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != p {
            return Err(VividError::RaggedRow {
                row: i + 1,
                expected: p,
                found: rec.len(),
            });
        }
        for (j, field) in rec.iter().enumerate() {
            let field = field.trim();
            if field.is_empty() {
                return Err(VividError::MissingValue {
                    column: header[j].clone(),
                    row: i + 1,
                });
            }
            cells[j].push(field.to_string());
        }
    }
    if cells[0].is_empty() {
        return Err(VividError::EmptyData("csv has a header but no rows".into()));
    }

    let mut schema = Vec::with_capacity(p);
    let mut columns = Vec::with_capacity(p);
    for (name, raw) in header.iter().zip(cells) {
        let parsed: Vec<Option<f64>> = raw
            .iter()
            .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        let inferred = if parsed.iter().all(Option::is_some) {
            ColumnKind::Numeric
        } else {
            ColumnKind::Categorical
        };
        match overrides.get(name).copied().unwrap_or(inferred) {
            ColumnKind::Numeric => {
                if let Some(i) = parsed.iter().position(Option::is_none) {
                    return Err(VividError::NotNumeric {
                        column: name.clone(),
                        row: i + 1,
                        value: raw[i].clone(),
                    });
                }
                schema.push(ColumnSchema::numeric(name.clone()));
                columns.push(parsed.into_iter().map(|v| v.expect("checked")).collect());
            }
            ColumnKind::Categorical => {
                let mut levels: Vec<String> = raw.clone();
                levels.sort();
                levels.dedup();
                let codes = raw
                    .iter()
                    .map(|s| levels.binary_search(s).expect("level present") as f64)
                    .collect();
                schema.push(ColumnSchema::categorical(name.clone(), levels));
                columns.push(codes);
            }
        }
    }
    Dataset::new(schema, columns, response)
}

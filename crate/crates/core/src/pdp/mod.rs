//! Partial dependence: grids, 1-D and 2-D surfaces, ICE curves and the
//! convex-hull extrapolation mask.
//!
//! Grids and hulls come from the full dataset handed in; the averaging rows
//! are the `nmax` subsample of it.

pub mod hull;

use rand::seq::index::sample;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use serde_json::Value;

use crate::dataset::{sample_rows, ColumnKind, ColumnRange, Dataset, Features, SampleSpec};
use crate::error::{invalid, Result};
use crate::parallel::Workers;
use crate::predictor::Model;
use crate::seed;

pub use hull::{convex_hull, point_in_hull};

/// Default number of ICE curves kept per 1-D surface.
pub const DEFAULT_N_ICE: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub var: String,
    pub kind: ColumnKind,
    /// Numeric grid values, or level codes for categorical variables.
    pub points: Vec<f64>,
    /// Level names, empty for numeric variables.
    pub levels: Vec<String>,
}

impl Grid1D {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn label(&self, k: usize) -> String {
        match self.kind {
            ColumnKind::Numeric => format!("{}", self.points[k]),
            ColumnKind::Categorical => self.levels[k].clone(),
        }
    }

    fn to_json(&self) -> Value {
        match self.kind {
            ColumnKind::Numeric => Value::from(self.points.clone()),
            ColumnKind::Categorical => Value::from(self.levels.clone()),
        }
    }
}

pub fn make_grid(d: &Dataset, var: &str, grid_size: usize) -> Result<Grid1D> {
    if grid_size < 1 {
        return Err(invalid("gridSize must be at least 1"));
    }
    Ok(match d.column_range(var)? {
        ColumnRange::Numeric { min, max } => {
            let points = if min == max || grid_size == 1 {
                vec![min]
            } else {
                let step = (max - min) / (grid_size - 1) as f64;
                let mut p: Vec<f64> = (0..grid_size).map(|k| min + k as f64 * step).collect();
                p[grid_size - 1] = max;
                p
            };
            Grid1D {
                var: var.to_string(),
                kind: ColumnKind::Numeric,
                points,
                levels: Vec::new(),
            }
        }
        ColumnRange::Levels(levels) => Grid1D {
            var: var.to_string(),
            kind: ColumnKind::Categorical,
            points: (0..levels.len()).map(|k| k as f64).collect(),
            levels,
        },
    })
}

/// Which observations get an ICE curve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IceSpec {
    /// A seeded uniform sample of this many retained rows (all when larger).
    Count(usize),
    /// Row positions in the dataset handed to [`pd_1d`].
    Rows(Vec<usize>),
}

impl Default for IceSpec {
    fn default() -> Self {
        IceSpec::Count(DEFAULT_N_ICE)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ice {
    /// Source row of each curve.
    pub rows: Vec<usize>,
    pub curves: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdConfig {
    pub grid_size: usize,
    pub sample: SampleSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdSurface {
    pub vars: Vec<String>,
    pub grids: Vec<Grid1D>,
    /// One value per grid cell, row-major with the first variable outermost.
    pub values: Vec<f64>,
    pub ice: Option<Ice>,
    /// True marks an extrapolated cell; 2-D only.
    pub mask: Option<Vec<bool>>,
    pub center: Option<f64>,
}

impl PdSurface {
    pub fn is_2d(&self) -> bool {
        self.vars.len() == 2
    }

    pub fn value_at(&self, a: usize, b: usize) -> f64 {
        self.values[a * self.grids[1].len() + b]
    }

    pub fn masked(&self, a: usize, b: usize) -> bool {
        self.mask
            .as_ref()
            .is_some_and(|m| m[a * self.grids[1].len() + b])
    }

    /// Smallest and largest surface value, ICE curves included when
    /// `with_ice`.
    pub fn range(&self, with_ice: bool) -> (f64, f64) {
        let ice = self
            .ice
            .iter()
            .filter(|_| with_ice)
            .flat_map(|ice| ice.curves.iter().flatten());
        self.values
            .iter()
            .chain(ice)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// The same surface with the two axes swapped.
    pub fn transposed(&self) -> PdSurface {
        assert!(self.is_2d(), "only 2-D surfaces can be transposed");
        let (na, nb) = (self.grids[0].len(), self.grids[1].len());
        let flip = |i: usize| (i % nb) * na + i / nb;
        let mut values = vec![0.0; self.values.len()];
        for (i, &v) in self.values.iter().enumerate() {
            values[flip(i)] = v;
        }
        let mask = self.mask.as_ref().map(|m| {
            let mut out = vec![false; m.len()];
            for (i, &v) in m.iter().enumerate() {
                out[flip(i)] = v;
            }
            out
        });
        PdSurface {
            vars: vec![self.vars[1].clone(), self.vars[0].clone()],
            grids: vec![self.grids[1].clone(), self.grids[0].clone()],
            values,
            ice: None,
            mask,
            center: self.center,
        }
    }

    /// Mean-centered copy.
    pub fn centered(&self) -> PdSurface {
        let c = mean(&self.values);
        let mut out = self.clone();
        for v in &mut out.values {
            *v -= c;
        }
        if let Some(ice) = &mut out.ice {
            for v in ice.curves.iter_mut().flatten() {
                *v -= c;
            }
        }
        out.center = Some(self.center.unwrap_or(0.0) + c);
        out
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("surface serializes")
    }
}

impl Serialize for PdSurface {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let values = if self.is_2d() {
            let nb = self.grids[1].len();
            Value::from(
                self.values
                    .chunks(nb)
                    .map(|r| Value::from(r.to_vec()))
                    .collect::<Vec<_>>(),
            )
        } else {
            Value::from(self.values.clone())
        };
        let mask = self.mask.as_ref().map(|m| {
            m.chunks(self.grids[1].len())
                .map(<[bool]>::to_vec)
                .collect::<Vec<_>>()
        });
        let fields = if self.center.is_some() { 6 } else { 5 };
        let mut st = s.serialize_struct("PdSurface", fields)?;
        st.serialize_field("vars", &self.vars)?;
        st.serialize_field(
            "grid",
            &self.grids.iter().map(Grid1D::to_json).collect::<Vec<_>>(),
        )?;
        st.serialize_field("values", &values)?;
        st.serialize_field("mask", &mask)?;
        st.serialize_field("ice", &self.ice)?;
        if let Some(c) = self.center {
            st.serialize_field("center", &c)?;
        }
        st.end()
    }
}

/// Mean that returns the common value exactly when all inputs are equal.
pub(crate) fn mean(xs: &[f64]) -> f64 {
    let Some(&x0) = xs.first() else {
        return 0.0;
    };
    x0 + xs.iter().map(|x| x - x0).sum::<f64>() / xs.len() as f64
}

pub fn pd_1d(
    model: &dyn Model,
    d: &Dataset,
    var: &str,
    cfg: &PdConfig,
    ice: &IceSpec,
    workers: &Workers,
) -> Result<PdSurface> {
    let j = d.predictor_index(var)?;
    let grid = make_grid(d, var, cfg.grid_size)?;
    let kept = sample_rows(d, cfg.sample);
    let batch = kept.features();
    let values = model.grid_means(&batch, &[j], &[&grid.points], workers)?;

    let positions: Vec<usize> = match ice {
        IceSpec::Count(0) => Vec::new(),
        IceSpec::Count(k) if *k >= kept.n_rows() => (0..kept.n_rows()).collect(),
        IceSpec::Count(k) => {
            let mut rng = seed::rng(cfg.sample.seed, "ice", &[]);
            let mut rows = sample(&mut rng, kept.n_rows(), *k).into_vec();
            rows.sort_unstable();
            rows
        }
        IceSpec::Rows(rows) => {
            if let Some(&bad) = rows.iter().find(|&&r| r >= d.n_rows()) {
                return Err(invalid(format!(
                    "ICE row {bad} out of range for {} rows",
                    d.n_rows()
                )));
            }
            rows.clone()
        }
    };
    let ice = if positions.is_empty() {
        None
    } else {
        let source = match ice {
            IceSpec::Rows(_) => d,
            IceSpec::Count(_) => &kept,
        };
        let sub = source.select_rows(&positions);
        let curves = ice_curves(model, &sub.features(), j, &grid.points, workers)?;
        Some(Ice {
            rows: sub.row_ids().to_vec(),
            curves,
        })
    };
    Ok(PdSurface {
        vars: vec![var.to_string()],
        grids: vec![grid],
        values,
        ice,
        mask: None,
        center: None,
    })
}

fn ice_curves(
    model: &dyn Model,
    batch: &Features,
    j: usize,
    points: &[f64],
    workers: &Workers,
) -> Result<Vec<Vec<f64>>> {
    let by_point = workers.map_with_scratch(
        points.len(),
        || batch.clone(),
        |b, g| {
            b.column_mut(j).fill(points[g]);
            model.predict(b)
        },
    );
    let by_point = by_point.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..batch.n_rows())
        .map(|i| by_point.iter().map(|p| p[i]).collect())
        .collect())
}

pub fn pd_2d(
    model: &dyn Model,
    d: &Dataset,
    var_a: &str,
    var_b: &str,
    cfg: &PdConfig,
    convex_hull: bool,
    workers: &Workers,
) -> Result<PdSurface> {
    if var_a == var_b {
        return Err(invalid(format!("pd_2d needs two distinct variables, got `{var_a}` twice")));
    }
    let (ja, jb) = (d.predictor_index(var_a)?, d.predictor_index(var_b)?);
    let ga = make_grid(d, var_a, cfg.grid_size)?;
    let gb = make_grid(d, var_b, cfg.grid_size)?;
    let batch = sample_rows(d, cfg.sample).features();
    let values = model.grid_means(&batch, &[ja, jb], &[&ga.points, &gb.points], workers)?;
    let mask = convex_hull.then(|| hull_mask(d, &ga, &gb)).transpose()?;
    Ok(PdSurface {
        vars: vec![var_a.to_string(), var_b.to_string()],
        grids: vec![ga, gb],
        values,
        ice: None,
        mask,
        center: None,
    })
}

fn hull_mask(d: &Dataset, ga: &Grid1D, gb: &Grid1D) -> Result<Vec<bool>> {
    let cells = ga.len() * gb.len();
    if ga.kind != ColumnKind::Numeric || gb.kind != ColumnKind::Numeric {
        return Ok(vec![false; cells]);
    }
    let (xa, xb) = (d.column(&ga.var)?, d.column(&gb.var)?);
    let pts: Vec<hull::Point> = xa.iter().copied().zip(xb.iter().copied()).collect();
    let h = convex_hull(&pts);
    Ok(ga
        .points
        .iter()
        .flat_map(|&a| gb.points.iter().map(move |&b| (a, b)))
        .map(|p| !point_in_hull(p, &h))
        .collect())
}

//! Panel preprocessing: entity fixed-effect removal followed by global
//! per-attribute z-scaling.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{Dataset, EntityId, Observation};
use crate::{Error, Result};

/// One parsed input row. `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRow {
    pub entity: String,
    pub timestamp: f64,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawTable {
    pub entity_column: String,
    pub time_column: String,
    pub attributes: Vec<String>,
    pub rows: Vec<RawRow>,
}

impl RawTable {
    pub fn dimension(&self) -> usize {
        self.attributes.len()
    }

    /// Converts rows to a dataset as-is, dropping rows with missing cells.
    pub fn to_dataset(&self) -> Result<Dataset> {
        let observations = self
            .rows
            .iter()
            .filter_map(|r| complete(r).map(|v| (r, v)))
            .map(|(r, v)| Ok(Observation::new(EntityId::new(r.entity.clone())?, r.timestamp, v)))
            .collect::<Result<Vec<_>>>()?;
        Dataset::new(observations)
    }
}

fn raw_magnitude(raw: &RawTable, k: usize) -> f64 {
    raw.rows
        .iter()
        .filter_map(|r| r.values[k])
        .fold(0.0, |acc: f64, v| acc.max(v.abs()))
}

fn complete(row: &RawRow) -> Option<Vec<f64>> {
    row.values.iter().copied().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PreprocessPolicy {
    /// Drop attributes whose centered values have zero variance; otherwise
    /// such attributes make preprocessing fail.
    pub drop_constant_attributes: bool,
}

impl Default for PreprocessPolicy {
    fn default() -> Self {
        Self {
            drop_constant_attributes: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreprocessReport {
    /// Per-entity attribute means that were subtracted (all input attributes).
    pub entity_means: BTreeMap<EntityId, Vec<f64>>,
    /// Names of the attributes kept in the dataset.
    pub retained_attributes: Vec<String>,
    /// Population standard deviation each retained attribute was divided by.
    pub scale_factors: Vec<f64>,
    pub dropped_attributes: Vec<String>,
    pub dropped_rows: usize,
    pub dimension: usize,
}

/// Centers every attribute on its per-entity mean, then divides it by the
/// global population standard deviation of the centered values.
pub fn preprocess(raw: &RawTable, policy: PreprocessPolicy) -> Result<(Dataset, PreprocessReport)> {
    let d = raw.dimension();
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    let mut kept: Vec<(EntityId, f64, Vec<f64>)> = Vec::with_capacity(raw.rows.len());
    for row in &raw.rows {
        if row.values.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: row.values.len(),
            });
        }
        if let Some(v) = complete(row) {
            kept.push((EntityId::new(row.entity.clone())?, row.timestamp, v));
        }
    }
    let dropped_rows = raw.rows.len() - kept.len();
    if kept.len() < 2 {
        return Err(Error::NotEnoughObservations {
            required: 2,
            found: kept.len(),
        });
    }

    let mut sums: BTreeMap<EntityId, (usize, Vec<f64>)> = BTreeMap::new();
    for (e, _, v) in &kept {
        let entry = sums.entry(e.clone()).or_insert_with(|| (0, vec![0.0; d]));
        entry.0 += 1;
        for (acc, x) in entry.1.iter_mut().zip(v) {
            *acc += x;
        }
    }
    let entity_means: BTreeMap<EntityId, Vec<f64>> = sums
        .into_iter()
        .map(|(e, (n, s))| (e, s.into_iter().map(|x| x / n as f64).collect()))
        .collect();

    for (e, _, v) in kept.iter_mut() {
        let mean = &entity_means[e];
        for (x, mu) in v.iter_mut().zip(mean) {
            *x -= mu;
        }
    }

    let n = kept.len() as f64;
    let mut retained = Vec::new();
    let mut scale_factors = Vec::new();
    let mut dropped_attributes = Vec::new();
    for k in 0..d {
        let mean = kept.iter().map(|(_, _, v)| v[k]).sum::<f64>() / n;
        let var = kept
            .iter()
            .map(|(_, _, v)| (v[k] - mean) * (v[k] - mean))
            .sum::<f64>()
            / n;
        let sd = libm::sqrt(var);
        // Attributes constant within every entity center to rounding noise,
        // so compare against the raw magnitude rather than exact zero.
        let raw_scale = raw_magnitude(raw, k);
        if sd > 1e-12 * raw_scale {
            retained.push(k);
            scale_factors.push(sd);
        } else if policy.drop_constant_attributes {
            dropped_attributes.push(raw.attributes[k].clone());
        } else {
            return Err(Error::Preprocess(alloc::format!(
                "attribute `{}` has zero variance after centering",
                raw.attributes[k]
            )));
        }
    }
    if retained.is_empty() {
        return Err(Error::Preprocess("all attributes are constant".into()));
    }

    let observations = kept
        .into_iter()
        .map(|(e, t, v)| {
            let desc = retained
                .iter()
                .zip(&scale_factors)
                .map(|(&k, sd)| v[k] / sd)
                .collect();
            Observation::new(e, t, desc)
        })
        .collect();
    let dataset = Dataset::new(observations)?;
    let report = PreprocessReport {
        entity_means,
        retained_attributes: retained.iter().map(|&k| raw.attributes[k].clone()).collect(),
        scale_factors,
        dropped_attributes,
        dropped_rows,
        dimension: retained.len(),
    };
    Ok((dataset, report))
}

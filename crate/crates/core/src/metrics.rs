//! Evaluation measures: description variance (MDvar), temporal variance
//! (Tvar), penalized Shannon entropy of entity segmentations (ShaP), and the
//! per-space dispersion ratio used to judge component imbalance.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::dissimilarity::squared_distance;
use crate::model::{Dataset, EntityId, Partition};
use crate::{Error, Result};

/// Per-entity contribution to ShaP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntitySegmentation {
    pub n_obs: usize,
    /// Assignment changes between timestamp-adjacent observations.
    pub n_ch: usize,
    /// Distinct clusters used minus one.
    pub n_min: usize,
    pub entropy: f64,
    pub penalty_factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub mdvar: f64,
    pub tvar: f64,
    pub shap: f64,
    pub entities: BTreeMap<EntityId, EntitySegmentation>,
}

/// Which half of an observation a dispersion statistic looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Description,
    Temporal,
}

/// Mean squared description distance to the assigned centroid, in raw units.
pub fn mdvar(dataset: &Dataset, partition: &Partition) -> Result<f64> {
    partition.validate(dataset)?;
    let total: f64 = dataset
        .observations()
        .iter()
        .zip(partition.assignment())
        .map(|(o, &j)| squared_distance(&o.description, &partition.centroid(j).description))
        .sum();
    Ok(total / dataset.len() as f64)
}

/// Mean squared time difference to the assigned centroid timestamp.
pub fn tvar(dataset: &Dataset, partition: &Partition) -> Result<f64> {
    partition.validate(dataset)?;
    let total: f64 = dataset
        .observations()
        .iter()
        .zip(partition.assignment())
        .map(|(o, &j)| {
            let dt = o.timestamp - partition.centroid(j).timestamp;
            dt * dt
        })
        .sum();
    Ok(total / dataset.len() as f64)
}

/// Segmentation statistics of one entity.
pub fn entity_segmentation(dataset: &Dataset, partition: &Partition, entity: usize) -> EntitySegmentation {
    let series = dataset.entity_series(entity);
    let labels: Vec<usize> = series.iter().map(|&i| partition.cluster_of(i)).collect();
    let n_obs = labels.len();

    let mut counts = vec![0usize; partition.cluster_count()];
    for &j in &labels {
        counts[j] += 1;
    }
    let entropy: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n_obs as f64;
            -p * libm::log2(p)
        })
        .sum();
    let n_ch = labels.windows(2).filter(|w| w[0] != w[1]).count();
    let n_min = counts.iter().filter(|&&c| c > 0).count().saturating_sub(1);
    let penalty_factor = if n_obs >= 2 {
        1.0 + (n_ch - n_min) as f64 / (n_obs - 1) as f64
    } else {
        1.0
    };
    EntitySegmentation {
        n_obs,
        n_ch,
        n_min,
        entropy,
        penalty_factor,
    }
}

/// Observation-weighted mean of each entity's cluster entropy times its
/// non-contiguity penalty factor `1 + (n_ch - n_min)/(n_obs - 1)`.
pub fn shap(dataset: &Dataset, partition: &Partition) -> Result<f64> {
    partition.validate(dataset)?;
    let total: f64 = (0..dataset.entity_count())
        .map(|e| {
            let s = entity_segmentation(dataset, partition, e);
            s.n_obs as f64 * s.entropy * s.penalty_factor
        })
        .sum();
    Ok(total / dataset.len() as f64)
}

pub fn report(dataset: &Dataset, partition: &Partition) -> Result<MetricReport> {
    let entities = (0..dataset.entity_count())
        .map(|e| {
            (
                dataset.entities()[e].clone(),
                entity_segmentation(dataset, partition, e),
            )
        })
        .collect();
    Ok(MetricReport {
        mdvar: mdvar(dataset, partition)?,
        tvar: tvar(dataset, partition)?,
        shap: shap(dataset, partition)?,
        entities,
    })
}

/// Dispersion ratio of one component: for each observation, the population
/// standard deviation of its squared distances to every other observation,
/// divided by the sum of those distances over `|X|`; averaged over the
/// observations whose denominator is non-zero.
pub fn dispersion_ratio(dataset: &Dataset, component: Component) -> Result<f64> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::NotEnoughObservations {
            required: 2,
            found: n,
        });
    }
    let obs = dataset.observations();
    let dist = |i: usize, j: usize| match component {
        Component::Description => squared_distance(&obs[i].description, &obs[j].description),
        Component::Temporal => {
            let dt = obs[i].timestamp - obs[j].timestamp;
            dt * dt
        }
    };
    let mut row = Vec::with_capacity(n - 1);
    let mut acc = 0.0;
    let mut defined = 0usize;
    for i in 0..n {
        row.clear();
        row.extend((0..n).filter(|&j| j != i).map(|j| dist(i, j)));
        let sum: f64 = row.iter().sum();
        if sum == 0.0 {
            continue;
        }
        let mean = sum / row.len() as f64;
        let var = row.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / row.len() as f64;
        acc += libm::sqrt(var) / (sum / n as f64);
        defined += 1;
    }
    if defined == 0 {
        return Err(Error::Undefined("dispersion ratio"));
    }
    Ok(acc / defined as f64)
}

//! Observations, datasets, centroids and partitions.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::dissimilarity::{squared_distance, Diameters, TemporalPoint};
use crate::{Error, Result};

/// Opaque, non-empty entity label such as a country name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityId(String);

impl EntityId {
    pub fn new(label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if label.is_empty() {
            return Err(Error::EmptyEntityId);
        }
        Ok(Self(label))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One `(entity, timestamp, description)` triple.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub entity: EntityId,
    pub timestamp: f64,
    pub description: Vec<f64>,
}

impl Observation {
    pub fn new(entity: EntityId, timestamp: f64, description: Vec<f64>) -> Self {
        Self {
            entity,
            timestamp,
            description,
        }
    }
}

impl TemporalPoint for Observation {
    fn timestamp(&self) -> f64 {
        self.timestamp
    }

    fn description(&self) -> &[f64] {
        &self.description
    }
}

/// Cluster representative: an abstract timestamp plus a description vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroid {
    pub timestamp: f64,
    pub description: Vec<f64>,
}

impl Centroid {
    pub fn new(timestamp: f64, description: Vec<f64>) -> Self {
        Self {
            timestamp,
            description,
        }
    }

    pub fn from_observation(obs: &Observation) -> Self {
        Self::new(obs.timestamp, obs.description.clone())
    }
}

impl TemporalPoint for Centroid {
    fn timestamp(&self) -> f64 {
        self.timestamp
    }

    fn description(&self) -> &[f64] {
        &self.description
    }
}

/// Immutable collection of observations with cached diameters and a
/// per-entity, timestamp-sorted index.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    observations: Vec<Observation>,
    dimension: usize,
    entities: Vec<EntityId>,
    entity_lookup: BTreeMap<EntityId, usize>,
    entity_of: Vec<usize>,
    by_entity: Vec<Vec<usize>>,
    diameters: Diameters,
}

impl Dataset {
    /// Builds a dataset, validating dimensions and `(entity, timestamp)`
    /// uniqueness and computing both diameters exactly.
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        let first = observations.first().ok_or(Error::EmptyInput)?;
        let dimension = first.description.len();
        if dimension == 0 {
            return Err(Error::ZeroDimension);
        }
        for obs in &observations {
            if obs.description.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: obs.description.len(),
                });
            }
            if !obs.timestamp.is_finite() {
                return Err(Error::NonFinite("timestamp"));
            }
            if obs.description.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("description"));
            }
        }

        let mut entity_lookup = BTreeMap::new();
        for obs in &observations {
            let next = entity_lookup.len();
            entity_lookup.entry(obs.entity.clone()).or_insert(next);
        }
        // Re-number entities in label order so indices are input-order independent.
        let entities: Vec<EntityId> = entity_lookup.keys().cloned().collect();
        for (idx, id) in entities.iter().enumerate() {
            entity_lookup.insert(id.clone(), idx);
        }

        let entity_of: Vec<usize> = observations
            .iter()
            .map(|o| entity_lookup[&o.entity])
            .collect();
        let mut by_entity = vec![Vec::new(); entities.len()];
        for (i, &e) in entity_of.iter().enumerate() {
            by_entity[e].push(i);
        }
        for (e, members) in by_entity.iter_mut().enumerate() {
            members.sort_by(|&a, &b| {
                observations[a]
                    .timestamp
                    .total_cmp(&observations[b].timestamp)
            });
            for pair in members.windows(2) {
                if observations[pair[0]].timestamp == observations[pair[1]].timestamp {
                    return Err(Error::DuplicateObservation {
                        entity: entities[e].as_str().to_string(),
                        timestamp: observations[pair[0]].timestamp,
                    });
                }
            }
        }

        let dx_max_sq = max_pairwise_squared(&observations);
        let (t_min, t_max) = observations.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY),
            |(lo, hi), o| (lo.min(o.timestamp), hi.max(o.timestamp)),
        );
        let dt_max = t_max - t_min;
        let diameters = Diameters {
            dx_max: libm::sqrt(dx_max_sq),
            dx_max_sq,
            dt_max,
            dt_max_sq: dt_max * dt_max,
        };

        Ok(Self {
            observations,
            dimension,
            entities,
            entity_lookup,
            entity_of,
            by_entity,
            diameters,
        })
    }

    /// Convenience constructor from raw `(entity, timestamp, vector)` triples.
    pub fn from_triples<S, I>(raw: I) -> Result<Self>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, f64, Vec<f64>)>,
    {
        let observations = raw
            .into_iter()
            .map(|(e, t, d)| Ok(Observation::new(EntityId::new(e)?, t, d)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(observations)
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn observation(&self, i: usize) -> &Observation {
        &self.observations[i]
    }

    pub fn diameters(&self) -> Diameters {
        self.diameters
    }

    /// Largest pairwise Euclidean distance between description vectors.
    pub fn dx_max(&self) -> f64 {
        self.diameters.dx_max
    }

    /// Temporal range `max t - min t`.
    pub fn dt_max(&self) -> f64 {
        self.diameters.dt_max
    }

    /// Entities in label order.
    pub fn entities(&self) -> &[EntityId] {
        &self.entities
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    /// Index of the entity owning observation `i`.
    pub fn entity_index(&self, i: usize) -> usize {
        self.entity_of[i]
    }

    /// Timestamp-sorted observation indices of the entity with index `entity`.
    pub fn entity_series(&self, entity: usize) -> &[usize] {
        &self.by_entity[entity]
    }

    /// Timestamp-sorted observation indices of `id`, if present.
    pub fn observations_of(&self, id: &EntityId) -> Option<&[usize]> {
        self.entity_lookup
            .get(id)
            .map(|&e| self.by_entity[e].as_slice())
    }

    /// All observations (including `i` itself) sharing `i`'s entity.
    pub fn siblings(&self, i: usize) -> &[usize] {
        &self.by_entity[self.entity_of[i]]
    }

    /// Index of the observation of `entity` at `timestamp`.
    pub fn find(&self, entity: &EntityId, timestamp: f64) -> Option<usize> {
        let series = self.observations_of(entity)?;
        series
            .binary_search_by(|&i| self.observations[i].timestamp.total_cmp(&timestamp))
            .ok()
            .map(|pos| series[pos])
    }
}

fn max_pairwise_squared(observations: &[Observation]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in observations.iter().enumerate() {
        for b in &observations[i + 1..] {
            best = best.max(squared_distance(&a.description, &b.description));
        }
    }
    best
}

/// Exact description-space diameter over all pairs; `0` for a singleton.
pub fn diameter_description(dataset: &Dataset) -> Result<f64> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(dataset.dx_max())
}

/// Hard assignment of every observation to one of `m` clusters, with the
/// derived member lists and one centroid per cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    assignment: Vec<usize>,
    clusters: Vec<Vec<usize>>,
    centroids: Vec<Centroid>,
}

impl Partition {
    /// Builds a partition from labels and one centroid per cluster.
    pub fn new(assignment: Vec<usize>, centroids: Vec<Centroid>) -> Result<Self> {
        let m = centroids.len();
        if m == 0 {
            return Err(Error::InvalidPartition("no clusters".into()));
        }
        let clusters = members_of(&assignment, m)?;
        Ok(Self {
            assignment,
            clusters,
            centroids,
        })
    }

    /// Builds a partition from labels, fitting every centroid with the
    /// coupled weighted update. Empty clusters receive the dataset mean.
    pub fn fit(
        dataset: &Dataset,
        assignment: Vec<usize>,
        clusters: usize,
        weights: crate::TuningWeights,
        solver: crate::CentroidSolver,
    ) -> Result<Self> {
        if assignment.len() != dataset.len() {
            return Err(Error::InvalidPartition(alloc::format!(
                "{} labels for {} observations",
                assignment.len(),
                dataset.len()
            )));
        }
        if clusters == 0 {
            return Err(Error::InvalidPartition("no clusters".into()));
        }
        let members = members_of(&assignment, clusters)?;
        let all: Vec<usize> = (0..dataset.len()).collect();
        let fallback = crate::engine::weighted_mean(dataset, &all);
        let centroids = members
            .iter()
            .map(|m| {
                if m.is_empty() {
                    fallback.clone()
                } else {
                    let start = crate::engine::weighted_mean(dataset, m);
                    crate::engine::update_centroid(m, dataset, weights, &start, solver)
                }
            })
            .collect();
        Ok(Self {
            assignment,
            clusters: members,
            centroids,
        })
    }

    pub fn cluster_count(&self) -> usize {
        self.centroids.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_of(&self, i: usize) -> usize {
        self.assignment[i]
    }

    pub fn clusters(&self) -> &[Vec<usize>] {
        &self.clusters
    }

    pub fn members(&self, j: usize) -> &[usize] {
        &self.clusters[j]
    }

    pub fn centroids(&self) -> &[Centroid] {
        &self.centroids
    }

    pub fn centroid(&self, j: usize) -> &Centroid {
        &self.centroids[j]
    }

    /// Checks that the partition covers `dataset` and that centroids match its dimension.
    pub fn validate(&self, dataset: &Dataset) -> Result<()> {
        if self.assignment.len() != dataset.len() {
            return Err(Error::InvalidPartition(alloc::format!(
                "{} labels for {} observations",
                self.assignment.len(),
                dataset.len()
            )));
        }
        for c in &self.centroids {
            if c.description.len() != dataset.dimension() {
                return Err(Error::DimensionMismatch {
                    expected: dataset.dimension(),
                    found: c.description.len(),
                });
            }
        }
        Ok(())
    }
}

fn members_of(assignment: &[usize], m: usize) -> Result<Vec<Vec<usize>>> {
    let mut clusters = vec![Vec::new(); m];
    for (i, &j) in assignment.iter().enumerate() {
        if j >= m {
            return Err(Error::ClusterIndex {
                index: j,
                clusters: m,
            });
        }
        clusters[j].push(i);
    }
    Ok(clusters)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::format;

    fn obs(e: &str, t: f64, d: &[f64]) -> (String, f64, Vec<f64>) {
        (e.to_string(), t, d.to_vec())
    }

    #[test]
    fn singleton_has_zero_diameters() {
        let ds = Dataset::from_triples([obs("a", 1960.0, &[1.0, 2.0])]).unwrap();
        assert_eq!(ds.dx_max(), 0.0);
        assert_eq!(ds.dt_max(), 0.0);
    }

    #[test]
    fn two_point_diameters() {
        let ds = Dataset::from_triples([
            obs("a", 1960.0, &[0.0, 0.0]),
            obs("b", 1970.0, &[3.0, 4.0]),
        ])
        .unwrap();
        assert_eq!(ds.dx_max(), 5.0);
        assert_eq!(ds.dt_max(), 10.0);
    }

    #[test]
    fn per_entity_index_counts() {
        let mut raw = Vec::new();
        for e in ["x", "y", "z"] {
            for t in (0..10).rev() {
                raw.push(obs(e, f64::from(t), &[f64::from(t)]));
            }
        }
        let ds = Dataset::from_triples(raw).unwrap();
        assert_eq!(ds.entity_count(), 3);
        for e in 0..3 {
            let series = ds.entity_series(e);
            assert_eq!(series.len(), 10);
            assert!(series
                .windows(2)
                .all(|w| ds.observation(w[0]).timestamp < ds.observation(w[1]).timestamp));
        }
    }

    #[test]
    fn diameter_examples() {
        let same = Dataset::from_triples([
            obs("a", 0.0, &[2.0]),
            obs("b", 0.0, &[2.0]),
            obs("c", 0.0, &[2.0]),
        ])
        .unwrap();
        assert_eq!(diameter_description(&same).unwrap(), 0.0);

        let line = Dataset::from_triples([
            obs("a", 0.0, &[0.0]),
            obs("b", 0.0, &[1.0]),
            obs("c", 0.0, &[7.0]),
        ])
        .unwrap();
        assert_eq!(diameter_description(&line).unwrap(), 7.0);

        let diag = Dataset::from_triples([
            obs("a", 0.0, &[0.0, 0.0]),
            obs("b", 0.0, &[1.0, 1.0]),
            obs("c", 0.0, &[2.0, 2.0]),
        ])
        .unwrap();
        assert!((diameter_description(&diag).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            Dataset::from_triples(Vec::<(String, f64, Vec<f64>)>::new()),
            Err(Error::EmptyInput)
        );
        assert!(matches!(
            Dataset::from_triples([obs("a", 0.0, &[1.0]), obs("b", 0.0, &[1.0, 2.0])]),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
        assert!(matches!(
            Dataset::from_triples([obs("a", 3.0, &[1.0]), obs("a", 3.0, &[2.0])]),
            Err(Error::DuplicateObservation { .. })
        ));
        assert_eq!(EntityId::new(""), Err(Error::EmptyEntityId));
        assert_eq!(
            Dataset::from_triples([obs("a", f64::NAN, &[1.0])]),
            Err(Error::NonFinite("timestamp"))
        );
    }

    #[test]
    fn gaps_are_allowed() {
        let ds = Dataset::from_triples([
            obs("a", 1960.0, &[0.0]),
            obs("a", 1965.0, &[1.0]),
            obs("b", 1961.0, &[0.0]),
        ])
        .unwrap();
        let a = EntityId::new("a").unwrap();
        assert_eq!(ds.observations_of(&a).unwrap(), &[0, 1]);
        assert_eq!(ds.find(&a, 1965.0), Some(1));
        assert_eq!(ds.find(&a, 1961.0), None);
    }

    #[test]
    fn partition_rejects_out_of_range_labels() {
        let c = Centroid::new(0.0, vec![0.0]);
        let err = Partition::new(vec![0, 2], vec![c.clone(), c]).unwrap_err();
        assert_eq!(err, Error::ClusterIndex { index: 2, clusters: 2 });
        let _ = format!("{err}");
    }
}

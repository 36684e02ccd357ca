//! Soft must-link contiguity penalties between observations of one entity.

use crate::model::{Dataset, Partition};
use crate::{Error, Result};

/// Shape of the pairwise penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyKind {
    /// `β·exp(-½(Δt/δ)²)`.
    Gaussian,
    /// `α*·𝟙(|Δt| < d*)`; `beta` holds `α*` and `delta` holds `d*`.
    Threshold,
    None,
}

impl PenaltyKind {
    pub fn name(self) -> &'static str {
        match self {
            PenaltyKind::Gaussian => "gaussian",
            PenaltyKind::Threshold => "threshold",
            PenaltyKind::None => "none",
        }
    }
}

/// Penalty parameters. For [`PenaltyKind::Threshold`], `beta` is `α*` and
/// `delta` is `d*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyConfig {
    pub kind: PenaltyKind,
    pub beta: f64,
    pub delta: f64,
}

impl PenaltyConfig {
    pub const NONE: Self = Self {
        kind: PenaltyKind::None,
        beta: 0.0,
        delta: 1.0,
    };

    pub fn gaussian(beta: f64, delta: f64) -> Self {
        Self {
            kind: PenaltyKind::Gaussian,
            beta,
            delta,
        }
    }

    pub fn threshold(alpha_star: f64, d_star: f64) -> Self {
        Self {
            kind: PenaltyKind::Threshold,
            beta: alpha_star,
            delta: d_star,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: self.beta,
            });
        }
        if self.kind != PenaltyKind::None && !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "delta",
                value: self.delta,
            });
        }
        Ok(())
    }

    /// `true` when the penalty can never contribute.
    pub fn is_inactive(&self) -> bool {
        self.kind == PenaltyKind::None || self.beta == 0.0
    }

    /// Penalty for separating two same-entity observations `dt` apart.
    #[inline]
    pub fn same_entity(&self, dt: f64) -> f64 {
        match self.kind {
            PenaltyKind::Gaussian => gaussian_weight(dt, self.beta, self.delta),
            PenaltyKind::Threshold => threshold_weight(dt, self.beta, self.delta),
            PenaltyKind::None => 0.0,
        }
    }
}

#[inline]
fn gaussian_weight(dt: f64, beta: f64, delta: f64) -> f64 {
    let z = dt / delta;
    beta * libm::exp(-0.5 * z * z)
}

#[inline]
fn threshold_weight(dt: f64, alpha_star: f64, d_star: f64) -> f64 {
    if dt.abs() < d_star {
        alpha_star
    } else {
        0.0
    }
}

fn check_timestamps(a: f64, b: f64) -> Result<()> {
    if a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("timestamp"))
    }
}

/// Gaussian must-link penalty between two observations; `0` across entities.
pub fn gaussian_penalty(
    a: &crate::Observation,
    b: &crate::Observation,
    beta: f64,
    delta: f64,
) -> Result<f64> {
    PenaltyConfig::gaussian(beta, delta).validate()?;
    check_timestamps(a.timestamp, b.timestamp)?;
    if a.entity != b.entity {
        return Ok(0.0);
    }
    Ok(gaussian_weight(a.timestamp - b.timestamp, beta, delta))
}

/// Window penalty `α*·𝟙(|Δt| < d*)` for same-entity pairs; `0` across entities.
pub fn threshold_penalty(
    a: &crate::Observation,
    b: &crate::Observation,
    alpha_star: f64,
    d_star: f64,
) -> Result<f64> {
    if !(alpha_star >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "alpha_star",
            value: alpha_star,
        });
    }
    check_timestamps(a.timestamp, b.timestamp)?;
    if a.entity != b.entity {
        return Ok(0.0);
    }
    Ok(threshold_weight(a.timestamp - b.timestamp, alpha_star, d_star))
}

/// Sum of penalties between observation `i` and every other observation of
/// its entity that `partition` does not place in `cluster`.
pub fn violation_cost(
    i: usize,
    cluster: usize,
    partition: &Partition,
    dataset: &Dataset,
    config: &PenaltyConfig,
) -> Result<f64> {
    if cluster >= partition.cluster_count() {
        return Err(Error::ClusterIndex {
            index: cluster,
            clusters: partition.cluster_count(),
        });
    }
    partition.validate(dataset)?;
    Ok(violation_cost_unchecked(
        i,
        cluster,
        partition.assignment(),
        dataset,
        config,
    ))
}

#[inline]
pub(crate) fn violation_cost_unchecked(
    i: usize,
    cluster: usize,
    assignment: &[usize],
    dataset: &Dataset,
    config: &PenaltyConfig,
) -> f64 {
    if config.is_inactive() {
        return 0.0;
    }
    let t = dataset.observation(i).timestamp;
    dataset
        .siblings(i)
        .iter()
        .filter(|&&k| k != i && assignment[k] != cluster)
        .map(|&k| config.same_entity(t - dataset.observation(k).timestamp))
        .sum()
}

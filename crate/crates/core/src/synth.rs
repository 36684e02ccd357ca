//! Synthetic panels with planted temporal phases, and recovery scoring.
//!
//! Every entity walks through an ordered list of phases; between switch times
//! its descriptions are Gaussian draws around the current phase mean. The
//! generating phase of each observation is the ground-truth label.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dissimilarity::TuningWeights;
use crate::engine::CentroidSolver;
use crate::metrics::{self, MetricReport};
use crate::model::{Dataset, EntityId, Observation, Partition};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub mean: Vec<f64>,
    pub stddev: f64,
    /// Closed interval of timestamps the phase may generate.
    pub extent: (f64, f64),
}

/// Ordered `(phase, switch time)` visits; the entity is in `phase` from its
/// switch time until the next visit begins. The first switch time must not
/// exceed the first grid timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub visits: Vec<(usize, f64)>,
}

impl Trajectory {
    pub fn phase_at(&self, t: f64) -> Option<usize> {
        self.visits
            .iter()
            .take_while(|&&(_, start)| start <= t)
            .last()
            .map(|&(p, _)| p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub entities: usize,
    pub timestamps: usize,
    pub start: f64,
    pub step: f64,
    pub phases: Vec<Phase>,
    pub trajectories: Vec<Trajectory>,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn grid(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.timestamps).map(move |k| self.start + k as f64 * self.step)
    }

    pub fn entity_label(&self, e: usize) -> alloc::string::String {
        let width = self.entities.saturating_sub(1).max(1).ilog10() as usize + 1;
        format!("e{e:0width$}")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidScenario(msg));
        if self.entities == 0 || self.timestamps == 0 {
            return bad("need at least one entity and one timestamp".into());
        }
        if !(self.step > 0.0 && self.step.is_finite() && self.start.is_finite()) {
            return bad("timestamp grid must have a finite positive step".into());
        }
        if self.phases.is_empty() {
            return bad("no phases".into());
        }
        if self.entities * self.timestamps < self.phases.len() {
            return bad(format!(
                "{} observations cannot cover {} phases",
                self.entities * self.timestamps,
                self.phases.len()
            ));
        }
        let d = self.phases[0].mean.len();
        if d == 0 {
            return Err(Error::ZeroDimension);
        }
        for (k, ph) in self.phases.iter().enumerate() {
            if ph.mean.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: ph.mean.len(),
                });
            }
            if !(ph.stddev >= 0.0 && ph.stddev.is_finite()) {
                return bad(format!("phase {k} has an invalid stddev"));
            }
            if !(ph.extent.0 <= ph.extent.1) {
                return bad(format!("phase {k} has an empty extent"));
            }
        }
        if self.trajectories.len() != self.entities {
            return bad(format!(
                "{} trajectories for {} entities",
                self.trajectories.len(),
                self.entities
            ));
        }
        for (e, tr) in self.trajectories.iter().enumerate() {
            if tr.visits.is_empty() {
                return bad(format!("entity {e} has no phase visits"));
            }
            if tr.visits.windows(2).any(|w| !(w[0].1 < w[1].1)) {
                return bad(format!("entity {e} switch times are not strictly increasing"));
            }
            if let Some(&(p, _)) = tr.visits.iter().find(|(p, _)| *p >= self.phases.len()) {
                return bad(format!("entity {e} visits unknown phase {p}"));
            }
            for t in self.grid() {
                let Some(p) = tr.phase_at(t) else {
                    return bad(format!("entity {e} has no phase at t = {t}"));
                };
                let (lo, hi) = self.phases[p].extent;
                if t < lo || t > hi {
                    return bad(format!(
                        "entity {e} is in phase {p} at t = {t}, outside its extent [{lo}, {hi}]"
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Draws the dataset and its ground-truth partition. Truth centroids are the
/// plain member means; phases that no observation falls in get the global mean.
pub fn generate(spec: &ScenarioSpec) -> Result<(Dataset, Partition)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut observations = Vec::with_capacity(spec.entities * spec.timestamps);
    let mut labels = Vec::with_capacity(observations.capacity());
    for (e, tr) in spec.trajectories.iter().enumerate() {
        let id = EntityId::new(spec.entity_label(e))?;
        for t in spec.grid() {
            let p = tr.phase_at(t).expect("validated");
            let phase = &spec.phases[p];
            let description = if phase.stddev == 0.0 {
                phase.mean.clone()
            } else {
                let noise = Normal::new(0.0, phase.stddev).expect("validated stddev");
                phase.mean.iter().map(|&mu| mu + noise.sample(&mut rng)).collect()
            };
            observations.push(Observation::new(id.clone(), t, description));
            labels.push(p);
        }
    }
    let dataset = Dataset::new(observations)?;
    let truth = Partition::fit(
        &dataset,
        labels,
        spec.phases.len(),
        TuningWeights {
            gamma_d: 0.0,
            gamma_t: 0.0,
        },
        CentroidSolver::default(),
    )?;
    Ok((dataset, truth))
}

/// Programmatic scenario: time is cut into `eras`, each era offers `tracks`
/// parallel phases, and every entity picks one track per era. Era boundaries
/// are shifted per entity by up to `switch_jitter` grid steps.
#[derive(Debug, Clone, PartialEq)]
pub struct StagedScenario {
    pub entities: usize,
    pub timestamps: usize,
    pub start: f64,
    pub eras: usize,
    pub tracks: usize,
    pub dimension: usize,
    /// Standard deviation of the phase means around the origin.
    pub separation: f64,
    /// Shift of every era's means along the first axis relative to the
    /// previous era, modelling gradual evolution.
    pub drift: f64,
    /// Within-phase noise.
    pub stddev: f64,
    pub switch_jitter: usize,
    pub seed: u64,
}

impl Default for StagedScenario {
    fn default() -> Self {
        Self {
            entities: 3,
            timestamps: 10,
            start: 1960.0,
            eras: 2,
            tracks: 2,
            dimension: 2,
            separation: 3.0,
            drift: 0.0,
            stddev: 0.5,
            switch_jitter: 0,
            seed: 0,
        }
    }
}

impl StagedScenario {
    pub fn phase_count(&self) -> usize {
        self.eras * self.tracks
    }

    pub fn build(&self) -> Result<ScenarioSpec> {
        if self.eras == 0 || self.tracks == 0 || self.dimension == 0 {
            return Err(Error::InvalidScenario(
                "eras, tracks and dimension must be positive".into(),
            ));
        }
        if self.eras > self.timestamps {
            return Err(Error::InvalidScenario(format!(
                "{} eras do not fit in {} timestamps",
                self.eras, self.timestamps
            )));
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "separation",
                value: self.separation,
            });
        }
        // Layout draws use their own stream so noise draws stay independent.
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x5eed_1a70_u64);
        let spread = Normal::new(0.0, self.separation.max(f64::MIN_POSITIVE)).expect("finite");

        if !self.drift.is_finite() {
            return Err(Error::InvalidParameter {
                name: "drift",
                value: self.drift,
            });
        }
        let means: Vec<Vec<f64>> = (0..self.phase_count())
            .map(|p| {
                let mut mean: Vec<f64> = (0..self.dimension)
                    .map(|_| if self.separation == 0.0 { 0.0 } else { spread.sample(&mut rng) })
                    .collect();
                mean[0] += (p / self.tracks) as f64 * self.drift;
                mean
            })
            .collect();

        // Nominal era starts on the integer grid.
        let q = self.timestamps;
        let boundaries: Vec<usize> = (0..self.eras).map(|k| k * q / self.eras).collect();

        let mut trajectories = Vec::with_capacity(self.entities);
        let mut lo = vec![f64::INFINITY; self.phase_count()];
        let mut hi = vec![f64::NEG_INFINITY; self.phase_count()];
        for _ in 0..self.entities {
            let mut visits: Vec<(usize, f64)> = Vec::with_capacity(self.eras);
            let mut previous = 0usize;
            for (era, &b) in boundaries.iter().enumerate() {
                let track = rng.random_range(0..self.tracks);
                let phase = era * self.tracks + track;
                let at = if era == 0 {
                    0
                } else {
                    let j = self.switch_jitter as i64;
                    let shift = if j == 0 { 0 } else { rng.random_range(-j..=j) };
                    (b as i64 + shift).max(previous as i64 + 1) as usize
                };
                if at >= q {
                    break;
                }
                visits.push((phase, self.start + at as f64));
                previous = at;
            }
            for (k, &(p, t0)) in visits.iter().enumerate() {
                let t1 = visits
                    .get(k + 1)
                    .map(|&(_, t)| t - 1.0)
                    .unwrap_or(self.start + (q - 1) as f64);
                lo[p] = lo[p].min(t0);
                hi[p] = hi[p].max(t1);
            }
            trajectories.push(Trajectory { visits });
        }

        let phases = means
            .into_iter()
            .enumerate()
            .map(|(p, mean)| Phase {
                mean,
                stddev: self.stddev,
                extent: if lo[p] <= hi[p] {
                    (lo[p], hi[p])
                } else {
                    (self.start, self.start + (q - 1) as f64)
                },
            })
            .collect();
        Ok(ScenarioSpec {
            entities: self.entities,
            timestamps: self.timestamps,
            start: self.start,
            step: 1.0,
            phases,
            trajectories,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryScore {
    pub ari: f64,
    /// `confusion[truth][found]` observation counts.
    pub confusion: Vec<Vec<usize>>,
    pub report: Option<MetricReport>,
}

fn pairs(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// Adjusted Rand index and confusion matrix of `found` against `truth`.
pub fn score(truth: &Partition, found: &Partition) -> Result<RecoveryScore> {
    let n = truth.assignment().len();
    if found.assignment().len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            found: found.assignment().len(),
        });
    }
    let mut confusion = vec![vec![0usize; found.cluster_count()]; truth.cluster_count()];
    for (&a, &b) in truth.assignment().iter().zip(found.assignment()) {
        confusion[a][b] += 1;
    }
    let index: f64 = confusion.iter().flatten().map(|&c| pairs(c)).sum();
    let rows: f64 = confusion.iter().map(|r| pairs(r.iter().sum())).sum();
    let cols: f64 = (0..found.cluster_count())
        .map(|j| pairs(confusion.iter().map(|r| r[j]).sum()))
        .sum();
    let total = pairs(n);
    let expected = if total > 0.0 { rows * cols / total } else { 0.0 };
    let max = 0.5 * (rows + cols);
    // A zero denominator only occurs when both partitions are all-singletons
    // or both are a single block, i.e. they agree.
    let ari = if max == expected {
        1.0
    } else {
        (index - expected) / (max - expected)
    };
    Ok(RecoveryScore {
        ari,
        confusion,
        report: None,
    })
}

/// [`score`] plus the metric report of the recovered partition.
pub fn score_on(dataset: &Dataset, truth: &Partition, found: &Partition) -> Result<RecoveryScore> {
    let mut s = score(truth, found)?;
    s.report = Some(metrics::report(dataset, found)?);
    Ok(s)
}

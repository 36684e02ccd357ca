//! Iterative relocation optimizer.
//!
//! Each outer iteration assigns every observation to the cluster minimizing
//! its TA dissimilarity to the previous centroids plus the contiguity
//! penalty against the previous partition, then refits every centroid as the
//! fixed point of the coupled weighted means. Iteration stops once the
//! partition repeats, the objective rises, or the iteration cap is hit.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constraints::{violation_cost_unchecked, PenaltyConfig};
use crate::dissimilarity::{squared_distance, ta_unchecked, TuningWeights};
use crate::metrics;
use crate::model::{Centroid, Dataset, Partition};
use crate::{Error, Result};

/// Slack allowed on the objective between consecutive outer iterations.
pub const OBJECTIVE_SLACK: f64 = 1e-9;

/// Algorithm family. Each variant is a preset for `alpha` and the penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    /// Description space only, no penalty.
    SimpleKMeans,
    /// TA measure, no penalty.
    TemporalDriven,
    /// Description space only, Gaussian penalty.
    Constrained,
    /// TA measure plus Gaussian penalty.
    Tdck,
    /// Description space only, threshold penalty.
    Tck,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::SimpleKMeans,
        Variant::TemporalDriven,
        Variant::Constrained,
        Variant::Tdck,
        Variant::Tck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::SimpleKMeans => "simple",
            Variant::TemporalDriven => "temporal",
            Variant::Constrained => "constrained",
            Variant::Tdck => "tdck",
            Variant::Tck => "tck",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "simple" | "simple_kmeans" | "kmeans" => Variant::SimpleKMeans,
            "temporal" | "temporal_driven" | "td" => Variant::TemporalDriven,
            "constrained" => Variant::Constrained,
            "tdck" => Variant::Tdck,
            "tck" => Variant::Tck,
            _ => return Err(Error::UnknownAlgorithm(s.into())),
        })
    }
}

/// Controls the Gauss-Seidel iteration on the coupled centroid equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentroidSolver {
    pub tolerance: f64,
    pub max_inner: usize,
}

impl Default for CentroidSolver {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_inner: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgorithmConfig {
    pub clusters: usize,
    pub alpha: f64,
    pub penalty: PenaltyConfig,
    pub seed: u64,
    pub max_outer_iterations: usize,
    pub centroid_solver: CentroidSolver,
    pub variant: Variant,
}

impl AlgorithmConfig {
    pub const DEFAULT_MAX_OUTER: usize = 500;
    pub const DEFAULT_BETA: f64 = 0.003;
    pub const DEFAULT_DELTA: f64 = 3.0;
    pub const DEFAULT_ALPHA_STAR: f64 = 2.0;
    pub const DEFAULT_D_STAR: f64 = 4.0;

    /// Preset configuration for `variant` with `clusters` clusters and seed 0.
    pub fn new(variant: Variant, clusters: usize) -> Self {
        let (alpha, penalty) = match variant {
            Variant::SimpleKMeans => (1.0, PenaltyConfig::NONE),
            Variant::TemporalDriven => (0.0, PenaltyConfig::NONE),
            Variant::Constrained => (
                1.0,
                PenaltyConfig::gaussian(Self::DEFAULT_BETA, Self::DEFAULT_DELTA),
            ),
            Variant::Tdck => (
                0.0,
                PenaltyConfig::gaussian(Self::DEFAULT_BETA, Self::DEFAULT_DELTA),
            ),
            Variant::Tck => (
                1.0,
                PenaltyConfig::threshold(Self::DEFAULT_ALPHA_STAR, Self::DEFAULT_D_STAR),
            ),
        };
        Self {
            clusters,
            alpha,
            penalty,
            seed: 0,
            max_outer_iterations: Self::DEFAULT_MAX_OUTER,
            centroid_solver: CentroidSolver::default(),
            variant,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_penalty(mut self, penalty: PenaltyConfig) -> Self {
        self.penalty = penalty;
        self
    }

    /// Replaces `beta` (or `α*`) while keeping the penalty kind.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.penalty.beta = beta;
        self
    }

    /// Replaces `delta` (or `d*`) while keeping the penalty kind.
    pub fn with_delta(mut self, delta: f64) -> Self {
        self.penalty.delta = delta;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_outer_iterations(mut self, cap: usize) -> Self {
        self.max_outer_iterations = cap;
        self
    }

    pub fn with_centroid_solver(mut self, solver: CentroidSolver) -> Self {
        self.centroid_solver = solver;
        self
    }

    pub fn weights(&self) -> Result<TuningWeights> {
        TuningWeights::from_alpha(self.alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if self.clusters == 0 {
            return Err(Error::InvalidParameter {
                name: "clusters",
                value: 0.0,
            });
        }
        self.weights()?;
        self.penalty.validate()?;
        if self.max_outer_iterations == 0 {
            return Err(Error::InvalidParameter {
                name: "max_outer_iterations",
                value: 0.0,
            });
        }
        if !(self.centroid_solver.tolerance > 0.0) || self.centroid_solver.max_inner == 0 {
            return Err(Error::InvalidParameter {
                name: "centroid_solver.tolerance",
                value: self.centroid_solver.tolerance,
            });
        }
        Ok(())
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The partition repeated between two iterations.
    PartitionStable,
    /// The next iteration would have raised the objective by more than
    /// [`OBJECTIVE_SLACK`]; the previous state was kept.
    ObjectiveIncrease,
    /// The assignment revisited one of the last [`CYCLE_WINDOW`] partitions
    /// without the objective changing; the previous state was kept.
    Cycle,
    IterationCap,
}

/// Number of recent partitions remembered for cycle detection.
pub const CYCLE_WINDOW: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub partition: Partition,
    pub objective: f64,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub stop: StopReason,
    pub seed: u64,
}

/// Objective value: every observation's TA dissimilarity to its centroid
/// plus the penalty for each same-entity observation placed elsewhere.
pub fn objective(dataset: &Dataset, partition: &Partition, config: &AlgorithmConfig) -> Result<f64> {
    partition.validate(dataset)?;
    let weights = config.weights()?;
    config.penalty.validate()?;
    Ok(objective_unchecked(
        dataset,
        partition.assignment(),
        partition.centroids(),
        weights,
        &config.penalty,
    ))
}

fn objective_unchecked(
    dataset: &Dataset,
    assignment: &[usize],
    centroids: &[Centroid],
    weights: TuningWeights,
    penalty: &PenaltyConfig,
) -> f64 {
    let diam = dataset.diameters();
    assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            ta_unchecked(dataset.observation(i), &centroids[j], diam, weights)
                + violation_cost_unchecked(i, j, assignment, dataset, penalty)
        })
        .sum()
}

/// Cost of placing observation `i` in each cluster, against a frozen
/// previous assignment. Without a previous assignment the penalty term is
/// identical for every cluster and is left out.
fn assignment_costs(
    i: usize,
    centroids: &[Centroid],
    previous: Option<&[usize]>,
    dataset: &Dataset,
    weights: TuningWeights,
    penalty: &PenaltyConfig,
    out: &mut Vec<f64>,
) {
    let diam = dataset.diameters();
    let obs = dataset.observation(i);
    out.clear();
    out.extend(centroids.iter().map(|c| ta_unchecked(obs, c, diam, weights)));
    if let Some(prev) = previous {
        if !penalty.is_inactive() {
            for (j, cost) in out.iter_mut().enumerate() {
                *cost += violation_cost_unchecked(i, j, prev, dataset, penalty);
            }
        }
    }
}

fn argmin(costs: &[f64]) -> usize {
    let mut best = 0;
    for (j, &c) in costs.iter().enumerate().skip(1) {
        if c < costs[best] {
            best = j;
        }
    }
    best
}

/// Cluster minimizing TA dissimilarity to its centroid plus the penalty
/// against `previous`; ties go to the lowest index.
pub fn best_cluster(
    i: usize,
    centroids: &[Centroid],
    previous: Option<&[usize]>,
    dataset: &Dataset,
    config: &AlgorithmConfig,
) -> Result<usize> {
    if centroids.is_empty() {
        return Err(Error::InvalidPartition("no centroids".into()));
    }
    if i >= dataset.len() {
        return Err(Error::InvalidPartition(alloc::format!(
            "observation {i} out of range"
        )));
    }
    if let Some(prev) = previous {
        if prev.len() != dataset.len() {
            return Err(Error::InvalidPartition("previous assignment length".into()));
        }
    }
    let weights = config.weights()?;
    let mut costs = Vec::with_capacity(centroids.len());
    assignment_costs(
        i,
        centroids,
        previous,
        dataset,
        weights,
        &config.penalty,
        &mut costs,
    );
    Ok(argmin(&costs))
}

/// Unweighted mean of timestamps and descriptions over `members`.
pub(crate) fn weighted_mean(dataset: &Dataset, members: &[usize]) -> Centroid {
    let mut description = vec![0.0; dataset.dimension()];
    let mut t = 0.0;
    for &i in members {
        let o = dataset.observation(i);
        t += o.timestamp;
        for (acc, v) in description.iter_mut().zip(&o.description) {
            *acc += v;
        }
    }
    let n = members.len() as f64;
    description.iter_mut().for_each(|v| *v /= n);
    Centroid::new(t / n, description)
}

/// Refits one centroid. The description part is the mean weighted by each
/// member's temporal closeness `1 - γ_t·e_t`, the timestamp is the mean
/// weighted by descriptive closeness `1 - γ_d·e_d`; the two are alternated
/// from `previous` until both stop moving. Returns `previous` unchanged for
/// an empty member list.
pub fn update_centroid(
    members: &[usize],
    dataset: &Dataset,
    weights: TuningWeights,
    previous: &Centroid,
    solver: CentroidSolver,
) -> Centroid {
    if members.is_empty() {
        return previous.clone();
    }
    let diam = dataset.diameters();
    let dim = dataset.dimension();
    let mut mu_t = previous.timestamp;
    let mut mu_d = previous.description.clone();
    let mut next_d = vec![0.0; dim];

    for _ in 0..solver.max_inner {
        // Description from the current timestamp.
        next_d.iter_mut().for_each(|v| *v = 0.0);
        let mut total = 0.0;
        for &i in members {
            let o = dataset.observation(i);
            let w = (1.0 - weights.gamma_t * diam.normalized_time(o.timestamp - mu_t)).max(0.0);
            total += w;
            for (acc, v) in next_d.iter_mut().zip(&o.description) {
                *acc += w * v;
            }
        }
        if total > 0.0 {
            next_d.iter_mut().for_each(|v| *v /= total);
        } else {
            next_d.copy_from_slice(&weighted_mean(dataset, members).description);
        }

        // Timestamp from the new description.
        let mut total = 0.0;
        let mut acc_t = 0.0;
        for &i in members {
            let o = dataset.observation(i);
            let e_d = diam.normalized_description(squared_distance(&o.description, &next_d));
            let w = (1.0 - weights.gamma_d * e_d).max(0.0);
            total += w;
            acc_t += w * o.timestamp;
        }
        let next_t = if total > 0.0 {
            acc_t / total
        } else {
            weighted_mean(dataset, members).timestamp
        };

        let change = mu_d
            .iter()
            .zip(&next_d)
            .map(|(a, b)| (a - b).abs())
            .fold((mu_t - next_t).abs(), f64::max);
        mu_t = next_t;
        mu_d.copy_from_slice(&next_d);
        if change < solver.tolerance {
            break;
        }
    }
    Centroid::new(mu_t, mu_d)
}

fn initial_centroids(dataset: &Dataset, clusters: usize, rng: &mut ChaCha8Rng) -> Vec<Centroid> {
    rand::seq::index::sample(rng, dataset.len(), clusters)
        .into_iter()
        .map(|i| Centroid::from_observation(dataset.observation(i)))
        .collect()
}

/// Moves the costliest observations (taken from clusters that can spare
/// one) into empty clusters and re-seeds those centroids on them.
fn reseed_empty(
    dataset: &Dataset,
    assignment: &mut [usize],
    centroids: &mut [Centroid],
    cost: &[f64],
) {
    let m = centroids.len();
    let mut sizes = vec![0usize; m];
    for &j in assignment.iter() {
        sizes[j] += 1;
    }
    for j in 0..m {
        if sizes[j] > 0 {
            continue;
        }
        let donor = (0..assignment.len())
            .filter(|&i| sizes[assignment[i]] > 1)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if cost[b] >= cost[i] => Some(b),
                _ => Some(i),
            });
        if let Some(i) = donor {
            sizes[assignment[i]] -= 1;
            sizes[j] = 1;
            assignment[i] = j;
            centroids[j] = Centroid::from_observation(dataset.observation(i));
        }
    }
}

fn members_of(assignment: &[usize], m: usize) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); m];
    for (i, &j) in assignment.iter().enumerate() {
        members[j].push(i);
    }
    members
}

/// Runs one seeded optimization.
pub fn run(dataset: &Dataset, config: &AlgorithmConfig) -> Result<RunResult> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = dataset.len();
    let m = config.clusters;
    if m > n {
        return Err(Error::TooManyClusters {
            clusters: m,
            observations: n,
        });
    }
    let weights = config.weights()?;
    let penalty = config.penalty;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut centroids = initial_centroids(dataset, m, &mut rng);
    let mut previous: Option<Vec<usize>> = None;
    let mut trace = Vec::new();
    let mut stop = StopReason::IterationCap;
    let mut iterations = 0;
    let mut costs = Vec::with_capacity(m);
    let mut recent: alloc::collections::VecDeque<Vec<usize>> =
        alloc::collections::VecDeque::with_capacity(CYCLE_WINDOW);

    while iterations < config.max_outer_iterations {
        iterations += 1;

        let mut assignment = vec![0usize; n];
        let mut own_cost = vec![0.0; n];
        for i in 0..n {
            assignment_costs(
                i,
                &centroids,
                previous.as_deref(),
                dataset,
                weights,
                &penalty,
                &mut costs,
            );
            let j = argmin(&costs);
            assignment[i] = j;
            own_cost[i] = costs[j];
        }

        let mut next_centroids = centroids.clone();
        reseed_empty(dataset, &mut assignment, &mut next_centroids, &own_cost);

        if previous.as_deref() == Some(assignment.as_slice()) {
            stop = StopReason::PartitionStable;
            break;
        }
        if recent.iter().any(|p| *p == assignment) {
            stop = StopReason::Cycle;
            break;
        }

        let members = members_of(&assignment, m);
        for (j, cluster) in members.iter().enumerate() {
            next_centroids[j] = update_centroid(
                cluster,
                dataset,
                weights,
                &next_centroids[j],
                config.centroid_solver,
            );
        }

        let value = objective_unchecked(dataset, &assignment, &next_centroids, weights, &penalty);
        if let Some(&last) = trace.last() {
            if value > last + OBJECTIVE_SLACK {
                stop = StopReason::ObjectiveIncrease;
                break;
            }
        }
        trace.push(value);
        centroids = next_centroids;
        if let Some(old) = previous.replace(assignment) {
            if recent.len() == CYCLE_WINDOW {
                recent.pop_front();
            }
            recent.push_back(old);
        }
    }

    // `previous` is set after the first completed iteration, which always
    // happens because the cap is at least one.
    let assignment = previous.unwrap_or_else(|| vec![0; n]);
    let objective = trace.last().copied().unwrap_or(f64::NAN);
    Ok(RunResult {
        partition: Partition::new(assignment, centroids)?,
        objective,
        objective_trace: trace,
        iterations,
        converged: stop == StopReason::PartitionStable,
        stop,
        seed: config.seed,
    })
}

/// Metrics of one run inside [`run_repeated`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub objective: f64,
    pub mdvar: f64,
    pub tvar: f64,
    pub shap: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricStats {
    pub objective: f64,
    pub mdvar: f64,
    pub tvar: f64,
    pub shap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedRuns {
    pub records: Vec<RunRecord>,
    pub mean: MetricStats,
    /// Population standard deviation across runs.
    pub stddev: MetricStats,
    /// Lowest-objective run (earliest on ties).
    pub best: RunResult,
}

/// Metrics for one finished run.
pub fn record_for(dataset: &Dataset, run: usize, result: &RunResult) -> Result<RunRecord> {
    Ok(RunRecord {
        run,
        seed: result.seed,
        objective: result.objective,
        mdvar: metrics::mdvar(dataset, &result.partition)?,
        tvar: metrics::tvar(dataset, &result.partition)?,
        shap: metrics::shap(dataset, &result.partition)?,
        iterations: result.iterations,
    })
}

/// Aggregates per-run records into means and population deviations.
pub fn summarize(records: &[RunRecord]) -> (MetricStats, MetricStats) {
    let n = records.len() as f64;
    let fields: [fn(&RunRecord) -> f64; 4] = [|r| r.objective, |r| r.mdvar, |r| r.tvar, |r| r.shap];
    let mut mean = [0.0; 4];
    let mut sd = [0.0; 4];
    for (k, f) in fields.iter().enumerate() {
        let mu = records.iter().map(f).sum::<f64>() / n;
        let var = records.iter().map(|r| (f(r) - mu) * (f(r) - mu)).sum::<f64>() / n;
        mean[k] = mu;
        sd[k] = libm::sqrt(var);
    }
    let pack = |v: [f64; 4]| MetricStats {
        objective: v[0],
        mdvar: v[1],
        tvar: v[2],
        shap: v[3],
    };
    (pack(mean), pack(sd))
}

/// Runs `runs` independent executions with seeds `seed, seed + 1, ...`.
pub fn run_repeated(dataset: &Dataset, config: &AlgorithmConfig, runs: usize) -> Result<RepeatedRuns> {
    if runs == 0 {
        return Err(Error::InvalidParameter {
            name: "runs",
            value: 0.0,
        });
    }
    let mut records = Vec::with_capacity(runs);
    let mut best: Option<RunResult> = None;
    for r in 0..runs {
        let cfg = config.with_seed(config.seed.wrapping_add(r as u64));
        let result = run(dataset, &cfg)?;
        records.push(record_for(dataset, r, &result)?);
        if best.as_ref().map_or(true, |b| result.objective < b.objective) {
            best = Some(result);
        }
    }
    let (mean, stddev) = summarize(&records);
    Ok(RepeatedRuns {
        records,
        mean,
        stddev,
        best: best.expect("runs >= 1"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Observation;
    use crate::EntityId;
    use alloc::string::String;

    fn triple(e: &str, t: f64, d: &[f64]) -> (String, f64, Vec<f64>) {
        (e.into(), t, d.to_vec())
    }

    fn single_cluster(ds: &Dataset, centroid: Centroid) -> Partition {
        Partition::new(vec![0; ds.len()], vec![centroid]).unwrap()
    }

    #[test]
    fn objective_zero_for_singleton_clusters() {
        let ds = Dataset::from_triples([
            triple("a", 0.0, &[0.0]),
            triple("a", 1.0, &[1.0]),
            triple("b", 0.0, &[3.0]),
        ])
        .unwrap();
        let cents = ds.observations().iter().map(Centroid::from_observation).collect();
        let p = Partition::new(vec![0, 1, 2], cents).unwrap();
        let cfg = AlgorithmConfig::new(Variant::TemporalDriven, 3);
        assert_eq!(objective(&ds, &p, &cfg).unwrap(), 0.0);
    }

    #[test]
    fn objective_reduces_to_scaled_kmeans() {
        let ds = Dataset::from_triples([
            triple("a", 0.0, &[0.0, 0.0]),
            triple("a", 1.0, &[1.0, 0.0]),
            triple("b", 5.0, &[4.0, 3.0]),
        ])
        .unwrap();
        let c = Centroid::new(2.0, vec![1.0, 1.0]);
        let p = single_cluster(&ds, c.clone());
        let cfg = AlgorithmConfig::new(Variant::SimpleKMeans, 1);
        let j = objective(&ds, &p, &cfg).unwrap();
        let raw: f64 = ds
            .observations()
            .iter()
            .map(|o| squared_distance(&o.description, &c.description))
            .sum();
        assert!((j - raw / 25.0).abs() < 1e-15);
    }

    #[test]
    fn best_cluster_ignores_penalty_without_beta() {
        let ds = Dataset::from_triples([
            triple("a", 0.0, &[0.0]),
            triple("a", 1.0, &[10.0]),
            triple("a", 2.0, &[10.0]),
        ])
        .unwrap();
        let cents = vec![Centroid::new(1.0, vec![0.0]), Centroid::new(1.0, vec![10.0])];
        let cfg = AlgorithmConfig::new(Variant::SimpleKMeans, 2);
        let prev = [1usize, 1, 1];
        assert_eq!(best_cluster(0, &cents, Some(&prev), &ds, &cfg).unwrap(), 0);
    }

    #[test]
    fn penalty_breaks_distance_tie() {
        // Observation 0 sits halfway between both centroids; its siblings
        // one time unit away are in cluster 1.
        let ds = Dataset::from_triples([
            triple("a", 1.0, &[5.0]),
            triple("a", 0.0, &[10.0]),
            triple("a", 2.0, &[10.0]),
            triple("b", 1.0, &[0.0]),
        ])
        .unwrap();
        let cents = vec![Centroid::new(1.0, vec![0.0]), Centroid::new(1.0, vec![10.0])];
        let prev = [1usize, 1, 1, 0];
        let cfg = AlgorithmConfig::new(Variant::Constrained, 2).with_beta(0.01).with_delta(1.0);
        // Manual costs: both ta = 0.25; cluster 0 adds 2·0.01·e^{-1/2}.
        let w = 0.01 * (-0.5f64).exp();
        assert!(w > 0.0);
        assert_eq!(best_cluster(0, &cents, Some(&prev), &ds, &cfg).unwrap(), 1);
        // Without a previous assignment the tie goes to the lowest index.
        assert_eq!(best_cluster(0, &cents, None, &ds, &cfg).unwrap(), 0);
    }

    #[test]
    fn single_cluster_always_zero() {
        let ds = Dataset::from_triples([triple("a", 0.0, &[1.0]), triple("b", 3.0, &[2.0])]).unwrap();
        let cents = vec![Centroid::new(0.0, vec![0.0])];
        let cfg = AlgorithmConfig::new(Variant::Tdck, 1);
        for i in 0..2 {
            assert_eq!(best_cluster(i, &cents, None, &ds, &cfg).unwrap(), 0);
        }
    }

    #[test]
    fn singleton_centroid_is_the_observation() {
        let ds = Dataset::from_triples([triple("a", 1990.0, &[1.0, 2.0]), triple("b", 1960.0, &[0.0, 0.0])]).unwrap();
        let c = update_centroid(
            &[0],
            &ds,
            TuningWeights::BALANCED,
            &Centroid::new(1960.0, vec![0.0, 0.0]),
            CentroidSolver::default(),
        );
        assert!((c.timestamp - 1990.0).abs() < 1e-9);
        assert!((c.description[0] - 1.0).abs() < 1e-12 && (c.description[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn shared_timestamp_gives_plain_mean() {
        let ds = Dataset::from_triples([
            triple("a", 2000.0, &[0.0]),
            triple("b", 2000.0, &[1.0]),
            triple("c", 2000.0, &[5.0]),
            triple("d", 1950.0, &[0.0]),
        ])
        .unwrap();
        let c = update_centroid(
            &[0, 1, 2],
            &ds,
            TuningWeights::BALANCED,
            &Centroid::new(1980.0, vec![0.0]),
            CentroidSolver::default(),
        );
        assert!((c.description[0] - 2.0).abs() < 1e-9);
        assert!((c.timestamp - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn too_many_clusters_rejected() {
        let ds = Dataset::from_triples([triple("a", 0.0, &[1.0])]).unwrap();
        let cfg = AlgorithmConfig::new(Variant::SimpleKMeans, 2);
        assert_eq!(
            run(&ds, &cfg).unwrap_err(),
            Error::TooManyClusters { clusters: 2, observations: 1 }
        );
    }

    #[test]
    fn one_cluster_run_is_the_global_fixed_point() {
        let ds = Dataset::from_triples([
            triple("a", 0.0, &[0.0]),
            triple("a", 1.0, &[1.0]),
            triple("b", 4.0, &[3.0]),
            triple("b", 6.0, &[2.0]),
        ])
        .unwrap();
        let cfg = AlgorithmConfig::new(Variant::Tdck, 1);
        let res = run(&ds, &cfg).unwrap();
        assert!(res.converged);
        let all: Vec<usize> = (0..4).collect();
        let expect = update_centroid(
            &all,
            &ds,
            TuningWeights::BALANCED,
            &res.partition.centroid(0).clone(),
            CentroidSolver::default(),
        );
        assert!((expect.timestamp - res.partition.centroid(0).timestamp).abs() < 1e-8);
    }

    #[test]
    fn runs_are_deterministic() {
        let mut raw = Vec::new();
        for e in 0..4 {
            for t in 0..8 {
                let x = f64::from(t % 3) + f64::from(e) * 0.1;
                raw.push(Observation::new(
                    EntityId::new(alloc::format!("e{e}")).unwrap(),
                    f64::from(t),
                    vec![x, x * x],
                ));
            }
        }
        let ds = Dataset::new(raw).unwrap();
        let cfg = AlgorithmConfig::new(Variant::Tdck, 3).with_seed(11).with_beta(0.05);
        assert_eq!(run(&ds, &cfg).unwrap(), run(&ds, &cfg).unwrap());
    }

    #[test]
    fn repeated_single_run_has_zero_spread() {
        let ds = Dataset::from_triples([
            triple("a", 0.0, &[0.0]),
            triple("a", 1.0, &[0.1]),
            triple("b", 0.0, &[5.0]),
            triple("b", 1.0, &[5.1]),
        ])
        .unwrap();
        let cfg = AlgorithmConfig::new(Variant::SimpleKMeans, 2);
        let rep = run_repeated(&ds, &cfg, 1).unwrap();
        assert_eq!(rep.stddev, MetricStats::default());
        assert_eq!(rep.mean.objective, rep.records[0].objective);
        assert!(run_repeated(&ds, &cfg, 0).is_err());
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("nope".parse::<Variant>().is_err());
    }
}

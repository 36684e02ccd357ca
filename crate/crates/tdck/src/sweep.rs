//! Parallel repeated runs and one-parameter sweeps with the curve crossing
//! heuristic. Work is spread over a rayon pool; results are always merged
//! in grid order, then seed order, so output does not depend on the number
//! of workers.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use tdck_core::engine::{self, MetricStats, RepeatedRuns, RunRecord};
use tdck_core::tuning::{self, Intersection};
use tdck_core::{AlgorithmConfig, Dataset, Error, PenaltyKind};

use crate::dataio::{self, fmt_real, DataError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Beta,
    Delta,
    Alpha,
    Clusters,
    AlphaStar,
    DStar,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Beta => "beta",
            SweepParam::Delta => "delta",
            SweepParam::Alpha => "alpha",
            SweepParam::Clusters => "clusters",
            SweepParam::AlphaStar => "alpha-star",
            SweepParam::DStar => "d-star",
        }
    }

    /// Curve pair the crossing heuristic uses when none is given.
    pub fn default_curves(self) -> (Curve, Curve) {
        match self {
            SweepParam::Alpha => (Curve::MDvar, Curve::Tvar),
            _ => (Curve::MDvar, Curve::ShaP),
        }
    }

    /// Returns `base` with this parameter set to `value`, checking the
    /// parameter's legal domain and that the penalty kind uses it.
    pub fn apply(self, base: &AlgorithmConfig, value: f64) -> Result<AlgorithmConfig, Error> {
        let invalid = |name| Error::InvalidParameter { name, value };
        let needs = |kind: PenaltyKind, name| {
            if base.penalty.kind == kind {
                Ok(())
            } else {
                Err(invalid(name))
            }
        };
        match self {
            SweepParam::Beta => {
                needs(PenaltyKind::Gaussian, "beta")?;
                if !(value >= 0.0) {
                    return Err(invalid("beta"));
                }
                Ok(base.with_beta(value))
            }
            SweepParam::Delta => {
                needs(PenaltyKind::Gaussian, "delta")?;
                if !(value > 0.0) {
                    return Err(invalid("delta"));
                }
                Ok(base.with_delta(value))
            }
            SweepParam::AlphaStar => {
                needs(PenaltyKind::Threshold, "alpha_star")?;
                if !(value >= 0.0) {
                    return Err(invalid("alpha_star"));
                }
                Ok(base.with_beta(value))
            }
            SweepParam::DStar => {
                needs(PenaltyKind::Threshold, "d_star")?;
                if !(value > 0.0) {
                    return Err(invalid("d_star"));
                }
                Ok(base.with_delta(value))
            }
            SweepParam::Alpha => {
                if !(-1.0..=1.0).contains(&value) {
                    return Err(invalid("alpha"));
                }
                Ok(base.with_alpha(value))
            }
            SweepParam::Clusters => {
                let m = value.round();
                if !(m >= 2.0) || (value - m).abs() > 1e-9 {
                    return Err(invalid("clusters"));
                }
                let mut cfg = *base;
                cfg.clusters = m as usize;
                Ok(cfg)
            }
        }
    }
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "beta" => Ok(SweepParam::Beta),
            "delta" => Ok(SweepParam::Delta),
            "alpha" => Ok(SweepParam::Alpha),
            "clusters" | "m" => Ok(SweepParam::Clusters),
            "alpha-star" => Ok(SweepParam::AlphaStar),
            "d-star" => Ok(SweepParam::DStar),
            other => Err(format!("unknown sweep parameter `{other}`")),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Curve {
    J,
    MDvar,
    Tvar,
    ShaP,
}

impl Curve {
    pub fn pick(self, stats: &MetricStats) -> f64 {
        match self {
            Curve::J => stats.objective,
            Curve::MDvar => stats.mdvar,
            Curve::Tvar => stats.tvar,
            Curve::ShaP => stats.shap,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Curve::J => "J",
            Curve::MDvar => "MDvar",
            Curve::Tvar => "Tvar",
            Curve::ShaP => "ShaP",
        }
    }
}

impl FromStr for Curve {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "j" | "objective" => Ok(Curve::J),
            "mdvar" => Ok(Curve::MDvar),
            "tvar" => Ok(Curve::Tvar),
            "shap" => Ok(Curve::ShaP),
            other => Err(format!("unknown curve `{other}`")),
        }
    }
}

/// Parses `a,b` into a curve pair.
pub fn parse_curves(s: &str) -> Result<(Curve, Curve), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected two comma-separated curves, got `{s}`"))?;
    Ok((a.parse()?, b.parse()?))
}

/// Same contract as [`engine::run_repeated`], with runs spread over the pool.
pub fn repeated(dataset: &Dataset, config: &AlgorithmConfig, runs: usize) -> Result<RepeatedRuns, Error> {
    if runs == 0 {
        return Err(Error::InvalidParameter {
            name: "runs",
            value: 0.0,
        });
    }
    let results = (0..runs)
        .into_par_iter()
        .map(|r| {
            let cfg = config.with_seed(config.seed.wrapping_add(r as u64));
            let result = engine::run(dataset, &cfg)?;
            let record = engine::record_for(dataset, r, &result)?;
            Ok((record, result))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let records: Vec<RunRecord> = results.iter().map(|(rec, _)| *rec).collect();
    let (mean, stddev) = engine::summarize(&records);
    let best = results
        .into_iter()
        .map(|(_, res)| res)
        .reduce(|best, next| if next.objective < best.objective { next } else { best })
        .expect("runs >= 1");
    Ok(RepeatedRuns {
        records,
        mean,
        stddev,
        best,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub runs: usize,
    pub curves: (Curve, Curve),
    pub base: AlgorithmConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub mean: MetricStats,
    pub stddev: MetricStats,
    pub records: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub spec: SweepSpec,
    pub points: Vec<SweepPoint>,
    pub intersection: Intersection,
}

impl SweepOutcome {
    pub fn curve(&self, c: Curve) -> Vec<f64> {
        self.points.iter().map(|p| c.pick(&p.mean)).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }
}

pub fn run_sweep(dataset: &Dataset, spec: &SweepSpec) -> Result<SweepOutcome, Error> {
    let values = tuning::grid(spec.lo, spec.hi, spec.step)?;
    let configs = values
        .iter()
        .map(|&v| spec.param.apply(&spec.base, v))
        .collect::<Result<Vec<_>, Error>>()?;
    let points = values
        .par_iter()
        .zip(configs.par_iter())
        .map(|(&value, cfg)| {
            let r = engine::run_repeated(dataset, cfg, spec.runs)?;
            Ok(SweepPoint {
                value,
                mean: r.mean,
                stddev: r.stddev,
                records: r.records,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let x: Vec<f64> = points.iter().map(|p| p.value).collect();
    let a: Vec<f64> = points.iter().map(|p| spec.curves.0.pick(&p.mean)).collect();
    let b: Vec<f64> = points.iter().map(|p| spec.curves.1.pick(&p.mean)).collect();
    let intersection = tuning::intersections(&x, &a, &b)?;
    Ok(SweepOutcome {
        spec: spec.clone(),
        points,
        intersection,
    })
}

pub const SWEEP_HEADER: [&str; 9] = [
    "value", "J_mean", "J_sd", "MDvar_mean", "MDvar_sd", "Tvar_mean", "Tvar_sd", "ShaP_mean", "ShaP_sd",
];

/// One row per grid point with per-metric mean and standard deviation.
pub fn write_sweep(outcome: &SweepOutcome, path: &Path) -> Result<(), DataError> {
    let mut text = SWEEP_HEADER.join(",");
    text.push('\n');
    for p in &outcome.points {
        let cells = [
            p.value,
            p.mean.objective,
            p.stddev.objective,
            p.mean.mdvar,
            p.stddev.mdvar,
            p.mean.tvar,
            p.stddev.tvar,
            p.mean.shap,
            p.stddev.shap,
        ];
        let row: Vec<String> = cells.iter().map(|&v| fmt_real(v)).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    dataio::write_text(&text, path)
}

/// Per-run metrics of every grid point, `index,value,<metrics header>`.
pub fn write_sweep_runs(outcome: &SweepOutcome, path: &Path) -> Result<(), DataError> {
    let mut text = String::from("index,value,");
    text.push_str(&dataio::METRICS_HEADER.join(","));
    text.push('\n');
    for (k, p) in outcome.points.iter().enumerate() {
        for r in &p.records {
            text.push_str(&format!(
                "{k},{},{},{},{},{},{},{},{}\n",
                fmt_real(p.value),
                r.run,
                r.seed,
                fmt_real(r.objective),
                fmt_real(r.mdvar),
                fmt_real(r.tvar),
                fmt_real(r.shap),
                r.iterations
            ));
        }
    }
    dataio::write_text(&text, path)
}

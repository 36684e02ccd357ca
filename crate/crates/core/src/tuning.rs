//! Parameter-sweep helpers: grids, min-max rescaling, the curve crossing
//! heuristic, and conversion of a relative penalty scale to absolute units.

use alloc::vec::Vec;

use crate::dissimilarity::{ta_unchecked, TuningWeights};
use crate::model::Dataset;
use crate::{Error, Result};

/// Number of points in `lo, lo + step, ..` up to `hi`, tolerating the usual
/// decimal rounding in `(hi - lo) / step`.
pub fn grid_len(lo: f64, hi: f64, step: f64) -> Result<usize> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidParameter { name: "range", value: hi - lo });
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter { name: "step", value: step });
    }
    Ok(libm::floor((hi - lo) / step + 1e-9) as usize + 1)
}

pub fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    let n = grid_len(lo, hi, step)?;
    Ok((0..n).map(|k| lo + k as f64 * step).collect())
}

/// Maps `values` affinely onto `[0, 1]`; `None` for constant or empty input.
pub fn min_max_rescale(values: &[f64]) -> Option<Vec<f64>> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) || !(hi - lo).is_finite() {
        return None;
    }
    Some(values.iter().map(|v| (v - lo) / (hi - lo)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Intersection {
    /// Curves meet at exactly these abscissae, in grid order.
    Found(Vec<f64>),
    /// At least one curve is constant over the sweep.
    Degenerate,
    /// The rescaled curves never meet.
    Disjoint,
}

impl Intersection {
    pub fn crossings(&self) -> &[f64] {
        match self {
            Intersection::Found(v) => v,
            _ => &[],
        }
    }
}

/// Rescales both curves to `[0, 1]` and locates where they cross, linearly
/// interpolating between grid points. A run of grid points where the curves
/// coincide counts once, at its midpoint.
pub fn intersections(x: &[f64], a: &[f64], b: &[f64]) -> Result<Intersection> {
    if a.len() != x.len() || b.len() != x.len() {
        return Err(Error::SizeMismatch {
            expected: x.len(),
            found: a.len().min(b.len()),
        });
    }
    let (Some(ra), Some(rb)) = (min_max_rescale(a), min_max_rescale(b)) else {
        return Ok(Intersection::Degenerate);
    };
    let diff: Vec<f64> = ra.iter().zip(&rb).map(|(p, q)| p - q).collect();

    let mut out = Vec::new();
    let mut k = 0;
    while k < diff.len() {
        if diff[k] == 0.0 {
            let start = k;
            while k + 1 < diff.len() && diff[k + 1] == 0.0 {
                k += 1;
            }
            out.push(0.5 * (x[start] + x[k]));
        } else if k + 1 < diff.len() && diff[k] * diff[k + 1] < 0.0 {
            let s = diff[k] / (diff[k] - diff[k + 1]);
            out.push(x[k] + s * (x[k + 1] - x[k]));
        }
        k += 1;
    }
    Ok(if out.is_empty() {
        Intersection::Disjoint
    } else {
        Intersection::Found(out)
    })
}

/// Mean TA dissimilarity over all unordered observation pairs.
pub fn mean_pairwise_ta(dataset: &Dataset, weights: TuningWeights) -> Result<f64> {
    let n = dataset.len();
    if n < 2 {
        return Err(Error::NotEnoughObservations { required: 2, found: n });
    }
    let obs = dataset.observations();
    let diam = dataset.diameters();
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += ta_unchecked(&obs[i], &obs[j], diam, weights);
        }
    }
    Ok(total / (n * (n - 1) / 2) as f64)
}

/// Converts a penalty scale given as a percentage of the mean pairwise
/// dissimilarity into absolute units.
pub fn beta_from_percentage(pct: f64, dataset: &Dataset, weights: TuningWeights) -> Result<f64> {
    if !(pct >= 0.0 && pct.is_finite()) {
        return Err(Error::InvalidParameter { name: "beta_pct", value: pct });
    }
    Ok(pct / 100.0 * mean_pairwise_ta(dataset, weights)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn grid_sizes() {
        assert_eq!(grid_len(0.0, 0.017, 0.0005).unwrap(), 35);
        assert_eq!(grid_len(0.1, 8.0, 0.1).unwrap(), 80);
        assert_eq!(grid_len(-1.0, 1.0, 0.1).unwrap(), 21);
        assert_eq!(grid_len(2.0, 2.0, 1.0).unwrap(), 1);
        assert!(grid_len(1.0, 0.0, 0.1).is_err());
        assert!(grid_len(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn monotone_curves_cross_once() {
        let x = grid(0.0, 1.0, 0.1).unwrap();
        let up: Vec<f64> = x.iter().map(|v| v * v).collect();
        let down: Vec<f64> = x.iter().map(|v| 3.0 - v).collect();
        let hits = intersections(&x, &up, &down).unwrap();
        assert_eq!(hits.crossings().len(), 1);
        let c = hits.crossings()[0];
        assert!(c > 0.5 && c < 0.7, "{c}");
    }

    #[test]
    fn interpolation_is_linear() {
        let x = [0.0, 1.0];
        let hits = intersections(&x, &[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(hits, Intersection::Found(vec![0.5]));
    }

    #[test]
    fn constant_curve_is_degenerate() {
        let x = [0.0, 1.0, 2.0];
        assert_eq!(
            intersections(&x, &[1.0, 1.0, 1.0], &[0.0, 1.0, 2.0]).unwrap(),
            Intersection::Degenerate
        );
        assert_eq!(
            intersections(&x, &[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0]).unwrap(),
            Intersection::Found(vec![1.0])
        );
    }
}

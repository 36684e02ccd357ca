//! Temporal-aware (TA) dissimilarity.
//!
//! Both components are squared distances normalized by the squared dataset
//! diameters, `e_d = ||a^d - b^d||² / Δx²` and `e_t = (a^t - b^t)² / Δt²`,
//! combined as `1 - (1 - γ_d·e_d)(1 - γ_t·e_t)`. The combination behaves like
//! a soft maximum: reaching the maximum on either axis saturates the measure.

use crate::{Error, Result};

/// Anything carrying a timestamp and a description vector.
pub trait TemporalPoint {
    fn timestamp(&self) -> f64;
    fn description(&self) -> &[f64];
}

impl<T: TemporalPoint + ?Sized> TemporalPoint for &T {
    fn timestamp(&self) -> f64 {
        (**self).timestamp()
    }

    fn description(&self) -> &[f64] {
        (**self).description()
    }
}

/// Borrowed `(timestamp, description)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointRef<'a> {
    pub timestamp: f64,
    pub description: &'a [f64],
}

impl TemporalPoint for PointRef<'_> {
    fn timestamp(&self) -> f64 {
        self.timestamp
    }

    fn description(&self) -> &[f64] {
        self.description
    }
}

/// Dataset diameters in both spaces. Squared values are kept so that the
/// diameter-realizing pair normalizes to exactly `1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diameters {
    pub dx_max: f64,
    pub dx_max_sq: f64,
    pub dt_max: f64,
    pub dt_max_sq: f64,
}

impl Diameters {
    pub fn new(dx_max: f64, dt_max: f64) -> Self {
        Self {
            dx_max,
            dx_max_sq: dx_max * dx_max,
            dt_max,
            dt_max_sq: dt_max * dt_max,
        }
    }

    /// `||Δd||² / Δx²` clamped to `[0, 1]`; `0` when the diameter vanishes.
    #[inline]
    pub fn normalized_description(&self, squared: f64) -> f64 {
        normalize(squared, self.dx_max_sq)
    }

    /// `Δt² / Δt_max²` clamped to `[0, 1]`; `0` when the range vanishes.
    #[inline]
    pub fn normalized_time(&self, dt: f64) -> f64 {
        normalize(dt * dt, self.dt_max_sq)
    }
}

#[inline]
fn normalize(squared: f64, diameter_sq: f64) -> f64 {
    if diameter_sq > 0.0 {
        (squared / diameter_sq).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Component weights `(γ_d, γ_t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningWeights {
    pub gamma_d: f64,
    pub gamma_t: f64,
}

impl TuningWeights {
    /// Equal weighting, `α = 0`.
    pub const BALANCED: Self = Self {
        gamma_d: 1.0,
        gamma_t: 1.0,
    };

    pub fn new(gamma_d: f64, gamma_t: f64) -> Result<Self> {
        for (name, v) in [("gamma_d", gamma_d), ("gamma_t", gamma_t)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter { name, value: v });
            }
        }
        Ok(Self { gamma_d, gamma_t })
    }

    /// Maps the slider `α ∈ [-1, 1]` onto the two weights. Negative values
    /// fade out the description component, positive values the temporal one.
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
            });
        }
        Ok(if alpha <= 0.0 {
            Self {
                gamma_d: 1.0 + alpha,
                gamma_t: 1.0,
            }
        } else {
            Self {
                gamma_d: 1.0,
                gamma_t: 1.0 - alpha,
            }
        })
    }
}

/// Free-function form of [`TuningWeights::from_alpha`].
pub fn weights_from_alpha(alpha: f64) -> Result<TuningWeights> {
    TuningWeights::from_alpha(alpha)
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Combines two normalized components. Callers guarantee `e_d, e_t ∈ [0, 1]`.
#[inline]
pub fn combine(e_d: f64, e_t: f64, weights: TuningWeights) -> f64 {
    1.0 - (1.0 - weights.gamma_d * e_d) * (1.0 - weights.gamma_t * e_t)
}

/// Normalized `(e_d, e_t)` between two points.
#[inline]
pub fn components<A: TemporalPoint, B: TemporalPoint>(a: &A, b: &B, diam: Diameters) -> (f64, f64) {
    let e_d = diam.normalized_description(squared_distance(a.description(), b.description()));
    let e_t = diam.normalized_time(a.timestamp() - b.timestamp());
    (e_d, e_t)
}

/// TA dissimilarity without input validation; used on the optimizer's hot path.
#[inline]
pub fn ta_unchecked<A: TemporalPoint, B: TemporalPoint>(
    a: &A,
    b: &B,
    diam: Diameters,
    weights: TuningWeights,
) -> f64 {
    let (e_d, e_t) = components(a, b, diam);
    combine(e_d, e_t, weights)
}

/// TA dissimilarity with dimension and finiteness checks.
pub fn ta_dissimilarity<A: TemporalPoint, B: TemporalPoint>(
    a: &A,
    b: &B,
    diam: Diameters,
    weights: TuningWeights,
) -> Result<f64> {
    if a.description().len() != b.description().len() {
        return Err(Error::DimensionMismatch {
            expected: a.description().len(),
            found: b.description().len(),
        });
    }
    if !is_finite_point(a) || !is_finite_point(b) {
        return Err(Error::NonFinite("dissimilarity input"));
    }
    Ok(ta_unchecked(a, b, diam, weights))
}

fn is_finite_point<P: TemporalPoint>(p: &P) -> bool {
    p.timestamp().is_finite() && p.description().iter().all(|v| v.is_finite())
}

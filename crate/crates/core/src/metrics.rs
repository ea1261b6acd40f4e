//! Distances and query regions.
//!
//! Three distances form the filter chain
//! `baseline_bound <= lower_bound <= true_distance`:
//! the true time-domain distance, the conjugate-symmetry lower bound that
//! double-weights every stored coefficient, and the unweighted truncated
//! distance of the original indexing method. Regions come in two shapes:
//! the baseline rectangle of side `2 * epsilon` and the tightened rectangle
//! of side `sqrt(2) * epsilon` that the double weighting licenses.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{SpectrumFeature, TimeSequence};

/// Which query-rectangle shape (and matching bound distance) to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionPolicy {
    /// Rectangle of side `2 * epsilon`; unweighted coefficient distances.
    Baseline,
    /// Rectangle of side `sqrt(2) * epsilon`; double-weighted distances.
    Symmetric,
}

impl RegionPolicy {
    /// Half-width of the query rectangle per dimension.
    pub fn half_width(self, epsilon: f64) -> f64 {
        match self {
            RegionPolicy::Baseline => epsilon,
            RegionPolicy::Symmetric => epsilon / SQRT_2,
        }
    }

    /// Weight applied to each squared coefficient difference by the
    /// matching bound distance.
    pub fn weight(self) -> f64 {
        match self {
            RegionPolicy::Baseline => 1.0,
            RegionPolicy::Symmetric => 2.0,
        }
    }

    /// Bound distance between two feature points in coordinate form.
    pub fn bound_distance(self, a: &[f64], b: &[f64]) -> f64 {
        let sq: f64 = a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let d = x - y;
                d * d
            })
            .sum();
        (self.weight() * sq).sqrt()
    }

    pub fn label(self) -> &'static str {
        match self {
            RegionPolicy::Baseline => "baseline",
            RegionPolicy::Symmetric => "symmetric",
        }
    }
}

impl std::fmt::Display for RegionPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for RegionPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "baseline" => Ok(RegionPolicy::Baseline),
            "symmetric" => Ok(RegionPolicy::Symmetric),
            other => Err(format!("unknown policy `{other}`")),
        }
    }
}

/// Axis-aligned query rectangle around a feature point.
///
/// Membership is closed: a point on the face of the rectangle counts as
/// inside. The rectangle is a necessary-condition filter, so keeping the
/// boundary can only add candidates, never lose answers.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryRegion {
    center: Vec<f64>,
    half_widths: Vec<f64>,
}

impl QueryRegion {
    pub fn new(center: Vec<f64>, half_widths: Vec<f64>) -> Result<Self> {
        if center.len() != half_widths.len() {
            return Err(Error::DimensionMismatch {
                left: center.len(),
                right: half_widths.len(),
            });
        }
        if let Some(&w) = half_widths.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::NegativeHalfWidth(w));
        }
        Ok(Self {
            center,
            half_widths,
        })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }

    pub fn low(&self, d: usize) -> f64 {
        self.center[d] - self.half_widths[d]
    }

    pub fn high(&self, d: usize) -> f64 {
        self.center[d] + self.half_widths[d]
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        debug_assert_eq!(point.len(), self.dim());
        self.center
            .iter()
            .zip(&self.half_widths)
            .zip(point)
            .all(|((c, w), p)| (p - c).abs() <= *w)
    }
}

/// Euclidean distance between two equal-length sequences in the time domain.
pub fn true_distance(x: &TimeSequence, y: &TimeSequence) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(euclidean(x.values(), y.values()))
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Thresholds must be positive finite numbers.
pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    let valid = epsilon.is_finite() && epsilon > 0.0;
    if !valid {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    Ok(())
}

fn check_k(a: &SpectrumFeature, b: &SpectrumFeature) -> Result<()> {
    if a.k != b.k {
        return Err(Error::CoefficientMismatch {
            left: a.k,
            right: b.k,
        });
    }
    Ok(())
}

/// `sqrt(sum_f 2 |X_f - Q_f|^2)` over the stored coefficients.
///
/// The factor 2 accounts for the unstored conjugate partners, so this is
/// still a lower bound on the true distance of the underlying normalized
/// sequences.
pub fn lower_bound_distance(a: &SpectrumFeature, b: &SpectrumFeature) -> Result<f64> {
    check_k(a, b)?;
    Ok(RegionPolicy::Symmetric.bound_distance(&a.coords, &b.coords))
}

/// `sqrt(sum_f |X_f - Q_f|^2)`: the unweighted truncated distance used by
/// the original method.
pub fn baseline_bound_distance(a: &SpectrumFeature, b: &SpectrumFeature) -> Result<f64> {
    check_k(a, b)?;
    Ok(RegionPolicy::Baseline.bound_distance(&a.coords, &b.coords))
}

/// Query rectangle around a feature point for sequences indexed in normal
/// form (no `X_0` dimension exists in the index).
pub fn make_region(q: &SpectrumFeature, epsilon: f64, policy: RegionPolicy) -> Result<QueryRegion> {
    check_epsilon(epsilon)?;
    let hw = policy.half_width(epsilon);
    QueryRegion::new(q.coords.clone(), vec![hw; q.coords.len()])
}

/// Region shape for indexes over unnormalized sequences, where the first
/// dimension holds the real coefficient `X_0`. That coefficient has no
/// conjugate partner, so its side stays `2 * epsilon` under both policies.
pub fn make_region_unnormalized(
    center: &[f64],
    epsilon: f64,
    policy: RegionPolicy,
) -> Result<QueryRegion> {
    check_epsilon(epsilon)?;
    let mut half_widths = vec![policy.half_width(epsilon); center.len()];
    if let Some(first) = half_widths.first_mut() {
        *first = epsilon;
    }
    QueryRegion::new(center.to_vec(), half_widths)
}

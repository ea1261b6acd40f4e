//! Closed-form query-selectivity model and its Monte Carlo validator.
//!
//! Feature points of sequences with an `O(F^{-2b})` energy spectrum spread
//! over a box `R` whose i-th coefficient plane is a square of side
//! `i^{-b}`. The selectivity of a query rectangle of side `s` is the
//! fraction of `R` it overlaps:
//!
//! `S(b, k, s) = prod_{i=1..k} (min(i^{-b}, s) * i^b)^2`
//!
//! evaluated with the rectangle centered in `R` (the worst-case query).
//! Centering the rectangle on a corner instead (the best case) halves the
//! side that stays inside, so the best case is `S(b, k, s/2)` for the same
//! rectangle.

use std::f64::consts::SQRT_2;
use std::io::Write;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Inputs to the closed-form model: spectral exponent, stored coefficient
/// count, and the query-rectangle side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectivityParams {
    pub b: f64,
    pub k: usize,
    pub side: f64,
}

impl SelectivityParams {
    pub fn new(b: f64, k: usize, side: f64) -> Result<Self> {
        if !b.is_finite() || b < 0.5 {
            return Err(Error::InvalidSelectivity(format!(
                "spectral exponent must be at least 0.5, got {b}"
            )));
        }
        if k == 0 {
            return Err(Error::InvalidSelectivity(
                "coefficient count must be at least 1".into(),
            ));
        }
        let side_ok = side.is_finite() && side > 0.0;
        if !side_ok {
            return Err(Error::InvalidSelectivity(format!(
                "rectangle side must be positive, got {side}"
            )));
        }
        Ok(Self { b, k, side })
    }
}

/// The data bounding box `R`: one square of side `i^{-b}` per stored
/// coefficient, each occupying two dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBoxR {
    sides: Vec<f64>,
}

impl BoundingBoxR {
    pub fn new(b: f64, k: usize) -> Self {
        let sides = (1..=k).map(|i| (i as f64).powf(-b)).collect();
        Self { sides }
    }

    /// Side of the i-th coefficient square, `i` in `1..=k`.
    pub fn side(&self, i: usize) -> f64 {
        self.sides[i - 1]
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn dim(&self) -> usize {
        2 * self.sides.len()
    }
}

/// Worst-case query selectivity of a rectangle of side `p.side`.
pub fn selectivity(p: &SelectivityParams) -> Result<f64> {
    SelectivityParams::new(p.b, p.k, p.side)?;
    let r = BoundingBoxR::new(p.b, p.k);
    let mut product = 1.0;
    for i in 1..=p.k {
        let extent = r.side(i);
        let term = extent.min(p.side) / extent;
        product *= term * term;
    }
    Ok(product)
}

/// Selectivity ratios of the tightened rectangle to the baseline one, for
/// the worst-case (centered) and best-case (corner) query positions.
pub fn reduction(b: f64, k: usize, epsilon: f64) -> Result<(f64, f64)> {
    let in_range = epsilon > 0.0 && epsilon <= 1.0;
    if !in_range {
        return Err(Error::InvalidSelectivity(format!(
            "threshold must lie in (0, 1], got {epsilon}"
        )));
    }
    let s = |side: f64| selectivity(&SelectivityParams { b, k, side });
    let worst = s(SQRT_2 * epsilon)? / s(2.0 * epsilon)?;
    let best = s(epsilon / SQRT_2)? / s(epsilon)?;
    Ok((worst, best))
}

/// Where the query rectangle sits relative to `R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryPosition {
    /// Centered in `R`: maximal overlap, most index work.
    Worst,
    /// Centered on the origin corner of `R`: minimal overlap.
    Best,
}

/// A sampled selectivity estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Estimate the selectivity by drawing uniform points in `R` and counting
/// how many fall inside the query rectangle. Deterministic per seed.
pub fn monte_carlo_selectivity(
    b: f64,
    k: usize,
    side: f64,
    position: QueryPosition,
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    SelectivityParams::new(b, k, side)?;
    if samples < 10_000 {
        return Err(Error::InvalidSelectivity(format!(
            "need at least 10^4 samples, got {samples}"
        )));
    }
    let r = BoundingBoxR::new(b, k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists: Vec<Uniform<f64>> = r
        .sides()
        .iter()
        .map(|&extent| Uniform::new(0.0, extent))
        .collect();
    let half = side / 2.0;

    let mut hits = 0usize;
    for _ in 0..samples {
        let mut inside = true;
        for (i, dist) in dists.iter().enumerate() {
            let x = dist.sample(&mut rng);
            let center = match position {
                QueryPosition::Worst => r.sides()[i] / 2.0,
                QueryPosition::Best => 0.0,
            };
            // each coefficient square spans two identical dimensions
            let y = dist.sample(&mut rng);
            if (x - center).abs() >= half || (y - center).abs() >= half {
                inside = false;
            }
        }
        if inside {
            hits += 1;
        }
    }

    let estimate = hits as f64 / samples as f64;
    let std_error = (estimate * (1.0 - estimate) / samples as f64).sqrt();
    Ok(MonteCarloEstimate {
        estimate,
        std_error,
        samples,
    })
}

/// One row of the selectivity-vs-threshold table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub epsilon: f64,
    /// Worst case, baseline rectangle of side `2 * epsilon`.
    pub worst_baseline: f64,
    /// Worst case, tightened rectangle of side `sqrt(2) * epsilon`.
    pub worst_symmetric: f64,
    /// Best case, baseline rectangle.
    pub best_baseline: f64,
    /// Best case, tightened rectangle.
    pub best_symmetric: f64,
}

/// Evaluate both rectangles at both query positions over a threshold grid.
pub fn selectivity_curve(b: f64, k: usize, eps_grid: &[f64]) -> Result<Vec<CurveRow>> {
    let mut rows = Vec::with_capacity(eps_grid.len());
    for &epsilon in eps_grid {
        let in_range = epsilon > 0.0 && epsilon <= 1.0;
        if !in_range {
            return Err(Error::InvalidSelectivity(format!(
                "grid threshold must lie in (0, 1], got {epsilon}"
            )));
        }
        let s = |side: f64| selectivity(&SelectivityParams { b, k, side });
        rows.push(CurveRow {
            epsilon,
            worst_baseline: s(2.0 * epsilon)?,
            worst_symmetric: s(SQRT_2 * epsilon)?,
            best_baseline: s(epsilon)?,
            best_symmetric: s(epsilon / SQRT_2)?,
        });
    }
    Ok(rows)
}

/// Write a curve as CSV with a header row.
pub fn write_curve_csv<W: Write>(rows: &[CurveRow], mut w: W) -> Result<()> {
    writeln!(
        w,
        "epsilon,worst_baseline,worst_symmetric,best_baseline,best_symmetric"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.epsilon, r.worst_baseline, r.worst_symmetric, r.best_baseline, r.best_symmetric
        )?;
    }
    Ok(())
}

//! Independent oracles for the integration suites: a direct O(n^2)
//! transform, hand-rolled normalization, and brute-force query scans.
//! Nothing here touches the library's transform or index paths.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Direct evaluation of the unitary transform, one summation per
/// coefficient. The twiddle exponent is reduced mod n before the cosine to
/// keep the angle small.
pub fn naive_dft(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let scale = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|f| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (t, &x) in values.iter().enumerate() {
                let angle = -2.0 * PI * ((t * f) % n) as f64 / n as f64;
                acc += x * Complex64::new(angle.cos(), angle.sin());
            }
            acc * scale
        })
        .collect()
}

/// Mean-0, population-std-1 copy of the values. Panics on constant input;
/// callers pick non-degenerate data.
pub fn oracle_normalize(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    assert!(std > 0.0, "oracle got a constant sequence");
    values.iter().map(|v| (v - mean) / std).collect()
}

pub fn oracle_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Normalized time-domain distance computed entirely with oracle code.
pub fn oracle_normalized_distance(a: &[f64], b: &[f64]) -> f64 {
    oracle_euclidean(&oracle_normalize(a), &oracle_normalize(b))
}

/// Random sequences with uniform samples in [-amp, amp].
pub fn random_sequences(count: usize, length: usize, amp: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(-amp, amp);
    (0..count)
        .map(|_| (0..length).map(|_| dist.sample(&mut rng)).collect())
        .collect()
}

/// Random points in the unit cube of the given dimension.
pub fn random_points(count: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    random_sequences(count, dim, 1.0, seed)
}

/// ids sorted by (distance, id) with distance strictly below `eps`.
pub fn brute_range(
    data: &[(String, Vec<f64>)],
    q: &[f64],
    eps: f64,
    dist: impl Fn(&[f64], &[f64]) -> f64,
) -> Vec<(String, f64)> {
    let mut hits: Vec<(String, f64)> = data
        .iter()
        .map(|(id, v)| (id.clone(), dist(q, v)))
        .filter(|(_, d)| *d < eps)
        .collect();
    hits.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    hits
}

/// Top-k by (distance, id).
pub fn brute_top_k(
    data: &[(String, Vec<f64>)],
    q: &[f64],
    k: usize,
    dist: impl Fn(&[f64], &[f64]) -> f64,
) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = data
        .iter()
        .map(|(id, v)| (id.clone(), dist(q, v)))
        .collect();
    all.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// Unordered pairs (id_a < id_b) within distance `eps`, nested loop.
pub fn brute_pairs(
    data: &[(String, Vec<f64>)],
    eps: f64,
    dist: impl Fn(&[f64], &[f64]) -> f64,
) -> Vec<(String, String, f64)> {
    let mut pairs = Vec::new();
    for (i, (ida, va)) in data.iter().enumerate() {
        for (idb, vb) in &data[i + 1..] {
            let d = dist(va, vb);
            if d < eps {
                let (lo, hi) = if ida <= idb { (ida, idb) } else { (idb, ida) };
                pairs.push((lo.clone(), hi.clone(), d));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp(&y.1)));
    pairs
}

/// Least-squares slope of y on x.
pub fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

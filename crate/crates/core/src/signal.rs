//! Fourier analysis of time sequences: the unitary DFT, signal energy,
//! normal-form scaling, and extraction of the truncated coefficient
//! vectors that get indexed.
//!
//! The transform convention is `X_f = n^{-1/2} * sum_t x_t e^{-j 2 pi t f / n}`,
//! which preserves energy, so Euclidean distance in the frequency domain
//! equals Euclidean distance in the time domain.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A raw real-valued sequence with an identity.
///
/// Construction validates the samples, so every `TimeSequence` in flight
/// has at least two finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSequence {
    id: String,
    values: Vec<f64>,
}

impl TimeSequence {
    pub fn new(id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if values.len() < 2 {
            return Err(Error::TooShort {
                id,
                n: values.len(),
                min: 2,
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample { id, index });
        }
        Ok(Self { id, values })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // n >= 2 by construction
    }

    /// Copy of the first `n` samples under the same id.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n > self.len() {
            return Err(Error::TooShort {
                id: self.id.clone(),
                n: self.len(),
                min: n,
            });
        }
        TimeSequence::new(self.id.clone(), self.values[..n].to_vec())
    }
}

/// Mean and population standard deviation removed from a sequence when it
/// was brought to normal form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub mean: f64,
    pub std: f64,
}

/// Full complex spectrum of a sequence, `X_0 .. X_{n-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Spectral energy `sum_f |X_f|^2`.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// The indexed point: real/imaginary parts of `X_1 .. X_k` of the
/// normalized sequence, flattened to `2k` reals, plus the mean/std sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumFeature {
    pub id: String,
    pub k: usize,
    pub coords: Vec<f64>,
    pub norm: NormalizationParams,
}

impl SpectrumFeature {
    /// Amplitude of the i-th stored coefficient, i in `1..=k`.
    pub fn amplitude(&self, i: usize) -> f64 {
        let re = self.coords[2 * (i - 1)];
        let im = self.coords[2 * (i - 1) + 1];
        re.hypot(im)
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Forward DFT with the energy-preserving `1/sqrt(n)` scale.
pub fn dft(seq: &TimeSequence) -> Spectrum {
    let n = seq.len();
    let mut buf: Vec<Complex64> = seq
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    plan(n, false).process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    for c in &mut buf {
        *c *= scale;
    }
    Spectrum { coeffs: buf }
}

/// Inverse of [`dft`]: recovers the (complex) time-domain samples.
pub fn idft(spectrum: &Spectrum) -> Vec<Complex64> {
    let n = spectrum.len();
    let mut buf = spectrum.coeffs.clone();
    plan(n, true).process(&mut buf);
    let scale = 1.0 / (n as f64).sqrt();
    for c in &mut buf {
        *c *= scale;
    }
    buf
}

/// Energy of a real signal, `sum_t x_t^2`.
pub fn energy(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum()
}

/// Energy of a complex signal, `sum_t |v_t|^2`.
pub fn complex_energy(values: &[Complex64]) -> f64 {
    values.iter().map(|c| c.norm_sqr()).sum()
}

/// Shift and scale a sequence to mean 0, population standard deviation 1.
///
/// Constant sequences have no normal form and are rejected.
pub fn normalize(seq: &TimeSequence) -> Result<(TimeSequence, NormalizationParams)> {
    let n = seq.len() as f64;
    let mean = seq.values().iter().sum::<f64>() / n;
    let var = seq
        .values()
        .iter()
        .map(|v| {
            let d = v - mean;
            d * d
        })
        .sum::<f64>()
        / n;
    let std = var.sqrt();
    if std == 0.0 {
        return Err(Error::ZeroStd {
            id: seq.id().to_string(),
        });
    }
    let values = seq.values().iter().map(|v| (v - mean) / std).collect();
    let normalized = TimeSequence::new(seq.id(), values)?;
    Ok((normalized, NormalizationParams { mean, std }))
}

/// Normalize `seq`, transform it, and keep the real/imaginary parts of
/// `X_1 .. X_k` as the indexable feature point.
///
/// `X_0` is zero after normalization and is not stored. The precondition
/// `2k + 1 <= n` keeps every stored coefficient strictly below `n/2`, so
/// each one has a distinct conjugate partner in the upper half of the
/// spectrum.
pub fn extract_features(seq: &TimeSequence, k: usize) -> Result<SpectrumFeature> {
    if k == 0 {
        return Err(Error::ZeroCoefficients);
    }
    let n = seq.len();
    if 2 * k + 1 > n {
        return Err(Error::TooManyCoefficients { k, n });
    }
    let (normalized, norm) = normalize(seq)?;
    let spectrum = dft(&normalized);
    let mut coords = Vec::with_capacity(2 * k);
    for f in 1..=k {
        coords.push(spectrum.coeffs[f].re);
        coords.push(spectrum.coeffs[f].im);
    }
    Ok(SpectrumFeature {
        id: seq.id().to_string(),
        k,
        coords,
        norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(values: &[f64]) -> TimeSequence {
        TimeSequence::new("t", values.to_vec()).unwrap()
    }

    #[test]
    fn rejects_short_and_non_finite_input() {
        assert!(matches!(
            TimeSequence::new("s", vec![1.0]),
            Err(Error::TooShort { n: 1, .. })
        ));
        let err = TimeSequence::new("s", vec![0.0, 1.0, f64::NAN, 2.0]).unwrap_err();
        match err {
            Error::NonFiniteSample { index, .. } => assert_eq!(index, 2),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn constant_sequence_concentrates_energy_in_dc() {
        let x = dft(&seq(&[1.0, 1.0, 1.0, 1.0]));
        assert!((x.coeffs[0] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        for f in 1..4 {
            assert!(x.coeffs[f].norm() < 1e-12);
        }
    }

    #[test]
    fn unit_impulse_has_flat_spectrum() {
        let x = dft(&seq(&[1.0, 0.0, 0.0, 0.0]));
        for f in 0..4 {
            assert!((x.coeffs[f] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn energy_of_reals_and_complex_moduli() {
        assert_eq!(energy(&[0.0, 1.0, 0.0, -1.0]), 2.0);
        let spectral = vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        assert_eq!(complex_energy(&spectral), 4.0);
    }

    #[test]
    fn normalize_hand_case() {
        let (normed, params) = normalize(&seq(&[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert!((params.mean - 2.5).abs() < 1e-12);
        assert!((params.std - 1.25f64.sqrt()).abs() < 1e-12);
        let expected = [-1.341641, -0.447214, 0.447214, 1.341641];
        for (v, e) in normed.values().iter().zip(expected) {
            assert!((v - e).abs() < 1e-6);
        }
    }

    #[test]
    fn normalize_rejects_constant_sequence() {
        assert!(matches!(
            normalize(&seq(&[5.0, 5.0, 5.0, 5.0])),
            Err(Error::ZeroStd { .. })
        ));
    }

    #[test]
    fn normalize_is_idempotent() {
        let (once, _) = normalize(&seq(&[3.0, -1.0, 4.0, 1.0, 5.0])).unwrap();
        let (twice, params) = normalize(&once).unwrap();
        assert!(params.mean.abs() < 1e-12);
        assert!((params.std - 1.0).abs() < 1e-12);
        for (a, b) in once.values().iter().zip(twice.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn feature_extraction_checks_k_against_length() {
        let s = seq(&[0.0, 1.0, 0.0, -1.0]);
        assert!(matches!(
            extract_features(&s, 2),
            Err(Error::TooManyCoefficients { k: 2, n: 4 })
        ));
        assert!(matches!(
            extract_features(&s, 0),
            Err(Error::ZeroCoefficients)
        ));
        assert!(matches!(
            extract_features(&seq(&[2.0, 2.0, 2.0, 2.0]), 1),
            Err(Error::ZeroStd { .. })
        ));
    }

    #[test]
    fn features_are_affine_invariant() {
        let a = seq(&[3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0]);
        let shifted: Vec<f64> = a.values().iter().map(|v| 10.0 * v - 7.0).collect();
        let b = TimeSequence::new("b", shifted).unwrap();
        let fa = extract_features(&a, 3).unwrap();
        let fb = extract_features(&b, 3).unwrap();
        for (x, y) in fa.coords.iter().zip(&fb.coords) {
            assert!((x - y).abs() < 1e-9);
        }
        assert!((fb.norm.mean - (10.0 * fa.norm.mean - 7.0)).abs() < 1e-9);
        assert!((fb.norm.std - 10.0 * fa.norm.std).abs() < 1e-9);
    }

    #[test]
    fn truncated_energy_never_exceeds_normalized_energy() {
        let s = seq(&[3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0]);
        let f = extract_features(&s, 4).unwrap();
        assert_eq!(f.coords.len(), 8);
        let stored: f64 = f.coords.iter().map(|c| c * c).sum();
        // normalized energy is exactly n under population std
        assert!(stored <= s.len() as f64 + 1e-9);
    }
}

//! Synthetic sequence generators and CSV ingestion.
//!
//! Two generators: bounded-step random walks (brown-noise-like data, the
//! class stock prices fall into) and spectral noise with a prescribed
//! amplitude law `|X_f| ~ f^{-b}`. Both are deterministic per seed
//! (ChaCha8 stream).

use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signal::{idft, Spectrum, TimeSequence};

/// What to generate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GenKind {
    /// `x_t = x_{t-1} + z_t` with `z_t` uniform on `[-step_bound, step_bound]`.
    RandomWalk { step_bound: f64 },
    /// Amplitude spectrum `f^{-exponent}` with uniform random phases.
    SpectralNoise { exponent: f64 },
}

/// Generator configuration; `seed` makes the output reproducible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub count: usize,
    pub length: usize,
    pub seed: u64,
}

pub const DEFAULT_STEP_BOUND: f64 = 500.0;

impl GenSpec {
    fn validate(&self) -> Result<()> {
        if self.count < 1 {
            return Err(Error::InvalidGenSpec("count must be at least 1".into()));
        }
        if self.length < 4 {
            return Err(Error::InvalidGenSpec("length must be at least 4".into()));
        }
        match self.kind {
            GenKind::RandomWalk { step_bound } => {
                let bound_ok = step_bound.is_finite() && step_bound > 0.0;
                if !bound_ok {
                    return Err(Error::InvalidGenSpec(format!(
                        "step bound must be positive, got {step_bound}"
                    )));
                }
            }
            GenKind::SpectralNoise { exponent } => {
                if exponent < 0.0 || !exponent.is_finite() {
                    return Err(Error::InvalidGenSpec(format!(
                        "spectral exponent must be non-negative, got {exponent}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Dispatch on `spec.kind`.
pub fn generate(spec: &GenSpec) -> Result<Vec<TimeSequence>> {
    match spec.kind {
        GenKind::RandomWalk { .. } => random_walk(spec),
        GenKind::SpectralNoise { .. } => spectral_noise(spec),
    }
}

/// Bounded-step random walks, `x_0 = z_0`.
pub fn random_walk(spec: &GenSpec) -> Result<Vec<TimeSequence>> {
    spec.validate()?;
    let GenKind::RandomWalk { step_bound } = spec.kind else {
        return Err(Error::InvalidGenSpec("spec kind is not random_walk".into()));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let step = Uniform::new_inclusive(-step_bound, step_bound);
    let mut out = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let mut values = Vec::with_capacity(spec.length);
        let mut x = 0.0;
        for _ in 0..spec.length {
            x += step.sample(&mut rng);
            values.push(x);
        }
        out.push(TimeSequence::new(format!("rw-{i:05}"), values)?);
    }
    Ok(out)
}

/// Sequences whose spectrum follows the amplitude law `|X_f| = f^{-b}` for
/// the lower half of the frequencies, with conjugate-symmetric completion
/// and `X_0 = 0`, brought back to the time domain.
pub fn spectral_noise(spec: &GenSpec) -> Result<Vec<TimeSequence>> {
    spec.validate()?;
    let GenKind::SpectralNoise { exponent } = spec.kind else {
        return Err(Error::InvalidGenSpec(
            "spec kind is not spectral_noise".into(),
        ));
    };
    let n = spec.length;
    let half = (n - 1).div_ceil(2).max(1);
    let nyquist = n / 2; // only a distinct frequency for even n
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let phase = Uniform::new(0.0, TAU);
    let mut out = Vec::with_capacity(spec.count);

    for i in 0..spec.count {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for f in 1..=half {
            let amp = (f as f64).powf(-exponent);
            coeffs[f] = Complex64::from_polar(amp, phase.sample(&mut rng));
            coeffs[n - f] = coeffs[f].conj();
        }
        if n.is_multiple_of(2) {
            // the Nyquist coefficient is its own conjugate partner and must
            // stay real
            let amp = (nyquist as f64).powf(-exponent);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            coeffs[nyquist] = Complex64::new(sign * amp, 0.0);
        }
        let time = idft(&Spectrum { coeffs });
        let max_residue = time.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        assert!(
            max_residue < 1e-9,
            "imaginary residue {max_residue} after symmetric completion"
        );
        let values = time.iter().map(|c| c.re).collect();
        out.push(TimeSequence::new(format!("sn-{i:05}"), values)?);
    }
    Ok(out)
}

/// On-disk arrangement of a sequence file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvLayout {
    /// One sequence per row: `id,v1,v2,...`
    Row,
    /// One sample per row: `id,t,value`
    Long,
}

impl std::str::FromStr for CsvLayout {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "row" => Ok(CsvLayout::Row),
            "long" => Ok(CsvLayout::Long),
            other => Err(format!("unknown layout `{other}`")),
        }
    }
}

/// Length policy applied after parsing.
#[derive(Debug, Clone, Copy, Default)]
pub struct IngestOptions {
    /// Sequences shorter than this are rejected outright.
    pub min_length: Option<usize>,
    /// Cut every sequence down to the common minimum (or to `min_length`
    /// when set). Without it, ragged inputs are an error.
    pub truncate_to_min: bool,
}

/// Parse a sequence file. All values are 64-bit floats; the text form
/// written by [`export_csv`] round-trips them bit-exactly.
pub fn ingest_csv(
    path: &Path,
    layout: CsvLayout,
    opts: &IngestOptions,
) -> Result<Vec<TimeSequence>> {
    let reader = BufReader::new(File::open(path)?);
    let mut seqs = match layout {
        CsvLayout::Row => parse_rows(reader)?,
        CsvLayout::Long => parse_long(reader)?,
    };

    if let Some(min) = opts.min_length {
        for s in &seqs {
            if s.len() < min {
                return Err(Error::BelowMinLength {
                    id: s.id().to_string(),
                    n: s.len(),
                    min,
                });
            }
        }
    }
    if seqs.is_empty() {
        return Ok(seqs);
    }

    let shortest = seqs.iter().map(|s| s.len()).min().unwrap();
    let target = opts.min_length.unwrap_or(shortest);
    if opts.truncate_to_min {
        seqs = seqs
            .into_iter()
            .map(|s| {
                if s.len() > target {
                    s.truncated(target)
                } else {
                    Ok(s)
                }
            })
            .collect::<Result<Vec<_>>>()?;
    } else if let Some(odd) = seqs.iter().find(|s| s.len() != seqs[0].len()) {
        return Err(Error::RaggedLengths {
            id: odd.id().to_string(),
            left: seqs[0].len(),
            right: odd.len(),
        });
    }
    Ok(seqs)
}

fn parse_field(field: &str, line: u64) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|e| Error::CsvFormat {
        line,
        msg: format!("bad value `{}`: {e}", field.trim()),
    })
}

fn parse_rows<R: BufRead>(reader: R) -> Result<Vec<TimeSequence>> {
    let mut seqs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let id = fields
            .next()
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::CsvFormat {
                line: line_no,
                msg: "missing sequence id".into(),
            })?;
        let values = fields
            .map(|f| parse_field(f, line_no))
            .collect::<Result<Vec<f64>>>()?;
        seqs.push(TimeSequence::new(id, values)?);
    }
    Ok(seqs)
}

fn parse_long<R: BufRead>(reader: R) -> Result<Vec<TimeSequence>> {
    // (t, value) samples per id, ids in first-appearance order
    let mut order: Vec<String> = Vec::new();
    let mut samples: std::collections::HashMap<String, Vec<(usize, f64, u64)>> =
        std::collections::HashMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::CsvFormat {
                line: line_no,
                msg: format!("expected `id,t,value`, found {} fields", fields.len()),
            });
        }
        let id = fields[0].trim();
        if id.is_empty() {
            return Err(Error::CsvFormat {
                line: line_no,
                msg: "missing sequence id".into(),
            });
        }
        let t: usize = fields[1].trim().parse().map_err(|e| Error::CsvFormat {
            line: line_no,
            msg: format!("bad time index `{}`: {e}", fields[1].trim()),
        })?;
        let value = parse_field(fields[2], line_no)?;
        if !samples.contains_key(id) {
            order.push(id.to_string());
        }
        samples
            .entry(id.to_string())
            .or_default()
            .push((t, value, line_no));
    }

    let mut seqs = Vec::with_capacity(order.len());
    for id in order {
        let mut rows = samples.remove(&id).unwrap();
        rows.sort_by_key(|&(t, _, _)| t);
        for w in rows.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::CsvFormat {
                    line: w[1].2,
                    msg: format!("duplicate time index {} for id `{id}`", w[1].0),
                });
            }
        }
        let values = rows.into_iter().map(|(_, v, _)| v).collect();
        seqs.push(TimeSequence::new(id, values)?);
    }
    Ok(seqs)
}

/// Write sequences in either layout; mirrors [`ingest_csv`].
pub fn export_csv(seqs: &[TimeSequence], path: &Path, layout: CsvLayout) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for s in seqs {
        match layout {
            CsvLayout::Row => {
                write!(w, "{}", s.id())?;
                for v in s.values() {
                    write!(w, ",{v}")?;
                }
                writeln!(w)?;
            }
            CsvLayout::Long => {
                for (t, v) in s.values().iter().enumerate() {
                    writeln!(w, "{},{t},{v}", s.id())?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

//! Sweep harness: vary threshold, coefficient count, dataset size, or
//! sequence length, and report mean filter costs per policy with the
//! symmetric-vs-baseline candidate reduction.
//!
//! Query sequences are drawn from the dataset with a seeded sampler, and
//! the same draws are replayed for every policy, so the per-row costs are
//! paired. Everything except the elapsed-time column is reproducible for
//! a fixed seed.

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specsim::datagen::{generate, ingest_csv, CsvLayout, GenKind, GenSpec, IngestOptions};
use specsim::engine::Engine;
use specsim::metrics::RegionPolicy;
use specsim::signal::TimeSequence;

use crate::{Kind, PolicyArg};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    Threshold,
    K,
    Count,
    Length,
}

impl Sweep {
    fn label(self) -> &'static str {
        match self {
            Sweep::Threshold => "threshold",
            Sweep::K => "k",
            Sweep::Count => "count",
            Sweep::Length => "length",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Range,
    Join,
    Knn,
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    sweep: Sweep,

    /// Dataset CSV; mutually exclusive with --gen
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value = "row")]
    layout: CsvLayout,
    /// Generate the dataset instead of reading one
    #[arg(long, value_enum)]
    gen: Option<Kind>,
    #[arg(long, default_value_t = 1000)]
    count: usize,
    #[arg(long, default_value_t = 128)]
    length: usize,
    #[arg(long, default_value_t = specsim::datagen::DEFAULT_STEP_BOUND)]
    step_bound: f64,
    #[arg(long, default_value_t = 1.0)]
    exponent: f64,

    /// Stored coefficients (fixed except in the k sweep)
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 16)]
    fanout: usize,
    #[arg(long, value_enum, default_value_t = Mode::Range)]
    mode: Mode,
    /// Fixed threshold multiple of MaxAmp for the k/count/length sweeps
    /// (defaults: 0.95 for range and knn, 0.32 for join)
    #[arg(long)]
    eps_maxamp: Option<f64>,
    /// Threshold sweep points, as multiples of MaxAmp
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.5,0.7,0.95")]
    thresholds: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    k_values: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "100,250,500,1000")]
    count_values: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "128,256,512")]
    length_values: Vec<usize>,

    /// Queries per sweep point (joins always run once)
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 10)]
    k_out: usize,
    #[arg(long, value_enum, default_value_t = PolicyArg::Both)]
    policies: PolicyArg,
    /// Cap on dataset size for join sweeps
    #[arg(long, default_value_t = 2000)]
    max_join: usize,
    #[arg(long, env = "SPECSIM_SEED", default_value_t = 0)]
    seed: u64,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

pub const BENCH_CSV_HEADER: &str = "sweep,value,policy,reps,mean_candidates,mean_nodes_touched,\
                                    mean_answers,mean_elapsed_micros,candidate_reduction_pct,status";

#[derive(Default, Clone)]
struct PointCost {
    candidates: f64,
    nodes: f64,
    answers: f64,
    elapsed_micros: f64,
    reps: usize,
}

pub fn run(args: BenchArgs) -> anyhow::Result<()> {
    let mut dataset = load_dataset(&args)?;
    if dataset.is_empty() {
        bail!("empty dataset");
    }
    if args.mode == Mode::Join && dataset.len() > args.max_join {
        eprintln!(
            "join sweep capped at {} of {} sequences (--max-join)",
            args.max_join,
            dataset.len()
        );
        dataset.truncate(args.max_join);
    }

    let mut rows = vec![BENCH_CSV_HEADER.to_string()];
    match args.sweep {
        Sweep::Threshold => sweep_threshold(&args, &dataset, &mut rows)?,
        Sweep::K => sweep_k(&args, &dataset, &mut rows)?,
        Sweep::Count => sweep_count(&args, &dataset, &mut rows)?,
        Sweep::Length => sweep_length(&args, &dataset, &mut rows)?,
    }

    match &args.out {
        Some(path) => {
            let mut file = File::create(path)?;
            for row in &rows {
                writeln!(file, "{row}")?;
            }
            println!("wrote {} rows to {}", rows.len() - 1, path.display());
        }
        None => {
            for row in &rows {
                println!("{row}");
            }
        }
    }
    Ok(())
}

fn load_dataset(args: &BenchArgs) -> anyhow::Result<Vec<TimeSequence>> {
    match (&args.data, args.gen) {
        (Some(path), None) => {
            let opts = IngestOptions {
                min_length: None,
                truncate_to_min: true,
            };
            ingest_csv(path, args.layout, &opts)
                .with_context(|| format!("reading {}", path.display()))
        }
        (None, Some(kind)) => {
            let kind = match kind {
                Kind::RandomWalk => GenKind::RandomWalk {
                    step_bound: args.step_bound,
                },
                Kind::SpectralNoise => GenKind::SpectralNoise {
                    exponent: args.exponent,
                },
            };
            // a length sweep truncates, so generate at the longest point
            let length = if args.sweep == Sweep::Length {
                args.length_values
                    .iter()
                    .copied()
                    .max()
                    .unwrap_or(args.length)
                    .max(args.length)
            } else {
                args.length
            };
            Ok(generate(&GenSpec {
                kind,
                count: args.count,
                length,
                seed: args.seed,
            })?)
        }
        _ => bail!("provide exactly one of --data and --gen"),
    }
}

fn default_eps_maxamp(args: &BenchArgs) -> f64 {
    args.eps_maxamp.unwrap_or(match args.mode {
        Mode::Join => 0.32,
        Mode::Range | Mode::Knn => 0.95,
    })
}

fn skipped_row(rows: &mut Vec<String>, sweep: Sweep, value: impl std::fmt::Display, reason: &str) {
    rows.push(format!(
        "{},{value},-,0,,,,,,skipped: {reason}",
        sweep.label()
    ));
}

/// Draw `reps` query sequences from the engine's store, seeded.
fn draw_queries(engine: &Engine, reps: usize, seed: u64) -> Vec<TimeSequence> {
    let ids: Vec<&String> = engine.store().ids().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..reps)
        .map(|_| {
            let id = ids.choose(&mut rng).expect("non-empty store");
            engine.store().get(id).expect("stored id").sequence.clone()
        })
        .collect()
}

fn run_point(
    args: &BenchArgs,
    engine: &Engine,
    epsilon: f64,
    policy: RegionPolicy,
    queries: &[TimeSequence],
) -> anyhow::Result<PointCost> {
    let mut cost = PointCost::default();
    match args.mode {
        Mode::Range => {
            for q in queries {
                let report = engine.range_query(q, epsilon, policy)?;
                cost.candidates += report.candidates as f64;
                cost.nodes += report.nodes_touched as f64;
                cost.answers += report.answers.len() as f64;
                cost.elapsed_micros += report.elapsed.as_micros() as f64;
            }
            cost.reps = queries.len();
        }
        Mode::Knn => {
            for q in queries {
                let report = engine.knn_query_with_bound(q, args.k_out, policy)?;
                cost.candidates += report.candidates as f64;
                cost.nodes += report.nodes_touched as f64;
                cost.answers += report.answers.len() as f64;
                cost.elapsed_micros += report.elapsed.as_micros() as f64;
            }
            cost.reps = queries.len();
        }
        Mode::Join => {
            let report = engine.all_pairs(epsilon, policy)?;
            cost.candidates = report.candidates as f64;
            cost.nodes = report.nodes_touched as f64;
            cost.answers = report.answers.len() as f64;
            cost.elapsed_micros = report.elapsed.as_micros() as f64;
            cost.reps = 1;
        }
    }
    let n = cost.reps as f64;
    cost.candidates /= n;
    cost.nodes /= n;
    cost.answers /= n;
    cost.elapsed_micros /= n;
    Ok(cost)
}

fn emit_point(
    args: &BenchArgs,
    engine: &Engine,
    sweep_value: &str,
    epsilon: f64,
    point_seed: u64,
    rows: &mut Vec<String>,
) -> anyhow::Result<()> {
    let queries = if args.mode == Mode::Join {
        Vec::new()
    } else {
        draw_queries(engine, args.reps, point_seed)
    };

    let policies = args.policies.expand();
    let mut costs = Vec::new();
    for &policy in &policies {
        costs.push(run_point(args, engine, epsilon, policy, &queries)?);
    }
    let reduction = if policies.len() == 2 && costs[0].candidates > 0.0 {
        format!(
            "{:.2}",
            (1.0 - costs[1].candidates / costs[0].candidates) * 100.0
        )
    } else {
        String::new()
    };

    for (policy, cost) in policies.iter().zip(&costs) {
        rows.push(format!(
            "{},{},{},{},{:.3},{:.3},{:.3},{:.1},{},ok",
            args.sweep.label(),
            sweep_value,
            policy.label(),
            cost.reps,
            cost.candidates,
            cost.nodes,
            cost.answers,
            cost.elapsed_micros,
            reduction
        ));
    }
    Ok(())
}

fn sweep_threshold(
    args: &BenchArgs,
    dataset: &[TimeSequence],
    rows: &mut Vec<String>,
) -> anyhow::Result<()> {
    let (engine, _) = Engine::index_dataset(dataset.to_vec(), args.k, args.fanout)?;
    let max_amp = engine.max_amp()?;
    for (i, &c) in args.thresholds.iter().enumerate() {
        if c <= 0.0 || c.is_nan() {
            skipped_row(rows, args.sweep, c, "non-positive threshold");
            continue;
        }
        emit_point(
            args,
            &engine,
            &c.to_string(),
            c * max_amp,
            args.seed.wrapping_add(1 + i as u64),
            rows,
        )?;
    }
    Ok(())
}

fn sweep_k(
    args: &BenchArgs,
    dataset: &[TimeSequence],
    rows: &mut Vec<String>,
) -> anyhow::Result<()> {
    let n = dataset[0].len();
    let c = default_eps_maxamp(args);
    for (i, &k) in args.k_values.iter().enumerate() {
        if k == 0 || 2 * k + 1 > n {
            skipped_row(
                rows,
                args.sweep,
                k,
                &format!("k {k} incompatible with length {n}"),
            );
            continue;
        }
        let (engine, _) = Engine::index_dataset(dataset.to_vec(), k, args.fanout)?;
        let max_amp = engine.max_amp()?;
        emit_point(
            args,
            &engine,
            &k.to_string(),
            c * max_amp,
            args.seed.wrapping_add(101 + i as u64),
            rows,
        )?;
    }
    Ok(())
}

fn sweep_count(
    args: &BenchArgs,
    dataset: &[TimeSequence],
    rows: &mut Vec<String>,
) -> anyhow::Result<()> {
    let c = default_eps_maxamp(args);
    for (i, &count) in args.count_values.iter().enumerate() {
        if count == 0 || count > dataset.len() {
            skipped_row(
                rows,
                args.sweep,
                count,
                &format!("dataset holds {} sequences", dataset.len()),
            );
            continue;
        }
        let (engine, _) = Engine::index_dataset(dataset[..count].to_vec(), args.k, args.fanout)?;
        let max_amp = engine.max_amp()?;
        emit_point(
            args,
            &engine,
            &count.to_string(),
            c * max_amp,
            args.seed.wrapping_add(201 + i as u64),
            rows,
        )?;
    }
    Ok(())
}

fn sweep_length(
    args: &BenchArgs,
    dataset: &[TimeSequence],
    rows: &mut Vec<String>,
) -> anyhow::Result<()> {
    let c = default_eps_maxamp(args);
    for (i, &length) in args.length_values.iter().enumerate() {
        if 2 * args.k + 1 > length {
            skipped_row(
                rows,
                args.sweep,
                length,
                &format!("k {} incompatible with length {length}", args.k),
            );
            continue;
        }
        let short = dataset.iter().filter(|s| s.len() < length).count();
        if short > 0 {
            skipped_row(
                rows,
                args.sweep,
                length,
                &format!("{short} sequences shorter than {length}"),
            );
            continue;
        }
        let truncated: Vec<TimeSequence> = dataset
            .iter()
            .map(|s| s.truncated(length))
            .collect::<Result<_, _>>()?;
        let (engine, _) = Engine::index_dataset(truncated, args.k, args.fanout)?;
        let max_amp = engine.max_amp()?;
        emit_point(
            args,
            &engine,
            &length.to_string(),
            c * max_amp,
            args.seed.wrapping_add(301 + i as u64),
            rows,
        )?;
    }
    Ok(())
}

//! Command-line surface: dataset generation and ingestion, index builds,
//! the three query types, analytical selectivity curves, and the sweep
//! benchmark harness.

mod bench;

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use specsim::datagen::{
    export_csv, generate, ingest_csv, CsvLayout, GenKind, GenSpec, IngestOptions,
    DEFAULT_STEP_BOUND,
};
use specsim::engine::{Engine, PairReport, QueryReport, RangeReport, REPORT_CSV_HEADER};
use specsim::metrics::RegionPolicy;
use specsim::selectivity::{
    monte_carlo_selectivity, selectivity_curve, write_curve_csv, QueryPosition,
};
use specsim::signal::TimeSequence;

#[derive(Parser)]
#[command(
    name = "specsim",
    version,
    about = "Similarity search over time sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic sequences and write them as CSV
    Generate(GenerateArgs),
    /// Parse a sequence CSV, apply length policy, re-emit row layout
    Ingest(IngestArgs),
    /// Index a dataset and write the snapshot files
    Build(BuildArgs),
    /// Range query against a snapshot
    Range(RangeArgs),
    /// k-nearest-neighbor query against a snapshot
    Knn(KnnArgs),
    /// All-pair join (self-join, or two snapshots)
    Join(JoinArgs),
    /// Analytical selectivity curve as CSV
    Selectivity(SelectivityArgs),
    /// Experiment sweeps with per-policy cost means
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Kind {
    RandomWalk,
    SpectralNoise,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Baseline,
    Symmetric,
    Both,
}

impl PolicyArg {
    pub fn expand(self) -> Vec<RegionPolicy> {
        match self {
            PolicyArg::Baseline => vec![RegionPolicy::Baseline],
            PolicyArg::Symmetric => vec![RegionPolicy::Symmetric],
            PolicyArg::Both => vec![RegionPolicy::Baseline, RegionPolicy::Symmetric],
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    length: usize,
    #[arg(long, env = "SPECSIM_SEED", default_value_t = 0)]
    seed: u64,
    /// Random-walk step bound B (z_t uniform on [-B, B])
    #[arg(long, default_value_t = DEFAULT_STEP_BOUND)]
    step_bound: f64,
    /// Spectral exponent b for spectral-noise data
    #[arg(long, default_value_t = 1.0)]
    exponent: f64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "row")]
    layout: CsvLayout,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "row")]
    layout: CsvLayout,
    /// Reject sequences shorter than this many samples
    #[arg(long)]
    min_length: Option<usize>,
    /// Truncate everything to the common minimum (or to --min-length)
    #[arg(long)]
    truncate_to_min: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "row")]
    layout: CsvLayout,
    /// Number of stored non-zero DFT coefficients
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 16)]
    fanout: usize,
    /// Snapshot prefix; writes `<prefix>.index.json` and `<prefix>.store.csv`
    #[arg(long)]
    snapshot: PathBuf,
}

#[derive(Args)]
struct QueryTarget {
    /// Snapshot prefix written by `build`
    #[arg(long)]
    snapshot: PathBuf,
    /// Use an indexed sequence as the query
    #[arg(long)]
    query_id: Option<String>,
    /// Read the query from a CSV file (first sequence)
    #[arg(long)]
    query_file: Option<PathBuf>,
    #[arg(long, default_value = "row")]
    layout: CsvLayout,
}

#[derive(Args)]
struct EpsilonArg {
    /// Absolute threshold in normalized distance
    #[arg(long)]
    epsilon: Option<f64>,
    /// Threshold as a multiple of the dataset's MaxAmp
    #[arg(long)]
    epsilon_maxamp: Option<f64>,
}

#[derive(Args)]
struct RangeArgs {
    #[command(flatten)]
    target: QueryTarget,
    #[command(flatten)]
    eps: EpsilonArg,
    #[arg(long, value_enum, default_value_t = PolicyArg::Both)]
    policy: PolicyArg,
    /// Append machine-readable report rows here
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct KnnArgs {
    #[command(flatten)]
    target: QueryTarget,
    #[arg(long, default_value_t = 10)]
    k_out: usize,
    /// Bound distance driving the traversal
    #[arg(long, value_enum, default_value_t = PolicyArg::Symmetric)]
    policy: PolicyArg,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct JoinArgs {
    /// Snapshot prefix; joined with itself unless --other is given
    #[arg(long)]
    snapshot: PathBuf,
    /// Second snapshot prefix for a two-index join
    #[arg(long)]
    other: Option<PathBuf>,
    #[command(flatten)]
    eps: EpsilonArg,
    #[arg(long, value_enum, default_value_t = PolicyArg::Both)]
    policy: PolicyArg,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SelectivityArgs {
    /// Spectral exponent of the data class
    #[arg(long)]
    b: f64,
    #[arg(long)]
    k: usize,
    /// Threshold grid start:end:step, e.g. 0.05:0.5:0.05
    #[arg(long)]
    eps_grid: String,
    /// Also sample the worst-case selectivities with this many points
    #[arg(long)]
    monte_carlo: Option<usize>,
    #[arg(long, env = "SPECSIM_SEED", default_value_t = 0)]
    mc_seed: u64,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::Build(args) => cmd_build(args),
        Command::Range(args) => cmd_range(args),
        Command::Knn(args) => cmd_knn(args),
        Command::Join(args) => cmd_join(args),
        Command::Selectivity(args) => cmd_selectivity(args),
        Command::Bench(args) => bench::run(args),
    }
}

pub fn snapshot_paths(prefix: &Path) -> (PathBuf, PathBuf) {
    let name = prefix
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    (
        prefix.with_file_name(format!("{name}.index.json")),
        prefix.with_file_name(format!("{name}.store.csv")),
    )
}

fn load_engine(prefix: &Path) -> anyhow::Result<Engine> {
    let (index_path, store_path) = snapshot_paths(prefix);
    Engine::load(&index_path, &store_path)
        .with_context(|| format!("loading snapshot `{}`", prefix.display()))
}

fn cmd_generate(args: GenerateArgs) -> anyhow::Result<()> {
    let kind = match args.kind {
        Kind::RandomWalk => GenKind::RandomWalk {
            step_bound: args.step_bound,
        },
        Kind::SpectralNoise => GenKind::SpectralNoise {
            exponent: args.exponent,
        },
    };
    let spec = GenSpec {
        kind,
        count: args.count,
        length: args.length,
        seed: args.seed,
    };
    let seqs = generate(&spec)?;
    export_csv(&seqs, &args.out, args.layout)?;
    println!(
        "wrote {} sequences of length {} to {}",
        seqs.len(),
        args.length,
        args.out.display()
    );
    Ok(())
}

fn cmd_ingest(args: IngestArgs) -> anyhow::Result<()> {
    let opts = IngestOptions {
        min_length: args.min_length,
        truncate_to_min: args.truncate_to_min,
    };
    let seqs = ingest_csv(&args.input, args.layout, &opts)?;
    if seqs.is_empty() {
        bail!("no sequences in {}", args.input.display());
    }
    export_csv(&seqs, &args.out, CsvLayout::Row)?;
    println!(
        "ingested {} sequences (length {}) into {}",
        seqs.len(),
        seqs[0].len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_build(args: BuildArgs) -> anyhow::Result<()> {
    let seqs = ingest_csv(&args.data, args.layout, &IngestOptions::default())?;
    if seqs.is_empty() {
        bail!("no sequences in {}", args.data.display());
    }
    let n = seqs[0].len();
    let (engine, skipped) = Engine::index_dataset(seqs, args.k, args.fanout)?;
    let (index_path, store_path) = snapshot_paths(&args.snapshot);
    engine.save(&index_path, &store_path)?;
    println!(
        "indexed {} sequences of length {} as {}-dimensional points (k = {}, fanout {})",
        engine.len(),
        n,
        2 * args.k,
        args.k,
        args.fanout
    );
    for s in &skipped {
        println!("skipped {}: {}", s.id, s.reason);
    }
    println!(
        "snapshot: {} + {}",
        index_path.display(),
        store_path.display()
    );
    Ok(())
}

fn resolve_query(engine: &Engine, target: &QueryTarget) -> anyhow::Result<TimeSequence> {
    match (&target.query_id, &target.query_file) {
        (Some(id), None) => {
            let stored = engine
                .store()
                .get(id)
                .with_context(|| format!("query id `{id}` is not in the snapshot"))?;
            Ok(stored.sequence.clone())
        }
        (None, Some(path)) => {
            let seqs = ingest_csv(path, target.layout, &IngestOptions::default())?;
            seqs.into_iter()
                .next()
                .with_context(|| format!("no sequences in {}", path.display()))
        }
        _ => bail!("provide exactly one of --query-id and --query-file"),
    }
}

fn resolve_epsilon(engine: &Engine, eps: &EpsilonArg) -> anyhow::Result<f64> {
    match (eps.epsilon, eps.epsilon_maxamp) {
        (Some(e), None) => Ok(e),
        (None, Some(c)) => {
            let max_amp = engine.max_amp()?;
            Ok(c * max_amp)
        }
        _ => bail!("provide exactly one of --epsilon and --epsilon-maxamp"),
    }
}

fn write_report_csv<A>(path: &Path, reports: &[&QueryReport<A>]) -> anyhow::Result<()> {
    let mut file = File::create(path)?;
    writeln!(file, "{REPORT_CSV_HEADER}")?;
    for r in reports {
        writeln!(file, "{}", r.csv_row())?;
    }
    Ok(())
}

fn print_range_report(report: &RangeReport) {
    println!(
        "policy {:<9} answers {:<5} candidates {:<6} false_positives {:<6} nodes {:<5} elapsed {}us",
        report.policy.label(),
        report.answers.len(),
        report.candidates,
        report.false_positives,
        report.nodes_touched,
        report.elapsed.as_micros()
    );
    if let Some(note) = &report.note {
        println!("  note: {note}");
    }
    for (id, dist) in report.answers.iter().take(10) {
        println!("  {id}  {dist:.6}");
    }
    if report.answers.len() > 10 {
        println!("  ... {} more", report.answers.len() - 10);
    }
}

fn print_pair_report(report: &PairReport) {
    println!(
        "policy {:<9} pairs {:<6} candidates {:<6} false_positives {:<6} node_pairs {:<6} elapsed {}us",
        report.policy.label(),
        report.answers.len(),
        report.candidates,
        report.false_positives,
        report.nodes_touched,
        report.elapsed.as_micros()
    );
    for (a, b, dist) in report.answers.iter().take(10) {
        println!("  {a} | {b}  {dist:.6}");
    }
    if report.answers.len() > 10 {
        println!("  ... {} more", report.answers.len() - 10);
    }
}

fn print_candidate_reduction(base: usize, sym: usize) {
    if base > 0 {
        println!(
            "candidate reduction: {:.1}%",
            (1.0 - sym as f64 / base as f64) * 100.0
        );
    }
}

fn cmd_range(args: RangeArgs) -> anyhow::Result<()> {
    let engine = load_engine(&args.target.snapshot)?;
    let q = resolve_query(&engine, &args.target)?;
    let epsilon = resolve_epsilon(&engine, &args.eps)?;
    println!("range query `{}`, epsilon {epsilon:.6}", q.id());

    let mut reports = Vec::new();
    for policy in args.policy.expand() {
        let report = engine.range_query(&q, epsilon, policy)?;
        print_range_report(&report);
        reports.push(report);
    }
    if let [base, sym] = reports.as_slice() {
        assert_eq!(
            base.answers, sym.answers,
            "policies disagree on the answer set"
        );
        print_candidate_reduction(base.candidates, sym.candidates);
    }
    if let Some(path) = &args.csv {
        write_report_csv(path, &reports.iter().collect::<Vec<_>>())?;
    }
    Ok(())
}

fn cmd_knn(args: KnnArgs) -> anyhow::Result<()> {
    let engine = load_engine(&args.target.snapshot)?;
    let q = resolve_query(&engine, &args.target)?;
    println!("{}-nearest-neighbor query `{}`", args.k_out, q.id());

    let mut reports = Vec::new();
    for bound in args.policy.expand() {
        let report = engine.knn_query_with_bound(&q, args.k_out, bound)?;
        print_range_report(&report);
        reports.push(report);
    }
    if let [base, sym] = reports.as_slice() {
        assert_eq!(base.answers, sym.answers, "bounds disagree on the answers");
        print_candidate_reduction(base.candidates, sym.candidates);
    }
    if let Some(path) = &args.csv {
        write_report_csv(path, &reports.iter().collect::<Vec<_>>())?;
    }
    Ok(())
}

fn cmd_join(args: JoinArgs) -> anyhow::Result<()> {
    let engine = load_engine(&args.snapshot)?;
    let other = args.other.as_deref().map(load_engine).transpose()?;
    let epsilon = resolve_epsilon(&engine, &args.eps)?;
    match &other {
        Some(_) => println!("two-index join, epsilon {epsilon:.6}"),
        None => println!(
            "self-join over {} sequences, epsilon {epsilon:.6}",
            engine.len()
        ),
    }

    let mut reports = Vec::new();
    for policy in args.policy.expand() {
        let report = match &other {
            Some(o) => engine.join_with(o, epsilon, policy)?,
            None => engine.all_pairs(epsilon, policy)?,
        };
        print_pair_report(&report);
        reports.push(report);
    }
    if let [base, sym] = reports.as_slice() {
        assert_eq!(base.answers, sym.answers, "policies disagree on the pairs");
        print_candidate_reduction(base.candidates, sym.candidates);
    }
    if let Some(path) = &args.csv {
        write_report_csv(path, &reports.iter().collect::<Vec<_>>())?;
    }
    Ok(())
}

pub fn parse_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, end, step] = parts.as_slice() else {
        bail!("grid must be start:end:step, got `{spec}`");
    };
    let (start, end, step): (f64, f64, f64) = (start.parse()?, end.parse()?, step.parse()?);
    let well_formed = step > 0.0 && start <= end;
    if !well_formed {
        bail!("bad grid `{spec}`");
    }
    let mut grid = Vec::new();
    for i in 0.. {
        let x = start + i as f64 * step;
        if x > end + step * 1e-9 {
            break;
        }
        // decimal grids accumulate binary dust; snap to 10 decimals
        grid.push((x.min(end) * 1e10).round() / 1e10);
    }
    Ok(grid)
}

fn cmd_selectivity(args: SelectivityArgs) -> anyhow::Result<()> {
    let grid = parse_grid(&args.eps_grid)?;
    let rows = selectivity_curve(args.b, args.k, &grid)?;

    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(std::io::stdout()),
    };

    match args.monte_carlo {
        None => write_curve_csv(&rows, &mut out)?,
        Some(samples) => {
            writeln!(
                out,
                "epsilon,worst_baseline,worst_symmetric,best_baseline,best_symmetric,\
                 mc_worst_baseline,mc_worst_baseline_se,mc_worst_symmetric,mc_worst_symmetric_se"
            )?;
            for (i, r) in rows.iter().enumerate() {
                let base = monte_carlo_selectivity(
                    args.b,
                    args.k,
                    2.0 * r.epsilon,
                    QueryPosition::Worst,
                    samples,
                    args.mc_seed.wrapping_add(2 * i as u64),
                )?;
                let sym = monte_carlo_selectivity(
                    args.b,
                    args.k,
                    std::f64::consts::SQRT_2 * r.epsilon,
                    QueryPosition::Worst,
                    samples,
                    args.mc_seed.wrapping_add(2 * i as u64 + 1),
                )?;
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.epsilon,
                    r.worst_baseline,
                    r.worst_symmetric,
                    r.best_baseline,
                    r.best_symmetric,
                    base.estimate,
                    base.std_error,
                    sym.estimate,
                    sym.std_error
                )?;
            }
        }
    }
    if let Some(path) = &args.out {
        eprintln!("wrote {} rows to {}", rows.len(), path.display());
    }
    Ok(())
}

//! `cachesim`: workload generation, trace-driven simulation, policy sweeps,
//! stationary analytics, and trace conversion.
//!
//! Every subcommand is deterministic given its flags: seeds are flags with a
//! fixed default (42), never ambient time. Exit codes are stable — 0 on
//! success, 2 on usage errors, 1 on runtime errors. Output files are written
//! atomically (write-then-rename).

use cachesim::analytics::{
    climb_distribution, expected_hit_ratio, lru_distribution, markov_stationary, OracleModel,
    ProbabilityVector, ORACLE_MAX_ITEMS, ORACLE_MAX_SLOTS,
};
use cachesim::harness::{
    emit_rows, emit_table, simulate, sweep, HarnessError, RunReport, SweepAxis, SweepPoint,
    SweepWorkload, WorkloadInfo, SWEEP_DAC_GROWTH_HEADROOM,
};
use cachesim::trace::{
    read_binary_trace, read_csv_trace, write_binary_trace, write_csv_trace, BinaryTraceReader,
    CsvTraceReader, BINARY_MAGIC,
};
use cachesim::types::{PolicyConfig, PolicyKind, RequestRecord};
use cachesim::workload::{generate_phase_stream, IrStream, Phase, PhasePlan, RankMap, ZipfSpec};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Default RNG seed for every subcommand; reproducibility is the product.
const DEFAULT_SEED: u64 = 42;

/// Default DynamicAdaptiveClimb shrink sensitivity.
const DEFAULT_EPSILON: f64 = 0.5;

#[derive(Parser)]
#[command(
    name = "cachesim",
    version,
    about = "Cache replacement simulator: adaptive-promotion policies, baselines, and analytics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic Zipf (optionally phase-shifted) trace file.
    Generate(GenerateArgs),
    /// Replay a workload through one policy and report metrics.
    Simulate(SimulateArgs),
    /// Run a policy set across a capacity or skew axis, with MRR vs FIFO.
    Sweep(SweepArgs),
    /// Closed-form stationary distributions (LRU/CLIMB) and hit ratios.
    Analyze(AnalyzeArgs),
    /// Convert a trace between the CSV and binary formats.
    Convert(ConvertArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TraceFormat {
    Csv,
    Bin,
}

#[derive(Args)]
struct GenerateArgs {
    /// Number of distinct objects (keys are 1..=N in rank order).
    #[arg(long = "zipf-n")]
    zipf_n: usize,
    /// Zipf skew (0 = uniform).
    #[arg(long)]
    alpha: f64,
    /// Number of requests.
    #[arg(long)]
    length: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Split the stream into this many phases; each phase after the first
    /// remaps item ranks through a fresh seeded permutation. Boundaries are
    /// written to `<out>.phases`.
    #[arg(long, default_value_t = 1)]
    phases: usize,
    #[arg(long)]
    out: PathBuf,
    /// Output format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<TraceFormat>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_policy)]
    policy: PolicyKind,
    #[arg(long)]
    capacity: usize,
    /// Shrink sensitivity in (0, 1]; DynamicAdaptiveClimb only.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Capacity floor; DynamicAdaptiveClimb only (default 2).
    #[arg(long)]
    kmin: Option<usize>,
    /// Capacity ceiling; DynamicAdaptiveClimb only (default 16x capacity).
    #[arg(long)]
    kmax: Option<usize>,
    /// Trace file to replay (format sniffed from the content).
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long = "zipf-n")]
    zipf_n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    length: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the machine-readable report row here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated policy list; FIFO is added automatically.
    #[arg(long, value_delimiter = ',', value_parser = parse_policy)]
    policies: Vec<PolicyKind>,
    /// Capacity axis: absolute slot counts or percentages of the workload's
    /// distinct-key count (e.g. `100,5%,10%`).
    #[arg(long, value_delimiter = ',')]
    capacities: Option<Vec<String>>,
    /// Skew axis (requires a synthetic workload and --capacity).
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    /// Fixed capacity for an --alphas sweep.
    #[arg(long)]
    capacity: Option<usize>,
    /// DynamicAdaptiveClimb shrink sensitivity used at every point.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long = "zipf-n")]
    zipf_n: Option<usize>,
    /// Fixed skew for a capacity sweep over a synthetic workload.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    length: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write machine-readable rows here (the table always prints to stdout).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Closed-form model to evaluate.
    #[arg(long, value_enum)]
    model: AnalyzeModel,
    /// Probability file: one weight per line (normalized automatically);
    /// `#` comments and blank lines are ignored.
    #[arg(long)]
    probs: Option<PathBuf>,
    #[arg(long = "zipf-n")]
    zipf_n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Cache size K (must satisfy K < N).
    #[arg(long)]
    k: usize,
    /// Cross-check the closed form against the exact Markov chain
    /// (requires N <= 7 and K <= 4); exits nonzero if they disagree.
    #[arg(long)]
    oracle: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalyzeModel {
    Lru,
    Climb,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Input format; sniffed from the content when omitted.
    #[arg(long, value_enum)]
    in_format: Option<TraceFormat>,
    /// Output format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    out_format: Option<TraceFormat>,
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }
}

impl From<HarnessError> for CliError {
    fn from(err: HarnessError) -> Self {
        match err {
            HarnessError::Config(_) | HarnessError::EmptyAxis | HarnessError::AxisNeedsZipf => {
                CliError::usage(err.to_string())
            }
            other => CliError::runtime(other.to_string()),
        }
    }
}

fn parse_policy(s: &str) -> Result<PolicyKind, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Convert(args) => cmd_convert(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Writes through a temp file in the same directory, then renames.
fn write_atomic(
    path: &Path,
    write: impl FnOnce(&mut File) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    let mut file = File::create(&tmp)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", tmp.display())))?;
    write(&mut file)?;
    file.sync_all()
        .map_err(|e| CliError::runtime(format!("cannot flush {}: {e}", tmp.display())))?;
    drop(file);
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::runtime(format!("cannot rename onto {}: {e}", path.display())))?;
    Ok(())
}

fn format_from_extension(path: &Path) -> Option<TraceFormat> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("csv") => Some(TraceFormat::Csv),
        Some(ext) if ext.eq_ignore_ascii_case("bin") => Some(TraceFormat::Bin),
        _ => None,
    }
}

/// Input format resolution: explicit flag, then file extension, then a
/// content sniff (binary magic vs CSV).
fn detect_input_format(path: &Path, flag: Option<TraceFormat>) -> Result<TraceFormat, CliError> {
    if let Some(format) = flag.or_else(|| format_from_extension(path)) {
        return Ok(format);
    }
    let mut file = File::open(path)
        .map_err(|e| CliError::runtime(format!("cannot open {}: {e}", path.display())))?;
    let mut magic = [0u8; 4];
    let n = file
        .read(&mut magic)
        .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))?;
    Ok(if n == 4 && magic == BINARY_MAGIC {
        TraceFormat::Bin
    } else {
        TraceFormat::Csv
    })
}

fn read_trace_file(path: &Path) -> Result<Vec<RequestRecord>, CliError> {
    let format = detect_input_format(path, None)?;
    let file = File::open(path)
        .map_err(|e| CliError::runtime(format!("cannot open {}: {e}", path.display())))?;
    let result = match format {
        TraceFormat::Bin => read_binary_trace(BufReader::new(file)),
        TraceFormat::Csv => read_csv_trace(BufReader::new(file)),
    };
    result.map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))
}

fn zipf_spec(n: usize, alpha: f64, seed: u64, length: u64) -> Result<ZipfSpec, CliError> {
    if n < 2 {
        return Err(CliError::usage("--zipf-n must be at least 2"));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(CliError::usage("--alpha must be a finite value >= 0"));
    }
    if length < 1 {
        return Err(CliError::usage("--length must be at least 1"));
    }
    Ok(ZipfSpec::new(n, alpha, seed, length))
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let format = args
        .format
        .or_else(|| format_from_extension(&args.out))
        .ok_or_else(|| CliError::usage("cannot infer output format; pass --format csv|bin"))?;
    if args.phases < 1 {
        return Err(CliError::usage("--phases must be at least 1"));
    }
    if args.phases as u64 > args.length {
        return Err(CliError::usage("--phases cannot exceed --length"));
    }
    let base = zipf_spec(args.zipf_n, args.alpha, args.seed, args.length)?;

    let per_phase = args.length / args.phases as u64;
    let remainder = args.length % args.phases as u64;
    let mut phases = Vec::with_capacity(args.phases);
    for i in 0..args.phases {
        let length = per_phase + if (i as u64) < remainder { 1 } else { 0 };
        let mut spec = base.clone();
        spec.seed = args.seed.wrapping_add(i as u64);
        spec.length = length;
        phases.push(Phase {
            spec,
            rank_map: if i == 0 {
                RankMap::Identity
            } else {
                RankMap::Shuffled(
                    args.seed
                        .wrapping_add(0x9E37_79B9_7F4A_7C15)
                        .wrapping_add(i as u64),
                )
            },
        });
    }
    let (records, boundaries) = generate_phase_stream(&PhasePlan::new(phases));

    write_atomic(&args.out, |file| {
        match format {
            TraceFormat::Bin => write_binary_trace(file, &records),
            TraceFormat::Csv => write_csv_trace(file, &records, true),
        }
        .map_err(|e| CliError::runtime(e.to_string()))
    })?;
    if args.phases > 1 {
        let sidecar = PathBuf::from(format!("{}.phases", args.out.display()));
        write_atomic(&sidecar, |file| {
            writeln!(file, "phase,start,length").map_err(|e| CliError::runtime(e.to_string()))?;
            for b in &boundaries {
                writeln!(file, "{},{},{}", b.phase, b.start, b.length)
                    .map_err(|e| CliError::runtime(e.to_string()))?;
            }
            Ok(())
        })?;
    }
    println!(
        "wrote {} records to {} (seed {})",
        records.len(),
        args.out.display(),
        args.seed
    );
    Ok(())
}

fn build_policy_config(
    policy: PolicyKind,
    capacity: usize,
    epsilon: Option<f64>,
    kmin: Option<usize>,
    kmax: Option<usize>,
) -> Result<PolicyConfig, CliError> {
    let config = if policy == PolicyKind::DynamicAdaptiveClimb {
        PolicyConfig::dynamic(
            capacity,
            epsilon.unwrap_or(DEFAULT_EPSILON),
            kmin.unwrap_or(2),
            kmax.unwrap_or_else(|| capacity.saturating_mul(SWEEP_DAC_GROWTH_HEADROOM)),
        )
    } else {
        let mut config = PolicyConfig::new(policy, capacity);
        config.epsilon = epsilon;
        config.k_min = kmin;
        config.k_max = kmax;
        config
    };
    config
        .validate()
        .map_err(|e| CliError::usage(e.to_string()))?;
    Ok(config)
}

fn summary_line(report: &RunReport) -> String {
    let mut line = format!(
        "policy={} capacity={} requests={} hits={} misses={} miss_ratio={:.6} \
         hit_ratio={:.6} shifts_per_request={:.4}",
        report.policy.kind,
        report.policy.capacity,
        report.requests,
        report.hits,
        report.misses,
        report.miss_ratio(),
        report.hit_ratio(),
        report.shifts_per_request(),
    );
    if report.policy.kind == PolicyKind::DynamicAdaptiveClimb {
        line.push_str(&format!(
            " resizes={} shrink_evictions={} final_capacity={}",
            report.resizes, report.shrink_evictions, report.final_capacity
        ));
    }
    line
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let config = build_policy_config(
        args.policy,
        args.capacity,
        args.epsilon,
        args.kmin,
        args.kmax,
    )?;

    let zipf_given = args.zipf_n.is_some() || args.alpha.is_some() || args.length.is_some();
    let report = match (&args.trace, zipf_given) {
        (Some(_), true) => {
            return Err(CliError::usage(
                "pass either --trace or --zipf-n/--alpha/--length",
            ))
        }
        (None, false) => {
            return Err(CliError::usage(
                "a workload is required: --trace FILE or --zipf-n/--alpha/--length",
            ))
        }
        (Some(path), false) => {
            let info = WorkloadInfo::new(format!("trace {}", path.display()), None);
            let format = detect_input_format(path, None)?;
            let file = File::open(path)
                .map_err(|e| CliError::runtime(format!("cannot open {}: {e}", path.display())))?;
            let result = match format {
                TraceFormat::Bin => {
                    let reader = BinaryTraceReader::new(BufReader::new(file))
                        .map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
                    simulate(&config, reader, info)
                }
                TraceFormat::Csv => {
                    simulate(&config, CsvTraceReader::new(BufReader::new(file)), info)
                }
            };
            result.map_err(CliError::from)?
        }
        (None, true) => {
            let n = args
                .zipf_n
                .ok_or_else(|| CliError::usage("--zipf-n is required"))?;
            let alpha = args
                .alpha
                .ok_or_else(|| CliError::usage("--alpha is required"))?;
            let length = args
                .length
                .ok_or_else(|| CliError::usage("--length is required"))?;
            let spec = zipf_spec(n, alpha, args.seed, length)?;
            let info = WorkloadInfo::for_zipf(&spec);
            simulate(&config, IrStream::new(&spec).map(Ok), info).map_err(CliError::from)?
        }
    };

    println!("{}", summary_line(&report));
    if let Some(path) = &args.report {
        let point = SweepPoint {
            axis: format!("K={}", report.policy.capacity),
            report,
            mrr: None,
        };
        let rows = emit_rows(std::slice::from_ref(&point)).map_err(CliError::from)?;
        write_atomic(path, |file| {
            file.write_all(rows.as_bytes())
                .map_err(|e| CliError::runtime(e.to_string()))
        })?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

/// Resolves a capacity list that may mix absolute counts and percentages of
/// the workload's distinct-key count.
fn resolve_capacities(specs: &[String], distinct: usize) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::with_capacity(specs.len());
    for spec in specs {
        let text = spec.trim();
        let capacity = if let Some(percent) = text.strip_suffix('%') {
            let value: f64 = percent
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad capacity: {text}")))?;
            if !value.is_finite() || value <= 0.0 {
                return Err(CliError::usage(format!("bad capacity: {text}")));
            }
            ((value / 100.0 * distinct as f64).round() as usize).max(1)
        } else {
            text.parse::<usize>()
                .map_err(|_| CliError::usage(format!("bad capacity: {text}")))?
        };
        if capacity == 0 {
            return Err(CliError::usage(format!(
                "capacity must be positive: {text}"
            )));
        }
        out.push(capacity);
    }
    Ok(out)
}

fn distinct_keys(records: &[RequestRecord]) -> usize {
    records.iter().map(|r| r.key).collect::<HashSet<_>>().len()
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    if args.policies.is_empty() {
        return Err(CliError::usage("--policies must not be empty"));
    }
    let mut seen = HashSet::new();
    for kind in &args.policies {
        if !seen.insert(*kind) {
            eprintln!("warning: duplicate policy {kind} ignored");
        }
    }

    let workload = match (&args.trace, args.zipf_n) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage("pass either --trace or --zipf-n, not both"))
        }
        (Some(path), None) => {
            let records = read_trace_file(path)?;
            SweepWorkload::Trace {
                records,
                description: format!("trace {}", path.display()),
            }
        }
        (None, Some(n)) => {
            let length = args
                .length
                .ok_or_else(|| CliError::usage("--length is required with --zipf-n"))?;
            // For an alpha sweep the axis supplies the skew.
            let alpha = match (&args.alphas, args.alpha) {
                (Some(_), Some(_)) => {
                    return Err(CliError::usage(
                        "--alpha conflicts with --alphas; the axis sets the skew",
                    ))
                }
                (Some(_), None) => 0.0,
                (None, Some(alpha)) => alpha,
                (None, None) => {
                    return Err(CliError::usage("--alpha is required for a capacity sweep"))
                }
            };
            SweepWorkload::Zipf(zipf_spec(n, alpha, args.seed, length)?)
        }
        (None, None) => {
            return Err(CliError::usage(
                "a workload is required: --trace FILE or --zipf-n/--length",
            ))
        }
    };

    let axis = match (&args.capacities, &args.alphas) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage(
                "pass either --capacities or --alphas, not both",
            ))
        }
        (None, None) => {
            return Err(CliError::usage(
                "an axis is required: --capacities or --alphas",
            ))
        }
        (Some(specs), None) => {
            let distinct = match &workload {
                SweepWorkload::Trace { records, .. } => distinct_keys(records),
                SweepWorkload::Zipf(spec) => {
                    distinct_keys(&cachesim::workload::generate_ir_stream(spec))
                }
            };
            SweepAxis::Capacities(resolve_capacities(specs, distinct)?)
        }
        (None, Some(alphas)) => {
            let capacity = args
                .capacity
                .ok_or_else(|| CliError::usage("--capacity is required with --alphas"))?;
            SweepAxis::Alphas {
                alphas: alphas.clone(),
                capacity,
            }
        }
    };

    let points = sweep(&args.policies, &axis, &workload, args.epsilon)?;
    print!("{}", emit_table(&points).map_err(CliError::from)?);
    if let Some(path) = &args.report {
        let rows = emit_rows(&points).map_err(CliError::from)?;
        write_atomic(path, |file| {
            file.write_all(rows.as_bytes())
                .map_err(|e| CliError::runtime(e.to_string()))
        })?;
        println!("report written to {}", path.display());
    }
    Ok(())
}

fn read_probability_file(path: &Path) -> Result<ProbabilityVector, CliError> {
    let file = File::open(path)
        .map_err(|e| CliError::runtime(format!("cannot open {}: {e}", path.display())))?;
    let mut weights = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let value: f64 = text.parse().map_err(|_| {
            CliError::usage(format!(
                "{}:{}: not a number: {text}",
                path.display(),
                i + 1
            ))
        })?;
        weights.push(value);
    }
    ProbabilityVector::from_weights(&weights)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let p = match (&args.probs, args.zipf_n) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage("pass either --probs or --zipf-n/--alpha"))
        }
        (Some(path), None) => read_probability_file(path)?,
        (None, Some(n)) => {
            let alpha = args
                .alpha
                .ok_or_else(|| CliError::usage("--alpha is required with --zipf-n"))?;
            if n < 2 {
                return Err(CliError::usage("--zipf-n must be at least 2"));
            }
            if !alpha.is_finite() || alpha < 0.0 {
                return Err(CliError::usage("--alpha must be a finite value >= 0"));
            }
            cachesim::workload::zipf_probabilities(n, alpha)
        }
        (None, None) => {
            return Err(CliError::usage(
                "probabilities required: --probs or --zipf-n/--alpha",
            ))
        }
    };
    let n = p.len();
    if args.k == 0 || args.k >= n {
        return Err(CliError::usage(format!(
            "--k must satisfy 1 <= K < N (K={}, N={n})",
            args.k
        )));
    }
    if args.oracle && (n > ORACLE_MAX_ITEMS || args.k > ORACLE_MAX_SLOTS) {
        return Err(CliError::usage(format!(
            "--oracle requires N <= {ORACLE_MAX_ITEMS} and K <= {ORACLE_MAX_SLOTS} (N={n}, K={})",
            args.k
        )));
    }

    let (dist, model) = match args.model {
        AnalyzeModel::Lru => (lru_distribution(&p, args.k), OracleModel::Lru),
        AnalyzeModel::Climb => (climb_distribution(&p, args.k), OracleModel::Climb),
    };
    let dist = dist.map_err(|e| CliError::usage(e.to_string()))?;

    let mut entries: Vec<(&Vec<usize>, f64)> = dist.iter().collect();
    entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    println!("configuration probability");
    for (config, prob) in &entries {
        let display: Vec<String> = config.iter().map(|i| (i + 1).to_string()).collect();
        println!("({}) {:.9}", display.join(","), prob);
    }
    println!("expected_hit_ratio {:.9}", expected_hit_ratio(&dist, &p));

    if args.oracle {
        let oracle =
            markov_stationary(model, &p, args.k).map_err(|e| CliError::runtime(e.to_string()))?;
        let deviation = dist.max_abs_diff(&oracle);
        println!("oracle_max_abs_deviation {deviation:.3e}");
        if deviation >= 1e-9 {
            return Err(CliError::runtime(format!(
                "closed form and Markov oracle disagree: {deviation:.3e} >= 1e-9"
            )));
        }
    }
    Ok(())
}

fn cmd_convert(args: ConvertArgs) -> Result<(), CliError> {
    let in_format = detect_input_format(&args.input, args.in_format)?;
    let out_format = args
        .out_format
        .or_else(|| format_from_extension(&args.out))
        .ok_or_else(|| CliError::usage("cannot infer output format; pass --out-format csv|bin"))?;

    let file = File::open(&args.input)
        .map_err(|e| CliError::runtime(format!("cannot open {}: {e}", args.input.display())))?;
    let records = match in_format {
        TraceFormat::Bin => read_binary_trace(BufReader::new(file)),
        TraceFormat::Csv => read_csv_trace(BufReader::new(file)),
    }
    .map_err(|e| CliError::runtime(format!("{}: {e}", args.input.display())))?;

    write_atomic(&args.out, |out| {
        match out_format {
            TraceFormat::Bin => write_binary_trace(out, &records),
            TraceFormat::Csv => write_csv_trace(out, &records, true),
        }
        .map_err(|e| CliError::runtime(e.to_string()))
    })?;
    println!(
        "converted {} records: {} -> {}",
        records.len(),
        args.input.display(),
        args.out.display()
    );
    Ok(())
}

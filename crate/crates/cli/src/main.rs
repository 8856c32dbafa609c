//! Command-line front end: instance generation, single solves, benchmark
//! sweeps, and invariant verification suites.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use knapsub::decompose::decompose;
use knapsub::driver::{
    brute_force, dispatch, greedy_cost_benefit, knapsack_curvature, sviridenko_greedy, RunReport,
    SolveMode, DEFAULT_PROFILE_BUDGET,
};
use knapsub::io::{budget_file, InstanceFile};
use knapsub::rng::RngStream;
use knapsub::testgen;
use knapsub::verify;
use knapsub::Error;

#[derive(Parser)]
#[command(
    name = "knapsub",
    version,
    about = "Submodular maximization under a knapsack constraint"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance file.
    Generate(GenerateArgs),
    /// Run one algorithm on one instance and print the run report.
    Solve(SolveArgs),
    /// Full-factorial benchmark sweep with CSV rows and a summary.
    Bench(BenchArgs),
    /// Run a named invariant suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algorithm {
    Brute,
    Greedy,
    Sviridenko,
    Curvature,
    Dispatch,
}

impl Algorithm {
    fn name(&self) -> &'static str {
        match self {
            Algorithm::Brute => "brute",
            Algorithm::Greedy => "greedy",
            Algorithm::Sviridenko => "sviridenko",
            Algorithm::Curvature => "curvature",
            Algorithm::Dispatch => "dispatch",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Sampled,
    #[value(name = "known-O", alias = "known-o")]
    KnownO,
    Enumerate,
    Heuristic,
}

impl Mode {
    fn solve_mode(&self) -> SolveMode {
        match self {
            Mode::Exact => SolveMode::EXACT,
            Mode::Sampled | Mode::Heuristic => SolveMode::SAMPLED,
            Mode::KnownO => SolveMode::KNOWN_O,
            Mode::Enumerate => SolveMode::ENUMERATE,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Sampled => "sampled",
            Mode::KnownO => "known-O",
            Mode::Enumerate => "enumerate",
            Mode::Heuristic => "heuristic",
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    /// Instance family: coverage | budget | table.
    #[arg(long)]
    kind: String,
    /// Ground-set size (coverage, table) or channel count (budget).
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Exact curvature target for coverage instances.
    #[arg(long)]
    curvature: Option<f64>,
    /// Customers for budget instances.
    #[arg(long, default_value_t = 4)]
    customers: usize,
    /// Edge density for coverage instances.
    #[arg(long, default_value_t = 0.5)]
    density: f64,
    /// Accuracy parameter stored in the instance file.
    #[arg(long, default_value_t = 0.25)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    algorithm: Algorithm,
    #[arg(long, value_enum, default_value = "known-O")]
    mode: Mode,
    /// Overrides the epsilon stored in the instance file.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Ceiling on enumerated guess profiles.
    #[arg(long, default_value_t = DEFAULT_PROFILE_BUDGET)]
    budget: u64,
    /// Append one CSV row here.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Optional JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "instance")]
    instances: Vec<PathBuf>,
    #[arg(long = "algorithm", value_enum)]
    algorithms: Vec<Algorithm>,
    #[arg(long = "mode", value_enum)]
    modes: Vec<Mode>,
    #[arg(long = "epsilon")]
    epsilons: Vec<f64>,
    /// Base seed; trial k runs with seed base+k.
    #[arg(long)]
    seed: Option<u64>,
    /// Seeds per cell.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name, or "all".
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Exit codes: 0 success, 2 usage, 3 input, 4 capability.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::GroundTooLarge { .. }
        | Error::EnumerationBudget { .. }
        | Error::CurvatureSaturated => 4,
        _ => 3,
    }
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> ExitCode {
    if args.n == 0 {
        return fail(3, "ground set must be nonempty");
    }
    if !(0.0 < args.epsilon && args.epsilon < 1.0) {
        return fail(3, format!("epsilon {} outside (0, 1)", args.epsilon));
    }
    let stream = RngStream::new(args.seed);
    let file = match args.kind.as_str() {
        "coverage" => {
            let result = match args.curvature {
                Some(c) => testgen::coverage_with_curvature(args.n, c, &stream),
                None => testgen::random_coverage(args.n, 2 * args.n, args.density, &stream),
            };
            match result {
                Ok(mut inst) => {
                    inst.file.epsilon = args.epsilon;
                    inst.file
                }
                Err(e) => return fail(exit_code_for(&e), e),
            }
        }
        "budget" => match testgen::random_budget(args.n, args.customers, &stream)
            .and_then(|inst| budget_file(&inst, args.epsilon))
        {
            Ok(file) => file,
            Err(e) => return fail(exit_code_for(&e), e),
        },
        "table" => match testgen::random_table_file(args.n, args.epsilon, &stream) {
            Ok(file) => file,
            Err(e) => return fail(exit_code_for(&e), e),
        },
        other => {
            return fail(
                2,
                format!("unknown kind {other:?} (coverage | budget | table)"),
            )
        }
    };
    // Validate what is about to be written.
    if let Err(e) = file.to_instance() {
        return fail(exit_code_for(&e), e);
    }
    let text = file.to_json();
    match &args.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                return fail(3, format!("writing {}: {e}", path.display()));
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}

fn load_instance(path: &Path) -> Result<(InstanceFile, knapsub::Problem), (u8, String)> {
    let text =
        fs::read_to_string(path).map_err(|e| (3u8, format!("reading {}: {e}", path.display())))?;
    let file = InstanceFile::from_json(&text).map_err(|e| (3u8, e.to_string()))?;
    let instance = file
        .to_instance()
        .map_err(|e| (exit_code_for(&e), e.to_string()))?;
    Ok((file, instance))
}

fn run_algorithm(
    algorithm: Algorithm,
    mode: Mode,
    instance: &knapsub::Problem,
    epsilon: f64,
    seed: u64,
    budget: u64,
) -> knapsub::Result<RunReport> {
    let rng = RngStream::new(seed);
    let mut report = match algorithm {
        Algorithm::Brute => brute_force(&instance.f, &instance.w)?,
        Algorithm::Greedy => greedy_cost_benefit(&instance.f, &instance.w)?,
        Algorithm::Sviridenko => sviridenko_greedy(&instance.f, &instance.w)?,
        Algorithm::Curvature => {
            // Standalone joint pipeline: split at epsilon, solve at half,
            // mirroring the dispatcher's reduction.
            let dec = decompose(&instance.f, epsilon)?;
            let mut rep = knapsack_curvature(
                &dec,
                &instance.w,
                epsilon / 2.0,
                mode.solve_mode(),
                &rng,
                budget,
            )?;
            let chosen = rep.chosen();
            rep.objective = instance.f.eval(&chosen)?;
            rep
        }
        Algorithm::Dispatch => dispatch(
            &instance.f,
            &instance.w,
            epsilon,
            mode.solve_mode(),
            &rng,
            budget,
        )?,
    };
    report.seed = seed;
    if matches!(
        algorithm,
        Algorithm::Brute | Algorithm::Greedy | Algorithm::Sviridenko
    ) {
        report.mode = String::new();
    }
    Ok(report)
}

const CSV_HEADER: &str =
    "instance-id,algorithm,mode,seed,objective,weight,oracle-calls,wall-time-ms";

fn csv_row(instance_id: &str, report: &RunReport, wall_ms: f64) -> Vec<String> {
    vec![
        instance_id.to_string(),
        report.algorithm.clone(),
        report.mode.clone(),
        report.seed.to_string(),
        format!("{}", report.objective),
        format!("{}", report.weight),
        report.diagnostics.oracle_calls.to_string(),
        format!("{wall_ms:.3}"),
    ]
}

fn append_csv(path: &Path, rows: &[Vec<String>]) -> std::io::Result<()> {
    let fresh = !path.exists();
    let file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    if fresh {
        writer.write_record(CSV_HEADER.split(','))?;
    }
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()
}

fn cmd_solve(args: SolveArgs) -> ExitCode {
    let (file, instance) = match load_instance(&args.instance) {
        Ok(v) => v,
        Err((code, msg)) => return fail(code, msg),
    };
    let epsilon = args.epsilon.unwrap_or(file.epsilon);
    if !(0.0 < epsilon && epsilon < 1.0) {
        return fail(3, format!("epsilon {epsilon} outside (0, 1)"));
    }
    let started = Instant::now();
    let report = match run_algorithm(
        args.algorithm,
        args.mode,
        &instance,
        epsilon,
        args.seed,
        args.budget,
    ) {
        Ok(r) => r,
        Err(e) => return fail(exit_code_for(&e), e),
    };
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{json}");
    if let Some(path) = &args.out_json {
        if let Err(e) = fs::write(path, format!("{json}\n")) {
            return fail(3, format!("writing {}: {e}", path.display()));
        }
    }
    if let Some(path) = &args.out_csv {
        let id = args.instance.display().to_string();
        if let Err(e) = append_csv(path, &[csv_row(&id, &report, wall_ms)]) {
            return fail(3, format!("writing {}: {e}", path.display()));
        }
    }
    ExitCode::SUCCESS
}

#[derive(Default, Deserialize)]
struct BenchConfigFile {
    instances: Option<Vec<PathBuf>>,
    algorithms: Option<Vec<String>>,
    modes: Option<Vec<String>>,
    epsilons: Option<Vec<f64>>,
    seed: Option<u64>,
    trials: Option<usize>,
    jobs: Option<usize>,
    out_csv: Option<PathBuf>,
    out_json: Option<PathBuf>,
}

#[derive(Serialize)]
struct BenchSummaryRow {
    instance: String,
    algorithm: String,
    mode: String,
    epsilon: f64,
    mean_objective: f64,
    mean_ratio_to_optimum: Option<f64>,
    rows: usize,
    failures: usize,
}

type CellOutcome = (usize, Result<(RunReport, f64), String>);

fn cmd_bench(args: BenchArgs) -> ExitCode {
    let file_cfg: BenchConfigFile = match &args.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(text) => match serde_json::from_str(&text) {
                Ok(cfg) => cfg,
                Err(e) => return fail(3, format!("config parse: {e}")),
            },
            Err(e) => return fail(3, format!("reading {}: {e}", path.display())),
        },
        None => BenchConfigFile::default(),
    };
    let instances = if args.instances.is_empty() {
        file_cfg.instances.unwrap_or_default()
    } else {
        args.instances.clone()
    };
    if instances.is_empty() {
        return fail(2, "bench needs at least one --instance");
    }
    let algorithms: Vec<Algorithm> = if args.algorithms.is_empty() {
        let names = file_cfg
            .algorithms
            .unwrap_or_else(|| vec!["dispatch".into()]);
        match names
            .iter()
            .map(|n| Algorithm::from_str(n, true))
            .collect::<Result<Vec<_>, _>>()
        {
            Ok(v) => v,
            Err(e) => return fail(2, format!("config algorithm: {e}")),
        }
    } else {
        args.algorithms.clone()
    };
    let modes: Vec<Mode> = if args.modes.is_empty() {
        let names = file_cfg.modes.unwrap_or_else(|| vec!["known-O".into()]);
        match names
            .iter()
            .map(|n| Mode::from_str(n, true))
            .collect::<Result<Vec<_>, _>>()
        {
            Ok(v) => v,
            Err(e) => return fail(2, format!("config mode: {e}")),
        }
    } else {
        args.modes.clone()
    };
    let epsilons = if args.epsilons.is_empty() {
        file_cfg.epsilons.unwrap_or_else(|| vec![0.25])
    } else {
        args.epsilons.clone()
    };
    let trials = args.trials.or(file_cfg.trials).unwrap_or(1).max(1);
    let seed_base = args.seed.or(file_cfg.seed).unwrap_or(0);
    let jobs = args.jobs.or(file_cfg.jobs).unwrap_or(1).max(1);
    let out_csv = args.out_csv.clone().or(file_cfg.out_csv);
    let out_json = args.out_json.clone().or(file_cfg.out_json);
    if !epsilons.iter().all(|e| 0.0 < *e && *e < 1.0) {
        return fail(3, "bench epsilon values must lie in (0, 1)");
    }

    // Load instances once; compute brute-force optima where size permits.
    let mut loaded = Vec::new();
    for path in &instances {
        match load_instance(path) {
            Ok((_, instance)) => {
                let optimum = (instance.n() <= knapsub::driver::BRUTE_CAP)
                    .then(|| {
                        brute_force(&instance.f, &instance.w)
                            .ok()
                            .map(|r| r.objective)
                    })
                    .flatten();
                loaded.push((path.display().to_string(), instance, optimum));
            }
            Err((code, msg)) => return fail(code, msg),
        }
    }

    struct Cell {
        instance_idx: usize,
        algorithm: Algorithm,
        mode: Mode,
        epsilon: f64,
        seed: u64,
    }
    let mut cells = Vec::new();
    for (instance_idx, _) in loaded.iter().enumerate() {
        for &algorithm in &algorithms {
            for &mode in &modes {
                for &epsilon in &epsilons {
                    for trial in 0..trials {
                        cells.push(Cell {
                            instance_idx,
                            algorithm,
                            mode,
                            epsilon,
                            seed: seed_base + trial as u64,
                        });
                    }
                }
            }
        }
    }

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(p) => p,
        Err(e) => return fail(3, format!("worker pool: {e}")),
    };
    let mut results: Vec<CellOutcome> = pool.install(|| {
        cells
            .par_iter()
            .enumerate()
            .map(|(i, cell)| {
                let (_, instance, _) = &loaded[cell.instance_idx];
                let started = Instant::now();
                let out = run_algorithm(
                    cell.algorithm,
                    cell.mode,
                    instance,
                    cell.epsilon,
                    cell.seed,
                    DEFAULT_PROFILE_BUDGET,
                )
                .map(|r| (r, started.elapsed().as_secs_f64() * 1e3))
                .map_err(|e| e.to_string());
                (i, out)
            })
            .collect()
    });
    results.sort_by_key(|(i, _)| *i);

    // CSV rows; partial failures become empty-field rows and the run goes on.
    let mut rows = Vec::new();
    let mut summaries: std::collections::BTreeMap<String, (f64, Option<f64>, usize, usize)> =
        std::collections::BTreeMap::new();
    for (i, outcome) in &results {
        let cell = &cells[*i];
        let (id, _, optimum) = &loaded[cell.instance_idx];
        let key = format!(
            "{id}|{}|{}|{}",
            cell.algorithm.name(),
            cell.mode.name(),
            cell.epsilon
        );
        let entry = summaries.entry(key).or_insert((0.0, Some(0.0), 0, 0));
        match outcome {
            Ok((report, wall_ms)) => {
                rows.push(csv_row(id, report, *wall_ms));
                entry.0 += report.objective;
                entry.1 = match (entry.1, optimum) {
                    (Some(acc), Some(opt)) if *opt > 0.0 => Some(acc + report.objective / opt),
                    _ => None,
                };
                entry.2 += 1;
            }
            Err(msg) => {
                rows.push(vec![
                    id.clone(),
                    cell.algorithm.name().into(),
                    cell.mode.name().into(),
                    cell.seed.to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                ]);
                eprintln!("cell failed ({id}, {}): {msg}", cell.algorithm.name());
                entry.3 += 1;
            }
        }
    }

    if let Some(path) = &out_csv {
        if let Err(e) = append_csv(path, &rows) {
            return fail(3, format!("writing {}: {e}", path.display()));
        }
    }
    let summary: Vec<BenchSummaryRow> = summaries
        .iter()
        .map(|(key, (obj_sum, ratio_sum, n, failures))| {
            let mut parts = key.split('|');
            let instance = parts.next().unwrap_or_default().to_string();
            let algorithm = parts.next().unwrap_or_default().to_string();
            let mode = parts.next().unwrap_or_default().to_string();
            let epsilon: f64 = parts.next().unwrap_or("0").parse().unwrap_or(0.0);
            BenchSummaryRow {
                instance,
                algorithm,
                mode,
                epsilon,
                mean_objective: if *n > 0 {
                    obj_sum / *n as f64
                } else {
                    f64::NAN
                },
                mean_ratio_to_optimum: ratio_sum.filter(|_| *n > 0).map(|r| r / *n as f64),
                rows: *n,
                failures: *failures,
            }
        })
        .collect();
    let summary_json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    println!("{summary_json}");
    if let Some(path) = &out_json {
        if let Err(e) = fs::write(path, format!("{summary_json}\n")) {
            return fail(3, format!("writing {}: {e}", path.display()));
        }
    }
    ExitCode::SUCCESS
}

fn cmd_verify(args: VerifyArgs) -> ExitCode {
    let results = if args.suite == "all" {
        match verify::run_all(args.seed) {
            Ok(r) => r,
            Err(e) => return fail(2, e),
        }
    } else {
        match verify::run_suite(&args.suite, args.seed) {
            Ok(r) => vec![r],
            Err(e) => return fail(2, e),
        }
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&results).expect("results serialize")
    );
    let _ = std::io::stdout().flush();
    ExitCode::SUCCESS
}

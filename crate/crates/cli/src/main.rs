//! Command-line front end for the synthesis engine and its data pipeline.
//!
//! Every subcommand prints a one-line JSON summary on stdout. Exit status is
//! 0 on success, 1 on usage or I/O errors and 2 when `synth` finds no
//! circuit.

use std::fs;
use std::io::{self, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aigsynth::bench::{ablation_sweep, run_eval, BenchOptions, BenchReport, TargetSet};
use aigsynth::cutgen::{build_dataset, DatasetConfig};
use aigsynth::evaluator::{serve_uniform, EvaluatorConfig};
use aigsynth::oracle::{self, exact_minimal, MAX_DEPTH};
use aigsynth::parallel::{self, Execution};
use aigsynth::search::{synthesize, write_records, SearchConfig};
use aigsynth::TruthTable;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "aigsynth",
    version,
    about = "Synthesize AND-Inverter Graphs from truth tables"
)]
struct Cli {
    /// Base random seed
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Log filter: error, warn, info, debug or trace
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize one target and write it as ASCII AIGER
    Synth(SynthArgs),
    /// Extract cuts from AIGER files into JSONL training shards
    ExtractCuts(ExtractArgs),
    /// Run synthesis over a target file and write CSV/JSON reports
    Evaluate(EvaluateArgs),
    /// Sweep simulation counts over a target file
    Ablate(AblateArgs),
    /// Exact minimum AND count by exhaustive enumeration
    Oracle(OracleArgs),
    /// Write a target file of every non-trivial function, or a sample of it
    Targets(TargetsArgs),
    /// Serve the uniform policy over the evaluator protocol
    StubServer(StubArgs),
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// Simulations per committed gate
    #[arg(long, default_value_t = 128)]
    sims: usize,
    /// Maximum AND nodes per episode
    #[arg(long, default_value_t = 30)]
    max_nodes: usize,
    /// Maximum AND nodes added by one simulation [default: min(20, max-nodes)]
    #[arg(long)]
    sim_depth: Option<usize>,
    /// uniform, heuristic, remote:HOST:PORT or spawn:COMMAND
    #[arg(long, default_value = "heuristic")]
    evaluator: String,
    /// Heuristic softmax temperature
    #[arg(long, default_value_t = 8.0)]
    beta: f64,
    /// Remote evaluator timeout in seconds
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
    /// PUCT exploration constant
    #[arg(long, default_value_t = 1.5)]
    c_puct: f64,
    /// Weight of Dirichlet noise in the root priors
    #[arg(long, default_value_t = 0.25)]
    dirichlet_mix: f64,
    /// Back up only terminal rewards
    #[arg(long)]
    no_value: bool,
}

impl SearchArgs {
    fn config(&self, seed: u64) -> SearchConfig {
        SearchConfig {
            sims: self.sims,
            c_puct: self.c_puct,
            dirichlet_mix: self.dirichlet_mix,
            sim_depth: self.sim_depth.unwrap_or(self.max_nodes.min(20)),
            n_max: self.max_nodes,
            use_value: !self.no_value,
            seed,
            ..Default::default()
        }
    }

    fn evaluator(&self) -> Result<EvaluatorConfig, String> {
        let mut e: EvaluatorConfig = self.evaluator.parse().map_err(|e| format!("{e}"))?;
        e.beta = self.beta;
        if self.timeout.is_nan() || self.timeout <= 0.0 {
            return Err(format!("timeout must be positive, got {}", self.timeout));
        }
        e.timeout = std::time::Duration::from_secs_f64(self.timeout);
        Ok(e)
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Target truth table in hex, most significant digit first
    #[arg(long)]
    target: String,
    /// Number of inputs
    #[arg(long)]
    inputs: usize,
    #[command(flatten)]
    search: SearchArgs,
    /// Output AAG file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replay records JSONL file
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Args)]
struct ExtractArgs {
    /// Leaves per cut
    #[arg(long)]
    inputs: usize,
    /// Extraction rounds per root node
    #[arg(long, default_value_t = 1)]
    per_root: usize,
    /// Stop after this many unique samples
    #[arg(long)]
    max_samples: Option<usize>,
    /// Lines per shard file
    #[arg(long, default_value_t = 100_000)]
    shard_size: usize,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
    /// AIGER files (.aag or .aig)
    #[arg(required = true)]
    files: Vec<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Target file
    #[arg(long)]
    targets: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    /// Report prefix: writes PREFIX.csv, PREFIX.json and PREFIX.timings.csv
    #[arg(long)]
    out: PathBuf,
    /// Directory for the synthesized AIGs
    #[arg(long)]
    aig_dir: Option<PathBuf>,
    /// Directory of external <hex>.aag results to compare against
    #[arg(long)]
    baseline_dir: Option<PathBuf>,
    /// Add exact minimum sizes (at most 3 inputs)
    #[arg(long)]
    oracle: bool,
    /// Exclude evaluator errors from the success-rate denominator
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct AblateArgs {
    /// Target file
    #[arg(long)]
    targets: PathBuf,
    /// Comma-separated simulation counts
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128")]
    sims_list: Vec<usize>,
    #[command(flatten)]
    search: SearchArgs,
    /// Report prefix: writes PREFIX.csv and PREFIX.json
    #[arg(long)]
    out: PathBuf,
    /// Exclude evaluator errors from the success-rate denominator
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct OracleArgs {
    /// Number of inputs
    #[arg(long)]
    inputs: usize,
    /// Single target in hex; omit for the full table (at most 3 inputs)
    #[arg(long)]
    target: Option<String>,
    /// Largest AND count to try
    #[arg(long, default_value_t = MAX_DEPTH)]
    max_depth: usize,
    /// JSON cache for the full table
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Write the minimum circuit for --target here
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Args)]
struct TargetsArgs {
    /// Number of inputs (at most 4)
    #[arg(long)]
    inputs: usize,
    /// Keep this many targets, chosen with --seed
    #[arg(long)]
    count: Option<usize>,
    /// Output target file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StubArgs {
    /// Listen on HOST:PORT instead of stdin/stdout
    #[arg(long)]
    listen: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Error(String),
    Unsolved,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Error(e.to_string())
    }
}

fn emit(v: serde_json::Value) {
    println!("{v}");
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    }
    fs::write(path, contents).map_err(|e| Failure::Error(format!("{}: {e}", path.display())))
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

fn parse_target(hex: &str, n: usize) -> Result<TruthTable, Failure> {
    TruthTable::from_hex(hex, n).map_err(|e| Failure::Error(format!("--target: {e}")))
}

fn synth(a: SynthArgs, seed: u64) -> Result<(), Failure> {
    let target = parse_target(&a.target, a.inputs)?;
    let cfg = a.search.config(seed);
    let mut eval = a.search.evaluator()?.build()?;
    let r = synthesize(&target, a.inputs, &mut eval, &cfg)?;
    if let (Some(path), Some(g)) = (&a.out, &r.aig) {
        write_file(path, g.to_aag())?;
    }
    if let Some(path) = &a.records {
        let mut buf = Vec::new();
        write_records(&mut buf, &r.records)?;
        write_file(path, buf)?;
    }
    emit(json!({
        "command": "synth",
        "target": target.to_hex(),
        "inputs": a.inputs,
        "success": r.success,
        "and_nodes": r.success.then_some(r.and_count),
        "steps": r.steps,
        "runtime_s": r.runtime.as_secs_f64(),
        "seed": seed,
        "out": a.out.filter(|_| r.success),
    }));
    if r.success {
        Ok(())
    } else {
        Err(Failure::Unsolved)
    }
}

fn extract(a: ExtractArgs, seed: u64) -> Result<(), Failure> {
    let cfg = DatasetConfig {
        n: a.inputs,
        per_root: a.per_root,
        seed,
        shard_size: a.shard_size,
        max_samples: a.max_samples,
        exec: Execution::default(),
    };
    let m = build_dataset(&a.files, &cfg, &a.out)?;
    emit(json!({
        "command": "extract-cuts",
        "samples": m.samples,
        "mean_and_nodes": m.mean_and_nodes,
        "shards": m.shards.len(),
        "duplicates": m.duplicates,
        "rejected": m.rejected,
        "source_errors": m.errors.len(),
        "seed": seed,
        "out": a.out,
    }));
    if m.errors.len() == a.files.len() {
        return Err(Failure::Error("no readable input files".into()));
    }
    Ok(())
}

fn write_report(r: &BenchReport, prefix: &Path) -> Result<(), Failure> {
    write_file(&with_ext(prefix, ".csv"), r.csv_string())?;
    let mut t = Vec::new();
    r.write_timings(&mut t)?;
    write_file(&with_ext(prefix, ".timings.csv"), t)?;
    let text = serde_json::to_string_pretty(&r.summary_json())? + "\n";
    write_file(&with_ext(prefix, ".json"), text)
}

fn evaluate(a: EvaluateArgs, seed: u64) -> Result<(), Failure> {
    let set = TargetSet::read(&a.targets)?;
    let opts = BenchOptions {
        exec: Execution::default(),
        strict: a.strict,
        aig_dir: a.aig_dir.clone(),
    };
    let mut r = run_eval(&set, &a.search.evaluator()?, &a.search.config(seed), &opts)?;
    if a.oracle {
        let table = oracle::minimal_size_table(set.n, MAX_DEPTH, Execution::default())?;
        r.attach_oracle(&table);
    }
    if let Some(dir) = &a.baseline_dir {
        r.compare_external(dir);
    }
    if let Some(dir) = &a.aig_dir {
        let problems = r.audit(dir);
        if !problems.is_empty() {
            return Err(Failure::Error(format!("AIG audit failed: {}", problems.join("; "))));
        }
    }
    write_report(&r, &a.out)?;
    let agg = r.aggregates();
    emit(json!({
        "command": "evaluate",
        "targets": agg.targets,
        "success_rate": agg.success_rate,
        "mean_and_nodes": agg.mean_and_nodes,
        "mean_runtime_s": agg.mean_runtime_s,
        "errored": agg.errored,
        "seed": seed,
        "report": with_ext(&a.out, ".csv"),
    }));
    Ok(())
}

fn ablate(a: AblateArgs, seed: u64) -> Result<(), Failure> {
    if a.sims_list.is_empty() {
        return Err(Failure::Error("--sims-list is empty".into()));
    }
    let set = TargetSet::read(&a.targets)?;
    let opts = BenchOptions {
        strict: a.strict,
        ..Default::default()
    };
    let ab = ablation_sweep(
        &set,
        &a.search.evaluator()?,
        &a.search.config(seed),
        &a.sims_list,
        &opts,
    )?;
    let mut csv = Vec::new();
    ab.write_csv(&mut csv)?;
    write_file(&with_ext(&a.out, ".csv"), csv)?;
    let summary = json!({
        "targets": set.targets.len(),
        "rows": ab.rows,
        "union_solved": ab.union_solved,
        "union_success_rate": ab.union_success_rate,
        "seed": seed,
    });
    write_file(
        &with_ext(&a.out, ".json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    emit(json!({
        "command": "ablate",
        "settings": ab.rows.len(),
        "union_success_rate": ab.union_success_rate,
        "seed": seed,
        "report": with_ext(&a.out, ".csv"),
    }));
    Ok(())
}

fn run_oracle(a: OracleArgs, seed: u64) -> Result<(), Failure> {
    if let Some(hex) = &a.target {
        let t = parse_target(hex, a.inputs)?;
        let r = exact_minimal(&t, a.inputs, a.max_depth)?;
        if let Some(path) = &a.witness {
            write_file(path, r.witness.to_aag())?;
        }
        emit(json!({
            "command": "oracle",
            "target": t.to_hex(),
            "size": r.size,
            "explored": r.explored,
            "seed": seed,
        }));
        return Ok(());
    }
    let table = match &a.cache {
        Some(path) => oracle::cached_size_table(path, a.inputs, a.max_depth, Execution::default())?,
        None => oracle::minimal_size_table(a.inputs, a.max_depth, Execution::default())?,
    };
    let mut histogram = std::collections::BTreeMap::new();
    for &s in table.sizes.values() {
        *histogram.entry(s).or_insert(0usize) += 1;
    }
    emit(json!({
        "command": "oracle",
        "inputs": a.inputs,
        "functions": table.sizes.len(),
        "by_size": histogram,
        "residual": table.residual,
        "seed": seed,
    }));
    Ok(())
}

fn targets(a: TargetsArgs, seed: u64) -> Result<(), Failure> {
    let mut set = TargetSet::exhaustive(a.inputs)?;
    if let Some(k) = a.count {
        set = set.subset(k, seed);
    }
    write_file(&a.out, set.to_text())?;
    emit(json!({
        "command": "targets",
        "inputs": a.inputs,
        "targets": set.targets.len(),
        "seed": seed,
        "out": a.out,
    }));
    Ok(())
}

fn stub_server(a: StubArgs) -> Result<(), Failure> {
    match a.listen {
        None => {
            let stdout = io::stdout();
            serve_uniform(io::stdin().lock(), BufWriter::new(stdout.lock()))?;
        }
        Some(addr) => {
            let listener = TcpListener::bind(&addr)?;
            eprintln!("listening on {}", listener.local_addr()?);
            for stream in listener.incoming() {
                let stream = stream?;
                std::thread::spawn(move || {
                    if let Ok(r) = stream.try_clone() {
                        if let Err(e) = serve_uniform(BufReader::new(r), stream) {
                            log::warn!("stub connection: {e}");
                        }
                    }
                });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::new().parse_filters(&cli.log_level).init();
    let seed = cli.seed;
    let result = parallel::with_threads(cli.threads, move || match cli.command {
        Command::Synth(a) => synth(a, seed),
        Command::ExtractCuts(a) => extract(a, seed),
        Command::Evaluate(a) => evaluate(a, seed),
        Command::Ablate(a) => ablate(a, seed),
        Command::Oracle(a) => run_oracle(a, seed),
        Command::Targets(a) => targets(a, seed),
        Command::StubServer(a) => stub_server(a),
    });
    let _ = io::stdout().flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Unsolved) => ExitCode::from(2),
        Err(Failure::Error(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

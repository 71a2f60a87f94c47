//! Evaluation harness: synthesis over target sets, aggregate metrics,
//! simulation-count sweeps and comparison against external AIGs.
//!
//! Target files hold a `n=<k>` header followed by one hex table per line,
//! optionally followed by the size of the cut the target came from:
//!
//! ```text
//! n=3
//! 8F 2
//! E8
//! ```

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::aig::Aig;
use crate::evaluator::EvaluatorConfig;
use crate::oracle::{trivial_realization, SizeTable};
use crate::parallel::{self, Execution};
use crate::search::{synthesize, SearchConfig};
use crate::truthtable::TruthTable;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Config(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.display().to_string(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchTarget {
    pub table: TruthTable,
    /// AND count of the cut the target was extracted from.
    pub cut_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetSet {
    pub n: usize,
    pub targets: Vec<BenchTarget>,
}

impl TargetSet {
    pub fn new(n: usize, tables: impl IntoIterator<Item = TruthTable>) -> Self {
        TargetSet {
            n,
            targets: tables
                .into_iter()
                .map(|table| BenchTarget { table, cut_size: None })
                .collect(),
        }
    }

    /// Parses a target file. A file with no targets needs no header.
    pub fn parse(text: &str) -> Result<Self, BenchError> {
        let mut n = None;
        let mut targets = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| BenchError::Parse { line: i + 1, message };
            if let Some(k) = line.strip_prefix("n=") {
                if n.is_some() {
                    return Err(err("duplicate header".into()));
                }
                n = Some(
                    k.trim()
                        .parse::<usize>()
                        .map_err(|e| err(format!("bad input count: {e}")))?,
                );
                continue;
            }
            let n = n.ok_or_else(|| err("target before the n=<k> header".into()))?;
            let mut fields = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty());
            let hex = fields.next().expect("line is not empty");
            let table = TruthTable::from_hex(hex, n).map_err(|e| err(e.to_string()))?;
            let cut_size = fields
                .next()
                .map(|f| f.parse::<usize>().map_err(|e| err(format!("bad cut size {f:?}: {e}"))))
                .transpose()?;
            if let Some(extra) = fields.next() {
                return Err(err(format!("unexpected field {extra:?}")));
            }
            targets.push(BenchTarget { table, cut_size });
        }
        Ok(TargetSet {
            n: n.unwrap_or(0),
            targets,
        })
    }

    pub fn read(path: &Path) -> Result<Self, BenchError> {
        Self::parse(&fs::read_to_string(path).map_err(io_err(path))?)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("n={}\n", self.n);
        for t in &self.targets {
            match t.cut_size {
                Some(k) => writeln!(s, "{} {k}", t.table.to_hex()),
                None => writeln!(s, "{}", t.table.to_hex()),
            }
            .expect("writing to a String");
        }
        s
    }

    /// Every `n`-input function except constants and (possibly inverted)
    /// projections, in ascending table order. Requires `n <= 4`.
    pub fn exhaustive(n: usize) -> Result<Self, BenchError> {
        if n == 0 || n > 4 {
            return Err(BenchError::Config(format!("exhaustive sets need 1 <= n <= 4, got {n}")));
        }
        let total = 1u64 << (1 << n);
        let tables = (0..total)
            .map(|v| TruthTable::from_fn(n, |k| (v >> k) & 1 == 1).expect("n checked"))
            .filter(|t| trivial_realization(t).is_none());
        Ok(Self::new(n, tables))
    }

    /// `k` targets chosen by a seeded shuffle, kept in their original order.
    pub fn subset(&self, k: usize, seed: u64) -> Self {
        let mut idx: Vec<usize> = (0..self.targets.len()).collect();
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut keep: Vec<usize> = idx.into_iter().take(k).collect();
        keep.sort_unstable();
        TargetSet {
            n: self.n,
            targets: keep.into_iter().map(|i| self.targets[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Baseline {
    Absent,
    Unreadable(String),
    /// The file's output table differs from the target.
    Mismatch,
    Size(usize),
}

impl Baseline {
    fn status(&self) -> &'static str {
        match self {
            Baseline::Absent => "absent",
            Baseline::Unreadable(_) => "unreadable",
            Baseline::Mismatch => "mismatch",
            Baseline::Size(_) => "ok",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub target: TruthTable,
    pub success: bool,
    /// AND count of the synthesized AIG on success.
    pub and_nodes: Option<usize>,
    pub runtime_s: f64,
    pub sims: usize,
    /// Evaluator or configuration failure.
    pub error: Option<String>,
    pub cut_size: Option<usize>,
    pub oracle_size: Option<usize>,
    pub baseline: Option<Baseline>,
    pub aig: Option<Aig>,
}

impl BenchRow {
    pub fn errored(&self) -> bool {
        self.error.is_some()
    }

    fn status(&self) -> &'static str {
        if self.errored() {
            "error"
        } else if self.success {
            "success"
        } else {
            "failed"
        }
    }

    /// Relative size difference against the external AIG, in percent.
    pub fn delta_pct(&self) -> Option<f64> {
        match (self.and_nodes, &self.baseline) {
            (Some(ours), Some(Baseline::Size(ext))) if *ext > 0 => {
                Some((ours as f64 - *ext as f64) / *ext as f64 * 100.0)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleSummary {
    /// Successful rows with a known oracle size.
    pub compared: usize,
    pub mean_gap: Option<f64>,
    pub optimal: usize,
    pub optimal_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExternalSummary {
    pub compared: usize,
    pub absent: usize,
    /// Unreadable or mismatching baselines.
    pub flagged: usize,
    pub mean_delta_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregates {
    pub targets: usize,
    pub successes: usize,
    pub errored: usize,
    /// Percent; `None` when no row counts.
    pub success_rate: Option<f64>,
    /// Over successful rows only.
    pub mean_and_nodes: Option<f64>,
    pub mean_runtime_s: Option<f64>,
    pub oracle: Option<OracleSummary>,
    pub external: Option<ExternalSummary>,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut sum, mut k) = (0.0, 0usize);
    for x in xs {
        sum += x;
        k += 1;
    }
    (k > 0).then(|| sum / k as f64)
}

#[derive(Debug, Clone, Default)]
pub struct BenchOptions {
    pub exec: Execution,
    /// Exclude errored rows from the success-rate denominator.
    pub strict: bool,
    /// Directory receiving `<hex>.aag` for every success.
    pub aig_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub n: usize,
    pub sims: usize,
    pub evaluator: String,
    pub seed: u64,
    pub strict: bool,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Recomputed from the rows on every call.
    pub fn aggregates(&self) -> Aggregates {
        let successes: Vec<&BenchRow> = self.rows.iter().filter(|r| r.success).collect();
        let errored = self.rows.iter().filter(|r| r.errored()).count();
        let denom = self.rows.len() - if self.strict { errored } else { 0 };
        let oracle = self.rows.iter().any(|r| r.oracle_size.is_some()).then(|| {
            let pairs: Vec<(usize, usize)> = successes
                .iter()
                .filter_map(|r| Some((r.and_nodes?, r.oracle_size?)))
                .collect();
            let optimal = pairs.iter().filter(|(a, o)| a == o).count();
            OracleSummary {
                compared: pairs.len(),
                mean_gap: mean(pairs.iter().map(|&(a, o)| a as f64 - o as f64)),
                optimal,
                optimal_rate: (!pairs.is_empty()).then(|| optimal as f64 / pairs.len() as f64 * 100.0),
            }
        });
        let external = self.rows.iter().any(|r| r.baseline.is_some()).then(|| ExternalSummary {
            compared: self.rows.iter().filter(|r| r.delta_pct().is_some()).count(),
            absent: self
                .rows
                .iter()
                .filter(|r| r.baseline == Some(Baseline::Absent))
                .count(),
            flagged: self
                .rows
                .iter()
                .filter(|r| matches!(r.baseline, Some(Baseline::Mismatch | Baseline::Unreadable(_))))
                .count(),
            mean_delta_pct: mean(self.rows.iter().filter_map(|r| r.delta_pct())),
        });
        Aggregates {
            targets: self.rows.len(),
            successes: successes.len(),
            errored,
            success_rate: (denom > 0).then(|| successes.len() as f64 / denom as f64 * 100.0),
            mean_and_nodes: mean(successes.iter().filter_map(|r| r.and_nodes.map(|k| k as f64))),
            mean_runtime_s: mean(self.rows.iter().map(|r| r.runtime_s)),
            oracle,
            external,
        }
    }

    /// Hex tables of the successful targets.
    pub fn solved(&self) -> BTreeSet<String> {
        self.rows
            .iter()
            .filter(|r| r.success)
            .map(|r| r.target.to_hex())
            .collect()
    }

    /// Per-target rows. Runtimes are left out so that identical runs give
    /// identical files; see [`BenchReport::write_timings`].
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), BenchError> {
        let has_cut = self.rows.iter().any(|r| r.cut_size.is_some());
        let has_oracle = self.rows.iter().any(|r| r.oracle_size.is_some());
        let has_ext = self.rows.iter().any(|r| r.baseline.is_some());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["target", "status", "and_nodes", "sims"];
        if has_cut {
            header.push("cut_size");
        }
        if has_oracle {
            header.extend(["oracle_size", "gap"]);
        }
        if has_ext {
            header.extend(["external_status", "external_size", "delta_pct"]);
        }
        header.push("error");
        w.write_record(&header)?;
        let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let mut rec = vec![
                r.target.to_hex(),
                r.status().into(),
                opt(r.and_nodes),
                r.sims.to_string(),
            ];
            if has_cut {
                rec.push(opt(r.cut_size));
            }
            if has_oracle {
                rec.push(opt(r.oracle_size));
                let gap = r.and_nodes.zip(r.oracle_size).map(|(a, o)| a as i64 - o as i64);
                rec.push(gap.map(|g| g.to_string()).unwrap_or_default());
            }
            if has_ext {
                let b = r.baseline.as_ref();
                rec.push(b.map(|b| b.status().to_string()).unwrap_or_default());
                rec.push(match b {
                    Some(Baseline::Size(k)) => k.to_string(),
                    _ => String::new(),
                });
                rec.push(r.delta_pct().map(|d| format!("{d:.2}")).unwrap_or_default());
            }
            rec.push(r.error.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| BenchError::Io {
            path: "<csv>".into(),
            source: e,
        })?;
        Ok(())
    }

    pub fn csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// `target,runtime_s` per row.
    pub fn write_timings<W: Write>(&self, out: W) -> Result<(), BenchError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["target", "runtime_s"])?;
        for r in &self.rows {
            w.write_record([r.target.to_hex(), format!("{:.6}", r.runtime_s)])?;
        }
        w.flush().map_err(|e| BenchError::Io {
            path: "<csv>".into(),
            source: e,
        })?;
        Ok(())
    }

    /// Aggregates plus run parameters.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "sims": self.sims,
            "evaluator": self.evaluator,
            "seed": self.seed,
            "strict": self.strict,
            "aggregates": self.aggregates(),
        })
    }

    /// Fills `oracle_size` from an exact size table.
    pub fn attach_oracle(&mut self, table: &SizeTable) {
        for r in &mut self.rows {
            r.oracle_size = table.get(&r.target);
        }
    }

    /// Reads `<hex>.aag` for every row from `dir` and records its size when
    /// it realizes the target.
    pub fn compare_external(&mut self, dir: &Path) {
        for r in &mut self.rows {
            let path = dir.join(format!("{}.aag", r.target.to_hex()));
            r.baseline = Some(if !path.exists() {
                Baseline::Absent
            } else {
                match Aig::read_file(&path).and_then(|g| Ok((g.output_table()?, g.and_count()))) {
                    Err(e) => Baseline::Unreadable(e.to_string()),
                    Ok((t, _)) if t != r.target => Baseline::Mismatch,
                    Ok((_, k)) => Baseline::Size(k),
                }
            });
        }
    }

    /// Writes `<hex>.aag` for every success into `dir`.
    pub fn write_aigs(&self, dir: &Path) -> Result<(), BenchError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for r in &self.rows {
            if let Some(g) = &r.aig {
                let path = dir.join(format!("{}.aag", r.target.to_hex()));
                fs::write(&path, g.to_aag()).map_err(io_err(&path))?;
            }
        }
        Ok(())
    }

    /// Re-reads every success from `dir` and checks it against its target.
    /// Returns one message per problem.
    pub fn audit(&self, dir: &Path) -> Vec<String> {
        let mut problems = Vec::new();
        for r in self.rows.iter().filter(|r| r.success) {
            let hex = r.target.to_hex();
            let path = dir.join(format!("{hex}.aag"));
            match Aig::read_file(&path) {
                Err(e) => problems.push(format!("{hex}: {e}")),
                Ok(g) => {
                    if let Some(v) = g.validate().first() {
                        problems.push(format!("{hex}: {v}"));
                    }
                    match g.output_table() {
                        Ok(t) if t == r.target => {}
                        Ok(t) => problems.push(format!("{hex}: file computes {}", t.to_hex())),
                        Err(e) => problems.push(format!("{hex}: {e}")),
                    }
                    if Some(g.and_count()) != r.and_nodes {
                        problems.push(format!("{hex}: file has {} AND nodes", g.and_count()));
                    }
                }
            }
        }
        problems
    }
}

/// Synthesizes every target with seed `cfg.seed + index`.
pub fn run_eval(
    set: &TargetSet,
    eval: &EvaluatorConfig,
    cfg: &SearchConfig,
    opts: &BenchOptions,
) -> Result<BenchReport, BenchError> {
    cfg.validate().map_err(|e| BenchError::Config(e.to_string()))?;
    let rows = parallel::map(&set.targets, opts.exec, |i, t| {
        let cfg = SearchConfig {
            seed: cfg.seed.wrapping_add(i as u64),
            ..cfg.clone()
        };
        let mut row = BenchRow {
            target: t.table.clone(),
            success: false,
            and_nodes: None,
            runtime_s: 0.0,
            sims: cfg.sims,
            error: None,
            cut_size: t.cut_size,
            oracle_size: None,
            baseline: None,
            aig: None,
        };
        let mut evaluator = match eval.build() {
            Ok(e) => e,
            Err(e) => {
                row.error = Some(e.to_string());
                return row;
            }
        };
        let start = Instant::now();
        let res = synthesize(&t.table, set.n, &mut evaluator, &cfg);
        row.runtime_s = start.elapsed().as_secs_f64();
        match res {
            Ok(r) => {
                row.success = r.success;
                row.and_nodes = r.success.then_some(r.and_count);
                row.aig = r.aig;
            }
            Err(e) => {
                log::warn!("{}: {e}", t.table.to_hex());
                row.error = Some(e.to_string());
            }
        }
        row
    });
    let report = BenchReport {
        n: set.n,
        sims: cfg.sims,
        evaluator: eval.to_string(),
        seed: cfg.seed,
        strict: opts.strict,
        rows,
    };
    if let Some(dir) = &opts.aig_dir {
        report.write_aigs(dir)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationRow {
    pub sims: usize,
    pub success_rate: Option<f64>,
    pub mean_and_nodes: Option<f64>,
    pub mean_runtime_s: Option<f64>,
    pub solved: usize,
}

#[derive(Debug, Clone)]
pub struct Ablation {
    pub rows: Vec<AblationRow>,
    /// Targets solved by at least one setting.
    pub union_solved: usize,
    pub union_success_rate: Option<f64>,
    pub reports: Vec<BenchReport>,
}

impl Ablation {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), BenchError> {
        let f = |x: Option<f64>, p: usize| x.map(|v| format!("{v:.p$}")).unwrap_or_default();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["sims", "success_pct", "mean_and_nodes", "mean_runtime_s", "solved"])?;
        for r in &self.rows {
            w.write_record([
                r.sims.to_string(),
                f(r.success_rate, 2),
                f(r.mean_and_nodes, 4),
                f(r.mean_runtime_s, 6),
                r.solved.to_string(),
            ])?;
        }
        w.write_record([
            "union".to_string(),
            f(self.union_success_rate, 2),
            String::new(),
            String::new(),
            self.union_solved.to_string(),
        ])?;
        w.flush().map_err(|e| BenchError::Io {
            path: "<csv>".into(),
            source: e,
        })?;
        Ok(())
    }
}

/// One [`run_eval`] per simulation count, all with the same seeds. AIGs go
/// to `sims<K>/` under `opts.aig_dir`.
pub fn ablation_sweep(
    set: &TargetSet,
    eval: &EvaluatorConfig,
    cfg: &SearchConfig,
    sims_list: &[usize],
    opts: &BenchOptions,
) -> Result<Ablation, BenchError> {
    let mut reports = Vec::with_capacity(sims_list.len());
    for &sims in sims_list {
        let c = SearchConfig { sims, ..cfg.clone() };
        let o = BenchOptions {
            aig_dir: opts.aig_dir.as_ref().map(|d| d.join(format!("sims{sims}"))),
            ..opts.clone()
        };
        reports.push(run_eval(set, eval, &c, &o)?);
    }
    let rows = reports
        .iter()
        .map(|r| {
            let a = r.aggregates();
            AblationRow {
                sims: r.sims,
                success_rate: a.success_rate,
                mean_and_nodes: a.mean_and_nodes,
                mean_runtime_s: a.mean_runtime_s,
                solved: a.successes,
            }
        })
        .collect();
    let union: BTreeSet<String> = reports.iter().flat_map(|r| r.solved()).collect();
    let total = set.targets.len();
    Ok(Ablation {
        rows,
        union_solved: union.len(),
        union_success_rate: (total > 0).then(|| union.len() as f64 / total as f64 * 100.0),
        reports,
    })
}

//! The `tailsort` command line.
//!
//! Every subcommand produces one table. CSV output starts with `#` metadata
//! lines (version, the resolved configuration, and a `command:` line that
//! reproduces the rows); JSON output carries the same data under `meta`.
//! Floats are printed with 12 significant digits. Exit codes: 0 on success,
//! 2 for usage or configuration errors, 3 for depth-cap and size errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::bounds::{chernoff_bound, BoundQuery, BoundVariant};
use crate::error::Error;
use crate::estimator::{
    self, delta_domination_experiment, distribution_equality_test_with, event_z_contrast,
    exact_f_distribution, rate_scan, Experiment, ExperimentKind, RateScanOptions, TailEstimate,
};
use crate::occupancy::{f_stat, g_stat};
use crate::rng::{trial_rng, DEFAULT_SEED};
use crate::sorting::{bucket_sort, random_keys, BucketVariant};
use crate::trials::{try_map_trials, Execution};
use crate::trie::{delta_trace, log2_ceil, SortedStrings, StringSet, DEFAULT_DEPTH_CAP};

#[derive(Debug, Parser)]
#[command(
    name = "tailsort",
    version,
    about = "Bucket Sort tails, occupancy and random tries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
struct Common {
    /// Master seed; every trial derives its randomness from it.
    #[arg(long, env = "TAILSORT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Longest common prefix tolerated between two random strings.
    #[arg(long, default_value_t = DEFAULT_DEPTH_CAP)]
    depth_cap: usize,
    /// Worker threads. Affects wall-clock time only.
    #[arg(long)]
    #[serde(skip)]
    threads: Option<usize>,
    /// Output file (stdout if omitted).
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip)]
    format: Option<Format>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Counted cost of Bucket Sort on uniform keys, per trial.
    SortCost {
        #[arg(long, default_value_t = 1024)]
        n: usize,
        /// b2 or blogb; both when omitted.
        #[arg(long)]
        variant: Option<BucketVariant>,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo estimate of one upper-tail probability.
    TailEstimate {
        #[arg(long)]
        kind: ExperimentKind,
        #[arg(long)]
        n: usize,
        /// Absolute threshold on the statistic.
        #[arg(long, conflicts_with = "c")]
        threshold: Option<f64>,
        /// Threshold as mean + c * n (analytic mean or a 10x pilot run).
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Tail rates at mean + c * n over a list of sizes.
    RateScan {
        #[arg(long)]
        kind: ExperimentKind,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Trials for pilot means (default: 10x --trials).
        #[arg(long)]
        pilot_trials: Option<u64>,
        #[command(flatten)]
        common: Common,
    },
    /// Path lengths of random minimal tries, per trial.
    TrieStats {
        #[arg(long)]
        n: usize,
        /// Prefix floor (default ceil(log2 n)).
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Per-insertion increments of the k-excess path length.
    DeltaTrace {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        /// Instead of raw traces, tabulate Pr[delta >= 16(tau+2)] against
        /// 2^-tau for tau = 0..=TAU_MAX.
        #[arg(long)]
        tau_max: Option<u32>,
        #[command(flatten)]
        common: Common,
    },
    /// Chi-square test: bucket occupancy vs trie node occupancy.
    DistEqual {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Chernoff bound values.
    BoundsTable {
        /// ch1..ch5; all when omitted.
        #[arg(long)]
        variant: Option<BoundVariant>,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Single delta; a fixed grid when omitted.
        #[arg(long)]
        delta: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Exact distribution of f for n <= 12.
    OracleExact {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Event Z under Quick Sort recursion vs Bucket Sort occupancy.
    QsCompare {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::SortCost { .. } => "sort-cost",
            Command::TailEstimate { .. } => "tail-estimate",
            Command::RateScan { .. } => "rate-scan",
            Command::TrieStats { .. } => "trie-stats",
            Command::DeltaTrace { .. } => "delta-trace",
            Command::DistEqual { .. } => "dist-equal",
            Command::BoundsTable { .. } => "bounds-table",
            Command::OracleExact { .. } => "oracle-exact",
            Command::QsCompare { .. } => "qs-compare",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::SortCost { common, .. }
            | Command::TailEstimate { common, .. }
            | Command::RateScan { common, .. }
            | Command::TrieStats { common, .. }
            | Command::DeltaTrace { common, .. }
            | Command::DistEqual { common, .. }
            | Command::BoundsTable { common, .. }
            | Command::OracleExact { common, .. }
            | Command::QsCompare { common, .. } => common,
        }
    }

    /// The subcommand's own options, for the metadata header.
    fn config(&self) -> Value {
        let mut v = match self {
            Command::SortCost {
                n, variant, trials, ..
            } => {
                json!({ "n": n, "variant": variant, "trials": trials })
            }
            Command::TailEstimate {
                kind,
                n,
                threshold,
                c,
                k,
                trials,
                ..
            } => {
                json!({ "kind": kind, "n": n, "threshold": threshold, "c": c, "k": k, "trials": trials })
            }
            Command::RateScan {
                kind,
                n_list,
                c,
                trials,
                pilot_trials,
                ..
            } => {
                json!({ "kind": kind, "n_list": n_list, "c": c, "trials": trials, "pilot_trials": pilot_trials })
            }
            Command::TrieStats { n, k, trials, .. } => json!({ "n": n, "k": k, "trials": trials }),
            Command::DeltaTrace {
                n,
                k,
                trials,
                tau_max,
                ..
            } => {
                json!({ "n": n, "k": k, "trials": trials, "tau_max": tau_max })
            }
            Command::DistEqual { n, trials, .. } => json!({ "n": n, "trials": trials }),
            Command::BoundsTable {
                variant, mu, delta, ..
            } => {
                json!({ "variant": variant, "mu": mu, "delta": delta })
            }
            Command::OracleExact { n, .. } => json!({ "n": n }),
            Command::QsCompare { n, trials, .. } => json!({ "n": n, "trials": trials }),
        };
        let common = self.common();
        let obj = v.as_object_mut().expect("config is an object");
        obj.insert("subcommand".into(), json!(self.name()));
        obj.insert("master_seed".into(), json!(common.seed));
        obj.insert("depth_cap".into(), json!(common.depth_cap));
        obj.insert("threads".into(), json!(common.threads));
        obj.insert("out".into(), json!(common.out));
        obj.insert("format".into(), json!(common.format));
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Bool(bool),
    Empty,
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x.into())
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i128)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x.into())
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_owned())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// Rounds to 12 significant digits.
fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Float text with 12 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(x);
    if r == 0.0 {
        "0".into()
    } else if (1e-5..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => json!(i),
            Cell::Float(x) if x.is_finite() => json!(round_sig(*x)),
            Cell::Float(x) => json!(format_float(*x)),
            Cell::Text(s) => json!(s),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    /// Extra top-level JSON members.
    extra: Map<String, Value>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
            extra: Map::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

const TAIL_COLUMNS: [&str; 11] = [
    "kind",
    "n",
    "c",
    "threshold",
    "trials",
    "successes",
    "p_hat",
    "ci_low",
    "ci_high",
    "rate_hat",
    "censored",
];

fn tail_cells(
    kind: ExperimentKind,
    n: usize,
    c: Option<f64>,
    threshold: f64,
    e: &TailEstimate,
) -> Vec<Cell> {
    vec![
        kind.name().into(),
        n.into(),
        c.into(),
        threshold.into(),
        e.trials.into(),
        e.successes.into(),
        e.p_hat.into(),
        e.ci_low.into(),
        e.ci_high.into(),
        e.rate_hat.into(),
        e.censored.into(),
    ]
}

fn check_trials(trials: u64) -> Result<(), Error> {
    if trials == 0 {
        Err(Error::Config("--trials must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn check_n(n: usize) -> Result<(), Error> {
    if n == 0 {
        Err(Error::Config("--n must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn execute(cmd: &Command) -> Result<Table, Error> {
    let common = cmd.common();
    let seed = common.seed;
    let exec = Execution::default();
    match cmd {
        Command::SortCost {
            n, variant, trials, ..
        } => {
            check_n(*n)?;
            check_trials(*trials)?;
            let variants = match variant {
                Some(v) => vec![*v],
                None => vec![BucketVariant::B2, BucketVariant::Blogb],
            };
            let mut table = Table::new(&[
                "trial",
                "n",
                "variant",
                "comparisons",
                "moves",
                "total_units",
                "f",
                "g",
                "units_per_n_plus_f",
            ]);
            let runs = try_map_trials(*trials, exec, |t| {
                let keys = random_keys(*n, &mut trial_rng(seed, t));
                Ok(variants
                    .iter()
                    .map(|&v| (v, bucket_sort(&keys, v)))
                    .collect::<Vec<_>>())
            })?;
            for (t, per_variant) in runs.into_iter().enumerate() {
                for (v, run) in per_variant {
                    let f = f_stat(&run.occupancy);
                    table.push(vec![
                        (t as u64).into(),
                        (*n).into(),
                        v.name().into(),
                        run.cost.comparisons.into(),
                        run.cost.moves.into(),
                        run.cost.total_units().into(),
                        f.into(),
                        g_stat(&run.occupancy).into(),
                        (run.cost.total_units() as f64 / (*n as u64 + f) as f64).into(),
                    ]);
                }
            }
            Ok(table)
        }
        Command::TailEstimate {
            kind,
            n,
            threshold,
            c,
            k,
            trials,
            ..
        } => {
            check_n(*n)?;
            check_trials(*trials)?;
            let mut e = Experiment::new(*kind, *n, 0.0).with_depth_cap(common.depth_cap);
            e.k = *k;
            let threshold = match (threshold, c) {
                (Some(t), _) => *t,
                (None, Some(c)) => {
                    let mean = match kind.analytic_mean(*n) {
                        Some(mu) => mu,
                        None => {
                            let pilot = estimator::sample_statistic(
                                &e,
                                10 * trials,
                                crate::rng::derive_seed(seed, 0x9170_0000 + *n as u64),
                                exec,
                            )?;
                            pilot.iter().sum::<f64>() / pilot.len() as f64
                        }
                    };
                    mean + c * *n as f64
                }
                (None, None) => {
                    return Err(Error::Config(
                        "tail-estimate needs --threshold or --c".into(),
                    ))
                }
            };
            e.threshold = threshold;
            e.c = *c;
            let est = estimator::estimate_tail_with(&e, *trials, seed, exec)?;
            let mut table = Table::new(&TAIL_COLUMNS);
            table.push(tail_cells(*kind, *n, *c, threshold, &est));
            Ok(table)
        }
        Command::RateScan {
            kind,
            n_list,
            c,
            trials,
            pilot_trials,
            ..
        } => {
            check_trials(*trials)?;
            for &n in n_list {
                check_n(n)?;
            }
            let scan = rate_scan(
                *kind,
                n_list,
                *c,
                *trials,
                seed,
                RateScanOptions {
                    pilot_trials: *pilot_trials,
                    exec,
                },
            )?;
            let mut table = Table::new(&[
                "kind",
                "n",
                "c",
                "mean",
                "mean_source",
                "threshold",
                "trials",
                "successes",
                "p_hat",
                "ci_low",
                "ci_high",
                "rate_hat",
                "rate_low",
                "rate_high",
                "rate_per_sqrt_n_log_n",
                "rate_per_n",
                "censored",
            ]);
            for r in &scan.rows {
                let e = &r.estimate;
                let (lo, hi) = e.rate_interval();
                table.push(vec![
                    kind.name().into(),
                    r.n.into(),
                    (*c).into(),
                    r.mean.into(),
                    match r.mean_source {
                        estimator::MeanSource::Analytic => "analytic",
                        estimator::MeanSource::Pilot => "pilot",
                    }
                    .into(),
                    r.threshold.into(),
                    e.trials.into(),
                    e.successes.into(),
                    e.p_hat.into(),
                    e.ci_low.into(),
                    e.ci_high.into(),
                    e.rate_hat.into(),
                    lo.into(),
                    hi.into(),
                    r.rate_per_sqrt_n_log_n.into(),
                    r.rate_per_n.into(),
                    e.censored.into(),
                ]);
            }
            Ok(table)
        }
        Command::TrieStats { n, k, trials, .. } => {
            check_n(*n)?;
            check_trials(*trials)?;
            let log_n = log2_ceil(*n);
            let k = k.unwrap_or(log_n);
            let rows = try_map_trials(*trials, exec, |t| {
                let set = StringSet::new(*n, rand::RngCore::next_u64(&mut trial_rng(seed, t)))
                    .with_depth_cap(common.depth_cap)?;
                let sorted = SortedStrings::new(&set)?;
                let nodes = sorted.node_occupancy(log_n as u32);
                Ok((
                    sorted.excess(0),
                    sorted.excess(k),
                    sorted.excess(log_n),
                    g_stat(&nodes),
                ))
            })?;
            let mut table = Table::new(&[
                "trial", "n", "k", "p0", "p_k", "excess", "n_log2_n", "g_nodes",
            ]);
            let n_log_n = *n as f64 * (*n as f64).log2();
            for (t, (p0, pk, excess, g)) in rows.into_iter().enumerate() {
                table.push(vec![
                    (t as u64).into(),
                    (*n).into(),
                    k.into(),
                    p0.into(),
                    pk.into(),
                    excess.into(),
                    n_log_n.into(),
                    g.into(),
                ]);
            }
            Ok(table)
        }
        Command::DeltaTrace {
            n,
            k,
            trials,
            tau_max,
            ..
        } => {
            check_n(*n)?;
            check_trials(*trials)?;
            let k = k.unwrap_or_else(|| log2_ceil(*n));
            if let Some(tau_max) = tau_max {
                let report = delta_domination_experiment(*n, k, *trials, seed, *tau_max, exec)?;
                let mut table = Table::new(&[
                    "n",
                    "k",
                    "runs",
                    "pooled",
                    "tau",
                    "threshold",
                    "exceed",
                    "frequency",
                    "bound",
                    "std_error",
                    "flagged",
                ]);
                for r in &report.rows {
                    table.push(vec![
                        (*n).into(),
                        k.into(),
                        report.runs.into(),
                        report.pooled.into(),
                        r.tau.into(),
                        r.threshold.into(),
                        r.exceed.into(),
                        r.frequency.into(),
                        r.bound.into(),
                        r.std_error.into(),
                        r.flagged.into(),
                    ]);
                }
                return Ok(table);
            }
            let traces = try_map_trials(*trials, exec, |t| {
                let set = StringSet::new(*n, rand::RngCore::next_u64(&mut trial_rng(seed, t)))
                    .with_depth_cap(common.depth_cap)?;
                delta_trace(&set, k)
            })?;
            let mut table = Table::new(&["trial", "i", "delta", "p_k"]);
            for (t, trace) in traces.into_iter().enumerate() {
                let mut acc = 0;
                for (i, d) in trace.deltas.into_iter().enumerate() {
                    acc += d;
                    table.push(vec![(t as u64).into(), i.into(), d.into(), acc.into()]);
                }
            }
            Ok(table)
        }
        Command::DistEqual { n, trials, .. } => {
            check_trials(*trials)?;
            let test = distribution_equality_test_with(*n, *trials, seed, exec)?;
            let mut table = Table::new(&["n", "trials", "statistic", "df", "cells", "p_value"]);
            table.push(vec![
                (*n).into(),
                (*trials).into(),
                test.statistic.into(),
                test.df.into(),
                test.cells.into(),
                test.p_value.into(),
            ]);
            Ok(table)
        }
        Command::BoundsTable {
            variant, mu, delta, ..
        } => {
            const GRID: [f64; 9] = [
                0.1,
                0.25,
                0.5,
                1.0,
                2.0,
                std::f64::consts::E,
                5.0,
                10.0,
                100.0,
            ];
            let variants = match variant {
                Some(v) => vec![*v],
                None => BoundVariant::ALL.to_vec(),
            };
            let deltas = match delta {
                Some(d) => vec![*d],
                None => GRID.to_vec(),
            };
            let mut table = Table::new(&["variant", "mu", "delta", "bound"]);
            for &v in &variants {
                for &d in &deltas {
                    if !v.admits(d) && !(variant.is_some() && delta.is_some()) {
                        continue;
                    }
                    let bound = chernoff_bound(&BoundQuery::new(v, *mu, d))?;
                    table.push(vec![v.name().into(), (*mu).into(), d.into(), bound.into()]);
                }
            }
            Ok(table)
        }
        Command::OracleExact { n, .. } => {
            let dist = exact_f_distribution(*n)?;
            let mut table = Table::new(&["f", "count", "assignments", "probability"]);
            let mut map = Map::new();
            for (f, count) in &dist.counts {
                let p = dist.format_probability(*f);
                map.insert(f.to_string(), json!(p));
                table.push(vec![
                    (*f).into(),
                    (*count).into(),
                    dist.assignments.into(),
                    p.into(),
                ]);
            }
            table
                .extra
                .insert("distribution".into(), Value::Object(map));
            table
                .extra
                .insert("mean".into(), json!(dist.mean().to_string()));
            Ok(table)
        }
        Command::QsCompare { n, trials, .. } => {
            check_trials(*trials)?;
            let r = event_z_contrast(*n, *trials, seed, exec)?;
            let mut table = Table::new(&[
                "arm",
                "n",
                "depth",
                "trials",
                "successes",
                "p_hat",
                "ci_low",
                "ci_high",
                "reference",
                "reference_kind",
            ]);
            for (arm, e, reference, kind) in [
                (
                    "quick_sort",
                    &r.quick_sort,
                    r.quick_sort_floor,
                    "lower_bound_1_over_n",
                ),
                (
                    "bucket_sort",
                    &r.bucket_sort,
                    r.bucket_sort_exact,
                    "exact_2_pow_minus_n",
                ),
            ] {
                table.push(vec![
                    arm.into(),
                    (*n).into(),
                    r.depth.into(),
                    e.trials.into(),
                    e.successes.into(),
                    e.p_hat.into(),
                    e.ci_low.into(),
                    e.ci_high.into(),
                    reference.into(),
                    kind.into(),
                ]);
            }
            Ok(table)
        }
    }
}

/// Flags dropped from the reproduction command: they never change the rows.
const NON_RESULT_FLAGS: [&str; 3] = ["--threads", "--out", "--format"];

fn reproduction_command(args: &[String], seed: u64, depth_cap: usize) -> String {
    let mut parts = vec!["tailsort".to_string()];
    let mut skip_next = false;
    let mut has_seed = false;
    let mut has_cap = false;
    for a in args.iter().skip(1) {
        if skip_next {
            skip_next = false;
            continue;
        }
        let flag = a.split('=').next().unwrap_or("");
        if NON_RESULT_FLAGS.contains(&flag) {
            skip_next = !a.contains('=');
            continue;
        }
        has_seed |= flag == "--seed";
        has_cap |= flag == "--depth-cap";
        parts.push(a.clone());
    }
    if !has_seed {
        parts.push(format!("--seed {seed}"));
    }
    if !has_cap {
        parts.push(format!("--depth-cap {depth_cap}"));
    }
    parts.join(" ")
}

fn render(table: &Table, format: Format, meta: &Map<String, Value>) -> String {
    match format {
        Format::Csv => {
            let mut out = String::new();
            for (key, value) in meta {
                let text = match value {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                let _ = writeln!(out, "# {key}: {text}");
            }
            let _ = writeln!(out, "{}", table.columns.join(","));
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
            out
        }
        Format::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    Value::Object(
                        table
                            .columns
                            .iter()
                            .zip(row)
                            .map(|(c, cell)| (c.to_string(), cell.json()))
                            .collect(),
                    )
                })
                .collect();
            let mut doc = Map::new();
            doc.insert("meta".into(), Value::Object(meta.clone()));
            for (k, v) in &table.extra {
                doc.insert(k.clone(), v.clone());
            }
            doc.insert("rows".into(), Value::Array(rows));
            let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json");
            s.push('\n');
            s
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DepthCapExceeded { .. } | Error::Size { .. } => 3,
        Error::Domain(_) | Error::Config(_) => 2,
    }
}

/// Parses `args` (program name first), runs the subcommand and writes its
/// output. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let text_args: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let cmd = &cli.command;
    let common = cmd.common();
    let format = common.format.unwrap_or(match cmd {
        Command::OracleExact { .. } => Format::Json,
        _ => Format::Csv,
    });

    let result = match common.threads {
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(threads) => with_threads(threads, || execute(cmd)),
        None => execute(cmd),
    };
    let table = match result {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };

    let mut meta = Map::new();
    meta.insert(
        "tool".into(),
        json!(format!("tailsort {}", env!("CARGO_PKG_VERSION"))),
    );
    meta.insert(
        "command".into(),
        json!(reproduction_command(
            &text_args,
            common.seed,
            common.depth_cap
        )),
    );
    meta.insert("master_seed".into(), json!(common.seed));
    meta.insert("config".into(), cmd.config());
    let text = render(&table, format, &meta);

    let written = match &common.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            1
        }
    }
}

#[cfg(feature = "parallel")]
fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<R: Send>(_threads: usize, f: impl FnOnce() -> R + Send) -> R {
    f()
}

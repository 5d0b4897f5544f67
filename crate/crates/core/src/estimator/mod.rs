//! Monte Carlo estimation of upper-tail probabilities and their rates.
//!
//! Trial `t` of a run always draws from [`trial_rng`]`(master_seed, t)` and
//! every reduction runs over per-trial outputs in trial order, so estimates
//! are a pure function of `(experiment, trials, master_seed)` whatever the
//! thread count.

pub mod exact;
pub mod stats;

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::occupancy::{f_stat, g_stat, sample_occupancy};
use crate::rng::{derive_seed, trial_rng};
use crate::sorting::{bucket_sort, quick_sort_with_rng, random_keys, BucketVariant};
use crate::trials::{map_trials, try_map_trials, Execution};
use crate::trie::{delta_trace, log2_ceil, SortedStrings, StringSet, DEFAULT_DEPTH_CAP};

pub use exact::{exact_f_distribution, ExactDistribution};
pub use stats::{two_sample_chi_square, wilson_interval, ChiSquareTest};

/// The statistic whose upper tail is being estimated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// `f(b(X))` for uniform keys.
    FTail,
    /// `g(b(X))`.
    GTail,
    /// `p_k(L)`, `k = ceil(log2 n)` unless given.
    ExcessTail,
    /// `p_0(L)`.
    P0Tail,
    /// Counted cost of b2-Bucket Sort.
    TB2Tail,
    /// Counted cost of blogb-Bucket Sort.
    TBlogbTail,
    /// Indicator of event Z in the Quick Sort recursion tree.
    QsEventZ,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::FTail,
        ExperimentKind::GTail,
        ExperimentKind::ExcessTail,
        ExperimentKind::P0Tail,
        ExperimentKind::TB2Tail,
        ExperimentKind::TBlogbTail,
        ExperimentKind::QsEventZ,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FTail => "f_tail",
            ExperimentKind::GTail => "g_tail",
            ExperimentKind::ExcessTail => "excess_tail",
            ExperimentKind::P0Tail => "p0_tail",
            ExperimentKind::TB2Tail => "t_b2_tail",
            ExperimentKind::TBlogbTail => "t_blogb_tail",
            ExperimentKind::QsEventZ => "qs_event_z",
        }
    }

    fn uses_strings(self) -> bool {
        matches!(self, ExperimentKind::ExcessTail | ExperimentKind::P0Tail)
    }

    /// Closed-form mean of the statistic, where one is known.
    pub fn analytic_mean(self, n: usize) -> Option<f64> {
        match self {
            ExperimentKind::FTail => Some(2.0 * n as f64 - 1.0),
            _ => None,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.name()).collect();
                format!(
                    "unknown experiment kind `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// One upper-tail question: is the statistic at least `threshold`?
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub kind: ExperimentKind,
    pub n: usize,
    pub threshold: f64,
    /// Deviation multiplier when the threshold was set as `mean + c n`.
    #[serde(default)]
    pub c: Option<f64>,
    /// Prefix floor for trie kinds.
    #[serde(default)]
    pub k: Option<usize>,
    /// Recursion depth for `qs_event_z`; defaults to `ceil(log2 n)`.
    #[serde(default)]
    pub depth: Option<u32>,
    #[serde(default = "default_depth_cap")]
    pub depth_cap: usize,
}

fn default_depth_cap() -> usize {
    DEFAULT_DEPTH_CAP
}

impl Experiment {
    pub fn new(kind: ExperimentKind, n: usize, threshold: f64) -> Self {
        Experiment {
            kind,
            n,
            threshold,
            c: None,
            k: None,
            depth: None,
            depth_cap: DEFAULT_DEPTH_CAP,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = Some(c);
        self
    }

    pub fn with_depth_cap(mut self, cap: usize) -> Self {
        self.depth_cap = cap;
        self
    }

    /// The prefix floor actually used by `excess_tail`.
    pub fn effective_k(&self) -> usize {
        match self.kind {
            ExperimentKind::P0Tail => 0,
            _ => self.k.unwrap_or_else(|| log2_ceil(self.n)),
        }
    }

    pub fn effective_depth(&self) -> u32 {
        self.depth.unwrap_or_else(|| log2_ceil(self.n) as u32)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !self.threshold.is_finite() {
            return Err(Error::Config(format!(
                "threshold must be finite, got {}",
                self.threshold
            )));
        }
        if self.kind == ExperimentKind::QsEventZ {
            let d = self.effective_depth();
            if d == 0 || d > 30 {
                return Err(Error::Config(format!(
                    "qs_event_z needs a recursion depth in 1..=30, got {d}"
                )));
            }
        }
        Ok(())
    }

    /// The statistic for one trial.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Result<f64> {
        let n = self.n;
        Ok(match self.kind {
            ExperimentKind::FTail => f_stat(&sample_occupancy(n, rng)) as f64,
            ExperimentKind::GTail => g_stat(&sample_occupancy(n, rng)),
            ExperimentKind::ExcessTail | ExperimentKind::P0Tail => {
                debug_assert!(self.kind.uses_strings());
                let set = StringSet::new(n, rng.next_u64()).with_depth_cap(self.depth_cap)?;
                SortedStrings::new(&set)?.excess(self.effective_k()) as f64
            }
            ExperimentKind::TB2Tail => bucket_sort(&random_keys(n, rng), BucketVariant::B2)
                .cost
                .total_units() as f64,
            ExperimentKind::TBlogbTail => bucket_sort(&random_keys(n, rng), BucketVariant::Blogb)
                .cost
                .total_units() as f64,
            ExperimentKind::QsEventZ => {
                let keys = random_keys(n, rng);
                let run = quick_sort_with_rng(&keys, rng, self.effective_depth());
                f64::from(u8::from(run.occupancy.left_half_empty()))
            }
        })
    }
}

/// An [`Experiment`] plus the run parameters that reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    #[serde(flatten)]
    pub experiment: Experiment,
    pub m: u64,
    pub master_seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    /// Wilson 95% interval; the upper end is `3/m` when nothing was seen.
    pub ci_low: f64,
    pub ci_high: f64,
    /// `-ln p_hat`, or the lower bound `ln(m/3)` when censored.
    pub rate_hat: f64,
    pub censored: bool,
}

impl TailEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        assert!(trials > 0 && successes <= trials);
        let m = trials as f64;
        let p_hat = successes as f64 / m;
        let (mut ci_low, mut ci_high) = wilson_interval(successes, trials, stats::Z_95);
        let censored = successes == 0;
        let rate_hat = if censored {
            ci_low = 0.0;
            ci_high = (3.0 / m).min(1.0);
            (m / 3.0).ln().max(0.0)
        } else {
            -p_hat.ln()
        };
        TailEstimate {
            trials,
            successes,
            p_hat,
            ci_low,
            ci_high,
            rate_hat,
            censored,
        }
    }

    /// Rates implied by the interval ends; the upper end is infinite when
    /// `ci_low` is zero.
    pub fn rate_interval(&self) -> (f64, f64) {
        let hi = if self.ci_low > 0.0 {
            -self.ci_low.ln()
        } else {
            f64::INFINITY
        };
        (-self.ci_high.ln(), hi)
    }

    /// Half-width of the Wilson interval around its midpoint.
    pub fn half_width(&self) -> f64 {
        (self.ci_high - self.ci_low) / 2.0
    }
}

/// The statistic's value in every trial, in trial order.
pub fn sample_statistic(
    e: &Experiment,
    m: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<Vec<f64>> {
    e.validate()?;
    try_map_trials(m, exec, |t| e.sample(&mut trial_rng(master_seed, t)))
}

pub fn estimate_tail(e: &Experiment, m: u64, master_seed: u64) -> Result<TailEstimate> {
    estimate_tail_with(e, m, master_seed, Execution::default())
}

pub fn estimate_tail_with(
    e: &Experiment,
    m: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<TailEstimate> {
    Ok(estimate_tails(e, &[e.threshold], m, master_seed, exec)?[0])
}

/// Estimates several thresholds from the same `m` trials; `e.threshold` is
/// ignored.
pub fn estimate_tails(
    e: &Experiment,
    thresholds: &[f64],
    m: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<Vec<TailEstimate>> {
    if m == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let values = sample_statistic(e, m, master_seed, exec)?;
    Ok(tail_estimates(&values, thresholds))
}

/// Tail estimates from already drawn values.
pub fn tail_estimates(values: &[f64], thresholds: &[f64]) -> Vec<TailEstimate> {
    thresholds
        .iter()
        .map(|&th| {
            let s = values.iter().filter(|&&v| v >= th).count() as u64;
            TailEstimate::from_counts(s, values.len() as u64)
        })
        .collect()
}

pub fn is_power_of_two(n: usize) -> bool {
    n >= 1 && n & (n - 1) == 0
}

/// `f(b(X))` for `m` independent balls-into-bins draws.
pub fn f_samples_balls(n: usize, m: u64, master_seed: u64, exec: Execution) -> Vec<u64> {
    map_trials(m, exec, |t| {
        f_stat(&sample_occupancy(n, &mut trial_rng(master_seed, t)))
    })
}

/// `f(c(L))` for `m` random string sets, from trie node occupancy at depth
/// `log2 n`.
pub fn f_samples_trie(n: usize, m: u64, master_seed: u64, exec: Execution) -> Result<Vec<u64>> {
    if !is_power_of_two(n) {
        return Err(Error::Config(format!(
            "trie node occupancy needs a power-of-two n, got {n}"
        )));
    }
    let d = log2_ceil(n) as u32;
    Ok(map_trials(m, exec, |t| {
        let set = StringSet::new(n, trial_rng(master_seed, t).next_u64());
        f_stat(&crate::trie::node_occupancy(&set, d))
    }))
}

/// Two-sample chi-square test that `f` has the same law over bucket
/// occupancy and over depth-`log2 n` trie node occupancy.
pub fn distribution_equality_test(n: usize, m: u64, master_seed: u64) -> Result<ChiSquareTest> {
    distribution_equality_test_with(n, m, master_seed, Execution::default())
}

pub fn distribution_equality_test_with(
    n: usize,
    m: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<ChiSquareTest> {
    if m == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let balls = f_samples_balls(n, m, derive_seed(master_seed, 1), exec);
    let trie = f_samples_trie(n, m, derive_seed(master_seed, 2), exec)?;
    Ok(two_sample_chi_square(&balls, &trie))
}

/// Per-sample quantities of one random string set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrieSample {
    /// Nonvoid external path length `p_0`.
    pub p0: u64,
    /// Excess path length `p_{log n}`.
    pub excess: u64,
    /// `g` of the depth-`log2 n` node occupancy.
    pub g_nodes: f64,
    /// `f` of the same occupancy.
    pub f_nodes: u64,
}

pub fn trie_sample(n: usize, seed: u64, depth_cap: usize) -> Result<TrieSample> {
    let set = StringSet::new(n, seed).with_depth_cap(depth_cap)?;
    let sorted = SortedStrings::new(&set)?;
    let k = log2_ceil(n);
    let nodes = sorted.node_occupancy(k as u32);
    Ok(TrieSample {
        p0: sorted.excess(0),
        excess: sorted.excess(k),
        g_nodes: g_stat(&nodes),
        f_nodes: f_stat(&nodes),
    })
}

pub fn trie_samples(
    n: usize,
    m: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<Vec<TrieSample>> {
    try_map_trials(m, exec, |t| {
        trie_sample(n, trial_rng(master_seed, t).next_u64(), DEFAULT_DEPTH_CAP)
    })
}

/// Where the mean behind a scan threshold came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanSource {
    Analytic,
    Pilot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub n: usize,
    pub mean: f64,
    pub mean_source: MeanSource,
    pub threshold: f64,
    pub estimate: TailEstimate,
    /// `R / (sqrt(n) log2 n)`.
    pub rate_per_sqrt_n_log_n: f64,
    /// `R / n`.
    pub rate_per_n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateScan {
    pub kind: ExperimentKind,
    pub c: f64,
    pub trials: u64,
    pub pilot_trials: u64,
    pub master_seed: u64,
    pub rows: Vec<RateRow>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RateScanOptions {
    /// Trials for the pilot mean; defaults to ten times the tail trials.
    pub pilot_trials: Option<u64>,
    pub exec: Execution,
}

/// Estimates `Pr[Y >= mean + c n]` and its rate for each `n`. Means come from
/// [`ExperimentKind::analytic_mean`] where available and otherwise from a
/// pilot run on an independent seed.
pub fn rate_scan(
    kind: ExperimentKind,
    n_list: &[usize],
    c: f64,
    m: u64,
    master_seed: u64,
    opts: RateScanOptions,
) -> Result<RateScan> {
    if m == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    if !c.is_finite() {
        return Err(Error::Config(format!("c must be finite, got {c}")));
    }
    let pilot_trials = opts.pilot_trials.unwrap_or(10 * m).max(1);
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let base = Experiment::new(kind, n, 0.0);
        let (mean, mean_source) = match kind.analytic_mean(n) {
            Some(mu) => (mu, MeanSource::Analytic),
            None => {
                let pilot_seed = derive_seed(master_seed, 0x9170_0000 + n as u64);
                let values = sample_statistic(&base, pilot_trials, pilot_seed, opts.exec)?;
                (
                    values.iter().sum::<f64>() / values.len() as f64,
                    MeanSource::Pilot,
                )
            }
        };
        let threshold = mean + c * n as f64;
        let estimate = estimate_tails(
            &base,
            &[threshold],
            m,
            derive_seed(master_seed, n as u64),
            opts.exec,
        )?[0];
        let nf = n as f64;
        let sqrt_n_log_n = nf.sqrt() * nf.log2();
        rows.push(RateRow {
            n,
            mean,
            mean_source,
            threshold,
            estimate,
            rate_per_sqrt_n_log_n: if sqrt_n_log_n > 0.0 {
                estimate.rate_hat / sqrt_n_log_n
            } else {
                f64::NAN
            },
            rate_per_n: estimate.rate_hat / nf,
        });
    }
    Ok(RateScan {
        kind,
        c,
        trials: m,
        pilot_trials,
        master_seed,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaTailRow {
    pub tau: u32,
    /// `16 (tau + 2)`.
    pub threshold: u64,
    pub exceed: u64,
    pub frequency: f64,
    /// `2^-tau`.
    pub bound: f64,
    /// Binomial standard error of the frequency under the bound.
    pub std_error: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaDominationReport {
    pub n: usize,
    pub k: usize,
    pub runs: u64,
    pub pooled: u64,
    pub rows: Vec<DeltaTailRow>,
    /// Mean of `delta_i` at each insertion position.
    pub position_means: Vec<f64>,
    /// Mean over runs of the summed trace.
    pub mean_trace_sum: f64,
    /// Mean over runs of `p_k` computed directly.
    pub mean_excess: f64,
}

impl DeltaDominationReport {
    pub fn flagged(&self) -> impl Iterator<Item = &DeltaTailRow> {
        self.rows.iter().filter(|r| r.flagged)
    }
}

/// Pools the increments of `m` independent [`delta_trace`] runs and compares
/// `Pr[delta >= 16 (tau + 2)]` with `2^-tau` for `tau = 0..=max_tau`.
pub fn delta_domination_experiment(
    n: usize,
    k: usize,
    m: u64,
    master_seed: u64,
    max_tau: u32,
    exec: Execution,
) -> Result<DeltaDominationReport> {
    if m == 0 || n == 0 {
        return Err(Error::Config("need at least one run and one string".into()));
    }
    let runs = try_map_trials(m, exec, |t| {
        let set = StringSet::new(n, trial_rng(master_seed, t).next_u64());
        let trace = delta_trace(&set, k)?;
        let excess = SortedStrings::new(&set)?.excess(k);
        Ok((trace.deltas, excess))
    })?;

    let pooled = m * n as u64;
    let mut position_sums = vec![0u64; n];
    let mut all: Vec<u64> = Vec::with_capacity(pooled as usize);
    let (mut trace_total, mut excess_total) = (0u64, 0u64);
    for (deltas, excess) in &runs {
        for (i, &d) in deltas.iter().enumerate() {
            position_sums[i] += d;
        }
        trace_total += deltas.iter().sum::<u64>();
        excess_total += excess;
        all.extend_from_slice(deltas);
    }

    let rows = (0..=max_tau)
        .map(|tau| {
            let threshold = 16 * (u64::from(tau) + 2);
            let exceed = all.iter().filter(|&&d| d >= threshold).count() as u64;
            let frequency = exceed as f64 / pooled as f64;
            let bound = (-f64::from(tau)).exp2();
            let std_error = stats::binomial_se(bound, pooled);
            DeltaTailRow {
                tau,
                threshold,
                exceed,
                frequency,
                bound,
                std_error,
                flagged: frequency > bound + 3.0 * std_error,
            }
        })
        .collect();

    Ok(DeltaDominationReport {
        n,
        k,
        runs: m,
        pooled,
        rows,
        position_means: position_sums.iter().map(|&s| s as f64 / m as f64).collect(),
        mean_trace_sum: trace_total as f64 / m as f64,
        mean_excess: excess_total as f64 / m as f64,
    })
}

/// Frequency of event Z (every depth-`log2 n` node in the left subtree is
/// empty) under the Quick Sort recursion tree and under Bucket Sort bucket
/// occupancy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventZReport {
    pub n: usize,
    pub depth: u32,
    pub quick_sort: TailEstimate,
    pub bucket_sort: TailEstimate,
    /// `1/n`: the first pivot being the minimum already forces Z.
    pub quick_sort_floor: f64,
    /// `2^-n`: every key must land in the upper half.
    pub bucket_sort_exact: f64,
}

pub fn event_z_contrast(
    n: usize,
    m: u64,
    master_seed: u64,
    exec: Execution,
) -> Result<EventZReport> {
    if !is_power_of_two(n) || n < 2 {
        return Err(Error::Config(format!(
            "event Z needs a power-of-two n >= 2, got {n}"
        )));
    }
    if m == 0 {
        return Err(Error::Config("need at least one trial".into()));
    }
    let qs = Experiment::new(ExperimentKind::QsEventZ, n, 1.0);
    let quick_sort = estimate_tail_with(&qs, m, derive_seed(master_seed, 1), exec)?;

    let bucket_seed = derive_seed(master_seed, 2);
    let hits: u64 = map_trials(m, exec, |t| {
        let b = sample_occupancy(n, &mut trial_rng(bucket_seed, t));
        u64::from(b.counts()[..n / 2].iter().all(|&c| c == 0))
    })
    .into_iter()
    .sum();

    Ok(EventZReport {
        n,
        depth: log2_ceil(n) as u32,
        quick_sort,
        bucket_sort: TailEstimate::from_counts(hits, m),
        quick_sort_floor: 1.0 / n as f64,
        bucket_sort_exact: (-(n as f64)).exp2(),
    })
}

//! Binomial intervals and chi-square tests.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

pub const Z_95: f64 = 1.959_963_984_540_054;
pub const Z_99: f64 = 2.575_829_303_548_900_4;

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials > 0 && successes <= trials);
    let m = trials as f64;
    let p = successes as f64 / m;
    let z2 = z * z;
    let denom = 1.0 + z2 / m;
    let center = (p + z2 / (2.0 * m)) / denom;
    let half = z / denom * (p * (1.0 - p) / m + z2 / (4.0 * m * m)).sqrt();
    (
        (center - half).max(0.0).min(p),
        (center + half).min(1.0).max(p),
    )
}

/// Standard error of a proportion `p` estimated from `trials` draws.
pub fn binomial_se(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// Number of cells after merging.
    pub cells: usize,
}

impl ChiSquareTest {
    fn from_statistic(statistic: f64, cells: usize, df: usize) -> Self {
        let p_value = if df == 0 {
            1.0
        } else {
            ChiSquared::new(df as f64)
                .expect("positive degrees of freedom")
                .sf(statistic)
        };
        ChiSquareTest {
            statistic,
            df,
            p_value,
            cells,
        }
    }
}

fn histogram(values: &[u64]) -> BTreeMap<u64, u64> {
    let mut h = BTreeMap::new();
    for &v in values {
        *h.entry(v).or_insert(0) += 1;
    }
    h
}

/// Groups consecutive entries of `weights` so each group's weight is at least
/// `min`; a light remainder joins the last group. Returns group boundaries as
/// exclusive end indices.
fn merge_cells(weights: &[f64], min: f64) -> Vec<usize> {
    let mut ends = Vec::new();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if acc >= min {
            ends.push(i + 1);
            acc = 0.0;
        }
    }
    match ends.last_mut() {
        Some(last) => *last = weights.len(),
        None => ends.push(weights.len()),
    }
    ends
}

/// Two-sample chi-square homogeneity test on integer-valued samples.
/// Adjacent support values are pooled until both arms expect at least five
/// observations per cell.
pub fn two_sample_chi_square(a: &[u64], b: &[u64]) -> ChiSquareTest {
    assert!(!a.is_empty() && !b.is_empty());
    let (ha, hb) = (histogram(a), histogram(b));
    let support: Vec<u64> = ha
        .keys()
        .chain(hb.keys())
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let (ma, mb) = (a.len() as f64, b.len() as f64);
    let share = ma.min(mb) / (ma + mb);
    let pooled: Vec<f64> = support
        .iter()
        .map(|v| (ha.get(v).copied().unwrap_or(0) + hb.get(v).copied().unwrap_or(0)) as f64)
        .collect();
    // the smaller arm's expected count is pooled * share
    let weights: Vec<f64> = pooled.iter().map(|p| p * share).collect();
    let ends = merge_cells(&weights, 5.0);

    let mut statistic = 0.0;
    let mut start = 0;
    for &end in &ends {
        let cell = &support[start..end];
        let oa: f64 = cell
            .iter()
            .map(|v| ha.get(v).copied().unwrap_or(0) as f64)
            .sum();
        let ob: f64 = cell
            .iter()
            .map(|v| hb.get(v).copied().unwrap_or(0) as f64)
            .sum();
        let total = oa + ob;
        let (ea, eb) = (total * ma / (ma + mb), total * mb / (ma + mb));
        statistic += (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb;
        start = end;
    }
    ChiSquareTest::from_statistic(statistic, ends.len(), ends.len() - 1)
}

/// Goodness-of-fit test of integer samples against a known distribution
/// `expected` (value, probability), pooling cells to expected count >= 5.
/// Samples outside the listed support make the statistic infinite.
pub fn chi_square_goodness_of_fit(samples: &[u64], expected: &[(u64, f64)]) -> ChiSquareTest {
    let h = histogram(samples);
    let m = samples.len() as f64;
    if h.keys().any(|v| !expected.iter().any(|(e, _)| e == v)) {
        return ChiSquareTest {
            statistic: f64::INFINITY,
            df: expected.len().saturating_sub(1),
            p_value: 0.0,
            cells: expected.len(),
        };
    }
    let mut expected = expected.to_vec();
    expected.sort_by_key(|&(v, _)| v);
    let weights: Vec<f64> = expected.iter().map(|&(_, p)| p * m).collect();
    let ends = merge_cells(&weights, 5.0);
    let mut statistic = 0.0;
    let mut start = 0;
    for &end in &ends {
        let e: f64 = weights[start..end].iter().sum();
        let o: f64 = expected[start..end]
            .iter()
            .map(|(v, _)| h.get(v).copied().unwrap_or(0) as f64)
            .sum();
        statistic += (o - e).powi(2) / e;
        start = end;
    }
    ChiSquareTest::from_statistic(statistic, ends.len(), ends.len() - 1)
}

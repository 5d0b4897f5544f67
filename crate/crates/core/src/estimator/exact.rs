//! Exact distribution of `f(b(X))` for small `n`, by dynamic programming over
//! buckets.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_EXACT_N: usize = 12;

/// The law of `f = sum B_j^2` when `n` balls go into `n` bins. Probabilities
/// are stored as integer counts of the `n^n` equally likely assignments.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactDistribution {
    pub n: usize,
    /// `n^n`.
    pub assignments: u64,
    /// Number of assignments producing each value of `f`.
    pub counts: BTreeMap<u64, u64>,
}

impl ExactDistribution {
    pub fn probability(&self, f: u64) -> Ratio<u64> {
        Ratio::new(self.counts.get(&f).copied().unwrap_or(0), self.assignments)
    }

    /// `Pr[f >= threshold]`.
    pub fn tail(&self, threshold: u64) -> Ratio<u64> {
        Ratio::new(
            self.counts.range(threshold..).map(|(_, c)| c).sum(),
            self.assignments,
        )
    }

    pub fn mean(&self) -> Ratio<u128> {
        let num: u128 = self
            .counts
            .iter()
            .map(|(&f, &c)| f as u128 * c as u128)
            .sum();
        Ratio::new(num, self.assignments as u128)
    }

    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.keys().copied()
    }

    /// Probabilities as `(value, p)` pairs in floating point.
    pub fn as_f64(&self) -> Vec<(u64, f64)> {
        self.counts
            .iter()
            .map(|(&f, &c)| (f, c as f64 / self.assignments as f64))
            .collect()
    }

    /// `"count/n^n"`, unreduced so that all entries share a denominator.
    pub fn format_probability(&self, f: u64) -> String {
        format!(
            "{}/{}",
            self.counts.get(&f).copied().unwrap_or(0),
            self.assignments
        )
    }
}

/// Buckets are filled one at a time; the state is (balls left, partial f) and
/// placing `b` of the `r` remaining balls in the next bucket multiplies the
/// weight by `C(r, b)`.
pub fn exact_f_distribution(n: usize) -> Result<ExactDistribution> {
    if n == 0 || n > MAX_EXACT_N {
        return Err(Error::Size {
            n,
            max: MAX_EXACT_N,
        });
    }
    let mut binom = vec![vec![0u64; n + 1]; n + 1];
    for r in 0..=n {
        binom[r][0] = 1;
        for b in 1..=r {
            binom[r][b] = binom[r - 1][b - 1] + if b < r { binom[r - 1][b] } else { 0 };
        }
    }

    let mut states: BTreeMap<(usize, u64), u64> = BTreeMap::from([((n, 0), 1)]);
    for bucket in 0..n {
        let last = bucket == n - 1;
        let mut next = BTreeMap::new();
        for (&(left, f), &w) in &states {
            let choices = if last { left..=left } else { 0..=left };
            for b in choices {
                let key = (left - b, f + (b * b) as u64);
                *next.entry(key).or_insert(0) += w * binom[left][b];
            }
        }
        states = next;
    }

    let counts = states
        .into_iter()
        .map(|((left, f), w)| {
            debug_assert_eq!(left, 0);
            (f, w)
        })
        .collect();
    Ok(ExactDistribution {
        n,
        assignments: (n as u64).pow(n as u32),
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Enumerates all n^n assignments directly.
    fn brute_force(n: usize) -> BTreeMap<u64, u64> {
        let mut out = BTreeMap::new();
        let total = n.pow(n as u32);
        for code in 0..total {
            let mut counts = vec![0u64; n];
            let mut c = code;
            for _ in 0..n {
                counts[c % n] += 1;
                c /= n;
            }
            *out.entry(counts.iter().map(|b| b * b).sum()).or_insert(0) += 1;
        }
        out
    }

    #[test]
    fn small_cases() {
        let d = exact_f_distribution(1).unwrap();
        assert_eq!(d.counts, BTreeMap::from([(1, 1)]));
        let d = exact_f_distribution(2).unwrap();
        assert_eq!(d.probability(2), Ratio::new(1, 2));
        assert_eq!(d.probability(4), Ratio::new(1, 2));
        let d = exact_f_distribution(3).unwrap();
        assert_eq!(d.counts, BTreeMap::from([(3, 6), (5, 18), (9, 3)]));
        assert_eq!(d.format_probability(5), "18/27");
        assert_eq!(d.mean(), Ratio::from_integer(5));
    }

    #[test]
    fn matches_enumeration() {
        for n in 1..=7 {
            assert_eq!(
                exact_f_distribution(n).unwrap().counts,
                brute_force(n),
                "n = {n}"
            );
        }
    }

    #[test]
    fn mass_and_mean() {
        for n in 1..=MAX_EXACT_N {
            let d = exact_f_distribution(n).unwrap();
            assert_eq!(d.counts.values().sum::<u64>(), d.assignments);
            assert_eq!(d.mean(), Ratio::from_integer(2 * n as u128 - 1));
            assert!(d.support().all(|f| f >= n as u64 && f <= (n * n) as u64));
        }
    }

    #[test]
    fn size_limits() {
        assert!(matches!(
            exact_f_distribution(13),
            Err(Error::Size { n: 13, .. })
        ));
        assert!(exact_f_distribution(0).is_err());
    }

    #[test]
    fn tail_of_seven() {
        let d = exact_f_distribution(7).unwrap();
        assert_eq!(d.tail(19), Ratio::new(73_213, 823_543));
        assert_eq!(d.tail(7), Ratio::from_integer(1));
    }
}

//! Balls-into-bins occupancy vectors and the statistics computed from them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::sorting::Key;

/// Per-bin counts `B_0, ..., B_{n-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OccupancyVector {
    counts: Vec<usize>,
}

impl OccupancyVector {
    pub fn new(counts: Vec<usize>) -> Self {
        OccupancyVector { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn into_counts(self) -> Vec<usize> {
        self.counts
    }

    /// Number of bins.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Number of balls, `sum B_j`.
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn max_load(&self) -> usize {
        self.counts.iter().copied().max().unwrap_or(0)
    }
}

/// Occupancy of `n` buckets of width `1/n` for `n = keys.len()` keys.
pub fn bucketize(keys: &[Key]) -> OccupancyVector {
    let n = keys.len();
    let mut counts = vec![0; n];
    for k in keys {
        counts[k.bucket(n)] += 1;
    }
    OccupancyVector::new(counts)
}

/// Throws `n` balls into `n` bins independently and uniformly.
pub fn sample_occupancy<R: Rng + ?Sized>(n: usize, rng: &mut R) -> OccupancyVector {
    assert!(n >= 1, "need at least one bin");
    let mut counts = vec![0; n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1;
    }
    OccupancyVector::new(counts)
}

/// `f(b) = sum B_j^2`.
pub fn f_stat(b: &OccupancyVector) -> u64 {
    b.counts.iter().map(|&c| (c as u64) * (c as u64)).sum()
}

/// `g(b) = sum_{B_j > 0} B_j log2 B_j`.
pub fn g_stat(b: &OccupancyVector) -> f64 {
    b.counts
        .iter()
        .filter(|&&c| c > 1)
        .map(|&c| c as f64 * (c as f64).log2())
        .sum()
}

/// `|S_i|`, the number of bins holding at least `i` balls, for
/// `i = 1..=max(n, max B_j)`; element `i - 1` holds `|S_i|`.
pub fn s_counts(b: &OccupancyVector) -> Vec<u64> {
    let len = b.len().max(b.max_load());
    // histogram of loads, then suffix sums
    let mut s = vec![0u64; len + 1];
    for &c in &b.counts {
        if c > 0 {
            s[c - 1] += 1;
        }
    }
    for i in (0..len).rev() {
        s[i] += s[i + 1];
    }
    s.truncate(len);
    s
}

/// `sum_j C(B_j + 1, 2)`.
pub fn pair_count(b: &OccupancyVector) -> u64 {
    b.counts
        .iter()
        .map(|&c| (c as u64) * (c as u64 + 1) / 2)
        .sum()
}

/// `sum_i i * |S_i|`.
pub fn weighted_s_sum(s: &[u64]) -> u64 {
    s.iter().enumerate().map(|(i, &x)| (i as u64 + 1) * x).sum()
}

/// `E_i = (e / i)^i`, evaluated as `exp(i (1 - ln i))`.
///
/// # Panics
///
/// Panics if `i == 0`.
pub fn e_bound(i: u64) -> f64 {
    assert!(i >= 1, "E_i is defined for i >= 1");
    let i = i as f64;
    (i * (1.0 - i.ln())).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ov(c: &[usize]) -> OccupancyVector {
        OccupancyVector::new(c.to_vec())
    }

    #[test]
    fn bucketize_examples() {
        let keys: Vec<Key> = [0.0, 0.26, 0.30, 0.99]
            .iter()
            .map(|&x| Key::from_f64(x))
            .collect();
        assert_eq!(bucketize(&keys).counts(), &[1, 2, 0, 1]);
        assert_eq!(bucketize(&[Key::from_f64(0.42)]).counts(), &[1]);
    }

    #[test]
    fn f_and_g_examples() {
        assert_eq!(f_stat(&ov(&[3, 1, 0, 0])), 10);
        assert_eq!(f_stat(&ov(&[1; 9])), 9);
        assert_eq!(f_stat(&ov(&[9, 0, 0, 0, 0, 0, 0, 0, 0])), 81);
        assert_eq!(g_stat(&ov(&[1, 1, 1, 1])), 0.0);
        assert_relative_eq!(g_stat(&ov(&[4, 2, 1, 1])), 10.0);
    }

    #[test]
    fn s_counts_examples() {
        assert_eq!(s_counts(&ov(&[2, 1, 0])), vec![2, 1, 0]);
        assert_eq!(s_counts(&ov(&[1, 1, 1, 1])), vec![4, 0, 0, 0]);
        let b = ov(&[2, 1, 0]);
        assert_eq!(pair_count(&b), 4);
        assert_eq!(weighted_s_sum(&s_counts(&b)), 4);
    }

    #[test]
    fn s_counts_beyond_n() {
        // loads larger than the bin count still get a row
        assert_eq!(s_counts(&ov(&[5, 0])), vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn e_bound_values() {
        assert_relative_eq!(e_bound(1), std::f64::consts::E, max_relative = 1e-15);
        assert_relative_eq!(e_bound(2), 1.847_264_024_732_662_6, max_relative = 1e-14);
        assert!(e_bound(100) > 0.0 && e_bound(100) < 1e-150);
        assert_eq!(e_bound(1000), 0.0);
    }

    #[test]
    fn weighted_e_sum_stays_below_ten() {
        let head: f64 = (1..=60).map(|i| i as f64 * e_bound(i)).sum();
        let tail: f64 = (61..=400).map(|i| i as f64 * e_bound(i)).sum();
        // summed independently in python/mpmath: 9.797930099849...
        assert!((head - 9.797_930_099_85).abs() < 1e-9, "{head}");
        assert!(head < 10.0);
        assert!(tail < 1e-40);
    }

    #[test]
    fn sample_occupancy_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(sample_occupancy(1, &mut rng).counts(), &[1]);
        let mut hits = [0u64; 3];
        for _ in 0..20_000 {
            let b = sample_occupancy(2, &mut rng);
            hits[b.counts()[0]] += 1;
        }
        // (0,2): 1/4, (1,1): 1/2, (2,0): 1/4
        assert!((hits[1] as f64 / 20_000.0 - 0.5).abs() < 0.02);
    }

    proptest! {
        #[test]
        fn identities_hold(counts in proptest::collection::vec(0usize..40, 1..64)) {
            let b = OccupancyVector::new(counts);
            let n = b.total() as u64;
            let s = s_counts(&b);
            prop_assert_eq!(pair_count(&b), weighted_s_sum(&s));
            prop_assert_eq!(f_stat(&b), 2 * weighted_s_sum(&s) - n);
            prop_assert_eq!(s.iter().sum::<u64>(), n);
            prop_assert!(s.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(g_stat(&b) <= f_stat(&b) as f64);
        }
    }
}

//! Sorting algorithms with exact operation counts.
//!
//! Cost convention: one unit per key comparison and one unit per element
//! write. Bucket Sort's distribution and scan phases write every key once
//! each, so they contribute exactly `2n` moves between them.

use std::fmt;
use std::ops::{Add, AddAssign};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::occupancy::OccupancyVector;

/// A key in `[0, 1)` stored as a 64-bit binary fraction `bits / 2^64`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Key(pub u64);

impl Key {
    const SCALE: f64 = 18_446_744_073_709_551_616.0; // 2^64

    /// Truncates `x` to 64 fractional bits. Values outside `[0, 1)` saturate.
    pub fn from_f64(x: f64) -> Self {
        Key((x * Self::SCALE) as u64)
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / Self::SCALE
    }

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        Key(rng.next_u64())
    }

    /// `floor(value * n)`, computed exactly; always below `n`.
    pub fn bucket(self, n: usize) -> usize {
        debug_assert!(n >= 1);
        let j = ((self.0 as u128 * n as u128) >> 64) as usize;
        j.min(n - 1)
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

pub fn random_keys<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Vec<Key> {
    (0..n).map(|_| Key::random(rng)).collect()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    pub comparisons: u64,
    pub moves: u64,
}

impl CostReport {
    pub fn total_units(&self) -> u64 {
        self.comparisons + self.moves
    }
}

impl Add for CostReport {
    type Output = CostReport;

    fn add(self, rhs: CostReport) -> CostReport {
        CostReport {
            comparisons: self.comparisons + rhs.comparisons,
            moves: self.moves + rhs.moves,
        }
    }
}

impl AddAssign for CostReport {
    fn add_assign(&mut self, rhs: CostReport) {
        *self = *self + rhs;
    }
}

/// Textbook insertion sort. Stable; at most `m(m-1)/2` comparisons.
pub fn insertion_sort<T: Ord + Copy>(keys: &[T]) -> (Vec<T>, CostReport) {
    let mut out = keys.to_vec();
    let mut cost = CostReport::default();
    for i in 1..out.len() {
        let x = out[i];
        let mut j = i;
        while j > 0 {
            cost.comparisons += 1;
            if out[j - 1] <= x {
                break;
            }
            out[j] = out[j - 1];
            cost.moves += 1;
            j -= 1;
        }
        out[j] = x;
        cost.moves += 1;
    }
    (out, cost)
}

/// Top-down merge sort splitting at `len / 2`. Stable.
pub fn merge_sort<T: Ord + Copy>(keys: &[T]) -> (Vec<T>, CostReport) {
    let mut cost = CostReport::default();
    let sorted = merge_sort_rec(keys, &mut cost);
    (sorted, cost)
}

fn merge_sort_rec<T: Ord + Copy>(keys: &[T], cost: &mut CostReport) -> Vec<T> {
    if keys.len() <= 1 {
        return keys.to_vec();
    }
    let mid = keys.len() / 2;
    let left = merge_sort_rec(&keys[..mid], cost);
    let right = merge_sort_rec(&keys[mid..], cost);

    let mut out = Vec::with_capacity(keys.len());
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < right.len() {
        cost.comparisons += 1;
        // `<=` keeps equal keys in input order
        if left[i] <= right[j] {
            out.push(left[i]);
            i += 1;
        } else {
            out.push(right[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&left[i..]);
    out.extend_from_slice(&right[j..]);
    cost.moves += keys.len() as u64;
    out
}

/// Inner sort used per bucket.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BucketVariant {
    /// Quadratic inner sort (insertion sort).
    B2,
    /// `b log b` inner sort (merge sort).
    Blogb,
}

impl BucketVariant {
    pub fn name(self) -> &'static str {
        match self {
            BucketVariant::B2 => "b2",
            BucketVariant::Blogb => "blogb",
        }
    }
}

impl std::str::FromStr for BucketVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "b2" => Ok(BucketVariant::B2),
            "blogb" => Ok(BucketVariant::Blogb),
            other => Err(format!(
                "unknown bucket sort variant `{other}` (expected b2 or blogb)"
            )),
        }
    }
}

impl fmt::Display for BucketVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BucketSortRun {
    pub sorted: Vec<Key>,
    pub cost: CostReport,
    /// Cost of the per-bucket sorts alone.
    pub inner_cost: CostReport,
    pub occupancy: OccupancyVector,
}

/// Bucket Sort over `n = keys.len()` buckets of width `1/n`.
///
/// # Panics
///
/// Panics on empty input.
pub fn bucket_sort(keys: &[Key], variant: BucketVariant) -> BucketSortRun {
    let n = keys.len();
    assert!(n >= 1, "bucket sort needs at least one key");

    let mut buckets: Vec<Vec<Key>> = vec![Vec::new(); n];
    for &k in keys {
        buckets[k.bucket(n)].push(k);
    }
    let mut cost = CostReport {
        comparisons: 0,
        moves: n as u64,
    };

    let occupancy = OccupancyVector::new(buckets.iter().map(Vec::len).collect());
    let mut inner_cost = CostReport::default();
    let mut sorted = Vec::with_capacity(n);
    for bucket in &buckets {
        let (part, c) = match variant {
            BucketVariant::B2 => insertion_sort(bucket),
            BucketVariant::Blogb => merge_sort(bucket),
        };
        inner_cost += c;
        sorted.extend_from_slice(&part);
    }
    cost += inner_cost;
    cost.moves += n as u64;

    BucketSortRun {
        sorted,
        cost,
        inner_cost,
        occupancy,
    }
}

/// Sizes of the sublists reaching each node at one depth of a Quick Sort
/// recursion tree. Node `j` at depth `d` is the one reached by the path whose
/// left/right turns spell `j` in binary (left = 0, most significant first).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecursionOccupancy {
    pub depth: u32,
    pub counts: Vec<usize>,
    /// Pivots that stayed in internal nodes above `depth`.
    pub pivots_above: usize,
}

impl RecursionOccupancy {
    pub fn total(&self) -> usize {
        self.counts.iter().sum::<usize>() + self.pivots_above
    }

    /// Whether every node in the left half of this level is empty.
    pub fn left_half_empty(&self) -> bool {
        let half = self.counts.len() / 2;
        half > 0 && self.counts[..half].iter().all(|&c| c == 0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuickSortRun {
    pub sorted: Vec<Key>,
    pub cost: CostReport,
    pub occupancy: RecursionOccupancy,
}

/// Randomized Quick Sort with a ChaCha8 pivot stream seeded by `seed`.
pub fn quick_sort_random(keys: &[Key], seed: u64, depth: u32) -> QuickSortRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    quick_sort_with_rng(keys, &mut rng, depth)
}

/// Randomized Quick Sort. Each call picks a uniform pivot and splits the rest
/// into strictly smaller and strictly greater keys, costing `len - 1`
/// comparisons. Keys equal to the pivot stay with it.
///
/// # Panics
///
/// Panics if `2^depth` does not fit in `usize`.
pub fn quick_sort_with_rng<R: Rng + ?Sized>(keys: &[Key], rng: &mut R, depth: u32) -> QuickSortRun {
    assert!(depth < usize::BITS, "recursion depth {depth} too large");
    let mut state = QsState {
        rng,
        cost: CostReport::default(),
        occupancy: RecursionOccupancy {
            depth,
            counts: vec![0; 1usize << depth],
            pivots_above: 0,
        },
        out: Vec::with_capacity(keys.len()),
    };
    state.sort(keys.to_vec(), 0, 0);
    QuickSortRun {
        sorted: state.out,
        cost: state.cost,
        occupancy: state.occupancy,
    }
}

struct QsState<'a, R: ?Sized> {
    rng: &'a mut R,
    cost: CostReport,
    occupancy: RecursionOccupancy,
    out: Vec<Key>,
}

impl<R: Rng + ?Sized> QsState<'_, R> {
    fn sort(&mut self, keys: Vec<Key>, level: u32, node: usize) {
        if level == self.occupancy.depth {
            self.occupancy.counts[node] = keys.len();
        }
        if keys.is_empty() {
            return;
        }
        let pivot = keys[self.rng.random_range(0..keys.len())];
        let mut smaller = Vec::new();
        let mut greater = Vec::new();
        let mut equal = Vec::new();
        let mut seen_pivot = false;
        for &k in &keys {
            if k == pivot && !seen_pivot {
                seen_pivot = true;
                continue;
            }
            self.cost.comparisons += 1;
            match k.cmp(&pivot) {
                std::cmp::Ordering::Less => smaller.push(k),
                std::cmp::Ordering::Greater => greater.push(k),
                std::cmp::Ordering::Equal => equal.push(k),
            }
        }
        self.cost.moves += keys.len() as u64;
        if level < self.occupancy.depth {
            self.occupancy.pivots_above += 1 + equal.len();
        }

        let (left, right) = if level < usize::BITS - 1 {
            (node << 1, (node << 1) | 1)
        } else {
            (node, node)
        };
        self.sort(smaller, level + 1, left);
        self.out.push(pivot);
        self.out.extend_from_slice(&equal);
        self.sort(greater, level + 1, right);
    }
}

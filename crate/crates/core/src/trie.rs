//! Random infinite binary strings and the minimal prefix-free trie over them.
//!
//! A [`StringSet`] never stores its strings. Bit `l` of string `i` is read
//! from the ChaCha8 keystream keyed by the set's seed, stream `i`, in 64-bit
//! big-endian words, so any prefix can be regenerated on demand.
//!
//! The minimal `k`-prefix of string `i` has length
//! `max(k, 1 + max_{j != i} lcp(i, j))`: it must go one bit past every other
//! string it shares a prefix with, and no further. The maximum over `j` is
//! attained by a lexicographic neighbour, so sorting the strings once yields
//! every length.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::occupancy::OccupancyVector;

pub const DEFAULT_DEPTH_CAP: usize = 4096;

fn default_depth_cap() -> usize {
    DEFAULT_DEPTH_CAP
}

/// A finite bit string, most significant bit first. Serialized as a string of
/// `0`/`1` characters.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BitPattern {
    words: Vec<u64>,
    len: usize,
}

impl BitPattern {
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % 64 == 0 {
                words.push(0);
            }
            if b {
                words[len / 64] |= 1 << (63 - len % 64);
            }
            len += 1;
        }
        BitPattern { words, len }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bit(&self, l: usize) -> bool {
        assert!(l < self.len);
        self.words[l / 64] >> (63 - l % 64) & 1 == 1
    }

    /// Writes this pattern over `word`, the `block`-th 64-bit word of a string.
    fn overlay(&self, block: usize, word: u64) -> u64 {
        let start = block * 64;
        if self.len <= start {
            return word;
        }
        let covered = (self.len - start).min(64);
        let mask = if covered == 64 {
            !0
        } else {
            !(!0u64 >> covered)
        };
        (word & !mask) | (self.words[block] & mask)
    }
}

impl TryFrom<String> for BitPattern {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl std::str::FromStr for BitPattern {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(format!("bit pattern contains `{other}`")),
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(BitPattern::from_bits)
    }
}

impl From<BitPattern> for String {
    fn from(p: BitPattern) -> String {
        p.to_string()
    }
}

impl fmt::Display for BitPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in 0..self.len {
            f.write_str(if self.bit(l) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitPattern({self})")
    }
}

/// `n` lazily generated infinite binary strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StringSet {
    n: usize,
    seed: u64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    forced_prefixes: BTreeMap<usize, BitPattern>,
    #[serde(default = "default_depth_cap")]
    depth_cap: usize,
}

impl StringSet {
    pub fn new(n: usize, seed: u64) -> Self {
        StringSet {
            n,
            seed,
            forced_prefixes: BTreeMap::new(),
            depth_cap: DEFAULT_DEPTH_CAP,
        }
    }

    /// A set whose listed strings start with the given patterns. Patterns
    /// must be shorter than the depth cap so that forced strings can still
    /// be told apart by their random tails.
    pub fn with_forced_prefixes(
        n: usize,
        seed: u64,
        forced: BTreeMap<usize, BitPattern>,
    ) -> Result<Self> {
        let set = StringSet {
            forced_prefixes: forced,
            ..StringSet::new(n, seed)
        };
        set.validate()?;
        Ok(set)
    }

    pub fn with_depth_cap(mut self, cap: usize) -> Result<Self> {
        self.depth_cap = cap;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        for (&i, p) in &self.forced_prefixes {
            if i >= self.n {
                return Err(Error::Config(format!(
                    "forced prefix for string {i} but the set has {} strings",
                    self.n
                )));
            }
            if p.len() >= self.depth_cap {
                return Err(Error::Config(format!(
                    "forced prefix of string {i} has {} bits, depth cap is {}",
                    p.len(),
                    self.depth_cap
                )));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn depth_cap(&self) -> usize {
        self.depth_cap
    }

    pub fn forced_prefixes(&self) -> &BTreeMap<usize, BitPattern> {
        &self.forced_prefixes
    }

    /// Bits `64 * block .. 64 * block + 64` of string `i`, first bit in the
    /// most significant position.
    pub fn word(&self, i: usize, block: usize) -> u64 {
        debug_assert!(i < self.n);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(i as u64);
        rng.set_word_pos(2 * block as u128);
        let w = rng.next_u64();
        match self.forced_prefixes.get(&i) {
            Some(p) => p.overlay(block, w),
            None => w,
        }
    }

    pub fn bit(&self, i: usize, l: usize) -> bool {
        self.word(i, l / 64) >> (63 - l % 64) & 1 == 1
    }

    /// The first `len` bits of string `i`.
    pub fn prefix(&self, i: usize, len: usize) -> BitPattern {
        BitPattern::from_bits((0..len).map(|l| self.bit(i, l)))
    }

    /// Lexicographic order of strings `i` and `j` and the length of their
    /// longest common prefix, starting the scan at word `from_block`.
    fn compare_from(&self, i: usize, j: usize, from_block: usize) -> Result<(Ordering, usize)> {
        let mut block = from_block;
        loop {
            let (a, b) = (self.word(i, block), self.word(j, block));
            if a != b {
                let lcp = block * 64 + (a ^ b).leading_zeros() as usize;
                if lcp > self.depth_cap {
                    break;
                }
                return Ok((a.cmp(&b), lcp));
            }
            block += 1;
            if block * 64 > self.depth_cap {
                break;
            }
        }
        Err(Error::DepthCapExceeded {
            first: i,
            second: j,
            cap: self.depth_cap,
        })
    }
}

/// Length of the longest common prefix of strings `i` and `j`.
pub fn lcp(set: &StringSet, i: usize, j: usize) -> Result<usize> {
    if i == j {
        return Err(Error::Domain(format!(
            "lcp needs two distinct strings, got {i} twice"
        )));
    }
    set.compare_from(i, j, 0).map(|(_, l)| l)
}

/// Comparisons that reuse each string's first word.
struct Comparer<'a> {
    set: &'a StringSet,
    first: Vec<u64>,
}

impl<'a> Comparer<'a> {
    fn new(set: &'a StringSet) -> Self {
        let first = (0..set.n).map(|i| set.word(i, 0)).collect();
        Comparer { set, first }
    }

    fn compare(&self, i: usize, j: usize) -> Result<(Ordering, usize)> {
        let (a, b) = (self.first[i], self.first[j]);
        if a != b {
            let lcp = (a ^ b).leading_zeros() as usize;
            if lcp <= self.set.depth_cap {
                return Ok((a.cmp(&b), lcp));
            }
        }
        self.set.compare_from(i, j, 0)
    }
}

/// Minimal `k`-prefix lengths `|beta_i|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixLengths {
    pub k: usize,
    pub lengths: Vec<usize>,
}

impl PrefixLengths {
    /// `p_k = sum (|beta_i| - k)`.
    pub fn excess(&self) -> u64 {
        self.lengths.iter().map(|&l| (l - self.k) as u64).sum()
    }

    pub fn total(&self) -> u64 {
        self.lengths.iter().map(|&l| l as u64).sum()
    }
}

/// A [`StringSet`] sorted lexicographically together with the common-prefix
/// length of each adjacent pair. Everything about the minimal trie at any
/// `k` follows from this.
#[derive(Clone, Debug)]
pub struct SortedStrings {
    order: Vec<usize>,
    adjacent_lcp: Vec<usize>,
    first_words: Vec<u64>,
}

impl SortedStrings {
    pub fn new(set: &StringSet) -> Result<Self> {
        let cmp = Comparer::new(set);
        let mut order: Vec<usize> = (0..set.n).collect();
        let mut failure = None;
        order.sort_unstable_by(|&a, &b| match cmp.compare(a, b) {
            Ok((o, _)) => o,
            Err(e) => {
                failure.get_or_insert(e);
                Ordering::Equal
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        let adjacent_lcp = order
            .windows(2)
            .map(|w| cmp.compare(w[0], w[1]).map(|(_, l)| l))
            .collect::<Result<Vec<_>>>()?;
        Ok(SortedStrings {
            order,
            adjacent_lcp,
            first_words: cmp.first,
        })
    }

    /// String indices in lexicographic order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    fn sorted_length(&self, t: usize, k: usize) -> usize {
        let left = t.checked_sub(1).map(|s| self.adjacent_lcp[s] + 1);
        let right = self.adjacent_lcp.get(t).map(|&l| l + 1);
        left.into_iter().chain(right).fold(k, usize::max)
    }

    pub fn prefix_lengths(&self, k: usize) -> PrefixLengths {
        let mut lengths = vec![0; self.order.len()];
        for (t, &i) in self.order.iter().enumerate() {
            lengths[i] = self.sorted_length(t, k);
        }
        PrefixLengths { k, lengths }
    }

    /// `p_k` without materializing the lengths.
    pub fn excess(&self, k: usize) -> u64 {
        (0..self.order.len())
            .map(|t| (self.sorted_length(t, k) - k) as u64)
            .sum()
    }

    /// Node occupancy at depth `d` (at most 64).
    pub fn node_occupancy(&self, d: u32) -> OccupancyVector {
        occupancy_from_words(&self.first_words, d)
    }
}

fn occupancy_from_words(words: &[u64], d: u32) -> OccupancyVector {
    assert!(d <= 40, "2^{d} trie nodes will not fit in memory");
    let mut counts = vec![0; 1usize << d];
    for &w in words {
        let j = if d == 0 { 0 } else { (w >> (64 - d)) as usize };
        counts[j] += 1;
    }
    OccupancyVector::new(counts)
}

pub fn minimal_prefix_lengths(set: &StringSet, k: usize) -> Result<PrefixLengths> {
    Ok(SortedStrings::new(set)?.prefix_lengths(k))
}

/// The `k`-excess path length `p_k`. `k = 0` gives the nonvoid external path
/// length of the minimal trie; `k = ceil(log2 n)` gives the excess path length.
pub fn excess_path_length(set: &StringSet, k: usize) -> Result<u64> {
    Ok(SortedStrings::new(set)?.excess(k))
}

/// Number of strings through each trie node at depth `d`; node `j` is the one
/// labelled by the `d`-bit binary expansion of `j`.
pub fn node_occupancy(set: &StringSet, d: u32) -> OccupancyVector {
    let words: Vec<u64> = (0..set.n).map(|i| set.word(i, 0)).collect();
    occupancy_from_words(&words, d)
}

/// `ceil(log2 n)`.
pub fn log2_ceil(n: usize) -> usize {
    assert!(n >= 1);
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

/// Per-insertion increments of `p_k` as strings `0, 1, ..., n-1` are added.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaTrace {
    pub k: usize,
    pub deltas: Vec<u64>,
}

impl DeltaTrace {
    pub fn sum(&self) -> u64 {
        self.deltas.iter().sum()
    }
}

/// Inserts the strings one at a time. A new string can lengthen at most one
/// existing prefix: the one it collides with, which is always one of its two
/// lexicographic neighbours among the strings already inserted.
pub fn delta_trace(set: &StringSet, k: usize) -> Result<DeltaTrace> {
    let cmp = Comparer::new(set);
    let mut sorted: Vec<usize> = Vec::with_capacity(set.n);
    let mut lengths = vec![0usize; set.n];
    let mut deltas = Vec::with_capacity(set.n);

    for i in 0..set.n {
        let (mut lo, mut hi) = (0, sorted.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if cmp.compare(sorted[mid], i)?.0 == Ordering::Less {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        let neighbours = lo
            .checked_sub(1)
            .into_iter()
            .chain((lo < sorted.len()).then_some(lo));

        let mut own = k;
        let mut delta = 0u64;
        for t in neighbours {
            let j = sorted[t];
            let need = cmp.compare(i, j)?.1 + 1;
            own = own.max(need);
            if lengths[j] < need {
                delta += (need - lengths[j]) as u64;
                lengths[j] = need;
            }
        }
        lengths[i] = own;
        delta += (own - k) as u64;
        deltas.push(delta);
        sorted.insert(lo, i);
    }
    Ok(DeltaTrace { k, deltas })
}

/// Strings 0 and 1 share their first `ceil((c/2 + 1) n)` bits and differ in
/// the next one; the other strings are left random.
pub fn adversarial_shared_prefix(n: usize, c: f64, seed: u64) -> Result<StringSet> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "need at least two strings, got n = {n}"
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("c must be positive, got {c}")));
    }
    let shared = ((c / 2.0 + 1.0) * n as f64).ceil() as usize;
    let base = StringSet::new(n, seed).prefix(0, shared);
    let with_tail = |b: bool| BitPattern::from_bits((0..shared).map(|l| base.bit(l)).chain([b]));
    let forced = BTreeMap::from([(0, with_tail(false)), (1, with_tail(true))]);
    StringSet::with_forced_prefixes(n, seed, forced)
}

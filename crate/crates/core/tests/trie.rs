use std::collections::BTreeMap;

use rand::RngCore;
use tailsort::estimator::{f_samples_balls, two_sample_chi_square};
use tailsort::occupancy::{f_stat, g_stat};
use tailsort::rng::trial_rng;
use tailsort::trie::{
    delta_trace, excess_path_length, lcp, log2_ceil, minimal_prefix_lengths, node_occupancy,
    BitPattern, SortedStrings, StringSet,
};
use tailsort::Execution;

/// Pointer-based binary trie built by inserting strings one at a time and
/// splitting a leaf whenever a second string reaches it.
enum Node {
    Empty,
    Leaf(usize),
    Inner(Box<Node>, Box<Node>),
}

fn insert(node: &mut Node, set: &StringSet, i: usize, depth: usize) {
    match node {
        Node::Empty => *node = Node::Leaf(i),
        Node::Leaf(j) => {
            let j = *j;
            let mut inner = Node::Inner(Box::new(Node::Empty), Box::new(Node::Empty));
            insert(&mut inner, set, j, depth);
            insert(&mut inner, set, i, depth);
            *node = inner;
        }
        Node::Inner(zero, one) => {
            assert!(depth < 4096, "runaway trie");
            let child = if set.bit(i, depth) { one } else { zero };
            insert(child, set, i, depth + 1);
        }
    }
}

fn leaf_depths(node: &Node, depth: usize, out: &mut BTreeMap<usize, usize>) {
    match node {
        Node::Empty => {}
        Node::Leaf(i) => {
            out.insert(*i, depth);
        }
        Node::Inner(zero, one) => {
            leaf_depths(zero, depth + 1, out);
            leaf_depths(one, depth + 1, out);
        }
    }
}

fn trie_lengths(set: &StringSet, k: usize) -> Vec<usize> {
    let mut root = Node::Empty;
    for i in 0..set.n() {
        insert(&mut root, set, i, 0);
    }
    let mut depths = BTreeMap::new();
    leaf_depths(&root, 0, &mut depths);
    (0..set.n()).map(|i| depths[&i].max(k)).collect()
}

#[test]
fn sorted_neighbours_match_explicit_trie() {
    for n in [8usize, 64] {
        for t in 0..1000 {
            let set = StringSet::new(n, trial_rng(0x7e1e, t).next_u64());
            for k in [0, log2_ceil(n), 2 * log2_ceil(n)] {
                let fast = minimal_prefix_lengths(&set, k).unwrap();
                assert_eq!(fast.lengths, trie_lengths(&set, k), "n={n} t={t} k={k}");
            }
        }
    }
}

#[test]
fn prefixes_are_prefix_free_and_minimal() {
    for t in 0..200 {
        let n = 2 + (t as usize % 40);
        let set = StringSet::new(n, t);
        let k = 3;
        let lens = minimal_prefix_lengths(&set, k).unwrap().lengths;
        let prefixes: Vec<String> = (0..n).map(|i| set.prefix(i, lens[i]).to_string()).collect();
        for i in 0..n {
            assert!(lens[i] >= k);
            for j in 0..n {
                if i != j {
                    assert!(!prefixes[j].starts_with(&prefixes[i]), "{i} prefixes {j}");
                }
            }
            // shortening any single prefix (above k) breaks prefix-freeness
            if lens[i] > k {
                let short = set.prefix(i, lens[i] - 1).to_string();
                assert!((0..n).any(|j| j != i && prefixes[j].starts_with(&short)));
            }
        }
    }
}

#[test]
fn lcp_tail_is_geometric() {
    let pairs = 1_000_000u64;
    let hits = (0..pairs)
        .filter(|&t| {
            let set = StringSet::new(2, trial_rng(0x1c9, t).next_u64());
            lcp(&set, 0, 1).unwrap() >= 10
        })
        .count() as f64;
    let p = 2f64.powi(-10);
    let se = (p * (1.0 - p) / pairs as f64).sqrt();
    let p_hat = hits / pairs as f64;
    assert!((p_hat - p).abs() < 3.0 * se, "{p_hat} vs {p}");
}

#[test]
fn bits_past_minimal_prefixes_do_not_matter() {
    for t in 0..300u64 {
        let n = 24;
        let set = StringSet::new(n, t);
        for k in [0, 5] {
            let lens = minimal_prefix_lengths(&set, k).unwrap();
            // keep each minimal prefix, then append 20 arbitrary bits
            let forced: BTreeMap<usize, BitPattern> = (0..n)
                .map(|i| {
                    let keep = set.prefix(i, lens.lengths[i]);
                    let extra = (0..20).map(|b| (b + i + t as usize).is_multiple_of(3));
                    (
                        i,
                        BitPattern::from_bits((0..keep.len()).map(|l| keep.bit(l)).chain(extra)),
                    )
                })
                .collect();
            let changed = StringSet::with_forced_prefixes(n, t ^ 0xffff, forced).unwrap();
            assert_eq!(minimal_prefix_lengths(&changed, k).unwrap(), lens);
        }
    }
}

#[test]
fn per_sample_chain() {
    for n in [16usize, 32, 64] {
        let log_n = log2_ceil(n);
        let n_log_n = (n * log_n) as u64;
        for t in 0..2000 {
            let set = StringSet::new(n, trial_rng(0xc4a1, t).next_u64());
            let sorted = SortedStrings::new(&set).unwrap();
            let (p0, excess) = (sorted.excess(0), sorted.excess(log_n));
            let nodes = sorted.node_occupancy(log_n as u32);
            assert!(p0 >= n_log_n);
            assert!(p0 <= n_log_n + excess);
            assert!(excess as f64 >= g_stat(&nodes));
            assert!(g_stat(&nodes) <= f_stat(&nodes) as f64);
        }
    }
}

#[test]
fn trie_node_occupancy_has_bucket_law() {
    let n = 16;
    let m = 1_000_000;
    let balls = f_samples_balls(n, m, 0xb1, Execution::default());
    let trie: Vec<u64> = (0..m)
        .map(|t| {
            let set = StringSet::new(n, trial_rng(0xb2, t).next_u64());
            f_stat(&node_occupancy(&set, 4))
        })
        .collect();
    let test = two_sample_chi_square(&balls, &trie);
    assert!(test.p_value > 0.001, "{test:?}");
}

#[test]
fn delta_means_stay_small() {
    let (n, k, m) = (256usize, 8usize, 10_000u64);
    let mut sums = vec![0u64; n];
    for t in 0..m {
        let set = StringSet::new(n, trial_rng(0xde17a, t).next_u64());
        let trace = delta_trace(&set, k).unwrap();
        assert_eq!(trace.sum(), excess_path_length(&set, k).unwrap());
        for (s, d) in sums.iter_mut().zip(&trace.deltas) {
            *s += d;
        }
    }
    let worst = sums
        .iter()
        .map(|&s| s as f64 / m as f64)
        .fold(0.0, f64::max);
    assert!(worst <= 32.0, "largest mean delta {worst}");
}

#[test]
fn random_sets_never_share_long_prefixes() {
    // union bound: C(32,2) 2^-64 per set
    let (n, c) = (32usize, 2.0);
    let shared = ((c / 2.0 + 1.0) * n as f64).ceil() as usize;
    for t in 0..100_000 {
        let set = StringSet::new(n, trial_rng(0xadd, t).next_u64());
        let lens = minimal_prefix_lengths(&set, 0).unwrap();
        assert!(lens.lengths.iter().all(|&l| l <= shared));
    }
}

#[test]
fn adversarial_set_forces_long_paths() {
    for (n, c) in [(4usize, 2.0), (16, 1.0), (32, 3.0)] {
        let set = tailsort::trie::adversarial_shared_prefix(n, c, 5).unwrap();
        let shared = ((c / 2.0 + 1.0) * n as f64).ceil() as usize;
        assert_eq!(lcp(&set, 0, 1).unwrap(), shared);
        let lens = minimal_prefix_lengths(&set, 0).unwrap();
        assert!(lens.lengths[0] > shared && lens.lengths[1] > shared);
        let json = serde_json::to_string(&set).unwrap();
        let back: StringSet = serde_json::from_str(&json).unwrap();
        assert_eq!(minimal_prefix_lengths(&back, 0).unwrap(), lens);
    }
}

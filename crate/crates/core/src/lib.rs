//! Bucket Sort cost tails, balls-into-bins occupancy, and random-trie path
//! lengths, with the machinery to check their identities, expectations and
//! tail bounds by exact enumeration and Monte Carlo.
//!
//! * [`sorting`]: insertion, merge, bucket and randomized quick sort with
//!   counted comparisons and element writes.
//! * [`occupancy`]: occupancy vectors and the statistics `f`, `g`, `|S_i|`, `E_i`.
//! * [`trie`]: lazily generated random strings, minimal `k`-prefixes, excess
//!   path lengths and incremental traces.
//! * [`bounds`]: Chernoff variants and the excess-path tail bound.
//! * [`estimator`]: tail probabilities with Wilson intervals, rates, exact
//!   small-`n` oracles and chi-square tests.
//! * [`cli`]: the `tailsort` command line.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod estimator;
pub mod occupancy;
pub mod rng;
pub mod sorting;
pub mod trials;
pub mod trie;

pub use error::{Error, Result};
pub use trials::Execution;

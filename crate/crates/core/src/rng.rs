//! Counter-based seeding.
//!
//! Every random quantity in the crate is addressed by a counter rather than
//! drawn from a shared stream: trial `t` of a run with master seed `s` always
//! sees the ChaCha8 keystream `(s, stream = t)`, and bit `l` of string `i` in a
//! [`StringSet`](crate::trie::StringSet) always comes from keystream
//! `(seed, stream = i)` at word offset `l / 32`. Results therefore do not
//! depend on how trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default master seed used by the CLI when neither `--seed` nor
/// `TAILSORT_SEED` is given.
pub const DEFAULT_SEED: u64 = 0x7a11_5027;

/// The generator for trial `trial` of a run seeded with `master_seed`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Derives an independent master seed for a named sub-run (pilot phase,
/// second arm of a two-sample test, ...).
pub fn derive_seed(master_seed: u64, label: u64) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = master_seed ^ label.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

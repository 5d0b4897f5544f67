//! Closed-form tail bounds. Everything is evaluated as a log-probability and
//! exponentiated last.
//!
//! For reference, the large-deviation result for randomized Quick Sort that
//! motivates the comparison in [`crate::estimator::event_z_contrast`] is
//!
//! ```text
//! Pr[|T_qs(n) - mu_qs| >= eps * mu_qs] = n^(-2 eps (ln ln n - ln(1/eps) + O(log log log n)))
//! ```
//!
//! for `1/ln n < eps <= 1`. It carries an unquantified `O(.)` term, so it is
//! not evaluated here.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed when checking a `delta` against a domain endpoint,
/// so that `e` typed as `2.71828` still counts as `delta >= e`.
const DOMAIN_SLACK: f64 = 1e-6;

/// `f(delta) = (1 + delta) ln(1 + delta) - delta`, for `delta > -1`.
pub fn cramer_f(delta: f64) -> f64 {
    (1.0 + delta) * delta.ln_1p() - delta
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundVariant {
    /// `(e^d / (1+d)^(1+d))^mu`, any `d > 0`.
    Ch1,
    /// `exp(-mu d^2 / 3)`, `0 < d <= 1`.
    Ch2,
    /// `exp(-mu d / 3)`, `d >= 1`.
    Ch3,
    /// `exp(-mu d ln(d) / 2)`, `d >= e`.
    Ch4,
    /// `exp(-mu d^2 / 3)` for the lower tail `X <= (1-d) mu`, `0 < d <= 1`.
    Ch5,
}

/// Which side of the mean a bound controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailSide {
    /// `Pr[X >= (1 + delta) mu]`
    Upper,
    /// `Pr[X <= (1 - delta) mu]`
    Lower,
}

impl BoundVariant {
    pub const ALL: [BoundVariant; 5] = [
        BoundVariant::Ch1,
        BoundVariant::Ch2,
        BoundVariant::Ch3,
        BoundVariant::Ch4,
        BoundVariant::Ch5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundVariant::Ch1 => "ch1",
            BoundVariant::Ch2 => "ch2",
            BoundVariant::Ch3 => "ch3",
            BoundVariant::Ch4 => "ch4",
            BoundVariant::Ch5 => "ch5",
        }
    }

    pub fn side(self) -> TailSide {
        match self {
            BoundVariant::Ch5 => TailSide::Lower,
            _ => TailSide::Upper,
        }
    }

    /// Whether `delta` lies in this variant's domain.
    pub fn admits(self, delta: f64) -> bool {
        let at_least = |lo: f64| delta >= lo * (1.0 - DOMAIN_SLACK);
        let at_most_one = delta > 0.0 && delta <= 1.0 + DOMAIN_SLACK;
        if !delta.is_finite() {
            return false;
        }
        match self {
            BoundVariant::Ch1 => delta > 0.0,
            BoundVariant::Ch2 | BoundVariant::Ch5 => at_most_one,
            BoundVariant::Ch3 => at_least(1.0),
            BoundVariant::Ch4 => at_least(std::f64::consts::E),
        }
    }
}

impl fmt::Display for BoundVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        BoundVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown bound variant `{s}` (expected ch1..ch5)"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub variant: BoundVariant,
    pub mu: f64,
    pub delta: f64,
}

impl BoundQuery {
    pub fn new(variant: BoundVariant, mu: f64, delta: f64) -> Self {
        BoundQuery { variant, mu, delta }
    }
}

/// Natural log of the bound.
pub fn chernoff_log_bound(q: &BoundQuery) -> Result<f64> {
    if !(q.mu > 0.0 && q.mu.is_finite()) {
        return Err(Error::Domain(format!("mu must be positive, got {}", q.mu)));
    }
    if !q.variant.admits(q.delta) {
        return Err(Error::Domain(format!(
            "delta = {} is outside the domain of {}",
            q.delta, q.variant
        )));
    }
    let (mu, d) = (q.mu, q.delta);
    Ok(match q.variant {
        BoundVariant::Ch1 => -mu * cramer_f(d),
        BoundVariant::Ch2 | BoundVariant::Ch5 => -mu * d * d / 3.0,
        BoundVariant::Ch3 => -mu * d / 3.0,
        BoundVariant::Ch4 => -mu * d * d.ln() / 2.0,
    })
}

pub fn chernoff_bound(q: &BoundQuery) -> Result<f64> {
    chernoff_log_bound(q).map(f64::exp)
}

/// Deviation threshold `(8c + 16) n` paired with [`excess_tail_bound`].
pub fn excess_threshold(c: f64, n: usize) -> f64 {
    (8.0 * c + 16.0) * n as f64
}

/// `exp(-((c - 1 - ln c) / 4) n)`, the bound on
/// `Pr[p_{log n}(L) >= (8c + 16) n]`.
pub fn excess_tail_bound(c: f64, n: usize) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Domain(format!("c must be positive, got {c}")));
    }
    Ok((-(c - 1.0 - c.ln()) / 4.0 * n as f64).exp())
}

/// Rate `-ln p` of a tail probability `p` in `(0, 1]`.
pub fn rate(p_hat: f64) -> Result<f64> {
    if p_hat > 0.0 && p_hat <= 1.0 {
        Ok(-p_hat.ln())
    } else {
        Err(Error::Domain(format!(
            "rate needs a probability in (0, 1], got {p_hat}"
        )))
    }
}

/// Exact `Pr[B_j = i]` for one of `n` bins receiving `n` uniform balls.
pub fn bin_load_probability(n: u64, i: u64) -> f64 {
    if i > n {
        return 0.0;
    }
    let (nf, i_f) = (n as f64, i as f64);
    let ln_choose = statrs::function::factorial::ln_binomial(n, i);
    let ln_p = ln_choose - i_f * nf.ln() + (nf - i_f) * (-1.0 / nf).ln_1p();
    ln_p.exp()
}

/// Lower bound `2^(-2 - i log2 i)` on [`bin_load_probability`].
pub fn bin_load_lower_bound(i: u64) -> f64 {
    let i = i as f64;
    let bits = if i > 1.0 { i * i.log2() } else { 0.0 };
    (-2.0 - bits).exp2()
}

/// Lower bound `2^(-(c/2 + 1) n)` on the probability that two of `n` random
/// strings share a prefix of `(c/2 + 1) n` bits.
pub fn shared_prefix_lower_bound(n: usize, c: f64) -> f64 {
    (-(c / 2.0 + 1.0) * n as f64).exp2()
}

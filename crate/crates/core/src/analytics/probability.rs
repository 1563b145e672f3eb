//! Probability that uniform crossover of two plateau points at Hamming
//! distance 2d, followed by standard bit mutation at rate chi/n, yields the
//! all-ones string:
//!
//! ```text
//! sum_{i=0}^{2d} C(2d, i) 4^-d (chi/n)^(k+d-i) (1-chi/n)^(n-k-d+i)
//! ```
//!
//! Crossover sets `i` of the 2d differing bits to one; mutation must then
//! flip the remaining `k+d-i` zeros and nothing else. Terms are evaluated in
//! log space and added with compensated summation, so `n^(k+d)` denominators
//! do not underflow for large instances.

use statrs::function::factorial::ln_binomial;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessProbability {
    /// The full sum.
    pub exact: f64,
    pub ln_exact: f64,
    /// The `i = 2d` term alone, a lower bound on the sum.
    pub last_term: f64,
    /// `4^-d (chi/n)^(k-d) (1-chi/n)^(n-k+d)`.
    pub lower_bound: f64,
}

fn check(n: usize, k: usize, d: usize) -> Result<()> {
    if !(1 <= d && d <= k && k <= n) {
        return Err(invalid(format!("need 1 <= d <= k <= n, got n={n}, k={k}, d={d}")));
    }
    if d > n - k {
        return Err(invalid(format!(
            "plateau points of Jump_{k} on n={n} bits differ in at most {} positions, got 2d={}",
            2 * (n - k).min(k),
            2 * d
        )));
    }
    Ok(())
}

/// `a * ln(x)` with the convention `0 * ln(0) = 0`.
#[inline]
fn xlog(a: f64, ln_x: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * ln_x
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// ln of the log-sum-exp of `terms`.
fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + compensated_sum(terms.iter().map(|t| (t - max).exp())).ln()
}

/// Success probability at mutation intensity `chi` (rate `chi/n`).
pub fn jump_to_opt_bound(n: usize, k: usize, chi: f64, d: usize) -> Result<SuccessProbability> {
    check(n, k, d)?;
    let p = chi / n as f64;
    if !(p > 0.0 && p <= 1.0) {
        return Err(invalid(format!("mutation rate chi/n must lie in (0, 1], got {p}")));
    }
    let (ln_p, ln_q) = (p.ln(), (1.0 - p).ln());
    let (nf, kf, df) = (n as f64, k as f64, d as f64);
    let ln_quarter_d = -2.0 * df * std::f64::consts::LN_2;
    let terms: Vec<f64> = (0..=2 * d)
        .map(|i| {
            let fi = i as f64;
            ln_binomial(2 * d as u64, i as u64) + ln_quarter_d + xlog(kf + df - fi, ln_p) + xlog(nf - kf - df + fi, ln_q)
        })
        .collect();
    let ln_exact = log_sum_exp(&terms);
    let ln_bound = ln_quarter_d + xlog(kf - df, ln_p) + xlog(nf - kf + df, ln_q);
    Ok(SuccessProbability {
        exact: ln_exact.exp(),
        ln_exact,
        last_term: terms[2 * d].exp(),
        lower_bound: ln_bound.exp(),
    })
}

/// Success probability at the standard rate `1/n`.
pub fn jump_success_probability(n: usize, k: usize, d: usize) -> Result<SuccessProbability> {
    jump_to_opt_bound(n, k, 1.0, d)
}

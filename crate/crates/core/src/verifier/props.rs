//! Numerical instances of the recursive inequalities for `S` and `S~`.
//!
//! Each check evaluates both sides and returns a [`RatioReport`]. Where an
//! inequality only asserts that some parameter exists (a dyadic length or
//! a dilation), every admissible value is tried and the one giving the
//! smallest ratio is recorded as the witness.

use crate::error::{Error, Result};
use crate::lattice::weights::{dyadic_blocks, dyadic_index};
use crate::lattice::{count_s, l1_norm, l2_norm_sq, s_tilde, SumChoice, WeightedPoint};
use crate::report::{RatioReport, Witness};

/// Default exponent standing in for `o(1)` terms.
pub const DEFAULT_EPS: f64 = 0.1;

/// Largest `N` accepted by [`verify_multiplicative`]; its right side sums
/// over `n ~ 2 N^2`.
pub const MULTIPLICATIVE_MAX_N: u64 = 64;

fn require_at_least_one(entries: &[WeightedPoint]) -> Result<()> {
    if entries.is_empty() {
        return Err(Error::param("point set is empty"));
    }
    if entries.iter().any(|p| !(p.x >= 1.0)) {
        return Err(Error::param("points must lie in [1, infinity)"));
    }
    Ok(())
}

fn block_level(block: &[WeightedPoint]) -> Result<u32> {
    require_at_least_one(block)?;
    let k = dyadic_index(block[0].x);
    if block.iter().any(|p| dyadic_index(p.x) != k) {
        return Err(Error::param("points span more than one dyadic block"));
    }
    Ok(k)
}

fn dyadic_up_to(limit: u64) -> impl Iterator<Item = u64> {
    (0..64).map(|e| 1u64 << e).take_while(move |&v| v <= limit)
}

/// Picks the candidate with the largest right-hand side.
fn best_of<T: Copy>(candidates: impl IntoIterator<Item = Result<(T, f64)>>) -> Result<(T, f64)> {
    let mut best: Option<(T, f64)> = None;
    for c in candidates {
        let (w, rhs) = c?;
        if best.is_none_or(|(_, b)| rhs > b) {
            best = Some((w, rhs));
        }
    }
    best.ok_or_else(|| Error::param("no admissible witness"))
}

/// `S(X, M, K)` against `sum_k S~(X_k, N, 4K)` for dyadic `N <= 2M`.
pub fn verify_dyadic_partition(entries: &[WeightedPoint], m: u64, k: f64) -> Result<RatioReport> {
    require_at_least_one(entries)?;
    let lhs = count_s(entries, m, k, SumChoice::Auto)? as f64;
    let split = dyadic_blocks(entries);
    let (n, rhs) = best_of(dyadic_up_to(2 * m).map(|n| {
        let total = split
            .blocks
            .iter()
            .map(|b| s_tilde(b.entries, n, 4.0 * k).map(|v| v as f64))
            .sum::<Result<f64>>()?;
        Ok((n, total))
    }))?;
    Ok(RatioReport::new("dyadic-partition", lhs, rhs)
        .param("M", m as f64)
        .param("K", k)
        .with_witness(Witness::Length(n as f64)))
}

/// `S~(X_k, N, J K)` against `J S~(X_k, N, K)`.
pub fn verify_linear(block: &[WeightedPoint], n: u64, k: f64, j: f64) -> Result<RatioReport> {
    block_level(block)?;
    if !(j >= 1.0) {
        return Err(Error::param("J must be at least 1"));
    }
    let lhs = s_tilde(block, n, j * k)? as f64;
    let rhs = j * s_tilde(block, n, k)? as f64;
    Ok(RatioReport::new("linear", lhs, rhs)
        .param("N", n as f64)
        .param("K", k)
        .param("J", j))
}

/// `S~(X_k, N, K)` against
/// `N K 2^-k |a|_1^2 + (N / N0) |a|_1^2 + N^{1+eps} / N0 S~(X_k, L, N0 K / N)`
/// over dyadic `L <= 4 N0`.
pub fn verify_decreasing(
    block: &[WeightedPoint],
    n: u64,
    k: f64,
    n0: u64,
    eps: f64,
) -> Result<RatioReport> {
    let level = block_level(block)?;
    if n0 == 0 || n0 > n {
        return Err(Error::param("N0 must lie in [1, N]"));
    }
    let lhs = s_tilde(block, n, k)? as f64;
    let l1 = l1_norm(block) as f64;
    let (nf, n0f) = (n as f64, n0 as f64);
    let fixed = nf * k / 2f64.powi(level as i32) * l1 * l1 + nf / n0f * l1 * l1;
    let (l, rhs) = best_of(dyadic_up_to(4 * n0).map(|l| {
        let inner = s_tilde(block, l, n0f * k / nf)? as f64;
        Ok((l, fixed + nf.powf(1.0 + eps) / n0f * inner))
    }))?;
    Ok(RatioReport::new("decreasing", lhs, rhs)
        .param("k", f64::from(level))
        .param("N", nf)
        .param("K", k)
        .param("N0", n0f)
        .with_witness(Witness::Shortened(l as f64)))
}

/// `S~(X_k, N, K)` against `S~(X_k, theta J N, J K) / J`, `theta in {1, 2}`.
pub fn verify_increasing(block: &[WeightedPoint], n: u64, k: f64, j: u64) -> Result<RatioReport> {
    block_level(block)?;
    if j == 0 {
        return Err(Error::param("J must be at least 1"));
    }
    let lhs = s_tilde(block, n, k)? as f64;
    let jf = j as f64;
    let (theta, rhs) = best_of(
        [1u32, 2].map(|t| Ok((t, s_tilde(block, u64::from(t) * j * n, jf * k)? as f64 / jf))),
    )?;
    Ok(RatioReport::new("increasing", lhs, rhs)
        .param("N", n as f64)
        .param("K", k)
        .param("J", jf)
        .with_witness(Witness::Theta(theta)))
}

/// `S~(X_k, N, K)` against
/// `N^eps |a_k|_{2, N/K} S~(X_k, theta N^2, N K)^{1/2}`.
pub fn verify_multiplicative(
    block: &[WeightedPoint],
    n: u64,
    k: f64,
    eps: f64,
) -> Result<RatioReport> {
    block_level(block)?;
    if n == 0 || n > MULTIPLICATIVE_MAX_N {
        return Err(Error::param(format!(
            "N must lie in [1, {MULTIPLICATIVE_MAX_N}]"
        )));
    }
    let lhs = s_tilde(block, n, k)? as f64;
    let nf = n as f64;
    let norm = (l2_norm_sq(block, nf / k) as f64).sqrt();
    let (theta, rhs) = best_of([1u64, 2].map(|t| {
        let wide = s_tilde(block, t * n * n, nf * k)? as f64;
        Ok((t as u32, nf.powf(eps) * norm * wide.sqrt()))
    }))?;
    Ok(RatioReport::new("multiplicative", lhs, rhs)
        .param("N", nf)
        .param("K", k)
        .with_witness(Witness::Theta(theta)))
}

/// `|a_k|_{2,N}^2` against `(M / N) |a_k|_{2,M}^2`.
pub fn verify_l2_monotonicity(block: &[WeightedPoint], n: f64, m: f64) -> Result<RatioReport> {
    block_level(block)?;
    if !(n > 0.0 && m >= n) {
        return Err(Error::param("need 0 < N <= M"));
    }
    let lhs = l2_norm_sq(block, n) as f64;
    let rhs = m / n * l2_norm_sq(block, m) as f64;
    Ok(RatioReport::new("l2-monotonicity", lhs, rhs)
        .param("N", n)
        .param("M", m))
}

/// `S(X, M, K)` against the three-term bound with every `o(1)` exponent
/// replaced by `(M K)^eps`.
pub fn verify_main_bound(
    entries: &[WeightedPoint],
    m: u64,
    k: f64,
    eps: f64,
) -> Result<RatioReport> {
    require_at_least_one(entries)?;
    let lhs = count_s(entries, m, k, SumChoice::Auto)? as f64;
    let mf = m as f64;
    let l1 = l1_norm(entries) as f64;
    let l2 = (l2_norm_sq(entries, mf) as f64).sqrt();
    let growth: f64 = entries.iter().map(|p| p.weight as f64 / p.x.sqrt()).sum();
    let mk = mf * k;
    let terms = mf.powf(1.5) * k * l2 * growth + mk.sqrt() * l1 * l2 + mk * l2 * l2;
    Ok(RatioReport::new("main-bound", lhs, mk.powf(eps) * terms)
        .param("M", mf)
        .param("K", k)
        .param("eps", eps))
}

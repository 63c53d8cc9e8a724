//! The two counting conditions of the lattice-count criterion.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{
    count_s_with, Boundary, DifferenceWeights, SumChoice, SumMethod, WeightedPoint,
};
use crate::sequences::SequenceWindow;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RtSums {
    pub n: usize,
    pub eps: f64,
    /// Multiplier bound `floor(N^{1+eps})`.
    pub m_max: u64,
    /// Strict threshold `N^eps`.
    pub threshold: f64,
    pub sum1: u128,
    pub sum2: u128,
}

/// Largest `c <= hi` with `pred(c)`, for `pred` true on a prefix of `0..=hi`
/// and `pred(0)` true.
fn last_true(hi: u64, pred: impl Fn(u64) -> bool) -> u64 {
    let (mut lo, mut hi) = (0u64, hi);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// `#{1 <= m <= M : m x < T}`.
fn multiples_below(x: f64, m_max: u64, t: f64) -> u64 {
    last_true(m_max, |m| m == 0 || (m as f64 * x) < t)
}

/// `sum alpha(x1) alpha(x2) #{m1, m2 in [1, M] : m1 x1 + m2 x2 < T}`.
fn sum_branch(entries: &[WeightedPoint], m_max: u64, t: f64) -> u128 {
    let smallest = match entries.first() {
        Some(p) => p.x,
        None => return 0,
    };
    entries
        .par_iter()
        .map(|p| {
            let mut total = 0u128;
            for m1 in 1..=m_max {
                let a = m1 as f64 * p.x;
                if !(a + smallest < t) {
                    break;
                }
                for q in entries {
                    if !(a + q.x < t) {
                        break;
                    }
                    let c = last_true(m_max, |m2| m2 == 0 || a + m2 as f64 * q.x < t);
                    total += u128::from(p.weight) * u128::from(q.weight) * u128::from(c);
                }
            }
            total
        })
        .sum()
}

/// Both sums over the first `n` terms with `m <= N^{1+eps}` and threshold
/// `N^eps`. Ordered index pairs and signed multipliers are folded onto the
/// positive difference weights: the first sum is `2 sum alpha(x) #{m}` and
/// the second is `8 (S_< + A_<)`, where `S_<` counts `|m1 x1 - m2 x2| < T`
/// and `A_<` counts `m1 x1 + m2 x2 < T`.
pub fn rt_sums(window: &SequenceWindow, n: usize, eps: f64) -> Result<RtSums> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::param("eps must lie in (0, 1)"));
    }
    if n < 2 {
        return Err(Error::param("need at least two terms"));
    }
    let weights = DifferenceWeights::differences(window, n, 0.0)?;
    let nf = n as f64;
    let m_max = nf.powf(1.0 + eps).floor() as u64;
    let threshold = nf.powf(eps);
    let entries = weights.entries();
    let sum1: u128 = entries
        .iter()
        .map(|p| u128::from(p.weight) * u128::from(multiples_below(p.x, m_max, threshold)))
        .sum::<u128>()
        * 2;
    let near = count_s_with(
        entries,
        m_max,
        threshold,
        SumChoice::Fixed(SumMethod::ProductSort),
        Boundary::Open,
    )?;
    let sum2 = 8 * (near + sum_branch(entries, m_max, threshold));
    Ok(RtSums {
        n,
        eps,
        m_max,
        threshold,
        sum1,
        sum2,
    })
}

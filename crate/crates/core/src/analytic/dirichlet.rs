//! Two-sided comparisons between dyadic lattice sums and mean squares of
//! Dirichlet polynomials, and the character amplification step.

use num_complex::Complex64;

use super::quadrature::{mean_value_integral, ExpPoly};
use crate::error::{Error, Result};
use crate::lattice::weights::dyadic_index;
use crate::lattice::{s_tilde_weighted, WeightedPoint};
use crate::numeric::prime_in;
use crate::report::{RatioReport, Witness};

/// Largest `|X_k| * N` handled by the quadrature comparisons.
pub const MAX_TERMS: u64 = 100_000;

fn block_level(block: &[WeightedPoint]) -> Result<u32> {
    let first = block
        .first()
        .ok_or_else(|| Error::param("block is empty"))?;
    if !(first.x >= 1.0) {
        return Err(Error::param("block points must be at least 1"));
    }
    let k = dyadic_index(first.x);
    let last = block.last().expect("nonempty");
    if dyadic_index(last.x) != k {
        return Err(Error::param("points span more than one dyadic block"));
    }
    Ok(k)
}

fn check_terms(block: &[WeightedPoint], n: u64) -> Result<()> {
    let terms = block.len() as u64 * n;
    if terms > MAX_TERMS {
        return Err(Error::EnumerationCap {
            bound: terms as f64,
            cap: MAX_TERMS as f64,
        });
    }
    Ok(())
}

/// `int_{-T}^{T} |sum_x alpha(x) x^{-it} sum_{n ~ N} beta(n) n^{-it}|^2 dt`.
pub fn block_integral(
    block: &[WeightedPoint],
    n: u64,
    t_max: f64,
    beta: Option<&[Complex64]>,
) -> Result<f64> {
    check_terms(block, n)?;
    let poly = ExpPoly::block_times_range(block, n, beta)?;
    Ok(mean_value_integral(&poly, t_max)?.value * t_max)
}

/// Both sides of the comparison at `K = 2^k N / T`: the first report has
/// `S~(beta) / (mean square)`, the second `(mean square) / S~(|beta|)`.
pub fn sum_integral_sandwich(
    block: &[WeightedPoint],
    n: u64,
    t_max: f64,
    beta: Option<&[Complex64]>,
) -> Result<(RatioReport, RatioReport)> {
    let k = block_level(block)?;
    check_terms(block, n)?;
    let width = 2f64.powi(k as i32) * n as f64 / t_max;
    let ones = vec![Complex64::new(1.0, 0.0); n as usize];
    let beta = beta.unwrap_or(&ones);
    let moduli: Vec<Complex64> = beta.iter().map(|b| Complex64::new(b.norm(), 0.0)).collect();
    let signed = s_tilde_weighted(block, n, width, beta)?.re;
    let absolute = s_tilde_weighted(block, n, width, &moduli)?.re;
    let poly = ExpPoly::block_times_range(block, n, Some(beta))?;
    let mean = mean_value_integral(&poly, t_max)?.value;
    let tag = |r: RatioReport| {
        r.param("k", f64::from(k))
            .param("N", n as f64)
            .param("T", t_max)
            .param("K", width)
    };
    Ok((
        tag(RatioReport::new("sum-integral-lower", signed, mean)),
        tag(RatioReport::new("sum-integral-upper", mean, absolute)),
    ))
}

/// `J` times the mean square over `n ~ N`, against the mean square over
/// `m ~ theta J N`; the smaller ratio over `theta in {1, 2}` is reported.
pub fn amplification_check(
    block: &[WeightedPoint],
    n: u64,
    j: u64,
    t_max: f64,
) -> Result<RatioReport> {
    if j == 0 {
        return Err(Error::param("J must be at least 1"));
    }
    block_level(block)?;
    check_terms(block, 2 * j * n)?;
    let q = prime_in(4 * j, 8 * j)
        .ok_or_else(|| Error::param(format!("no prime in [{}, {}]", 4 * j, 8 * j)))?;
    let lhs = block_integral(block, n, t_max, None)? * j as f64;
    let mut best: Option<(f64, u32)> = None;
    for theta in [1u32, 2] {
        let rhs = block_integral(block, u64::from(theta) * j * n, t_max, None)?;
        if best.is_none_or(|(b, _)| lhs / rhs < lhs / b) {
            best = Some((rhs, theta));
        }
    }
    let (rhs, theta) = best.expect("two candidates");
    Ok(RatioReport::new("amplification", lhs, rhs)
        .param("N", n as f64)
        .param("J", j as f64)
        .param("T", t_max)
        .param("q", q as f64)
        .with_witness(Witness::Theta(theta)))
}

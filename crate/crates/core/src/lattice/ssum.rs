//! Weighted counts of near-coincident multiples `|m1 x1 - m2 x2| <= K`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::weights::WeightedPoint;
use crate::error::{Error, Result};
use crate::numeric::CompensatedComplex;

/// Largest product table built by [`SumMethod::ProductSort`].
pub const MAX_PRODUCTS: usize = 1 << 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SumMethod {
    Brute,
    IntervalPerRow,
    ProductSort,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SumChoice {
    #[default]
    Auto,
    Fixed(SumMethod),
}

impl std::str::FromStr for SumChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => SumChoice::Auto,
            "brute" => SumChoice::Fixed(SumMethod::Brute),
            "interval" => SumChoice::Fixed(SumMethod::IntervalPerRow),
            "productsort" => SumChoice::Fixed(SumMethod::ProductSort),
            other => return Err(Error::param(format!("unknown method `{other}`"))),
        })
    }
}

/// Whether the window edge `K` itself is counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Boundary {
    Closed,
    Open,
}

impl Boundary {
    #[inline]
    fn below(self, v: f64, k: f64) -> bool {
        match self {
            Boundary::Closed => v <= k,
            Boundary::Open => v < k,
        }
    }
}

/// Inclusive range of multipliers `lo..=hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Multipliers {
    lo: u64,
    hi: u64,
}

impl Multipliers {
    fn count(self) -> u64 {
        self.hi - self.lo + 1
    }
}

#[inline]
fn hit(a: f64, m2: u64, x2: f64, k: f64, boundary: Boundary) -> bool {
    boundary.below((a - m2 as f64 * x2).abs(), k)
}

/// Multipliers `m2` in `range` with `|a - m2 x2|` inside the window. The
/// float predicate is monotone on each side of `a / x2`, so a division
/// estimate corrected by a few exact evaluations finds both ends.
fn matching_interval(
    a: f64,
    x2: f64,
    k: f64,
    boundary: Boundary,
    range: Multipliers,
) -> Option<Multipliers> {
    // upper side: a - m x2 decreases in m, holds from some m on
    let upper_ok = |m: u64| boundary.below(a - m as f64 * x2, k);
    // lower side: a - m x2 >= -k holds up to some m
    let lower_ok = |m: u64| boundary.below(m as f64 * x2 - a, k);

    let clamp = |v: f64| -> u64 {
        if !(v >= range.lo as f64) {
            range.lo
        } else if v > range.hi as f64 {
            range.hi + 1
        } else {
            v as u64
        }
    };

    let mut lo = clamp(((a - k) / x2).ceil());
    while lo > range.lo && upper_ok(lo - 1) {
        lo -= 1;
    }
    while lo <= range.hi && !upper_ok(lo) {
        lo += 1;
    }
    let mut hi = clamp(((a + k) / x2).floor()).min(range.hi);
    while hi < range.hi && lower_ok(hi + 1) {
        hi += 1;
    }
    while !lower_ok(hi) {
        if hi == range.lo {
            return None;
        }
        hi -= 1;
    }
    (lo <= hi).then_some(Multipliers { lo, hi })
}

fn validate(entries: &[WeightedPoint], m_hi: u64, k: f64) -> Result<()> {
    if m_hi == 0 {
        return Err(Error::param("M must be at least 1"));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::param("K must be a nonnegative real"));
    }
    if entries.iter().any(|p| !(p.x.is_finite() && p.x > 0.0)) {
        return Err(Error::param("points must be positive reals"));
    }
    Ok(())
}

fn weight_product(p: &WeightedPoint, q: &WeightedPoint) -> u128 {
    u128::from(p.weight) * u128::from(q.weight)
}

fn brute_range(entries: &[WeightedPoint], range: Multipliers, k: f64, boundary: Boundary) -> u128 {
    let mut total = 0u128;
    for m1 in range.lo..=range.hi {
        for p in entries {
            let a = m1 as f64 * p.x;
            for m2 in range.lo..=range.hi {
                for q in entries {
                    if hit(a, m2, q.x, k, boundary) {
                        total += weight_product(p, q);
                    }
                }
            }
        }
    }
    total
}

fn interval_range(
    entries: &[WeightedPoint],
    range: Multipliers,
    k: f64,
    boundary: Boundary,
) -> u128 {
    (range.lo..=range.hi)
        .into_par_iter()
        .map(|m1| {
            let mut row = 0u128;
            for p in entries {
                let a = m1 as f64 * p.x;
                for q in entries {
                    if let Some(iv) = matching_interval(a, q.x, k, boundary, range) {
                        row += weight_product(p, q) * u128::from(iv.count());
                    }
                }
            }
            row
        })
        .sum()
}

fn product_table(entries: &[WeightedPoint], range: Multipliers) -> Result<Vec<(f64, u64)>> {
    let size = (range.count() as usize).saturating_mul(entries.len());
    if size > MAX_PRODUCTS {
        return Err(Error::MemoryCap {
            what: "product table",
            bytes: (size * 16) as u64,
            cap: (MAX_PRODUCTS * 16) as u64,
        });
    }
    let mut products = Vec::with_capacity(size);
    for m in range.lo..=range.hi {
        for p in entries {
            products.push((m as f64 * p.x, p.weight));
        }
    }
    products.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    Ok(products)
}

fn product_sort_range(
    entries: &[WeightedPoint],
    range: Multipliers,
    k: f64,
    boundary: Boundary,
) -> Result<u128> {
    let products = product_table(entries, range)?;
    let mut prefix = Vec::with_capacity(products.len() + 1);
    prefix.push(0u128);
    let mut acc = 0u128;
    for &(_, w) in &products {
        acc += u128::from(w);
        prefix.push(acc);
    }
    let total = products
        .par_iter()
        .map(|&(a, w)| {
            let lo = products.partition_point(|&(b, _)| !boundary.below(a - b, k));
            let hi = products.partition_point(|&(b, _)| boundary.below(b - a, k) || b <= a);
            u128::from(w) * (prefix[hi] - prefix[lo])
        })
        .sum();
    Ok(total)
}

fn run(
    entries: &[WeightedPoint],
    range: Multipliers,
    k: f64,
    method: SumMethod,
    boundary: Boundary,
) -> Result<u128> {
    match method {
        SumMethod::Brute => Ok(brute_range(entries, range, k, boundary)),
        SumMethod::IntervalPerRow => Ok(interval_range(entries, range, k, boundary)),
        SumMethod::ProductSort => product_sort_range(entries, range, k, boundary),
    }
}

fn resolve(choice: SumChoice, entries: &[WeightedPoint], range: Multipliers) -> SumMethod {
    match choice {
        SumChoice::Fixed(m) => m,
        SumChoice::Auto => {
            let products = range.count() as u128 * entries.len() as u128;
            if products <= MAX_PRODUCTS as u128 && entries.len() > 8 {
                SumMethod::ProductSort
            } else {
                SumMethod::IntervalPerRow
            }
        }
    }
}

/// `S(X, alpha, M, K)`: weighted count of `1 <= m1, m2 <= M`, `x1, x2 in X`
/// with `|m1 x1 - m2 x2| <= K`.
pub fn count_s(entries: &[WeightedPoint], m: u64, k: f64, method: SumChoice) -> Result<u128> {
    count_s_with(entries, m, k, method, Boundary::Closed)
}

pub fn count_s_with(
    entries: &[WeightedPoint],
    m: u64,
    k: f64,
    method: SumChoice,
    boundary: Boundary,
) -> Result<u128> {
    validate(entries, m, k)?;
    let range = Multipliers { lo: 1, hi: m };
    run(entries, range, k, resolve(method, entries, range), boundary)
}

/// `S~(X, alpha, N, K)`: as [`count_s`] with `n1, n2` in `(N, 2N]`.
pub fn s_tilde(entries: &[WeightedPoint], n: u64, k: f64) -> Result<u128> {
    validate(entries, n, k)?;
    let range = Multipliers {
        lo: n + 1,
        hi: 2 * n,
    };
    run(
        entries,
        range,
        k,
        resolve(SumChoice::Auto, entries, range),
        Boundary::Closed,
    )
}

/// `S~(X, alpha, beta, N, K)` with `beta[i]` the weight of `n = N + 1 + i`.
pub fn s_tilde_weighted(
    entries: &[WeightedPoint],
    n: u64,
    k: f64,
    beta: &[Complex64],
) -> Result<Complex64> {
    validate(entries, n, k)?;
    if beta.len() as u64 != n {
        return Err(Error::param(format!(
            "beta has length {}, expected {n}",
            beta.len()
        )));
    }
    let range = Multipliers {
        lo: n + 1,
        hi: 2 * n,
    };
    let mut prefix = Vec::with_capacity(beta.len() + 1);
    let mut acc = CompensatedComplex::default();
    prefix.push(Complex64::new(0.0, 0.0));
    for &b in beta {
        acc.add(b);
        prefix.push(acc.value());
    }
    let rows: Vec<Complex64> = (range.lo..=range.hi)
        .into_par_iter()
        .map(|n1| {
            let mut row = CompensatedComplex::default();
            let b1 = beta[(n1 - range.lo) as usize];
            for p in entries {
                let a = n1 as f64 * p.x;
                for q in entries {
                    if let Some(iv) = matching_interval(a, q.x, k, Boundary::Closed, range) {
                        let inner = prefix[(iv.hi - range.lo + 1) as usize]
                            - prefix[(iv.lo - range.lo) as usize];
                        row.add(b1 * inner * weight_product(p, q) as f64);
                    }
                }
            }
            row.value()
        })
        .collect();
    let mut total = CompensatedComplex::default();
    for r in rows {
        total.add(r);
    }
    Ok(total.value())
}

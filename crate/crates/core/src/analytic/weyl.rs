//! Weyl sums `sum_{n <= N} e(p(n) x)`, their even moments over `[0, 1]`,
//! and the equal-sum counts those moments equal for integer polynomials.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::hash::Hash;

use num_complex::Complex64;
use rayon::prelude::*;

use super::quadrature::{MomentResult, QuadratureMethod, MAX_GRID};
use crate::energy::{approx_energy_values, MethodChoice};
use crate::error::{Error, Result};
use crate::numeric::{horner, pairwise_sum, powi_by_squaring, CompensatedComplex};
use crate::report::RatioReport;

/// Largest `N^s` accepted by the multiset counters.
pub const MAX_TUPLES: f64 = 1e7;

fn validate_poly(coeffs: &[f64]) -> Result<()> {
    if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::param("polynomial needs finite coefficients"));
    }
    Ok(())
}

/// `sum_{1 <= n <= N} e(p(n) x)`, coefficients from the highest degree.
pub fn weyl_sum(coeffs: &[f64], n: u64, x: f64) -> Result<Complex64> {
    validate_poly(coeffs)?;
    let mut acc = CompensatedComplex::default();
    for m in 1..=n {
        let phase = (horner(coeffs, m as f64) * x).rem_euclid(1.0);
        acc.add(Complex64::cis(TAU * phase));
    }
    Ok(acc.value())
}

/// `p(1), ..., p(N)` as exact integers when every coefficient is integral.
fn integer_values(coeffs: &[f64], n: u64) -> Option<Vec<i128>> {
    let ints: Vec<i128> = coeffs
        .iter()
        .map(|&c| (c.fract() == 0.0 && c.abs() < 9e15).then_some(c as i128))
        .collect::<Option<_>>()?;
    (1..=n as i128)
        .map(|m| {
            ints.iter()
                .try_fold(0i128, |acc, &c| acc.checked_mul(m)?.checked_add(c))
        })
        .map(|v| v.filter(|v| v.abs() < 1 << 62))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum HuaMethod {
    /// Exact grid for integer polynomials, otherwise refinement at `1e-9`.
    #[default]
    Auto,
    NyquistExact,
    Refined {
        tol: f64,
    },
}

/// `int_0^1 |sum_{n <= N} e(p(n) x)|^{2s} dx`.
pub fn hua_moment(coeffs: &[f64], n: u64, two_s: u32, method: HuaMethod) -> Result<MomentResult> {
    validate_poly(coeffs)?;
    if n == 0 {
        return Err(Error::param("N must be at least 1"));
    }
    if two_s == 0 || two_s % 2 == 1 {
        return Err(Error::param(format!(
            "moment exponent {two_s} must be a positive even integer"
        )));
    }
    let s = two_s / 2;
    match (method, integer_values(coeffs, n)) {
        (HuaMethod::Auto | HuaMethod::NyquistExact, Some(values)) => nyquist_moment(&values, s),
        (HuaMethod::NyquistExact, None) => Err(Error::param(
            "exact quadrature needs an integer polynomial of moderate size",
        )),
        (HuaMethod::Auto, None) => refined_moment(coeffs, n, s, 1e-9),
        (HuaMethod::Refined { tol }, _) => refined_moment(coeffs, n, s, tol),
    }
}

/// Trapezoid rule on `G = s (max p - min p) + 1` points, which integrates
/// every trigonometric polynomial of degree below `G` exactly. Phases are
/// reduced modulo `G` in integer arithmetic.
fn nyquist_moment(values: &[i128], s: u32) -> Result<MomentResult> {
    let lo = *values.iter().min().expect("N >= 1");
    let hi = *values.iter().max().expect("N >= 1");
    let grid = i128::from(s) * (hi - lo) + 1;
    if grid > MAX_GRID as i128 {
        return Err(Error::MemoryCap {
            what: "moment grid",
            bytes: (grid as u64).saturating_mul(8),
            cap: (MAX_GRID * 8) as u64,
        });
    }
    let residues: Vec<i128> = values.iter().map(|v| v.rem_euclid(grid)).collect();
    let samples: Vec<f64> = (0..grid)
        .into_par_iter()
        .map(|g| {
            let mut acc = CompensatedComplex::default();
            for r in &residues {
                let index = r * g % grid;
                acc.add(Complex64::cis(TAU * index as f64 / grid as f64));
            }
            powi_by_squaring(acc.value().norm_sqr(), s)
        })
        .collect();
    let n = values.len() as f64;
    Ok(MomentResult {
        value: pairwise_sum(&samples) / grid as f64,
        grid_size: grid as usize,
        error_estimate: n.powi(2 * s as i32) * f64::EPSILON * (2.0 * f64::from(s) + n),
        method: QuadratureMethod::NyquistExact,
    })
}

/// Composite Simpson on `[0, 1]`, doubled until the Richardson estimate
/// drops below `tol` relative to `max(1, value)`.
fn refined_moment(coeffs: &[f64], n: u64, s: u32, tol: f64) -> Result<MomentResult> {
    if !(tol > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    let values: Vec<f64> = (1..=n).map(|m| horner(coeffs, m as f64)).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = f64::from(s) * (hi - lo);
    let integrand = |x: f64| {
        let mut acc = CompensatedComplex::default();
        for v in &values {
            acc.add(Complex64::cis(TAU * (v * x).rem_euclid(1.0)));
        }
        powi_by_squaring(acc.value().norm_sqr(), s)
    };
    let mut intervals = ((8.0 * spread).ceil() as usize).max(16).div_ceil(4) * 4;
    loop {
        if intervals > MAX_GRID {
            return Err(Error::MemoryCap {
                what: "moment grid",
                bytes: (intervals * 8) as u64,
                cap: (MAX_GRID * 8) as u64,
            });
        }
        let h = 1.0 / intervals as f64;
        let samples: Vec<f64> = (0..=intervals)
            .into_par_iter()
            .map(|i| integrand(i as f64 * h))
            .collect();
        let rule = |stride: usize| {
            let picked: Vec<f64> = samples.iter().step_by(stride).copied().collect();
            let last = picked.len() - 1;
            let w: Vec<f64> = picked
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    v * if i == 0 || i == last {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    }
                })
                .collect();
            pairwise_sum(&w) * h * stride as f64 / 3.0
        };
        let (fine, coarse) = (rule(1), rule(2));
        let error = (fine - coarse).abs() / 15.0;
        if error <= tol * fine.abs().max(1.0) {
            return Ok(MomentResult {
                value: fine,
                grid_size: intervals + 1,
                error_estimate: error,
                method: QuadratureMethod::Refined,
            });
        }
        intervals *= 2;
    }
}

fn check_tuples(n: u64, s: u32) -> Result<()> {
    let tuples = (n as f64).powi(s as i32);
    if tuples > MAX_TUPLES {
        return Err(Error::EnumerationCap {
            bound: tuples,
            cap: MAX_TUPLES,
        });
    }
    Ok(())
}

/// Visits every multiset of size `s` drawn from `0..n`, as a nondecreasing
/// index list, with its number of orderings.
fn for_each_multiset(n: usize, s: usize, mut visit: impl FnMut(&[usize], u128)) {
    let factorial = |k: usize| (1..=k as u128).product::<u128>();
    let total = factorial(s);
    let mut idx = vec![0usize; s];
    loop {
        let mut weight = total;
        let mut run = 1;
        for i in 1..=s {
            if i < s && idx[i] == idx[i - 1] {
                run += 1;
            } else {
                weight /= factorial(run);
                run = 1;
            }
        }
        visit(&idx, weight);
        // next nondecreasing sequence
        let Some(pos) = (0..s).rev().find(|&i| idx[i] + 1 < n) else {
            return;
        };
        let v = idx[pos] + 1;
        for slot in &mut idx[pos..] {
            *slot = v;
        }
    }
}

fn collision_count<K: Hash + Eq>(n: usize, s: usize, key: impl Fn(&[usize]) -> K) -> u128 {
    if s == 0 {
        return 1;
    }
    let mut classes: HashMap<K, u128> = HashMap::new();
    for_each_multiset(n, s, |idx, w| *classes.entry(key(idx)).or_default() += w);
    classes.values().map(|w| w * w).sum()
}

/// Solutions of `sum_{i <= s} v[a_i] = sum_{i <= s} v[b_i]` over index
/// tuples `a, b` in `[0, len)^s`.
pub fn equal_sum_count(values: &[i64], s: u32) -> Result<u128> {
    check_tuples(values.len() as u64, s)?;
    Ok(collision_count(values.len(), s as usize, |idx| {
        idx.iter().map(|&i| i128::from(values[i])).sum::<i128>()
    }))
}

/// `J_{s,k}(N)`: solutions of `sum_i n_i^j = sum_i m_i^j` for `j = 1..k`
/// with all variables in `[1, N]`.
pub fn vinogradov_count(k: u32, s: u32, n: u64) -> Result<u128> {
    if k == 0 || n == 0 {
        return Err(Error::param("k and N must be at least 1"));
    }
    check_tuples(n, s)?;
    Ok(collision_count(n as usize, s as usize, |idx| {
        (1..=k)
            .map(|j| idx.iter().map(|&i| (i as i128 + 1).pow(j)).sum::<i128>())
            .collect::<Vec<i128>>()
    }))
}

/// `E*_N` of `p(1), ..., p(N)` at `gamma = 1` against the fourth moment of
/// the matching Weyl sum.
pub fn quadruple_moment_check(coeffs: &[f64], n: u64) -> Result<RatioReport> {
    validate_poly(coeffs)?;
    let window: Vec<f64> = (1..=n).map(|m| horner(coeffs, m as f64)).collect();
    let energy = approx_energy_values(&window, 1.0, MethodChoice::Auto)?.value;
    let moment = hua_moment(coeffs, n, 4, HuaMethod::Auto)?;
    Ok(
        RatioReport::new("quadruple-moment", energy as f64, moment.value)
            .param("N", n as f64)
            .param("degree", (coeffs.len() - 1) as f64)
            .param("error_estimate", moment.error_estimate),
    )
}

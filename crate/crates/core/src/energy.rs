//! Exact and approximate additive energies, the discretization of convex
//! sequences, and the pair statistics feeding the growth condition.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{fit_line, pairwise_sum};
use crate::sequences::{generate, SequenceSpec, SequenceWindow};

/// Largest window handled by the sorted-sums method; it keeps `N^2` sums.
pub const TWO_POINTER_MAX_N: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Gamma {
    Exact,
    Approx(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EnergyMethod {
    Brute,
    TwoPointer,
    SumMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MethodChoice {
    #[default]
    Auto,
    Brute,
    TwoPointer,
}

impl std::str::FromStr for MethodChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(MethodChoice::Auto),
            "brute" => Ok(MethodChoice::Brute),
            "twopointer" => Ok(MethodChoice::TwoPointer),
            other => Err(Error::param(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyResult {
    pub n: usize,
    pub gamma: Gamma,
    pub value: u64,
    pub method: EnergyMethod,
}

/// Energy of a multiset: `sum_s r(s)^2` with `r` the ordered pair-sum
/// multiplicity.
fn energy_of_multiset(values: &[i64]) -> u64 {
    let mut sums: Vec<i64> = Vec::with_capacity(values.len() * values.len());
    for &a in values {
        for &b in values {
            sums.push(a + b);
        }
    }
    sums.sort_unstable();
    let mut total = 0u64;
    let mut i = 0;
    while i < sums.len() {
        let j = i + sums[i..].partition_point(|&s| s == sums[i]);
        let r = (j - i) as u64;
        total += r * r;
        i = j;
    }
    total
}

/// `E(A) = |{(a1, a2, a3, a4) in A^4 : a1 + a2 = a3 + a4}|`. Repeated input
/// elements are collapsed, `A` is treated as a set.
pub fn additive_energy_int(set: &[i64]) -> u64 {
    let mut a = set.to_vec();
    a.sort_unstable();
    a.dedup();
    energy_of_multiset(&a)
}

fn integer_prefix(values: &[f64]) -> Result<Vec<i64>> {
    const LIMIT: f64 = (1u64 << 53) as f64;
    values
        .iter()
        .enumerate()
        .map(|(index, &value)| {
            if value.fract() != 0.0 || value.abs() >= LIMIT {
                Err(Error::NonInteger { index, value })
            } else {
                Ok(value as i64)
            }
        })
        .collect()
}

/// Exact truncated energy `E_N` of an integer-valued window.
pub fn truncated_energy(window: &SequenceWindow, n: usize) -> Result<u64> {
    let ints = integer_prefix(window.prefix(n)?)?;
    Ok(energy_of_multiset(&ints))
}

/// The quantity compared against `gamma`. Written as a difference of two
/// pair sums so every method evaluates the identical expression.
#[inline]
fn quad_gap(a: f64, b: f64, c: f64, d: f64) -> f64 {
    ((a + c) - (b + d)).abs()
}

/// Quartic reference count of `|x_n1 - x_n2 + x_n3 - x_n4| < gamma`.
pub fn approx_energy_brute(values: &[f64], gamma: f64) -> u64 {
    let mut count = 0u64;
    for &a in values {
        for &b in values {
            for &c in values {
                for &d in values {
                    count += u64::from(quad_gap(a, b, c, d) < gamma);
                }
            }
        }
    }
    count
}

/// Sorted pair sums scanned with a sliding window.
pub fn approx_energy_two_pointer(values: &[f64], gamma: f64) -> Result<u64> {
    let n = values.len();
    if n > TWO_POINTER_MAX_N {
        return Err(Error::MemoryCap {
            what: "pair-sum table",
            bytes: (n * n * 8) as u64,
            cap: (TWO_POINTER_MAX_N * TWO_POINTER_MAX_N * 8) as u64,
        });
    }
    let mut sums: Vec<f64> = Vec::with_capacity(n * n);
    for &a in values {
        for &c in values {
            sums.push(a + c);
        }
    }
    sums.par_sort_unstable_by(f64::total_cmp);
    let len = sums.len();
    const CHUNK: usize = 1 << 14;
    let later: u64 = (0..len.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut local = 0u64;
            for p in chunk * CHUNK..((chunk + 1) * CHUNK).min(len) {
                let sp = sums[p];
                let rest = &sums[p + 1..];
                local += rest.partition_point(|&sq| (sq - sp).abs() < gamma) as u64;
            }
            local
        })
        .sum();
    Ok(len as u64 + 2 * later)
}

/// `E*_{N, gamma}`: quadruples of the first `n` terms with
/// `|x_n1 - x_n2 + x_n3 - x_n4| < gamma` (strict).
pub fn approx_energy(
    window: &SequenceWindow,
    n: usize,
    gamma: f64,
    method: MethodChoice,
) -> Result<EnergyResult> {
    approx_energy_values(window.prefix(n)?, gamma, method)
}

pub fn approx_energy_values(
    values: &[f64],
    gamma: f64,
    method: MethodChoice,
) -> Result<EnergyResult> {
    if values.is_empty() {
        return Err(Error::param("N must be at least 1"));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::param("gamma must be positive"));
    }
    let method = match method {
        MethodChoice::Auto if values.len() <= 12 => EnergyMethod::Brute,
        MethodChoice::Brute => EnergyMethod::Brute,
        _ => EnergyMethod::TwoPointer,
    };
    let value = match method {
        EnergyMethod::Brute => approx_energy_brute(values, gamma),
        _ => approx_energy_two_pointer(values, gamma)?,
    };
    Ok(EnergyResult {
        n: values.len(),
        gamma: Gamma::Approx(gamma),
        value,
        method,
    })
}

/// Counts at `gamma (1 - 1e-9)`, `gamma` and `gamma (1 + 1e-9)`; a spread
/// flags quadruples sitting on the boundary.
pub fn approx_energy_slack(values: &[f64], gamma: f64) -> Result<[u64; 3]> {
    let at = |g: f64| approx_energy_values(values, g, MethodChoice::Auto).map(|r| r.value);
    Ok([
        at(gamma * (1.0 - 1e-9))?,
        at(gamma)?,
        at(gamma * (1.0 + 1e-9))?,
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum GammaRule {
    Const(f64),
    OneOverN,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub ns: Vec<usize>,
    pub values: Vec<u64>,
    /// `log2` of each value.
    pub log_values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

/// Least-squares slope of `log2 value` against `log2 N`.
pub fn fit_exponent(ns: &[usize], values: &[u64]) -> Result<ExponentFit> {
    fit_exponent_real(
        ns,
        &values.iter().map(|&v| v as f64).collect::<Vec<_>>(),
        values.to_vec(),
    )
}

pub(crate) fn fit_exponent_real(
    ns: &[usize],
    values: &[f64],
    raw: Vec<u64>,
) -> Result<ExponentFit> {
    if ns.len() < 3 || ns.len() != values.len() {
        return Err(Error::param("need at least three data points"));
    }
    if values.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::param("values must be positive to take logarithms"));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| (n as f64).log2()).collect();
    let log_values: Vec<f64> = values.iter().map(|v| v.log2()).collect();
    let fit = fit_line(&xs, &log_values);
    Ok(ExponentFit {
        ns: ns.to_vec(),
        values: raw,
        log_values,
        slope: fit.slope,
        intercept: fit.intercept,
        residual: fit.residual,
    })
}

/// Fits the growth exponent of `E*_{N, gamma}` over a ladder of `N`.
pub fn energy_exponent(spec: &SequenceSpec, ns: &[usize], rule: GammaRule) -> Result<ExponentFit> {
    if ns.len() < 3 {
        return Err(Error::param("need at least three data points"));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("N ladder must be strictly ascending"));
    }
    let last = *ns.last().unwrap();
    if last > TWO_POINTER_MAX_N {
        return Err(Error::MemoryCap {
            what: "pair-sum table",
            bytes: (last * last * 8) as u64,
            cap: (TWO_POINTER_MAX_N * TWO_POINTER_MAX_N * 8) as u64,
        });
    }
    let window = generate(spec, last)?;
    let values = ns
        .iter()
        .map(|&n| {
            let gamma = match rule {
                GammaRule::Const(g) => g,
                GammaRule::OneOverN => 1.0 / n as f64,
            };
            approx_energy(&window, n, gamma, MethodChoice::TwoPointer).map(|r| r.value)
        })
        .collect::<Result<Vec<_>>>()?;
    fit_exponent(ns, &values)
}

/// `(E(union)^{1/4}, sum_j E(A_j)^{1/4})` for pairwise disjoint sets.
pub fn union_energy_check(sets: &[Vec<i64>]) -> Result<(f64, f64)> {
    if sets.is_empty() || sets.iter().any(|s| s.is_empty()) {
        return Err(Error::param("sets must be nonempty"));
    }
    let mut seen = HashSet::new();
    let mut union = Vec::new();
    for set in sets {
        let mut own: Vec<i64> = set.clone();
        own.sort_unstable();
        own.dedup();
        for &a in &own {
            if !seen.insert(a) {
                return Err(Error::NotDisjoint(a));
            }
            union.push(a);
        }
    }
    let lhs = (additive_energy_int(&union) as f64).powf(0.25);
    let parts: Vec<f64> = sets
        .iter()
        .map(|s| (additive_energy_int(s) as f64).powf(0.25))
        .collect();
    Ok((lhs, pairwise_sum(&parts)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discretized {
    pub k: u64,
    pub values: Vec<i64>,
}

/// `K = floor(N^k_exp)` and `X_n = floor(K x_n)`.
pub fn discretize_convex(window: &SequenceWindow, k_exp: f64) -> Result<Discretized> {
    let k = (window.len() as f64).powf(k_exp).floor();
    if !(k >= 1.0) {
        return Err(Error::param(format!(
            "K = floor(N^{k_exp}) = {k} is below 1"
        )));
    }
    discretize_with_k(window, k as u64)
}

pub fn discretize_with_k(window: &SequenceWindow, k: u64) -> Result<Discretized> {
    if k == 0 {
        return Err(Error::param("K must be at least 1"));
    }
    if !is_convex(window.values())? {
        return Err(Error::param("window is not convex"));
    }
    let kf = k as f64;
    let values: Vec<i64> = window
        .values()
        .iter()
        .map(|&x| (kf * x).floor() as i64)
        .collect();
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by_key(|&i| (values[i], i));
    if let Some(w) = order.windows(2).find(|w| values[w[0]] == values[w[1]]) {
        return Err(Error::Collision {
            first: w[0] + 1,
            second: w[1] + 1,
            value: values[w[0]],
        });
    }
    Ok(Discretized { k, values })
}

/// Class `r` holds `X_j` (1-based `j`) with `j = r mod K`, in index order.
pub fn residue_partition(values: &[i64], k: usize) -> Result<Vec<Vec<i64>>> {
    if k == 0 {
        return Err(Error::param("K must be at least 1"));
    }
    let mut classes = vec![Vec::with_capacity(values.len() / k + 1); k];
    for (i, &v) in values.iter().enumerate() {
        classes[(i + 1) % k].push(v);
    }
    Ok(classes)
}

/// Strictly increasing consecutive gaps.
pub fn is_convex(values: &[f64]) -> Result<bool> {
    if values.len() < 3 {
        return Err(Error::param("convexity needs at least three values"));
    }
    Ok(values.windows(3).all(|w| w[2] - w[1] > w[1] - w[0]))
}

pub fn is_convex_int(values: &[i64]) -> Result<bool> {
    if values.len() < 3 {
        return Err(Error::param("convexity needs at least three values"));
    }
    Ok(values
        .windows(3)
        .all(|w| (w[2] as i128 - w[1] as i128) > (w[1] as i128 - w[0] as i128)))
}

/// `sum_{n1 < n2 <= N, x_n2 - x_n1 >= 1} (x_n2 - x_n1)^{-1/2}`.
pub fn growth_sum(window: &SequenceWindow, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::param("growth sum needs N >= 2"));
    }
    window.require_ascending()?;
    let x = window.prefix(n)?;
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let terms: Vec<f64> = x[i + 1..]
                .iter()
                .map(|&xj| xj - x[i])
                .filter(|&d| d >= 1.0)
                .map(|d| 1.0 / d.sqrt())
                .collect();
            pairwise_sum(&terms)
        })
        .collect();
    Ok(pairwise_sum(&rows))
}

/// Histogram `r(k)` of the differences `x_n2 - x_n1 >= 1` (`n1 < n2`) into
/// unit bins `[k, k + 1)`.
pub fn binned_r(window: &SequenceWindow, n: usize) -> Result<BTreeMap<u64, u64>> {
    let x = window.prefix(n)?;
    let mut bins: HashMap<u64, u64> = HashMap::new();
    for i in 0..x.len() {
        for &xj in &x[i + 1..] {
            let d = xj - x[i];
            if d >= 1.0 {
                *bins.entry(d.floor() as u64).or_default() += 1;
            }
        }
    }
    Ok(bins.into_iter().collect())
}

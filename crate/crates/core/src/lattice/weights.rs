//! Difference sets with multiplicity weights, their norms and dyadic blocks.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sequences::SequenceWindow;

/// Largest total weight accepted, so squared norms fit comfortably in `u128`.
pub const MAX_TOTAL_WEIGHT: u64 = 1 << 40;

/// Upper bound on the number of pairwise differences materialized at once.
pub const MAX_DIFFERENCES: usize = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightedPoint {
    pub x: f64,
    pub weight: u64,
}

impl WeightedPoint {
    pub fn new(x: f64, weight: u64) -> Self {
        WeightedPoint { x, weight }
    }
}

/// Positive reals in strictly ascending order with weights `>= 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DifferenceWeights {
    entries: Vec<WeightedPoint>,
    source_n: usize,
}

impl DifferenceWeights {
    /// All positive differences `x_n2 - x_n1` with `n1 < n2 <= n`.
    /// Differences within `coalesce_eps` of the first member of a run are
    /// merged into it; `0` merges only exact ties.
    pub fn differences(window: &SequenceWindow, n: usize, coalesce_eps: f64) -> Result<Self> {
        if !(coalesce_eps >= 0.0 && coalesce_eps.is_finite()) {
            return Err(Error::param("coalesce epsilon must be a nonnegative real"));
        }
        let x = window.prefix(n)?;
        if let Some(i) = x.windows(2).position(|w| w[0] > w[1]) {
            return Err(Error::NotAscending { index: i + 1 });
        }
        let pairs = n * n.saturating_sub(1) / 2;
        if pairs > MAX_DIFFERENCES {
            return Err(Error::MemoryCap {
                what: "difference table",
                bytes: (pairs * std::mem::size_of::<f64>()) as u64,
                cap: (MAX_DIFFERENCES * std::mem::size_of::<f64>()) as u64,
            });
        }
        let mut diffs = Vec::with_capacity(pairs);
        for i in 0..n {
            for j in i + 1..n {
                let d = x[j] - x[i];
                if !(d > 0.0) {
                    return Err(Error::NonPositiveDifference {
                        first: i + 1,
                        second: j + 1,
                    });
                }
                diffs.push(d);
            }
        }
        diffs.sort_unstable_by(f64::total_cmp);
        let mut entries: Vec<WeightedPoint> = Vec::new();
        for d in diffs {
            match entries.last_mut() {
                Some(last) if d - last.x <= coalesce_eps => last.weight += 1,
                _ => entries.push(WeightedPoint::new(d, 1)),
            }
        }
        Ok(DifferenceWeights {
            entries,
            source_n: n,
        })
    }

    /// Builds weights from arbitrary points; equal `x` values are merged.
    pub fn from_entries(mut points: Vec<WeightedPoint>) -> Result<Self> {
        for p in &points {
            if !(p.x.is_finite() && p.x > 0.0) {
                return Err(Error::param(format!(
                    "point {} is not a positive real",
                    p.x
                )));
            }
            if p.weight == 0 {
                return Err(Error::param(format!("point {} has zero weight", p.x)));
            }
        }
        let total = points.iter().try_fold(0u64, |acc, p| {
            acc.checked_add(p.weight).filter(|&t| t <= MAX_TOTAL_WEIGHT)
        });
        if total.is_none() {
            return Err(Error::param(format!(
                "total weight exceeds {MAX_TOTAL_WEIGHT}"
            )));
        }
        points.sort_by(|a, b| a.x.total_cmp(&b.x));
        let mut entries: Vec<WeightedPoint> = Vec::with_capacity(points.len());
        for p in points {
            match entries.last_mut() {
                Some(last) if last.x == p.x => last.weight += p.weight,
                _ => entries.push(p),
            }
        }
        Ok(DifferenceWeights {
            entries,
            source_n: 0,
        })
    }

    pub fn entries(&self) -> &[WeightedPoint] {
        &self.entries
    }

    /// Window length the weights were built from, `0` for hand-built sets.
    pub fn source_n(&self) -> usize {
        self.source_n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn l1_norm(&self) -> u64 {
        l1_norm(&self.entries)
    }

    pub fn l2_norm_sq(&self, scale: f64) -> u128 {
        l2_norm_sq(&self.entries, scale)
    }

    pub fn dyadic_blocks(&self) -> DyadicSplit<'_> {
        dyadic_blocks(&self.entries)
    }

    /// Entries with `x >= 1`.
    pub fn at_least_one(&self) -> &[WeightedPoint] {
        let start = self.entries.partition_point(|p| p.x < 1.0);
        &self.entries[start..]
    }
}

pub fn l1_norm(entries: &[WeightedPoint]) -> u64 {
    entries.iter().map(|p| p.weight).sum()
}

/// `sum_{|x1 - x2| <= 1/scale} alpha(x1) alpha(x2)` over ordered pairs of a
/// sorted slice, diagonal included.
pub fn l2_norm_sq(entries: &[WeightedPoint], scale: f64) -> u128 {
    let width = 1.0 / scale;
    let mut diagonal = 0u128;
    let mut off = 0u128;
    for (i, p) in entries.iter().enumerate() {
        let w = u128::from(p.weight);
        diagonal += w * w;
        let rest = &entries[i + 1..];
        let end = rest.partition_point(|q| q.x - p.x <= width);
        let near: u128 = rest[..end].iter().map(|q| u128::from(q.weight)).sum();
        off += w * near;
    }
    diagonal + 2 * off
}

/// Entries in `[2^k, 2^{k+1})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadicBlock<'a> {
    pub k: u32,
    pub entries: &'a [WeightedPoint],
}

impl DyadicBlock<'_> {
    pub fn l1_norm(&self) -> u64 {
        l1_norm(self.entries)
    }

    pub fn l2_norm_sq(&self, scale: f64) -> u128 {
        l2_norm_sq(self.entries, scale)
    }

    pub fn lower(&self) -> f64 {
        dyadic_power(self.k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DyadicSplit<'a> {
    pub below_one: &'a [WeightedPoint],
    pub blocks: Vec<DyadicBlock<'a>>,
}

fn dyadic_power(k: u32) -> f64 {
    2f64.powi(k as i32)
}

/// Exponent `k` with `2^k <= x < 2^{k+1}`, for `x >= 1`.
pub fn dyadic_index(x: f64) -> u32 {
    let mut k = x.log2().floor().max(0.0) as u32;
    while k > 0 && dyadic_power(k) > x {
        k -= 1;
    }
    while dyadic_power(k + 1) <= x {
        k += 1;
    }
    k
}

/// Splits sorted entries into the part below one and the nonempty dyadic
/// blocks above it, in increasing `k`.
pub fn dyadic_blocks(entries: &[WeightedPoint]) -> DyadicSplit<'_> {
    let start = entries.partition_point(|p| p.x < 1.0);
    let mut blocks = Vec::new();
    let mut i = start;
    while i < entries.len() {
        let k = dyadic_index(entries[i].x);
        let upper = dyadic_power(k + 1);
        let len = entries[i..].partition_point(|p| p.x < upper);
        blocks.push(DyadicBlock {
            k,
            entries: &entries[i..i + len],
        });
        i += len;
    }
    DyadicSplit {
        below_one: &entries[..start],
        blocks,
    }
}

/// Parses a weights file: one `x,alpha` or `x alpha` pair per line, a bare
/// `x` meaning weight 1, blank lines and `#` comments ignored.
pub fn parse_weights(text: &str) -> Result<DifferenceWeights> {
    let mut points = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| Error::Parse {
            line: lineno + 1,
            reason,
        };
        let mut fields = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty());
        let x_field = fields.next().ok_or_else(|| err("missing value".into()))?;
        let x: f64 = x_field
            .parse()
            .map_err(|_| err(format!("`{x_field}` is not a real number")))?;
        let weight: u64 = match fields.next() {
            Some(w) => w
                .parse()
                .map_err(|_| err(format!("`{w}` is not a positive integer weight")))?,
            None => 1,
        };
        if fields.next().is_some() {
            return Err(err("expected at most two fields".into()));
        }
        if !(x.is_finite() && x > 0.0) {
            return Err(err(format!("value {x_field} must be a positive real")));
        }
        if weight == 0 {
            return Err(err("weight must be at least 1".into()));
        }
        points.push(WeightedPoint::new(x, weight));
    }
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    DifferenceWeights::from_entries(points)
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<DifferenceWeights> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_weights(&text)
}

//! Exponential polynomials `sum_j c_j exp(i w_j t)` and their mean squares.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::WeightedPoint;
use crate::numeric::{pairwise_sum, CompensatedComplex};

/// Largest number of Simpson intervals used by [`mean_value_integral`].
pub const MAX_GRID: usize = 1 << 26;
/// Simpson steps per unit of `1 / bandwidth`.
const STEPS_PER_RADIAN: f64 = 16.0;
/// Points evaluated from one directly computed phase before reseeding.
const ROTATION_CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum QuadratureMethod {
    NyquistExact,
    Refined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentResult {
    pub value: f64,
    pub grid_size: usize,
    pub error_estimate: f64,
    pub method: QuadratureMethod,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ExpPoly {
    freqs: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl ExpPoly {
    pub fn new(terms: impl IntoIterator<Item = (f64, Complex64)>) -> Result<Self> {
        let (freqs, coeffs): (Vec<f64>, Vec<Complex64>) = terms.into_iter().unzip();
        if freqs.iter().any(|w| !w.is_finite())
            || coeffs
                .iter()
                .any(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::param("frequencies and coefficients must be finite"));
        }
        Ok(ExpPoly { freqs, coeffs })
    }

    /// `sum_x a(x) x^{-it}`.
    pub fn dirichlet(points: impl IntoIterator<Item = (f64, Complex64)>) -> Result<Self> {
        let mut terms = Vec::new();
        for (x, a) in points {
            if !(x.is_finite() && x > 0.0) {
                return Err(Error::param(format!(
                    "Dirichlet point {x} must be positive"
                )));
            }
            terms.push((-x.ln(), a));
        }
        ExpPoly::new(terms)
    }

    /// `sum_x alpha(x) x^{-it} sum_{N < n <= 2N} beta(n) n^{-it}`, with
    /// `beta` indexed from `n = N + 1` and defaulting to ones.
    pub fn block_times_range(
        block: &[WeightedPoint],
        n: u64,
        beta: Option<&[Complex64]>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("N must be at least 1"));
        }
        if let Some(b) = beta {
            if b.len() as u64 != n {
                return Err(Error::param(format!(
                    "beta has length {}, expected {n}",
                    b.len()
                )));
            }
        }
        let mut terms = Vec::with_capacity(block.len() * n as usize);
        for p in block {
            if !(p.x.is_finite() && p.x > 0.0) {
                return Err(Error::param(format!(
                    "Dirichlet point {} must be positive",
                    p.x
                )));
            }
            for (i, m) in (n + 1..=2 * n).enumerate() {
                let b = beta.map_or(Complex64::new(1.0, 0.0), |b| b[i]);
                terms.push((-(p.x.ln() + (m as f64).ln()), b * p.weight as f64));
            }
        }
        ExpPoly::new(terms)
    }

    /// `sum_m a_m e(x_m t)` with `e(u) = exp(2 pi i u)`.
    pub fn additive(points: impl IntoIterator<Item = (f64, Complex64)>) -> Result<Self> {
        ExpPoly::new(points.into_iter().map(|(x, a)| (TAU * x, a)))
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.freqs.iter().copied().zip(self.coeffs.iter().copied())
    }

    /// Spread `max w - min w` of the frequencies.
    pub fn bandwidth(&self) -> f64 {
        let lo = self.freqs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.freqs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if self.freqs.is_empty() {
            0.0
        } else {
            hi - lo
        }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let mut acc = CompensatedComplex::default();
        for (w, c) in self.terms() {
            acc.add(c * Complex64::cis(w * t));
        }
        acc.value()
    }

    /// Values at `start + i * step` for `i < count`. Phases are computed
    /// directly every [`ROTATION_CHUNK`] points and advanced by rotation in
    /// between; the chunking is fixed so results do not depend on threads.
    fn sample(&self, start: f64, step: f64, count: usize) -> Vec<Complex64> {
        let rotations: Vec<Complex64> = self
            .freqs
            .iter()
            .map(|&w| Complex64::cis(w * step))
            .collect();
        let chunks: Vec<Vec<Complex64>> = (0..count.div_ceil(ROTATION_CHUNK))
            .into_par_iter()
            .map(|chunk| {
                let first = chunk * ROTATION_CHUNK;
                let len = ROTATION_CHUNK.min(count - first);
                let t0 = start + first as f64 * step;
                let mut phase: Vec<Complex64> = self
                    .freqs
                    .iter()
                    .zip(&self.coeffs)
                    .map(|(&w, &c)| c * Complex64::cis(w * t0))
                    .collect();
                let mut out = Vec::with_capacity(len);
                for _ in 0..len {
                    let mut acc = CompensatedComplex::default();
                    for (p, r) in phase.iter_mut().zip(&rotations) {
                        acc.add(*p);
                        *p *= r;
                    }
                    out.push(acc.value());
                }
                out
            })
            .collect();
        chunks.into_iter().flatten().collect()
    }
}

/// Composite Simpson on `n` (even) intervals of width `h` over samples
/// taken every `stride` points.
fn simpson(values: &[f64], stride: usize, h: f64) -> f64 {
    let picked: Vec<f64> = values.iter().step_by(stride).copied().collect();
    let last = picked.len() - 1;
    let weighted: Vec<f64> = picked
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = if i == 0 || i == last {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * v
        })
        .collect();
    pairwise_sum(&weighted) * h / 3.0
}

/// `(1/T) int_{-T}^{T} |P(t)|^2 dt` by composite Simpson with at least
/// sixteen steps per radian of bandwidth; the error estimate compares with
/// the half-resolution rule.
pub fn mean_value_integral(poly: &ExpPoly, t_max: f64) -> Result<MomentResult> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::param("T must be a positive real"));
    }
    let bandwidth = poly.bandwidth();
    let wanted = (2.0 * t_max * bandwidth * STEPS_PER_RADIAN).ceil().max(4.0);
    if wanted > MAX_GRID as f64 {
        return Err(Error::MemoryCap {
            what: "quadrature grid",
            bytes: (wanted * 16.0) as u64,
            cap: (MAX_GRID * 16) as u64,
        });
    }
    let intervals = (wanted as usize).div_ceil(4) * 4;
    let h = 2.0 * t_max / intervals as f64;
    let values: Vec<f64> = poly
        .sample(-t_max, h, intervals + 1)
        .iter()
        .map(|z| z.norm_sqr())
        .collect();
    let fine = simpson(&values, 1, h) / t_max;
    let coarse = simpson(&values, 2, 2.0 * h) / t_max;
    Ok(MomentResult {
        value: fine,
        grid_size: intervals + 1,
        error_estimate: (fine - coarse).abs() / 15.0,
        method: QuadratureMethod::Refined,
    })
}

/// The same mean square in closed form, `sum_{j,l} c_j conj(c_l) 2 sinc`.
/// Quadratic in the number of terms; used to validate the quadrature.
pub fn mean_value_closed_form(poly: &ExpPoly, t_max: f64) -> f64 {
    let mut acc = CompensatedComplex::default();
    for (wj, cj) in poly.terms() {
        for (wl, cl) in poly.terms() {
            let d = wj - wl;
            let kernel = if d == 0.0 {
                2.0
            } else {
                2.0 * (d * t_max).sin() / (d * t_max)
            };
            acc.add(cj * cl.conj() * kernel);
        }
    }
    acc.value().re
}

/// `sum_{2T |x_i - x_j| <= 1} |a_i a_j|`, the count bracketing the mean
/// square of an additive exponential sum.
pub fn near_pair_mass(points: &[(f64, Complex64)], t_max: f64) -> f64 {
    let mut sorted: Vec<(f64, f64)> = points.iter().map(|&(x, a)| (x, a.norm())).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut terms = Vec::with_capacity(sorted.len());
    for (i, &(x, a)) in sorted.iter().enumerate() {
        let mut row = a * a;
        for &(y, b) in &sorted[i + 1..] {
            if 2.0 * t_max * (y - x) > 1.0 {
                break;
            }
            row += 2.0 * a * b;
        }
        terms.push(row);
    }
    pairwise_sum(&terms)
}

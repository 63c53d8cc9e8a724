//! Shared report types and the CSV/JSON number formatting used by every
//! output file.

use std::collections::BTreeMap;

use serde::Serialize;

/// Reals are written with 17 significant digits so they round-trip.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 1e15 {
        return format!("{x:.1}");
    }
    format!("{x:.16e}")
}

/// Existential parameter chosen when evaluating a right-hand side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Witness {
    /// Dyadic length `N`.
    Length(f64),
    /// Dyadic length `L`.
    Shortened(f64),
    /// Dilation `theta` in `{1, 2}`.
    Theta(u32),
}

/// One evaluated inequality instance `lhs <= C * rhs`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub witness: Option<Witness>,
}

impl RatioReport {
    pub fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        RatioReport {
            name: name.to_string(),
            params: BTreeMap::new(),
            lhs,
            rhs,
            ratio: lhs / rhs,
            witness: None,
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_witness(mut self, witness: Witness) -> Self {
        self.witness = Some(witness);
        self
    }

    /// `rhs > 0` and the ratio is finite.
    pub fn is_well_formed(&self) -> bool {
        self.rhs > 0.0 && self.ratio.is_finite()
    }
}

/// Reports gathered along a doubling ladder.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    /// Reports grouped by ladder step.
    pub steps: Vec<Vec<RatioReport>>,
    /// Largest ratio at each ladder step.
    pub step_max: Vec<f64>,
    pub max_ratio: f64,
    /// Largest growth factor of `step_max` between adjacent steps.
    pub drift_factor: f64,
}

impl SweepResult {
    pub fn from_steps(steps: Vec<Vec<RatioReport>>) -> Self {
        let step_max: Vec<f64> = steps
            .iter()
            .map(|s| s.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let max_ratio = step_max.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let drift_factor = step_max
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        SweepResult {
            steps,
            step_max,
            max_ratio,
            drift_factor,
        }
    }

    pub fn reports(&self) -> impl Iterator<Item = &RatioReport> {
        self.steps.iter().flatten()
    }
}

//! Sequence families, finite windows and the plain-text sequence format.
//!
//! A window is a truncation `(x_1, ..., x_N)` kept in natural index order.
//! Operations that need ascending order check [`SequenceWindow::is_ascending`]
//! instead of sorting silently; divisor-sum windows in particular are not
//! monotone.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::horner;

/// Generator description for a sequence family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SequenceSpec {
    /// `alpha * n^theta`.
    Power { alpha: f64, theta: f64 },
    /// Polynomial with coefficients from the highest degree down.
    Polynomial { coeffs: Vec<f64> },
    /// Convex sequence whose gaps grow by `c * n^gap_exponent`.
    ConvexSynthetic { c: f64, gap_exponent: f64 },
    /// `alpha * sigma_beta(n)` with `sigma_beta(n) = sum_{d | n} d^beta`.
    SigmaBeta { alpha: f64, beta: f64 },
    /// Values read from a sequence file.
    External { path: PathBuf },
}

/// Default growth exponent for [`SequenceSpec::ConvexSynthetic`].
pub const DEFAULT_CONVEX_GAP_EXPONENT: f64 = -0.25;

impl SequenceSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Error::InvalidSpec {
            spec: self.to_string(),
            reason: reason.into(),
        };
        match self {
            SequenceSpec::Power { alpha, theta } => {
                if !(theta.is_finite() && *theta > 0.0) {
                    return Err(bad("theta must be positive"));
                }
                if !alpha.is_finite() {
                    return Err(bad("alpha must be finite"));
                }
            }
            SequenceSpec::Polynomial { coeffs } => {
                if coeffs.len() < 3 {
                    return Err(bad("degree must be at least 2"));
                }
                if coeffs[0] == 0.0 {
                    return Err(bad("leading coefficient must be nonzero"));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(bad("coefficients must be finite"));
                }
            }
            SequenceSpec::ConvexSynthetic { c, gap_exponent } => {
                if !(c.is_finite() && *c > 0.0) {
                    return Err(bad("c must be positive"));
                }
                if !gap_exponent.is_finite() {
                    return Err(bad("gap exponent must be finite"));
                }
            }
            SequenceSpec::SigmaBeta { alpha, beta } => {
                if !(alpha.is_finite() && beta.is_finite()) {
                    return Err(bad("alpha and beta must be finite"));
                }
            }
            SequenceSpec::External { .. } => {}
        }
        Ok(())
    }
}

impl fmt::Display for SequenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceSpec::Power { alpha, theta } => write!(f, "power:alpha={alpha},theta={theta}"),
            SequenceSpec::Polynomial { coeffs } => {
                let parts: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly:{}", parts.join(","))
            }
            SequenceSpec::ConvexSynthetic { c, gap_exponent } => {
                write!(f, "convex:c={c},e={gap_exponent}")
            }
            SequenceSpec::SigmaBeta { alpha, beta } => write!(f, "sigma:alpha={alpha},beta={beta}"),
            SequenceSpec::External { path } => write!(f, "file:{}", path.display()),
        }
    }
}

/// Parses the generator mini-language: `power:alpha=1.414,theta=2`,
/// `poly:1,0,0`, `sigma:alpha=1,beta=1`, `convex:c=1,e=-0.25` and
/// `file:<path>`.
impl FromStr for SequenceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |reason: String| Error::InvalidSpec {
            spec: s.to_string(),
            reason,
        };
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| bad("expected `<kind>:<args>`".into()))?;
        let spec = match kind {
            "poly" => {
                let coeffs = rest
                    .split(',')
                    .map(|c| {
                        parse_real(c.trim()).ok_or_else(|| bad(format!("bad coefficient `{c}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                SequenceSpec::Polynomial { coeffs }
            }
            "file" => SequenceSpec::External {
                path: PathBuf::from(rest),
            },
            "power" | "sigma" | "convex" => {
                let mut pairs = Vec::new();
                for item in rest.split(',').filter(|p| !p.trim().is_empty()) {
                    let (key, value) = item
                        .split_once('=')
                        .ok_or_else(|| bad(format!("expected key=value, got `{item}`")))?;
                    let value = parse_real(value.trim())
                        .ok_or_else(|| bad(format!("bad number `{value}`")))?;
                    pairs.push((key.trim(), value));
                }
                let get = |name: &str, default: Option<f64>| -> Result<f64> {
                    pairs
                        .iter()
                        .find(|(k, _)| *k == name)
                        .map(|(_, v)| *v)
                        .or(default)
                        .ok_or_else(|| bad(format!("missing `{name}`")))
                };
                let allowed: &[&str] = match kind {
                    "power" => &["alpha", "theta"],
                    "sigma" => &["alpha", "beta"],
                    _ => &["c", "e"],
                };
                if let Some((k, _)) = pairs.iter().find(|(k, _)| !allowed.contains(k)) {
                    return Err(bad(format!("unknown key `{k}`")));
                }
                match kind {
                    "power" => SequenceSpec::Power {
                        alpha: get("alpha", Some(1.0))?,
                        theta: get("theta", None)?,
                    },
                    "sigma" => SequenceSpec::SigmaBeta {
                        alpha: get("alpha", Some(1.0))?,
                        beta: get("beta", None)?,
                    },
                    _ => SequenceSpec::ConvexSynthetic {
                        c: get("c", None)?,
                        gap_exponent: get("e", Some(DEFAULT_CONVEX_GAP_EXPONENT))?,
                    },
                }
            }
            other => return Err(bad(format!("unknown kind `{other}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_real(s: &str) -> Option<f64> {
    let v: f64 = s.parse().ok()?;
    v.is_finite().then_some(v)
}

/// A finite truncation of a sequence, in natural index order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequenceWindow {
    values: Vec<f64>,
    spec: SequenceSpec,
    sorted_ascending: bool,
}

impl SequenceWindow {
    pub fn new(values: Vec<f64>, spec: SequenceSpec) -> Self {
        let sorted_ascending = values.windows(2).all(|w| w[0] < w[1]);
        SequenceWindow {
            values,
            spec,
            sorted_ascending,
        }
    }

    /// Window over raw values with an `External` spec and no backing file.
    pub fn from_values(values: Vec<f64>) -> Self {
        Self::new(
            values,
            SequenceSpec::External {
                path: PathBuf::new(),
            },
        )
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.spec
    }

    /// Strictly increasing in index order.
    pub fn is_ascending(&self) -> bool {
        self.sorted_ascending
    }

    /// First `n` values.
    pub fn prefix(&self, n: usize) -> Result<&[f64]> {
        if n > self.values.len() {
            return Err(Error::param(format!(
                "requested {n} terms from a window of {}",
                self.values.len()
            )));
        }
        Ok(&self.values[..n])
    }

    /// Same values rearranged into ascending order.
    pub fn sorted(&self) -> SequenceWindow {
        let mut values = self.values.clone();
        values.sort_by(f64::total_cmp);
        SequenceWindow::new(values, self.spec.clone())
    }

    /// Number of values that repeat an earlier value.
    pub fn duplicate_count(&self) -> usize {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v.windows(2).filter(|w| w[0] == w[1]).count()
    }

    pub(crate) fn require_ascending(&self) -> Result<()> {
        match self.values.windows(2).position(|w| w[0] >= w[1]) {
            None => Ok(()),
            Some(i) => Err(Error::NotAscending { index: i + 1 }),
        }
    }
}

/// Materializes the first `n` terms of a sequence family.
pub fn generate(spec: &SequenceSpec, n: usize) -> Result<SequenceWindow> {
    if n == 0 {
        return Err(Error::param("N must be at least 1"));
    }
    spec.validate()?;
    let values = match spec {
        SequenceSpec::Power { alpha, theta } => {
            (1..=n).map(|i| alpha * (i as f64).powf(*theta)).collect()
        }
        SequenceSpec::Polynomial { coeffs } => (1..=n).map(|i| horner(coeffs, i as f64)).collect(),
        SequenceSpec::ConvexSynthetic { c, gap_exponent } => convex_synthetic(*c, *gap_exponent, n),
        SequenceSpec::SigmaBeta { alpha, beta } => sigma_sieve(*beta, n)
            .into_iter()
            .map(|s| alpha * s)
            .collect(),
        SequenceSpec::External { path } => {
            let loaded = load_sequence(path)?;
            let prefix = loaded.prefix(n)?.to_vec();
            return Ok(SequenceWindow::new(prefix, spec.clone()));
        }
    };
    Ok(SequenceWindow::new(values, spec.clone()))
}

/// `x_1 = c` and `x_{n+1} - x_n = g_n`, where `g_1 = c` and
/// `g_n = g_{n-1} + c n^e`, so `x_{n+1} - 2x_n + x_{n-1} = c n^e`.
fn convex_synthetic(c: f64, e: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut x = c;
    let mut gap = c;
    for i in 1..=n {
        out.push(x);
        x += gap;
        gap += c * ((i + 1) as f64).powf(e);
    }
    out
}

/// `sigma_beta(m)` for `m = 1..=n` by a divisor sieve; divisors are added in
/// increasing order.
pub fn sigma_sieve(beta: f64, n: usize) -> Vec<f64> {
    let mut sums = vec![0.0; n];
    let int_beta = (beta.fract() == 0.0 && beta.abs() <= i32::MAX as f64).then_some(beta as i32);
    for d in 1..=n {
        let term = match int_beta {
            Some(b) => (d as f64).powi(b),
            None => (d as f64).powf(beta),
        };
        for m in (d..=n).step_by(d) {
            sums[m - 1] += term;
        }
    }
    sums
}

/// True iff `x_{n+1} - x_n >= c n^{eta - 1}` for every `1 <= n < N`.
pub fn check_spacing(window: &SequenceWindow, c: f64, eta: f64) -> Result<bool> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::param("eta must lie in (0, 1]"));
    }
    window.require_ascending()?;
    Ok(window
        .values
        .windows(2)
        .enumerate()
        .all(|(i, w)| w[1] - w[0] >= c * ((i + 1) as f64).powf(eta - 1.0)))
}

/// Number of terms with `x_n` in the closed interval `[x, x + h]`.
pub fn short_interval_count(window: &SequenceWindow, x: f64, h: f64) -> usize {
    let mut sorted = window.values.clone();
    sorted.sort_by(f64::total_cmp);
    short_interval_count_sorted(&sorted, x, h)
}

pub fn short_interval_count_sorted(sorted: &[f64], x: f64, h: f64) -> usize {
    let hi = x + h;
    let start = sorted.partition_point(|&v| v < x);
    let end = sorted.partition_point(|&v| v <= hi);
    end.saturating_sub(start)
}

/// Parses the sequence file format: one decimal real per line, blank lines
/// and `#` comments ignored.
pub fn parse_sequence(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            reason: format!("not a real number: `{line}`"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                line: i + 1,
                reason: "value is not finite".into(),
            });
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(values)
}

pub fn load_sequence(path: impl AsRef<Path>) -> Result<SequenceWindow> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let values = parse_sequence(&text)?;
    Ok(SequenceWindow::new(
        values,
        SequenceSpec::External {
            path: path.to_path_buf(),
        },
    ))
}

/// Writes one value per line with 17 significant digits.
pub fn write_sequence(path: impl AsRef<Path>, window: &SequenceWindow) -> Result<()> {
    let path = path.as_ref();
    let mut out = format!("# {}\n", window.spec);
    for v in &window.values {
        out.push_str(&crate::report::fmt_real(*v));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::CompensatedSum;
    use proptest::prelude::*;

    #[test]
    fn sigma_one_first_terms() {
        let w = generate(
            &SequenceSpec::SigmaBeta {
                alpha: 1.0,
                beta: 1.0,
            },
            6,
        )
        .unwrap();
        assert_eq!(w.values(), &[1.0, 3.0, 4.0, 7.0, 6.0, 12.0]);
        assert!(!w.is_ascending());
    }

    #[test]
    fn polynomial_and_power() {
        let w = generate(
            &SequenceSpec::Polynomial {
                coeffs: vec![1.0, 0.0, 0.0],
            },
            4,
        )
        .unwrap();
        assert_eq!(w.values(), &[1.0, 4.0, 9.0, 16.0]);
        assert!(w.is_ascending());

        let r2 = std::f64::consts::SQRT_2;
        let w = generate(
            &SequenceSpec::Power {
                alpha: r2,
                theta: 2.0,
            },
            3,
        )
        .unwrap();
        assert_eq!(w.values(), &[r2, 4.0 * r2, 9.0 * r2]);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(generate(
            &SequenceSpec::Polynomial {
                coeffs: vec![1.0, 0.0]
            },
            3
        )
        .is_err());
        assert!(generate(
            &SequenceSpec::Polynomial {
                coeffs: vec![0.0, 1.0, 0.0]
            },
            3
        )
        .is_err());
        assert!(generate(
            &SequenceSpec::ConvexSynthetic {
                c: 0.0,
                gap_exponent: -0.25
            },
            3
        )
        .is_err());
        assert!(generate(
            &SequenceSpec::Power {
                alpha: 1.0,
                theta: 0.0
            },
            3
        )
        .is_err());
        assert!(generate(
            &SequenceSpec::Power {
                alpha: 1.0,
                theta: 1.0
            },
            0
        )
        .is_err());
    }

    #[test]
    fn spec_mini_language() {
        assert_eq!(
            "power:alpha=1.414,theta=2".parse::<SequenceSpec>().unwrap(),
            SequenceSpec::Power {
                alpha: 1.414,
                theta: 2.0
            }
        );
        assert_eq!(
            "poly:1,0,0".parse::<SequenceSpec>().unwrap(),
            SequenceSpec::Polynomial {
                coeffs: vec![1.0, 0.0, 0.0]
            }
        );
        assert_eq!(
            "sigma:alpha=1,beta=1".parse::<SequenceSpec>().unwrap(),
            SequenceSpec::SigmaBeta {
                alpha: 1.0,
                beta: 1.0
            }
        );
        assert_eq!(
            "convex:c=1,e=-0.25".parse::<SequenceSpec>().unwrap(),
            SequenceSpec::ConvexSynthetic {
                c: 1.0,
                gap_exponent: -0.25
            }
        );
        assert_eq!(
            "convex:c=2".parse::<SequenceSpec>().unwrap(),
            SequenceSpec::ConvexSynthetic {
                c: 2.0,
                gap_exponent: DEFAULT_CONVEX_GAP_EXPONENT
            }
        );
        for bad in [
            "",
            "power",
            "power:theta=x",
            "poly:1,0",
            "wat:1",
            "power:alpha=1,theta=2,z=3",
            "poly:nan,1,1",
        ] {
            assert!(bad.parse::<SequenceSpec>().is_err(), "{bad}");
        }
        let spec: SequenceSpec = "poly:2,0,1".parse().unwrap();
        assert_eq!(spec.to_string().parse::<SequenceSpec>().unwrap(), spec);
    }

    #[test]
    fn spacing() {
        let squares = SequenceWindow::from_values((1..=50).map(|n| (n * n) as f64).collect());
        assert!(check_spacing(&squares, 1.0, 1.0).unwrap());

        let logs = SequenceWindow::from_values((1..=50).map(|n| ((n + 1) as f64).ln()).collect());
        assert!(!check_spacing(&logs, 1.0, 1.0).unwrap());

        let w = generate(
            &SequenceSpec::Power {
                alpha: 1.0,
                theta: 0.75,
            },
            100,
        )
        .unwrap();
        assert!(check_spacing(&w, 0.5, 0.75).unwrap());

        let sigma = generate(
            &SequenceSpec::SigmaBeta {
                alpha: 1.0,
                beta: 1.0,
            },
            6,
        )
        .unwrap();
        assert!(matches!(
            check_spacing(&sigma, 1.0, 1.0),
            Err(Error::NotAscending { index: 4 })
        ));
    }

    #[test]
    fn short_intervals() {
        let squares = SequenceWindow::from_values((1..=40).map(|n| (n * n) as f64).collect());
        assert_eq!(short_interval_count(&squares, 0.0, 100.0), 10);
        assert_eq!(short_interval_count(&squares, 50.0, 0.5), 0);
        let sigma = generate(
            &SequenceSpec::SigmaBeta {
                alpha: 1.0,
                beta: 1.0,
            },
            6,
        )
        .unwrap();
        assert_eq!(short_interval_count(&sigma, 4.0, 3.0), 3);
    }

    #[test]
    fn sequence_file_parsing() {
        assert_eq!(
            parse_sequence("1.0\n2.5\n4.0").unwrap(),
            vec![1.0, 2.5, 4.0]
        );
        assert_eq!(
            parse_sequence("# header\n\n 3 \n#x\n-1e2\n").unwrap(),
            vec![3.0, -100.0]
        );
        assert!(matches!(
            parse_sequence("1.0\nabc\n3"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(parse_sequence(""), Err(Error::EmptyInput)));
        assert!(matches!(
            parse_sequence("# only comments\n"),
            Err(Error::EmptyInput)
        ));
        assert!(matches!(
            parse_sequence("inf"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn file_round_trip_and_duplicates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.txt");
        let w = generate(
            &SequenceSpec::Power {
                alpha: std::f64::consts::SQRT_2,
                theta: 1.5,
            },
            20,
        )
        .unwrap();
        write_sequence(&path, &w).unwrap();
        let back = load_sequence(&path).unwrap();
        assert_eq!(back.values(), w.values());
        assert!(back.is_ascending());

        std::fs::write(&path, "1\n2\n2\n3\n1\n").unwrap();
        let dup = load_sequence(&path).unwrap();
        assert_eq!(dup.duplicate_count(), 2);
        assert!(!dup.is_ascending());
        assert!(dup.sorted().values().windows(2).all(|p| p[0] <= p[1]));

        assert!(matches!(
            load_sequence(dir.path().join("missing")),
            Err(Error::Io { .. })
        ));
        let ext = generate(&SequenceSpec::External { path: path.clone() }, 3).unwrap();
        assert_eq!(ext.values(), &[1.0, 2.0, 2.0]);
        assert!(generate(&SequenceSpec::External { path }, 6).is_err());
    }

    fn sigma_trial_division(beta: f64, m: usize) -> f64 {
        let int_beta = (beta.fract() == 0.0).then_some(beta as i32);
        (1..=m)
            .filter(|d| m.is_multiple_of(*d))
            .map(|d| match int_beta {
                Some(b) => (d as f64).powi(b),
                None => (d as f64).powf(beta),
            })
            .sum()
    }

    #[test]
    fn sigma_sieve_matches_trial_division() {
        for beta in [0.0, 1.0, 2.0, 3.0] {
            let sieve = sigma_sieve(beta, 10_000);
            for (i, s) in sieve.iter().enumerate() {
                assert_eq!(
                    *s,
                    sigma_trial_division(beta, i + 1),
                    "beta={beta} n={}",
                    i + 1
                );
            }
        }
        for beta in [0.5, -0.5, 1.25] {
            let sieve = sigma_sieve(beta, 2_000);
            for (i, s) in sieve.iter().enumerate() {
                let t = sigma_trial_division(beta, i + 1);
                assert!(((s - t) / t).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn convex_synthetic_is_convex() {
        for e in [DEFAULT_CONVEX_GAP_EXPONENT, -1e-4, 0.0, 0.5] {
            let w = generate(
                &SequenceSpec::ConvexSynthetic {
                    c: 0.7,
                    gap_exponent: e,
                },
                300,
            )
            .unwrap();
            assert!(w.is_ascending());
            assert!(crate::energy::is_convex(w.values()).unwrap());
            let v = w.values();
            for n in 1..v.len() - 1 {
                let second = (v[n + 1] - v[n]) - (v[n] - v[n - 1]);
                let expect = 0.7 * ((n + 1) as f64).powf(e);
                assert!((second - expect).abs() <= 1e-9 * v[n + 1].abs().max(1.0));
            }
        }
    }

    proptest! {
        #[test]
        fn horner_matches_compensated_power_sum(
            coeffs in prop::collection::vec(-5.0f64..5.0, 3..6),
            n in 1usize..200,
        ) {
            prop_assume!(coeffs[0] != 0.0);
            let w = generate(&SequenceSpec::Polynomial { coeffs: coeffs.clone() }, n).unwrap();
            let deg = coeffs.len() - 1;
            for (i, &v) in w.values().iter().enumerate() {
                let x = (i + 1) as f64;
                let mut acc = CompensatedSum::default();
                let mut scale = 0.0;
                for (j, c) in coeffs.iter().enumerate() {
                    let term = c * x.powi((deg - j) as i32);
                    scale += term.abs();
                    acc.add(term);
                }
                prop_assert!((v - acc.value()).abs() <= 8.0 * f64::EPSILON * scale.max(1.0));
            }
        }
    }
}

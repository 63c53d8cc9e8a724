//! Pair-correlation counts of a scaled sequence modulo one.
//!
//! For a window of `N` terms the statistic is the number of ordered pairs
//! `n1 != n2` with `||alpha (x_n1 - x_n2)|| <= s / N`, divided by `N`. The
//! Poissonian limit is `2s`.
//!
//! Counting reduces `alpha x_n` modulo one once, sorts, and then finds for
//! every point the run of later points within the threshold by binary
//! search. The predicates are evaluated with exactly the same floating-point
//! expressions as the quadratic reference loop, so both paths agree
//! exactly, not just approximately.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sequences::SequenceWindow;

/// Which reading of `||x||` to use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Convention {
    /// Distance to the nearest integer (symmetric in the pair).
    #[default]
    NearestInteger,
    /// The fractional part `x - floor(x)` of the signed difference.
    LiteralFractionalPart,
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Convention::NearestInteger),
            "frac" => Ok(Convention::LiteralFractionalPart),
            other => Err(Error::param(format!(
                "unknown convention `{other}` (expected nearest|frac)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCorrConfig {
    pub s_grid: Vec<f64>,
    pub convention: Convention,
    /// Multiplier applied to every term before reduction modulo one.
    pub scale_alpha: f64,
}

impl PairCorrConfig {
    pub fn new(s_grid: Vec<f64>, convention: Convention, scale_alpha: f64) -> Result<Self> {
        if s_grid.is_empty() {
            return Err(Error::param("s grid is empty"));
        }
        if s_grid.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::param("every s must be positive"));
        }
        if s_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("s grid must be strictly ascending"));
        }
        if !scale_alpha.is_finite() {
            return Err(Error::param("scale must be finite"));
        }
        Ok(PairCorrConfig {
            s_grid,
            convention,
            scale_alpha,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub s: f64,
    pub count: u64,
    /// `count / N`.
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairCorrCurve {
    pub n: usize,
    pub rows: Vec<CurveRow>,
}

/// `alpha x mod 1` in `[0, 1)`; values within `1e-15` of one wrap to zero.
pub fn reduce_mod_one(x: f64, alpha: f64) -> f64 {
    let v = alpha * x;
    let y = v - v.floor();
    if y >= 1.0 - 1e-15 {
        0.0
    } else {
        y
    }
}

fn reduced_sorted(values: &[f64], alpha: f64) -> Vec<f64> {
    let mut y: Vec<f64> = values.iter().map(|&x| reduce_mod_one(x, alpha)).collect();
    y.sort_by(f64::total_cmp);
    y
}

fn check_threshold(n: usize, s: f64, convention: Convention) -> Result<f64> {
    if n < 2 {
        return Err(Error::param("pair correlation needs at least two terms"));
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::param("s must be positive"));
    }
    let t = s / n as f64;
    if convention == Convention::NearestInteger && t > 0.5 {
        return Err(Error::param(format!("threshold s/N = {t} exceeds 1/2")));
    }
    Ok(t)
}

/// Ordered pair count on reduced, sorted values.
fn count_sorted(y: &[f64], t: f64, convention: Convention) -> u64 {
    let n = y.len();
    let mut total = 0u64;
    for i in 0..n {
        let later = &y[i + 1..];
        let m = later.len();
        let yi = y[i];
        // later points within t going forward: a prefix of `later`
        let near = later.partition_point(|&yj| yj - yi <= t);
        // later points within t across the wrap: a suffix of `later`
        let wrap = m - later.partition_point(|&yj| 1.0 - (yj - yi) > t);
        match convention {
            Convention::NearestInteger => total += 2 * (near + wrap).min(m) as u64,
            Convention::LiteralFractionalPart => {
                let zeros = later.partition_point(|&yj| yj - yi <= 0.0);
                total += (near + zeros + wrap.min(m - zeros)) as u64;
            }
        }
    }
    total
}

/// `(count, count / N)` for a single `s`. The `s_grid` of the config is
/// ignored.
pub fn pair_correlation(
    window: &SequenceWindow,
    s: f64,
    config: &PairCorrConfig,
) -> Result<(u64, f64)> {
    pair_correlation_values(window.values(), s, config.convention, config.scale_alpha)
}

pub fn pair_correlation_values(
    values: &[f64],
    s: f64,
    convention: Convention,
    alpha: f64,
) -> Result<(u64, f64)> {
    let t = check_threshold(values.len(), s, convention)?;
    let y = reduced_sorted(values, alpha);
    let count = count_sorted(&y, t, convention);
    Ok((count, count as f64 / values.len() as f64))
}

/// Quadratic reference count over all ordered pairs.
pub fn pair_correlation_brute(
    values: &[f64],
    s: f64,
    convention: Convention,
    alpha: f64,
) -> Result<(u64, f64)> {
    let t = check_threshold(values.len(), s, convention)?;
    let y: Vec<f64> = values.iter().map(|&x| reduce_mod_one(x, alpha)).collect();
    let mut count = 0u64;
    for (a, &ya) in y.iter().enumerate() {
        for (b, &yb) in y.iter().enumerate() {
            if a == b {
                continue;
            }
            let hit = match convention {
                Convention::NearestInteger => {
                    let d = (ya - yb).abs();
                    d.min(1.0 - d) <= t
                }
                Convention::LiteralFractionalPart => {
                    let d = ya - yb;
                    let frac = if d < 0.0 { d + 1.0 } else { d };
                    frac <= t
                }
            };
            count += u64::from(hit);
        }
    }
    Ok((count, count as f64 / values.len() as f64))
}

/// One row per grid point, sharing a single reduction and sort.
pub fn pair_correlation_curve(
    window: &SequenceWindow,
    config: &PairCorrConfig,
) -> Result<PairCorrCurve> {
    let values = window.values();
    let thresholds = config
        .s_grid
        .iter()
        .map(|&s| check_threshold(values.len(), s, config.convention))
        .collect::<Result<Vec<_>>>()?;
    let y = reduced_sorted(values, config.scale_alpha);
    let n = values.len();
    let rows = config
        .s_grid
        .par_iter()
        .zip(thresholds.par_iter())
        .map(|(&s, &t)| {
            let count = count_sorted(&y, t, config.convention);
            CurveRow {
                s,
                count,
                r: count as f64 / n as f64,
            }
        })
        .collect();
    Ok(PairCorrCurve { n, rows })
}

/// `max |R / (2s) - 1|` over the rows.
pub fn ppc_deviation(curve: &PairCorrCurve) -> Result<f64> {
    if curve.rows.is_empty() {
        return Err(Error::param("empty curve"));
    }
    Ok(curve
        .rows
        .iter()
        .map(|row| (row.r / (2.0 * row.s) - 1.0).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const NEAREST: Convention = Convention::NearestInteger;
    const FRAC: Convention = Convention::LiteralFractionalPart;

    #[test]
    fn two_points_at_half() {
        assert_eq!(
            pair_correlation_values(&[0.0, 0.5], 1.0, NEAREST, 1.0).unwrap(),
            (2, 1.0)
        );
        assert_eq!(
            pair_correlation_brute(&[0.0, 0.5], 1.0, NEAREST, 1.0).unwrap(),
            (2, 1.0)
        );
    }

    #[test]
    fn three_points() {
        // threshold 0.3: pairs {0,0.3} and {0.3,0.5} hit, {0,0.5} does not
        let (count, r) = pair_correlation_values(&[0.0, 0.3, 0.5], 0.9, NEAREST, 1.0).unwrap();
        assert_eq!(count, 4);
        assert!((r - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn literal_convention_is_asymmetric() {
        // frac(0.1 - 0.9) = 0.2, frac(0.9 - 0.1) = 0.8
        let v = [0.1, 0.9];
        assert_eq!(pair_correlation_values(&v, 0.5, FRAC, 1.0).unwrap().0, 1);
        assert_eq!(pair_correlation_brute(&v, 0.5, FRAC, 1.0).unwrap().0, 1);
        assert_eq!(pair_correlation_values(&v, 0.5, NEAREST, 1.0).unwrap().0, 2);
    }

    #[test]
    fn threshold_errors() {
        assert!(pair_correlation_values(&[0.0, 0.1], 1.5, NEAREST, 1.0).is_err());
        assert!(pair_correlation_values(&[0.0, 0.1], 1.5, FRAC, 1.0).is_ok());
        assert!(pair_correlation_values(&[0.0], 0.1, NEAREST, 1.0).is_err());
        assert!(pair_correlation_values(&[0.0, 0.1], 0.0, NEAREST, 1.0).is_err());
        assert!(PairCorrConfig::new(vec![1.0, 0.5], NEAREST, 1.0).is_err());
        assert!(PairCorrConfig::new(vec![], NEAREST, 1.0).is_err());
        assert!(PairCorrConfig::new(vec![-1.0], NEAREST, 1.0).is_err());
    }

    #[test]
    fn reduction_clamps_near_one() {
        assert_eq!(reduce_mod_one(1.0 - 1e-16, 1.0), 0.0);
        assert_eq!(reduce_mod_one(-0.25, 1.0), 0.75);
        assert_eq!(reduce_mod_one(2.5, 2.0), 0.0);
    }

    #[test]
    fn curve_matches_single_calls_and_deviation() {
        let w = SequenceWindow::from_values((1..=300).map(|n| (n * n) as f64).collect());
        let cfg =
            PairCorrConfig::new(vec![0.5, 1.0, 2.0], NEAREST, std::f64::consts::SQRT_2).unwrap();
        let curve = pair_correlation_curve(&w, &cfg).unwrap();
        for row in &curve.rows {
            assert_eq!(
                pair_correlation(&w, row.s, &cfg).unwrap(),
                (row.count, row.r)
            );
        }
        assert!(curve.rows.windows(2).all(|p| p[0].count <= p[1].count));

        let c = PairCorrCurve {
            n: 10,
            rows: vec![CurveRow {
                s: 1.0,
                count: 20,
                r: 2.0,
            }],
        };
        assert_eq!(ppc_deviation(&c).unwrap(), 0.0);
        let c = PairCorrCurve {
            n: 10,
            rows: vec![
                CurveRow {
                    s: 1.0,
                    count: 18,
                    r: 1.8,
                },
                CurveRow {
                    s: 2.0,
                    count: 44,
                    r: 4.4,
                },
            ],
        };
        assert!((ppc_deviation(&c).unwrap() - 0.1).abs() < 1e-12);
        assert!(ppc_deviation(&PairCorrCurve { n: 1, rows: vec![] }).is_err());
    }

    #[test]
    fn random_windows_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..100 {
            let n = rng.gen_range(2..=500);
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
            // sprinkle exact duplicates and values on a coarse dyadic grid
            if trial % 3 == 0 {
                for x in v.iter_mut().take(n / 2) {
                    *x = (*x * 8.0).round() / 8.0;
                }
            }
            let s = rng.gen_range(0.01..(n as f64 / 2.0));
            for conv in [NEAREST, FRAC] {
                let alpha = if trial % 2 == 0 {
                    1.0
                } else {
                    std::f64::consts::SQRT_2
                };
                assert_eq!(
                    pair_correlation_values(&v, s, conv, alpha).unwrap(),
                    pair_correlation_brute(&v, s, conv, alpha).unwrap(),
                    "trial {trial} conv {conv:?}"
                );
            }
        }
    }

    proptest! {
        #[test]
        fn shift_invariance(
            raw in prop::collection::vec(0i64..(1 << 20), 2..60),
            shift in -(1i64 << 20)..(1i64 << 20),
            bump in 0usize..60,
            k in -5i64..5,
            s in 0.01f64..1.0,
        ) {
            // dyadic values keep every shift exact
            let scale = (1u64 << 20) as f64;
            let v: Vec<f64> = raw.iter().map(|&r| r as f64 / scale).collect();
            let n = v.len();
            let s = s * n as f64 / 2.0;
            let shifted: Vec<f64> = v.iter().map(|x| x + shift as f64 / scale).collect();
            let mut bumped = v.clone();
            bumped[bump % n] += k as f64;
            for conv in [NEAREST, FRAC] {
                let base = pair_correlation_values(&v, s, conv, 1.0).unwrap();
                prop_assert_eq!(base, pair_correlation_values(&shifted, s, conv, 1.0).unwrap());
                prop_assert_eq!(base, pair_correlation_values(&bumped, s, conv, 1.0).unwrap());
            }
        }

        #[test]
        fn monotone_in_s(v in prop::collection::vec(-10.0f64..10.0, 2..80), s1 in 0.001f64..1.0, s2 in 0.001f64..1.0) {
            let n = v.len() as f64;
            let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            for conv in [NEAREST, FRAC] {
                let a = pair_correlation_values(&v, lo * n / 2.0, conv, 1.0).unwrap().0;
                let b = pair_correlation_values(&v, hi * n / 2.0, conv, 1.0).unwrap().0;
                prop_assert!(a <= b);
            }
        }
    }
}

//! Batteries of experiments writing one CSV table and a JSON summary.
//!
//! Instances within a battery run in parallel but are collected in a fixed
//! order, and every reduction over reals is sequential, so the output bytes
//! depend only on the configuration.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Battery, ExperimentConfig};
use super::props::{
    verify_decreasing, verify_dyadic_partition, verify_increasing, verify_l2_monotonicity,
    verify_linear, verify_main_bound, verify_multiplicative,
};
use super::rt::{rt_sums, RtSums};
use crate::energy::{energy_exponent, fit_exponent_real, GammaRule};
use crate::error::{Error, Result};
use crate::lattice::{
    body_area, lattice_point_count, successive_minima, DifferenceWeights, LatticeBody,
    WeightedPoint,
};
use crate::paircorr::{
    pair_correlation_brute, pair_correlation_curve, ppc_deviation, Convention, PairCorrConfig,
};
use crate::report::{fmt_real, RatioReport, SweepResult, Witness};
use crate::sequences::{generate, SequenceSpec, SequenceWindow};

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub battery: Battery,
    pub version: String,
    pub seed: u64,
    /// Effective configuration, including defaults.
    pub config: BTreeMap<String, String>,
    /// Front-end flags echoed verbatim.
    pub flags: BTreeMap<String, String>,
    pub checks: BTreeMap<String, bool>,
    pub metrics: BTreeMap<String, Value>,
    pub pass: bool,
}

/// CSV sink flushed after every row so partial results survive a failure.
struct Table {
    writer: csv::Writer<File>,
}

impl Table {
    fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut table = Table {
            writer: csv::Writer::from_writer(file),
        };
        table.row(header.iter().map(|h| h.to_string()).collect())?;
        Ok(table)
    }

    fn row(&mut self, cells: Vec<String>) -> Result<()> {
        let to_io = |e: csv::Error| Error::param(format!("csv write failed: {e}"));
        self.writer.write_record(&cells).map_err(to_io)?;
        self.writer.flush().map_err(|e| Error::io("csv output", e))
    }
}

#[derive(Default)]
struct Outcome {
    checks: BTreeMap<String, bool>,
    metrics: BTreeMap<String, Value>,
}

impl Outcome {
    fn check(&mut self, name: impl Into<String>, ok: bool) {
        self.checks.insert(name.into(), ok);
    }

    fn metric(&mut self, name: impl Into<String>, value: impl Serialize) {
        self.metrics.insert(name.into(), json!(value));
    }
}

/// Effective settings: every recognised key with its value or default.
struct Settings<'a> {
    config: &'a ExperimentConfig,
    effective: BTreeMap<String, String>,
}

impl<'a> Settings<'a> {
    fn new(config: &'a ExperimentConfig, defaults: &[(&str, &str)]) -> Result<Self> {
        let mut allowed = vec!["battery", "seed"];
        allowed.extend(defaults.iter().map(|(k, _)| *k));
        config.check_keys(&allowed)?;
        let mut effective: BTreeMap<String, String> = defaults
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        effective.extend(config.entries().iter().map(|(k, v)| (k.clone(), v.clone())));
        effective.insert("seed".into(), config.seed()?.to_string());
        Ok(Settings { config, effective })
    }

    fn raw(&self, key: &str) -> &str {
        &self.effective[key]
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let v = self.raw(key);
        v.parse()
            .map_err(|_| Error::param(format!("cannot parse `{key} = {v}`")))
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>> {
        let items = self.config.list(key, self.raw(key))?;
        if items.is_empty() {
            return Err(Error::param(format!("`{key}` is empty")));
        }
        Ok(items)
    }

    fn spec(&self, key: &str) -> Result<SequenceSpec> {
        self.raw(key).parse()
    }
}

fn ascending<T: PartialOrd>(key: &str, values: &[T]) -> Result<()> {
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param(format!("`{key}` must be strictly ascending")));
    }
    Ok(())
}

fn int(v: impl ToString) -> String {
    v.to_string()
}

/// Runs the battery named in `config`, writing `<battery>.csv` and
/// `summary.json` into `out_dir`.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_dir: &Path,
    flags: &BTreeMap<String, String>,
) -> Result<ExperimentSummary> {
    let battery = config.battery()?;
    let settings = Settings::new(config, defaults(battery))?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let csv_path = out_dir.join(format!("{battery}.csv"));
    let outcome = match battery {
        Battery::PpcConvergence => ppc_convergence(&settings, &csv_path)?,
        Battery::EnergySlopes => energy_slopes(&settings, &csv_path)?,
        Battery::PropHarness => prop_harness(&settings, &csv_path)?,
        Battery::RtSlopes => rt_slopes(&settings, &csv_path)?,
        Battery::GeometrySweep => geometry_sweep(&settings, &csv_path)?,
    };
    let summary = ExperimentSummary {
        battery,
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed()?,
        config: settings.effective,
        flags: flags.clone(),
        pass: outcome.checks.values().all(|&ok| ok),
        checks: outcome.checks,
        metrics: outcome.metrics,
    };
    let path = out_dir.join(SUMMARY_FILE);
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}

fn defaults(battery: Battery) -> &'static [(&'static str, &'static str)] {
    match battery {
        Battery::PpcConvergence => &[
            ("spec", "power:alpha=1.4142135623730951,theta=2"),
            ("ns", "4096,8192,16384,32768"),
            ("s", "0.5,1,1.5,2,2.5,3"),
            ("convention", "nearest"),
            ("tolerance", "0.15"),
            ("brute_n", "4096"),
        ],
        Battery::EnergySlopes => &[
            ("convex_spec", "poly:1,0,0"),
            ("convex_ns", "64,128,256,512,1024,2048"),
            ("convex_max_slope", "2.5"),
            ("convex_max_residual", "0.1"),
            ("poly_spec", "poly:1,0,1,0"),
            ("poly_ns", "64,128,256,512,1024"),
            ("poly_max_slope", "2.6"),
            ("gamma", "1"),
        ],
        Battery::PropHarness => &[
            ("spec", "power:alpha=1,theta=1.5"),
            ("terms", "48"),
            ("blocks", "3,4,5"),
            ("ladder", "64,128,256"),
            ("multiplicative_ladder", "16,32,64"),
            ("k", "1"),
            ("eps", "0.1"),
            ("max_drift", "2"),
            ("linear_max_ratio", "8"),
        ],
        Battery::RtSlopes => &[
            ("spec", "power:alpha=1.4142135623730951,theta=2"),
            ("ns", "32,64,128"),
            ("eps", "0.05"),
            ("sum1_max_slope", "1.9"),
            ("sum2_max_slope", "3.95"),
        ],
        Battery::GeometrySweep => &[
            ("bodies", "200"),
            ("log10_x_max", "3"),
            ("log10_n_max", "3.3"),
            ("log10_k_min", "-2"),
            ("log10_k_max", "2"),
            ("max_spread", "64"),
            ("max_drift", "2"),
        ],
    }
}

fn ppc_convergence(settings: &Settings, csv_path: &Path) -> Result<Outcome> {
    let spec = settings.spec("spec")?;
    let ns: Vec<usize> = settings.list("ns")?;
    ascending("ns", &ns)?;
    let s_grid: Vec<f64> = settings.list("s")?;
    let convention: Convention = settings.raw("convention").parse()?;
    let tolerance: f64 = settings.num("tolerance")?;
    let brute_n: usize = settings.num("brute_n")?;
    let config = PairCorrConfig::new(s_grid.clone(), convention, 1.0)?;
    let largest = *ns.last().expect("nonempty");
    let window = generate(&spec, largest.max(brute_n))?;

    let mut table = Table::create(csv_path, &["n", "s", "count", "R", "two_s", "ratio"])?;
    let mut out = Outcome::default();
    let mut deviations = BTreeMap::new();
    for &n in &ns {
        let prefix = SequenceWindow::from_values(window.prefix(n)?.to_vec());
        let curve = pair_correlation_curve(&prefix, &config)?;
        for row in &curve.rows {
            let two_s = 2.0 * row.s;
            table.row(vec![
                int(n),
                fmt_real(row.s),
                int(row.count),
                fmt_real(row.r),
                fmt_real(two_s),
                fmt_real(row.r / two_s),
            ])?;
        }
        deviations.insert(n.to_string(), ppc_deviation(&curve)?);
    }
    let final_deviation = deviations[&largest.to_string()];
    out.check("deviation_at_largest_n", final_deviation <= tolerance);

    let prefix = SequenceWindow::from_values(window.prefix(brute_n)?.to_vec());
    let curve = pair_correlation_curve(&prefix, &config)?;
    let brute = s_grid
        .par_iter()
        .map(|&s| pair_correlation_brute(prefix.values(), s, convention, 1.0).map(|(c, _)| c))
        .collect::<Result<Vec<u64>>>()?;
    let fast: Vec<u64> = curve.rows.iter().map(|r| r.count).collect();
    out.check("brute_force_match", fast == brute);
    out.metric("deviation_by_n", deviations);
    out.metric("brute_n", brute_n);
    out.metric("brute_counts", brute);
    Ok(out)
}

fn energy_slopes(settings: &Settings, csv_path: &Path) -> Result<Outcome> {
    let gamma: f64 = settings.num("gamma")?;
    let mut table = Table::create(csv_path, &["family", "n", "gamma", "energy"])?;
    let mut out = Outcome::default();
    for family in ["convex", "poly"] {
        let spec = settings.spec(&format!("{family}_spec"))?;
        let ns: Vec<usize> = settings.list(&format!("{family}_ns"))?;
        let fit = energy_exponent(&spec, &ns, GammaRule::Const(gamma))?;
        for (n, e) in fit.ns.iter().zip(&fit.values) {
            table.row(vec![family.to_string(), int(n), fmt_real(gamma), int(e)])?;
        }
        let max_slope: f64 = settings.num(&format!("{family}_max_slope"))?;
        out.check(format!("{family}_slope"), fit.slope <= max_slope);
        if family == "convex" {
            let max_residual: f64 = settings.num("convex_max_residual")?;
            out.check("convex_residual", fit.residual < max_residual);
        }
        out.metric(format!("{family}_slope"), fit.slope);
        out.metric(format!("{family}_residual"), fit.residual);
    }
    Ok(out)
}

type Check<'a> = Box<dyn Fn() -> Result<RatioReport> + Send + Sync + 'a>;

struct Instance<'a> {
    proposition: &'static str,
    step: usize,
    run: Check<'a>,
}

fn instance<'a>(proposition: &'static str, step: usize, run: Check<'a>) -> Instance<'a> {
    Instance {
        proposition,
        step,
        run,
    }
}

fn witness_cell(w: &Option<Witness>) -> String {
    match w {
        None => String::new(),
        Some(Witness::Length(n)) => format!("N={}", fmt_real(*n)),
        Some(Witness::Shortened(l)) => format!("L={}", fmt_real(*l)),
        Some(Witness::Theta(t)) => format!("theta={t}"),
    }
}

fn params_cell(r: &RatioReport) -> String {
    r.params
        .iter()
        .map(|(k, v)| format!("{k}={}", fmt_real(*v)))
        .collect::<Vec<_>>()
        .join(";")
}

const PROPOSITIONS: [&str; 7] = [
    "dyadic-partition",
    "linear",
    "decreasing",
    "increasing",
    "multiplicative",
    "l2-monotonicity",
    "main-bound",
];

fn prop_harness(settings: &Settings, csv_path: &Path) -> Result<Outcome> {
    let spec = settings.spec("spec")?;
    let terms: usize = settings.num("terms")?;
    let levels: Vec<u32> = settings.list("blocks")?;
    let ladder: Vec<u64> = settings.list("ladder")?;
    let mult_ladder: Vec<u64> = settings.list("multiplicative_ladder")?;
    ascending("ladder", &ladder)?;
    ascending("multiplicative_ladder", &mult_ladder)?;
    if ladder.len() != mult_ladder.len() {
        return Err(Error::param(
            "`ladder` and `multiplicative_ladder` must have the same length",
        ));
    }
    if ladder[0] < 4 {
        return Err(Error::param("ladder values must be at least 4"));
    }
    let k: f64 = settings.num("k")?;
    let eps: f64 = settings.num("eps")?;
    let max_drift: f64 = settings.num("max_drift")?;
    let linear_max: f64 = settings.num("linear_max_ratio")?;

    let window = generate(&spec, terms)?;
    let weights = DifferenceWeights::differences(&window, terms, 0.0)?;
    let positive = weights.at_least_one();
    let split = weights.dyadic_blocks();
    let blocks: Vec<&[WeightedPoint]> = levels
        .iter()
        .map(|&lvl| {
            split
                .blocks
                .iter()
                .find(|b| b.k == lvl)
                .map(|b| b.entries)
                .ok_or_else(|| Error::param(format!("no differences in dyadic block {lvl}")))
        })
        .collect::<Result<_>>()?;

    let mut instances: Vec<Instance<'_>> = Vec::new();
    for (step, (&p, &pm)) in ladder.iter().zip(&mult_ladder).enumerate() {
        instances.push(instance(
            "dyadic-partition",
            step,
            Box::new(move || verify_dyadic_partition(positive, p, k)),
        ));
        instances.push(instance(
            "main-bound",
            step,
            Box::new(move || verify_main_bound(positive, p, k, eps)),
        ));
        for &b in &blocks {
            for j in [2.0, 4.0, 8.0] {
                instances.push(instance(
                    "linear",
                    step,
                    Box::new(move || verify_linear(b, p, k, j)),
                ));
            }
            instances.push(instance(
                "decreasing",
                step,
                Box::new(move || verify_decreasing(b, p, k, p / 4, eps)),
            ));
            for j in [2, 4] {
                instances.push(instance(
                    "increasing",
                    step,
                    Box::new(move || verify_increasing(b, p, k, j)),
                ));
            }
            instances.push(instance(
                "multiplicative",
                step,
                Box::new(move || verify_multiplicative(b, pm, k, eps)),
            ));
            for r in [2.0, 4.0, 8.0] {
                instances.push(instance(
                    "l2-monotonicity",
                    step,
                    Box::new(move || verify_l2_monotonicity(b, p as f64, r * p as f64)),
                ));
            }
        }
    }
    let reports = instances
        .par_iter()
        .map(|i| (i.run)())
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::create(
        csv_path,
        &[
            "proposition",
            "step",
            "params",
            "lhs",
            "rhs",
            "ratio",
            "witness",
        ],
    )?;
    for (inst, r) in instances.iter().zip(&reports) {
        table.row(vec![
            inst.proposition.to_string(),
            int(inst.step),
            params_cell(r),
            fmt_real(r.lhs),
            fmt_real(r.rhs),
            fmt_real(r.ratio),
            witness_cell(&r.witness),
        ])?;
    }

    let mut out = Outcome::default();
    out.check(
        "all_well_formed",
        reports.iter().all(RatioReport::is_well_formed),
    );
    for name in PROPOSITIONS {
        let mut steps = vec![Vec::new(); ladder.len()];
        for (inst, r) in instances.iter().zip(&reports) {
            if inst.proposition == name {
                steps[inst.step].push(r.clone());
            }
        }
        let sweep = SweepResult::from_steps(steps);
        out.check(format!("{name}_drift"), sweep.drift_factor < max_drift);
        out.metric(
            name,
            json!({ "step_max": sweep.step_max, "max_ratio": sweep.max_ratio, "drift_factor": sweep.drift_factor }),
        );
        if name == "linear" {
            out.check("linear_max_ratio", sweep.max_ratio <= linear_max);
        }
    }
    Ok(out)
}

fn rt_slopes(settings: &Settings, csv_path: &Path) -> Result<Outcome> {
    let spec = settings.spec("spec")?;
    let ns: Vec<usize> = settings.list("ns")?;
    ascending("ns", &ns)?;
    let epsilons: Vec<f64> = settings.list("eps")?;
    let max1: f64 = settings.num("sum1_max_slope")?;
    let max2: f64 = settings.num("sum2_max_slope")?;
    let window = generate(&spec, *ns.last().expect("nonempty"))?;
    let tasks: Vec<(f64, usize)> = epsilons
        .iter()
        .flat_map(|&e| ns.iter().map(move |&n| (e, n)))
        .collect();
    let sums = tasks
        .iter()
        .map(|&(e, n)| rt_sums(&window, n, e))
        .collect::<Result<Vec<RtSums>>>()?;

    let mut table = Table::create(
        csv_path,
        &["eps", "n", "m_max", "threshold", "sum1", "sum2"],
    )?;
    for r in &sums {
        table.row(vec![
            fmt_real(r.eps),
            int(r.n),
            int(r.m_max),
            fmt_real(r.threshold),
            int(r.sum1),
            int(r.sum2),
        ])?;
    }
    let mut out = Outcome::default();
    for (i, &eps) in epsilons.iter().enumerate() {
        let chunk = &sums[i * ns.len()..(i + 1) * ns.len()];
        let tag = eps.to_string();
        // log(1 + sum) keeps the fit defined when a sum vanishes
        let fit = |pick: fn(&RtSums) -> u128| {
            let vals: Vec<f64> = chunk.iter().map(|r| 1.0 + pick(r) as f64).collect();
            fit_exponent_real(&ns, &vals, Vec::new())
        };
        let (s1, s2) = (fit(|r| r.sum1)?, fit(|r| r.sum2)?);
        out.check(format!("sum1_slope_eps={tag}"), s1.slope <= max1);
        out.check(format!("sum2_slope_eps={tag}"), s2.slope <= max2);
        out.metric(format!("sum1_slope_eps={tag}"), s1.slope);
        out.metric(format!("sum2_slope_eps={tag}"), s2.slope);
    }
    Ok(out)
}

#[derive(Clone, Copy)]
struct BodyRow {
    body: LatticeBody,
    lambda1: f64,
    lambda2: f64,
    area: f64,
    count: u64,
    count_ratio: f64,
    doubled_count: u64,
    doubled_ratio: f64,
}

fn count_ratio(body: &LatticeBody) -> Result<(u64, f64)> {
    let minima = successive_minima(body)?;
    let count = lattice_point_count(body)?;
    let product = (1.0 / minima.lambda1).max(1.0) * (1.0 / minima.lambda2).max(1.0);
    Ok((count, count as f64 / product))
}

/// `(min, max)` of the values.
fn window_of(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn geometry_sweep(settings: &Settings, csv_path: &Path) -> Result<Outcome> {
    let bodies: usize = settings.num("bodies")?;
    let x_max: f64 = settings.num("log10_x_max")?;
    let n_max: f64 = settings.num("log10_n_max")?;
    let (k_min, k_max): (f64, f64) = (settings.num("log10_k_min")?, settings.num("log10_k_max")?);
    let max_spread: f64 = settings.num("max_spread")?;
    let max_drift: f64 = settings.num("max_drift")?;
    if bodies == 0 || !(x_max >= 0.0 && n_max >= 0.0 && k_min < k_max) {
        return Err(Error::param("invalid geometry sweep ranges"));
    }
    if 4.0 * 10f64.powf(n_max) > crate::lattice::geometry::COUNT_WINDOW_CAP {
        return Err(Error::param(
            "doubled bodies would exceed the lattice count window",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(settings.num("seed")?);
    let specs: Vec<LatticeBody> = (0..bodies)
        .map(|_| {
            let x1 = 10f64.powf(rng.gen_range(0.0..=x_max));
            let x2 = 10f64.powf(rng.gen_range(0.0..=x_max));
            let n = 10f64.powf(rng.gen_range(0.0..=n_max));
            let k = 10f64.powf(rng.gen_range(k_min..=k_max));
            LatticeBody::new(x1, x2, n, k)
        })
        .collect::<Result<_>>()?;
    let rows = specs
        .par_iter()
        .map(|body| {
            let minima = successive_minima(body)?;
            let (count, ratio) = count_ratio(body)?;
            let doubled = LatticeBody::new(body.x1, body.x2, 2.0 * body.n, body.k)?;
            let (doubled_count, doubled_ratio) = count_ratio(&doubled)?;
            Ok(BodyRow {
                body: *body,
                lambda1: minima.lambda1,
                lambda2: minima.lambda2,
                area: body_area(body).area,
                count,
                count_ratio: ratio,
                doubled_count,
                doubled_ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let header = [
        "id",
        "x1",
        "x2",
        "n",
        "k",
        "lambda1",
        "lambda2",
        "area",
        "minkowski",
        "count",
        "count_ratio",
        "count_doubled",
        "count_ratio_doubled",
    ];
    let mut table = Table::create(csv_path, &header)?;
    let mut minkowski = Vec::with_capacity(rows.len());
    for (id, r) in rows.iter().enumerate() {
        let product = r.area * r.lambda1 * r.lambda2;
        minkowski.push(product);
        let b = r.body;
        table.row(vec![
            int(id),
            fmt_real(b.x1),
            fmt_real(b.x2),
            fmt_real(b.n),
            fmt_real(b.k),
            fmt_real(r.lambda1),
            fmt_real(r.lambda2),
            fmt_real(r.area),
            fmt_real(product),
            int(r.count),
            fmt_real(r.count_ratio),
            int(r.doubled_count),
            fmt_real(r.doubled_ratio),
        ])?;
    }
    let (m_lo, m_hi) = window_of(minkowski.iter().copied());
    let (c_lo, c_hi) = window_of(rows.iter().map(|r| r.count_ratio));
    let (d_lo, d_hi) = window_of(rows.iter().map(|r| r.doubled_ratio));
    let stable = |a: f64, b: f64| a / b < max_drift && b / a < max_drift;

    let mut out = Outcome::default();
    out.check("minkowski_window", m_lo >= 2.0 - 1e-6 && m_hi <= 4.0 + 1e-6);
    out.check(
        "count_window_spread",
        c_hi / c_lo <= max_spread && d_hi / d_lo <= max_spread,
    );
    out.check(
        "count_window_stable",
        stable(c_lo, d_lo) && stable(c_hi, d_hi),
    );
    out.metric("minkowski_ratios", &minkowski);
    out.metric("minkowski_range", [m_lo, m_hi]);
    out.metric("count_window", [c_lo, c_hi]);
    out.metric("count_window_doubled", [d_lo, d_hi]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    fn run(text: &str) -> (ExperimentSummary, tempfile::TempDir) {
        let dir = tempfile::tempdir().unwrap();
        let summary = run_experiment(&config(text), dir.path(), &BTreeMap::new()).unwrap();
        (summary, dir)
    }

    fn read(dir: &tempfile::TempDir, name: &str) -> String {
        std::fs::read_to_string(dir.path().join(name)).unwrap()
    }

    #[test]
    fn small_geometry_sweep() {
        let (summary, dir) =
            run("battery = geometry-sweep\nseed = 42\nbodies = 20\nlog10_n_max = 2");
        assert!(summary.checks["minkowski_window"]);
        assert_eq!(
            summary.metrics["minkowski_ratios"]
                .as_array()
                .unwrap()
                .len(),
            20
        );
        let csv = read(&dir, "geometry-sweep.csv");
        assert_eq!(csv.lines().count(), 21);
        assert!(read(&dir, SUMMARY_FILE).contains("\"battery\": \"geometry-sweep\""));
    }

    #[test]
    fn repeated_runs_are_identical() {
        let text = "battery = geometry-sweep\nseed = 7\nbodies = 12\nlog10_n_max = 2";
        let (_, a) = run(text);
        let (_, b) = run(text);
        for name in ["geometry-sweep.csv", SUMMARY_FILE] {
            assert_eq!(read(&a, name), read(&b, name));
        }
        let (_, c) = run("battery = geometry-sweep\nseed = 8\nbodies = 12\nlog10_n_max = 2");
        assert_ne!(
            read(&a, "geometry-sweep.csv"),
            read(&c, "geometry-sweep.csv")
        );
    }

    #[test]
    fn small_ppc_and_rt() {
        let (summary, dir) =
            run("battery = ppc-convergence\nns = 256,512\nbrute_n = 256\ntolerance = 10");
        assert!(summary.checks["brute_force_match"]);
        assert_eq!(read(&dir, "ppc-convergence.csv").lines().count(), 1 + 2 * 6);
        let (summary, _) = run("battery = rt-slopes\nns = 8,16,32\neps = 0.05,0.2");
        assert_eq!(summary.checks.len(), 4);
    }

    #[test]
    fn small_energy_and_props() {
        let (summary, _) = run("battery = energy-slopes\nconvex_ns = 16,32,64\npoly_ns = 16,32,64");
        assert!(summary.metrics["convex_slope"].as_f64().unwrap() > 2.0);
        let (summary, dir) = run(
            "battery = prop-harness\nterms = 24\nblocks = 3,4\nladder = 8,16,32\nmultiplicative_ladder = 4,8,16",
        );
        assert!(summary.checks["all_well_formed"]);
        assert!(read(&dir, "prop-harness.csv").lines().count() > 30);
    }

    #[test]
    fn rejects_bad_configs() {
        let dir = tempfile::tempdir().unwrap();
        let none = BTreeMap::new();
        for text in [
            "battery = nope",
            "seed = 1",
            "battery = rt-slopes\nbogus = 1",
            "battery = rt-slopes\nns = 64,32,128",
            "battery = ppc-convergence\nconvention = sideways",
        ] {
            assert!(
                run_experiment(&config(text), dir.path(), &none).is_err(),
                "{text}"
            );
        }
        assert!(matches!(
            run_experiment(&config("battery = nope"), dir.path(), &none),
            Err(Error::UnknownBattery(_))
        ));
    }
}

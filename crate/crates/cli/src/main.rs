use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use paircorr_core::analytic::{
    hua_moment, mean_value_closed_form, mean_value_integral, ExpPoly, HuaMethod,
};
use paircorr_core::energy::{approx_energy, energy_exponent, GammaRule, MethodChoice};
use paircorr_core::lattice::{
    body_area, count_s, load_weights, successive_minima, LatticeBody, SumChoice,
};
use paircorr_core::paircorr::{pair_correlation_curve, Convention, PairCorrConfig};
use paircorr_core::report::fmt_real;
use paircorr_core::sequences::{generate, load_sequence, write_sequence};
use paircorr_core::verifier::{run_experiment, ExperimentConfig};
use paircorr_core::SequenceSpec;

#[derive(Parser, Debug)]
#[command(
    name = "paircorr",
    version,
    about = "Pair correlation, additive energy and lattice-sum experiments"
)]
struct Cli {
    /// Worker threads, or `auto`. PAIRCORR_THREADS takes precedence.
    #[arg(long, global = true, default_value = "auto")]
    threads: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the first N terms of a sequence
    Gen {
        #[arg(long)]
        spec: SequenceSpec,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pair-correlation counts over a grid of s
    Ppc {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, value_delimiter = ',', default_value = "1")]
        s: Vec<f64>,
        #[arg(long, default_value = "nearest")]
        convention: Convention,
        #[command(flatten)]
        csv: CsvOut,
    },
    /// Approximate additive energy of a window prefix
    Energy {
        #[arg(long = "in")]
        input: PathBuf,
        /// Prefix length; defaults to the whole window
        #[arg(long)]
        n: Option<usize>,
        /// A positive real or `1/N`
        #[arg(long, default_value = "1")]
        gamma: String,
        #[arg(long, default_value = "auto")]
        method: MethodChoice,
        #[command(flatten)]
        csv: CsvOut,
    },
    /// Fitted growth exponent of the approximate energy
    EnergySlope {
        #[arg(long)]
        spec: SequenceSpec,
        #[arg(long, value_delimiter = ',')]
        ns: Vec<usize>,
        #[arg(long, default_value = "1")]
        gamma: String,
    },
    /// Weighted count of near-coincident multiples
    Scount {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        k: f64,
        #[arg(long, default_value = "auto")]
        method: SumChoice,
    },
    /// Successive minima of the strip body
    Minima {
        #[arg(long)]
        x1: f64,
        #[arg(long)]
        x2: f64,
        #[arg(long)]
        n: f64,
        #[arg(long)]
        k: f64,
    },
    /// Even moment of a polynomial Weyl sum
    Moment {
        /// Coefficients, highest degree first
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        poly: Vec<f64>,
        #[arg(long)]
        n: u64,
        /// Even exponent 2s
        #[arg(long = "pow")]
        two_s: u32,
        /// auto, nyquist or refined
        #[arg(long, default_value = "auto")]
        method: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Mean square of a block Dirichlet polynomial over a dyadic range
    Mv {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        bign: u64,
        #[arg(long)]
        t: f64,
    },
    /// Run an experiment battery
    Verify {
        #[arg(long)]
        battery: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args, Debug)]
struct CsvOut {
    /// Write CSV here instead of standard output
    #[arg(long)]
    csv: Option<PathBuf>,
}

impl CsvOut {
    fn open(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.csv {
            Some(path) => Box::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            ),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn parse_gamma(text: &str, n: usize) -> Result<f64> {
    if text == "1/N" {
        return Ok(1.0 / n as f64);
    }
    text.parse().map_err(|_| {
        paircorr_core::Error::InvalidParameter(format!("cannot parse gamma `{text}`")).into()
    })
}

fn gamma_rule(text: &str) -> Result<GammaRule> {
    if text == "1/N" {
        Ok(GammaRule::OneOverN)
    } else {
        Ok(GammaRule::Const(parse_gamma(text, 1)?))
    }
}

fn print_json(value: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn thread_count(flag: &str) -> Result<Option<usize>> {
    let raw = std::env::var("PAIRCORR_THREADS")
        .ok()
        .filter(|v| !v.is_empty())
        .unwrap_or_else(|| flag.to_string());
    if raw == "auto" {
        return Ok(None);
    }
    match raw.parse::<usize>() {
        Ok(n) if n > 0 => Ok(Some(n)),
        _ => Err(
            paircorr_core::Error::InvalidParameter(format!("invalid thread count `{raw}`")).into(),
        ),
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = thread_count(&cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring thread pool")?;
    }
    match cli.command {
        Command::Gen { spec, n, out } => {
            let window = generate(&spec, n)?;
            write_sequence(&out, &window)?;
        }
        Command::Ppc {
            input,
            alpha,
            s,
            convention,
            csv,
        } => {
            let window = load_sequence(&input)?;
            let config = PairCorrConfig::new(s, convention, alpha)?;
            let curve = pair_correlation_curve(&window, &config)?;
            let mut out = csv.open()?;
            writeln!(out, "s,count,R,two_s,ratio")?;
            for row in &curve.rows {
                let two_s = 2.0 * row.s;
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    fmt_real(row.s),
                    row.count,
                    fmt_real(row.r),
                    fmt_real(two_s),
                    fmt_real(row.r / two_s)
                )?;
            }
        }
        Command::Energy {
            input,
            n,
            gamma,
            method,
            csv,
        } => {
            let window = load_sequence(&input)?;
            let n = n.unwrap_or(window.len());
            let gamma = parse_gamma(&gamma, n)?;
            let result = approx_energy(&window, n, gamma, method)?;
            let mut out = csv.open()?;
            writeln!(out, "n,gamma,method,energy")?;
            writeln!(
                out,
                "{},{},{:?},{}",
                result.n,
                fmt_real(gamma),
                result.method,
                result.value
            )?;
        }
        Command::EnergySlope { spec, ns, gamma } => {
            let fit = energy_exponent(&spec, &ns, gamma_rule(&gamma)?)?;
            print_json(&json!({
                "spec": spec.to_string(),
                "ns": fit.ns,
                "energies": fit.values,
                "slope": fit.slope,
                "intercept": fit.intercept,
                "residual": fit.residual,
            }))?;
        }
        Command::Scount {
            input,
            m,
            k,
            method,
        } => {
            let weights = load_weights(&input)?;
            let count = count_s(weights.entries(), m, k, method)?;
            let count =
                u64::try_from(count).map_or_else(|_| json!(count.to_string()), |c| json!(c));
            print_json(&json!({ "M": m, "K": k, "count": count }))?;
        }
        Command::Minima { x1, x2, n, k } => {
            let body = LatticeBody::new(x1, x2, n, k)?;
            let minima = successive_minima(&body)?;
            let area = body_area(&body).area;
            print_json(&json!({
                "lambda1": minima.lambda1,
                "lambda2": minima.lambda2,
                "v1": minima.v1,
                "v2": minima.v2,
                "area": area,
                "minkowski": area * minima.lambda1 * minima.lambda2,
            }))?;
        }
        Command::Moment {
            poly,
            n,
            two_s,
            method,
            tol,
        } => {
            let method = match method.as_str() {
                "auto" => HuaMethod::Auto,
                "nyquist" => HuaMethod::NyquistExact,
                "refined" => HuaMethod::Refined { tol },
                other => {
                    return Err(paircorr_core::Error::InvalidParameter(format!(
                        "unknown method `{other}`"
                    ))
                    .into())
                }
            };
            let r = hua_moment(&poly, n, two_s, method)?;
            print_json(&json!({
                "value": r.value,
                "errorEstimate": r.error_estimate,
                "gridSize": r.grid_size,
                "method": format!("{:?}", r.method),
            }))?;
        }
        Command::Mv { input, bign, t } => {
            let weights = load_weights(&input)?;
            let poly = ExpPoly::block_times_range(weights.entries(), bign, None)?;
            let r = mean_value_integral(&poly, t)?;
            print_json(&json!({
                "value": r.value,
                "errorEstimate": r.error_estimate,
                "gridSize": r.grid_size,
                "closedForm": mean_value_closed_form(&poly, t),
            }))?;
        }
        Command::Verify {
            battery,
            config,
            out,
            seed,
        } => verify(battery, config, &out, seed)?,
    }
    Ok(())
}

fn verify(
    battery: Option<String>,
    config: Option<PathBuf>,
    out: &Path,
    seed: Option<u64>,
) -> Result<()> {
    let mut cfg = match &config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let mut flags = BTreeMap::new();
    if let Some(b) = &battery {
        cfg.set("battery", b);
        flags.insert("battery".to_string(), b.clone());
    }
    if let Some(s) = seed {
        cfg.set("seed", s);
        flags.insert("seed".to_string(), s.to_string());
    }
    if let Some(path) = &config {
        flags.insert("config".to_string(), path.display().to_string());
    }
    let summary = run_experiment(&cfg, out, &flags)?;
    for (name, ok) in &summary.checks {
        println!("{} {name}", if *ok { "PASS" } else { "FAIL" });
    }
    if !summary.pass {
        return Err(anyhow!(CheckFailure(summary.battery.to_string())));
    }
    Ok(())
}

#[derive(Debug)]
struct CheckFailure(String);

impl std::fmt::Display for CheckFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "battery {} failed at least one check", self.0)
    }
}

impl std::error::Error for CheckFailure {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<CheckFailure>().is_some() {
        return 1;
    }
    match err.downcast_ref::<paircorr_core::Error>() {
        Some(e) if e.is_validation() => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn paircorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paircorr"))
        .args(args)
        .env_remove("PAIRCORR_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_str(&stdout(out)).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_writes_squares() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("w.txt");
    stdout(&paircorr(&[
        "gen",
        "--spec",
        "poly:1,0,0",
        "--n",
        "5",
        "--out",
        path(&file),
    ]));
    let text = std::fs::read_to_string(&file).unwrap();
    let values: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.parse().unwrap())
        .collect();
    assert_eq!(values, vec![1.0, 4.0, 9.0, 16.0, 25.0]);
}

#[test]
#[allow(clippy::approx_constant)]
fn ppc_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("w.txt");
    stdout(&paircorr(&[
        "gen",
        "--spec",
        "poly:1,0,0",
        "--n",
        "40",
        "--out",
        path(&file),
    ]));
    let csv = dir.path().join("ppc.csv");
    let args = [
        "ppc",
        "--in",
        path(&file),
        "--s",
        "0.5,1",
        "--alpha",
        "1.4142135",
        "--csv",
        path(&csv),
    ];
    stdout(&paircorr(&args));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("s,count,R,two_s,ratio"));

    let values: Vec<f64> = (1..=40).map(|n| (n * n) as f64).collect();
    for (line, s) in lines.zip([0.5, 1.0]) {
        let cells: Vec<&str> = line.split(',').collect();
        let (count, _) = paircorr_core::paircorr::pair_correlation_values(
            &values,
            s,
            paircorr_core::paircorr::Convention::NearestInteger,
            1.4142135,
        )
        .unwrap();
        assert_eq!(cells[1].parse::<u64>().unwrap(), count);
        assert_eq!(cells[0].parse::<f64>().unwrap(), s);
    }
}

#[test]
fn energy_and_slope() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("w.txt");
    stdout(&paircorr(&[
        "gen",
        "--spec",
        "power:alpha=1,theta=1",
        "--n",
        "6",
        "--out",
        path(&file),
    ]));
    let out = stdout(&paircorr(&[
        "energy",
        "--in",
        path(&file),
        "--gamma",
        "0.5",
        "--method",
        "brute",
    ]));
    // consecutive integers: quadruples with n1 + n3 = n2 + n4, 146 for N = 6
    let cells: Vec<String> = out
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .map(String::from)
        .collect();
    assert_eq!(cells[0], "6");
    assert_eq!(cells[1].parse::<f64>().unwrap(), 0.5);
    assert_eq!(cells[3], "146");
    let fit = json(&paircorr(&[
        "energy-slope",
        "--spec",
        "power:alpha=1,theta=1",
        "--ns",
        "8,16,32",
    ]));
    assert!((fit["slope"].as_f64().unwrap() - 3.0).abs() < 0.2);
}

#[test]
fn minima_json() {
    let v = json(&paircorr(&[
        "minima", "--x1", "1", "--x2", "1", "--n", "0.5", "--k", "1e9",
    ]));
    assert_eq!(v["lambda1"], 1.0);
    assert_eq!(v["lambda2"], 1.0);
    assert_eq!(v["area"], 4.0);
    assert_eq!(v["minkowski"], 4.0);
    for key in ["v1", "v2"] {
        assert_eq!(v[key].as_array().unwrap().len(), 2);
    }
}

#[test]
fn moment_and_mean_value() {
    let v = json(&paircorr(&[
        "moment", "--poly", "1,0,0,0", "--n", "2", "--pow", "12",
    ]));
    assert!((v["value"].as_f64().unwrap() - 924.0).abs() < 1e-6);
    assert!(v["errorEstimate"].as_f64().unwrap() <= 1e-6);

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("block.txt");
    std::fs::write(&file, "# block\n1.5,2\n1.75 1\n").unwrap();
    let v = json(&paircorr(&[
        "mv",
        "--in",
        path(&file),
        "--bign",
        "3",
        "--t",
        "6",
    ]));
    let (value, exact) = (
        v["value"].as_f64().unwrap(),
        v["closedForm"].as_f64().unwrap(),
    );
    assert!((value - exact).abs() <= 1e-6 * exact);
    let s = json(&paircorr(&[
        "scount",
        "--in",
        path(&file),
        "--m",
        "3",
        "--k",
        "1000",
    ]));
    // saturated: M^2 (sum of weights)^2
    assert_eq!(s["count"], 81);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = paircorr(&["verify", "--battery", "nope", "--out", path(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(paircorr(&["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(paircorr(&["frobnicate"]).status.code(), Some(1));
    let missing = dir.path().join("missing.txt");
    assert_eq!(
        paircorr(&["ppc", "--in", path(&missing)]).status.code(),
        Some(2)
    );
    assert_eq!(
        paircorr(&["gen", "--spec", "poly:1,0", "--n", "0", "--out", "x"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(paircorr(&["--help"]).status.code(), Some(0));
}

#[test]
fn verify_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("geo.cfg");
    std::fs::write(&config, "# small sweep\nbodies = 30\nlog10_n_max = 2\n").unwrap();
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let args = [
            "--threads",
            threads,
            "verify",
            "--battery",
            "geometry-sweep",
            "--seed",
            "7",
            "--config",
            path(&config),
            "--out",
            path(&out),
        ];
        let text = stdout(&paircorr(&args));
        assert!(text.contains("PASS minkowski_window"));
        out
    };
    let (a, b) = (run("1", "a"), run("4", "b"));
    for file in ["geometry-sweep.csv", "summary.json"] {
        let x = std::fs::read(a.join(file)).unwrap();
        let y = std::fs::read(b.join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
    let summary: Value =
        serde_json::from_slice(&std::fs::read(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["flags"]["seed"], "7");
    assert_eq!(
        summary["metrics"]["minkowski_ratios"]
            .as_array()
            .unwrap()
            .len(),
        30
    );
}

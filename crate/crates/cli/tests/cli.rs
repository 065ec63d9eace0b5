//! End-to-end tests driving the built binary.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sddequant"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn reference() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/reference.conf")
        .display()
        .to_string()
}

fn json_num(json: &str, key: &str) -> f64 {
    let pat = format!("\"{key}\":");
    let at = json.find(&pat).unwrap_or_else(|| panic!("no {key} in {json}"));
    let rest = &json[at + pat.len()..];
    let end = rest.find([',', '}']).unwrap();
    rest[..end].parse().unwrap_or_else(|_| panic!("bad number for {key} in {json}"))
}

const CONSTANT_VOL: &str = "\
[model]
mu = 0.001
a = 0.5
b = 0.5
r = 0.05
K = 100
T = 1
phi0 = 100

[vol]
form = constant
sigma0 = 0.2

[run]
steps_per_l = 16
n_paths = 4000
seed = 7
";

#[test]
fn price_quotes_are_byte_identical_across_runs() {
    let cfg = reference();
    let first = run(&["--command", "price", "--config", &cfg]);
    let second = run(&["--command", "price", "--config", &cfg]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, second.stdout);
    assert!(stdout_str(&first).contains("\"branch\":\"monte-carlo\""));
}

#[test]
fn closed_form_branch_matches_black_scholes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("const.conf");
    std::fs::write(&path, CONSTANT_VOL).unwrap();
    // t0 = T - l/2 sits inside the closed-form window.
    let out = run(&["--command", "price", "--config", path.to_str().unwrap(), "--t0", "0.75"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout_str(&out);
    assert!(text.contains("\"branch\":\"closed-form\""));
    assert!(text.contains("\"stderr\":null"));
    let value = json_num(&text, "value");
    let reference = sddequant::classical_bs(100.0, 100.0, 0.05, 0.2, 0.25).unwrap();
    assert!(
        (value / reference - 1.0).abs() <= 1e-12,
        "cli {value} vs classical {reference}"
    );
}

#[test]
fn monte_carlo_branch_reports_its_uncertainty() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("const.conf");
    std::fs::write(&path, CONSTANT_VOL).unwrap();
    let out = run(&["--command", "price", "--config", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    assert!(text.contains("\"branch\":\"monte-carlo\""));
    let value = json_num(&text, "value");
    let lo = json_num(&text, "ci95_lo");
    let hi = json_num(&text, "ci95_hi");
    let stderr = json_num(&text, "stderr");
    assert!(lo < value && value < hi);
    assert!(stderr > 0.0);
    assert_eq!(json_num(&text, "n_paths") as u64, 4000);
}

#[test]
fn validate_accepts_the_reference_config() {
    let out = run(&["--command", "validate", "--config", &reference()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_str(&out).contains("\"all_pass\":true"));
}

#[test]
fn simulate_is_deterministic_and_covers_the_grid() {
    let cfg = reference();
    let args = ["--command", "simulate", "--config", &cfg, "--paths", "3", "--measure", "q"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let text = stdout_str(&first);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("path_index,t,S"));
    // Reference grid: h = 0.25/16, t in [-0.5, 1] = 97 points per path.
    assert_eq!(text.lines().count(), 1 + 3 * 97);
    assert!(text.lines().nth(1).unwrap().starts_with("0,-5.0000000000000000e-1,"));
}

#[test]
fn hedge_emits_series_file_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("series.csv");
    let out = run(&[
        "--command", "hedge", "--config", &reference(),
        "--paths", "200", "--out", series.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = stdout_str(&out);
    assert!(json_num(&summary, "rms_error") > 0.0);
    assert_eq!(json_num(&summary, "n_paths") as u64, 200);
    let csv = std::fs::read_to_string(&series).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,S,stock_units,bond_units,value"));
    // Hedge window [T - l, T]: 16 steps on the reference grid, 17 rows.
    assert_eq!(csv.lines().count(), 1 + 17);
    assert!(csv.lines().nth(1).unwrap().starts_with("7.5000000000000000e-1,"));
}

#[test]
fn history_file_changes_the_quote() {
    let dir = tempfile::tempdir().unwrap();
    let hist = dir.path().join("hist.csv");
    // Rising past ending at 110, covering [t0 - L, t0] = [-0.25, 0.25].
    std::fs::write(&hist, "t,S\n-0.3,90\n0,100\n0.25,110\n").unwrap();
    let cfg = reference();
    let flat = run(&["--command", "price", "--config", &cfg, "--t0", "0.25"]);
    let seen = run(&[
        "--command", "price", "--config", &cfg, "--t0", "0.25",
        "--history", hist.to_str().unwrap(),
    ]);
    assert!(flat.status.success() && seen.status.success());
    let v_flat = json_num(&stdout_str(&flat), "value");
    let v_seen = json_num(&stdout_str(&seen), "value");
    assert!((v_flat - v_seen).abs() > 1e-3, "history ignored: {v_flat} vs {v_seen}");
}

#[test]
fn schema_flag_documents_the_interface() {
    let out = run(&["--schema"]);
    assert!(out.status.success());
    let text = stdout_str(&out);
    for needle in ["[model]", "[vol]", "[run]", "exit codes", "steps_per_l"] {
        assert!(text.contains(needle), "schema lacks {needle}");
    }
}

#[test]
fn failure_modes_map_to_documented_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.display().to_string()
    };
    let cfg = reference();
    let bad_syntax = write("syntax.conf", "[model]\nmu 0.001\n");
    let no_strike = write(
        "nok.conf",
        &std::fs::read_to_string(&cfg).unwrap().replace("K    = 100\n", ""),
    );
    let incomm = write(
        "incomm.conf",
        &std::fs::read_to_string(&cfg).unwrap().replace("T    = 1\n", "T = 0.93\n"),
    );
    let short_hist = write("short.csv", "t,S\n-0.1,100\n0,100\n");

    let cases: Vec<(Vec<&str>, i32, &str)> = vec![
        (vec!["--command", "price"], 2, "missing --config"),
        (vec!["--command", "price", "--config", &bad_syntax], 3, "syntax"),
        (vec!["--command", "price", "--config", &no_strike], 4, "missing K"),
        (
            vec!["--command", "price", "--config", &cfg, "--paths", "101", "--antithetic"],
            4,
            "odd antithetic paths",
        ),
        (vec!["--command", "price", "--config", &incomm], 5, "incommensurable T"),
        (
            vec!["--command", "price", "--config", &cfg, "--t0", "0.303"],
            5,
            "incommensurable t0",
        ),
        (
            vec!["--command", "price", "--config", &cfg, "--history", &short_hist],
            6,
            "short history",
        ),
        (vec!["--command", "price", "--config", &cfg, "--t0", "2.0"], 7, "t0 past maturity"),
        (vec!["--command", "price", "--config", "/nonexistent.conf"], 11, "missing file"),
    ];
    for (args, want, label) in cases {
        let out = run(&args);
        let got = out.status.code().unwrap_or(-1);
        assert_eq!(got, want, "{label}: stderr = {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn missing_strike_diagnostic_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("nok.conf");
    let text = std::fs::read_to_string(reference()).unwrap().replace("K    = 100\n", "");
    std::fs::write(&p, text).unwrap();
    let out = run(&["--command", "price", "--config", p.to_str().unwrap()]);
    let err = String::from_utf8_lossy(&out.stderr).to_string();
    assert!(err.contains("`K`"), "{err}");
}

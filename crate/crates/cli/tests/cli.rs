use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn lipkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipkit"))
        .args(args)
        .current_dir(fixtures())
        .output()
        .expect("spawn lipkit")
}

fn stdout(args: &[&str]) -> String {
    let out = lipkit(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lipkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn maximal_extension_on_two_points() {
    let out = stdout(&[
        "extend", "--anchors", "line2_anchors.csv", "--queries", "line2_queries.csv", "--mode", "maximal", "--lambda", "auto",
    ]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("query_id,phi_minus,phi_plus,mid,bounded,lambda_used"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[2], "1");
    assert_eq!(row[5], "1");
    assert!(lines.next().is_none());
}

#[test]
fn envelope_values_on_three_points() {
    let out = stdout(&["envelope", "--domain", "three_domain.json", "--anchors", "three_phi.csv", "--kappa", "1,2,5"]);
    let values: Vec<Vec<String>> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    let got: Vec<&str> = values.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(got, ["0", "1", "1", "0", "2", "1", "0", "5", "1"]);
    assert!(values.iter().take(3).all(|r| r[1] == "1"));
}

#[test]
fn missing_kappa_is_a_validation_error() {
    let out = lipkit(&["envelope", "--domain", "three_domain.json", "--anchors", "three_phi.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_file_is_an_io_error() {
    let out = lipkit(&["extend", "--anchors", "no_such_file.csv", "--mode", "minimal"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_command_and_bad_flag() {
    assert_eq!(lipkit(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lipkit(&["extend", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(lipkit(&["--help"]).status.code(), Some(0));
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_lipkit"))
        .args(["pou", "--domain", "three_domain.json", "--cover", "three_cover.json"])
        .current_dir(fixtures())
        .env("LIPKIT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["approx", "uniform", "--anchors", "wave_phi.csv", "--eps", "0.05"];
    let run = |n: &str| {
        Command::new(env!("CARGO_BIN_EXE_lipkit"))
            .args(args)
            .current_dir(fixtures())
            .env("LIPKIT_THREADS", n)
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn config_file_merges_with_flags_winning() {
    let cfg = scratch("envelope.json");
    std::fs::write(
        &cfg,
        r#"{"command":"envelope","domain":"three_domain.json","anchors":"three_phi.csv","kappa":[1,2]}"#,
    )
    .unwrap();
    let from_file = stdout(&["envelope", "--config", cfg.to_str().unwrap()]);
    assert_eq!(from_file.lines().count(), 1 + 6);
    let overridden = stdout(&["envelope", "--config", cfg.to_str().unwrap(), "--kappa", "5"]);
    let vals: Vec<&str> = overridden.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(vals, ["0", "5", "1"]);
}

#[test]
fn unknown_config_key_is_rejected() {
    let cfg = scratch("bad.json");
    std::fs::write(&cfg, r#"{"kapa":[1]}"#).unwrap();
    assert_eq!(lipkit(&["envelope", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn plot_has_one_row_per_series_point() {
    let plot = scratch("plot.csv");
    stdout(&[
        "envelope", "--domain", "three_domain.json", "--anchors", "three_phi.csv", "--kappa", "1,2,5", "--plot",
        plot.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&plot).unwrap();
    assert_eq!(text.lines().count(), 1 + 9);
    assert!(text.contains("kappa=5"));
}

#[test]
fn out_flag_writes_file() {
    let path = scratch("pou.csv");
    let printed = stdout(&["pou", "--domain", "three_domain.json", "--cover", "three_cover.json"]);
    let written = stdout(&[
        "pou", "--domain", "three_domain.json", "--cover", "three_cover.json", "--out", path.to_str().unwrap(),
    ]);
    assert!(written.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), printed);
}

#[test]
fn partition_of_worked_example() {
    let out = stdout(&["pou", "--domain", "three_domain.json", "--cover", "three_cover.json"]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("point_id,set_index,eta_n,gamma_n,xi"));
    let xi: Vec<f64> = lines.map(|l| l.split(',').nth(4).unwrap().parse().unwrap()).collect();
    let want = [1.0, 0.0, 11.0 / 14.0, 3.0 / 14.0, 0.0, 1.0];
    assert_eq!(xi.len(), want.len());
    for (g, w) in xi.iter().zip(want) {
        assert!((g - w).abs() < 1e-12, "{xi:?}");
    }
}

#[test]
fn empty_query_file_gives_header_only() {
    let q = scratch("empty.csv");
    std::fs::write(&q, "x\n").unwrap();
    let out = stdout(&["extend", "--anchors", "line2_anchors.csv", "--queries", q.to_str().unwrap(), "--mode", "minimal"]);
    assert_eq!(out, "query_id,phi_minus,phi_plus,mid,bounded,lambda_used\n");
}

#[test]
fn monotone_matches_known_sequence() {
    let out = stdout(&[
        "approx", "monotone", "--domain", "three_domain.json", "--anchors", "three_phi.csv", "--n", "1,2,5",
    ]);
    let vals: Vec<&str> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(vals, ["0", "1", "1", "0", "2", "1", "0", "5", "1"]);
}

#[test]
fn check_reports_json_verdicts() {
    let out = stdout(&[
        "check", "--anchors", "mw_anchors.csv", "--queries", "mw_queries.csv", "--mode", "minimal", "--delta", "0.1", "--k",
        "1000",
    ]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    for key in ["extension", "sandwich", "lipschitz_bound"] {
        assert_eq!(v["verdicts"][key]["status"], "pass", "{key}: {}", v["verdicts"][key]);
    }
    assert!(v["global_constant"].as_f64().unwrap() > 0.0);
    assert_eq!(v["small_scale"].as_array().unwrap().len(), 1);
}

#[test]
fn inadmissible_lambda_is_rejected() {
    let out = lipkit(&["extend", "--anchors", "line2_anchors.csv", "--mode", "minimal", "--lambda", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

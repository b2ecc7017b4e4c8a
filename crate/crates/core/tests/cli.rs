use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn hillmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hillmap")).args(args).env_remove("HILLMAP_OUT_DIR").output().unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn coefficients_of_f5() {
    let out = hillmap(&["coeffs", "--m", "5"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "1 0 -5 0 5 0\n");
}

#[test]
fn free_band_edges() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("b.csv");
    let out =
        hillmap(&["bands", "--potential", "free", "--l", "1", "--lambda-max", "40", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let rows = data_rows(&text);
    let expected = [(0.0, PI * PI), (PI * PI, 4.0 * PI * PI), (4.0 * PI * PI, 40.0)];
    assert_eq!(rows.len(), expected.len());
    for (row, (lo, hi)) in rows.iter().zip(expected) {
        assert!((row[1].parse::<f64>().unwrap() - lo).abs() < 1e-6);
        assert!((row[2].parse::<f64>().unwrap() - hi).abs() < 1e-6);
    }
    assert!(text.contains("# potential = free"));
}

#[test]
fn ensemble_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let out = hillmap(&[
            "ensemble",
            "--m",
            "3",
            "--samples",
            "100000",
            "--iters",
            "4",
            "--seed",
            "42",
            "--threads",
            threads,
            "--no-timestamp",
            "--format",
            "json",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read(path).unwrap()
    };
    let a = run("a.json", "1");
    let b = run("a.json", "1");
    let c = run("c.json", "3");
    assert_eq!(a, b);
    let strip = |bytes: &[u8]| {
        let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
        v["config"].as_object_mut().unwrap().remove("threads");
        v["config"].as_object_mut().unwrap().remove("out");
        v
    };
    assert_eq!(strip(&a), strip(&c));
    let doc: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(doc["config"]["seed"], "42");
    assert_eq!(doc["data"]["distances"].as_array().unwrap().len(), 5);
    assert!(doc.get("generated_unix").is_none());
}

#[test]
fn timestamp_is_present_by_default() {
    let out = hillmap(&["coeffs", "--m", "3", "--format", "json", "--out", "/dev/stdout"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("generated_unix"), "{text}");
}

#[test]
fn malformed_flags_print_usage_and_exit_one() {
    for args in [&["coeffs", "--m", "x"][..], &["nonsense"], &["bands", "--unknown", "1"]] {
        let out = hillmap(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("Usage:"), "{args:?}");
    }
}

#[test]
fn domain_errors_exit_one_and_nonconvergence_exits_two() {
    let escape = hillmap(&["orbit", "--map", "logistic", "--r", "4.5", "--x0", "0.5", "--steps", "5"]);
    assert_eq!(escape.status.code(), Some(1));
    let starved = hillmap(&["bands", "--max-steps", "5"]);
    assert_eq!(starved.status.code(), Some(2));
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# f_m degree\nm = 4\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = hillmap(&["coeffs", "--config", cfg]);
    assert_eq!(String::from_utf8(from_file.stdout).unwrap(), "1 0 -4 0 2\n");
    let flag_wins = hillmap(&["coeffs", "--config", cfg, "--m", "2"]);
    assert_eq!(String::from_utf8(flag_wins.stdout).unwrap(), "1 0 -2\n");
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "m = 4\nsamples = 10\n").unwrap();
    let out = hillmap(&["coeffs", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("samples"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_hillmap")).args(args).env("HILLMAP_OUT_DIR", dir.path()).output().unwrap()
    };
    assert!(run(&["coeffs", "--m", "3", "--no-timestamp"]).status.success());
    let default = std::fs::read_to_string(dir.path().join("coeffs.csv")).unwrap();
    assert!(default.contains("# m = 3"));
    assert!(run(&["integral-sweep", "--points", "5", "--out", "sub/sweep.csv"]).status.success());
    assert!(Path::new(&dir.path().join("sub/sweep.csv")).exists());
}

#[test]
fn mathieu_pipeline_reports_lambda0() {
    let out = hillmap(&["mathieu", "--x0", "0.3", "--n-max", "3", "--format", "json", "--no-timestamp"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let lambda0 = doc["data"]["lambda0"].as_f64().unwrap();
    assert!(lambda0 > -10.0 && lambda0 < -9.0);
    for row in doc["data"]["rows"].as_array().unwrap() {
        assert!(row["abs_diff"].as_f64().unwrap() < 1e-4);
    }
}

#[test]
fn remaining_subcommands_run() {
    let cases: [&[&str]; 5] = [
        &["orbit", "--map", "tent", "--m", "3", "--x0", "0.1", "--steps", "3"],
        &["density-evolve", "--m", "3", "--steps", "2", "--resolution", "256"],
        &["lyapunov", "--m", "2", "--method", "orbit", "--n", "10000"],
        &["integral-sweep", "--a-min", "-3", "--a-max", "3", "--points", "7"],
        &["mixing-check", "--m", "3", "--n", "2", "--a-hi", "1/3", "--b-lo", "1/3", "--b-hi", "2/3"],
    ];
    for args in cases {
        let out = hillmap(args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.starts_with(&format!("# hillmap {}", args[0])), "{text}");
    }
    let mixing = hillmap(&["mixing-check", "--m", "3", "--n", "2", "--a-hi", "1/3", "--b-lo", "1/3", "--b-hi", "2/3"]);
    let rows = data_rows(&String::from_utf8(mixing.stdout).unwrap());
    assert_eq!(rows[0][2], "0");
}

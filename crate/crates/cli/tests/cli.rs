use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const REPORT_FIELDS: [&str; 17] = [
    "value",
    "lower_bound",
    "upper_bound",
    "mode",
    "eps",
    "g",
    "num_rects",
    "boundary_points",
    "union_boundary_points",
    "pairing_calls",
    "elapsed_ms",
    "n",
    "m",
    "d",
    "exact_value",
    "exact_elapsed_ms",
    "ratio",
];

fn trajdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trajdist"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, family: &str, n: usize, seed: u64, name: &str) -> PathBuf {
    let path = dir.path().join(name);
    let seed = seed.to_string();
    let n = n.to_string();
    json(&trajdist(&[
        "gen",
        "--family",
        family,
        "--n",
        &n,
        "--seed",
        &seed,
        "-o",
        s(&path),
    ]));
    path
}

fn assert_schema(v: &Value) {
    let obj = v.as_object().unwrap();
    assert_eq!(obj.len(), REPORT_FIELDS.len(), "{v}");
    for f in REPORT_FIELDS {
        assert!(obj.contains_key(f), "missing {f}");
    }
    assert!(v["lower_bound"].as_f64().unwrap() <= v["value"].as_f64().unwrap());
    assert!(v["value"].as_f64().unwrap() <= v["upper_bound"].as_f64().unwrap());
}

#[test]
fn dtw_of_identical_files_is_zero() {
    let dir = TempDir::new().unwrap();
    let a = write(&dir, "a.csv", "0,0\n1,0\n2,1\n");
    let v = json(&trajdist(&["dtw", s(&a), s(&a), "--eps", "0.1"]));
    assert_eq!(v["value"], 0.0);
    assert_eq!(v["m"], 3);
    assert_eq!(v["d"], 2);
    assert_schema(&v);
}

#[test]
fn exact_flag_reports_ratio() {
    let dir = TempDir::new().unwrap();
    let a = gen(&dir, "packed", 120, 1, "a.csv");
    let b = gen(&dir, "packed", 100, 2, "b.json");
    let v = json(&trajdist(&[
        "dtw",
        s(&a),
        s(&b),
        "--eps",
        "0.25",
        "--exact",
    ]));
    assert_schema(&v);
    let exact = v["exact_value"].as_f64().unwrap();
    let ratio = v["ratio"].as_f64().unwrap();
    assert!((ratio - 1.0).abs() <= 0.25, "{v}");
    assert!((ratio * exact - v["value"].as_f64().unwrap()).abs() < 1e-9 * exact);
    assert_eq!(v["mode"], "approx");
    assert!(v["boundary_points"].as_u64().unwrap() > 0);
    assert!(v["g"].is_null());
    assert!(v["union_boundary_points"].is_null());

    let v = json(&trajdist(&[
        "ed",
        s(&a),
        s(&b),
        "--g",
        "2",
        "--eps",
        "0.25",
        "--exact",
    ]));
    assert_schema(&v);
    assert_eq!(v["g"], 2.0);
    assert!((v["ratio"].as_f64().unwrap() - 1.0).abs() <= 0.25, "{v}");

    let v = json(&trajdist(&["dfr", s(&a), s(&b), "--exact"]));
    assert_schema(&v);
    let r = v["ratio"].as_f64().unwrap();
    assert!((1.0 - 1e-9..=2.0 + 1e-9).contains(&r), "{v}");
    assert!(v["eps"].is_null());
}

#[test]
fn generated_curve_against_itself_is_zero() {
    let dir = TempDir::new().unwrap();
    for family in ["packed", "bounded", "backbone"] {
        for ext in ["csv", "json"] {
            let a = gen(&dir, family, 200, 7, &format!("{family}.{ext}"));
            let v = json(&trajdist(&["dtw", s(&a), s(&a), "--eps", "0.25"]));
            assert_eq!(v["value"], 0.0, "{family} {ext}");
            assert_eq!(v["n"], 200);
            let v = json(&trajdist(&["ed", s(&a), s(&a), "--eps", "0.25"]));
            assert_eq!(v["value"], 0.0, "{family} {ext}");
        }
    }
}

#[test]
fn csv_and_json_outputs_agree() {
    let dir = TempDir::new().unwrap();
    let a = gen(&dir, "backbone", 80, 3, "a.csv");
    let b = gen(&dir, "backbone", 80, 3, "a.json");
    let v = json(&trajdist(&["dtw", s(&a), s(&b), "--eps", "0.5"]));
    assert_eq!(v["value"], 0.0);
    let renamed = dir.path().join("b.txt");
    std::fs::copy(&b, &renamed).unwrap();
    let v = json(&trajdist(&[
        "dtw",
        s(&renamed),
        s(&renamed),
        "--eps",
        "0.5",
        "--format",
        "json",
    ]));
    assert_eq!(v["value"], 0.0);
    assert_eq!(v["n"], 80);
}

#[test]
fn bench_emits_rows() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("report.json");
    let v = json(&trajdist(&[
        "bench",
        "--family",
        "packed",
        "--eps",
        "0.25",
        "--sizes",
        "128,256",
        "-o",
        s(&out),
    ]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for (row, n) in rows.iter().zip([128, 256]) {
        assert_eq!(row["n"], n);
        assert!(row["boundary_points"].as_u64().unwrap() > 0);
        assert!(row["elapsed_ms"].as_f64().unwrap() >= 0.0);
        assert!(row["exact_value"].as_f64().is_some());
    }
    assert!(v["slope_boundary_points"].as_f64().is_some());
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(saved, v);
}

#[test]
fn bench_is_deterministic_apart_from_timings() {
    let dir = TempDir::new().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_trajdist"))
            .env("TRAJDIST_THREADS", threads)
            .args([
                "bench",
                "--family",
                "backbone",
                "--eps",
                "0.5",
                "--sizes",
                "64,96",
                "--seed",
                "4",
                "--skip-exact",
                "-o",
                s(&out),
            ])
            .output()
            .unwrap();
        let mut v = json(&o);
        for row in v["rows"].as_array_mut().unwrap() {
            for k in ["elapsed_ms", "ed_elapsed_ms"] {
                row[k] = Value::Null;
            }
        }
        v["threads"] = Value::Null;
        v
    };
    assert_eq!(run("a.json", "1"), run("b.json", "2"));
}

#[test]
fn input_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let good = write(&dir, "good.csv", "0,0\n1,0\n");
    let ragged = write(&dir, "ragged.csv", "0,0\n1,0,2\n");
    let out = trajdist(&["dtw", s(&ragged), s(&good), "--eps", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ragged.csv:2"));

    let nan = write(&dir, "nan.csv", "0,0\nNaN,1\n");
    assert_eq!(
        trajdist(&["dtw", s(&nan), s(&good), "--eps", "0.1"])
            .status
            .code(),
        Some(1)
    );

    let d3 = write(&dir, "d3.csv", "0,0,0\n");
    assert_eq!(
        trajdist(&["dtw", s(&d3), s(&good), "--eps", "0.1"])
            .status
            .code(),
        Some(1)
    );

    let missing = dir.path().join("missing.csv");
    assert_eq!(
        trajdist(&["dtw", s(&missing), s(&good), "--eps", "0.1"])
            .status
            .code(),
        Some(1)
    );

    assert_eq!(
        trajdist(&["dtw", s(&good), s(&good), "--eps", "1.5"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        trajdist(&["ed", s(&good), s(&good), "--eps", "0.5", "--g", "0"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn usage_errors_exit_one() {
    let out = trajdist(&["dtw", "a.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(trajdist(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(trajdist(&[]).status.code(), Some(1));
    assert_eq!(trajdist(&["--help"]).status.code(), Some(0));
}

//! The `qichan` binary end to end: files in, reports and CSV out.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qichan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qichan")).args(args).env_remove("QICHAN_SEED").output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

/// |i⟩⟨i| for i < d, flattened row-major as [re, im] pairs.
fn unit_json(d: usize, i: usize) -> String {
    let cells: Vec<&str> = (0..d * d).map(|k| if k == i * d + i { "[1,0]" } else { "[0,0]" }).collect();
    format!("[{}]", cells.join(","))
}

fn dephasing_fixture(dir: &TempDir, d: usize) -> PathBuf {
    let els: Vec<String> = (0..d).map(|i| unit_json(d, i)).collect();
    write(dir, "dephasing.json", &format!(r#"{{"dim_in":{d},"dim_out":{d},"elements":[{}]}}"#, els.join(",")))
}

fn as_real_matrix(v: &Value) -> Vec<Vec<f64>> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|row| row.as_array().unwrap().iter().map(|z| z[0].as_f64().unwrap()).collect())
        .collect()
}

#[test]
fn pointer_on_dephasing_lists_computational_projectors() {
    let dir = TempDir::new().unwrap();
    let ch = dephasing_fixture(&dir, 3);
    let out = qichan(&["pointer", s(&ch)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["command"], "pointer");
    let mut found: Vec<usize> = r["results"]["pointer_effects"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            let m = as_real_matrix(e);
            let i = (0..3).find(|&i| (m[i][i] - 1.0).abs() < 1e-9).expect("a diagonal unit");
            for (a, row) in m.iter().enumerate() {
                for (b, &x) in row.iter().enumerate() {
                    let want = if a == i && b == i { 1.0 } else { 0.0 };
                    assert!((x - want).abs() < 1e-9);
                }
            }
            i
        })
        .collect();
    found.sort();
    assert_eq!(found, vec![0, 1, 2]);
}

#[test]
fn kl_on_bitflip_code_passes_and_emits_lambda() {
    let dir = TempDir::new().unwrap();
    let ch = dir.path().join("bitflip3.json");
    assert_eq!(qichan(&["example", "bitflip3", "--channel-out", s(&ch)]).status.code(), Some(0));
    let out = qichan(&["kl", s(&ch), "--code-states", "0,7"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["results"]["passes"], true);
    let lambda = r["results"]["lambda"].as_array().unwrap();
    assert_eq!(lambda.len(), 4);
    // λ_ii = p_i for the fixture's probabilities (0.4, 0.2, 0.2, 0.2)
    let diag: Vec<f64> = (0..4).map(|i| lambda[i][i][0].as_f64().unwrap()).collect();
    for (got, want) in diag.iter().zip([0.4, 0.2, 0.2, 0.2]) {
        assert!((got - want).abs() < 1e-12, "{diag:?}");
    }

    // adding a phase error breaks the code: exit 2, not a crash
    let z_fixture = {
        let text = std::fs::read_to_string(&ch).unwrap();
        let mut v: Value = serde_json::from_str(&text).unwrap();
        let els = v["elements"].as_array_mut().unwrap();
        // scale the identity element into √0.2·1 and add √0.2·Z₁
        let z: Vec<Value> = (0..64)
            .map(|k| {
                let (r, c) = (k / 8, k % 8);
                let x = if r != c { 0.0 } else if r < 4 { 0.2f64.sqrt() } else { -(0.2f64.sqrt()) };
                serde_json::json!([x, 0.0])
            })
            .collect();
        let id: Vec<Value> =
            (0..64).map(|k| serde_json::json!([if k / 8 == k % 8 { 0.2f64.sqrt() } else { 0.0 }, 0.0])).collect();
        els[0] = Value::Array(id);
        els.push(Value::Array(z));
        write(&dir, "bitflip_z.json", &v.to_string())
    };
    let out = qichan(&["kl", s(&z_fixture), "--code-states", "0,7"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["results"]["passes"], false);
}

#[test]
fn sweep_csv_has_one_row_per_time_projector_outcome() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = qichan(&["sweep", "--n", "4", "--period", "1", "--points", "11", "--format", "csv", "--out", s(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,i,m,gamma"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11 * 4 * 4);
    // at t = T the sweep is complete dephasing: γ = δ_im
    for row in rows.iter().filter(|r| r.starts_with("1,")) {
        let f: Vec<f64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        let want = if f[1] == f[2] { 1.0 } else { 0.0 };
        assert!((f[3] - want).abs() < 1e-9, "{row}");
    }
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.csv.json")).unwrap()).unwrap();
    assert_eq!(side["results"]["rows"], 176);
}

#[test]
fn exit_codes_separate_failed_checks_from_errors() {
    let dir = TempDir::new().unwrap();
    let good = dephasing_fixture(&dir, 2);
    assert_eq!(qichan(&["validate", s(&good)]).status.code(), Some(0));

    let non_tp = write(&dir, "half.json", r#"{"dim_in":1,"dim_out":1,"elements":[[[0.5,0]]]}"#);
    assert_eq!(qichan(&["validate", s(&non_tp)]).status.code(), Some(2));
    let out = qichan(&["preserved", s(&non_tp)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Σ E†E"));

    let bad_schema = write(&dir, "bad.json", r#"{"dim_in":1,"dim_out":1,"elements":[[[1,0,0]]]}"#);
    let out = qichan(&["preserved", s(&bad_schema)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("elements"));

    assert_eq!(qichan(&["preserved", s(&dir.path().join("missing.json"))]).status.code(), Some(1));
    assert_eq!(qichan(&["example", "no-such-example"]).status.code(), Some(1));
}

#[test]
fn reports_are_byte_identical_for_identical_requests() {
    let dir = TempDir::new().unwrap();
    let obs = write(
        &dir,
        "x.json",
        r#"{"dim":2,"effects":[[[0.75,0],[0,0],[0,0],[0.25,0]],[[0.25,0],[0,0],[0,0],[0.75,0]]]}"#,
    );
    let a = qichan(&["capacity", s(&obs), "--seed", "7"]);
    let b = qichan(&["capacity", s(&obs), "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    // BSC with crossover 1/4: 1 − h(1/4)
    let h = -(0.25f64 * 0.25f64.log2() + 0.75 * 0.75f64.log2());
    assert!((report(&a)["results"]["bits"].as_f64().unwrap() - (1.0 - h)).abs() < 1e-6);
}

#[test]
fn seed_defaults_to_environment_variable() {
    let dir = TempDir::new().unwrap();
    let ch = dephasing_fixture(&dir, 2);
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_qichan"));
        cmd.args(["preserved", s(&ch)]).args(extra).env_remove("QICHAN_SEED");
        if let Some(v) = env {
            cmd.env("QICHAN_SEED", v);
        }
        report(&cmd.output().unwrap())["seed"].as_u64().unwrap()
    };
    assert_eq!(run(None, &[]), 0);
    assert_eq!(run(Some("42"), &[]), 42);
    assert_eq!(run(Some("42"), &["--seed", "3"]), 3);
}

#[test]
fn every_catalogue_example_verifies() {
    let out = qichan(&["example", "all", "--samples", "16"]);
    let r = report(&out);
    let failed: Vec<&String> =
        r["results"].as_object().unwrap().iter().filter(|(_, v)| v["passed"] != true).map(|(k, _)| k).collect();
    assert!(failed.is_empty(), "failed examples: {failed:?}");
    assert_eq!(out.status.code(), Some(0));
}

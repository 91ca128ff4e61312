use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chsh_core::{chsh_expectation, CorrelationMatrix, MeasurementVectors};
use serde_json::Value;
use tempfile::TempDir;

fn chsh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chsh"))
        .args(args)
        .env_remove("CHSH_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_state(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, json).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| {
            let mut it = l.split_whitespace();
            (it.next() == Some(key)).then(|| it.collect::<Vec<_>>().join(" "))
        })
        .unwrap_or_else(|| panic!("no {key} in\n{text}"))
}

const MIXED_BELL: &str = r#"{"type":"mixed","matrix":[
    [[0.35,0],[0,0],[0,0],[0.3,0.1]],
    [[0,0],[0.15,0],[0,0],[0,0]],
    [[0,0],[0,0],[0.15,0],[0,0]],
    [[0.3,-0.1],[0,0],[0,0],[0.35,0]]]}"#;

#[test]
fn optimize_schmidt_text() {
    let dir = TempDir::new().unwrap();
    let st = write_state(&dir, "s.json", r#"{"type":"schmidt","concurrence":0.5}"#);
    let o = chsh(&["optimize", "--state", s(&st), "--gamma", "0", "--theta", "0"]);
    assert!(o.status.success());
    assert_eq!(field(&stdout(&o), "max_abs_s"), "2.23606798");
}

#[test]
fn optimize_json_round_trip() {
    let dir = TempDir::new().unwrap();
    let states = [
        r#"{"type":"schmidt","concurrence":0.5}"#,
        r#"{"type":"schmidt","concurrence":1.0}"#,
        r#"{"type":"werner","p":0.8}"#,
        r#"{"type":"mixture","p":0.3333333333333333,"concurrence_psi":0.6,"concurrence_phi":0.9}"#,
        r#"{"type":"pure","amplitudes":[[0.5,0],[0.5,0.1],[0.1,-0.5],[0.4,0.2645751311064591]]}"#,
        MIXED_BELL,
    ];
    for (i, text) in states.iter().enumerate() {
        let st = write_state(&dir, &format!("{i}.json"), text);
        for (gamma, sign, expected_sign) in [("0.3", "positive", 1.0), ("-2.1", "negative", -1.0)] {
            let o = chsh(&["optimize", "--state", s(&st), "--gamma", gamma, "--sign", sign, "--format", "json"]);
            let v = json(&o);
            let k: [[f64; 3]; 3] = serde_json::from_value(v["correlation_matrix"].clone()).unwrap();
            let m: MeasurementVectors = serde_json::from_value(v["vectors"].clone()).unwrap();
            let m = MeasurementVectors::new(m.q, m.r, m.s, m.t).unwrap();
            let value = chsh_expectation(&CorrelationMatrix::new(k).unwrap(), &m);
            let max = v["max_abs_s"].as_f64().unwrap();
            assert!((value - expected_sign * max).abs() < 1e-9, "{text}: {value} vs {max}");
        }
    }
}

#[test]
fn optimize_writes_output_file() {
    let dir = TempDir::new().unwrap();
    let st = write_state(&dir, "w.json", r#"{"type":"werner","p":0.9}"#);
    let out = dir.path().join("out.json");
    let o = chsh(&["optimize", "--state", s(&st), "--format", "json", "--output", s(&out)]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(out).unwrap()).unwrap();
    assert!((v["max_abs_s"].as_f64().unwrap() - 1.8 * 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn degrees_convert_on_the_boundary() {
    let dir = TempDir::new().unwrap();
    let st = write_state(&dir, "s.json", r#"{"type":"schmidt","concurrence":0.7}"#);
    let rad = json(&chsh(&["optimize", "--state", s(&st), "--gamma", "0.7853981633974483", "--format", "json"]));
    let deg = json(&chsh(&["optimize", "--state", s(&st), "--gamma", "45", "--degrees", "--format", "json"]));
    assert_eq!(rad["vectors"], deg["vectors"]);
    let d = deg["params"]["phi_s"].as_f64().unwrap();
    let r = rad["params"]["phi_s"].as_f64().unwrap();
    assert!((d - r.to_degrees()).abs() < 1e-9);
    assert_eq!(deg["angle_unit"], "degrees");
}

#[test]
fn dump_k_prints_matrix() {
    let dir = TempDir::new().unwrap();
    let st = write_state(&dir, "m.json", r#"{"type":"mixture","p":0.3333333333333333,"concurrence_psi":0.6,"concurrence_phi":0.9}"#);
    let o = chsh(&["optimize", "--state", s(&st), "--dump-k"]);
    let text = stdout(&o);
    assert_eq!(field(&text, "K[1]"), "[0, -0.800000000, 0]");
    assert_eq!(field(&text, "max_abs_s"), "1.78885438");
    assert_eq!(field(&text, "violates_chsh"), "false");
}

#[test]
fn verify_exit_status_tracks_gap() {
    let dir = TempDir::new().unwrap();
    let st = write_state(&dir, "s.json", r#"{"type":"schmidt","concurrence":0.3}"#);
    let ok = chsh(&["verify", "--state", s(&st)]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(field(&stdout(&ok), "result"), "pass");

    let coarse = chsh(&["verify", "--state", s(&st), "--grid", "8", "--refine-iters", "0", "--tol", "1e-12", "--format", "json"]);
    assert_eq!(coarse.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&coarse.stdout).unwrap();
    assert!(v["gap"].as_f64().unwrap() > 1e-12);
    assert_eq!(v["pass"], false);

    let bad_grid = chsh(&["verify", "--state", s(&st), "--grid", "3"]);
    assert_eq!(bad_grid.status.code(), Some(2));
}

#[test]
fn sweep_rows_have_constant_half_perimeter() {
    let dir = TempDir::new().unwrap();
    let st = write_state(&dir, "s.json", r#"{"type":"schmidt","concurrence":0.5}"#);
    let o = chsh(&["sweep", "--state", s(&st), "--gamma-steps", "8", "--format", "csv"]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["gamma", "phi_s", "phi_t", "phi_q", "phi_r", "half_perimeter"]
    );
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 8);
    for r in &rows {
        assert!((r[5] - 5f64.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn simulate_is_reproducible_and_honours_env_seed() {
    let dir = TempDir::new().unwrap();
    let st = write_state(&dir, "s.json", r#"{"type":"schmidt","concurrence":1.0}"#);
    let run = |extra: &[&str], env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_chsh"));
        c.args(["simulate", "--state", s(&st), "--shots", "2000", "--format", "json"]).args(extra);
        match env {
            Some(v) => c.env("CHSH_SEED", v),
            None => c.env_remove("CHSH_SEED"),
        };
        json(&c.output().unwrap())
    };
    let a = run(&["--seed", "5"], None);
    let b = run(&["--seed", "5"], None);
    assert_eq!(a, b);
    let from_env = run(&[], Some("5"));
    assert_eq!(a, from_env);
    let other = run(&["--seed", "6"], None);
    assert_ne!(a["s_hat"], other["s_hat"]);
    let z = a["z_score"].as_f64().unwrap();
    assert!(z.abs() < 5.0);
    assert!((a["exact_s"].as_f64().unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn simulate_transcript() {
    let dir = TempDir::new().unwrap();
    let st = write_state(&dir, "w.json", r#"{"type":"werner","p":0.9}"#);
    let tr = dir.path().join("shots.csv");
    let o = chsh(&["simulate", "--state", s(&st), "--shots", "250", "--seed", "1", "--transcript", s(&tr)]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(&tr).unwrap();
    assert_eq!(rdr.headers().unwrap().iter().collect::<Vec<_>>(), ["pair", "a", "b"]);
    let recs: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(recs.len(), 1000);
    let mut s_hat = 0.0;
    for (pair, w) in [("QS", 1.0), ("QT", -1.0), ("RS", 1.0), ("RT", 1.0)] {
        let prods: Vec<f64> = recs
            .iter()
            .filter(|r| &r[0] == pair)
            .map(|r| r[1].parse::<f64>().unwrap() * r[2].parse::<f64>().unwrap())
            .collect();
        assert_eq!(prods.len(), 250);
        s_hat += w * prods.iter().sum::<f64>() / 250.0;
    }
    let reported: f64 = field(&stdout(&o), "s_hat").parse().unwrap();
    assert!((reported - s_hat).abs() < 1e-8);
}

#[test]
fn paper_examples_table() {
    let o = chsh(&["paper-examples"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("1.78885438"));
    assert!(text.contains("0.707106781"));
    assert_eq!(field(&text, "werner_entangled_threshold"), "0.333333333");

    let v = json(&chsh(&["paper-examples", "--format", "json"]));
    assert_eq!(v["pure"].as_array().unwrap().len(), 3);
    assert_eq!(v["werner"].as_array().unwrap().len(), 9);
    assert_eq!(v["mixture"]["violates_chsh"], false);
}

fn assert_usage_error(o: &Output) {
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn invalid_input_exits_with_status_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    assert_usage_error(&chsh(&["optimize", "--state", s(&missing)]));

    let malformed = write_state(&dir, "bad.json", "{\"type\": \"schmidt\", ");
    assert_usage_error(&chsh(&["optimize", "--state", s(&malformed)]));

    let unknown = write_state(&dir, "unk.json", r#"{"type":"schmidt","concurrence":0.5,"extra":1}"#);
    assert_usage_error(&chsh(&["optimize", "--state", s(&unknown)]));

    let out_of_range = write_state(&dir, "w.json", r#"{"type":"werner","p":1.5}"#);
    assert_usage_error(&chsh(&["verify", "--state", s(&out_of_range)]));

    let not_psd = write_state(
        &dir,
        "m.json",
        r#"{"type":"mixed","matrix":[[[1.2,0],[0,0],[0,0],[0,0]],[[0,0],[-0.2,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[0,0]]]}"#,
    );
    assert_usage_error(&chsh(&["optimize", "--state", s(&not_psd)]));

    let good = write_state(&dir, "s.json", r#"{"type":"schmidt","concurrence":0.5}"#);
    assert_usage_error(&chsh(&["simulate", "--state", s(&good), "--shots", "0"]));
    assert_usage_error(&chsh(&["optimize", "--state", s(&good), "--theta", "3.5"]));
    assert_usage_error(&chsh(&["optimize", "--state", s(&good), "--format", "csv"]));
    assert_usage_error(&chsh(&["sweep", "--state", s(&good), "--gamma-steps", "0"]));
}

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn hardy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hardy"))
        .args(args)
        .env_remove("HARDY_SEED")
        .env_remove("HARDY_BUDGET")
        .output()
        .unwrap()
}

fn json_out(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn f64_at(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap()
}

#[test]
fn norm_parseval_fixture() {
    let d = fixture("dirichlet_1_2.json");
    let v = json_out(&hardy(&["norm", "--poly", d.to_str().unwrap(), "--p", "2", "--method", "parseval"]));
    assert_eq!(f64_at(&v, "value"), 5f64.sqrt());
    assert_eq!(v["method"], "parseval");
}

#[test]
fn norm_routes_agree() {
    let d = fixture("polytorus_d2.json");
    let d = d.to_str().unwrap();
    let even = f64_at(&json_out(&hardy(&["norm", "--poly", d, "--p", "4"])), "value");
    let grid = f64_at(&json_out(&hardy(&["norm", "--poly", d, "--p", "4", "--method", "grid"])), "value");
    // ‖(1+z1)(1+z2)‖_4^4 = 6²
    assert!((even - 36f64.powf(0.25)).abs() < 1e-14);
    assert!((grid - even).abs() < 1e-12);
}

#[test]
fn lp_ratio_is_one_at_p2() {
    for f in ["dirichlet_1_2.json", "polytorus_d2.json"] {
        let p = fixture(f);
        let v = json_out(&hardy(&["lp", "--eta", "2", "--p", "2", "--poly", p.to_str().unwrap()]));
        assert!((f64_at(&v, "ratio") - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn lp_tables_and_blocks() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("lp_cli");
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let table = dir.join("ratios.csv");
    let blocks = dir.join("blocks");
    let p = fixture("polytorus_d2.json");
    let o = hardy(&[
        "lp", "--poly", p.to_str().unwrap(), "--p", "4", "--ensemble-size", "5",
        "--ratio-table", table.to_str().unwrap(), "--emit-blocks", blocks.to_str().unwrap(),
        "--samples", "4",
    ]);
    let v = json_out(&o);
    assert!(v["khintchine"]["mean_pth_power"].as_f64().unwrap() > 0.0);
    let csv = std::fs::read_to_string(table).unwrap();
    assert_eq!(csv.lines().count(), 1 + 1 + 5);
    assert!(csv.starts_with("member,norm,square_norm,ratio\n"));
    assert_eq!(std::fs::read_dir(blocks).unwrap().count(), v["blocks"].as_array().unwrap().len());
}

#[test]
fn transfer_forward_fixture() {
    let p = fixture("polytorus_d2.json");
    let v = json_out(&hardy(&["transfer", "--direction", "forward", "--Qmax", "10", "--poly", p.to_str().unwrap()]));
    assert_eq!(v["approximation"]["Q"], 10);
    assert_eq!(v["approximation"]["a"], serde_json::json!([7, 11]));
    assert_eq!(v["pass"], true);
}

#[test]
fn transfer_backward_with_indicator() {
    let p = fixture("one_variable.json");
    let s = fixture("indicator.json");
    let v = json_out(&hardy(&[
        "transfer", "--direction", "backward", "--symbol", s.to_str().unwrap(),
        "--poly", p.to_str().unwrap(), "--p", "4", "--gamma", "1", "--delta", "0.1",
    ]));
    assert_eq!(v["pass"], true);
    assert_eq!(v["matrix_B"]["matrix"]["determinant"], 1);
}

#[test]
fn mult_bounds() {
    let s = fixture("indicator.json");
    let v = json_out(&hardy(&["mult", "--symbol", s.to_str().unwrap(), "--bound", "marcinkiewicz", "--eta", "2"]));
    assert_eq!(f64_at(&v["bound"], "bracket"), 2.0);
    let o = hardy(&["mult", "--symbol", s.to_str().unwrap(), "--bound", "hm"]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["code"], "unsupported");
    let p = fixture("dirichlet_1_2.json");
    let v = json_out(&hardy(&["mult", "--symbol", s.to_str().unwrap(), "--apply", p.to_str().unwrap()]));
    // 2 lies in (0, 2.5], 1 lies in it too
    assert_eq!(v["applied"], serde_json::json!({"dirichlet": {"1": [1.0, 0.0], "2": [2.0, 0.0]}}));
}

#[test]
fn proj_operations() {
    let p = fixture("dirichlet_1_2.json");
    let p = p.to_str().unwrap();
    let v = json_out(&hardy(&["proj", "--op", "partial", "--N", "1", "--poly", p]));
    assert_eq!(v["result"], serde_json::json!({"dirichlet": {"1": [1.0, 0.0]}}));
    let v = json_out(&hardy(&["proj", "--op", "identity-check", "--N", "1", "--poly", p]));
    assert_eq!(v["holds"], true);
    let o = hardy(&["proj", "--op", "bench", "--p", "2", "--N-schedule", "1,4,16", "--ensemble-size", "4"]);
    assert!(o.status.success());
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.starts_with("N,max_ratio,argmax\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn error_codes() {
    let o = hardy(&["norm", "--poly", "/definitely/missing.json"]);
    assert_eq!(o.status.code(), Some(7));
    let bad = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("bad.json");
    std::fs::write(&bad, "{\"neither\": 1}").unwrap();
    let o = hardy(&["norm", "--poly", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["code"], "malformed_input");
    let p = fixture("polytorus_d2.json");
    let o = hardy(&["norm", "--poly", p.to_str().unwrap(), "--p", "-1"]);
    assert_eq!(o.status.code(), Some(5));
    let o = hardy(&["transfer", "--direction", "forward", "--Qmax", "10", "--epsilon", "1e-300",
        "--symbol", r#"{"kind":"smooth","form":"log"}"#, "--poly", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let o = hardy(&["norm", "--poly", p.to_str().unwrap(), "--p", "3", "--method", "grid", "--budget", "10"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn config_overrides_flags_and_env_sets_seed() {
    let cfg = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cfg.json");
    std::fs::write(&cfg, r#"{"p": 4, "method": "even"}"#).unwrap();
    let p = fixture("polytorus_d2.json");
    let v = json_out(&hardy(&["norm", "--poly", p.to_str().unwrap(), "--p", "2", "--config", cfg.to_str().unwrap()]));
    assert_eq!(f64_at(&v, "p"), 4.0);
    let o = Command::new(env!("CARGO_BIN_EXE_hardy"))
        .args(["norm", "--poly", p.to_str().unwrap()])
        .env("HARDY_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(json_out(&o)["seed"], 42);
}

#[test]
fn output_is_byte_reproducible() {
    let p = fixture("polytorus_d2.json");
    let args = ["lp", "--poly", p.to_str().unwrap(), "--p", "4", "--samples", "8", "--seed", "3"];
    let a = hardy(&args);
    let b = hardy(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_goodcodes"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8")
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(name);
    serde_json::from_str(&fs::read_to_string(path).expect("schema present")).expect("schema parses")
}

/// Validates the keywords the shipped schemas use: type, enum, required,
/// properties, additionalProperties, items, minimum.
fn validate(v: &Value, s: &Value, at: &str) -> Result<(), String> {
    let obj = match s.as_object() {
        Some(o) => o,
        None => return Ok(()),
    };
    if let Some(t) = obj.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "boolean" => v.is_boolean(),
            "integer" => v.is_i64() || v.is_u64(),
            "number" => v.is_number(),
            "null" => v.is_null(),
            other => return Err(format!("unsupported type {other}")),
        };
        if !ok {
            return Err(format!("{at}: expected {t}, got {v}"));
        }
    }
    if let Some(opts) = obj.get("enum").and_then(Value::as_array) {
        if !opts.contains(v) {
            return Err(format!("{at}: {v} not in {opts:?}"));
        }
    }
    if let (Some(min), Some(x)) = (obj.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < min {
            return Err(format!("{at}: {x} below {min}"));
        }
    }
    if let Some(map) = v.as_object() {
        for key in obj
            .get("required")
            .and_then(Value::as_array)
            .into_iter()
            .flatten()
        {
            let key = key.as_str().expect("string key");
            if !map.contains_key(key) {
                return Err(format!("{at}: missing {key}"));
            }
        }
        let props = obj.get("properties").and_then(Value::as_object);
        for (k, child) in map {
            match props.and_then(|p| p.get(k)) {
                Some(sub) => validate(child, sub, &format!("{at}.{k}"))?,
                None if obj.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return Err(format!("{at}: unexpected key {k}"));
                }
                None => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (obj.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            validate(x, items, &format!("{at}[{i}]"))?;
        }
    }
    Ok(())
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).expect("file written")).expect("valid JSON")
}

fn without_timing(mut v: Value) -> Value {
    if let Some(o) = v.as_object_mut() {
        o.remove("elapsed_ms");
    }
    v
}

fn tmp() -> TempDir {
    tempfile::tempdir().expect("tempdir")
}

fn p(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(path: &Path) -> &str {
    path.to_str().expect("utf8 path")
}

#[test]
fn alpha_of_64_is_two() {
    let o = run(&["ack", "alpha", "--n", "64"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "2");
}

#[test]
fn ack_lambda_and_huge() {
    // ⌊√10⌋
    let o = run(&["ack", "lambda", "--d", "1", "--n", "10"]);
    assert_eq!(
        (code(&o), stdout(&o).trim().to_string()),
        (0, "3".to_string())
    );
    let o = run(&["ack", "A", "--i", "4", "--j", "3"]);
    assert_eq!(stdout(&o).trim(), "HUGE");
    let o = run(&["ack", "A", "--i", "2", "--j", "4"]);
    assert_eq!(stdout(&o).trim(), "65536");
}

#[test]
fn ack_table_csv_columns() {
    let o = run(&[
        "ack", "table", "--ds", "2,4,6", "--ns", "10,100", "--format", "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,lambda_2,lambda_4,lambda_6");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("10,"));
    assert_eq!(lines[1].split(',').count(), 4);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(
        code(&run(&["--no-such-flag", "ack", "alpha", "--n", "3"])),
        1
    );
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["ack", "lambda", "--d", "0", "--n", "3"])), 1);
    assert_eq!(
        code(&run(&["check", "scind", "--matrix", "/nonexistent/m.json"])),
        1
    );
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn scind_on_zero_matrix_exits_two_with_one_by_one_witness() {
    let dir = tmp();
    let m = p(&dir, "bad.json");
    fs::write(&m, r#"{"field":"gf2","rows":[[0]]}"#).unwrap();
    let out = p(&dir, "check.json");
    let o = run(&["check", "scind", "--matrix", s(&m), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    let v = read_json(&out);
    validate(&v, &schema("check_report.schema.json"), "$").unwrap();
    assert_eq!(v["ok"], Value::Bool(false));
    assert_eq!(v["counterexample"], serde_json::json!([[0], [0]]));
}

#[test]
fn check_commands_pass_on_good_inputs() {
    let dir = tmp();
    let m = p(&dir, "m.json");
    fs::write(&m, r#"{"field":{"prime":5},"rows":[[1,1,1],[1,2,3]]}"#).unwrap();
    for kind in ["scind", "dist", "mds"] {
        let o = run(&["check", kind, "--matrix", s(&m)]);
        assert_eq!(
            code(&o),
            0,
            "{kind}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        validate(&v, &schema("check_report.schema.json"), "$").unwrap();
    }
}

#[test]
fn budget_exhaustion_exits_three() {
    let dir = tmp();
    let m = p(&dir, "m.json");
    fs::write(&m, r#"{"field":{"prime":5},"rows":[[1,1,1],[1,2,3]]}"#).unwrap();
    assert_eq!(
        code(&run(&[
            "--budget",
            "1",
            "check",
            "scind",
            "--matrix",
            s(&m)
        ])),
        3
    );
    let o = run(&[
        "disperser",
        "sample",
        "--n",
        "16",
        "--m",
        "12",
        "--k",
        "8",
        "--eps",
        "0.25",
        "--max-trials",
        "0",
    ]);
    assert_eq!(code(&o), 3);
}

const IDENTITY3: &str = r#"{"field":"gf2","num_inputs":3,"layers":[[[[0,0,1]],[[0,1,1]],[[0,2,1]]]],"outputs":[[1,0],[1,1],[1,2]]}"#;
const PARITY3: &str =
    r#"{"field":"gf2","num_inputs":3,"layers":[[[[0,0,1],[0,1,1],[0,2,1]]]],"outputs":[[1,0]]}"#;

#[test]
fn circuit_eval_matrix_stack_and_dot() {
    let dir = tmp();
    let id = p(&dir, "id.json");
    let par = p(&dir, "par.json");
    fs::write(&id, IDENTITY3).unwrap();
    fs::write(&par, PARITY3).unwrap();

    let o = run(&["circuit", "eval", "--in", s(&par), "--x", "1,1,0"]);
    assert_eq!(stdout(&o).trim(), "[0]");
    let o = run(&["circuit", "eval", "--in", s(&par), "--x", "1,1,1"]);
    assert_eq!(stdout(&o).trim(), "[1]");

    let o = run(&["circuit", "matrix", "--in", s(&par), "--format", "csv"]);
    assert_eq!(stdout(&o).lines().collect::<Vec<_>>(), vec!["1", "1", "1"]);

    let stacked = p(&dir, "st.json");
    let o = run(&[
        "circuit",
        "stack",
        "--in",
        s(&id),
        s(&par),
        "--out",
        s(&stacked),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["circuit", "eval", "--in", s(&stacked), "--x", "1,0,0"]);
    assert_eq!(stdout(&o).trim(), "[1]");

    let collapsed = p(&dir, "co.json");
    assert_eq!(
        code(&run(&[
            "circuit",
            "collapse",
            "--in",
            s(&stacked),
            "--out",
            s(&collapsed)
        ])),
        0
    );
    for x in ["0,0,0", "1,0,1", "1,1,1", "0,1,0"] {
        let a = stdout(&run(&["circuit", "eval", "--in", s(&stacked), "--x", x]));
        let b = stdout(&run(&["circuit", "eval", "--in", s(&collapsed), "--x", x]));
        assert_eq!(a, b, "collapse changed output on {x}");
    }

    let o = run(&["circuit", "export-dot", "--in", s(&par)]);
    assert!(stdout(&o).starts_with("digraph"));
}

#[test]
fn circuit_compose_sums_outputs() {
    let dir = tmp();
    let par = p(&dir, "par.json");
    fs::write(&par, PARITY3).unwrap();
    let sum = p(&dir, "sum.json");
    let o = run(&[
        "circuit",
        "compose",
        "--in",
        s(&par),
        s(&par),
        "--out",
        s(&sum),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["circuit", "eval", "--in", s(&sum), "--x", "1,0,0"]);
    assert_eq!(stdout(&o).trim(), "[0]");
}

#[test]
fn malformed_circuit_is_usage_error() {
    let dir = tmp();
    let c = p(&dir, "c.json");
    fs::write(
        &c,
        r#"{"field":"gf2","num_inputs":1,"layers":[[[[1,0,1]]]],"outputs":[[1,0]]}"#,
    )
    .unwrap();
    assert_eq!(
        code(&run(&["circuit", "eval", "--in", s(&c), "--x", "1"])),
        1
    );
}

#[test]
fn disperser_sample_replays_bit_exactly() {
    let dir = tmp();
    let mut outputs = Vec::new();
    for tag in ["a", "b"] {
        let g = p(&dir, &format!("g{tag}.json"));
        let r = p(&dir, &format!("r{tag}.json"));
        let o = run(&[
            "--seed",
            "11",
            "--jobs",
            if tag == "a" { "1" } else { "4" },
            "disperser",
            "sample",
            "--n",
            "16",
            "--m",
            "12",
            "--k",
            "8",
            "--eps",
            "0.25",
            "--out",
            s(&g),
            "--report",
            s(&r),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let report = read_json(&r);
        validate(&report, &schema("run_report.schema.json"), "$").unwrap();
        assert_eq!(report["seed"], 11);
        assert_eq!(report["counters"]["enumerated"], 12870);
        outputs.push((fs::read(&g).unwrap(), report));
    }
    assert_eq!(outputs[0].0, outputs[1].0);
    let strip = |v: &Value| {
        let mut v = without_timing(v.clone());
        v.as_object_mut().unwrap().remove("artifacts");
        v
    };
    assert_eq!(strip(&outputs[0].1), strip(&outputs[1].1));
}

#[test]
fn build_goodcode_replays_and_verifies() {
    let dir = tmp();
    let params = r#"{"n":10,"rate":0.25,"delta":0.15,"depth":4}"#;
    let mut runs = Vec::new();
    for tag in ["a", "b"] {
        let c = p(&dir, &format!("c{tag}.json"));
        let r = p(&dir, &format!("r{tag}.json"));
        let o = run(&[
            "--seed",
            "3",
            "--scaled-constants",
            "build",
            "goodcode",
            "--params",
            params,
            "--out",
            s(&c),
            "--report",
            s(&r),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let report = read_json(&r);
        validate(&report, &schema("run_report.schema.json"), "$").unwrap();
        assert_eq!(report["mode"], "scaled");
        assert!(report["counters"]["depth"].as_u64().unwrap() <= 4);
        runs.push((fs::read(&c).unwrap(), report, c));
    }
    assert_eq!(
        runs[0].0, runs[1].0,
        "circuit artifacts differ between replays"
    );
    assert_eq!(runs[0].1["verdicts"], runs[1].1["verdicts"]);

    let o = run(&[
        "check",
        "mindist",
        "--circuit",
        s(&runs[0].2),
        "--params",
        r#"{"d":6}"#,
    ]);
    assert_eq!(code(&o), 0);
    let o = run(&[
        "check",
        "mindist",
        "--circuit",
        s(&runs[0].2),
        "--params",
        r#"{"d":1000}"#,
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn build_errors_are_triaged() {
    let gv = r#"{"n":10,"rate":0.9,"delta":0.4,"depth":4}"#;
    assert_eq!(code(&run(&["build", "goodcode", "--params", gv])), 1);
    let starved = r#"{"n":10,"rate":0.25,"delta":0.15,"depth":4,"max_trials":0}"#;
    let dir = tmp();
    let r = p(&dir, "r.json");
    let o = run(&[
        "--scaled-constants",
        "build",
        "goodcode",
        "--params",
        starved,
        "--report",
        s(&r),
    ]);
    assert_eq!(code(&o), 3);
    let report = read_json(&r);
    validate(&report, &schema("run_report.schema.json"), "$").unwrap();
    assert_eq!(report["exit_code"], 3);
    assert_eq!(code(&run(&["build", "pgc", "--params", "{not json"])), 1);
}

#[test]
fn build_params_from_file_and_literal_mode_recorded() {
    let dir = tmp();
    let params = p(&dir, "amp.json");
    fs::write(&params, r#"{"n":8,"m":24}"#).unwrap();
    let r = p(&dir, "r.json");
    let o = run(&[
        "--seed",
        "1",
        "build",
        "amplifier",
        "--params",
        s(&params),
        "--report",
        s(&r),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&r);
    assert_eq!(report["mode"], "literal");
    assert_eq!(report["counters"]["depth"], 1);
    let c: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(c["num_inputs"], 8);
    assert_eq!(c["outputs"].as_array().unwrap().len(), 24);
}

#[test]
fn sc_verify_json_and_edge_list() {
    let dir = tmp();
    let k = p(&dir, "k.json");
    fs::write(
        &k,
        r#"{"layers":[2,2],"edges":[[0,0,1,0],[0,0,1,1],[0,1,1,0],[0,1,1,1]]}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["sc", "verify", "--graph", s(&k)])), 0);

    let b = p(&dir, "b.txt");
    fs::write(
        &b,
        "# two inputs through one vertex\nlayers 2 1 2\n0 2\n1 2\n2 3\n2 4\n",
    )
    .unwrap();
    let o = run(&["sc", "verify", "--graph", s(&b)]);
    assert_eq!(code(&o), 2);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    validate(&v, &schema("check_report.schema.json"), "$").unwrap();
    assert_eq!(v["counterexample"]["flow"], 1);
}

#[test]
fn sc_tocode_on_complete_graph() {
    let dir = tmp();
    let k = p(&dir, "k.json");
    fs::write(
        &k,
        r#"{"layers":[2,3],"edges":[[0,0,1,0],[0,0,1,1],[0,0,1,2],[0,1,1,0],[0,1,1,1],[0,1,1,2]]}"#,
    )
    .unwrap();
    let r = p(&dir, "r.json");
    let o = run(&[
        "--seed",
        "2",
        "sc",
        "tocode",
        "--graph",
        s(&k),
        "--q",
        "1000003",
        "--trials",
        "5",
        "--report",
        s(&r),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&r);
    validate(&report, &schema("run_report.schema.json"), "$").unwrap();
    assert_eq!(report["verdicts"][0]["success"], true);

    let b = p(&dir, "b.txt");
    fs::write(&b, "layers 2 1 2\n0 2\n1 2\n2 3\n2 4\n").unwrap();
    assert_eq!(
        code(&run(&[
            "sc",
            "tocode",
            "--graph",
            s(&b),
            "--q",
            "101",
            "--trials",
            "3"
        ])),
        3
    );
}

#[test]
fn bounds_upper_replays_unit_ledger() {
    let o = run(&[
        "bounds", "upper", "--n", "1024", "--d", "4", "--format", "csv",
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,params,wires"));
    assert!(text.contains(",12288"));

    let o = run(&["bounds", "upper", "--n", "1024", "--d", "4"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["total"], 12288);

    let o = run(&[
        "bounds",
        "upper",
        "--n",
        "1024",
        "--d",
        "4",
        "--constants",
        r#"{"c0":2}"#,
    ]);
    assert_eq!(code(&o), 1);
}

#[test]
fn bounds_lower_is_exact() {
    let o = run(&[
        "bounds", "lower", "--n", "100", "--d", "1", "--r", "10", "--eps", "1/2", "--delta", "0.25",
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    // ε·δ²·n·r = 1/2 · 1/16 · 100 · 10
    assert_eq!(v["depth1"], "125/4");
    assert_eq!(
        code(&run(&[
            "bounds", "lower", "--n", "10", "--d", "1", "--r", "11", "--eps", "1", "--delta", "1"
        ])),
        1
    );
}

#[test]
fn bounds_frontier_depthlb_fstar() {
    let o = run(&[
        "bounds",
        "frontier",
        "--ns",
        "4,64,100000",
        "--format",
        "csv",
    ]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,depth_lb,alpha");
    for l in &lines[1..] {
        let f: Vec<u64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[1] <= f[2]);
    }
    let o = run(&["bounds", "depthlb", "--n", "64"]);
    assert_eq!(
        (code(&o), stdout(&o).trim().to_string()),
        (0, "1".to_string())
    );
    let dir = tmp();
    let r = p(&dir, "r.json");
    let o = run(&["bounds", "fstar", "--max-n", "5000", "--report", s(&r)]);
    assert_eq!(code(&o), 0);
    validate(&read_json(&r), &schema("run_report.schema.json"), "$").unwrap();
}

#[test]
fn every_failure_report_still_validates() {
    let dir = tmp();
    let r = p(&dir, "r.json");
    let o = run(&["ack", "lambda", "--d", "0", "--n", "3", "--report", s(&r)]);
    assert_eq!(code(&o), 1);
    let v = read_json(&r);
    validate(&v, &schema("run_report.schema.json"), "$").unwrap();
    assert_eq!(v["exit_code"], 1);
}

#[test]
fn validator_rejects_bad_reports() {
    let sch = schema("check_report.schema.json");
    let bad = serde_json::json!({ "ok": "yes", "counterexample": null, "enumerated": 1, "elapsed_ms": 0 });
    assert!(validate(&bad, &sch, "$").is_err());
    let extra = serde_json::json!({ "ok": true, "counterexample": null, "enumerated": 1, "elapsed_ms": 0, "x": 1 });
    assert!(validate(&extra, &sch, "$").is_err());
    let missing = serde_json::json!({ "ok": true });
    assert!(validate(&missing, &sch, "$").is_err());
}

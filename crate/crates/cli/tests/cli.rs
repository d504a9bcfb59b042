use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, body: &Value) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, serde_json::to_string_pretty(body).unwrap()).unwrap();
        p
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn asymlab(args: &[&str], input: Option<&Path>, output: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_asymlab"));
    cmd.args(args);
    if let Some(i) = input {
        cmd.arg("--input").arg(i);
    }
    if let Some(o) = output {
        cmd.arg("--output").arg(o);
    }
    cmd.output().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn entry(m: &Value, dim: usize, i: usize, j: usize) -> (f64, f64) {
    let k = i * dim + j;
    (m["re"][k].as_f64().unwrap(), m["im"][k].as_f64().unwrap())
}

#[test]
fn analyze_unitary_gives_identity() {
    let ws = Workspace::new();
    let c = std::f64::consts::FRAC_1_SQRT_2;
    let input = ws.file("u.json", &json!({"dim": 2, "re": [c, -c, c, c], "im": [0.0, 0.0, 0.0, 0.0]}));
    let out = ws.path("r.json");
    let o = asymlab(&["analyze"], Some(&input), Some(&out));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out);
    assert_eq!(r["schema"], "asymlab/1");
    assert_eq!(r["command"], "analyze");
    let a = &r["result"]["limit"]["A"];
    for i in 0..2 {
        for j in 0..2 {
            let (re, im) = entry(a, 2, i, j);
            let expected = if i == j { 1.0 } else { 0.0 };
            assert!((re - expected).abs() < 1e-12 && im.abs() < 1e-12);
        }
    }
    assert_eq!(r["result"]["c_class"], "C11");
    // the manifest echoes config, parameters and input
    let m = &r["manifest"];
    assert_eq!(m["config"]["command"], "analyze");
    assert_eq!(m["params"]["tol"], 1e-10);
    assert_eq!(m["input"]["dim"], 2);
    assert!(m["operations"].as_array().unwrap().len() >= 2);
    assert!(ws.path("r.json.timing.json").exists());
}

#[test]
fn reports_are_byte_for_byte_reproducible() {
    let ws = Workspace::new();
    let input = ws.file(
        "t.json",
        &json!({"dim": 2, "re": [1.0, -1.0, 0.0, 0.0], "im": [0.0, 1.0, 0.0, 1.0]}),
    );
    let (a, b) = (ws.path("a.json"), ws.path("b.json"));
    for out in [&a, &b] {
        let o = asymlab(&["similarity", "--seed", "7"], Some(&input), Some(out));
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    // reports differ only through the output path echoed in the manifest
    let strip = |bytes: &[u8], name: &str| String::from_utf8_lossy(bytes).replace(name, "OUT");
    assert_eq!(strip(&ta, "a.json"), strip(&tb, "b.json"));
    let r = read_json(&a);
    assert_eq!(r["manifest"]["config"]["seed"], 7);
    assert_eq!(r["result"]["unitary_test"]["kind"], "SimilarToUnitary");
}

#[test]
fn shift_single_dip_reports_gamma_one_quarter() {
    let ws = Workspace::new();
    let input = ws.file(
        "w.json",
        &json!({"lo": 0, "hi": 1, "core": [0.5], "left_tail": {"constant": 1.0}, "right_tail": {"constant": 1.0}}),
    );
    let out = ws.path("r.json");
    let o = asymlab(&["shift"], Some(&input), Some(&out));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out);
    assert_eq!(r["result"]["analysis"]["gamma"], 0.25);
    assert!(r["result"]["crossval"]["max_error"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn construct_finite_multiplicity_exits_2() {
    let ws = Workspace::new();
    let input = ws.file(
        "t.json",
        &json!({"atoms": [{"lambda": 0.25, "mult": 3}, {"lambda": 1.0, "mult": "INF"}]}),
    );
    let out = ws.path("r.json");
    let o = asymlab(&["construct"], Some(&input), Some(&out));
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("0 or infinite"), "{stderr}");
    let r = read_json(&out);
    assert_eq!(r["error"]["kind"], "HypothesisRejected");
    assert_eq!(r["error"]["exit_code"], 2);
}

#[test]
fn construct_reports_bound_table() {
    let ws = Workspace::new();
    let input = ws.file(
        "t.json",
        &json!({
            "atoms": [{"lambda": 0.25, "mult": "INF"}, {"lambda": 1.0, "mult": "INF"}, {"lambda": 0.55, "mult": "INF"}],
            "sequences": [
                {"kind": "dyadic", "limit": 0.25, "from": 0.625, "mult": "INF"},
                {"kind": "dyadic", "limit": 1.0, "from": 0.625, "mult": "INF"}
            ]
        }),
    );
    let out = ws.path("r.json");
    let o = asymlab(&["construct", "--window", "8", "--level-dim", "2", "--n-max", "4"], Some(&input), Some(&out));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out);
    let res = &r["result"];
    assert_eq!(res["unitary_defect"], 0.0);
    assert_eq!(res["plan"]["positive_case"], "Case1InfiniteXk");
    assert_eq!(res["probe"]["growth"], "Linear");
    assert!(res["convergence"]["rows"].as_array().unwrap().iter().all(|row| {
        row["measured"].as_f64().unwrap() <= row["bound"].as_f64().unwrap() * (1.0 + 1e-12)
    }));
    assert!(res.get("T").is_none());
}

#[test]
fn csv_output_has_header_and_column_major_entries() {
    let ws = Workspace::new();
    let input = ws.file("d.json", &json!({"dim": 2, "re": [1.0, 0.0, 0.0, 0.5]}));
    let o = asymlab(&["analyze", "--format", "csv"], Some(&input), None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,i,j,re,im"));
    let a: Vec<&str> = text.lines().filter(|l| l.starts_with("result.limit.A,")).collect();
    assert_eq!(a.len(), 4);
    assert!(a[0].starts_with("result.limit.A,0,0,1"));
    assert!(a[1].starts_with("result.limit.A,1,0,"));
}

#[test]
fn validation_failures_exit_2() {
    let ws = Workspace::new();
    let input = ws.file("d.json", &json!({"dim": 2, "re": [1.0, 0.0, 0.0, 0.5]}));
    let o = asymlab(&["analyze", "--kernel-tol", "1e-3"], Some(&input), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("tolerance conflict"));

    let o = asymlab(&["analyze", "--tol", "-1"], Some(&input), None);
    assert_eq!(o.status.code(), Some(2));

    let bad = ws.dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"dim\": 2,\n  \"re\": [1.0, \"x\", 0.0, 1.0]\n}").unwrap();
    let o = asymlab(&["analyze"], Some(&bad), None);
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("line 3"), "{stderr}");

    let jordan = ws.file("j.json", &json!({"dim": 2, "re": [1.0, 1.0, 0.0, 1.0]}));
    let o = asymlab(&["analyze"], Some(&jordan), None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not power bounded"));

    let o = asymlab(&["suite", "--suite", "nope"], None, None);
    assert_eq!(o.status.code(), Some(2));
    let o = asymlab(&["analyze"], None, None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sum_and_suites_run_with_bounded_threads() {
    let ws = Workspace::new();
    let input = ws.file(
        "s.json",
        &json!({
            "summands": [{"lo": 0, "hi": 1, "core": [0.5], "left_tail": {"constant": 1.0}, "right_tail": {"constant": 1.0}}],
            "family": {"kind": "single_dip", "dip": "1/i", "first": 2}
        }),
    );
    let o = asymlab(&["sum"], Some(&input), None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["result"]["kind"], "NotSimilarToAnyNormal");

    let out = ws.path("x.json");
    let o = Command::new(env!("CARGO_BIN_EXE_asymlab"))
        .args(["suite", "--suite", "shift-crossval", "--output"])
        .arg(&out)
        .env("ASYMLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&out);
    assert_eq!(r["result"]["all_passed"], true);
    assert_eq!(r["result"]["tables"]["crossval"].as_array().unwrap().len(), 8);
    assert_eq!(r["result"]["tables"]["crossval"][0]["k_min"], -7);

    let o = asymlab(&["suite", "--suite", "constructor", "--window", "8", "--n-max", "4"], None, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["result"]["tables"]["constructor"].as_array().unwrap().len(), 12);
}

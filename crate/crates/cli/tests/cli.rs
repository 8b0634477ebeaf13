use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lpdl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpdl"))
        .args(args)
        .current_dir(dir)
        .env_remove("LPDL_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Report JSON with the timing fields removed.
fn stable_json(path: &Path) -> Value {
    fn strip(v: &mut Value) {
        match v {
            Value::Object(m) => {
                m.remove("generated_at");
                m.remove("wall_time_ms");
                m.values_mut().for_each(strip);
            }
            Value::Array(a) => a.iter_mut().for_each(strip),
            _ => {}
        }
    }
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    strip(&mut v);
    v
}

fn without_timing_lines(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.contains("\"generated_at\"") && !l.contains("\"wall_time_ms\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn verify_all_suites_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "verify", "--group", "Z2", "--n", "2", "--action", "perm:(0 1)", "--p", "1.5,2,3", "--tests", "3", "--seed",
        "5",
    ];
    let mut a = args.to_vec();
    a.extend(["--json", "a.json", "--csv", "a.csv", "--md", "a.md"]);
    let out = lpdl(&a, dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let mut b = args.to_vec();
    b.extend(["--json", "b.json"]);
    assert!(lpdl(&b, dir.path()).status.success());

    let ja = dir.path().join("a.json");
    let jb = dir.path().join("b.json");
    assert_eq!(without_timing_lines(&ja), without_timing_lines(&jb));
    let v = stable_json(&ja);
    assert_eq!(v["passed"], Value::Bool(true));
    assert_eq!(v["results"].as_array().unwrap().len(), 9);
    let csv = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10);
    assert!(std::fs::read_to_string(dir.path().join("a.md")).unwrap().contains("9 of 9 suites passed"));
}

#[test]
fn suite_order_does_not_change_draws() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["verify", "--group", "Z3", "--n", "1", "--p", "3", "--tests", "2", "--seed", "9"];
    let mut a = base.to_vec();
    a.extend(["--suite", "isometry,algebra-law", "--json", "a.json"]);
    let mut b = base.to_vec();
    b.extend(["--suite", "algebra-law,isometry", "--json", "b.json"]);
    assert!(lpdl(&a, dir.path()).status.success());
    assert!(lpdl(&b, dir.path()).status.success());
    let (va, vb) = (stable_json(&dir.path().join("a.json")), stable_json(&dir.path().join("b.json")));
    assert_eq!(va["results"][0], vb["results"][1]);
    assert_eq!(va["results"][1], vb["results"][0]);
}

#[test]
fn failures_exit_one_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"group":"Z2","n":2,"action":"perm:(0 1)","p":[3],"tests":2,"seed":1,
                  "tolerances":{"identity":1e-300},
                  "outputs":{"md":"r.md","cases":"cases"}}"#;
    std::fs::write(dir.path().join("cfg.json"), cfg).unwrap();
    let out = lpdl(&["verify", "--config", "cfg.json", "--suite", "core,algebra-law"], dir.path());
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
    let md = std::fs::read_to_string(dir.path().join("r.md")).unwrap();
    let fail = md.find("| FAIL | algebra-law").expect("failing row");
    let pass = md.find("| PASS | core").expect("passing row");
    assert!(fail < pass);

    let cases: Vec<_> = std::fs::read_dir(dir.path().join("cases")).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!cases.is_empty());
    let case = cases[0].to_str().unwrap();
    let out = lpdl(&["replay", "--case", case], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let result: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(result["suite"], "algebra-law");

    // the same input passes under the default tolerance
    let mut case_json: Value = serde_json::from_str(&std::fs::read_to_string(case).unwrap()).unwrap();
    case_json["config"]["tolerances"]["identity"] = Value::from(1e-10);
    std::fs::write(dir.path().join("relaxed.json"), case_json.to_string()).unwrap();
    assert!(lpdl(&["replay", "--case", "relaxed.json"], dir.path()).status.success());
}

#[test]
fn invalid_inputs_carry_hints() {
    let dir = tempfile::tempdir().unwrap();
    let out = lpdl(&["verify", "--group", "Q8"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("Z2xZ2"));
    let out = lpdl(&["verify", "--group", "Z2", "--n", "2", "--action", "perm:(0 1 2)"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("perm:(0 1)"), "{}", stderr(&out));
    let out = lpdl(&["verify", "--group", "Z2", "--suite", "bogus"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("dual-covariance"));
    let out = lpdl(&["verify", "--group", "Z2", "--p", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = lpdl(&["verify", "--group", "Z2", "--json", "/nonexistent/x.json", "--suite", "core", "--p", "3"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cannot write"));
}

#[test]
fn thread_cap_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_lpdl"))
            .args(["verify", "--group", "Z2", "--p", "3", "--tests", "1", "--suite", "algebra-law,chain"])
            .current_dir(dir.path())
            .env("LPDL_THREADS", threads)
            .output()
            .unwrap()
    };
    assert!(run("1").status.success());
    let bad = run("many");
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("LPDL_THREADS"));
}

#[test]
fn pnorm_command() {
    let dir = tempfile::tempdir().unwrap();
    let m = r#"{"rows":2,"cols":2,"entries":[[1,0],[0,1],[0,1],[1,0]],"p":3}"#;
    std::fs::write(dir.path().join("m.json"), m).unwrap();
    let want = 2f64.powf(2.0 / 3.0);
    for method in ["auto", "power", "grid", "rt"] {
        let out = lpdl(&["pnorm", "--in", "m.json", "--method", method], dir.path());
        assert!(out.status.success(), "{}", stderr(&out));
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        let lower = v["lower"].as_f64().unwrap();
        let upper = v["upper"].as_f64().unwrap();
        assert!((lower - want).abs() < 1e-9, "{method}: {lower}");
        assert!(upper >= lower);
    }
    let out = lpdl(&["pnorm", "--in", "m.json", "--p", "2"], dir.path());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["upper"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
    let big = format!(r#"{{"rows":5,"cols":5,"entries":{},"p":3}}"#, serde_json::to_string(&vec![[1.0, 0.0]; 25]).unwrap());
    std::fs::write(dir.path().join("big.json"), big).unwrap();
    let out = lpdl(&["pnorm", "--in", "big.json", "--method", "grid"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--method power"));
}

#[test]
fn duality_report_writes_json_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = lpdl(
        &[
            "duality-report", "--group", "Z2", "--n", "1", "--p", "1.5,2,3", "--tests", "4", "--seed", "7", "--out",
            "report.json",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 3);
    for r in reports {
        let p = r["p"].as_f64().unwrap();
        let phi = &r["maps"][4]["verdict"]["verdict"];
        if p == 2.0 {
            assert_eq!(phi, "isometric");
        } else {
            assert_eq!(phi, "strictly-contractive-with-witness");
        }
    }
    let table = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    // four random elements and the gap element per exponent
    assert_eq!(table.lines().count(), 1 + 3 * 5);
    assert!(table.lines().next().unwrap().starts_with("element,label,p,src_lower,src_upper,img_lower,img_upper"));
}

#[test]
fn core_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = lpdl(&["core", "--group", "Z2", "--n", "1", "--p", "3,2"], dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["core_crossed"], 1);
    assert_eq!(v[0]["core_target"], 2);
    assert_eq!(v[1]["core_crossed"], 2);
    assert_eq!(v[1]["core_target"], 4);
}

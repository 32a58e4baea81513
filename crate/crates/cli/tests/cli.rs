use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const PAIR: &str = "# fixture pair\nE1: 0,0,0,1,1\nE2: 0,0,0,2,3\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_frobtrace"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn setup() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let catalog = dir.path().join("pair.txt");
    fs::write(&catalog, PAIR).unwrap();
    (dir, catalog)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_and_usage_exit_codes() {
    let (dir, _) = setup();
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
    assert_eq!(run(dir.path(), &[]).status.code(), Some(2));
    assert_eq!(
        run(dir.path(), &["survey", "--bogus", "1"]).status.code(),
        Some(2)
    );
}

#[test]
fn composite_ell_is_a_usage_error() {
    let (dir, _) = setup();
    let o = run(
        dir.path(),
        &[
            "survey", "--curves", "pair.txt", "--x", "1000", "--ell", "9", "--out", "o.json",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("ell must be an odd prime"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn survey_json_starts_with_manifest() {
    let (dir, _) = setup();
    let o = run(
        dir.path(),
        &[
            "survey", "--curves", "pair.txt", "--x", "2000", "--ell", "7", "--out", "s.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("s.json")).unwrap();
    assert!(
        text.trim_start().starts_with("{\n  \"manifest\""),
        "{}",
        &text[..80]
    );
    let doc: Value = serde_json::from_str(&text).unwrap();
    let m = &doc["manifest"];
    assert_eq!(m["subcommand"], "survey");
    assert_eq!(m["seed"], 0);
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(m["bad_prime_disclosure"]
        .as_str()
        .unwrap()
        .contains("discriminant"));
    let r = &doc["result"];
    assert_eq!(
        r["disclosure"]["bad_primes_up_to_x"],
        serde_json::json!([2, 5, 11, 31])
    );
    assert!(r["counts"]["pi_ell"].as_u64().unwrap() <= r["counts"]["pi"].as_u64().unwrap());
}

#[test]
fn config_file_with_overriding_flag() {
    let (dir, _) = setup();
    fs::write(
        dir.path().join("run.cfg"),
        "curves = pair.txt\nx = 3000\nt = 2\nout = cfg.json\n",
    )
    .unwrap();
    let o = run(
        dir.path(),
        &["survey", "--config", "run.cfg", "--x", "1500", "--z", "1"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let m = json(&dir.path().join("cfg.json"))["manifest"].clone();
    assert_eq!(m["config"]["entries"]["x"], "3000");
    assert_eq!(m["config"]["entries"]["t"], "2");
    assert!(m["flags"].as_array().unwrap().iter().any(|f| f == "1500"));
    assert_eq!(m["effective"]["x"], 1500);
    // --z displaces the config's t as a group.
    assert_eq!(
        m["effective"]["target"],
        serde_json::json!({ "up_to": 1.0 })
    );
}

#[test]
fn unknown_config_key_is_named() {
    let (dir, _) = setup();
    fs::write(dir.path().join("bad.cfg"), "curves = pair.txt\nxx = 3000\n").unwrap();
    let o = run(
        dir.path(),
        &["survey", "--config", "bad.cfg", "--out", "o.json"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`xx`"), "{}", stderr(&o));
}

#[test]
fn survey_csv_is_thread_count_invariant() {
    let (dir, _) = setup();
    let mut outputs = Vec::new();
    for threads in ["1", "2", "8"] {
        let out = format!("hist{threads}.csv");
        let o = run(
            dir.path(),
            &[
                "survey",
                "--curves",
                "pair.txt",
                "--x",
                "20000",
                "--threads",
                threads,
                "--out",
                &out,
            ],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(fs::read(dir.path().join(&out)).unwrap());
        let sidecar = json(&dir.path().join(format!("{out}.manifest.json")));
        assert_eq!(sidecar["threads"].to_string(), threads);
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    assert!(String::from_utf8(outputs[0].clone())
        .unwrap()
        .starts_with("t,count\n"));
}

#[test]
fn strict_schedule_exits_4_and_clamped_writes_per_ell() {
    let (dir, _) = setup();
    let base = ["survey", "--curves", "pair.txt", "--x", "10000", "--t", "0"];
    let strict = run(
        dir.path(),
        &[&base[..], &["--ell-schedule", "strict", "--out", "s.json"]].concat(),
    );
    assert_eq!(strict.status.code(), Some(4));
    assert!(stderr(&strict).contains("smallest feasible x"));
    let clamped = run(
        dir.path(),
        &[&base[..], &["--ell-schedule", "clamped", "--out", "w.csv"]].concat(),
    );
    assert!(clamped.status.success(), "{}", stderr(&clamped));
    let rows =
        frobtrace::survey::read_per_ell_csv(fs::File::open(dir.path().join("w.csv")).unwrap())
            .unwrap();
    assert!(!rows.is_empty());
}

#[test]
fn group_verify_reports_and_guards() {
    let (dir, _) = setup();
    let o = run(
        dir.path(),
        &[
            "group-verify",
            "--ell",
            "3",
            "--g",
            "2",
            "--lemma",
            "L4.3",
            "--out",
            "gv.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let doc = json(&dir.path().join("gv.json"));
    assert_eq!(doc["result"]["pass"], true);
    assert_eq!(doc["result"]["cardinalities"]["B/U"], 8);

    let missing_t = run(
        dir.path(),
        &[
            "group-verify",
            "--ell",
            "5",
            "--g",
            "1",
            "--lemma",
            "L5.1",
            "--out",
            "gv.json",
        ],
    );
    assert_eq!(missing_t.status.code(), Some(2));
    assert!(
        stderr(&missing_t).contains("needs --t"),
        "{}",
        stderr(&missing_t)
    );

    let big = run(
        dir.path(),
        &[
            "group-verify",
            "--ell",
            "101",
            "--g",
            "3",
            "--lemma",
            "L4.1",
            "--out",
            "gv.json",
        ],
    );
    assert_eq!(big.status.code(), Some(3), "{}", stderr(&big));
}

#[test]
fn trace_to_stdout() {
    let (dir, _) = setup();
    let o = run(dir.path(), &["trace", "--curves", "pair.txt", "--p", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let traces = doc["result"]["traces"].as_array().unwrap();
    assert_eq!(traces[0]["good"], true);
    assert_eq!(traces[1]["good"], false);
    assert!(doc["result"].get("a1p").is_none());

    let o = run(dir.path(), &["trace", "--curves", "pair.txt", "--p", "7"]);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let sum: i64 = doc["result"]["traces"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t["a_p"].as_i64().unwrap())
        .sum();
    assert_eq!(doc["result"]["a1p"], sum);
}

#[test]
fn bounds_csv_layout() {
    let (dir, _) = setup();
    let o = run(
        dir.path(),
        &[
            "bounds",
            "--x-grid",
            "1000,5000,4",
            "--g",
            "2",
            "--t0",
            "--out",
            "b.csv",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,bound,torus_bound,y,u");
    assert_eq!(lines.len(), 6);
    assert!(!text.contains('\r'));
    assert!(dir.path().join("b.csv.manifest.json").exists());
    let bad = run(
        dir.path(),
        &[
            "bounds", "--x-grid", "2,5000,4", "--g", "2", "--out", "b.csv",
        ],
    );
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn report_combines_surveys_on_the_coarser_grid() {
    let (dir, _) = setup();
    fs::write(dir.path().join("one.txt"), "E1: 0,0,0,1,1\n").unwrap();
    let a = run(
        dir.path(),
        &[
            "survey",
            "--curves",
            "pair.txt",
            "--x",
            "8000",
            "--grid-steps",
            "8",
            "--out",
            "a.json",
        ],
    );
    let b = run(
        dir.path(),
        &[
            "survey",
            "--curves",
            "pair.txt",
            "--x",
            "4000",
            "--grid-steps",
            "2",
            "--out",
            "b.json",
        ],
    );
    assert!(a.status.success() && b.status.success());
    let o = run(
        dir.path(),
        &["report", "--inputs", "a.json", "b.json", "--out", "r.csv"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,pi_1,pi_2,bound,torus_bound");
    let xs: Vec<&str> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(xs, ["2000", "4000"]);
    // Same curves, so the shared prefix agrees.
    for l in &lines[1..] {
        let f: Vec<&str> = l.split(',').collect();
        assert_eq!(f[1], f[2]);
    }

    let single = run(
        dir.path(),
        &["report", "--inputs", "a.json", "--out", "r1.json"],
    );
    assert!(single.status.success());
    assert_eq!(
        json(&dir.path().join("r1.json"))["result"]["rows"]
            .as_array()
            .unwrap()
            .len(),
        8
    );

    let c = run(
        dir.path(),
        &[
            "bounds",
            "--x-grid",
            "1000,5000,4",
            "--g",
            "2",
            "--out",
            "bb.json",
        ],
    );
    assert!(c.status.success());
    let mismatch = run(
        dir.path(),
        &["report", "--inputs", "a.json", "bb.json", "--out", "r.csv"],
    );
    assert_eq!(mismatch.status.code(), Some(2));
}

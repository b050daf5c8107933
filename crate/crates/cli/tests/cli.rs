use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_period-lattice"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn forty(dir: &Path) -> PathBuf {
    let o = run(dir, &["synth", "--period", "40", "--corners", "0,13,27", "--out", "forty.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    dir.join("forty.json")
}

#[test]
fn part1_example_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify", "part1", "--n", "2", "--trials", "10000", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let csv = stdout(&o);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("instance,bound,empirical,stderr,pass"));
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() > 10);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
    assert!(rows.iter().any(|r| r.starts_with("span n=2")));
    assert!(rows.iter().any(|r| r.starts_with("two samples generate Z")));
}

#[test]
fn identical_commands_give_identical_transcripts() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    forty(p);
    let mut bodies = Vec::new();
    for out in ["a.json", "b.json"] {
        let o = run(p, &["sample", "--infra", "forty.json", "--N", "32", "--q", "160", "--kappa", "1/9", "--seed", "11", "--out", out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        bodies.push(std::fs::read(p.join(out)).unwrap());
        assert!(p.join(format!("{out}.meta.json")).exists());
    }
    assert_eq!(bodies[0], bodies[1]);
    let a = run(p, &["verify", "part1", "--n", "3", "--trials", "500", "--seed", "3"]);
    let b = run(p, &["verify", "part1", "--n", "3", "--trials", "500", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
    // worker count does not change the draws
    let args = ["verify", "recovery", "--instances", "12", "--seed", "4"];
    let one = bin().current_dir(p).env("RAYON_NUM_THREADS", "1").args(args).output().unwrap();
    let four = bin().current_dir(p).env("RAYON_NUM_THREADS", "4").args(args).output().unwrap();
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("cfg.json"), r#"{"n": 1, "A": "27/2", "C": 1, "D": 2, "det": 40, "mode": "desk", "seed": 5}"#).unwrap();
    let o = run(p, &["plan", "--config", "cfg.json", "--mode", "theorem"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema"], "period-lattice.transcript");
    assert_eq!(v["config"]["mode"], "theorem");
    assert_eq!(v["config"]["seed"], 5);
    assert_eq!(v["config"]["A"], serde_json::json!(["27", "2"]));
    assert_eq!(v["planned"]["mode"], "theorem");
    assert_eq!(v["pass"], true);
}

#[test]
fn exit_codes_follow_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    forty(p);
    // configuration errors
    std::fs::write(p.join("bad.json"), r#"{"bogus": 1}"#).unwrap();
    assert_eq!(code(&run(p, &["plan", "--config", "bad.json"])), 4);
    assert_eq!(code(&run(p, &["report"])), 4);
    assert_eq!(code(&run(p, &["plan", "--n", "1", "--A", "x"])), 4);
    std::fs::write(p.join("other.json"), r#"{"schema": "other", "schema_version": 1}"#).unwrap();
    assert_eq!(code(&run(p, &["report", "other.json"])), 4);
    // budget
    let o = run(p, &["verify", "sampler", "--infra", "forty.json", "--N", "32", "--q", "160", "--kappa", "1/9", "--rounding", "floor", "--budget-terms", "10"]);
    assert_eq!(code(&o), 3);
    // a failing check: a window premise violated by a tiny q
    let o = run(p, &["sample", "--infra", "forty.json", "--N", "32", "--q", "20", "--kappa", "1/9", "--L", "100"]);
    assert_eq!(code(&o), 2);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], false);
    // help is not an error
    assert_eq!(code(&run(p, &["--help"])), 0);
}

#[test]
fn report_on_one_plan_has_one_section_and_the_tables() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = run(p, &["plan", "--n", "1", "--A", "27/2", "--C", "1", "--D", "2", "--det", "40", "--out", "plan.json"]);
    assert_eq!(code(&o), 0);
    let o = run(p, &["report", "plan.json", "--csv", "report.csv"]);
    assert_eq!(code(&o), 0);
    let md = stdout(&o);
    assert_eq!(md.lines().filter(|l| l.starts_with("## ")).count(), 1);
    assert!(md.contains("### Bounds for n = 1..6"));
    assert!(md.contains("| zeta product | 0.607 | 0.505 | 0.467 | 0.450 |"));
    assert!(md.contains("| span product | 1.000 | 0.500 | 0.375 | 0.328 |"));
    assert!(md.contains("| expected iterations | 1.40e8 | 1.27e30 |"));
    let csv = std::fs::read_to_string(p.join("report.csv")).unwrap();
    let plan: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p.join("plan.json")).unwrap()).unwrap();
    assert_eq!(csv.lines().count(), 1 + plan["checks"].as_array().unwrap().len());
}

#[test]
fn pipeline_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    forty(p);
    let o = run(p, &["plan", "--infra", "forty.json", "--mode", "desk-pipeline", "--N", "32", "--q", "17126", "--kappa", "1/9", "--out", "plan.json"]);
    assert_eq!(code(&o), 0);
    let o = run(p, &["sample", "--infra", "forty.json", "--plan", "plan.json", "--seed", "257", "--out", "s.json"]);
    assert_eq!(code(&o), 0);
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p.join("s.json")).unwrap()).unwrap();
    assert_eq!(s["samples"].as_array().unwrap().len(), 2);
    assert_eq!(s["L"], 68572);
    let o = run(p, &["recover", "--input", "s.json", "--infra", "forty.json", "--out", "r.json"]);
    // both samples hit, but here they generate a proper sublattice of the dual
    assert_eq!(code(&o), 2);
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p.join("r.json")).unwrap()).unwrap();
    assert_eq!(r["command"], "recover");
    assert!(r["basis"].is_array());
    let o = run(p, &["report", "plan.json", "s.json", "r.json", "--csv", "all.csv"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("## ")).count(), 4);
}

#[test]
fn recover_from_exact_dual_samples() {
    // two hand-made samples 1/40 and 3/40 generate the dual of 40 Z
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    forty(p);
    let sample = |w: u64| {
        serde_json::json!({
            "rep": 0, "w": [w], "candidate": [[w.to_string(), "34252"]],
            "grid": {"n": 1, "N": 32, "q": 17126, "L": 68572},
            "sigma": [0], "anchor": [0], "M": 1, "good_shift": true, "anchor_ok": true,
            "hit": null, "target_mass": null
        })
    };
    // 2q/40 = 856.3, so w = 856 and 2569 round 1/40 and 3/40
    let t = serde_json::json!({
        "schema": "period-lattice.transcript", "schema_version": 1, "command": "sample", "config": {},
        "rounding": "nearest", "samples": [sample(856), sample(2569)], "checks": [], "pass": true
    });
    std::fs::write(p.join("s.json"), serde_json::to_string(&t).unwrap()).unwrap();
    let o = run(p, &["recover", "--input", "s.json", "--infra", "forty.json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r["distance"].as_f64().unwrap() <= 1.0);
}

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_signed-curriculum");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn every_command_has_help() {
    for cmd in ["ingest", "census", "score", "synth", "train", "eval", "verify-theory"] {
        let o = run(&[cmd, "--help"]);
        assert!(o.status.success(), "{cmd} --help");
        assert!(stdout(&o).contains("Usage"), "{cmd}");
    }
    assert!(run(&["--help"]).status.success());
}

#[test]
fn bad_input_fails_with_message() {
    let o = run(&["census", "/no/such/graph"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/graph"));

    assert!(!run(&["census", "x", "--bogus"]).status.success());
    assert!(!run(&["synth", "--noise", "lots", "-o", "/tmp/x"]).status.success());
    assert!(!run(&["train", "g", "--pacing", "cubic", "-o", "r"]).status.success());
}

#[test]
fn ingest_then_census_and_score() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw.csv");
    // Directed 4-cycle with ratings, a reciprocal duplicate, a zero rating
    // and a self-loop.
    std::fs::write(&raw, "10,20,5,1\n20,30,1,2\n30,40,3,3\n40,10,2,4\n20,10,4,5\n10,30,0,6\n40,40,1,7\n").unwrap();
    let graph = dir.path().join("g.txt");
    let o = run(&["ingest", p(&raw), "-o", p(&graph)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = stdout(&o);
    assert!(report.contains("edges=4"), "{report}");
    assert!(report.contains("dropped_zero_weight=1"), "{report}");
    assert!(report.contains("dropped_self_loops=1"), "{report}");
    assert!(dir.path().join("g.txt.idmap").exists());
    assert!(dir.path().join("g.txt.report").exists());

    let o = run(&["census", p(&graph), "--max-n", "4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("n=4 total 1 balanced 1"), "{}", stdout(&o));
    assert!(stdout(&o).contains("n=3 total 0"));

    let o = run(&["census", p(&graph), "--json"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(json["4"]["balanced"], 1);

    let scores = dir.path().join("scores.csv");
    assert!(run(&["score", p(&graph), "-o", p(&scores)]).status.success());
    let text = std::fs::read_to_string(&scores).unwrap();
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn synth_train_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("s.txt");
    let o = run(&["synth", "--n", "120", "--p-in", "0.15", "--p-out", "0.05", "--seed", "3", "-o", p(&graph)]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("nodes=120"));

    let rundir = dir.path().join("run");
    let o = run(&[
        "train", p(&graph), "--seeds", "2", "--epochs", "15", "-T", "5", "--pacing", "root", "-o", p(&rundir),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.snapshot", "schedule.csv", "epochs.log", "metrics.jsonl", "summary.txt", "model.ckpt"] {
        assert!(rundir.join(f).exists(), "{f}");
    }
    let snapshot = std::fs::read_to_string(rundir.join("config.snapshot")).unwrap();
    assert!(snapshot.contains("kind = \"root\""));
    assert!(snapshot.contains("epochs = 15"));
    assert_eq!(std::fs::read_to_string(rundir.join("metrics.jsonl")).unwrap().lines().count(), 4);
    assert_eq!(std::fs::read_to_string(rundir.join("epochs.log")).unwrap().lines().count(), 2 * 2 * 15);
    let schedule = std::fs::read_to_string(rundir.join("schedule.csv")).unwrap();
    assert!(schedule.starts_with("epoch,prefix_len,g_value\n"));

    let o = run(&["eval", p(&rundir)]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("csg_auc,") && out.contains("random_auc,"), "{out}");

    // The checkpoint loads back.
    signed_curriculum::sgnn::load_checkpoint(&rundir.join("model.ckpt")).unwrap();
}

#[test]
fn train_reads_config_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("s.txt");
    assert!(run(&["synth", "--n", "80", "--p-in", "0.2", "--p-out", "0.05", "-o", p(&graph)]).status.success());
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, "seeds = [7]\n[model]\nepochs = 4\nhidden_dim = 8\nfeature_dim = 8\n[pacing]\nkind = \"geometric\"\nlambda0 = 0.5\nT = 3\n").unwrap();
    let rundir = dir.path().join("run");
    let o = run(&["train", p(&graph), "--config", p(&cfg), "--lambda0", "0.3", "-o", p(&rundir)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let snapshot = std::fs::read_to_string(rundir.join("config.snapshot")).unwrap();
    assert!(snapshot.contains("lambda0 = 0.3"));
    assert!(snapshot.contains("kind = \"geometric\""));
    let metrics = std::fs::read_to_string(rundir.join("metrics.jsonl")).unwrap();
    assert!(metrics.contains("\"seed\":7"));

    std::fs::write(&cfg, "seeds = [1]\nunknown_key = 1\n").unwrap();
    assert!(!run(&["train", p(&graph), "--config", p(&cfg), "-o", p(&rundir)]).status.success());
}

#[test]
fn verify_theory_passes() {
    let o = run(&["verify-theory"]);
    assert!(o.status.success(), "{}", stdout(&o));
    let out = stdout(&o);
    for name in ["3-cycle", "4-cycle", "5-cycle", "6-cycle", "control"] {
        assert!(out.contains(name), "{name}");
    }
    assert!(!out.contains("[FAIL]"));
}

#[test]
fn eval_on_missing_rundir_fails() {
    let o = run(&["eval", "/definitely/missing"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("metrics.jsonl"));
}

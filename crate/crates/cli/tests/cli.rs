use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn uttlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uttlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = uttlab(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let cfg = dir.join("exp.toml");
    fs::write(&cfg, format!("corpus = \"data/corpus.jsonl\"\n{body}")).unwrap();
    cfg
}

#[test]
fn full_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = ok(&["gen-synth", "--size", "600", "--seed", "4", "--out", p(&data)]);
    assert!(out.contains("600 utterances"));

    let summary = ok(&["ingest", p(&data.join("corpus.jsonl")), "--taxonomy", p(&data.join("taxonomy.json"))]);
    assert!(summary.contains("EMO-COG items\t600"));

    let cfg = write_config(
        dir.path(),
        "tasks = [\"EMO-COG\", \"COG-8\"]\nmodels = [\"baseline\", \"nb\", \"gd_svm\"]\nseeds = [1, 2]\n[overrides.gd_svm]\nepochs = 20\n",
    );
    let run = dir.path().join("run");
    let split = ok(&["split", "--config", p(&cfg), "--out", p(&run)]);
    assert!(split.contains("EMO-COG\ttrain 540\ttest 60"));
    assert!(run.join("splits/COG-8/test_ids.txt").exists());

    // evaluating before training names the missing model file
    let early = uttlab(&["evaluate", "--config", p(&cfg), "--out", p(&run)]);
    assert!(!early.status.success());
    assert!(String::from_utf8_lossy(&early.stderr).contains("models"));

    ok(&["train", "--config", p(&cfg), "--out", p(&run)]);
    assert!(run.join("models/COG-8/gd_svm-seed2.json").exists());
    let report = ok(&["evaluate", "--config", p(&cfg), "--out", p(&run)]);
    assert!(report.contains("gd_svm"));
    let first = fs::read_to_string(run.join("report.txt")).unwrap();
    let aggregate = fs::read_to_string(run.join("aggregate.csv")).unwrap();
    assert!(aggregate.lines().any(|l| l.starts_with("COG-8,gd_svm,2,")));

    // report rebuilds identical files from runs.csv
    fs::remove_file(run.join("report.txt")).unwrap();
    ok(&["report", "--out", p(&run)]);
    assert_eq!(fs::read_to_string(run.join("report.txt")).unwrap(), first);
    assert_eq!(fs::read_to_string(run.join("aggregate.csv")).unwrap(), aggregate);

    // external scoring of the internal predictions reproduces the internal row
    let row = ok(&[
        "score-external",
        "--pred",
        p(&run.join("predictions/COG-8/nb.jsonl")),
        "--gold",
        p(&run.join("gold/COG-8.jsonl")),
        "--task",
        "COG-8",
        "--labels",
        p(&run.join("labels/COG-8.txt")),
        "--model",
        "nb",
    ]);
    let runs = fs::read_to_string(run.join("runs.csv")).unwrap();
    let internal = runs.lines().find(|l| l.starts_with("COG-8,nb,")).unwrap();
    assert_eq!(row.lines().nth(1).unwrap(), internal);
}

#[test]
fn errors_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = uttlab(&["split", "--out", p(dir.path())]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("--config"));

    fs::create_dir_all(dir.path().join("data")).unwrap();
    let cfg = write_config(dir.path(), "models = [\"svm\"]\n");
    let bad = uttlab(&["train", "--config", p(&cfg), "--out", p(dir.path())]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("unknown model id \"svm\""));

    let cfg = write_config(dir.path(), "");
    let bad = uttlab(&["train", "--config", p(&cfg), "--out", p(dir.path())]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("corpus.jsonl"));

    let bad = uttlab(&["gen-synth", "--size", "0", "--out", p(dir.path())]);
    assert!(!bad.status.success());

    let gold = dir.path().join("gold.jsonl");
    fs::write(&gold, "{\"item_id\":\"a:0\",\"labels\":[\"EMOTION\"]}\n{\"item_id\":\"a:1\",\"labels\":[\"NON-EMOTION\"]}\n").unwrap();
    let pred = dir.path().join("pred.jsonl");
    fs::write(&pred, "{\"item_id\":\"a:0\",\"labels\":[\"EMOTION\"]}\n").unwrap();
    let bad = uttlab(&["score-external", "--pred", p(&pred), "--gold", p(&gold), "--task", "EMO-COG"]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("a:1"));
    let bad = uttlab(&["score-external", "--pred", p(&pred), "--gold", p(&gold), "--task", "EMO-9"]);
    assert!(!bad.status.success());
}

#[test]
fn gen_synth_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["gen-synth", "--size", "200", "--seed", "9", "--out", p(&a)]);
    ok(&["gen-synth", "--size", "200", "--seed", "9", "--out", p(&b)]);
    assert_eq!(
        fs::read(a.join("corpus.jsonl")).unwrap(),
        fs::read(b.join("corpus.jsonl")).unwrap()
    );
}

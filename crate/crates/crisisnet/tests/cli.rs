use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn crisisnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crisisnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn base_args(out: &Path) -> Vec<String> {
    vec![
        "--config".into(),
        fixtures().join("config.toml").display().to_string(),
        "--out".into(),
        out.display().to_string(),
        "--topics.sweeps".into(),
        "20".into(),
    ]
}

fn run(out: &Path, extra: &[&str]) -> Output {
    let mut args = base_args(out);
    args.extend(extra.iter().map(|s| s.to_string()));
    crisisnet(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn run_then_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["--seed", "3", "run"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = fs::read_to_string(tmp.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 3"));
    fs::remove_file(tmp.path().join("report.md")).unwrap();
    let out = crisisnet(&["--out", tmp.path().to_str().unwrap(), "report"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(tmp.path().join("report.md").is_file());
}

#[test]
fn subcommands_write_their_own_artifacts() {
    for (cmd, expected) in [
        ("ingest", vec!["corpus.jsonl", "stats.txt"]),
        ("sentiment", vec!["sentiment.csv"]),
        ("heatmap", vec!["heatmap.csv", "top_terms.csv"]),
        ("bigrams", vec!["bigrams.csv", "bigrams.gexf"]),
        ("graph", vec!["mentions.csv", "mentions.dot", "mentions.gexf", "metrics.csv", "top_nodes.csv"]),
        ("topics", vec!["coherence.csv", "topics.csv"]),
    ] {
        let tmp = tempfile::tempdir().unwrap();
        let out = run(tmp.path(), &[cmd]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let mut names: Vec<String> = fs::read_dir(tmp.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .filter(|n| n != "manifest.json")
            .collect();
        names.sort();
        assert_eq!(names, expected, "{cmd}");
    }
}

#[test]
fn validation_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["--input.lexicon", "/does/not/exist.tsv", "run"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("input.lexicon"));
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0);

    let out = run(tmp.path(), &["--topics.k_max=0", "run"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("topics.k_max"));

    assert_eq!(run(tmp.path(), &["--bogus", "run"]).status.code(), Some(1));
    assert_eq!(run(tmp.path(), &["frobnicate"]).status.code(), Some(1));
}

#[test]
fn runtime_errors_exit_2_with_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["--graph.method", "path-weight", "--graph.attenuation", "10", "run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("[netgraph]"));
    assert_eq!(fs::read_dir(tmp.path()).unwrap().count(), 0);

    let missing = tmp.path().join("none");
    let out = crisisnet(&["--out", missing.to_str().unwrap(), "report"]);
    assert_eq!(out.status.code(), Some(2));
}

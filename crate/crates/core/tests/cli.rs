use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coqe::corpus::write_corpus;
use coqe::synth::{synthesize, SynthConfig};
use serde_json::Value;

fn coqe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coqe"))
        .args(args)
        .output()
        .unwrap()
}

fn corpus_file(dir: &Path) -> PathBuf {
    let path = dir.join("corpus.jsonl");
    let corpus = synthesize(&SynthConfig {
        sentences: 30,
        seed: 4,
        ..Default::default()
    });
    write_corpus(&corpus, std::fs::File::create(&path).unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn stats_as_json_and_table() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_file(dir.path());
    let v = stdout_json(&coqe(&[
        "stats",
        "--corpus",
        s(&corpus),
        "--format",
        "json",
    ]));
    assert_eq!(v["stats"]["sentence_count"], 30);
    assert_eq!(v["config"]["scheme"], "vcom");
    let table = coqe(&["stats", "--corpus", s(&corpus)]);
    assert!(table.status.success());
    assert!(String::from_utf8_lossy(&table.stdout).contains("Sentences"));
}

#[test]
fn augment_writes_lines_and_a_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_file(dir.path());
    let out = dir.path().join("train.jsonl");
    let status = coqe(&[
        "augment",
        "--corpus",
        s(&corpus),
        "--orders",
        "all",
        "--single-tasks",
        "--out",
        s(&out),
    ]);
    assert!(status.status.success());
    let lines = std::fs::read_to_string(&out).unwrap().lines().count();
    let c = synthesize(&SynthConfig {
        sentences: 30,
        seed: 4,
        ..Default::default()
    });
    let com = c.items.iter().filter(|i| i.is_comparative()).count();
    assert_eq!(lines, com * (24 + 5) + (30 - com));
    let meta: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("train.jsonl.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["config"]["orders"], "all");
    assert_eq!(meta["records"], lines);
}

#[test]
fn render_uses_the_requested_order() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_file(dir.path());
    let out = coqe(&[
        "render",
        "--corpus",
        s(&corpus),
        "--order",
        "PAOS",
        "--style",
        "suffix",
    ]);
    assert!(out.status.success());
    let first: Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stdout).lines().next().unwrap()).unwrap();
    assert_eq!(first["view"], "order:PAOS");
    assert!(first["input"]
        .as_str()
        .unwrap()
        .ends_with("predicate aspect object subject label"));
}

#[test]
fn oracle_decode_then_eval_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_file(dir.path());
    let preds = dir.path().join("preds.jsonl");
    let d = coqe(&["decode", "--corpus", s(&corpus), "--out", s(&preds)]);
    assert!(d.status.success(), "{}", String::from_utf8_lossy(&d.stderr));
    let v = stdout_json(&coqe(&[
        "eval",
        "--corpus",
        s(&corpus),
        "--predictions",
        s(&preds),
        "--format",
        "json",
    ]));
    let tuples = v["report"]["tuples"].as_array().unwrap();
    assert_eq!(tuples.len(), 6);
    assert!(tuples.iter().all(|t| t["f1"] == 1.0));
    let errs = stdout_json(&coqe(&[
        "errors",
        "--predictions",
        s(&preds),
        "--format",
        "json",
    ]));
    assert!(errs["errors"].as_object().unwrap().values().all(|n| n == 0));
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_file(dir.path());
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "corpus = {:?}\ngenerator = \"corrupt\"\nseed = 5\n[corruption]\nswap_markers = 1.0\n",
            s(&corpus)
        ),
    )
    .unwrap();
    let preds = dir.path().join("p.jsonl");
    assert!(coqe(&["--config", s(&cfg), "decode", "--out", s(&preds)])
        .status
        .success());
    let errs = stdout_json(&coqe(&[
        "errors",
        "--predictions",
        s(&preds),
        "--format",
        "json",
    ]));
    assert!(errs["errors"]["wrong_marker_order"].as_u64().unwrap() > 0);

    // a flag beats the file
    assert!(coqe(&[
        "--config",
        s(&cfg),
        "decode",
        "--generator",
        "oracle",
        "--out",
        s(&preds)
    ])
    .status
    .success());
    let errs = stdout_json(&coqe(&[
        "errors",
        "--predictions",
        s(&preds),
        "--format",
        "json",
    ]));
    assert_eq!(errs["errors"]["wrong_marker_order"], 0);
    let meta: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("p.jsonl.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["config"]["generator"], "oracle");
    assert_eq!(meta["config"]["seed"], 5);
}

#[test]
fn same_seed_same_output() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = corpus_file(dir.path());
    let run = || {
        let out = coqe(&[
            "decode",
            "--corpus",
            s(&corpus),
            "--generator",
            "corrupt",
            "--seed",
            "8",
            "--drop-element",
            "0.4",
            "--swap-markers",
            "0.3",
            "--substitute-word",
            "0.3",
            "--truncate",
            "0.2",
        ]);
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run(), run());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(
        &bad,
        "{\"id\":\"1\",\"text\":\"a b\",\"quintuples\":[{\"subject\":[9],\"label\":\"COM\"}]}\n",
    )
    .unwrap();
    let out = coqe(&["stats", "--corpus", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));

    assert_eq!(
        coqe(&["stats", "--corpus", s(&bad), "--scheme", "nope"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(coqe(&["frobnicate"]).status.code(), Some(1));

    let corpus = corpus_file(dir.path());
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let out = coqe(&[
        "decode",
        "--corpus",
        s(&corpus),
        "--generator",
        "external",
        "--endpoint",
        &format!("tcp://{addr}"),
        "--timeout-ms",
        "200",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = coqe(&[
        "decode",
        "--corpus",
        s(&corpus),
        "--generator",
        "corrupt",
        "--truncate",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

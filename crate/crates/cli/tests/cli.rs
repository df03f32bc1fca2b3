use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn sica(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sica"))
        .args(args)
        .stdin(Stdio::null())
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = sica(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    sica(args).status.code().expect("exit code")
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

fn exact(v: &Value) -> (i64, i64) {
    (v["num"].as_i64().unwrap(), v["den"].as_i64().unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn figures_match_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["figures", "--output-dir", p(dir.path())]);
    let mut names: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 16);
    for name in names {
        let got = std::fs::read_to_string(dir.path().join(&name)).unwrap();
        let want = std::fs::read_to_string(golden(&name)).unwrap();
        assert_eq!(got, want, "{name}");
    }
}

#[test]
fn fig3_statistics() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "paper-figures",
        "--which",
        "fig3",
        "--output-dir",
        p(dir.path()),
    ]);
    let stats = json(&std::fs::read_to_string(dir.path().join("fig3.stats.json")).unwrap());
    let r = &stats["report"];
    assert_eq!(exact(&r["s_chsh"]), (16, 7));
    assert_eq!(exact(&r["eta"]), (14, 15));
    assert_eq!(r["coincidence_bound"]["rhs"], 32);
    assert_eq!(r["coincidence_bound"]["lhs"], 32);
    assert_eq!(exact(&r["efficiency_bound"]["s_eta"]), (32, 15));
    assert_eq!(r["efficiency_bound"]["verdict"], "violates");
    let table = std::fs::read_to_string(dir.path().join("fig3.json")).unwrap();
    assert_eq!(table, std::fs::read_to_string(golden("fig3.json")).unwrap());
}

#[test]
fn empty_events_file_has_no_coincidences() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.jsonl");
    std::fs::write(&input, "").unwrap();
    let report = json(&ok(&["analyze", "--input", p(&input)]));
    assert!(report["s_chsh"].is_null());
    for c in report["correlations"].as_array().unwrap() {
        assert_eq!(c["n_c"], 0);
        assert!(c["e"].is_null());
    }
    let text = ok(&["analyze", "--input", p(&input), "--format", "text"]);
    assert!(text.contains("S_CHSH: undefined"));
}

#[test]
fn simulation_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        ok(&[
            "simulate",
            "--seed",
            seed,
            "--slots",
            "500",
            "--schedule",
            "random",
            "--eta",
            "0.8",
            "--output",
            p(&path),
        ]);
        std::fs::read(path).unwrap()
    };
    let (a, b, c) = (
        run("a.jsonl", "7"),
        run("b.jsonl", "7"),
        run("c.jsonl", "8"),
    );
    assert_eq!(a, b);
    assert_ne!(a, c);
    let first = String::from_utf8(a).unwrap();
    let meta = json(first.lines().next().unwrap());
    assert_eq!(meta["meta"]["generator"], "ChaCha8Rng");
    assert_eq!(meta["meta"]["seed"], 7);
}

#[test]
fn artifacts_reanalyze_consistently() {
    let dir = tempfile::tempdir().unwrap();
    let figs = dir.path().join("figs");
    ok(&["figures", "--output-dir", p(&figs)]);
    let black = figs.join("fig6.jsonl");

    let complete = dir.path().join("complete.json");
    ok(&[
        "sica-complete",
        "--input",
        p(&black),
        "--free-choices",
        "1,2",
        "--output",
        p(&complete),
    ]);
    assert_eq!(
        std::fs::read_to_string(&complete).unwrap(),
        std::fs::read_to_string(figs.join("fig8.json")).unwrap()
    );
    let condensed = dir.path().join("condensed.json");
    ok(&[
        "sica-condense",
        "--input",
        p(&complete),
        "--output",
        p(&condensed),
    ]);
    assert_eq!(
        std::fs::read_to_string(&condensed).unwrap(),
        std::fs::read_to_string(figs.join("fig9.json")).unwrap()
    );
    let stats = json(&std::fs::read_to_string(figs.join("fig9.stats.json")).unwrap());
    let report = json(&ok(&["analyze", "--input", p(&condensed)]));
    assert_eq!(report, stats["report"]);

    let red = figs.join("fig6red.jsonl");
    let reordered = dir.path().join("reordered.jsonl");
    ok(&[
        "sica-reorder",
        "--input",
        p(&red),
        "--output",
        p(&reordered),
    ]);
    let seven = json(&ok(&["sica-condense", "--input", p(&reordered)]));
    assert_eq!(
        seven,
        json(&std::fs::read_to_string(figs.join("fig7.json")).unwrap())
    );

    let filled = dir.path().join("filled.json");
    ok(&[
        "fill",
        "--input",
        p(&black),
        "--policy",
        "zeros",
        "--output",
        p(&filled),
    ]);
    let report = json(&ok(&["analyze", "--input", p(&filled)]));
    assert_eq!(exact(&report["eta"]), (1, 2));
    assert_eq!(report["efficiency_bound"]["verdict"], "not_applicable");
    let both = json(&ok(&["analyze", "--input", p(&black)]));
    assert_eq!(report["correlations"], both["correlations"]);

    let sim = dir.path().join("sim.jsonl");
    ok(&[
        "simulate",
        "--seed",
        "3",
        "--slots",
        "400",
        "--output",
        p(&sim),
    ]);
    let once = ok(&["analyze", "--input", p(&sim)]);
    assert_eq!(once, ok(&["analyze", "--input", p(&sim)]));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let figs = dir.path().join("figs");
    ok(&["figures", "--which", "fig6", "--output-dir", p(&figs)]);
    let black = figs.join("fig6.jsonl");
    assert_eq!(code(&["analyze", "--bogus"]), 2);
    assert_eq!(code(&["figures", "--which", "fig4"]), 2);
    assert_eq!(code(&["sica-condense", "--input", p(&black)]), 3);
    assert_eq!(code(&["sica-reorder", "--input", p(&black)]), 3);
    assert_eq!(
        code(&["sica-complete", "--input", p(&black), "--free-choices", "1"]),
        3
    );
    assert_eq!(code(&["oracle", "--slots", "9"]), 3);
    assert_eq!(code(&["simulate", "--slots", "5", "--eta", "2"]), 3);
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, "{\"slot\":0,\"a_setting\":\"alpha\"}\n").unwrap();
    assert_eq!(code(&["analyze", "--input", p(&bad)]), 3);
    let missing = dir.path().join("missing.jsonl");
    assert_eq!(code(&["analyze", "--input", p(&missing)]), 1);
    let nowhere = dir.path().join("no/such/dir/out.json");
    assert_eq!(
        code(&["analyze", "--input", p(&black), "--output", p(&nowhere)]),
        1
    );
}

#[test]
fn failed_reorder_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["figures", "--which", "fig6", "--output-dir", p(dir.path())]);
    let out = dir.path().join("never.jsonl");
    let o = sica(&[
        "sica-reorder",
        "--input",
        p(&dir.path().join("fig6.jsonl")),
        "--output",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
    let report = json(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(report["success"], false);
    assert_eq!(
        report["obstruction"]["cascade"].as_array().unwrap().len(),
        4
    );
}

#[test]
fn oracle_sweeps() {
    let r = json(&ok(&["oracle", "--objective", "chsh", "--slots", "2"]));
    assert_eq!(exact(&r["max_value"]), (2, 1));
    assert_eq!(r["tables_scanned"], 256);
    let r = json(&ok(&[
        "oracle",
        "--objective",
        "s-eta",
        "--slots",
        "2",
        "--alphabet",
        "ternary",
        "--constraint",
        "eta>=1",
    ]));
    assert_eq!(exact(&r["max_value"]), (2, 1));
    assert_eq!(r["spec"]["constraints"][0], "eta>=1");
    let r = json(&ok(&[
        "oracle",
        "--objective",
        "chsh",
        "--slots",
        "4",
        "--layout",
        "block-run",
        "--constraint",
        "sica",
    ]));
    assert_eq!(exact(&r["max_value"]), (2, 1));

    let dir = tempfile::tempdir().unwrap();
    ok(&["figures", "--which", "fig6", "--output-dir", p(dir.path())]);
    let census = json(&ok(&[
        "oracle",
        "--objective",
        "census",
        "--input",
        p(&dir.path().join("fig6.jsonl")),
        "--witnesses",
        "16",
    ]));
    assert_eq!(census["valid"], 16);
    assert_eq!(census["fillings"], 65536);
    assert_eq!(census["samples"].as_array().unwrap().len(), 16);
}

#[test]
fn text_views() {
    let dir = tempfile::tempdir().unwrap();
    let text = ok(&[
        "figures",
        "--which",
        "fig8",
        "--output-dir",
        p(dir.path()),
        "--format",
        "text",
    ]);
    assert!(text.contains("a   -  +  -  + [-][+][-][+]"));
    assert!(text.contains("resampled E(α,β') = 1, S = 2"));
    let check = ok(&[
        "sica-check",
        "--input",
        p(&dir.path().join("fig8.json")),
        "--format",
        "text",
    ]);
    assert_eq!(check, "Sica's condition holds\n");
}

use std::path::PathBuf;
use std::process::Command;

use ecie::cli::run;
use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn ecie(args: &[&str]) -> ecie::cli::CommandResult {
    run(std::iter::once("ecie").chain(args.iter().copied()))
}

#[test]
fn validate_ok_fixture() {
    let r = ecie(&["validate", &fixture("ok.jsonl")]);
    assert_eq!(r.exit_code, 0, "{}", r.stderr);
    assert_eq!(r.payload["errors"], Value::Array(vec![]));
    assert_eq!(r.payload["schema_version"], 1);
    let strict = ecie(&["validate", "--strict", &fixture("ok.jsonl")]);
    assert_eq!(strict.exit_code, 0);
}

#[test]
fn validate_reports_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(
        &bad,
        r#"{"id":"x","tokens":["a","b"],"sentences":[[0,2]],"clusters":[{"id":"c","mentions":[[1,5]],"tags":[]}],"relations":[{"head":"c","type":"in0","tail":"zz"}]}"#,
    )
    .unwrap();
    let r = ecie(&["validate", bad.to_str().unwrap()]);
    assert_eq!(r.exit_code, 1);
    assert!(r.payload["errors"].as_array().unwrap().len() >= 2);
    assert!(r.stderr.contains("error:"));
}

#[test]
fn self_comparison_scores_one() {
    let g = fixture("ok.jsonl");
    let r = ecie(&["score", "--task", "ner", "--level", "soft", "--gold", &g, "--pred", &g]);
    assert_eq!(r.exit_code, 0, "{}", r.stderr);
    let results = r.payload["results"].as_array().unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0]["f1"], 1.0);

    let all = ecie(&["score", "--task", "all", "--gold", &g, "--pred", &g, "--per-label"]);
    assert_eq!(all.exit_code, 0);
    let results = all.payload["results"].as_array().unwrap();
    assert_eq!(results.len(), 6);
    assert!(results.iter().all(|r| r["f1"] == 1.0));
    assert!(results[0]["per_label"].is_object());
    assert_eq!(all.payload["coref"]["avg_f1"], 1.0);
}

#[test]
fn missing_head_is_one_violation() {
    let r = ecie(&["rules", "check", &fixture("missing_head.jsonl"), "--strict"]);
    assert_eq!(r.exit_code, 1);
    let v = r.payload["violations"].as_array().unwrap();
    assert_eq!(v.len(), 1);
    assert_eq!(v[0]["rule"], "C.27");
    assert_eq!(v[0]["missing"]["predicate"], "based_in0");

    let lenient = ecie(&["rules", "check", &fixture("missing_head.jsonl")]);
    assert_eq!(lenient.exit_code, 0);
    assert_eq!(lenient.payload["violation_count"], 1);

    let ok = ecie(&["rules", "check", &fixture("ok.jsonl"), "--strict"]);
    assert_eq!(ok.exit_code, 0);
    assert_eq!(ok.payload["violation_count"], 0);
}

#[test]
fn closure_repairs_missing_head() {
    let dir = tempfile::tempdir().unwrap();
    let closed = dir.path().join("closed.jsonl");
    let r = ecie(&[
        "rules",
        "check",
        &fixture("missing_head.jsonl"),
        "--closure",
        "--corpus-out",
        closed.to_str().unwrap(),
    ]);
    assert_eq!(r.exit_code, 0, "{}", r.stderr);
    assert_eq!(r.payload["derived_relations"], 1);
    let again = ecie(&["rules", "check", closed.to_str().unwrap(), "--strict"]);
    assert_eq!(again.exit_code, 0);
}

#[test]
fn kappa_self_agreement() {
    let f = fixture("ok.jsonl");
    for task in ["entity", "coref", "linking", "relation"] {
        let r = ecie(&["kappa", "--a", &f, "--b", &f, "--task", task]);
        assert_eq!(r.exit_code, 0, "{task}: {}", r.stderr);
        assert_eq!(r.payload["overall"]["kappa"], 1.0, "{task}");
    }
}

#[test]
fn stats_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("stats.json");
    let tsv = dir.path().join("cdf.tsv");
    let r = ecie(&[
        "stats",
        &fixture("ok.jsonl"),
        "--out",
        out.to_str().unwrap(),
        "--plot-data",
        tsv.to_str().unwrap(),
    ]);
    assert_eq!(r.exit_code, 0, "{}", r.stderr);
    assert!(r.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written, r.payload);
    assert_eq!(written["summary"]["documents"], 2);
    assert_eq!(written["summary"]["mentions"], 6);
    assert_eq!(written["summary"]["relation_triples"], 4);
    assert_eq!(written["prior_link_baseline"]["evaluated"], 1);
    let tsv = std::fs::read_to_string(&tsv).unwrap();
    assert!(tsv.starts_with("threshold\t"));
}

#[test]
fn decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.jsonl");
    std::fs::write(
        &pred,
        concat!(
            r#"{"id":"doc2","p_cl":{"a":[[0,1]],"b":[[3,4]]},"p_men":[[[0,1],"gpe2"],[[3,4],"gpe0"]],"p_rel":[[[0,1],"in0",[3,4]],[[0,1],"in0",[2,3]]]}"#,
            "\n"
        ),
    )
    .unwrap();
    let out = dir.path().join("out.jsonl");
    let r = ecie(&["decode", "--pred", pred.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(r.exit_code, 0, "{}", r.stderr);
    assert_eq!(r.payload["discarded_relations"], 1);
    let line: Value = serde_json::from_str(std::fs::read_to_string(&out).unwrap().trim()).unwrap();
    assert_eq!(line["d_rel"][0]["types"][0], "in0");

    let docs = dir.path().join("docs.jsonl");
    let r = ecie(&[
        "decode",
        "--pred",
        pred.to_str().unwrap(),
        "--out",
        docs.to_str().unwrap(),
        "--template",
        &fixture("ok.jsonl"),
    ]);
    assert_eq!(r.exit_code, 0, "{}", r.stderr);
    let v = ecie(&["validate", docs.to_str().unwrap()]);
    assert_eq!(v.exit_code, 0, "{}", v.stdout);
    let s = ecie(&["score", "--task", "re", "--level", "hard", "--gold", &fixture("ok.jsonl"), "--pred", docs.to_str().unwrap()]);
    assert_eq!(s.exit_code, 0, "{}", s.stderr);
    // doc1 has no prediction and counts as empty
    let row = &s.payload["results"][0];
    assert_eq!(row["precision"], 1.0);
    assert!(row["recall"].as_f64().unwrap() < 1.0);
}

#[test]
fn usage_errors() {
    for args in [&["bogus"][..], &["score", "--task", "xx"], &["validate"], &["rules"], &["kappa", "--a", "x"]] {
        let r = ecie(args);
        assert_eq!(r.exit_code, 2, "{args:?}");
        assert!(r.stderr.contains("Usage"), "{args:?}");
    }
}

#[test]
fn runtime_errors_are_json() {
    let r = ecie(&["score", "--task", "ner", "--gold", "/no/such", "--pred", "/no/such"]);
    assert_eq!(r.exit_code, 1);
    assert_eq!(r.payload["error"]["kind"], "io");
    let parsed: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(parsed, r.payload);
}

#[test]
fn outputs_are_deterministic() {
    let f = fixture("ok.jsonl");
    let a = ecie(&["stats", &f]);
    let b = ecie(&["stats", &f]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_ecie");
    let ok = Command::new(bin).args(["validate", &fixture("ok.jsonl")]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let payload: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(payload["schema_version"], 1);
    let strict = Command::new(bin)
        .args(["rules", "check", &fixture("missing_head.jsonl"), "--strict"])
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(1));
    let usage = Command::new(bin).arg("--nope").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&usage.stderr).contains("Usage"));
}

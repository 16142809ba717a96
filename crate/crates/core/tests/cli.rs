mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{fixture, GOLDEN_CLAIM};

fn factlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_factlab"))
        .args(args)
        .env_remove("FACTLAB_LLM_API_KEY")
        .env_remove("FACTLAB_SEARCH_API_KEY")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_writes_the_golden_report() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let o = factlab(&[
        "--config",
        path(&fixture("golden/golden.toml")),
        "--out",
        path(dir.path()),
        "--trace",
        path(&trace),
        "verify",
        "--id",
        "g01",
        "--claim",
        GOLDEN_CLAIM,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let got = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let want = std::fs::read_to_string(fixture("golden/expected_report.json")).unwrap();
    assert_eq!(got, want);
    assert_eq!(
        std::fs::read(&trace).unwrap(),
        std::fs::read(fixture("golden/expected_trace.jsonl")).unwrap()
    );
    assert!(stdout(&o).contains("fake"));
}

#[test]
fn credibility_without_reliability_data_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(
        &cfg,
        format!(
            "[llm]\nscript = \"{}\"\n[search]\nfixture = \"{}\"\n",
            fixture("golden/script.json").display(),
            fixture("golden/search.json").display()
        ),
    )
    .unwrap();
    let o = factlab(&["--config", path(&cfg), "verify", "--id", "g01", "--claim", GOLDEN_CLAIM]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("reliability"));
}

#[test]
fn disabled_tools_never_appear_in_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.jsonl");
    let o = factlab(&[
        "--config",
        path(&fixture("golden/golden.toml")),
        "--trace",
        path(&trace),
        "--disable-tools",
        "web_search,numeric_verification",
        "verify",
        "--id",
        "g01",
        "--claim",
        GOLDEN_CLAIM,
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&trace).unwrap();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        if v["kind"] == "tool_call" {
            assert_eq!(v["tool"], "credibility_assessment", "{line}");
        }
    }
}

#[test]
fn unknown_secret_flag_is_rejected() {
    let o = factlab(&["--api-key", "sk-nope", "verify", "--claim", "x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&o.stderr).contains("sk-nope"));
    assert!(!stdout(&o).contains("sk-nope"));
}

#[test]
fn ablate_writes_five_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = factlab(&["--config", path(&fixture("ablation/ablation.toml")), "--out", path(dir.path()), "ablate"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("ablation.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[0].starts_with("config,accuracy,precision,recall,f1"));
    assert!(lines[5].starts_with("LLM Only,"));
    assert!(lines[5].ends_with(",0,0,0"));
    assert!(dir.path().join("ablation.json").exists());
}

#[test]
fn perturb_keeps_ids_and_labels() {
    let dir = tempfile::tempdir().unwrap();
    let o = factlab(&[
        "--config",
        path(&fixture("ablation/ablation.toml")),
        "--out",
        path(dir.path()),
        "perturb",
        "--level",
        "L1",
        "--rewriter",
        "fixture",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let orig = std::fs::read_to_string(fixture("ablation/claims.jsonl")).unwrap();
    let out = std::fs::read_to_string(dir.path().join("perturbed_L1_paraphrase.jsonl")).unwrap();
    let parse = |s: &str| -> Vec<serde_json::Value> { s.lines().map(|l| serde_json::from_str(l).unwrap()).collect() };
    let (a, b) = (parse(&orig), parse(&out));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x["id"], y["id"]);
        assert_eq!(x["label"], y["label"]);
        assert_ne!(x["text"], y["text"]);
    }
}

#[test]
fn score_report_prints_the_mean_triple() {
    let dir = tempfile::tempdir().unwrap();
    let o = factlab(&[
        "--out",
        path(dir.path()),
        "score-report",
        path(&fixture("golden/expected_report.json")),
        "--script",
        path(&fixture("golden/judge_script.json")),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("relevance 0.700 consistency 0.800 diversity 0.600"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("quality.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("0.7,0.8,0.6"), "{csv}");
}

#[test]
fn missing_live_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("live.toml");
    std::fs::write(&cfg, "[llm]\nprovider = \"http\"\n[agent]\nenabled_tools = []\n").unwrap();
    let o = factlab(&["--config", path(&cfg), "verify", "--claim", "The sky is green."]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FACTLAB_LLM_API_KEY"));
}

//! End-to-end tests for the `pbforge` binary.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pbforge"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(format!(
        "{}/../core/tests/fixtures/{name}.bin",
        env!("CARGO_MANIFEST_DIR")
    ))
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Write a small shop.User reference corpus in NDJSON corpus form.
fn write_corpus(path: &Path, records: usize) {
    let mut f = std::fs::File::create(path).unwrap();
    for i in 0..records {
        let user_type = ["free", "pro", "enterprise"][i % 3];
        let credit = match user_type {
            "free" => 100 + (i % 9) as i64 * 100,
            "pro" => 1_000 + (i % 16) as i64 * 250,
            _ => 5_000 + (i % 15) as i64 * 1_000,
        };
        writeln!(
            f,
            concat!(
                r#"{{"type":"shop.User","payload":{{"id":"{}","userType":"{}","#,
                r#""creditLimit":{},"email":"user{}@example.com","tier":"BASIC","active":{}}}}}"#
            ),
            i as i64 * 13 + 1,
            user_type,
            credit,
            i % 40,
            i % 2 == 0
        )
        .unwrap();
    }
}

#[test]
fn generate_writes_requested_ndjson_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.ndjson");
    let result = bin()
        .args(["generate", "--descriptor"])
        .arg(fixture("demo"))
        .args(["--type", "demo.Ping", "--count", "10", "--seed", "7", "--format", "ndjson"])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", stderr(&result));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 10);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.is_object());
    }
}

#[test]
fn generate_is_deterministic_across_invocations_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (name, workers) in [("a", "1"), ("b", "4"), ("c", "1")] {
        let out = dir.path().join(name);
        let result = bin()
            .args(["generate", "--descriptor"])
            .arg(fixture("shop"))
            .args(["--type", "shop.Order", "--count", "200", "--seed", "5"])
            .args(["--format", "pb", "--workers", workers])
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(result.status.success(), "{}", stderr(&result));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn unknown_flag_exits_1() {
    let result = bin()
        .args(["generate", "--no-such-flag"])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn help_exits_0_and_lists_flags() {
    for sub in ["analyze", "generate", "validate", "bench"] {
        let result = bin().args([sub, "--help"]).output().unwrap();
        assert_eq!(result.status.code(), Some(0), "{sub} --help");
        let text = stdout(&result);
        assert!(text.contains("--descriptor"), "{sub} help:\n{text}");
    }
}

#[test]
fn missing_descriptor_file_exits_2() {
    let result = bin()
        .args(["generate", "--descriptor", "/nonexistent.bin"])
        .args(["--type", "demo.Ping", "--count", "1", "--out", "/tmp/never.ndjson"])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2), "{}", stderr(&result));
}

#[test]
fn unknown_type_exits_1_and_leaves_no_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.ndjson");
    let result = bin()
        .args(["generate", "--descriptor"])
        .arg(fixture("demo"))
        .args(["--type", "demo.Nope", "--count", "1"])
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1), "{}", stderr(&result));
    assert!(!out.exists(), "partial output left behind");
    assert!(!out.with_extension("ndjson.tmp").exists(), "temp file left behind");
}

#[test]
fn analyze_generate_validate_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.ndjson");
    write_corpus(&corpus, 600);
    let model = dir.path().join("model.json");

    let result = bin()
        .args(["analyze", "--descriptor"])
        .arg(fixture("shop"))
        .arg("--logs")
        .arg(&corpus)
        .arg("--out")
        .arg(&model)
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", stderr(&result));
    let model_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&model).unwrap()).unwrap();
    assert_eq!(model_json["format"], "domain-model/v1");

    let dataset = dir.path().join("dataset.ndjson");
    let result = bin()
        .args(["generate", "--descriptor"])
        .arg(fixture("shop"))
        .arg("--domain")
        .arg(&model)
        .args(["--type", "shop.User", "--count", "600", "--seed", "1"])
        .arg("--out")
        .arg(&dataset)
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", stderr(&result));

    let rules = dir.path().join("rules.json");
    std::fs::write(
        &rules,
        serde_json::json!({
            "format": "rules/v1",
            "rules": [
                {"rule": "non_null", "field": "user_type"},
                {"rule": "in_range", "field": "credit_limit", "min": 100.0, "max": 20000.0}
            ]
        })
        .to_string(),
    )
    .unwrap();

    let report_path = dir.path().join("report.json");
    let result = bin()
        .arg("validate")
        .arg(&dataset)
        .arg("--descriptor")
        .arg(fixture("shop"))
        .args(["--type", "shop.User"])
        .arg("--reference")
        .arg(&corpus)
        .arg("--rules")
        .arg(&rules)
        .arg("--out")
        .arg(&report_path)
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", stderr(&result));
    let text = stdout(&result);
    assert!(text.contains("quality assessment"), "{text}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(report["overall"].as_f64().unwrap() > 0.5, "{report}");
}

#[test]
fn validate_reads_pb_datasets() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.ndjson");
    write_corpus(&corpus, 300);
    let dataset = dir.path().join("dataset.pb");
    let result = bin()
        .args(["generate", "--descriptor"])
        .arg(fixture("shop"))
        .args(["--type", "shop.User", "--count", "300", "--seed", "2", "--format", "pb"])
        .arg("--out")
        .arg(&dataset)
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", stderr(&result));
    let result = bin()
        .arg("validate")
        .arg(&dataset)
        .arg("--descriptor")
        .arg(fixture("shop"))
        .args(["--type", "shop.User", "--format", "pb"])
        .arg("--reference")
        .arg(&corpus)
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", stderr(&result));
    assert!(stdout(&result).contains("structural"));
}

#[test]
fn bench_renders_table() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.ndjson");
    write_corpus(&corpus, 400);
    let model = dir.path().join("model.json");
    let result = bin()
        .args(["analyze", "--descriptor"])
        .arg(fixture("shop"))
        .arg("--logs")
        .arg(&corpus)
        .arg("--out")
        .arg(&model)
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", stderr(&result));

    let result = bin()
        .args(["bench", "--descriptor"])
        .arg(fixture("shop"))
        .args(["--type", "shop.User", "--sizes", "100", "--strategies", "random,statistical"])
        .arg("--domain")
        .arg(&model)
        .arg("--reference")
        .arg(&corpus)
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", stderr(&result));
    let text = stdout(&result);
    assert!(text.contains("strategy"), "{text}");
    assert!(text.contains("random"), "{text}");
    assert!(text.contains("statistical"), "{text}");
}

#[test]
fn config_file_supplies_defaults_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        serde_json::json!({"format": "config/v1", "seed": 7}).to_string(),
    )
    .unwrap();

    // seed from config == seed from flag
    let from_config = dir.path().join("a.ndjson");
    let result = bin()
        .args(["generate", "--descriptor"])
        .arg(fixture("demo"))
        .args(["--type", "demo.Ping", "--count", "20"])
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&from_config)
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", stderr(&result));
    let from_flag = dir.path().join("b.ndjson");
    let result = bin()
        .args(["generate", "--descriptor"])
        .arg(fixture("demo"))
        .args(["--type", "demo.Ping", "--count", "20", "--seed", "7"])
        .arg("--out")
        .arg(&from_flag)
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", stderr(&result));
    assert_eq!(
        std::fs::read(&from_config).unwrap(),
        std::fs::read(&from_flag).unwrap()
    );

    // unknown key rejected
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        serde_json::json!({"format": "config/v1", "sedd": 7}).to_string(),
    )
    .unwrap();
    let result = bin()
        .args(["generate", "--descriptor"])
        .arg(fixture("demo"))
        .args(["--type", "demo.Ping", "--count", "1"])
        .arg("--config")
        .arg(&bad)
        .args(["--out", "/tmp/never2.ndjson"])
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1), "{}", stderr(&result));
}

#[test]
fn analyze_accepts_annotations_via_config() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.ndjson");
    write_corpus(&corpus, 200);
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        serde_json::json!({
            "format": "config/v1",
            "annotations": [
                {"type": "shop.User", "controlling": "user_type", "dependent": "credit_limit"}
            ]
        })
        .to_string(),
    )
    .unwrap();
    let model_path = dir.path().join("model.json");
    let result = bin()
        .args(["analyze", "--descriptor"])
        .arg(fixture("shop"))
        .arg("--logs")
        .arg(&corpus)
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&model_path)
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", stderr(&result));
    let model: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&model_path).unwrap()).unwrap();
    let deps = model["dependencies"]["shop.User"].as_array().unwrap();
    assert!(
        deps.iter().any(|d| d["controlling"] == "user_type"
            && d["dependent"] == "credit_limit"
            && d["provenance"] == "annotation"),
        "{deps:?}"
    );
}

//! CLI behavior: exit codes, output formats, and manifests.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sumprior"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_code(out: &Output, code: i32, what: &str) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "{what}: expected exit {code}, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn make_data(dir: &Path) {
    let out = run(
        &[
            "synth", "--vocab", "12", "--topics", "8", "--seed", "1", "--systems", "4",
            "--doc-tokens", "120", "--out", "data.jsonl",
        ],
        dir,
    );
    assert_code(&out, 0, "synth");
}

#[test]
fn infer_writes_model_with_provenance_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    make_data(dir.path());
    let out = run(
        &["infer", "--algo", "ms-d", "--data", "data.jsonl", "--gamma", "auto", "--out", "k.json"],
        dir.path(),
    );
    assert_code(&out, 0, "infer ms-d");
    let model: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("k.json")).unwrap()).unwrap();
    assert_eq!(model["provenance"]["algorithm"], "ms-d");
    assert!(model["provenance"]["hyperparams"]["gamma"].is_number());
    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("k.json.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "infer");
    assert!(manifest["input_hashes"]
        .as_object()
        .unwrap()
        .keys()
        .any(|k| k.ends_with("data.jsonl")));
    assert!(manifest["wall_time_ms"].is_number());
}

#[test]
fn hpl_without_judgments_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("unjudged.jsonl"),
        "{\"id\": \"a\", \"documents\": [\"One two. Three four.\"], \"reference_summaries\": [\"one\"]}\n",
    )
    .unwrap();
    let out = run(
        &["infer", "--algo", "hpl", "--data", "unjudged.jsonl", "--out", "k.json"],
        dir.path(),
    );
    assert_code(&out, 4, "hpl without judgments");
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["infer", "--algo", "ms-u", "--data", "missing.jsonl", "--out", "k.json"],
        dir.path(),
    );
    assert_code(&out, 3, "missing data file");

    std::fs::write(dir.path().join("bad.jsonl"), "{\"id\": \"a\"}\n").unwrap();
    let out = run(
        &["infer", "--algo", "ms-u", "--data", "bad.jsonl", "--out", "k.json"],
        dir.path(),
    );
    assert_code(&out, 3, "schema violation");
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}

#[test]
fn bad_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["infer", "--algo", "nope", "--data", "x", "--out", "y"], dir.path());
    assert_code(&out, 2, "unknown algorithm");
    let out = run(
        &["infer", "--algo", "ms-u", "--data", "x", "--out", "y", "--gamma", "banana"],
        dir.path(),
    );
    assert_code(&out, 2, "bad gamma literal");
    make_data(dir.path());
    let out = run(&["eval", "--data", "data.jsonl", "--out", "r.json"], dir.path());
    assert_code(&out, 2, "eval without a scorer choice");
    let out = run(
        &["eval", "--data", "data.jsonl", "--baseline", "idf", "--out", "r.json"],
        dir.path(),
    );
    assert_code(&out, 2, "idf baseline without corpus");
}

#[test]
fn algorithm_preconditions_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    make_data(dir.path());
    let out = run(
        &[
            "eval", "--data", "data.jsonl", "--algo", "hpl", "--cv", "40", "--out", "r.json",
        ],
        dir.path(),
    );
    assert_code(&out, 4, "cv larger than topic count");
    let out = run(
        &[
            "infer", "--algo", "ms-u", "--data", "data.jsonl", "--gamma", "0.5", "--out", "k.json",
        ],
        dir.path(),
    );
    assert_code(&out, 4, "gamma below one for the uniform prior");
}

#[test]
fn baseline_eval_needs_no_model() {
    let dir = tempfile::tempdir().unwrap();
    make_data(dir.path());
    let out = run(
        &["eval", "--data", "data.jsonl", "--baseline", "kl", "--out", "r.json"],
        dir.path(),
    );
    assert_code(&out, 0, "kl baseline");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["scorer"], "kl_sd");
    assert_eq!(report["aggregate"]["n_topics"], 8);

    // IDF baseline with a background corpus file.
    std::fs::write(
        dir.path().join("background.txt"),
        "w0 w1 w2 common words\nw0 w3 other doc\nw0 w1 again\n",
    )
    .unwrap();
    let out = run(
        &[
            "eval", "--data", "data.jsonl", "--baseline", "idf", "--idf-corpus",
            "background.txt", "--out", "idf.json",
        ],
        dir.path(),
    );
    assert_code(&out, 0, "idf baseline");
}

#[test]
fn geometry_outputs_centered_coordinates() {
    let dir = tempfile::tempdir().unwrap();
    make_data(dir.path());
    let out = run(
        &[
            "geometry", "--data", "data.jsonl", "--model", "data.k_star.json", "--mds", "2",
            "--out", "geo.csv",
        ],
        dir.path(),
    );
    assert_code(&out, 0, "geometry");
    let csv = std::fs::read_to_string(dir.path().join("geo.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("label,x0,x1"));
    let mut sums = [0.0f64; 2];
    let mut count = 0;
    let mut saw_knowledge_point = false;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 3);
        if fields[0] == "K" {
            saw_knowledge_point = true;
        }
        sums[0] += fields[1].parse::<f64>().unwrap();
        sums[1] += fields[2].parse::<f64>().unwrap();
        count += 1;
    }
    assert!(saw_knowledge_point);
    // 8 docs + 8 references + K.
    assert_eq!(count, 17);
    assert!(sums[0].abs() / (count as f64) < 1e-9);
    assert!(sums[1].abs() / (count as f64) < 1e-9);
}

#[test]
fn summarize_report_rescores_exactly() {
    let dir = tempfile::tempdir().unwrap();
    make_data(dir.path());
    let out = run(
        &[
            "summarize", "--data", "data.jsonl", "--model", "data.k_star.json", "--budget",
            "30", "--method", "greedy", "--out", "sums.txt",
        ],
        dir.path(),
    );
    assert_code(&out, 0, "summarize");
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("sums.txt.report.json")).unwrap(),
    )
    .unwrap();
    let records = report.as_array().unwrap();
    assert_eq!(records.len(), 8);
    for record in records {
        assert!(record["theta"].is_number());
        assert!(record["word_count"].as_u64().unwrap() <= 30);
    }
    let text = std::fs::read_to_string(dir.path().join("sums.txt")).unwrap();
    assert!(text.contains("# topic-0000"));
}

//! End-to-end tests of the `polysem` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn polysem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polysem"))
        .args(args)
        .output()
        .expect("failed to launch binary")
}

fn config_arg() -> String {
    fixture("config.json").display().to_string()
}

#[test]
fn ingest_writes_tokenized_corpus_and_vocabulary() {
    let out = tempfile::tempdir().unwrap();
    let status = polysem(&[
        "--config",
        &config_arg(),
        "--out",
        out.path().to_str().unwrap(),
        "ingest",
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    for lang in ["ur", "en"] {
        assert!(out.path().join(lang).join("tokenized.jsonl").is_file());
        assert!(out.path().join(lang).join("vocab.tsv").is_file());
    }
    // archaic pronouns are on the English stoplist and must not survive
    let vocab = fs::read_to_string(out.path().join("en/vocab.tsv")).unwrap();
    for stopword in ["thou", "thee", "the", "and"] {
        assert!(
            !vocab.lines().any(|l| l.split('\t').next() == Some(stopword)),
            "stopword {stopword:?} leaked into the vocabulary"
        );
    }
}

#[test]
fn neighbors_requires_a_language() {
    let out = tempfile::tempdir().unwrap();
    let status = polysem(&[
        "--config",
        &config_arg(),
        "--out",
        out.path().to_str().unwrap(),
        "neighbors",
        "ishq",
    ]);
    assert!(!status.status.success());
    let stderr = String::from_utf8_lossy(&status.stderr);
    assert!(stderr.contains("--lang"), "unexpected stderr: {stderr}");
}

#[test]
fn neighbors_after_training_prints_ranked_tsv() {
    let out = tempfile::tempdir().unwrap();
    let out_arg = out.path().to_str().unwrap().to_string();
    let train = polysem(&["--config", &config_arg(), "--out", &out_arg, "--lang", "ur", "train"]);
    assert!(train.status.success(), "{}", String::from_utf8_lossy(&train.stderr));

    let run = polysem(&[
        "--config", &config_arg(), "--out", &out_arg, "--lang", "ur",
        "neighbors", "ishq", "-k", "3",
    ]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8(run.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "word\tscore");
    assert_eq!(lines.len(), 4, "expected header + 3 rows:\n{stdout}");
    let top_score: f64 = lines[1].split('\t').nth(1).unwrap().parse().unwrap();
    assert!((-1.0..=1.0).contains(&top_score));

    // misspelled query fails with a spelling hint instead of garbage output
    let bad = polysem(&[
        "--config", &config_arg(), "--out", &out_arg, "--lang", "ur",
        "neighbors", "ishqq",
    ]);
    assert!(!bad.status.success());
    let stderr = String::from_utf8_lossy(&bad.stderr);
    assert!(stderr.contains("ishq"), "no spelling hint in: {stderr}");
}

#[test]
fn missing_input_fails_before_writing_anything() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    let mut config: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fixture("config.json")).unwrap()).unwrap();
    // the fixture config uses relative paths; pin them to the fixture dir
    // since the rewritten copy lives elsewhere
    for (_, lang) in config["languages"].as_object_mut().unwrap() {
        for key in ["corpus", "stopwords", "senses"] {
            let rel = lang[key].as_str().unwrap().to_string();
            lang[key] = serde_json::Value::String(fixture(&rel).display().to_string());
        }
    }
    config["languages"]["ur"]["stopwords"] =
        serde_json::Value::String(fixture("no_such_file.txt").display().to_string());
    fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();

    let out = dir.path().join("out");
    let status = polysem(&[
        "--config",
        config_path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "pipeline",
    ]);
    assert!(!status.status.success());
    let stderr = String::from_utf8_lossy(&status.stderr);
    assert!(stderr.contains("no_such_file.txt"), "unexpected stderr: {stderr}");
    assert!(!out.exists(), "failed run must not leave partial outputs");
}

#[test]
fn unknown_language_selector_is_rejected() {
    let out = tempfile::tempdir().unwrap();
    let status = polysem(&[
        "--config",
        &config_arg(),
        "--out",
        out.path().to_str().unwrap(),
        "--lang",
        "fr",
        "ingest",
    ]);
    assert!(!status.status.success());
    let stderr = String::from_utf8_lossy(&status.stderr);
    assert!(stderr.contains("fr"), "unexpected stderr: {stderr}");
}

#[test]
fn seed_override_changes_trained_vectors() {
    let out_a = tempfile::tempdir().unwrap();
    let out_b = tempfile::tempdir().unwrap();
    for (dir, seed) in [(&out_a, "42"), (&out_b, "43")] {
        let run = polysem(&[
            "--config", &config_arg(),
            "--out", dir.path().to_str().unwrap(),
            "--lang", "ur",
            "--seed", seed,
            "train",
        ]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }
    let a = fs::read(out_a.path().join("ur/embeddings.vec")).unwrap();
    let b = fs::read(out_b.path().join("ur/embeddings.vec")).unwrap();
    assert_ne!(a, b, "different seeds produced identical embeddings");
}

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn sa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sa-predict"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = sa(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, seed: u64, scenes: usize, participants: usize, threads: usize) -> PathBuf {
    let out = dir.join(format!("synth_{seed}_{scenes}x{participants}_t{threads}"));
    ok(&[
        "synth",
        "--seed",
        &seed.to_string(),
        "--scenes",
        &scenes.to_string(),
        "--participants",
        &participants.to_string(),
        "--threads",
        &threads.to_string(),
        "--out",
        s(&out),
    ]);
    out
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn synth_is_byte_identical_across_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let a = tree(&synth(tmp.path(), 4, 3, 5, 1));
    let b = tree(&synth(tmp.path(), 4, 3, 5, 3));
    assert!(a.contains_key("manifest.json") && a.contains_key("oracle.csv"));
    assert_eq!(a, b);
}

#[test]
fn train_and_eval_are_byte_identical_across_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let data = synth(tmp.path(), 6, 3, 4, 1);
    let mut models = Vec::new();
    let mut evals = Vec::new();
    for threads in ["1", "3", "1"] {
        let model = tmp
            .path()
            .join(format!("model_{threads}_{}.json", models.len()));
        ok(&[
            "train",
            "--method",
            "method123",
            "--dataset",
            s(&data),
            "--seed",
            "2",
            "--threads",
            threads,
            "--out",
            s(&model),
        ]);
        models.push(fs::read(&model).unwrap());

        let dir = tmp.path().join(format!("eval_{threads}_{}", evals.len()));
        ok(&[
            "eval",
            "--method",
            "method12",
            "--dataset",
            s(&data),
            "--seed",
            "2",
            "--threads",
            threads,
            "--out",
            s(&dir),
        ]);
        let files = tree(&dir);
        assert!(files.contains_key("method12.json") && files.contains_key("method12_roc.csv"));
        evals.push(files);
    }
    assert!(models.windows(2).all(|w| w[0] == w[1]));
    assert!(evals.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn roc_scores_a_trained_model() {
    let tmp = TempDir::new().unwrap();
    let data = synth(tmp.path(), 8, 3, 4, 1);
    let model = tmp.path().join("model.json");
    ok(&[
        "train",
        "--method",
        "method1",
        "--dataset",
        s(&data),
        "--seed",
        "1",
        "--out",
        s(&model),
    ]);
    let roc = tmp.path().join("roc.csv");
    let out = ok(&[
        "roc",
        "--model",
        s(&model),
        "--dataset",
        s(&data),
        "--out",
        s(&roc),
    ]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("AUC"));
    let text = fs::read_to_string(&roc).unwrap();
    assert!(text.lines().count() > 2);
}

#[test]
fn features_of_a_full_size_dataset() {
    let tmp = TempDir::new().unwrap();
    let data = synth(tmp.path(), 1, 8, 44, 1);
    let csv_path = tmp.path().join("features.csv");
    ok(&["features", "--dataset", s(&data), "--out", s(&csv_path)]);

    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let header: Vec<String> = reader
        .headers()
        .unwrap()
        .iter()
        .map(str::to_owned)
        .collect();
    assert_eq!(
        &header[..4],
        ["participant", "scene", "object", "is_target"]
    );
    assert_eq!(header.len(), 4 + 30 + 2);
    assert_eq!(header[4], "G_pause");
    assert_eq!(header[4 + 29], "HV_average_15.0");
    let labeled = reader
        .records()
        .filter(|r| &r.as_ref().unwrap()[3] == "1")
        .count();
    assert_eq!(labeled, 44 * 28);
}

#[test]
fn baseline1_radius_sweep_csv() {
    let tmp = TempDir::new().unwrap();
    let data = synth(tmp.path(), 2, 3, 4, 1);
    let dir = tmp.path().join("b1");
    ok(&[
        "baseline1",
        "--sweep",
        "radius",
        "--dataset",
        s(&data),
        "--out",
        s(&dir),
    ]);
    let text = fs::read_to_string(dir.join("baseline1_radius.csv")).unwrap();
    assert!(text.lines().count() > 200);
    assert!(!dir.join("baseline1_duration.csv").exists());
    assert!(dir.join("baseline1.json").exists());
}

#[test]
fn pca_report_lists_the_requested_components() {
    let tmp = TempDir::new().unwrap();
    let data = synth(tmp.path(), 3, 3, 6, 1);
    let dir = tmp.path().join("pca");
    ok(&[
        "pca-report",
        "--top",
        "6",
        "--dataset",
        s(&data),
        "--out",
        s(&dir),
    ]);
    let text = fs::read_to_string(dir.join("loadings.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 6);
    assert!(dir.join("loadings.md").exists());
}

#[test]
fn eval_all_writes_the_comparison_table() {
    let tmp = TempDir::new().unwrap();
    let data = synth(tmp.path(), 5, 3, 4, 1);
    let dir = tmp.path().join("all");
    let out = ok(&[
        "eval",
        "--method",
        "all",
        "--dataset",
        s(&data),
        "--seed",
        "1",
        "--out",
        s(&dir),
    ]);
    let md = fs::read_to_string(dir.join("comparison.md")).unwrap();
    assert_eq!(md.lines().count(), 2 + 8);
    assert!(md.contains("Chance rate"));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Method 1+2+3"));
    for name in [
        "baseline1",
        "baseline3",
        "method1",
        "method2",
        "method12",
        "method123",
    ] {
        assert!(dir.join(format!("{name}.json")).exists(), "{name}");
    }
}

#[test]
fn usage_and_validation_errors_exit_with_two() {
    let tmp = TempDir::new().unwrap();
    let data = synth(tmp.path(), 7, 2, 2, 1);

    // Unknown flag and unknown preset.
    assert_eq!(sa(&["eval", "--bogus"]).status.code(), Some(2));
    let out = sa(&[
        "eval",
        "--method",
        "method9",
        "--dataset",
        s(&data),
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // Missing seed.
    assert_eq!(
        sa(&["synth", "--out", s(&tmp.path().join("x"))])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        sa(&["train", "--method", "method1", "--dataset", s(&data)])
            .status
            .code(),
        Some(2)
    );
    // Overrides with `all`, zero threads, nothing to train.
    let out = sa(&[
        "eval",
        "--method",
        "all",
        "--pca-k",
        "3",
        "--dataset",
        s(&data),
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        sa(&["features", "--threads", "0", "--dataset", s(&data)])
            .status
            .code(),
        Some(2)
    );
    let out = sa(&[
        "train",
        "--method",
        "baseline1",
        "--dataset",
        s(&data),
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));

    // Corrupt manifest.
    fs::write(data.join("manifest.json"), "{ not json").unwrap();
    let out = sa(&[
        "features",
        "--dataset",
        s(&data),
        "--out",
        s(&tmp.path().join("f.csv")),
    ]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // Bad config file.
    let cfg = tmp.path().join("cfg.json");
    fs::write(&cfg, r#"{"pipeline": {"nope": 1}}"#).unwrap();
    assert_eq!(
        sa(&["features", "--config", s(&cfg)]).status.code(),
        Some(2)
    );
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let tmp = TempDir::new().unwrap();
    let data = synth(tmp.path(), 9, 2, 2, 1);
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = sa(&[
        "features",
        "--dataset",
        s(&data),
        "--out",
        s(&blocker.join("f.csv")),
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

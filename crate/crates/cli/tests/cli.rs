use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn capo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capo")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Noisy linearly separable-ish data, deterministic.
fn toy_lines(n: usize, offset: usize) -> String {
    let mut out = String::new();
    for i in offset..offset + n {
        let a = ((i * 37) % 101) as f64 / 50.0 - 1.0;
        let b = ((i * 53) % 97) as f64 / 48.0 - 1.0;
        let flip = i % 13 == 0;
        let positive = (a + 0.5 * b > 0.1) != flip;
        out.push_str(&format!("{} 1:{a} 2:{b}\n", if positive { "+1" } else { "-1" }));
    }
    out
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        fs::write(dir.path().join("train.svm"), toy_lines(60, 0)).unwrap();
        fs::write(dir.path().join("test.svm"), toy_lines(40, 1000)).unwrap();
        fs::write(dir.path().join("pair.svm"), "+1 1:1\n-1 1:-1\n").unwrap();
        fs::write(dir.path().join("pos.svm"), "+1 1:1\n+1 1:2\n+1 1:0.5\n").unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn separable_pair_is_learned_for_every_measure() {
    let fx = Fixture::new();
    for m in ["err", "f1", "prbep", "auc"] {
        let out_dir = fx.path(&format!("out_{m}"));
        let out = capo(&[
            "train",
            "--data",
            &fx.arg("pair.svm"),
            "--measure",
            m,
            "-C",
            "100",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{m}: {}", stderr(&out));
        let report = json(&out_dir.join("report.json"));
        for key in ["accuracy", "f1", "prbep", "auc"] {
            assert_eq!(report["train"][key].as_f64(), Some(1.0), "{m} {key}");
        }
    }
}

#[test]
fn invalid_measure_is_usage_error() {
    let fx = Fixture::new();
    let out = capo(&["train", "--data", &fx.arg("train.svm"), "--measure", "ndcg"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("unknown measure"));
}

#[test]
fn missing_data_argument_is_usage_error() {
    assert_eq!(code(&capo(&["train", "--measure", "err"])), 2);
}

#[test]
fn oracle_auxiliary_gives_zero_training_error() {
    let fx = Fixture::new();
    let labels: String = toy_lines(60, 0)
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string() + "\n")
        .collect();
    fs::write(fx.path("oracle.pred"), labels).unwrap();
    let out_dir = fx.path("adapt");
    let aux = format!("pred:{}", fx.arg("oracle.pred"));
    let out = capo(&[
        "adapt",
        "--data",
        &fx.arg("train.svm"),
        "--measure",
        "err",
        "-C",
        "10",
        "--aux",
        &aux,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out_dir.join("report.json"));
    assert_eq!(report["train"]["accuracy"].as_f64(), Some(1.0));
    assert_eq!(report["deployable"], Value::Bool(false));
}

#[test]
fn missing_predictions_file_is_data_error() {
    let fx = Fixture::new();
    let aux = format!("pred:{}", fx.arg("nope.pred"));
    let out = capo(&["adapt", "--data", &fx.arg("train.svm"), "-C", "1", "--aux", &aux]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn misaligned_predictions_are_data_error() {
    let fx = Fixture::new();
    fs::write(fx.path("short.pred"), "1\n-1\n").unwrap();
    let aux = format!("pred:{}", fx.arg("short.pred"));
    let out = capo(&["adapt", "--data", &fx.arg("train.svm"), "-C", "1", "--aux", &aux]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("expected 60 predictions"));
}

#[test]
fn eval_reproduces_training_metrics_and_rejects_corruption() {
    let fx = Fixture::new();
    for (cmd, extra) in [
        ("train", vec![]),
        ("adapt", vec!["--aux", "tree:depth=3", "--aux", "sgd:lambda=0.01"]),
    ] {
        let out_dir = fx.path(cmd);
        let (data, test, out_arg) = (fx.arg("train.svm"), fx.arg("test.svm"), out_dir.display().to_string());
        let mut args = vec![
            cmd,
            "--data",
            &data,
            "--test",
            &test,
            "--measure",
            "f1",
            "-C",
            "2",
            "--out",
            &out_arg,
        ];
        args.extend(extra.iter());
        let out = capo(&args);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let report = json(&out_dir.join("report.json"));
        for m in ["accuracy", "f1", "prbep", "auc"] {
            let v = report["test"][m].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&v));
        }

        let eval_dir = fx.path(&format!("{cmd}_eval"));
        let model = out_dir.join("model.json");
        let out = capo(&[
            "eval",
            "--model",
            model.to_str().unwrap(),
            "--data",
            &fx.arg("train.svm"),
            "--out",
            eval_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let eval = json(&eval_dir.join("report.json"));
        assert_eq!(eval["metrics"], report["train"], "{cmd}");
    }

    let bad = fx.path("bad.json");
    let text = fs::read_to_string(fx.path("train").join("model.json")).unwrap();
    fs::write(&bad, &text[..text.len() / 2]).unwrap();
    let out = capo(&["eval", "--model", bad.to_str().unwrap(), "--data", &fx.arg("train.svm")]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("model format"), "{}", stderr(&out));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let fx = Fixture::new();
    let mut reports = Vec::new();
    for run in 0..2 {
        let out_dir = fx.path(&format!("run{run}"));
        let out = capo(&[
            "adapt",
            "--data",
            &fx.arg("train.svm"),
            "--test",
            &fx.arg("test.svm"),
            "--measure",
            "auc",
            "-C",
            "2^-2:2^2",
            "--folds",
            "3",
            "--seed",
            "5",
            "--aux",
            "tree:depth=4",
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        reports.push((
            fs::read(out_dir.join("report.json")).unwrap(),
            fs::read(out_dir.join("report.txt")).unwrap(),
            fs::read(out_dir.join("model.json")).unwrap(),
        ));
    }
    assert!(reports[0] == reports[1]);
    let report: Value = serde_json::from_slice(&reports[0].0).unwrap();
    assert_eq!(report["selection"]["points"].as_array().unwrap().len(), 5);
    assert!(report["selection"]["rule"]
        .as_str()
        .unwrap()
        .contains("smallest C on ties"));
}

#[test]
fn sweep_emits_one_row_per_grid_point() {
    let fx = Fixture::new();
    let out_dir = fx.path("sweep");
    let out = capo(&[
        "sweep",
        "--data",
        &fx.arg("train.svm"),
        "-C",
        "2^-7:2^7",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out_dir.join("report.json"))["rows"].as_array().unwrap().len(), 15);

    let out_dir = fx.path("sweep_b");
    let out = capo(&[
        "sweep",
        "--data",
        &fx.arg("train.svm"),
        "-C",
        "1",
        "-B",
        "0.25,1,4",
        "--aux",
        "tree:depth=3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = json(&out_dir.join("report.json"))["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["inference_count"].as_u64().unwrap() >= 1));
}

#[test]
fn empty_grid_is_usage_error() {
    let fx = Fixture::new();
    let out = capo(&["sweep", "--data", &fx.arg("train.svm"), "-C", ""]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn bench_pairs_counts() {
    let fx = Fixture::new();
    let out_dir = fx.path("bench");
    let out = capo(&[
        "bench",
        "--data",
        &fx.arg("train.svm"),
        "-C",
        "4",
        "--aux",
        "tree:depth=3",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let rows = json(&out_dir.join("report.json"))["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 1);
    assert!(rows[0]["plain_inferences"].as_u64().unwrap() >= 1);
    assert!(rows[0]["adapted_inferences"].as_u64().unwrap() >= 1);
}

#[test]
fn auc_on_single_class_is_measure_error() {
    let fx = Fixture::new();
    let out = capo(&["bench", "--data", &fx.arg("pos.svm"), "--measure", "auc", "-C", "1"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("undefined"), "{}", stderr(&out));
}

#[test]
fn strict_flags_non_convergence() {
    let fx = Fixture::new();
    let args = [
        "train",
        "--data",
        &fx.arg("train.svm"),
        "-C",
        "100",
        "--max-iterations",
        "1",
    ];
    assert_eq!(code(&capo(&args)), 0);
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(code(&capo(&strict)), 4);
}

#[test]
fn config_file_with_overrides() {
    let fx = Fixture::new();
    fs::write(
        fx.path("exp.toml"),
        "data = \"train.svm\"\ntest = \"test.svm\"\nmeasure = \"prbep\"\nc = \"2^0:2^1\"\nfolds = 3\n",
    )
    .unwrap();
    let out_dir = fx.path("cfg");
    let out = capo(&[
        "train",
        "--config",
        &fx.arg("exp.toml"),
        "--measure",
        "auc",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&out_dir.join("report.json"));
    assert_eq!(report["measure"], "auc");
    assert_eq!(report["folds"], 3);
    assert!(report["test"].is_object());

    fs::write(fx.path("bad.toml"), "data = \"train.svm\"\nfolds = 1\n").unwrap();
    assert_eq!(code(&capo(&["train", "--config", &fx.arg("bad.toml")])), 2);
}

#[test]
fn trace_lines_are_key_value() {
    let fx = Fixture::new();
    let trace = fx.path("trace.log");
    let out = capo(&[
        "train",
        "--data",
        &fx.arg("train.svm"),
        "-C",
        "1",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(trace).unwrap();
    let first = text.lines().next().unwrap();
    for key in ["iteration=1", "dual=", "xi=", "violation=", "inference_count=1"] {
        assert!(first.contains(key), "{first}");
    }
}

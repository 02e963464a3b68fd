#![cfg(feature = "cli")]

use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = r#"
version = 1
base_seed = 5

[reservoir]
nodes = 40

[schedule]
t_sync = 20
t_train = 500
t_pred = 60

[ensemble]
reservoirs = 1
train_sets = 1
test_sets = 2

[method]
kind = "lmnt"
k = 2

[grid]
log10_beta_t = [-9.0, -6.0]
log10_beta = [-5.0]

[psd]
t_pred = 256
window = 64
relative_floor = 1e-4
"#;

fn rcstab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcstab"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("tiny.toml"), TINY).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn malformed_config_exits_with_schema_error() {
    let dir = setup();
    std::fs::write(
        dir.path().join("bad.toml"),
        "version = 1\nbase_seed = \"x\"\n",
    )
    .unwrap();
    let o = rcstab(dir.path(), &["sweep", "--config", "bad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("config error"), "{}", stderr(&o));

    std::fs::write(
        dir.path().join("extra.toml"),
        format!("{TINY}\n[extra]\nx = 1\n"),
    )
    .unwrap();
    let o = rcstab(dir.path(), &["sweep", "--config", "extra.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown field"), "{}", stderr(&o));

    let o = rcstab(dir.path(), &["sweep", "--config", "missing.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_data_writes_datasets_and_sidecars() {
    let dir = setup();
    let o = rcstab(
        dir.path(),
        &[
            "gen-data",
            "--config",
            "tiny.toml",
            "--out",
            "data",
            "--csv",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "train_0.ksds",
        "train_0.ksds.json",
        "train_0.csv",
        "test_0.ksds",
        "test_1.ksds.json",
        "test_1.csv",
    ] {
        assert!(dir.path().join("data").join(f).exists(), "{f} missing");
    }
    let ds = rcstab::io::read_dataset(&dir.path().join("data/train_0.ksds")).unwrap();
    assert_eq!(ds.len(), 521);
    assert_eq!(ds.raw.cols(), 64);
}

#[test]
fn train_then_predict() {
    let dir = setup();
    let o = rcstab(
        dir.path(),
        &[
            "train",
            "--config",
            "tiny.toml",
            "--out",
            "models",
            "--point",
            "1",
            "--save-matrix",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let model = dir.path().join("models/model_r0_t0_p1.rcwm");
    assert!(model.exists() && dir.path().join("models/model_r0_t0_p1.rcwm.json").exists());
    assert!(dir.path().join("models/model_r0_t0_p1.rcrm").exists());

    let o = rcstab(
        dir.path(),
        &[
            "predict",
            "--config",
            "tiny.toml",
            "--model",
            model.to_str().unwrap(),
            "--test-set",
            "1",
            "--trajectory",
            "traj.csv",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rec: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rec.get("verdict").and_then(|v| v.as_str()).is_some());
    assert!(dir.path().join("traj.csv").exists());

    // a different seed gives a different training set than the model's
    let o = rcstab(
        dir.path(),
        &[
            "predict",
            "--config",
            "tiny.toml",
            "--seed",
            "6",
            "--model",
            model.to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_then_report() {
    let dir = setup();
    let o = rcstab(
        dir.path(),
        &[
            "sweep",
            "--config",
            "tiny.toml",
            "--out",
            "run",
            "--threads",
            "1",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("method"));

    let o = rcstab(
        dir.path(),
        &["report", "--from", "run", "--selected", "--csv", "--psd"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().contains("VT [t_Lyap]"));
    assert!(lines.next().unwrap().starts_with("lmnt(K=2)"));
    let report = std::fs::read_to_string(dir.path().join("run/report.csv")).unwrap();
    assert_eq!(report.lines().count(), 3);
    let truth = std::fs::read_to_string(dir.path().join("run/psd_truth.csv")).unwrap();
    assert_eq!(truth.lines().next(), Some("frequency,power"));
    assert_eq!(truth.lines().count(), 1 + 64 / 2 + 1);
    assert!(truth.lines().skip(1).all(|l| l.split(',').count() == 2));
}

#[test]
fn lyapunov_prints_estimate() {
    let dir = setup();
    let o = rcstab(dir.path(), &["lyapunov", "--horizon", "200"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let est: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(est["exponent"].as_f64().unwrap() > 0.0);
}

#[test]
fn unknown_subcommand_fails() {
    let dir = setup();
    let o = rcstab(dir.path(), &["fly"]);
    assert!(!o.status.success());
}

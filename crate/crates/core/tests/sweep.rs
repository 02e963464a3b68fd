use std::path::Path;

use rcstab::harness::config::{
    Ensemble, ExperimentConfig, Grid, MethodConfig, MethodKind, PsdSettings, Schedule,
};
use rcstab::harness::sweep::{aggregate, read_rows, run_sweep, RunRow, ROWS_FILE};

fn tiny(kind: MethodKind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::desk(
        MethodConfig {
            k: 2,
            ..MethodConfig::new(kind)
        },
        Grid {
            log10_beta_t: vec![-8.0, -5.0],
            log10_beta: vec![-6.0],
        },
    );
    cfg.base_seed = 31;
    cfg.reservoir.nodes = 40;
    cfg.schedule = Schedule {
        t_sync: 20,
        t_train: 600,
        t_pred: 80,
    };
    cfg.ensemble = Ensemble {
        reservoirs: 2,
        train_sets: 2,
        test_sets: 2,
    };
    cfg.psd = PsdSettings {
        t_pred: 256,
        window: 64,
        relative_floor: 1e-4,
    };
    cfg
}

fn sorted_rows(dir: &Path) -> Vec<RunRow> {
    let mut rows = read_rows(&dir.join(ROWS_FILE)).unwrap();
    rows.sort_by_key(|r| r.key());
    rows
}

fn same_rows(a: &[RunRow], b: &[RunRow]) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert_eq!(x.key(), y.key());
        assert_eq!(x.verdict, y.verdict);
        assert_eq!(x.valid_time.to_bits(), y.valid_time.to_bits());
        assert_eq!(x.mean_map_error.to_bits(), y.mean_map_error.to_bits());
        assert_eq!(x.max_map_error.to_bits(), y.max_map_error.to_bits());
    }
}

#[test]
fn sweep_writes_every_row_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(MethodKind::Lmnt);
    let res = run_sweep(&cfg, dir.path(), |_| {}).unwrap();
    assert_eq!(res.points.len(), 2);
    let rows = sorted_rows(dir.path());
    assert_eq!(rows.len(), 2 * cfg.ensemble.predictions());
    assert!(rows.iter().all(|r| !r.failed()));
    assert!(dir.path().join("summary.json").exists());
    // a second run has nothing left to do
    let again = run_sweep(&cfg, dir.path(), |_| {}).unwrap();
    assert_eq!(again, res);
    assert_eq!(sorted_rows(dir.path()).len(), rows.len());
}

#[test]
fn resumed_sweep_matches_uninterrupted() {
    let cfg = tiny(MethodKind::Jacobian);
    let full = tempfile::tempdir().unwrap();
    let expected = run_sweep(&cfg, full.path(), |_| {}).unwrap();

    let part = tempfile::tempdir().unwrap();
    run_sweep(&cfg, part.path(), |_| {}).unwrap();
    // keep the header and five rows, then half of the next line
    let csv = std::fs::read_to_string(part.path().join(ROWS_FILE)).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    let mut cut = lines[..6].join("\n");
    cut.push('\n');
    cut.push_str(&lines[6][..lines[6].len() / 2]);
    std::fs::write(part.path().join(ROWS_FILE), cut).unwrap();

    let resumed = run_sweep(&cfg, part.path(), |_| {}).unwrap();
    assert_eq!(resumed, expected);
    same_rows(&sorted_rows(part.path()), &sorted_rows(full.path()));
}

#[cfg(feature = "parallel")]
#[test]
fn sweep_is_independent_of_thread_count() {
    let cfg = tiny(MethodKind::Lmnt);
    let run = |threads: usize| {
        let dir = tempfile::tempdir().unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let res = pool.install(|| run_sweep(&cfg, dir.path(), |_| {}).unwrap());
        (res, sorted_rows(dir.path()), dir)
    };
    let (a, rows_a, _da) = run(1);
    let (b, rows_b, _db) = run(3);
    assert_eq!(a, b);
    same_rows(&rows_a, &rows_b);
}

#[test]
fn aggregation_ignores_row_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(MethodKind::Tikhonov);
    run_sweep(&cfg, dir.path(), |_| {}).unwrap();
    let mut rows = read_rows(&dir.path().join(ROWS_FILE)).unwrap();
    let a = aggregate(&cfg, &rows).unwrap();
    rows.reverse();
    rows.rotate_left(3);
    assert_eq!(aggregate(&cfg, &rows).unwrap(), a);
}

#[test]
fn noise_sweep_runs() {
    let dir = tempfile::tempdir().unwrap();
    let res = run_sweep(&tiny(MethodKind::Noise), dir.path(), |_| {}).unwrap();
    assert_eq!(res.points.len(), 2);
    assert!(res.points.iter().all(|p| p.failed == 0));
}

#[test]
fn changed_config_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(MethodKind::Tikhonov);
    run_sweep(&cfg, dir.path(), |_| {}).unwrap();
    let mut other = cfg.clone();
    other.base_seed += 1;
    let err = run_sweep(&other, dir.path(), |_| {}).unwrap_err();
    assert!(matches!(err, rcstab::error::Error::Config(_)));
}

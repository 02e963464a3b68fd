//! Parameter sweeps with append-only, resumable CSV persistence.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::OpenOptions;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, GridPoint};
use super::experiment::{member_seeds, test_seed, Member, TrainingContext};
use super::stats::{median_ci, MedianCi};
use crate::error::{Error, Result};
use crate::metrics::{PredictionRecord, Verdict};

pub const ROWS_FILE: &str = "predictions.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.toml";
/// Schema version written into every row.
pub const ROW_SCHEMA: u32 = 1;

/// One prediction (or one failed attempt) in the sweep CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub schema: u32,
    pub method: String,
    pub point: usize,
    pub log10_beta_t: Option<f64>,
    pub log10_beta: Option<f64>,
    pub reservoir: usize,
    pub train_set: usize,
    pub test_set: usize,
    pub reservoir_seed: u64,
    pub train_seed: u64,
    pub test_seed: u64,
    pub noise_seed: u64,
    pub valid_time: f64,
    pub mean_map_error: f64,
    pub max_map_error: f64,
    pub verdict: Option<Verdict>,
    pub steps: usize,
    pub error: String,
}

impl RunRow {
    pub fn key(&self) -> (usize, usize, usize, usize) {
        (self.point, self.reservoir, self.train_set, self.test_set)
    }

    pub fn failed(&self) -> bool {
        self.verdict.is_none()
    }

    pub fn is_stable(&self) -> bool {
        self.verdict == Some(Verdict::Stable)
    }
}

fn make_row(
    cfg: &ExperimentConfig,
    index: usize,
    point: &GridPoint,
    (i, j, k): (usize, usize, usize),
    outcome: std::result::Result<&PredictionRecord, &str>,
) -> RunRow {
    let seeds = member_seeds(cfg.base_seed, i, j);
    let mut row = RunRow {
        schema: ROW_SCHEMA,
        method: cfg.method.label(),
        point: index,
        log10_beta_t: point.log10_beta_t,
        log10_beta: point.log10_beta,
        reservoir: i,
        train_set: j,
        test_set: k,
        reservoir_seed: seeds.reservoir,
        train_seed: seeds.train,
        test_seed: test_seed(cfg.base_seed, k),
        noise_seed: seeds.noise,
        valid_time: f64::NAN,
        mean_map_error: f64::NAN,
        max_map_error: f64::NAN,
        verdict: None,
        steps: 0,
        error: String::new(),
    };
    match outcome {
        Ok(rec) => {
            row.valid_time = rec.valid_time;
            row.mean_map_error = rec.mean_map_error;
            row.max_map_error = rec.max_map_error;
            row.verdict = Some(rec.verdict);
            row.steps = rec.steps;
        }
        Err(msg) => row.error = msg.replace(['\n', '\r'], " "),
    }
    row
}

pub fn read_rows(path: &Path) -> Result<Vec<RunRow>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    reader.deserialize().map(|r| r.map_err(csv_error)).collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Format(format!("sweep CSV: {e}"))
}

/// Truncate an interrupted final line so appends start on a fresh line.
fn drop_partial_tail(path: &Path) -> Result<()> {
    if !path.exists() {
        return Ok(());
    }
    let bytes = std::fs::read(path)?;
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        return Ok(());
    }
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let file = OpenOptions::new().write(true).open(path)?;
    file.set_len(keep as u64)?;
    Ok(())
}

/// Appends rows, writing the header only for a new file.
struct RowWriter {
    writer: csv::Writer<std::fs::File>,
}

impl RowWriter {
    fn open(path: &Path) -> Result<Self> {
        let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let writer = csv::WriterBuilder::new()
            .has_headers(fresh)
            .from_writer(file);
        Ok(Self { writer })
    }

    fn append(&mut self, rows: &[RunRow]) -> Result<()> {
        for r in rows {
            self.writer.serialize(r).map_err(csv_error)?;
        }
        self.writer.flush()?;
        Ok(())
    }
}

/// Aggregates of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub point: usize,
    pub grid: GridPoint,
    pub predictions: usize,
    pub failed: usize,
    pub stable: usize,
    pub fraction_stable: f64,
    /// Valid time in model time units, widened by one `Δt` at the top.
    pub valid_time: Option<MedianCi>,
    pub mean_map_error: Option<MedianCi>,
    pub max_map_error: Option<MedianCi>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub method: String,
    pub dt: f64,
    pub lyapunov_time: f64,
    pub points: Vec<PointSummary>,
}

/// Summaries of the rows, grouped by grid point. Rows are sorted by key
/// first, so the result does not depend on completion order.
pub fn aggregate(cfg: &ExperimentConfig, rows: &[RunRow]) -> Result<SweepResult> {
    let grid = cfg.grid_points();
    let mut by_point: BTreeMap<usize, Vec<&RunRow>> = BTreeMap::new();
    for r in rows {
        by_point.entry(r.point).or_default().push(r);
    }
    let mut points = Vec::new();
    for (p, mut group) in by_point {
        group.sort_by_key(|r| r.key());
        let ok: Vec<&RunRow> = group.iter().copied().filter(|r| !r.failed()).collect();
        let stable = ok.iter().filter(|r| r.is_stable()).count();
        let ci = |f: &dyn Fn(&RunRow) -> f64| -> Result<Option<MedianCi>> {
            if ok.is_empty() {
                return Ok(None);
            }
            let v: Vec<f64> = ok.iter().map(|r| f(r)).collect();
            median_ci(&v, 0.95).map(Some)
        };
        let gp = grid.get(p).copied().unwrap_or(GridPoint {
            log10_beta_t: group[0].log10_beta_t,
            log10_beta: group[0].log10_beta,
        });
        points.push(PointSummary {
            point: p,
            grid: gp,
            predictions: group.len(),
            failed: group.len() - ok.len(),
            stable,
            fraction_stable: stable as f64 / group.len() as f64,
            valid_time: ci(&|r| r.valid_time)?.map(|c| c.widen_for_grid(cfg.ks.dt)),
            mean_map_error: ci(&|r| r.mean_map_error)?,
            max_map_error: ci(&|r| r.max_map_error)?,
        });
    }
    Ok(SweepResult {
        method: cfg.method.label(),
        dt: cfg.ks.dt,
        lyapunov_time: cfg.lyapunov_time,
        points,
    })
}

/// Lexicographic choice: highest stable fraction, then highest median
/// valid time, then the largest total regularization.
pub fn select_parameters(sweep: &SweepResult) -> Result<&PointSummary> {
    let vt = |p: &PointSummary| p.valid_time.map_or(f64::NEG_INFINITY, |c| c.median);
    sweep
        .points
        .iter()
        .max_by(|a, b| {
            a.fraction_stable
                .total_cmp(&b.fraction_stable)
                .then(vt(a).total_cmp(&vt(b)))
                .then(a.grid.total().total_cmp(&b.grid.total()))
        })
        .ok_or_else(|| Error::InvalidParameter("empty sweep".into()))
}

/// Where a sweep keeps its files.
#[derive(Debug, Clone)]
pub struct SweepPaths {
    pub dir: PathBuf,
}

impl SweepPaths {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn rows(&self) -> PathBuf {
        self.dir.join(ROWS_FILE)
    }

    pub fn summary(&self) -> PathBuf {
        self.dir.join(SUMMARY_FILE)
    }

    pub fn config(&self) -> PathBuf {
        self.dir.join(CONFIG_FILE)
    }
}

/// Run (or resume) every (reservoir, training set, test set, grid point)
/// combination of `cfg` and write `predictions.csv` and `summary.json`
/// under `out`. `log` receives progress lines.
pub fn run_sweep(
    cfg: &ExperimentConfig,
    out: &Path,
    mut log: impl FnMut(&str),
) -> Result<SweepResult> {
    cfg.validate()?;
    let paths = SweepPaths::new(out);
    std::fs::create_dir_all(&paths.dir)?;
    let cfg_text = cfg.to_toml_string()?;
    if paths.config().exists() {
        let existing = ExperimentConfig::load(&paths.config())?;
        if &existing != cfg {
            return Err(Error::Config(format!(
                "{} holds a different configuration; use a fresh output directory",
                paths.config().display()
            )));
        }
    } else {
        std::fs::write(paths.config(), &cfg_text)?;
    }

    drop_partial_tail(&paths.rows())?;
    let existing = read_rows(&paths.rows())?;
    let done: BTreeSet<(usize, usize, usize, usize)> = existing.iter().map(|r| r.key()).collect();
    let grid = cfg.grid_points();
    let e = &cfg.ensemble;
    let mut writer = RowWriter::open(&paths.rows())?;

    for j in 0..e.train_sets {
        let pending = |i: usize, p: usize| (0..e.test_sets).any(|k| !done.contains(&(p, i, j, k)));
        if !(0..e.reservoirs).any(|i| (0..grid.len()).any(|p| pending(i, p))) {
            continue;
        }
        let ctx = match TrainingContext::new(cfg, j, e.test_sets, cfg.schedule.t_pred) {
            Ok(c) => c,
            Err(err) => {
                log(&format!("training set {j}: {err}"));
                for i in 0..e.reservoirs {
                    for (p, gp) in grid.iter().enumerate().filter(|(p, _)| pending(i, *p)) {
                        let rows = failed_rows(cfg, p, gp, i, j, &done, &err.to_string());
                        writer.append(&rows)?;
                    }
                }
                continue;
            }
        };
        for i in 0..e.reservoirs {
            let todo: Vec<usize> = (0..grid.len()).filter(|&p| pending(i, p)).collect();
            if todo.is_empty() {
                continue;
            }
            let mut member = match Member::new(cfg, &ctx, i) {
                Ok(m) => m,
                Err(err) => {
                    log(&format!("reservoir {i}, training set {j}: {err}"));
                    for &p in &todo {
                        writer.append(&failed_rows(
                            cfg,
                            p,
                            &grid[p],
                            i,
                            j,
                            &done,
                            &err.to_string(),
                        ))?;
                    }
                    continue;
                }
            };
            for &p in &todo {
                let gp = &grid[p];
                let rows = match member.evaluate(gp) {
                    Ok(records) => records
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| !done.contains(&(p, i, j, *k)))
                        .map(|(k, rec)| make_row(cfg, p, gp, (i, j, k), Ok(rec)))
                        .collect(),
                    Err(err) => failed_rows(cfg, p, gp, i, j, &done, &err.to_string()),
                };
                let stable = rows.iter().filter(|r| r.is_stable()).count();
                log(&format!(
                    "reservoir {i}, training set {j}, point {p}: {stable}/{} stable",
                    rows.len()
                ));
                writer.append(&rows)?;
            }
            for w in member.warnings.drain(..) {
                log(&format!("reservoir {i}, training set {j}: warning: {w}"));
            }
        }
    }

    let rows = read_rows(&paths.rows())?;
    let result = aggregate(cfg, &rows)?;
    let summary = serde_json::json!({
        "schema": ROW_SCHEMA,
        "result": result,
        "selected": select_parameters(&result).ok().map(|p| p.point),
    });
    std::fs::write(
        paths.summary(),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    Ok(result)
}

fn failed_rows(
    cfg: &ExperimentConfig,
    p: usize,
    gp: &GridPoint,
    i: usize,
    j: usize,
    done: &BTreeSet<(usize, usize, usize, usize)>,
    msg: &str,
) -> Vec<RunRow> {
    (0..cfg.ensemble.test_sets)
        .filter(|k| !done.contains(&(p, i, j, *k)))
        .map(|k| make_row(cfg, p, gp, (i, j, k), Err(msg)))
        .collect()
}

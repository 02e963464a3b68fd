//! Experiment configuration (TOML).
//!
//! ```toml
//! version = 1
//! base_seed = 7
//! lyapunov_time = 20.83
//!
//! [reservoir]          # any omitted field keeps its default
//! nodes = 500
//!
//! [ks]
//! length = 22.0
//!
//! [schedule]
//! t_sync = 100
//! t_train = 20000
//! t_pred = 2000
//!
//! [ensemble]
//! reservoirs = 3
//! train_sets = 2
//! test_sets = 5
//!
//! [method]
//! kind = "lmnt"        # none | tikhonov | jacobian | noise | lmnt | lmnt_reduced | lmnt_mean_input
//! k = 4
//!
//! [grid]               # base-10 exponents
//! log10_beta_t = [-16.5]
//! log10_beta = [-7.4]  # β_J, β_N or β_L depending on the method
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ks::KsConfig;
use crate::regularization::{LmntMode, RegularizationConfig};
use crate::reservoir::ReservoirHyperparams;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub t_sync: usize,
    pub t_train: usize,
    pub t_pred: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            t_sync: 100,
            t_train: 20000,
            t_pred: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ensemble {
    pub reservoirs: usize,
    pub train_sets: usize,
    pub test_sets: usize,
}

impl Default for Ensemble {
    fn default() -> Self {
        Self {
            reservoirs: 3,
            train_sets: 2,
            test_sets: 5,
        }
    }
}

impl Ensemble {
    pub fn predictions(&self) -> usize {
        self.reservoirs * self.train_sets * self.test_sets
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    None,
    Tikhonov,
    Jacobian,
    Noise,
    Lmnt,
    LmntReduced,
    LmntMeanInput,
}

impl MethodKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodKind::None => "none",
            MethodKind::Tikhonov => "tikhonov",
            MethodKind::Jacobian => "jacobian",
            MethodKind::Noise => "noise",
            MethodKind::Lmnt => "lmnt",
            MethodKind::LmntReduced => "lmnt_reduced",
            MethodKind::LmntMeanInput => "lmnt_mean_input",
        }
    }

    /// Whether the method has a second strength besides `β_T`.
    pub fn has_primary_beta(self) -> bool {
        !matches!(self, MethodKind::None | MethodKind::Tikhonov)
    }

    pub fn uses_tikhonov(self) -> bool {
        !matches!(self, MethodKind::None)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    pub kind: MethodKind,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Sample count for reduced LMNT.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Constant-input synchronization steps for mean-input LMNT; defaults to
    /// `t_sync`.
    #[serde(default)]
    pub mean_input_sync_steps: Option<usize>,
}

fn default_k() -> usize {
    4
}

fn default_samples() -> usize {
    20
}

impl MethodConfig {
    pub fn new(kind: MethodKind) -> Self {
        Self {
            kind,
            k: default_k(),
            samples: default_samples(),
            mean_input_sync_steps: None,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            MethodKind::Lmnt | MethodKind::LmntMeanInput => {
                format!("{}(K={})", self.kind.as_str(), self.k)
            }
            MethodKind::LmntReduced => {
                format!("{}(K={},T={})", self.kind.as_str(), self.k, self.samples)
            }
            _ => self.kind.as_str().to_string(),
        }
    }
}

/// Regularization grid as base-10 exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default)]
    pub log10_beta_t: Vec<f64>,
    #[serde(default)]
    pub log10_beta: Vec<f64>,
}

/// One point of the regularization grid. `None` means the strength is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub log10_beta_t: Option<f64>,
    pub log10_beta: Option<f64>,
}

impl GridPoint {
    pub fn beta_t(&self) -> f64 {
        self.log10_beta_t.map_or(0.0, |x| 10f64.powf(x))
    }

    pub fn beta(&self) -> f64 {
        self.log10_beta.map_or(0.0, |x| 10f64.powf(x))
    }

    pub fn total(&self) -> f64 {
        self.beta_t() + self.beta()
    }

    /// Regularization settings of this point for `method`.
    pub fn regularization(&self, method: &MethodConfig) -> RegularizationConfig {
        let mut c = RegularizationConfig {
            beta_t: self.beta_t(),
            k: method.k,
            ..Default::default()
        };
        match method.kind {
            MethodKind::Jacobian => c.beta_j = self.beta(),
            MethodKind::Noise => c.beta_n = self.beta(),
            MethodKind::Lmnt => c.beta_l = self.beta(),
            MethodKind::LmntReduced => {
                c.beta_l = self.beta();
                c.lmnt_mode = LmntMode::Reduced {
                    samples: method.samples,
                };
            }
            MethodKind::LmntMeanInput => {
                c.beta_l = self.beta();
                c.lmnt_mode = LmntMode::MeanInput;
            }
            MethodKind::None | MethodKind::Tikhonov => {}
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsdSettings {
    pub t_pred: usize,
    pub window: usize,
    /// Bins where the true spectrum falls below this fraction of its peak
    /// are left out of the log-deviation score.
    pub relative_floor: f64,
}

impl Default for PsdSettings {
    fn default() -> Self {
        Self {
            t_pred: 16000,
            window: 8192,
            relative_floor: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub base_seed: u64,
    #[serde(default = "default_lyapunov_time")]
    pub lyapunov_time: f64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub reservoir: ReservoirHyperparams,
    #[serde(default)]
    pub ks: KsConfig,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub ensemble: Ensemble,
    pub method: MethodConfig,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub psd: PsdSettings,
}

fn default_lyapunov_time() -> f64 {
    20.83
}

impl ExperimentConfig {
    /// Desk-scale preset (3 × 2 × 5 ensemble, `T_pred = 2000`).
    pub fn desk(method: MethodConfig, grid: Grid) -> Self {
        Self {
            version: CONFIG_VERSION,
            base_seed: 2024,
            lyapunov_time: default_lyapunov_time(),
            output_dir: None,
            reservoir: ReservoirHyperparams::default(),
            ks: KsConfig::default(),
            schedule: Schedule::default(),
            ensemble: Ensemble::default(),
            method,
            grid,
            psd: PsdSettings::default(),
        }
    }

    /// Full-scale preset (20 × 10 × 35 ensemble).
    pub fn full(method: MethodConfig, grid: Grid) -> Self {
        Self {
            ensemble: Ensemble {
                reservoirs: 20,
                train_sets: 10,
                test_sets: 35,
            },
            ..Self::desk(method, grid)
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.version != CONFIG_VERSION {
            return bad(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            ));
        }
        self.reservoir.validate()?;
        self.ks.validate()?;
        let e = &self.ensemble;
        if e.reservoirs == 0 || e.train_sets == 0 || e.test_sets == 0 {
            return bad("ensemble counts must be >= 1".into());
        }
        let s = &self.schedule;
        if s.t_train < 2 || s.t_pred < 2 {
            return bad("t_train and t_pred must be >= 2".into());
        }
        if !(self.lyapunov_time > 0.0) {
            return bad("lyapunov_time must be > 0".into());
        }
        let m = &self.method;
        if m.k == 0 {
            return bad("method.k must be >= 1".into());
        }
        let lmnt = matches!(
            m.kind,
            MethodKind::Lmnt | MethodKind::LmntReduced | MethodKind::LmntMeanInput
        );
        if lmnt && m.k > s.t_sync {
            return bad(format!("method.k = {} exceeds t_sync = {}", m.k, s.t_sync));
        }
        if m.kind == MethodKind::LmntReduced && (m.samples == 0 || m.samples + m.k > s.t_train) {
            return bad(format!(
                "method.samples = {} must lie in 1..=t_train-k",
                m.samples
            ));
        }
        if m.kind.uses_tikhonov() && self.grid.log10_beta_t.is_empty() {
            return bad(format!(
                "grid.log10_beta_t must be nonempty for method {}",
                m.kind.as_str()
            ));
        }
        if m.kind.has_primary_beta() && self.grid.log10_beta.is_empty() {
            return bad(format!(
                "grid.log10_beta must be nonempty for method {}",
                m.kind.as_str()
            ));
        }
        if self
            .grid
            .log10_beta_t
            .iter()
            .chain(&self.grid.log10_beta)
            .any(|x| !x.is_finite())
        {
            return bad("grid exponents must be finite".into());
        }
        if self.psd.window == 0
            || !self.psd.window.is_power_of_two()
            || self.psd.t_pred < self.psd.window
        {
            return bad("psd.window must be a power of two no longer than psd.t_pred".into());
        }
        Ok(())
    }

    /// Grid points, primary strength outermost.
    pub fn grid_points(&self) -> Vec<GridPoint> {
        let ts: Vec<Option<f64>> = if self.method.kind.uses_tikhonov() {
            self.grid.log10_beta_t.iter().map(|&x| Some(x)).collect()
        } else {
            vec![None]
        };
        let bs: Vec<Option<f64>> = if self.method.kind.has_primary_beta() {
            self.grid.log10_beta.iter().map(|&x| Some(x)).collect()
        } else {
            vec![None]
        };
        bs.iter()
            .flat_map(|&b| {
                ts.iter().map(move |&t| GridPoint {
                    log10_beta_t: t,
                    log10_beta: b,
                })
            })
            .collect()
    }

    pub fn mean_input_sync_steps(&self) -> usize {
        self.method
            .mean_input_sync_steps
            .unwrap_or(self.schedule.t_sync)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
version = 1
base_seed = 7

[reservoir]
nodes = 40

[schedule]
t_sync = 10
t_train = 300
t_pred = 50

[ensemble]
reservoirs = 1
train_sets = 1
test_sets = 2

[method]
kind = "lmnt"
k = 3

[grid]
log10_beta_t = [-8.0, -6.0]
log10_beta = [-7.4]
"#;

    #[test]
    fn parses_example() {
        let cfg = ExperimentConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(cfg.reservoir.nodes, 40);
        assert_eq!(cfg.reservoir.spectral_radius, 0.6);
        assert_eq!(cfg.ks.grid_points, 64);
        assert_eq!(cfg.method.k, 3);
        let pts = cfg.grid_points();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].log10_beta, Some(-7.4));
        let back = ExperimentConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn schema_errors() {
        assert!(
            ExperimentConfig::from_toml_str(&EXAMPLE.replace("version = 1", "version = 9"))
                .is_err()
        );
        assert!(
            ExperimentConfig::from_toml_str(&EXAMPLE.replace("nodes = 40", "nodez = 40")).is_err()
        );
        assert!(ExperimentConfig::from_toml_str(&EXAMPLE.replace("k = 3", "k = 30")).is_err());
        assert!(ExperimentConfig::from_toml_str(
            &EXAMPLE.replace("log10_beta = [-7.4]", "log10_beta = []")
        )
        .is_err());
        assert!(ExperimentConfig::from_toml_str("not toml [").is_err());
    }

    #[test]
    fn none_method_has_single_point() {
        let mut cfg = ExperimentConfig::from_toml_str(EXAMPLE).unwrap();
        cfg.method.kind = MethodKind::None;
        let pts = cfg.grid_points();
        assert_eq!(pts.len(), 1);
        assert_eq!(pts[0].total(), 0.0);
    }

    #[test]
    fn grid_point_maps_to_regularization() {
        let p = GridPoint {
            log10_beta_t: Some(-6.0),
            log10_beta: Some(-5.0),
        };
        let r = p.regularization(&MethodConfig::new(MethodKind::Jacobian));
        assert!((r.beta_t - 1e-6).abs() < 1e-20 && (r.beta_j - 1e-5).abs() < 1e-19);
        assert_eq!(r.beta_l, 0.0);
    }
}

//! Table-style reports and climate (PSD) comparisons.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, GridPoint};
use super::experiment::{Member, TrainingContext};
use super::stats::MedianCi;
use super::sweep::{
    aggregate, read_rows, select_parameters, PointSummary, SweepPaths, SweepResult,
};
use crate::error::{Error, Result};
use crate::metrics::{mean_log_deviation, welch_psd, PsdEstimate};

fn exponent(x: Option<f64>) -> String {
    x.map_or_else(|| "0".to_string(), |e| format!("1e{e}"))
}

fn fmt_ci(c: Option<MedianCi>, scale: f64, sci: bool) -> String {
    match c {
        None => "-".into(),
        Some(c) => {
            let c = c.scaled(scale);
            let f = |v: f64| {
                if v.is_infinite() {
                    "inf".to_string()
                } else if sci {
                    format!("{v:.2e}")
                } else {
                    format!("{v:.2}")
                }
            };
            format!("{} [{}, {}]", f(c.median), f(c.lo), f(c.hi))
        }
    }
}

/// Column labels for the primary strength of a method.
fn beta_label(method: &str) -> &'static str {
    if method.starts_with("jacobian") {
        "beta_J"
    } else if method.starts_with("noise") {
        "beta_N"
    } else if method.starts_with("lmnt") {
        "beta_L"
    } else {
        "beta"
    }
}

/// One report line: method, strengths, stable count, then medians with 95%
/// intervals of VT (Lyapunov times), mean and max map error.
pub fn format_point(sweep: &SweepResult, p: &PointSummary) -> String {
    let mut params = Vec::new();
    if p.grid.log10_beta.is_some() {
        params.push(format!(
            "{}={}",
            beta_label(&sweep.method),
            exponent(p.grid.log10_beta)
        ));
    }
    if p.grid.log10_beta_t.is_some() {
        params.push(format!("beta_T={}", exponent(p.grid.log10_beta_t)));
    }
    if params.is_empty() {
        params.push("-".into());
    }
    format!(
        "{:<20} {:<32} {:>9} {:<26} {:<32} {:<32}",
        sweep.method,
        params.join(" "),
        format!("{}/{}", p.stable, p.predictions),
        fmt_ci(p.valid_time, 1.0 / sweep.lyapunov_time, false),
        fmt_ci(p.mean_map_error, 1.0, true),
        fmt_ci(p.max_map_error, 1.0, true),
    )
}

pub fn format_table(sweep: &SweepResult, only_selected: bool) -> Result<String> {
    let mut s = String::new();
    writeln!(
        s,
        "{:<20} {:<32} {:>9} {:<26} {:<32} {:<32}",
        "method", "parameters", "stable", "VT [t_Lyap]", "mean map error", "max map error"
    )
    .expect("write to string");
    if only_selected {
        writeln!(s, "{}", format_point(sweep, select_parameters(sweep)?)).expect("write to string");
    } else {
        for p in &sweep.points {
            writeln!(s, "{}", format_point(sweep, p)).expect("write to string");
        }
    }
    Ok(s)
}

/// CSV with one line per grid point.
pub fn summary_csv(sweep: &SweepResult) -> String {
    let mut s = String::from(
        "method,point,log10_beta_t,log10_beta,predictions,failed,stable,fraction_stable,\
         vt_median_lyap,vt_lo_lyap,vt_hi_lyap,mean_map_median,mean_map_lo,mean_map_hi,\
         max_map_median,max_map_lo,max_map_hi\n",
    );
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    let ci = |c: Option<MedianCi>, scale: f64| {
        c.map_or(",,".to_string(), |c| {
            let c = c.scaled(scale);
            format!("{},{},{}", c.median, c.lo, c.hi)
        })
    };
    for p in &sweep.points {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            sweep.method,
            p.point,
            opt(p.grid.log10_beta_t),
            opt(p.grid.log10_beta),
            p.predictions,
            p.failed,
            p.stable,
            p.fraction_stable,
            ci(p.valid_time, 1.0 / sweep.lyapunov_time),
            ci(p.mean_map_error, 1.0),
            ci(p.max_map_error, 1.0),
        )
        .expect("write to string");
    }
    s
}

/// Re-aggregate a finished (or partial) sweep directory.
pub fn load_sweep(dir: &Path) -> Result<(ExperimentConfig, SweepResult)> {
    let paths = SweepPaths::new(dir);
    let cfg = ExperimentConfig::load(&paths.config())?;
    let rows = read_rows(&paths.rows())?;
    if rows.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no prediction rows in {}",
            paths.rows().display()
        )));
    }
    let sweep = aggregate(&cfg, &rows)?;
    Ok((cfg, sweep))
}

/// Average true and predicted PSDs of the first component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdComparison {
    pub truth: PsdEstimate,
    /// Mean over stable predictions; `None` if none was stable.
    pub predicted: Option<PsdEstimate>,
    pub stable: usize,
    pub predictions: usize,
    pub mean_log10_deviation: Option<f64>,
}

/// Two-column `frequency,power` plot data.
pub fn psd_csv(psd: &PsdEstimate) -> String {
    let mut s = String::from("frequency,power\n");
    for (f, p) in psd.frequencies.iter().zip(&psd.power) {
        writeln!(s, "{f},{p}").expect("write to string");
    }
    s
}

/// Long forecasts (`cfg.psd.t_pred` steps) at `point` for every ensemble
/// member, compared with the true trajectories through the Welch PSD of
/// the first component in physical units.
pub fn psd_comparison(
    cfg: &ExperimentConfig,
    point: &GridPoint,
    mut log: impl FnMut(&str),
) -> Result<PsdComparison> {
    cfg.validate()?;
    let t_pred = cfg.psd.t_pred;
    let window = cfg.psd.window;
    let dt = cfg.ks.dt;
    let e = &cfg.ensemble;
    let mut truths = Vec::new();
    let mut preds = Vec::new();
    let mut total = 0;
    for j in 0..e.train_sets {
        let ctx = TrainingContext::new(cfg, j, e.test_sets, t_pred)?;
        if j == 0 {
            for k in 0..e.test_sets {
                let raw = &ctx.tests[k].raw;
                let u1 = raw.block(cfg.schedule.t_sync + 1, 0, t_pred, 1).into_vec();
                truths.push(welch_psd(&u1, window, dt)?);
            }
        }
        for i in 0..e.reservoirs {
            let mut member = Member::new(cfg, &ctx, i)?;
            let w = member.weights(point)?;
            for (run, rec) in member.score_all(&w)? {
                total += 1;
                if rec.verdict.is_stable() && run.outputs.rows() == t_pred {
                    let u1 = ctx.train.transform.destandardize(&run.outputs).column(0);
                    preds.push(welch_psd(&u1, window, dt)?);
                }
            }
            log(&format!(
                "reservoir {i}, training set {j}: {} stable so far",
                preds.len()
            ));
        }
    }
    let truth = PsdEstimate::mean(&truths)?;
    let predicted = if preds.is_empty() {
        None
    } else {
        Some(PsdEstimate::mean(&preds)?)
    };
    let dev = match &predicted {
        Some(p) => Some(mean_log_deviation(p, &truth, cfg.psd.relative_floor)?),
        None => None,
    };
    Ok(PsdComparison {
        truth,
        predicted,
        stable: preds.len(),
        predictions: total,
        mean_log10_deviation: dev,
    })
}

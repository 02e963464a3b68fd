//! Command-line interface.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use super::config::{ExperimentConfig, Grid, GridPoint, MethodConfig, MethodKind};
use super::experiment::{test_seed, train_seed, Member, TrainingContext};
use super::report::{format_table, load_sweep, psd_comparison, psd_csv, summary_csv};
use super::sweep::{run_sweep, select_parameters};
use crate::error::{Error, Result};
use crate::io::{
    read_model, write_dataset, write_matrix_csv, write_model, write_regularization_matrix,
};
use crate::ks::{largest_lyapunov, BenettinSettings, DataSet};
use crate::metrics::score_prediction;
use crate::reservoir::Reservoir;
use crate::training::TrainedModel;

/// Exit code for unreadable or invalid configuration.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "rcstab",
    version,
    about = "Reservoir-computer forecasting of Kuramoto-Sivashinsky dynamics"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// TOML experiment config; the desk-scale LMNT preset if omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `base_seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory (or file for `train`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate training and test trajectories.
    GenData {
        /// Also write plain CSV copies.
        #[arg(long)]
        csv: bool,
    },
    /// Train one ensemble member at one grid point.
    Train {
        #[arg(long, default_value_t = 0)]
        reservoir: usize,
        #[arg(long, default_value_t = 0)]
        train_set: usize,
        /// Index into the config's grid points.
        #[arg(long, default_value_t = 0)]
        point: usize,
        /// Also save the method's regularization matrix.
        #[arg(long)]
        save_matrix: bool,
    },
    /// Predict one test trajectory with a saved model and print its record.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        test_set: usize,
        /// Write the predicted trajectory as CSV.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Run the whole grid over the ensemble (resumable).
    Sweep,
    /// Summarize a sweep directory.
    Report {
        /// Sweep directory; defaults to `--out`.
        #[arg(long)]
        from: Option<PathBuf>,
        /// Print only the selected grid point.
        #[arg(long)]
        selected: bool,
        /// Also write `report.csv`.
        #[arg(long)]
        csv: bool,
        /// Long forecasts at the selected point; writes `psd_truth.csv` and
        /// `psd_predicted.csv`.
        #[arg(long)]
        psd: bool,
    },
    /// Largest Lyapunov exponent of the configured KS system.
    Lyapunov {
        /// Averaging time in KS time units.
        #[arg(long, default_value_t = 5000.0)]
        horizon: f64,
    },
}

/// Desk-scale LMNT at the strengths that work best at full scale.
pub fn default_config() -> ExperimentConfig {
    ExperimentConfig::desk(
        MethodConfig::new(MethodKind::Lmnt),
        Grid {
            log10_beta_t: vec![-16.5],
            log10_beta: vec![-7.4],
        },
    )
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let mut cfg = match &g.config {
        Some(p) => ExperimentConfig::load(p).map_err(|e| match e {
            Error::Io(io) => Error::Config(format!("{}: {io}", p.display())),
            other => other,
        })?,
        None => default_config(),
    };
    if let Some(s) = g.seed {
        cfg.base_seed = s;
    }
    Ok(cfg)
}

fn out_dir(g: &Global, cfg: &ExperimentConfig) -> PathBuf {
    g.out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("rcstab-out"))
}

fn point_at(cfg: &ExperimentConfig, i: usize) -> Result<GridPoint> {
    let pts = cfg.grid_points();
    pts.get(i).copied().ok_or_else(|| {
        Error::InvalidParameter(format!(
            "grid point {i} out of range (grid has {})",
            pts.len()
        ))
    })
}

fn ensure_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p)?;
    Ok(())
}

fn gen_data(cfg: &ExperimentConfig, out: &Path, csv: bool) -> Result<()> {
    ensure_dir(out)?;
    let s = &cfg.schedule;
    for j in 0..cfg.ensemble.train_sets {
        let ds = DataSet::training(
            &cfg.ks,
            train_seed(cfg.base_seed, j),
            s.t_sync + s.t_train + 1,
        )?;
        let p = out.join(format!("train_{j}.ksds"));
        write_dataset(&p, &ds)?;
        if csv {
            write_matrix_csv(&out.join(format!("train_{j}.csv")), &ds.raw, None)?;
        }
        println!("{}", p.display());
        // Tests share trajectories across training sets; store them
        // standardized with the first training transform.
        if j == 0 {
            for k in 0..cfg.ensemble.test_sets {
                let t = DataSet::testing(
                    &cfg.ks,
                    test_seed(cfg.base_seed, k),
                    s.t_sync + s.t_pred + 1,
                    &ds.transform,
                )?;
                let p = out.join(format!("test_{k}.ksds"));
                write_dataset(&p, &t)?;
                if csv {
                    write_matrix_csv(&out.join(format!("test_{k}.csv")), &t.raw, None)?;
                }
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn train(
    cfg: &ExperimentConfig,
    out: &Path,
    reservoir: usize,
    train_set: usize,
    point: usize,
    save: bool,
) -> Result<()> {
    if reservoir >= cfg.ensemble.reservoirs || train_set >= cfg.ensemble.train_sets {
        return Err(Error::InvalidParameter(
            "reservoir or training-set index outside the ensemble".into(),
        ));
    }
    let p = point_at(cfg, point)?;
    let ctx = TrainingContext::new(cfg, train_set, 0, cfg.schedule.t_pred)?;
    let mut member = Member::new(cfg, &ctx, reservoir)?;
    let weights = member.weights(&p)?;
    let model = TrainedModel {
        hyperparams: member.reservoir_hyperparams(),
        input_dim: ctx.train.standardized.cols(),
        weights,
        config: p.regularization(&cfg.method),
        transform: ctx.train.transform.clone(),
    };
    let path = if out.extension().is_some() {
        out.to_path_buf()
    } else {
        ensure_dir(out)?;
        out.join(format!("model_r{reservoir}_t{train_set}_p{point}.rcwm"))
    };
    let prov = json!({
        "base_seed": cfg.base_seed,
        "reservoir": reservoir,
        "train_set": train_set,
        "point": point,
        "method": cfg.method.label(),
        "log10_beta_t": p.log10_beta_t,
        "log10_beta": p.log10_beta,
    });
    write_model(&path, &model, prov)?;
    println!("{}", path.display());
    if save {
        if let Some(m) = member.method_matrix()? {
            let mp = path.with_extension("rcrm");
            write_regularization_matrix(&mp, m)?;
            println!("{}", mp.display());
        }
    }
    for w in &member.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn predict(
    cfg: &ExperimentConfig,
    model: &Path,
    test_set: usize,
    trajectory: Option<&Path>,
) -> Result<()> {
    let (model, prov) = read_model(model)?;
    let j = prov.get("train_set").and_then(|v| v.as_u64()).unwrap_or(0) as usize;
    let ctx = TrainingContext::new(cfg, j, test_set + 1, cfg.schedule.t_pred)?;
    if ctx.train.transform != model.transform {
        return Err(Error::InvalidParameter(
            "model transform does not match the configured training set; check --config and --seed"
                .into(),
        ));
    }
    let res = Reservoir::build(&model.hyperparams, model.input_dim)?;
    let t_sync = cfg.schedule.t_sync;
    let run = res.predict_closed_loop(
        &model.weights,
        &ctx.sync(t_sync, test_set),
        cfg.schedule.t_pred,
    )?;
    let mut map = crate::ks::TrueMap::new(&cfg.ks, &model.transform)?;
    let rec = score_prediction(
        &run.outputs,
        run.overflow,
        &ctx.truth(t_sync, test_set),
        &mut map,
        &ctx.norms,
        cfg.ks.dt,
    );
    if let Some(p) = trajectory {
        write_matrix_csv(p, &model.transform.destandardize(&run.outputs), None)?;
    }
    println!("{}", serde_json::to_string_pretty(&rec)?);
    Ok(())
}

fn report(cfg_global: &Global, dir: &Path, selected: bool, csv: bool, psd: bool) -> Result<()> {
    let (mut cfg, sweep) = load_sweep(dir)?;
    if let Some(s) = cfg_global.seed {
        cfg.base_seed = s;
    }
    print!("{}", format_table(&sweep, selected)?);
    if csv {
        let p = dir.join("report.csv");
        std::fs::write(&p, summary_csv(&sweep))?;
        println!("{}", p.display());
    }
    if psd {
        let best = select_parameters(&sweep)?;
        let cmp = psd_comparison(&cfg, &best.grid, |m| eprintln!("{m}"))?;
        let truth = dir.join("psd_truth.csv");
        std::fs::write(&truth, psd_csv(&cmp.truth))?;
        println!("stable {}/{}", cmp.stable, cmp.predictions);
        println!("{}", truth.display());
        match (&cmp.predicted, cmp.mean_log10_deviation) {
            (Some(pred), Some(d)) => {
                let p = dir.join("psd_predicted.csv");
                std::fs::write(&p, psd_csv(pred))?;
                println!("{}", p.display());
                println!("mean |log10 PSD deviation| {d:.4}");
            }
            _ => println!("no stable prediction; predicted PSD not written"),
        }
    }
    Ok(())
}

fn lyapunov(cfg: &ExperimentConfig, horizon: f64) -> Result<()> {
    let settings = BenettinSettings {
        horizon,
        seed: cfg.base_seed,
        ..Default::default()
    };
    let est = largest_lyapunov(&cfg.ks, &settings)?;
    println!("{}", serde_json::to_string_pretty(&est)?);
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    let g = &cli.global;
    if let Some(n) = g.threads {
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("warning: thread pool already initialized: {e}");
        }
        #[cfg(not(feature = "parallel"))]
        let _ = n;
    }
    let cfg = load_config(g)?;
    let out = out_dir(g, &cfg);
    match &cli.command {
        Command::GenData { csv } => gen_data(&cfg, &out, *csv),
        Command::Train {
            reservoir,
            train_set,
            point,
            save_matrix,
        } => train(&cfg, &out, *reservoir, *train_set, *point, *save_matrix),
        Command::Predict {
            model,
            test_set,
            trajectory,
        } => predict(&cfg, model, *test_set, trajectory.as_deref()),
        Command::Sweep => {
            let res = run_sweep(&cfg, &out, |m| eprintln!("{m}"))?;
            print!("{}", format_table(&res, false)?);
            Ok(())
        }
        Command::Report {
            from,
            selected,
            csv,
            psd,
        } => report(g, from.as_deref().unwrap_or(&out), *selected, *csv, *psd),
        Command::Lyapunov { horizon } => lyapunov(&cfg, *horizon),
    }
}

/// Parse `argv`, run, and map errors to an exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

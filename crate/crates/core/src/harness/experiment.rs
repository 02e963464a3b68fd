//! Ensemble members: seeded data, reservoirs and per-grid-point evaluation.

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, GridPoint, MethodKind};
use crate::error::Result;
use crate::ks::{DataSet, TrueMap};
use crate::linalg::DenseMatrix;
use crate::metrics::{normalizers, score_prediction, ErrorNormalizers, PredictionRecord};
use crate::regularization::{
    jacobian_matrix, lmnt_matrix, lmnt_matrix_mean_input, lmnt_matrix_reduced, noisy_features,
    tikhonov_matrix, RegularizationMatrix,
};
use crate::reservoir::{ClosedLoopRun, FeatureSeries, Reservoir, ReservoirHyperparams};
use crate::rng::derive_seed;
use crate::training::{GramCache, OutputWeights};

/// Seeds of one prediction, all derived from the base seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberSeeds {
    pub reservoir: u64,
    pub train: u64,
    pub noise: u64,
}

pub fn reservoir_seed(base: u64, i: usize) -> u64 {
    derive_seed(base, "reservoir", i as u64)
}

pub fn train_seed(base: u64, j: usize) -> u64 {
    derive_seed(base, "train", j as u64)
}

/// Test trajectories are shared by all training sets; each is standardized
/// with the transform of the training set it is paired with.
pub fn test_seed(base: u64, k: usize) -> u64 {
    derive_seed(base, "test", k as u64)
}

pub fn noise_seed(base: u64, i: usize, j: usize) -> u64 {
    derive_seed(base, "noise", ((i as u64) << 32) | j as u64)
}

pub fn member_seeds(base: u64, i: usize, j: usize) -> MemberSeeds {
    MemberSeeds {
        reservoir: reservoir_seed(base, i),
        train: train_seed(base, j),
        noise: noise_seed(base, i, j),
    }
}

/// Training set `j`, its error normalizers and its paired test sets.
pub struct TrainingContext {
    pub index: usize,
    pub train: DataSet,
    pub norms: ErrorNormalizers,
    pub tests: Vec<DataSet>,
    pub t_pred: usize,
}

impl TrainingContext {
    /// Build training set `j` with `test_sets` test trajectories long
    /// enough for `t_pred` predicted steps.
    pub fn new(cfg: &ExperimentConfig, j: usize, test_sets: usize, t_pred: usize) -> Result<Self> {
        let s = &cfg.schedule;
        let train = DataSet::training(
            &cfg.ks,
            train_seed(cfg.base_seed, j),
            s.t_sync + s.t_train + 1,
        )?;
        let norms = normalizers(&train.standardized.block(
            s.t_sync,
            0,
            s.t_train + 1,
            train.standardized.cols(),
        ))?;
        let tests = (0..test_sets)
            .map(|k| {
                DataSet::testing(
                    &cfg.ks,
                    test_seed(cfg.base_seed, k),
                    s.t_sync + t_pred + 1,
                    &train.transform,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            index: j,
            train,
            norms,
            tests,
            t_pred,
        })
    }

    /// Synchronization rows (through the prediction origin) of test `k`.
    pub fn sync(&self, t_sync: usize, k: usize) -> DenseMatrix {
        let d = &self.tests[k].standardized;
        d.block(0, 0, t_sync + 1, d.cols())
    }

    /// True states for prediction steps `1..=t_pred` of test `k`.
    pub fn truth(&self, t_sync: usize, k: usize) -> DenseMatrix {
        let d = &self.tests[k].standardized;
        d.block(t_sync + 1, 0, self.t_pred, d.cols())
    }
}

/// One (reservoir, training set) pair with cached training quantities.
pub struct Member<'a> {
    cfg: &'a ExperimentConfig,
    data: &'a TrainingContext,
    pub reservoir_index: usize,
    pub seeds: MemberSeeds,
    pub reservoir: Reservoir,
    series: FeatureSeries,
    cache: GramCache,
    method_matrix: Option<RegularizationMatrix>,
    noisy_cache: Option<(f64, GramCache)>,
    pub warnings: Vec<String>,
}

impl<'a> Member<'a> {
    pub fn new(cfg: &'a ExperimentConfig, data: &'a TrainingContext, i: usize) -> Result<Self> {
        let seeds = member_seeds(cfg.base_seed, i, data.index);
        let h = cfg.reservoir.clone().with_seed(seeds.reservoir);
        let reservoir = Reservoir::build(&h, data.train.standardized.cols())?;
        let s = &cfg.schedule;
        let series = reservoir.drive_open_loop(&data.train.standardized, s.t_sync, s.t_train)?;
        let cache = GramCache::new(&series)?;
        Ok(Self {
            cfg,
            data,
            reservoir_index: i,
            seeds,
            reservoir,
            series,
            cache,
            method_matrix: None,
            noisy_cache: None,
            warnings: Vec::new(),
        })
    }

    pub fn reservoir_hyperparams(&self) -> ReservoirHyperparams {
        self.cfg.reservoir.clone().with_seed(self.seeds.reservoir)
    }

    pub fn series(&self) -> &FeatureSeries {
        &self.series
    }

    pub fn gram_cache(&self) -> &GramCache {
        &self.cache
    }

    /// The method's own regularization matrix (built once per member).
    pub fn method_matrix(&mut self) -> Result<Option<&RegularizationMatrix>> {
        let m = &self.cfg.method;
        if self.method_matrix.is_none() {
            let built = match m.kind {
                MethodKind::None | MethodKind::Tikhonov | MethodKind::Noise => None,
                MethodKind::Jacobian => Some(jacobian_matrix(&self.series, &self.reservoir)?),
                MethodKind::Lmnt => Some(lmnt_matrix(&self.series, &self.reservoir, m.k)?),
                MethodKind::LmntReduced => Some(lmnt_matrix_reduced(
                    &self.series,
                    &self.reservoir,
                    m.k,
                    m.samples,
                )?),
                MethodKind::LmntMeanInput => {
                    let mean = training_mean(
                        &self.data.train.standardized,
                        self.cfg.schedule.t_sync,
                        self.cfg.schedule.t_train,
                    );
                    let out = lmnt_matrix_mean_input(
                        &self.reservoir,
                        &mean,
                        m.k,
                        self.cfg.mean_input_sync_steps(),
                    )?;
                    if let Some(w) = out.warning {
                        self.warnings.push(w);
                    }
                    Some(out.matrix)
                }
            };
            self.method_matrix = built;
        }
        Ok(self.method_matrix.as_ref())
    }

    /// Readout for one grid point.
    pub fn weights(&mut self, point: &GridPoint) -> Result<OutputWeights> {
        let beta_t = point.beta_t();
        match self.cfg.method.kind {
            MethodKind::None => self.cache.solve(&[]),
            MethodKind::Tikhonov => self.cache.solve_tikhonov(beta_t),
            MethodKind::Noise => {
                let beta_n = point.beta();
                let stale = self.noisy_cache.as_ref().is_none_or(|(b, _)| *b != beta_n);
                if stale {
                    let s = &self.cfg.schedule;
                    let noisy = noisy_features(
                        &self.reservoir,
                        &self.data.train.standardized,
                        beta_n,
                        self.seeds.noise,
                        s.t_sync,
                        s.t_train,
                    )?;
                    self.noisy_cache = Some((beta_n, GramCache::new(&noisy)?));
                }
                self.noisy_cache
                    .as_ref()
                    .expect("noisy cache filled")
                    .1
                    .solve_tikhonov(beta_t)
            }
            _ => {
                let beta = point.beta();
                let tik = tikhonov_matrix(self.reservoir.feature_dim());
                self.method_matrix()?;
                let r = self.method_matrix.as_ref().expect("method matrix built");
                self.cache.solve(&[(beta, r), (beta_t, &tik)])
            }
        }
    }

    pub fn predict(&self, w: &OutputWeights, k: usize) -> Result<ClosedLoopRun> {
        let sync = self.data.sync(self.cfg.schedule.t_sync, k);
        self.reservoir
            .predict_closed_loop(w, &sync, self.data.t_pred)
    }

    /// Predict and score every test set of this member with `w`.
    pub fn score_all(&self, w: &OutputWeights) -> Result<Vec<(ClosedLoopRun, PredictionRecord)>> {
        let one = |k: usize| -> Result<(ClosedLoopRun, PredictionRecord)> {
            let run = self.predict(w, k)?;
            let truth = self.data.truth(self.cfg.schedule.t_sync, k);
            let mut map = TrueMap::new(&self.cfg.ks, &self.data.train.transform)?;
            let rec = score_prediction(
                &run.outputs,
                run.overflow,
                &truth,
                &mut map,
                &self.data.norms,
                self.cfg.ks.dt,
            );
            Ok((run, rec))
        };
        let ks: Vec<usize> = (0..self.data.tests.len()).collect();
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            ks.par_iter().map(|&k| one(k)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            ks.iter().map(|&k| one(k)).collect()
        }
    }

    /// Train for `point` and score every test set.
    pub fn evaluate(&mut self, point: &GridPoint) -> Result<Vec<PredictionRecord>> {
        let w = self.weights(point)?;
        Ok(self.score_all(&w)?.into_iter().map(|(_, r)| r).collect())
    }
}

/// Mean of the training block `u(0..=t_sync+t_train)` per component.
pub fn training_mean(data: &DenseMatrix, t_sync: usize, t_train: usize) -> Vec<f64> {
    let rows = (t_sync + t_train + 1).min(data.rows());
    let mut mean = vec![0.0; data.cols()];
    for t in 0..rows {
        mean.iter_mut().zip(data.row(t)).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= rows as f64);
    mean
}

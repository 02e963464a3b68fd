//! Browser demo: simulate the KS system, train a small reservoir with a
//! chosen regularization and compare its forecast and spectrum with the truth.

use wasm_bindgen::prelude::*;

use rcstab::ks::{DataSet, KsConfig};
use rcstab::metrics::{
    normalizers_subsampled, valid_time, welch_psd, ErrorNormalizers, VALID_TIME_THRESHOLD,
};
use rcstab::regularization::{lmnt_matrix, lmnt_matrix_reduced, tikhonov_matrix};
use rcstab::{DenseMatrix, GramCache, Reservoir, ReservoirHyperparams};

const T_SYNC: usize = 100;
const LYAPUNOV_TIME: f64 = 20.83;

fn js_err(e: rcstab::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    None,
    Tikhonov,
    Lmnt,
    LmntReduced,
}

/// A trained reservoir together with its data.
#[wasm_bindgen]
pub struct Demo {
    ks: KsConfig,
    train: DataSet,
    test: DataSet,
    norms: ErrorNormalizers,
    forecast: Option<DenseMatrix>,
}

impl Demo {
    /// Simulate `train_steps` training samples and `test_steps` test samples.
    pub fn create(seed: u64, train_steps: usize, test_steps: usize) -> rcstab::Result<Demo> {
        let ks = KsConfig::default();
        let train = DataSet::training(&ks, seed, T_SYNC + train_steps + 1)?;
        let test = DataSet::testing(
            &ks,
            seed.wrapping_add(1),
            T_SYNC + test_steps + 1,
            &train.transform,
        )?;
        let block = train
            .standardized
            .block(T_SYNC, 0, train_steps + 1, train.standardized.cols());
        let norms = normalizers_subsampled(&block, 20_000, seed)?;
        Ok(Self {
            ks,
            train,
            test,
            norms,
            forecast: None,
        })
    }

    fn test_steps(&self) -> usize {
        self.test.len() - T_SYNC - 1
    }

    fn truth_field(&self) -> Vec<f64> {
        let d = &self.test.raw;
        d.block(T_SYNC + 1, 0, self.test_steps(), d.cols())
            .into_vec()
    }

    /// Build a reservoir with `nodes` nodes and train its readout. Returns
    /// the valid time of the closed-loop forecast in Lyapunov times.
    pub fn fit(
        &mut self,
        method: Method,
        nodes: usize,
        log10_beta: f64,
        log10_beta_t: f64,
        reservoir_seed: u64,
    ) -> rcstab::Result<f64> {
        let h = ReservoirHyperparams {
            nodes,
            ..ReservoirHyperparams::default()
        }
        .with_seed(reservoir_seed);
        let data = &self.train.standardized;
        let res = Reservoir::build(&h, data.cols())?;
        let t_train = data.rows() - T_SYNC - 1;
        let series = res.drive_open_loop(data, T_SYNC, t_train)?;
        let cache = GramCache::new(&series)?;
        let tik = tikhonov_matrix(res.feature_dim());
        let (beta, beta_t) = (10f64.powf(log10_beta), 10f64.powf(log10_beta_t));
        let w = match method {
            Method::None => cache.solve(&[]),
            Method::Tikhonov => cache.solve_tikhonov(beta_t),
            Method::Lmnt => lmnt_matrix(&series, &res, 4)
                .and_then(|r| cache.solve(&[(beta, &r), (beta_t, &tik)])),
            Method::LmntReduced => lmnt_matrix_reduced(&series, &res, 4, 20)
                .and_then(|r| cache.solve(&[(beta, &r), (beta_t, &tik)])),
        }?;

        let sync = self.test.standardized.block(0, 0, T_SYNC + 1, data.cols());
        let run = res.predict_closed_loop(&w, &sync, self.test_steps())?;
        let truth = self
            .test
            .standardized
            .block(T_SYNC + 1, 0, self.test_steps(), data.cols());
        let vt = valid_time(
            &run.outputs,
            &truth,
            self.norms.e_bar,
            VALID_TIME_THRESHOLD,
            self.ks.dt,
        );
        self.forecast = Some(self.train.transform.destandardize(&run.outputs));
        Ok(vt / LYAPUNOV_TIME)
    }

    /// Welch spectra of the first grid point: `[f..., P_true..., P_pred...]`
    /// with the prediction part empty when the forecast is too short.
    pub fn spectra_of(&self, window: usize) -> rcstab::Result<Vec<f64>> {
        let truth = self.truth_field();
        let n = self.ks.grid_points;
        let u1: Vec<f64> = truth.iter().step_by(n).copied().collect();
        let t = welch_psd(&u1, window, self.ks.dt)?;
        let mut out = t.frequencies.clone();
        out.extend(&t.power);
        if let Some(f) = &self.forecast {
            if f.rows() == u1.len() {
                let p = welch_psd(&f.column(0), window, self.ks.dt)?;
                out.extend(&p.power);
            }
        }
        Ok(out)
    }
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u64, train_steps: usize, test_steps: usize) -> Result<Demo, JsError> {
        Self::create(seed, train_steps, test_steps).map_err(js_err)
    }

    pub fn grid_points(&self) -> usize {
        self.ks.grid_points
    }

    pub fn steps(&self) -> usize {
        self.test_steps()
    }

    /// True test field after synchronization, row-major `steps × grid_points`.
    pub fn truth(&self) -> Vec<f64> {
        self.truth_field()
    }

    pub fn train(
        &mut self,
        method: Method,
        nodes: usize,
        log10_beta: f64,
        log10_beta_t: f64,
        reservoir_seed: u64,
    ) -> Result<f64, JsError> {
        self.fit(method, nodes, log10_beta, log10_beta_t, reservoir_seed)
            .map_err(js_err)
    }

    /// Forecast field in physical units, row-major. Shorter than the truth
    /// when the forecast overflowed.
    pub fn forecast(&self) -> Vec<f64> {
        self.forecast
            .as_ref()
            .map(|f| f.as_slice().to_vec())
            .unwrap_or_default()
    }

    pub fn spectra(&self, window: usize) -> Result<Vec<f64>, JsError> {
        self.spectra_of(window).map_err(js_err)
    }
}

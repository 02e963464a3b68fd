//! Readout training by regularized least squares.
//!
//! `W · ((1/T) S Sᵀ + Σ_i β_i R_i) = (1/T) V Sᵀ`

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gemm, solve_normal_equations, DenseMatrix};
use crate::regularization::{tikhonov_matrix, RegularizationConfig, RegularizationMatrix};
use crate::reservoir::{FeatureSeries, ReservoirHyperparams};

/// Trained readout `W` (M × (1+M+2N)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputWeights {
    w: DenseMatrix,
}

impl OutputWeights {
    pub fn new(w: DenseMatrix) -> Result<Self> {
        if !w.is_finite() {
            return Err(Error::NonFinite("output weights".into()));
        }
        Ok(Self { w })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.w
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.w
    }
}

/// Everything needed to rebuild a predictor: the reservoir is regenerated
/// from its hyperparameters and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub hyperparams: ReservoirHyperparams,
    pub input_dim: usize,
    pub weights: OutputWeights,
    pub config: RegularizationConfig,
    pub transform: crate::ks::StandardizationTransform,
}

impl TrainedModel {
    pub fn validate(&self) -> Result<()> {
        let f = 1 + self.input_dim + 2 * self.hyperparams.nodes;
        if self.weights.matrix().shape() != (self.input_dim, f)
            || self.transform.dim() != self.input_dim
        {
            return Err(Error::Dimension(format!(
                "weights {:?}, transform {}, expected ({}, {f})",
                self.weights.matrix().shape(),
                self.transform.dim(),
                self.input_dim
            )));
        }
        Ok(())
    }
}

/// Columns of `S` processed per accumulation pass.
const COLUMN_BLOCK: usize = 1000;
/// Side of the square output tiles of the Gram matrix.
const ROW_BLOCK: usize = 128;

/// Cached `(1/T) S Sᵀ` and `(1/T) V Sᵀ`. A grid point then costs one dense
/// solve with no pass over the data.
#[derive(Debug, Clone, PartialEq)]
pub struct GramCache {
    gram: DenseMatrix,
    cross: DenseMatrix,
    samples: usize,
}

impl GramCache {
    pub fn new(series: &FeatureSeries) -> Result<Self> {
        let t = series.len();
        if t == 0 {
            return Err(Error::SeriesTooShort {
                needed: 1,
                available: 0,
            });
        }
        let f = series.feature_dim();
        let m = series.targets.rows();
        let s = series.features.as_slice();
        let scale = 1.0 / t as f64;

        let tiles: Vec<(usize, usize)> = (0..f)
            .step_by(ROW_BLOCK)
            .flat_map(|i| (i..f).step_by(ROW_BLOCK).map(move |j| (i, j)))
            .collect();
        let tile = |&(i0, j0): &(usize, usize)| -> (usize, usize, DenseMatrix) {
            let bi = ROW_BLOCK.min(f - i0);
            let bj = ROW_BLOCK.min(f - j0);
            let mut c = DenseMatrix::zeros(bi, bj);
            for c0 in (0..t).step_by(COLUMN_BLOCK) {
                let len = COLUMN_BLOCK.min(t - c0);
                gemm(
                    scale,
                    (&s[i0 * t + c0..], bi, len, t as isize, 1),
                    (&s[j0 * t + c0..], bj, 1, t as isize),
                    1.0,
                    &mut c,
                );
            }
            (i0, j0, c)
        };
        #[cfg(feature = "parallel")]
        let blocks: Vec<(usize, usize, DenseMatrix)> = {
            use rayon::prelude::*;
            tiles.par_iter().map(tile).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let blocks: Vec<(usize, usize, DenseMatrix)> = tiles.iter().map(tile).collect();

        let mut gram = DenseMatrix::zeros(f, f);
        for (i0, j0, c) in blocks {
            for a in 0..c.rows() {
                for b in 0..c.cols() {
                    let v = c[(a, b)];
                    gram.as_mut_slice()[(i0 + a) * f + j0 + b] = v;
                    gram.as_mut_slice()[(j0 + b) * f + i0 + a] = v;
                }
            }
        }

        let mut cross = DenseMatrix::zeros(m, f);
        let v = series.targets.as_slice();
        for c0 in (0..t).step_by(COLUMN_BLOCK) {
            let len = COLUMN_BLOCK.min(t - c0);
            gemm(
                scale,
                (&v[c0..], m, len, t as isize, 1),
                (&s[c0..], f, 1, t as isize),
                1.0,
                &mut cross,
            );
        }
        Ok(Self {
            gram,
            cross,
            samples: t,
        })
    }

    pub fn gram(&self) -> &DenseMatrix {
        &self.gram
    }

    pub fn cross(&self) -> &DenseMatrix {
        &self.cross
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn feature_dim(&self) -> usize {
        self.gram.rows()
    }

    /// Solve the regularized normal equations. Entries with `β = 0` are
    /// skipped; repeated kinds are summed.
    pub fn solve(&self, regs: &[(f64, &RegularizationMatrix)]) -> Result<OutputWeights> {
        let mut a = self.gram.clone();
        for &(beta, r) in regs {
            if !(beta >= 0.0 && beta.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "regularization strength {beta} must be >= 0"
                )));
            }
            if r.dim() != a.rows() {
                return Err(Error::Dimension(format!(
                    "regularization matrix of size {} for feature dimension {}",
                    r.dim(),
                    a.rows()
                )));
            }
            if beta > 0.0 {
                a.add_scaled(beta, r.matrix())?;
            }
        }
        OutputWeights::new(solve_normal_equations(&a, &self.cross)?)
    }

    /// Solve with Tikhonov only, adding `β_T` to the diagonal directly.
    pub fn solve_tikhonov(&self, beta_t: f64) -> Result<OutputWeights> {
        if !(beta_t >= 0.0 && beta_t.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "beta_T = {beta_t} must be >= 0"
            )));
        }
        let mut a = self.gram.clone();
        let f = a.cols();
        for i in 0..f {
            a.as_mut_slice()[i * f + i] += beta_t;
        }
        OutputWeights::new(solve_normal_equations(&a, &self.cross)?)
    }
}

/// Train directly from a feature series.
pub fn train(
    series: &FeatureSeries,
    regs: &[(f64, &RegularizationMatrix)],
) -> Result<OutputWeights> {
    GramCache::new(series)?.solve(regs)
}

/// Noise training: `noisy` comes from
/// [`noisy_features`](crate::regularization::noisy_features), whose targets
/// are clean. Only Tikhonov regularization is added.
pub fn train_noisy(noisy: &FeatureSeries, beta_t: f64) -> Result<OutputWeights> {
    let r = tikhonov_matrix(noisy.feature_dim());
    train(noisy, &[(beta_t, &r)])
}

/// `(1/T) Σ_j ‖W s_j − v_j‖²`.
pub fn training_residual(series: &FeatureSeries, w: &OutputWeights) -> Result<f64> {
    let pred = w.matrix().matmul(&series.features)?;
    let diff = pred.sub(&series.targets)?;
    Ok(diff.frobenius_norm().powi(2) / series.len() as f64)
}

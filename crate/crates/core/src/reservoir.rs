//! Random echo-state reservoir: construction, open-loop driving and
//! closed-loop prediction.
//!
//! State update: `r(t) = (1-α) r(t-Δt) + α tanh(A r(t-Δt) + B u_in(t) + C)`.
//! Feature vector: `s = [1; u_in; r; r²]` of length `1 + M + 2N`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spectral_radius, DenseMatrix, SparseMatrix};
use crate::rng::{substream, Stream};
use crate::training::OutputWeights;

const RADIUS_TOL: f64 = 1e-13;
const RADIUS_MAX_ITER: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReservoirHyperparams {
    pub nodes: usize,
    pub avg_degree: f64,
    pub spectral_radius: f64,
    pub input_scaling: f64,
    pub input_bias: f64,
    pub leak_rate: f64,
    pub seed: u64,
}

impl Default for ReservoirHyperparams {
    /// N = 500, ⟨d⟩ = 3, ρ = 0.6, σ = 0.1, θ = 0.1, α = 1.
    fn default() -> Self {
        Self {
            nodes: 500,
            avg_degree: 3.0,
            spectral_radius: 0.6,
            input_scaling: 0.1,
            input_bias: 0.1,
            leak_rate: 1.0,
            seed: 0,
        }
    }
}

impl ReservoirHyperparams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.nodes == 0 {
            return bad("reservoir needs at least one node".into());
        }
        if !(self.leak_rate > 0.0 && self.leak_rate <= 1.0) {
            return bad(format!("leak rate {} outside (0, 1]", self.leak_rate));
        }
        if !(self.spectral_radius > 0.0) {
            return bad(format!(
                "spectral radius {} must be > 0",
                self.spectral_radius
            ));
        }
        if !(self.avg_degree > 0.0 && self.avg_degree <= self.nodes as f64) {
            return bad(format!("average degree {} outside (0, N]", self.avg_degree));
        }
        if !(self.input_scaling >= 0.0 && self.input_bias >= 0.0) {
            return bad("input scaling and bias must be non-negative".into());
        }
        Ok(())
    }

    /// Number of adjacency nonzeros, `round(N·⟨d⟩)`.
    pub fn adjacency_nonzeros(&self) -> usize {
        (self.nodes as f64 * self.avg_degree).round() as usize
    }
}

/// Fixed random network `(A, B, C, α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    adjacency: SparseMatrix,
    input: SparseMatrix,
    bias: Vec<f64>,
    leak_rate: f64,
    /// Nonzeros of each column of `B` as `(row, value)`.
    input_columns: Vec<Vec<(usize, f64)>>,
}

impl Reservoir {
    /// Build a reservoir for `input_dim` inputs. Fully determined by
    /// `h.seed`; `A`, `B` and `C` draw from independent substreams.
    pub fn build(h: &ReservoirHyperparams, input_dim: usize) -> Result<Self> {
        h.validate()?;
        if input_dim == 0 {
            return Err(Error::InvalidParameter(
                "input dimension must be >= 1".into(),
            ));
        }
        let n = h.nodes;
        let nnz = h.adjacency_nonzeros();
        if nnz > n * n {
            return Err(Error::InvalidParameter(format!(
                "{nnz} adjacency nonzeros requested for a {n}x{n} matrix"
            )));
        }

        let mut pattern_rng = substream(h.seed, Stream::AdjacencyPattern, &[]);
        let mut value_rng = substream(h.seed, Stream::AdjacencyValues, &[]);
        let mut positions: Vec<usize> =
            rand::seq::index::sample(&mut pattern_rng, n * n, nnz).into_vec();
        positions.sort_unstable();
        let entries: Vec<(usize, usize, f64)> = positions
            .iter()
            .map(|&p| (p / n, p % n, value_rng.random_range(-1.0..=1.0)))
            .collect();
        let mut adjacency = SparseMatrix::from_triplets(n, n, &entries)?;
        let radius = spectral_radius(&adjacency, RADIUS_TOL, RADIUS_MAX_ITER)?;
        if radius == 0.0 {
            return Err(Error::Degenerate(
                "adjacency matrix is nilpotent; cannot rescale to the requested spectral radius"
                    .into(),
            ));
        }
        adjacency.scale(h.spectral_radius / radius);

        // contiguous row blocks; the first N mod M inputs get one extra row
        let base = n / input_dim;
        let extra = n % input_dim;
        let mut b_rng = substream(h.seed, Stream::InputCoupling, &[]);
        let mut b_entries = Vec::with_capacity(n);
        let mut row = 0;
        for col in 0..input_dim {
            let count = base + usize::from(col < extra);
            for _ in 0..count {
                let v = if h.input_scaling > 0.0 {
                    b_rng.random_range(-h.input_scaling..=h.input_scaling)
                } else {
                    0.0
                };
                b_entries.push((row, col, v));
                row += 1;
            }
        }
        let input = SparseMatrix::from_triplets(n, input_dim, &b_entries)?;

        let mut c_rng = substream(h.seed, Stream::Bias, &[]);
        let bias: Vec<f64> = (0..n)
            .map(|_| {
                if h.input_bias > 0.0 {
                    c_rng.random_range(-h.input_bias..=h.input_bias)
                } else {
                    0.0
                }
            })
            .collect();

        Self::from_parts(adjacency, input, bias, h.leak_rate)
    }

    /// Assemble a reservoir from explicit matrices.
    pub fn from_parts(
        adjacency: SparseMatrix,
        input: SparseMatrix,
        bias: Vec<f64>,
        leak_rate: f64,
    ) -> Result<Self> {
        let n = adjacency.rows();
        if adjacency.cols() != n || input.rows() != n || bias.len() != n {
            return Err(Error::Dimension(format!(
                "A {}x{}, B {}x{}, C {}",
                adjacency.rows(),
                adjacency.cols(),
                input.rows(),
                input.cols(),
                bias.len()
            )));
        }
        if !(0.0..=1.0).contains(&leak_rate) {
            return Err(Error::InvalidParameter(format!(
                "leak rate {leak_rate} outside [0, 1]"
            )));
        }
        let mut input_columns = vec![Vec::new(); input.cols()];
        for (i, j, v) in input.triplets() {
            input_columns[j].push((i, v));
        }
        Ok(Self {
            adjacency,
            input,
            bias,
            leak_rate,
            input_columns,
        })
    }

    pub fn nodes(&self) -> usize {
        self.adjacency.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.input.cols()
    }

    pub fn feature_dim(&self) -> usize {
        1 + self.input_dim() + 2 * self.nodes()
    }

    pub fn adjacency(&self) -> &SparseMatrix {
        &self.adjacency
    }

    pub fn input_coupling(&self) -> &SparseMatrix {
        &self.input
    }

    pub(crate) fn input_columns(&self) -> &[Vec<(usize, f64)>] {
        &self.input_columns
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn leak_rate(&self) -> f64 {
        self.leak_rate
    }

    /// `out = A r_prev + B u + C`.
    pub fn preactivation_into(&self, r_prev: &[f64], u: &[f64], out: &mut [f64]) {
        self.adjacency.mul_vec_into(r_prev, out);
        self.input.mul_vec_add(u, out);
        out.iter_mut().zip(&self.bias).for_each(|(o, c)| *o += c);
    }

    /// One reservoir update without allocation. `out` must not alias `r_prev`.
    pub fn step_into(&self, r_prev: &[f64], u: &[f64], out: &mut [f64]) {
        self.preactivation_into(r_prev, u, out);
        let a = self.leak_rate;
        if a == 1.0 {
            out.iter_mut().for_each(|x| *x = x.tanh());
        } else {
            out.iter_mut()
                .zip(r_prev)
                .for_each(|(x, r)| *x = (1.0 - a) * r + a * x.tanh());
        }
    }

    pub fn step(&self, r_prev: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        if r_prev.len() != self.nodes() || u.len() != self.input_dim() {
            return Err(Error::Dimension(format!(
                "step expects state {} and input {}, got {} and {}",
                self.nodes(),
                self.input_dim(),
                r_prev.len(),
                u.len()
            )));
        }
        if !r_prev.iter().chain(u).all(|v| v.is_finite()) {
            return Err(Error::NonFinite("reservoir step input".into()));
        }
        let mut out = vec![0.0; self.nodes()];
        self.step_into(r_prev, u, &mut out);
        Ok(out)
    }

    /// `[1; u; r; r²]`.
    pub fn feature(&self, r: &[f64], u: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.feature_dim()];
        write_feature(r, u, &mut s);
        s
    }

    /// Drive with `data` (rows are time samples, at least
    /// `t_sync + t_train + 1`), starting from the zero state, and collect the
    /// `t_train` features following the first `t_sync` updates.
    pub fn drive_open_loop(
        &self,
        data: &DenseMatrix,
        t_sync: usize,
        t_train: usize,
    ) -> Result<FeatureSeries> {
        self.drive_with_inputs(data, data, t_sync, t_train)
    }

    /// Like [`drive_open_loop`](Self::drive_open_loop) but feeding `inputs`
    /// to the reservoir while taking targets from `clean`.
    pub(crate) fn drive_with_inputs(
        &self,
        inputs: &DenseMatrix,
        clean: &DenseMatrix,
        t_sync: usize,
        t_train: usize,
    ) -> Result<FeatureSeries> {
        let needed = t_sync + t_train + 1;
        if clean.rows() < needed || inputs.rows() < t_sync + t_train {
            return Err(Error::SeriesTooShort {
                needed,
                available: clean.rows().min(inputs.rows() + 1),
            });
        }
        if t_train == 0 {
            return Err(Error::InvalidParameter("t_train must be >= 1".into()));
        }
        let m = self.input_dim();
        if inputs.cols() != m || clean.cols() != m {
            return Err(Error::Dimension(format!(
                "series has {} components, reservoir expects {m}",
                inputs.cols()
            )));
        }
        let n = self.nodes();
        let f = self.feature_dim();
        let mut features = DenseMatrix::zeros(f, t_train);
        let mut targets = DenseMatrix::zeros(m, t_train);
        let mut states = DenseMatrix::zeros(t_train + 1, n);
        let mut used_inputs = DenseMatrix::zeros(t_train, m);

        let mut r = vec![0.0; n];
        let mut next = vec![0.0; n];
        let mut s = vec![0.0; f];
        for t in 0..t_sync + t_train {
            let u = inputs.row(t);
            if t == t_sync {
                states.row_mut(0).copy_from_slice(&r);
            }
            self.step_into(&r, u, &mut next);
            std::mem::swap(&mut r, &mut next);
            if t >= t_sync {
                let j = t - t_sync;
                write_feature(&r, u, &mut s);
                features.set_column(j, &s);
                targets.set_column(j, clean.row(t + 1));
                states.row_mut(j + 1).copy_from_slice(&r);
                used_inputs.row_mut(j).copy_from_slice(u);
            }
        }
        if !features.is_finite() {
            return Err(Error::NonFinite(
                "reservoir features during open-loop driving".into(),
            ));
        }
        Ok(FeatureSeries {
            features,
            targets,
            states,
            inputs: used_inputs,
            t_sync,
        })
    }

    /// Closed-loop forecast.
    ///
    /// The state is reset to zero, the reservoir is driven with every row of
    /// `sync` (the last row is the true state at the prediction origin), and
    /// then each output `W s` is fed back as the next input. Returns up to
    /// `t_pred` outputs; the run stops early if any state or output entry
    /// becomes non-finite.
    pub fn predict_closed_loop(
        &self,
        w: &OutputWeights,
        sync: &DenseMatrix,
        t_pred: usize,
    ) -> Result<ClosedLoopRun> {
        let m = self.input_dim();
        if sync.rows() == 0 || sync.cols() != m {
            return Err(Error::Dimension(format!(
                "sync series {}x{} for input dimension {m}",
                sync.rows(),
                sync.cols()
            )));
        }
        if w.matrix().shape() != (m, self.feature_dim()) {
            return Err(Error::Dimension(format!(
                "output weights {:?}, expected ({m}, {})",
                w.matrix().shape(),
                self.feature_dim()
            )));
        }
        let n = self.nodes();
        let mut r = vec![0.0; n];
        let mut next = vec![0.0; n];
        for t in 0..sync.rows() {
            self.step_into(&r, sync.row(t), &mut next);
            std::mem::swap(&mut r, &mut next);
        }
        let mut s = vec![0.0; self.feature_dim()];
        write_feature(&r, sync.row(sync.rows() - 1), &mut s);

        let mut outputs = Vec::with_capacity(t_pred * m);
        let mut u = vec![0.0; m];
        let mut overflow = false;
        for n_step in 0..t_pred {
            w.matrix().matvec_into(&s, &mut u);
            if !u.iter().all(|v| v.is_finite()) {
                overflow = true;
                break;
            }
            outputs.extend_from_slice(&u);
            if n_step + 1 == t_pred {
                break;
            }
            self.step_into(&r, &u, &mut next);
            std::mem::swap(&mut r, &mut next);
            if !r.iter().all(|v| v.is_finite()) {
                overflow = true;
                break;
            }
            write_feature(&r, &u, &mut s);
        }
        let rows = outputs.len() / m;
        Ok(ClosedLoopRun {
            outputs: DenseMatrix::from_vec(rows, m, outputs)?,
            requested: t_pred,
            overflow,
        })
    }
}

pub(crate) fn write_feature(r: &[f64], u: &[f64], s: &mut [f64]) {
    let m = u.len();
    let n = r.len();
    s[0] = 1.0;
    s[1..1 + m].copy_from_slice(u);
    s[1 + m..1 + m + n].copy_from_slice(r);
    for (dst, x) in s[1 + m + n..].iter_mut().zip(r) {
        *dst = x * x;
    }
}

/// Features and bookkeeping collected during open-loop driving.
#[derive(Debug, Clone)]
pub struct FeatureSeries {
    /// `(1+M+2N) × T_train`; column `j` is `s_j`.
    pub features: DenseMatrix,
    /// `M × T_train`; column `j` is `v_j = u(T_sync + j + 1)`.
    pub targets: DenseMatrix,
    /// `(T_train + 1) × N`; row 0 is the state just before sample 0 and row
    /// `j + 1` is `r_j`.
    pub states: DenseMatrix,
    /// `T_train × M`; row `j` is the input `u_j` fed at sample `j`.
    pub inputs: DenseMatrix,
    pub t_sync: usize,
}

impl FeatureSeries {
    pub fn len(&self) -> usize {
        self.features.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn feature_dim(&self) -> usize {
        self.features.rows()
    }

    /// `r_{j}` for `j >= -1`, indexed as `state(j + 1)`.
    pub fn state_before(&self, j: usize) -> &[f64] {
        self.states.row(j)
    }

    pub fn state_after(&self, j: usize) -> &[f64] {
        self.states.row(j + 1)
    }

    pub fn input(&self, j: usize) -> &[f64] {
        self.inputs.row(j)
    }
}

/// Output of a closed-loop run.
#[derive(Debug, Clone)]
pub struct ClosedLoopRun {
    /// Rows are predicted states `u_out(T_init + n)`, `n = 1..`.
    pub outputs: DenseMatrix,
    pub requested: usize,
    /// True if a non-finite value stopped the run.
    pub overflow: bool,
}

//! Regularization matrices for the readout normal equations.
//!
//! Every matrix here is `(1+M+2N)`-square, symmetric and positive
//! semidefinite, laid out like the feature vector `[1; u; r; r²]`.
//!
//! The Jacobian and LMNT matrices are sums of `J Jᵀ` where `J` is the
//! sensitivity of a feature vector to an earlier input. Such a `J` has a zero
//! constant row, an identity input block only when the input is the current
//! one, an `N×M` reservoir block `D`, and a squared-state block
//! `diag(2 r_j) D`. The sums are therefore accumulated in that compressed
//! form: the reservoir-block covariance `P_j = Σ_k D_{jk} D_{jk}ᵀ` is carried
//! forward in time through the sparse state Jacobian
//! `G_j = α diag(h_j) A + (1-α) I`, one window per look-back depth, and is
//! expanded into the full layout once at the end.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SparseMatrix};
use crate::reservoir::{FeatureSeries, Reservoir};
use crate::rng::{substream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RegularizationKind {
    Tikhonov,
    Jacobian,
    Lmnt { k: usize },
    LmntReduced { k: usize, samples: usize },
    LmntMeanInput { k: usize },
}

impl RegularizationKind {
    pub fn code(&self) -> u8 {
        match self {
            RegularizationKind::Tikhonov => 1,
            RegularizationKind::Jacobian => 2,
            RegularizationKind::Lmnt { .. } => 3,
            RegularizationKind::LmntReduced { .. } => 4,
            RegularizationKind::LmntMeanInput { .. } => 5,
        }
    }
}

/// Which LMNT variant to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LmntMode {
    #[default]
    Full,
    Reduced {
        samples: usize,
    },
    MeanInput,
}

/// Regularization strengths and LMNT settings for one training run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct RegularizationConfig {
    #[serde(default)]
    pub beta_t: f64,
    #[serde(default)]
    pub beta_j: f64,
    #[serde(default)]
    pub beta_n: f64,
    #[serde(default)]
    pub beta_l: f64,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub lmnt_mode: LmntMode,
}

fn default_k() -> usize {
    4
}

impl RegularizationConfig {
    pub fn validate(&self, t_sync: usize) -> Result<()> {
        for (name, v) in [
            ("beta_t", self.beta_t),
            ("beta_j", self.beta_j),
            ("beta_n", self.beta_n),
            ("beta_l", self.beta_l),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} must be finite and >= 0"
                )));
            }
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("K must be >= 1".into()));
        }
        if self.beta_l > 0.0 && self.k > t_sync {
            return Err(Error::InvalidParameter(format!(
                "K = {} exceeds the synchronization length {t_sync}",
                self.k
            )));
        }
        if self.beta_n > 0.0 && (self.beta_j > 0.0 || self.beta_l > 0.0) {
            return Err(Error::InvalidParameter(
                "noise training combines only with Tikhonov regularization".into(),
            ));
        }
        Ok(())
    }

    /// Sum of all regularization strengths (used for tie-breaking).
    pub fn total(&self) -> f64 {
        self.beta_t + self.beta_j + self.beta_n + self.beta_l
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationMatrix {
    matrix: DenseMatrix,
    kind: RegularizationKind,
}

impl RegularizationMatrix {
    pub fn new(matrix: DenseMatrix, kind: RegularizationKind) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::Dimension(
                "regularization matrix must be square".into(),
            ));
        }
        Ok(Self { matrix, kind })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.matrix
    }

    pub fn kind(&self) -> RegularizationKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

/// `R_T = I`.
pub fn tikhonov_matrix(dim: usize) -> RegularizationMatrix {
    RegularizationMatrix {
        matrix: DenseMatrix::identity(dim),
        kind: RegularizationKind::Tikhonov,
    }
}

/// Linearization of one open-loop update around `(r_prev, u)`.
#[derive(Debug, Clone)]
struct StepLinearization {
    /// `sech²(A r_prev + B u + C)`.
    h: Vec<f64>,
    /// `2 r` with `r` the post-update state.
    two_r: Vec<f64>,
}

impl StepLinearization {
    fn new(res: &Reservoir, r_prev: &[f64], u: &[f64], r_post: &[f64]) -> Self {
        let mut h = vec![0.0; res.nodes()];
        res.preactivation_into(r_prev, u, &mut h);
        h.iter_mut().for_each(|x| {
            let c = x.cosh();
            *x = 1.0 / (c * c);
        });
        Self {
            h,
            two_r: r_post.iter().map(|r| 2.0 * r).collect(),
        }
    }

    fn at(series: &FeatureSeries, res: &Reservoir, j: usize) -> Self {
        Self::new(
            res,
            series.state_before(j),
            series.input(j),
            series.state_after(j),
        )
    }
}

/// `∇_u g_o(s_{j-1}, u_j)`: the `(1+M+2N) × M` sensitivity of the next
/// feature vector to the current input.
pub fn input_jacobian(res: &Reservoir, r_prev: &[f64], u: &[f64]) -> Result<DenseMatrix> {
    let r_post = res.step(r_prev, u)?;
    let lin = StepLinearization::new(res, r_prev, u, &r_post);
    let (m, n) = (res.input_dim(), res.nodes());
    let alpha = res.leak_rate();
    let mut j = DenseMatrix::zeros(res.feature_dim(), m);
    for c in 0..m {
        j[(1 + c, c)] = 1.0;
    }
    for (i, col, b) in res.input_coupling().triplets() {
        let d = alpha * lin.h[i] * b;
        j[(1 + m + i, col)] += d;
        j[(1 + m + n + i, col)] += lin.two_r[i] * d;
    }
    Ok(j)
}

/// `∇_s g_o(s_{j-1}, u_j)`: the `(1+M+2N)`-square sensitivity of the next
/// feature vector to the previous one. Only the reservoir-state columns are
/// nonzero.
pub fn state_jacobian(res: &Reservoir, r_prev: &[f64], u: &[f64]) -> Result<DenseMatrix> {
    let r_post = res.step(r_prev, u)?;
    let lin = StepLinearization::new(res, r_prev, u, &r_post);
    let (m, n) = (res.input_dim(), res.nodes());
    let alpha = res.leak_rate();
    let f = res.feature_dim();
    let mut g = DenseMatrix::zeros(f, f);
    for p in 0..n {
        let (cols, vals) = res.adjacency().row(p);
        for (&q, &a) in cols.iter().zip(vals) {
            g[(1 + m + p, 1 + m + q)] += alpha * lin.h[p] * a;
        }
        g[(1 + m + p, 1 + m + p)] += 1.0 - alpha;
        for q in 0..n {
            let v = g[(1 + m + p, 1 + m + q)];
            if v != 0.0 {
                g[(1 + m + n + p, 1 + m + q)] = lin.two_r[p] * v;
            }
        }
    }
    Ok(g)
}

/// Running sums of the compressed blocks of `Σ J Jᵀ`.
struct BlockSums {
    m: usize,
    n: usize,
    /// Number of terms whose input block is the identity.
    identity_terms: f64,
    /// `Σ D_jᵀ` (M×N) over current-input terms.
    ur: DenseMatrix,
    /// `Σ D_jᵀ diag(2r_j)`.
    uq: DenseMatrix,
    /// `Σ P_j`.
    rr: DenseMatrix,
    /// `Σ P_j diag(2r_j)`.
    rq: DenseMatrix,
    /// `Σ diag(2r_j) P_j diag(2r_j)`.
    qq: DenseMatrix,
}

impl BlockSums {
    fn new(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            identity_terms: 0.0,
            ur: DenseMatrix::zeros(m, n),
            uq: DenseMatrix::zeros(m, n),
            rr: DenseMatrix::zeros(n, n),
            rq: DenseMatrix::zeros(n, n),
            qq: DenseMatrix::zeros(n, n),
        }
    }

    /// Add the contribution of one time index with reservoir covariance `p`.
    fn add(&mut self, res: &Reservoir, lin: &StepLinearization, p: &DenseMatrix) {
        let alpha = res.leak_rate();
        self.identity_terms += 1.0;
        for (c, column) in res.input_columns().iter().enumerate() {
            for &(i, b) in column {
                let d = alpha * lin.h[i] * b;
                self.ur[(c, i)] += d;
                self.uq[(c, i)] += d * lin.two_r[i];
            }
        }
        let a = &lin.two_r;
        for i in 0..self.n {
            let ai = a[i];
            let prow = p.row(i);
            let range = i * self.n..(i + 1) * self.n;
            let rr = &mut self.rr.as_mut_slice()[range.clone()];
            rr.iter_mut().zip(prow).for_each(|(x, v)| *x += v);
            let rq = &mut self.rq.as_mut_slice()[range.clone()];
            let qq = &mut self.qq.as_mut_slice()[range];
            for ((x, y), (v, aj)) in rq.iter_mut().zip(qq.iter_mut()).zip(prow.iter().zip(a)) {
                let va = v * aj;
                *x += va;
                *y += ai * va;
            }
        }
    }

    fn merge(&mut self, other: &BlockSums) {
        self.identity_terms += other.identity_terms;
        for (dst, src) in [
            (&mut self.ur, &other.ur),
            (&mut self.uq, &other.uq),
            (&mut self.rr, &other.rr),
            (&mut self.rq, &other.rq),
            (&mut self.qq, &other.qq),
        ] {
            dst.add_scaled(1.0, src).expect("matching block shapes");
        }
    }

    /// Expand into the full `(1+M+2N)` layout, scaled by `scale`.
    fn assemble(&self, scale: f64) -> DenseMatrix {
        let (m, n) = (self.m, self.n);
        let f = 1 + m + 2 * n;
        let (u0, r0, q0) = (1, 1 + m, 1 + m + n);
        let mut out = DenseMatrix::zeros(f, f);
        for c in 0..m {
            out[(u0 + c, u0 + c)] = scale * self.identity_terms;
            for i in 0..n {
                let ur = scale * self.ur[(c, i)];
                let uq = scale * self.uq[(c, i)];
                out[(u0 + c, r0 + i)] = ur;
                out[(r0 + i, u0 + c)] = ur;
                out[(u0 + c, q0 + i)] = uq;
                out[(q0 + i, u0 + c)] = uq;
            }
        }
        for i in 0..n {
            for j in 0..n {
                out[(r0 + i, r0 + j)] = scale * self.rr[(i, j)];
                out[(r0 + i, q0 + j)] = scale * self.rq[(i, j)];
                out[(q0 + j, r0 + i)] = scale * self.rq[(i, j)];
                out[(q0 + i, q0 + j)] = scale * self.qq[(i, j)];
            }
        }
        out.symmetrize();
        out
    }
}

/// Scratch buffers for propagating reservoir covariances.
struct Propagator {
    tmp: DenseMatrix,
    tmp_t: DenseMatrix,
}

impl Propagator {
    fn new(n: usize) -> Self {
        Self {
            tmp: DenseMatrix::zeros(n, n),
            tmp_t: DenseMatrix::zeros(n, n),
        }
    }

    /// `out = G X Gᵀ` for symmetric `X`, `G = α diag(h) A + (1-α) I`.
    fn congruence(&mut self, res: &Reservoir, h: &[f64], x: &DenseMatrix, out: &mut DenseMatrix) {
        left_multiply(res.adjacency(), h, res.leak_rate(), x, &mut self.tmp);
        transpose_into(&self.tmp, &mut self.tmp_t);
        left_multiply(res.adjacency(), h, res.leak_rate(), &self.tmp_t, out);
    }
}

/// `out = (α diag(h) A + (1-α) I) · x`.
fn left_multiply(
    adj: &SparseMatrix,
    h: &[f64],
    alpha: f64,
    x: &DenseMatrix,
    out: &mut DenseMatrix,
) {
    let n = x.cols();
    let keep = 1.0 - alpha;
    for p in 0..adj.rows() {
        let dst = &mut out.as_mut_slice()[p * n..(p + 1) * n];
        if keep != 0.0 {
            dst.iter_mut()
                .zip(x.row(p))
                .for_each(|(d, v)| *d = keep * v);
        } else {
            dst.iter_mut().for_each(|d| *d = 0.0);
        }
        let (cols, vals) = adj.row(p);
        for (&q, &a) in cols.iter().zip(vals) {
            let w = alpha * h[p] * a;
            if w != 0.0 {
                dst.iter_mut().zip(x.row(q)).for_each(|(d, v)| *d += w * v);
            }
        }
    }
}

fn transpose_into(src: &DenseMatrix, dst: &mut DenseMatrix) {
    let n = src.rows();
    let s = src.as_slice();
    let d = dst.as_mut_slice();
    const B: usize = 32;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    d[j * n + i] = s[i * n + j];
                }
            }
        }
    }
}

/// `out += D Dᵀ` with `D = α diag(h) B`.
fn add_input_outer(res: &Reservoir, h: &[f64], out: &mut DenseMatrix) {
    let alpha = res.leak_rate();
    for column in res.input_columns() {
        for &(p, bp) in column {
            let dp = alpha * h[p] * bp;
            for &(q, bq) in column {
                out[(p, q)] += dp * alpha * h[q] * bq;
            }
        }
    }
}

fn set_input_outer(res: &Reservoir, h: &[f64], out: &mut DenseMatrix) {
    out.as_mut_slice().iter_mut().for_each(|v| *v = 0.0);
    add_input_outer(res, h, out);
}

fn check_series(series: &FeatureSeries, res: &Reservoir) -> Result<()> {
    if series.feature_dim() != res.feature_dim() || series.states.cols() != res.nodes() {
        return Err(Error::Dimension(format!(
            "series feature dimension {} does not match reservoir {}",
            series.feature_dim(),
            res.feature_dim()
        )));
    }
    Ok(())
}

/// `R_J = 1/(T-1) Σ_{j=1}^{T-1} ∇_u g_o(s_{j-1}, u_j) ∇_u g_o(s_{j-1}, u_j)ᵀ`.
pub fn jacobian_matrix(series: &FeatureSeries, res: &Reservoir) -> Result<RegularizationMatrix> {
    check_series(series, res)?;
    let t = series.len();
    if t < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            available: t,
        });
    }
    let n = res.nodes();
    let mut sums = BlockSums::new(res.input_dim(), n);
    let mut q = DenseMatrix::zeros(n, n);
    for j in 1..t {
        let lin = StepLinearization::at(series, res, j);
        set_input_outer(res, &lin.h, &mut q);
        sums.add(res, &lin, &q);
    }
    RegularizationMatrix::new(
        sums.assemble(1.0 / (t - 1) as f64),
        RegularizationKind::Jacobian,
    )
}

/// Time indices handled per independent work unit of the full LMNT sum.
/// Fixed, so the floating-point reduction order never depends on the thread
/// count.
const LMNT_CHUNK: usize = 2500;

/// Full LMNT matrix,
/// `R_L = 1/(T-K) Σ_{j=K}^{T-1} Σ_{k=j-K+1}^{j} ∇_u(j,k) ∇_u(j,k)ᵀ`,
/// with `∇_u(j,k)` the chained sensitivity of `s_j` to `u_k` along the
/// noiseless training trajectory.
pub fn lmnt_matrix(
    series: &FeatureSeries,
    res: &Reservoir,
    k: usize,
) -> Result<RegularizationMatrix> {
    check_series(series, res)?;
    if k == 0 {
        return Err(Error::InvalidParameter("K must be >= 1".into()));
    }
    if k > series.t_sync {
        return Err(Error::InvalidParameter(format!(
            "K = {k} exceeds the synchronization length {}",
            series.t_sync
        )));
    }
    let t = series.len();
    if t <= k {
        return Err(Error::SeriesTooShort {
            needed: k + 1,
            available: t,
        });
    }
    let ranges: Vec<(usize, usize)> = (k..t)
        .step_by(LMNT_CHUNK)
        .map(|start| (start, (start + LMNT_CHUNK).min(t)))
        .collect();

    let partial = |&(start, end): &(usize, usize)| lmnt_window_sums(series, res, k, start, end);
    #[cfg(feature = "parallel")]
    let parts: Vec<BlockSums> = {
        use rayon::prelude::*;
        ranges.par_iter().map(partial).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<BlockSums> = ranges.iter().map(partial).collect();

    let mut iter = parts.into_iter();
    let mut total = iter.next().expect("at least one chunk");
    for p in iter {
        total.merge(&p);
    }
    RegularizationMatrix::new(
        total.assemble(1.0 / (t - k) as f64),
        RegularizationKind::Lmnt { k },
    )
}

/// Sums for `j in start..end` using a sliding set of look-back windows.
fn lmnt_window_sums(
    series: &FeatureSeries,
    res: &Reservoir,
    k: usize,
    start: usize,
    end: usize,
) -> BlockSums {
    let n = res.nodes();
    let mut sums = BlockSums::new(res.input_dim(), n);
    let mut prop = Propagator::new(n);
    // windows[l] holds Σ over the most recent l+1 inputs at the current time
    let mut windows: Vec<DenseMatrix> = (0..k).map(|_| DenseMatrix::zeros(n, n)).collect();
    let mut fresh = DenseMatrix::zeros(n, n);
    let first = start + 1 - k;
    for time in first..end {
        let lin = StepLinearization::at(series, res, time);
        for level in (1..k).rev() {
            let (lower, upper) = windows.split_at_mut(level);
            prop.congruence(res, &lin.h, &lower[level - 1], &mut upper[0]);
            add_input_outer(res, &lin.h, &mut upper[0]);
        }
        set_input_outer(res, &lin.h, &mut fresh);
        std::mem::swap(&mut windows[0], &mut fresh);
        if time >= start {
            sums.add(res, &lin, &windows[k - 1]);
        }
    }
    sums
}

/// Reservoir covariance `Σ_{k=t-K+1}^{t} D_{tk} D_{tk}ᵀ` at a single time.
fn covariance_at(
    series: &FeatureSeries,
    res: &Reservoir,
    k: usize,
    time: usize,
    prop: &mut Propagator,
) -> DenseMatrix {
    let n = res.nodes();
    let mut x = DenseMatrix::zeros(n, n);
    let mut next = DenseMatrix::zeros(n, n);
    let first = time + 1 - k;
    set_input_outer(res, &StepLinearization::at(series, res, first).h, &mut x);
    for s in first + 1..=time {
        let lin = StepLinearization::at(series, res, s);
        prop.congruence(res, &lin.h, &x, &mut next);
        add_input_outer(res, &lin.h, &mut next);
        std::mem::swap(&mut x, &mut next);
    }
    x
}

/// Reduced-sample LMNT: the LMNT summand evaluated at `samples` uniformly
/// spaced times `K + floor(i·τ)`, `τ = (T-K)/samples`, averaged.
pub fn lmnt_matrix_reduced(
    series: &FeatureSeries,
    res: &Reservoir,
    k: usize,
    samples: usize,
) -> Result<RegularizationMatrix> {
    check_series(series, res)?;
    if k == 0 {
        return Err(Error::InvalidParameter("K must be >= 1".into()));
    }
    let t = series.len();
    if samples == 0 || samples + k > t {
        return Err(Error::InvalidParameter(format!(
            "reduced LMNT needs 1 <= T <= T_train - K = {}, got {samples}",
            t.saturating_sub(k)
        )));
    }
    let n = res.nodes();
    let mut sums = BlockSums::new(res.input_dim(), n);
    let mut prop = Propagator::new(n);
    let span = t - k;
    for i in 0..samples {
        // floor(i τ) computed exactly in integers
        let time = k + (i * span) / samples;
        let p = covariance_at(series, res, k, time, &mut prop);
        sums.add(res, &StepLinearization::at(series, res, time), &p);
    }
    RegularizationMatrix::new(
        sums.assemble(1.0 / samples as f64),
        RegularizationKind::LmntReduced { k, samples },
    )
}

/// Mean-input LMNT result; `warning` is set when the constant-input
/// synchronization had not settled.
#[derive(Debug, Clone)]
pub struct MeanInputLmnt {
    pub matrix: RegularizationMatrix,
    pub fixed_point: Vec<f64>,
    pub final_step_change: f64,
    pub warning: Option<String>,
}

/// Tolerance on `‖r_t - r_{t-1}‖` for the mean-input synchronized state.
pub const MEAN_INPUT_SETTLE_TOL: f64 = 1e-10;

/// Mean-input LMNT: `Σ_{k=1}^{K} ∇_{u,0}(K,k) ∇_{u,0}(K,k)ᵀ` with every
/// factor evaluated at the constant input `mean` and the reservoir state
/// reached after `sync_steps` updates with that input from the zero state.
pub fn lmnt_matrix_mean_input(
    res: &Reservoir,
    mean: &[f64],
    k: usize,
    sync_steps: usize,
) -> Result<MeanInputLmnt> {
    if mean.len() != res.input_dim() {
        return Err(Error::Dimension(format!(
            "mean has {} components, reservoir expects {}",
            mean.len(),
            res.input_dim()
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("K must be >= 1".into()));
    }
    let n = res.nodes();
    let mut r = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut change = f64::INFINITY;
    for _ in 0..sync_steps.max(1) {
        res.step_into(&r, mean, &mut next);
        change = crate::linalg::dist2(&r, &next);
        std::mem::swap(&mut r, &mut next);
    }
    let warning = (change > MEAN_INPUT_SETTLE_TOL).then(|| {
        format!("mean-input reservoir state not settled after {sync_steps} steps (last change {change:e})")
    });
    let r_post = res.step(&r, mean)?;
    let lin = StepLinearization::new(res, &r, mean, &r_post);
    let mut prop = Propagator::new(n);
    let mut x = DenseMatrix::zeros(n, n);
    let mut tmp = DenseMatrix::zeros(n, n);
    set_input_outer(res, &lin.h, &mut x);
    for _ in 1..k {
        prop.congruence(res, &lin.h, &x, &mut tmp);
        add_input_outer(res, &lin.h, &mut tmp);
        std::mem::swap(&mut x, &mut tmp);
    }
    let mut sums = BlockSums::new(res.input_dim(), n);
    sums.add(res, &lin, &x);
    Ok(MeanInputLmnt {
        matrix: RegularizationMatrix::new(
            sums.assemble(1.0),
            RegularizationKind::LmntMeanInput { k },
        )?,
        fixed_point: r,
        final_step_change: change,
        warning,
    })
}

/// Open-loop features with input noise `u_in = u + sqrt(β_N) γ`, `γ` i.i.d.
/// standard normal per component and step (synchronization steps included).
/// Targets stay noiseless.
pub fn noisy_features(
    res: &Reservoir,
    data: &DenseMatrix,
    beta_n: f64,
    noise_seed: u64,
    t_sync: usize,
    t_train: usize,
) -> Result<FeatureSeries> {
    if !(beta_n >= 0.0 && beta_n.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta_N = {beta_n} must be >= 0"
        )));
    }
    if beta_n == 0.0 {
        return res.drive_open_loop(data, t_sync, t_train);
    }
    let steps = (t_sync + t_train).min(data.rows());
    let noisy = noisy_inputs(data, steps, beta_n, noise_seed);
    res.drive_with_inputs(&noisy, data, t_sync, t_train)
}

/// First `steps` rows of `data` with scaled Gaussian noise added.
pub fn noisy_inputs(data: &DenseMatrix, steps: usize, beta_n: f64, noise_seed: u64) -> DenseMatrix {
    let mut rng = substream(noise_seed, Stream::TrainingNoise, &[]);
    let scale = beta_n.sqrt();
    DenseMatrix::from_fn(steps, data.cols(), |t, c| {
        let g: f64 = rng.sample(StandardNormal);
        data[(t, c)] + scale * g
    })
}

//! Kuramoto–Sivashinsky data generation.
//!
//! `∂y/∂t = -y ∂y/∂x - ∂²y/∂x² - ∂⁴y/∂x⁴` on a periodic domain of length `L`,
//! integrated pseudo-spectrally with fourth-order exponential time
//! differencing Runge–Kutta (ETDRK4). The φ-functions are evaluated with the
//! contour-integral average of Kassam and Trefethen.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Complex64, DenseMatrix, RealFft};
use crate::rng::{substream, Stream};

/// Points on the contour used for the φ-function averages.
const CONTOUR_POINTS: usize = 32;
/// Half-width of the uniform initial-condition distribution.
const IC_AMPLITUDE: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KsConfig {
    /// Domain length `L`.
    pub length: f64,
    pub grid_points: usize,
    pub dt: f64,
    /// Time integrated and discarded before recording.
    pub transient_time: f64,
}

impl Default for KsConfig {
    fn default() -> Self {
        Self {
            length: 22.0,
            grid_points: 64,
            dt: 0.25,
            transient_time: 500.0,
        }
    }
}

impl KsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "domain length {} must be > 0",
                self.length
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "time step {} must be > 0",
                self.dt
            )));
        }
        if self.grid_points < 4 || !self.grid_points.is_power_of_two() {
            return Err(Error::UnsupportedLength(self.grid_points));
        }
        if !(self.transient_time >= 0.0) {
            return Err(Error::InvalidParameter(
                "transient time must be >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn transient_steps(&self) -> usize {
        (self.transient_time / self.dt).round() as usize
    }

    /// Angular wavenumbers in FFT order with the Nyquist entry set to zero.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.grid_points;
        let base = 2.0 * PI / self.length;
        (0..n)
            .map(|j| {
                if j < n / 2 {
                    j as f64 * base
                } else if j == n / 2 {
                    0.0
                } else {
                    (j as f64 - n as f64) * base
                }
            })
            .collect()
    }
}

/// Per-wavenumber ETDRK4 coefficients for the linear operator `k² - k⁴`.
#[derive(Debug, Clone)]
pub struct Etdrk4Tables {
    pub e: Vec<f64>,
    pub e2: Vec<f64>,
    pub q: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub f3: Vec<f64>,
    /// Nonlinear prefactor `-i k / 2`.
    pub g: Vec<Complex64>,
}

impl Etdrk4Tables {
    pub fn new(cfg: &KsConfig) -> Result<Self> {
        cfg.validate()?;
        let h = cfg.dt;
        let k = cfg.wavenumbers();
        let roots: Vec<Complex64> = (1..=CONTOUR_POINTS)
            .map(|j| Complex64::from_polar(1.0, PI * (j as f64 - 0.5) / CONTOUR_POINTS as f64))
            .collect();
        let avg = |f: &dyn Fn(Complex64) -> Complex64, l: f64| -> f64 {
            let s: Complex64 = roots
                .iter()
                .map(|&r| f(Complex64::new(h * l, 0.0) + r))
                .sum();
            (s / CONTOUR_POINTS as f64).re
        };
        let mut t = Self {
            e: Vec::new(),
            e2: Vec::new(),
            q: Vec::new(),
            f1: Vec::new(),
            f2: Vec::new(),
            f3: Vec::new(),
            g: Vec::new(),
        };
        for &kk in &k {
            let l = kk * kk - kk.powi(4);
            t.e.push((h * l).exp());
            t.e2.push((h * l / 2.0).exp());
            t.q.push(h * avg(&|z| ((z / 2.0).exp() - 1.0) / z, l));
            t.f1.push(
                h * avg(
                    &|z| (-4.0 - z + z.exp() * (4.0 - 3.0 * z + z * z)) / z.powi(3),
                    l,
                ),
            );
            t.f2.push(h * avg(&|z| (2.0 + z + z.exp() * (z - 2.0)) / z.powi(3), l));
            t.f3.push(
                h * avg(
                    &|z| (-4.0 - 3.0 * z - z * z + z.exp() * (4.0 - z)) / z.powi(3),
                    l,
                ),
            );
            t.g.push(Complex64::new(0.0, -0.5 * kk));
        }
        let all = [&t.e, &t.e2, &t.q, &t.f1, &t.f2, &t.f3];
        if !all.iter().all(|v| v.iter().all(|x| x.is_finite())) {
            return Err(Error::NonFinite("ETDRK4 coefficients".into()));
        }
        Ok(t)
    }
}

/// ETDRK4 stepper with its FFT plan and scratch space.
#[derive(Debug, Clone)]
pub struct KsIntegrator {
    cfg: KsConfig,
    tables: Etdrk4Tables,
    fft: RealFft,
    nv: Vec<Complex64>,
    na: Vec<Complex64>,
    nb: Vec<Complex64>,
    nc: Vec<Complex64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl KsIntegrator {
    pub fn new(cfg: &KsConfig) -> Result<Self> {
        let tables = Etdrk4Tables::new(cfg)?;
        let n = cfg.grid_points;
        let z = vec![Complex64::new(0.0, 0.0); n];
        Ok(Self {
            cfg: cfg.clone(),
            tables,
            fft: RealFft::new(n)?,
            nv: z.clone(),
            na: z.clone(),
            nb: z.clone(),
            nc: z.clone(),
            a: z.clone(),
            b: z.clone(),
            c: z.clone(),
            work: z,
        })
    }

    pub fn config(&self) -> &KsConfig {
        &self.cfg
    }

    pub fn tables(&self) -> &Etdrk4Tables {
        &self.tables
    }

    /// `out = g · fft(real(ifft(v))²)`.
    fn nonlinear(
        fft: &RealFft,
        g: &[Complex64],
        work: &mut [Complex64],
        v: &[Complex64],
        out: &mut [Complex64],
    ) {
        work.copy_from_slice(v);
        fft.inverse_inplace(work);
        work.iter_mut()
            .for_each(|c| *c = Complex64::new(c.re * c.re, 0.0));
        fft.forward_inplace(work);
        for ((o, w), gk) in out.iter_mut().zip(work.iter()).zip(g) {
            *o = gk * w;
        }
    }

    /// One ETDRK4 step of the spectral state `v` (FFT of the real field).
    pub fn step_spectral(&mut self, v: &mut [Complex64]) -> Result<()> {
        let t = &self.tables;
        let n = v.len();
        assert_eq!(n, self.cfg.grid_points);
        Self::nonlinear(&self.fft, &t.g, &mut self.work, v, &mut self.nv);
        for i in 0..n {
            self.a[i] = t.e2[i] * v[i] + t.q[i] * self.nv[i];
        }
        Self::nonlinear(&self.fft, &t.g, &mut self.work, &self.a, &mut self.na);
        for i in 0..n {
            self.b[i] = t.e2[i] * v[i] + t.q[i] * self.na[i];
        }
        Self::nonlinear(&self.fft, &t.g, &mut self.work, &self.b, &mut self.nb);
        for i in 0..n {
            self.c[i] = t.e2[i] * self.a[i] + t.q[i] * (2.0 * self.nb[i] - self.nv[i]);
        }
        Self::nonlinear(&self.fft, &t.g, &mut self.work, &self.c, &mut self.nc);
        for i in 0..n {
            v[i] = t.e[i] * v[i]
                + self.nv[i] * t.f1[i]
                + 2.0 * (self.na[i] + self.nb[i]) * t.f2[i]
                + self.nc[i] * t.f3[i];
        }
        enforce_hermitian(v);
        if !v.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(Error::NonFinite("KS spectral state".into()));
        }
        Ok(())
    }

    /// One step of the physical field `y` in place.
    pub fn step_physical(&mut self, y: &mut [f64]) -> Result<()> {
        let mut v = vec![Complex64::new(0.0, 0.0); y.len()];
        self.fft.forward_into(y, &mut v);
        self.step_spectral(&mut v)?;
        self.fft.inverse_real_into(&v, y);
        Ok(())
    }

    pub fn to_spectral(&self, y: &[f64]) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); y.len()];
        self.fft.forward_into(y, &mut v);
        v
    }

    pub fn to_physical(&self, v: &[Complex64]) -> Vec<f64> {
        let mut y = vec![0.0; v.len()];
        self.fft.inverse_real_into(v, &mut y);
        y
    }

    /// Integrate `steps` steps from `y0`, returning `steps + 1` rows
    /// (including `y0`).
    pub fn trajectory(&mut self, y0: &[f64], steps: usize) -> Result<DenseMatrix> {
        let n = self.cfg.grid_points;
        if y0.len() != n {
            return Err(Error::Dimension(format!(
                "initial field has {} points, expected {n}",
                y0.len()
            )));
        }
        let mut out = DenseMatrix::zeros(steps + 1, n);
        out.row_mut(0).copy_from_slice(y0);
        let mut v = self.to_spectral(y0);
        let mut y = vec![0.0; n];
        for s in 1..=steps {
            self.step_spectral(&mut v)?;
            self.fft.inverse_real_into(&v, &mut y);
            out.row_mut(s).copy_from_slice(&y);
        }
        Ok(out)
    }
}

/// Project a spectrum onto the Hermitian (real-field) subspace. Complex
/// FFT round-off is not exactly Hermitian, and the linearly unstable long
/// waves would otherwise amplify the spurious imaginary field without bound.
pub fn enforce_hermitian(v: &mut [Complex64]) {
    let n = v.len();
    v[0].im = 0.0;
    if n > 1 {
        v[n / 2].im = 0.0;
    }
    for j in 1..n.div_ceil(2) {
        let avg = 0.5 * (v[j] + v[n - j].conj());
        v[j] = avg;
        v[n - j] = avg.conj();
    }
}

/// Random initial field: i.i.d. `U[-0.6, 0.6]` per grid point with the
/// spatial mean removed. The unresolved Nyquist mode is also removed (the
/// scheme leaves it undamped and unforced, so it would persist forever).
pub fn initial_condition(cfg: &KsConfig, seed: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    let n = cfg.grid_points;
    let mut rng = substream(seed, Stream::InitialCondition, &[]);
    let y: Vec<f64> = (0..n)
        .map(|_| rng.random_range(-IC_AMPLITUDE..=IC_AMPLITUDE))
        .collect();
    let fft = RealFft::new(n)?;
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    fft.forward_into(&y, &mut v);
    v[0] = Complex64::new(0.0, 0.0);
    v[n / 2] = Complex64::new(0.0, 0.0);
    let mut out = vec![0.0; n];
    fft.inverse_real_into(&v, &mut out);
    Ok(out)
}

/// Integrate from the seeded initial condition, discard the transient and
/// return `samples` consecutive states spaced `dt` apart.
pub fn simulate(cfg: &KsConfig, ic_seed: u64, samples: usize) -> Result<DenseMatrix> {
    let mut integ = KsIntegrator::new(cfg)?;
    let y0 = initial_condition(cfg, ic_seed)?;
    let mut v = integ.to_spectral(&y0);
    for _ in 0..cfg.transient_steps() {
        integ.step_spectral(&mut v)?;
    }
    let n = cfg.grid_points;
    let mut out = DenseMatrix::zeros(samples, n);
    let mut y = vec![0.0; n];
    for s in 0..samples {
        if s > 0 {
            integ.step_spectral(&mut v)?;
        }
        integ.fft.inverse_real_into(&v, &mut y);
        out.row_mut(s).copy_from_slice(&y);
    }
    Ok(out)
}

/// Per-component affine map `u = (y - shift) / scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationTransform {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl StandardizationTransform {
    pub fn new(shift: Vec<f64>, scale: Vec<f64>) -> Result<Self> {
        if shift.len() != scale.len() {
            return Err(Error::Dimension("shift and scale lengths differ".into()));
        }
        if !scale.iter().all(|s| *s > 0.0 && s.is_finite()) || !shift.iter().all(|s| s.is_finite())
        {
            return Err(Error::InvalidParameter(
                "scale entries must be finite and > 0".into(),
            ));
        }
        Ok(Self { shift, scale })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            shift: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    /// Per-component mean and population standard deviation of the rows.
    pub fn fit(data: &DenseMatrix) -> Result<Self> {
        let (t, m) = data.shape();
        if t == 0 {
            return Err(Error::SeriesTooShort {
                needed: 1,
                available: 0,
            });
        }
        let mut mean = vec![0.0; m];
        for row in 0..t {
            mean.iter_mut()
                .zip(data.row(row))
                .for_each(|(a, v)| *a += v);
        }
        mean.iter_mut().for_each(|a| *a /= t as f64);
        let mut var = vec![0.0; m];
        for row in 0..t {
            for ((acc, v), mu) in var.iter_mut().zip(data.row(row)).zip(&mean) {
                *acc += (v - mu) * (v - mu);
            }
        }
        let scale: Vec<f64> = var.iter().map(|v| (v / t as f64).sqrt()).collect();
        if scale.contains(&0.0) {
            return Err(Error::Degenerate("a component has zero variance".into()));
        }
        Self::new(mean, scale)
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn standardize_into(&self, y: &[f64], u: &mut [f64]) {
        for i in 0..y.len() {
            u[i] = (y[i] - self.shift[i]) / self.scale[i];
        }
    }

    pub fn destandardize_into(&self, u: &[f64], y: &mut [f64]) {
        for i in 0..u.len() {
            y[i] = u[i] * self.scale[i] + self.shift[i];
        }
    }

    pub fn standardize(&self, data: &DenseMatrix) -> DenseMatrix {
        let mut out = data.clone();
        for t in 0..data.rows() {
            self.standardize_into(data.row(t), out.row_mut(t));
        }
        out
    }

    pub fn destandardize(&self, data: &DenseMatrix) -> DenseMatrix {
        let mut out = data.clone();
        for t in 0..data.rows() {
            self.destandardize_into(data.row(t), out.row_mut(t));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataRole {
    Train,
    Test,
}

impl DataRole {
    pub fn code(self) -> u8 {
        match self {
            DataRole::Train => 0,
            DataRole::Test => 1,
        }
    }

    pub fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(DataRole::Train),
            1 => Ok(DataRole::Test),
            _ => Err(Error::Format(format!("unknown dataset role {c}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    pub config: KsConfig,
    /// Raw field samples, one row per time step.
    pub raw: DenseMatrix,
    pub standardized: DenseMatrix,
    pub transform: StandardizationTransform,
    pub ic_seed: u64,
    pub role: DataRole,
}

impl DataSet {
    /// Training data standardized with its own statistics.
    pub fn training(cfg: &KsConfig, ic_seed: u64, samples: usize) -> Result<Self> {
        let raw = simulate(cfg, ic_seed, samples)?;
        let transform = StandardizationTransform::fit(&raw)?;
        Ok(Self {
            config: cfg.clone(),
            standardized: transform.standardize(&raw),
            raw,
            transform,
            ic_seed,
            role: DataRole::Train,
        })
    }

    /// Test data standardized with the paired training transform.
    pub fn testing(
        cfg: &KsConfig,
        ic_seed: u64,
        samples: usize,
        transform: &StandardizationTransform,
    ) -> Result<Self> {
        let raw = simulate(cfg, ic_seed, samples)?;
        if transform.dim() != raw.cols() {
            return Err(Error::Dimension(format!(
                "transform dimension {} for {} grid points",
                transform.dim(),
                raw.cols()
            )));
        }
        Ok(Self {
            config: cfg.clone(),
            standardized: transform.standardize(&raw),
            raw,
            transform: transform.clone(),
            ic_seed,
            role: DataRole::Test,
        })
    }

    pub fn len(&self) -> usize {
        self.raw.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.rows() == 0
    }
}

/// One-step map `F` in standardized coordinates: de-standardize, advance
/// one `Δt`, re-standardize.
#[derive(Debug, Clone)]
pub struct TrueMap {
    integrator: KsIntegrator,
    transform: StandardizationTransform,
    y: Vec<f64>,
}

impl TrueMap {
    pub fn new(cfg: &KsConfig, transform: &StandardizationTransform) -> Result<Self> {
        if transform.dim() != cfg.grid_points {
            return Err(Error::Dimension("transform does not match the grid".into()));
        }
        Ok(Self {
            integrator: KsIntegrator::new(cfg)?,
            transform: transform.clone(),
            y: vec![0.0; cfg.grid_points],
        })
    }

    pub fn apply_into(&mut self, u: &[f64], out: &mut [f64]) -> Result<()> {
        self.transform.destandardize_into(u, &mut self.y);
        self.integrator.step_physical(&mut self.y)?;
        self.transform.standardize_into(&self.y, out);
        Ok(())
    }

    pub fn apply(&mut self, u: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; u.len()];
        self.apply_into(u, &mut out)?;
        Ok(out)
    }
}

/// A deterministic map advancing a state by one fixed time step.
pub trait TimeStepMap {
    fn dim(&self) -> usize;
    fn time_step(&self) -> f64;
    fn advance(&mut self, state: &mut [f64]) -> Result<()>;
}

impl TimeStepMap for KsIntegrator {
    fn dim(&self) -> usize {
        self.cfg.grid_points
    }

    fn time_step(&self) -> f64 {
        self.cfg.dt
    }

    fn advance(&mut self, state: &mut [f64]) -> Result<()> {
        self.step_physical(state)
    }
}

/// Settings for the Benettin two-trajectory estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenettinSettings {
    /// Time over which log growth is averaged.
    pub horizon: f64,
    pub renorm_interval: f64,
    /// Initial time whose growth is not counted, letting the perturbation
    /// align with the most unstable direction.
    pub alignment_time: f64,
    /// Perturbation size relative to the state norm.
    pub relative_perturbation: f64,
    pub seed: u64,
}

impl Default for BenettinSettings {
    fn default() -> Self {
        Self {
            horizon: 5000.0,
            renorm_interval: 1.0,
            alignment_time: 100.0,
            relative_perturbation: 1e-8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub exponent: f64,
    pub lyapunov_time: f64,
    pub renormalizations: usize,
}

/// Benettin estimate of the largest Lyapunov exponent of `map` started at
/// `x0`. The perturbation is zero-mean so it stays in the invariant
/// zero-mean subspace of KS fields.
pub fn benettin<M: TimeStepMap>(
    map: &mut M,
    x0: &[f64],
    settings: &BenettinSettings,
) -> Result<LyapunovEstimate> {
    let n = map.dim();
    if x0.len() != n {
        return Err(Error::Dimension(format!(
            "state has {} entries, map expects {n}",
            x0.len()
        )));
    }
    let dt = map.time_step();
    if !(settings.renorm_interval > 0.0 && settings.horizon > 0.0) {
        return Err(Error::InvalidParameter(
            "horizon and renormalization interval must be > 0".into(),
        ));
    }
    let per = ((settings.renorm_interval / dt).round() as usize).max(1);
    let interval = per as f64 * dt;
    let align = (settings.alignment_time / interval).round() as usize;
    let count = ((settings.horizon / interval).round() as usize).max(1);

    let mut rng = substream(settings.seed, Stream::LyapunovPerturbation, &[]);
    let mut delta: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    if n > 1 {
        let mean = delta.iter().sum::<f64>() / n as f64;
        delta.iter_mut().for_each(|d| *d -= mean);
    }
    let size = settings.relative_perturbation * crate::linalg::norm2(x0).max(1.0);
    let dn = crate::linalg::norm2(&delta);
    if dn == 0.0 {
        return Err(Error::Degenerate("zero perturbation".into()));
    }
    delta.iter_mut().for_each(|d| *d *= size / dn);

    let mut x = x0.to_vec();
    let mut xp: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
    let mut log_sum = 0.0;
    for round in 0..align + count {
        for _ in 0..per {
            map.advance(&mut x)?;
            map.advance(&mut xp)?;
        }
        let d = crate::linalg::dist2(&x, &xp);
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::Degenerate(format!("perturbation collapsed to {d}")));
        }
        if round >= align {
            log_sum += (d / size).ln();
        }
        for (p, a) in xp.iter_mut().zip(&x) {
            *p = a + (*p - a) * size / d;
        }
    }
    let exponent = log_sum / (count as f64 * interval);
    Ok(LyapunovEstimate {
        exponent,
        lyapunov_time: 1.0 / exponent,
        renormalizations: count,
    })
}

/// Largest Lyapunov exponent of the KS system, starting from a post-transient
/// state of the seeded initial condition.
pub fn largest_lyapunov(cfg: &KsConfig, settings: &BenettinSettings) -> Result<LyapunovEstimate> {
    let x0 = simulate(cfg, settings.seed, 1)?;
    let mut integ = KsIntegrator::new(cfg)?;
    benettin(&mut integ, x0.row(0), settings)
}

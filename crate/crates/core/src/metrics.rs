//! Forecast scoring: valid time, normalized map error, stability verdicts
//! and Welch power spectral densities.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ks::TrueMap;
use crate::linalg::{dist2, gemm, Complex64, DenseMatrix, RealFft};
use crate::rng::{substream, Stream};

/// Default valid-time threshold `ε_VT`.
pub const VALID_TIME_THRESHOLD: f64 = 0.2;
/// A prediction is stable when its mean map error is at most this.
pub const STABILITY_CUTOFF: f64 = 1.0;
/// Default Welch segment length.
pub const WELCH_WINDOW: usize = 8192;

/// Error scales: `Ē` (mean distance between distinct samples) and `Ē_map`
/// (mean persistence-forecast error).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNormalizers {
    pub e_bar: f64,
    pub e_map_bar: f64,
}

const PAIR_BLOCK: usize = 512;

/// Exact normalizers over all rows of `data` (rows are samples).
pub fn normalizers(data: &DenseMatrix) -> Result<ErrorNormalizers> {
    let t = data.rows();
    if t < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            available: t,
        });
    }
    let m = data.cols();
    let sq: Vec<f64> = (0..t)
        .map(|i| data.row(i).iter().map(|v| v * v).sum())
        .collect();
    let x = data.as_slice();
    let mut total = 0.0;
    let mut dots = DenseMatrix::zeros(0, 0);
    for i0 in (0..t).step_by(PAIR_BLOCK) {
        let bi = PAIR_BLOCK.min(t - i0);
        for j0 in (i0..t).step_by(PAIR_BLOCK) {
            let bj = PAIR_BLOCK.min(t - j0);
            if dots.shape() != (bi, bj) {
                dots = DenseMatrix::zeros(bi, bj);
            }
            gemm(
                1.0,
                (&x[i0 * m..], bi, m, m as isize, 1),
                (&x[j0 * m..], bj, 1, m as isize),
                0.0,
                &mut dots,
            );
            let mut block = 0.0;
            for a in 0..bi {
                let start = if i0 == j0 { a + 1 } else { 0 };
                let row = dots.row(a);
                for b in start..bj {
                    let d2 = sq[i0 + a] + sq[j0 + b] - 2.0 * row[b];
                    block += d2.max(0.0).sqrt();
                }
            }
            total += block;
        }
    }
    let pairs = t as f64 * (t as f64 - 1.0) / 2.0;
    finish(total / pairs, data)
}

/// Normalizers with `Ē` estimated from `pairs` random distinct pairs.
pub fn normalizers_subsampled(
    data: &DenseMatrix,
    pairs: usize,
    seed: u64,
) -> Result<ErrorNormalizers> {
    let t = data.rows();
    if t < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            available: t,
        });
    }
    if pairs == 0 {
        return Err(Error::InvalidParameter("need at least one pair".into()));
    }
    let mut rng = substream(seed, Stream::Custom(0xE8A2), &[]);
    let mut total = 0.0;
    for _ in 0..pairs {
        let j = rng.random_range(0..t);
        let mut k = rng.random_range(0..t - 1);
        if k >= j {
            k += 1;
        }
        total += dist2(data.row(j), data.row(k));
    }
    finish(total / pairs as f64, data)
}

fn finish(e_bar: f64, data: &DenseMatrix) -> Result<ErrorNormalizers> {
    let t = data.rows();
    let e_map_bar = (0..t - 1)
        .map(|j| dist2(data.row(j + 1), data.row(j)))
        .sum::<f64>()
        / (t - 1) as f64;
    if !(e_bar > 0.0) || !(e_map_bar > 0.0) {
        return Err(Error::Degenerate(format!(
            "error normalizers must be positive (Ē = {e_bar}, Ē_map = {e_map_bar})"
        )));
    }
    Ok(ErrorNormalizers { e_bar, e_map_bar })
}

/// Valid time measured from the prediction start.
///
/// Row `n-1` of `pred` and `truth` is prediction step `n`. Returns
/// `(n-1)·Δt` for the first `n` whose normalized error exceeds `threshold`,
/// or `T_pred·Δt` (with `T_pred = truth.rows()`) if it never does. Missing
/// or non-finite predicted rows count as exceeding.
pub fn valid_time(
    pred: &DenseMatrix,
    truth: &DenseMatrix,
    e_bar: f64,
    threshold: f64,
    dt: f64,
) -> f64 {
    valid_steps(pred, truth, e_bar, threshold) as f64 * dt
}

/// [`valid_time`] in steps.
pub fn valid_steps(pred: &DenseMatrix, truth: &DenseMatrix, e_bar: f64, threshold: f64) -> usize {
    let t_pred = truth.rows();
    for n in 0..t_pred {
        if n >= pred.rows() {
            return n;
        }
        let err = dist2(pred.row(n), truth.row(n)) / e_bar;
        if !(err <= threshold) {
            return n;
        }
    }
    t_pred
}

/// `ε_map` for every predicted step after the first:
/// `‖u(t) - F(u(t-Δt))‖ / Ē_map`. Returns `None` if the true map fails on
/// a predicted state (overflowed trajectory).
pub fn map_error_series(pred: &DenseMatrix, map: &mut TrueMap, e_map_bar: f64) -> Option<Vec<f64>> {
    let m = pred.cols();
    let mut next = vec![0.0; m];
    let mut out = Vec::with_capacity(pred.rows().saturating_sub(1));
    for n in 1..pred.rows() {
        map.apply_into(pred.row(n - 1), &mut next).ok()?;
        let e = dist2(pred.row(n), &next) / e_map_bar;
        if !e.is_finite() {
            return None;
        }
        out.push(e);
    }
    Some(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Stable,
    Unstable,
    UnstableOverflow,
}

impl Verdict {
    pub fn is_stable(self) -> bool {
        self == Verdict::Stable
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::UnstableOverflow => "unstable-overflow",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "stable" => Ok(Verdict::Stable),
            "unstable" => Ok(Verdict::Unstable),
            "unstable-overflow" => Ok(Verdict::UnstableOverflow),
            _ => Err(Error::Format(format!("unknown verdict {s:?}"))),
        }
    }
}

/// Stable iff `mean_map_error ≤ 1.0` and there was no overflow.
pub fn classify_stability(mean_map_error: f64, overflow: bool) -> Verdict {
    if overflow || mean_map_error.is_infinite() {
        Verdict::UnstableOverflow
    } else if mean_map_error <= STABILITY_CUTOFF {
        Verdict::Stable
    } else {
        Verdict::Unstable
    }
}

/// Scores of one closed-loop forecast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    /// Valid time in model time units.
    pub valid_time: f64,
    pub mean_map_error: f64,
    pub max_map_error: f64,
    pub verdict: Verdict,
    /// Steps actually produced before any overflow.
    pub steps: usize,
    #[serde(skip)]
    pub map_errors: Vec<f64>,
}

/// Score a prediction against the truth (`truth.rows() = T_pred`).
pub fn score_prediction(
    pred: &DenseMatrix,
    overflow: bool,
    truth: &DenseMatrix,
    map: &mut TrueMap,
    norms: &ErrorNormalizers,
    dt: f64,
) -> PredictionRecord {
    let vt = valid_time(pred, truth, norms.e_bar, VALID_TIME_THRESHOLD, dt);
    let series = if overflow {
        None
    } else {
        map_error_series(pred, map, norms.e_map_bar)
    };
    let (mean, max, map_errors) = match series {
        Some(s) if !s.is_empty() => {
            let mean = s.iter().sum::<f64>() / s.len() as f64;
            let max = s.iter().cloned().fold(0.0, f64::max);
            (mean, max, s)
        }
        Some(s) => (0.0, 0.0, s),
        None => (f64::INFINITY, f64::INFINITY, Vec::new()),
    };
    let overflowed = overflow || mean.is_infinite();
    PredictionRecord {
        valid_time: vt,
        mean_map_error: mean,
        max_map_error: max,
        verdict: classify_stability(mean, overflowed),
        steps: pred.rows(),
        map_errors,
    }
}

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    pub frequencies: Vec<f64>,
    pub power: Vec<f64>,
}

impl PsdEstimate {
    /// Pointwise mean of estimates on the same grid.
    pub fn mean(estimates: &[PsdEstimate]) -> Result<PsdEstimate> {
        let first = estimates
            .first()
            .ok_or_else(|| Error::InvalidParameter("no spectra to average".into()))?;
        let mut power = vec![0.0; first.power.len()];
        for e in estimates {
            if e.frequencies != first.frequencies {
                return Err(Error::Dimension(
                    "spectra on different frequency grids".into(),
                ));
            }
            power.iter_mut().zip(&e.power).for_each(|(a, p)| *a += p);
        }
        power.iter_mut().for_each(|p| *p /= estimates.len() as f64);
        Ok(PsdEstimate {
            frequencies: first.frequencies.clone(),
            power,
        })
    }
}

/// Welch estimate: symmetric Hann window, 50% overlap, no detrending,
/// averaged periodograms scaled as a one-sided density. Samples past the
/// last full segment are ignored.
pub fn welch_psd(series: &[f64], window_len: usize, dt: f64) -> Result<PsdEstimate> {
    if window_len < 2 {
        return Err(Error::InvalidParameter(format!(
            "Welch window of {window_len} samples"
        )));
    }
    if series.len() < window_len {
        return Err(Error::SeriesTooShort {
            needed: window_len,
            available: series.len(),
        });
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sample spacing {dt} must be > 0"
        )));
    }
    let fft = RealFft::new(window_len)?;
    let window: Vec<f64> = (0..window_len)
        .map(|i| {
            0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (window_len - 1) as f64).cos()
        })
        .collect();
    let w2: f64 = window.iter().map(|w| w * w).sum();
    let fs = 1.0 / dt;
    let step = window_len / 2;
    let segments = (series.len() - window_len) / step.max(1) + 1;
    let bins = window_len / 2 + 1;
    let mut power = vec![0.0; bins];
    let mut seg = vec![0.0; window_len];
    let mut spec = vec![Complex64::new(0.0, 0.0); window_len];
    for s in 0..segments {
        let start = s * step;
        for i in 0..window_len {
            seg[i] = series[start + i] * window[i];
        }
        fft.forward_into(&seg, &mut spec);
        for (k, p) in power.iter_mut().enumerate() {
            *p += spec[k].norm_sqr();
        }
    }
    let norm = 1.0 / (fs * w2 * segments as f64);
    for (k, p) in power.iter_mut().enumerate() {
        *p *= norm;
        if k != 0 && k != window_len / 2 {
            *p *= 2.0;
        }
    }
    let frequencies = (0..bins)
        .map(|k| k as f64 * fs / window_len as f64)
        .collect();
    Ok(PsdEstimate { frequencies, power })
}

/// Mean `|log10 P_a - log10 P_b|` over the bins (DC excluded) where the
/// reference `b` is at least `relative_floor` times its maximum.
pub fn mean_log_deviation(a: &PsdEstimate, b: &PsdEstimate, relative_floor: f64) -> Result<f64> {
    if a.frequencies != b.frequencies {
        return Err(Error::Dimension(
            "spectra on different frequency grids".into(),
        ));
    }
    let max = b.power.iter().cloned().fold(0.0, f64::max);
    let floor = relative_floor * max;
    let mut sum = 0.0;
    let mut count = 0usize;
    for k in 1..b.power.len() {
        if b.power[k] >= floor && b.power[k] > 0.0 {
            sum += (a.power[k].max(f64::MIN_POSITIVE).log10() - b.power[k].log10()).abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Degenerate(
            "no frequency bins above the floor".into(),
        ));
    }
    Ok(sum / count as f64)
}

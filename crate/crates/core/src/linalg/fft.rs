use std::sync::Arc;

pub use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Planned forward/inverse transform for real signals of a fixed
/// power-of-two length.
///
/// Convention: forward `X_k = Σ_n x_n e^{-2πikn/N}` (unnormalized), inverse
/// divides by `N`, so `inverse(forward(x)) = x`. The forward output is the
/// full length-`N` Hermitian spectrum.
#[derive(Clone)]
pub struct RealFft {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for RealFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RealFft").field("len", &self.len).finish()
    }
}

impl RealFft {
    pub fn new(len: usize) -> Result<Self> {
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::UnsupportedLength(len));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Forward transform of a real signal into `out` (length `N`).
    pub fn forward_into(&self, x: &[f64], out: &mut [Complex64]) {
        assert_eq!(x.len(), self.len);
        assert_eq!(out.len(), self.len);
        for (o, &v) in out.iter_mut().zip(x) {
            *o = Complex64::new(v, 0.0);
        }
        self.forward.process(out);
    }

    /// In-place forward transform of a complex buffer.
    pub fn forward_inplace(&self, buf: &mut [Complex64]) {
        self.forward.process(buf);
    }

    /// In-place inverse transform including the `1/N` factor.
    pub fn inverse_inplace(&self, buf: &mut [Complex64]) {
        self.inverse.process(buf);
        let s = 1.0 / self.len as f64;
        buf.iter_mut().for_each(|c| *c *= s);
    }

    /// Inverse transform keeping only the real part.
    pub fn inverse_real_into(&self, spectrum: &[Complex64], out: &mut [f64]) {
        let mut buf = spectrum.to_vec();
        self.inverse_inplace(&mut buf);
        for (o, c) in out.iter_mut().zip(&buf) {
            *o = c.re;
        }
    }
}

pub fn fft_real(x: &[f64]) -> Result<Vec<Complex64>> {
    let plan = RealFft::new(x.len())?;
    let mut out = vec![Complex64::new(0.0, 0.0); x.len()];
    plan.forward_into(x, &mut out);
    Ok(out)
}

pub fn ifft_real(spectrum: &[Complex64]) -> Result<Vec<f64>> {
    let plan = RealFft::new(spectrum.len())?;
    let mut out = vec![0.0; spectrum.len()];
    plan.inverse_real_into(spectrum, &mut out);
    Ok(out)
}

//! Linear-algebra kernels used by the rest of the crate.
//!
//! All arithmetic is `f64`. Dense matrices are row-major; sparse matrices are
//! compressed-row. Products go through `matrixmultiply`'s blocked GEMM.

mod dense;
mod fft;
mod solve;
mod sparse;
mod spectral;

pub use dense::{gemm, DenseMatrix};
pub use fft::{fft_real, ifft_real, Complex64, RealFft};
pub use solve::{lu_solve, solve_normal_equations, PIVOT_RELATIVE_THRESHOLD};
pub use sparse::{spmv, SparseMatrix};
pub use spectral::spectral_radius;

/// Euclidean norm.
pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Euclidean distance between two equal-length slices.
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

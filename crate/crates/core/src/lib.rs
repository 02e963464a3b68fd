//! Reservoir-computer forecasting of chaotic time series with noise-based
//! and linearized multi-noise (LMNT) regularization.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] – dense/sparse kernels, LU solves, spectral radius, FFT.
//! * [`reservoir`] – random echo-state network, open- and closed-loop driving.
//! * [`regularization`] – Tikhonov, Jacobian, LMNT (full, reduced, mean-input)
//!   matrices and noisy feature generation.
//! * [`training`] – regularized normal equations and the Gram cache.
//! * [`ks`] – Kuramoto–Sivashinsky data via ETDRK4, true one-step map,
//!   standardization and Benettin Lyapunov estimates.
//! * [`metrics`] – valid time, map error, stability verdicts, Welch PSD.
//! * [`harness`] – seeded ensembles, parameter sweeps, reports and the CLI.

pub mod error;
pub mod harness;
pub mod io;
pub mod ks;
pub mod linalg;
pub mod metrics;
pub mod regularization;
pub mod reservoir;
pub mod rng;
pub mod training;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, SparseMatrix};
pub use regularization::{RegularizationKind, RegularizationMatrix};
pub use reservoir::{FeatureSeries, Reservoir, ReservoirHyperparams};
pub use training::{GramCache, OutputWeights};

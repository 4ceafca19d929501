//! Bartlett and Welch power spectral density estimation for stationary vector
//! time series with unknown mean.
//!
//! The crate is split along the lines of the computation:
//!
//! - [`series`] and [`window`]: the data record, segmentation, window weights
//!   and the per-segment statistics (sample mean and windowed transform).
//! - [`estimators`]: the batch estimator, which centres every segment with the
//!   overall sample mean, and the online estimator, which centres each new
//!   segment with the running mean of the segments seen so far.
//! - [`bounds`]: closed-form evaluation of the non-asymptotic error, bias and
//!   high-probability bounds for L-mixing data.
//! - [`markov`]: a finite-state Markov chain test bed with exact oracles for the
//!   mean, autocovariance, spectral density and windowed expectation.
//!
//! Frequencies are dimensionless, in cycles per sample, on `[-1/2, 1/2]`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // negated comparisons reject NaN

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod linalg;
pub mod markov;
pub mod series;
pub mod window;

pub use error::{Error, Result};
pub use estimators::{batch_estimate, online_run, OnlineSnapshot, OnlineState, SpectralEstimate};
pub use series::{FrequencyGrid, Segment, SegmentationPlan, TimeSeries};
pub use window::{hann_vector, WindowKind, WindowSpec};

pub use nalgebra::{Complex, DMatrix, DVector};

/// Double precision complex scalar used throughout.
pub type C64 = Complex<f64>;
/// Dense complex matrix, one per frequency in an estimate.
pub type CMatrix = DMatrix<C64>;

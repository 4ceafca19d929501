//! Window weights `w_k(s)`, their sum `h(s)`, and the per-segment statistics
//! built from them.
//!
//! Both window kinds produce a unit vector for every frequency:
//!
//! ```text
//! Bartlett: w_k(s) = e^{-j 2 pi k s} / sqrt(M)
//! Welch:    w_k(s) = e^{-j 2 pi k s} v_k / ||v||_2
//! ```

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::series::Segment;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Bartlett,
    Welch,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WindowSpec {
    /// Rectangular taper scaled by `1/sqrt(M)`; valid for any `M`.
    Bartlett,
    /// Taper `v`, normalised by its Euclidean norm. Fixes `M = v.len()`.
    Welch { taper: Vec<f64>, norm: f64 },
}

impl WindowSpec {
    pub fn welch(taper: Vec<f64>) -> Result<Self> {
        if taper.is_empty() {
            return Err(Error::InvalidWindow("window vector is empty".into()));
        }
        if taper.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidWindow("window vector has non-finite entries".into()));
        }
        let norm = taper.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidWindow("window vector is identically zero".into()));
        }
        Ok(Self::Welch { taper, norm })
    }

    pub fn kind(&self) -> WindowKind {
        match self {
            Self::Bartlett => WindowKind::Bartlett,
            Self::Welch { .. } => WindowKind::Welch,
        }
    }

    pub fn taper(&self) -> Option<&[f64]> {
        match self {
            Self::Bartlett => None,
            Self::Welch { taper, .. } => Some(taper),
        }
    }

    pub(crate) fn validate(&self, m: usize) -> Result<()> {
        match self {
            Self::Welch { taper, .. } if taper.len() != m => Err(Error::InvalidWindow(format!(
                "window vector has length {}, segment length is {m}",
                taper.len()
            ))),
            _ => Ok(()),
        }
    }

    /// Real, frequency independent amplitude `|w_k|` of every tap.
    pub fn amplitudes(&self, m: usize) -> Result<Vec<f64>> {
        if m == 0 {
            return Err(Error::InvalidLength {
                len: 0,
                reason: "segment length must be positive",
            });
        }
        self.validate(m)?;
        Ok(match self {
            Self::Bartlett => vec![1.0 / (m as f64).sqrt(); m],
            Self::Welch { taper, norm } => taper.iter().map(|v| v / norm).collect(),
        })
    }

    /// Weights `w_k(s)`, `k = 0..M`.
    pub fn weights(&self, m: usize, s: f64) -> Result<Vec<C64>> {
        Ok(modulate(&self.amplitudes(m)?, s))
    }

    /// `h(s) = sum_k w_k(s)`.
    pub fn window_sum(&self, m: usize, s: f64) -> Result<C64> {
        Ok(self.weights(m, s)?.into_iter().sum())
    }
}

fn modulate(amplitudes: &[f64], s: f64) -> Vec<C64> {
    amplitudes
        .iter()
        .enumerate()
        .map(|(k, &a)| C64::from_polar(a, -2.0 * PI * k as f64 * s))
        .collect()
}

/// Symmetric Hann taper, `v_k = (1 - cos(2 pi k / (M - 1))) / 2`.
pub fn hann_vector(m: usize) -> Result<Vec<f64>> {
    if m < 2 {
        return Err(Error::InvalidLength {
            len: m,
            reason: "symmetric Hann window needs at least two points",
        });
    }
    let denom = (m - 1) as f64;
    Ok((0..m)
        .map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / denom).cos()))
        .collect())
}

/// Weights and their sum at one frequency, reused across segments.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyWeights {
    pub s: f64,
    pub weights: Vec<C64>,
    pub h: C64,
}

impl FrequencyWeights {
    pub fn new(spec: &WindowSpec, m: usize, s: f64) -> Result<Self> {
        let weights = spec.weights(m, s)?;
        let h = weights.iter().sum();
        Ok(Self { s, weights, h })
    }

    /// `y_hat(s) = sum_k w_k(s) y[iK + k]`.
    pub fn transform(&self, seg: &Segment<'_>) -> Vec<C64> {
        assert_eq!(seg.len(), self.weights.len(), "segment length does not match window");
        let mut out = vec![C64::new(0.0, 0.0); seg.dim()];
        for (w, row) in self.weights.iter().zip(seg.rows()) {
            for (acc, &y) in out.iter_mut().zip(row) {
                *acc += w * y;
            }
        }
        out
    }
}

/// Sample mean of the `M` samples in a segment.
pub fn segment_mean(seg: &Segment<'_>) -> Vec<f64> {
    let mut mean = vec![0.0; seg.dim()];
    for row in seg.rows() {
        for (acc, y) in mean.iter_mut().zip(row) {
            *acc += y;
        }
    }
    let scale = 1.0 / seg.len() as f64;
    mean.iter_mut().for_each(|v| *v *= scale);
    mean
}

/// Windowed transform of one segment at frequency `s`.
pub fn segment_transform(seg: &Segment<'_>, spec: &WindowSpec, s: f64) -> Result<Vec<C64>> {
    Ok(FrequencyWeights::new(spec, seg.len(), s)?.transform(seg))
}

//! Batch and online Bartlett/Welch estimators for data with unknown mean.
//!
//! Both estimators average rank-one terms `(y_hat_i(s) - h(s) m)(...)*` over
//! segments. They differ only in the centring vector `m`:
//!
//! - batch: `m` is the sample mean over all `k` segments (computed in a first
//!   pass, then the outer products are accumulated in a second pass);
//! - online: `m` is the running mean of segments `0..i`, *before* segment `i`
//!   is folded in, and both the mean and the spectral matrices are updated with
//!   step size `1/(i+1)`.
//!
//! For `k > 1` the two estimates are therefore different numbers.

use crate::error::{Error, Result};
use crate::linalg::add_outer;
use crate::series::{FrequencyGrid, Segment, SegmentationPlan, TimeSeries};
use crate::window::{segment_mean, FrequencyWeights};
use crate::{CMatrix, C64};

/// Per-frequency `n x n` spectral density matrices after `segments` segments.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEstimate {
    pub grid: FrequencyGrid,
    pub matrices: Vec<CMatrix>,
    pub segments: usize,
}

impl SpectralEstimate {
    pub fn at(&self, s: f64) -> Option<&CMatrix> {
        self.grid.position(s).map(|i| &self.matrices[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &CMatrix)> {
        self.grid.values().iter().copied().zip(&self.matrices)
    }
}

fn frequency_weights(plan: &SegmentationPlan, grid: &FrequencyGrid) -> Vec<FrequencyWeights> {
    grid.values()
        .iter()
        .map(|&s| {
            FrequencyWeights::new(plan.window(), plan.segment_len(), s)
                .expect("plan validates the window against its segment length")
        })
        .collect()
}

/// `y_hat(s) - h(s) m`.
fn centred_transform(weights: &FrequencyWeights, seg: &Segment<'_>, centre: &[f64]) -> Vec<C64> {
    let mut y = weights.transform(seg);
    for (yi, &mi) in y.iter_mut().zip(centre) {
        *yi -= weights.h * mi;
    }
    y
}

fn check_length(series: &TimeSeries, plan: &SegmentationPlan) -> Result<usize> {
    match plan.segment_count(series.len()) {
        0 => Err(Error::InsufficientData {
            samples: series.len(),
            segment_len: plan.segment_len(),
        }),
        k => Ok(k),
    }
}

/// Batch estimate over every complete segment of `series`.
///
/// Returns the estimate together with the sample mean `(1/k) sum_i y_bar_i`
/// used to centre it. Trailing samples that do not fill a segment are ignored.
pub fn batch_estimate(
    series: &TimeSeries,
    plan: &SegmentationPlan,
    grid: &FrequencyGrid,
) -> Result<(SpectralEstimate, Vec<f64>)> {
    let k = check_length(series, plan)?;
    let mut mean = vec![0.0; series.dim()];
    for seg in series.segments(plan) {
        for (acc, v) in mean.iter_mut().zip(segment_mean(&seg)) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= k as f64);
    let estimate = centred_average(series, plan, grid, &mean, k);
    Ok((estimate, mean))
}

/// Batch estimate centred with a known mean instead of the sample mean.
pub fn batch_estimate_known_mean(
    series: &TimeSeries,
    plan: &SegmentationPlan,
    grid: &FrequencyGrid,
    mean: &[f64],
) -> Result<SpectralEstimate> {
    let k = check_length(series, plan)?;
    if mean.len() != series.dim() {
        return Err(Error::DimensionMismatch {
            expected: series.dim(),
            found: mean.len(),
        });
    }
    Ok(centred_average(series, plan, grid, mean, k))
}

fn centred_average(
    series: &TimeSeries,
    plan: &SegmentationPlan,
    grid: &FrequencyGrid,
    centre: &[f64],
    k: usize,
) -> SpectralEstimate {
    let n = series.dim();
    let weights = frequency_weights(plan, grid);
    let scale = 1.0 / k as f64;
    let matrices = weights
        .iter()
        .map(|fw| {
            let mut acc = CMatrix::zeros(n, n);
            for seg in series.segments(plan) {
                add_outer(&mut acc, &centred_transform(fw, &seg, centre), scale);
            }
            acc
        })
        .collect();
    SpectralEstimate {
        grid: grid.clone(),
        matrices,
        segments: k,
    }
}

/// Recursive estimator state after `k` segments.
#[derive(Debug, Clone)]
pub struct OnlineState {
    plan: SegmentationPlan,
    grid: FrequencyGrid,
    weights: Vec<FrequencyWeights>,
    mean: Vec<f64>,
    estimates: Vec<CMatrix>,
    k: usize,
}

/// Immutable copy of an online state at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineSnapshot {
    pub k: usize,
    pub estimate: SpectralEstimate,
    pub mean: Vec<f64>,
}

impl OnlineState {
    /// Zero mean, zero matrices, no segments consumed.
    pub fn new(plan: SegmentationPlan, grid: FrequencyGrid, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let weights = frequency_weights(&plan, &grid);
        let estimates = vec![CMatrix::zeros(dim, dim); grid.len()];
        Ok(Self {
            plan,
            grid,
            weights,
            mean: vec![0.0; dim],
            estimates,
            k: 0,
        })
    }

    pub fn segments(&self) -> usize {
        self.k
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn estimates(&self) -> &[CMatrix] {
        &self.estimates
    }

    pub fn plan(&self) -> &SegmentationPlan {
        &self.plan
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn check_segment(&self, seg: &Segment<'_>) -> Result<()> {
        if seg.index() != self.k {
            return Err(Error::OutOfOrder {
                expected: self.k,
                got: seg.index(),
            });
        }
        if seg.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: seg.dim(),
            });
        }
        if seg.len() != self.plan.segment_len() {
            return Err(Error::InvalidLength {
                len: seg.len(),
                reason: "segment length differs from the plan",
            });
        }
        Ok(())
    }

    /// Fold in segment `k`.
    ///
    /// The spectral update is centred with the mean of segments `0..k`, i.e.
    /// the mean held *before* this call; the mean is updated afterwards.
    pub fn step(&mut self, seg: &Segment<'_>) -> Result<()> {
        self.check_segment(seg)?;
        let centre = self.mean.clone();
        self.update_spectra(seg, &centre);
        let alpha = self.alpha();
        for (mu, y) in self.mean.iter_mut().zip(segment_mean(seg)) {
            *mu += alpha * (y - *mu);
        }
        self.k += 1;
        Ok(())
    }

    /// Fold in segment `k`, centring with a known mean. The running mean is
    /// still updated so that [`OnlineState::mean`] stays meaningful.
    pub fn step_known_mean(&mut self, seg: &Segment<'_>, mean: &[f64]) -> Result<()> {
        self.check_segment(seg)?;
        if mean.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: mean.len(),
            });
        }
        self.update_spectra(seg, mean);
        let alpha = self.alpha();
        for (mu, y) in self.mean.iter_mut().zip(segment_mean(seg)) {
            *mu += alpha * (y - *mu);
        }
        self.k += 1;
        Ok(())
    }

    fn alpha(&self) -> f64 {
        1.0 / (self.k as f64 + 1.0)
    }

    fn update_spectra(&mut self, seg: &Segment<'_>, centre: &[f64]) {
        let alpha = self.alpha();
        let keep = C64::new(1.0 - alpha, 0.0);
        for (fw, phi) in self.weights.iter().zip(self.estimates.iter_mut()) {
            let delta = centred_transform(fw, seg, centre);
            *phi *= keep;
            add_outer(phi, &delta, alpha);
        }
    }

    pub fn snapshot(&self) -> OnlineSnapshot {
        OnlineSnapshot {
            k: self.k,
            estimate: SpectralEstimate {
                grid: self.grid.clone(),
                matrices: self.estimates.clone(),
                segments: self.k,
            },
            mean: self.mean.clone(),
        }
    }
}

/// Run the online estimator over `series`, recording a snapshot after each
/// checkpoint segment count. Stops after the last checkpoint.
pub fn online_run(
    series: &TimeSeries,
    plan: &SegmentationPlan,
    grid: &FrequencyGrid,
    checkpoints: &[usize],
) -> Result<Vec<OnlineSnapshot>> {
    if checkpoints.first() == Some(&0) || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::UnsortedCheckpoints);
    }
    let available = plan.segment_count(series.len());
    if let Some(&last) = checkpoints.last() {
        if last > available {
            return Err(Error::CheckpointOutOfRange {
                checkpoint: last,
                available,
            });
        }
    }
    let mut state = OnlineState::new(plan.clone(), grid.clone(), series.dim())?;
    let mut snapshots = Vec::with_capacity(checkpoints.len());
    let mut pending = checkpoints.iter().peekable();
    for seg in series.segments(plan) {
        if pending.peek().is_none() {
            break;
        }
        state.step(&seg)?;
        if pending.peek() == Some(&&state.segments()) {
            snapshots.push(state.snapshot());
            pending.next();
        }
    }
    Ok(snapshots)
}

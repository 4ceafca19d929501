//! Data record, segmentation plan and frequency grid.

use crate::error::{Error, Result};
use crate::window::WindowSpec;

/// A finite record of `len` real samples of dimension `dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    data: Vec<f64>,
    dim: usize,
}

impl TimeSeries {
    /// Build from a flat row-major buffer.
    pub fn from_flat(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if data.is_empty() {
            return Err(Error::EmptySeries);
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::RaggedSeries {
                index: data.len() / dim,
                expected: dim,
                found: data.len() % dim,
            });
        }
        Ok(Self { data, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::EmptySeries)?;
        let dim = first.as_ref().len();
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (index, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::RaggedSeries {
                    index,
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { data, dim })
    }

    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        Self::from_flat(values, 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of samples N.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn sample(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// First `len` samples, or an error when the record is shorter.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::InsufficientData {
                samples: self.len(),
                segment_len: len,
            });
        }
        Ok(Self {
            data: self.data[..len * self.dim].to_vec(),
            dim: self.dim,
        })
    }

    /// Segment `index` under `plan`: samples `index*K .. index*K + M`.
    pub fn segment(&self, plan: &SegmentationPlan, index: usize) -> Result<Segment<'_>> {
        let m = plan.segment_len();
        let start = index
            .checked_mul(plan.hop())
            .filter(|start| start + m <= self.len())
            .ok_or(Error::SegmentOutOfRange {
                index,
                max: plan.segment_count(self.len()).checked_sub(1),
            })?;
        Ok(Segment {
            index,
            dim: self.dim,
            samples: &self.data[start * self.dim..(start + m) * self.dim],
        })
    }

    /// Iterate over every complete segment, in order.
    pub fn segments<'a>(&'a self, plan: &'a SegmentationPlan) -> impl Iterator<Item = Segment<'a>> + 'a {
        (0..plan.segment_count(self.len())).map(move |i| {
            self.segment(plan, i)
                .expect("index below segment count is always valid")
        })
    }
}

/// `M` consecutive samples starting at `index * K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment<'a> {
    index: usize,
    dim: usize,
    samples: &'a [f64],
}

impl<'a> Segment<'a> {
    /// Wrap a flat row-major buffer of `len * dim` values as segment `index`.
    pub fn new(index: usize, samples: &'a [f64], dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if samples.is_empty() || !samples.len().is_multiple_of(dim) {
            return Err(Error::InvalidLength {
                len: samples.len(),
                reason: "segment buffer must hold a whole, nonzero number of samples",
            });
        }
        Ok(Self { index, dim, samples })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample(&self, k: usize) -> &'a [f64] {
        &self.samples[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &'a [f64]> {
        self.samples.chunks_exact(self.dim)
    }
}

/// Segment length `M`, hop `K` and window.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentationPlan {
    segment_len: usize,
    hop: usize,
    window: WindowSpec,
}

impl SegmentationPlan {
    pub fn new(segment_len: usize, hop: usize, window: WindowSpec) -> Result<Self> {
        if segment_len == 0 || hop == 0 || hop > segment_len {
            return Err(Error::InvalidPlan { segment_len, hop });
        }
        window.validate(segment_len)?;
        Ok(Self {
            segment_len,
            hop,
            window,
        })
    }

    /// Non-overlapping rectangular segments of length `m`.
    pub fn bartlett(m: usize) -> Result<Self> {
        Self::new(m, m, WindowSpec::Bartlett)
    }

    /// Overlapping Hann-tapered segments.
    pub fn welch_hann(m: usize, hop: usize) -> Result<Self> {
        Self::new(m, hop, WindowSpec::welch(crate::window::hann_vector(m)?)?)
    }

    pub fn segment_len(&self) -> usize {
        self.segment_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn window(&self) -> &WindowSpec {
        &self.window
    }

    /// `floor((N - M) / K) + 1`, or zero when `N < M`.
    pub fn segment_count(&self, samples: usize) -> usize {
        if samples < self.segment_len {
            0
        } else {
            (samples - self.segment_len) / self.hop + 1
        }
    }

    /// Samples consumed by `k` segments: `(k - 1) K + M`.
    pub fn samples_for(&self, segments: usize) -> usize {
        match segments {
            0 => 0,
            k => (k - 1) * self.hop + self.segment_len,
        }
    }

    /// Upper bound on how many segments share a single sample,
    /// `floor((M - 1) / K) + 1`.
    pub fn overlap_factor(&self) -> usize {
        (self.segment_len - 1) / self.hop + 1
    }
}

/// Sorted set of frequencies in `[-1/2, 1/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    values: Vec<f64>,
}

impl FrequencyGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidFrequency("grid is empty".into()));
        }
        for &s in &values {
            if !(-0.5..=0.5).contains(&s) {
                return Err(Error::InvalidFrequency(format!("{s} outside [-1/2, 1/2]")));
            }
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidFrequency("frequencies must be strictly increasing".into()));
        }
        Ok(Self { values })
    }

    pub fn single(s: f64) -> Result<Self> {
        Self::new(vec![s])
    }

    /// `count` evenly spaced points on `[lo, hi]`, endpoints included.
    pub fn uniform(lo: f64, hi: f64, count: usize) -> Result<Self> {
        match count {
            0 => Err(Error::InvalidFrequency("grid is empty".into())),
            1 => Self::new(vec![lo]),
            _ => {
                let step = (hi - lo) / (count - 1) as f64;
                Self::new((0..count).map(|i| lo + step * i as f64).collect())
            }
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn position(&self, s: f64) -> Option<usize> {
        self.values.iter().position(|&v| v == s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize) -> TimeSeries {
        TimeSeries::scalar((0..n).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn extracts_second_bartlett_segment() {
        let series = ramp(10);
        let plan = SegmentationPlan::bartlett(5).unwrap();
        let seg = series.segment(&plan, 1).unwrap();
        let values: Vec<f64> = seg.rows().map(|r| r[0]).collect();
        assert_eq!(values, vec![5.0, 6.0, 7.0, 8.0, 9.0]);
        assert_eq!(seg.index(), 1);
    }

    #[test]
    fn welch_segment_bounds() {
        let series = ramp(16);
        let plan = SegmentationPlan::welch_hann(16, 8).unwrap();
        let seg = series.segment(&plan, 0).unwrap();
        assert_eq!(seg.len(), 16);
        assert_eq!(seg.sample(15), &[15.0]);
        match series.segment(&plan, 1) {
            Err(Error::SegmentOutOfRange { index: 1, max: Some(0) }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn segment_count_matches_extraction() {
        for n in 1..40 {
            for m in 1..8 {
                for k in 1..=m {
                    let series = ramp(n);
                    let plan = SegmentationPlan::new(m, k, WindowSpec::Bartlett).unwrap();
                    let count = plan.segment_count(n);
                    for i in 0..count + 3 {
                        assert_eq!(series.segment(&plan, i).is_ok(), i < count, "n={n} m={m} k={k} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_hop_longer_than_segment() {
        assert_eq!(
            SegmentationPlan::new(4, 5, WindowSpec::Bartlett),
            Err(Error::InvalidPlan { segment_len: 4, hop: 5 })
        );
        assert!(SegmentationPlan::new(4, 0, WindowSpec::Bartlett).is_err());
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let rows: Vec<Vec<f64>> = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(matches!(
            TimeSeries::from_rows(&rows),
            Err(Error::RaggedSeries { index: 1, expected: 2, found: 1 })
        ));
        assert_eq!(TimeSeries::scalar(vec![]), Err(Error::EmptySeries));
    }

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::new(vec![-0.5, 0.0, 0.5]).is_ok());
        assert!(FrequencyGrid::new(vec![0.0, 0.0]).is_err());
        assert!(FrequencyGrid::new(vec![0.6]).is_err());
        assert!(FrequencyGrid::new(vec![]).is_err());
        let g = FrequencyGrid::uniform(-0.5, 0.5, 5).unwrap();
        assert_eq!(g.values(), &[-0.5, -0.25, 0.0, 0.25, 0.5]);
    }

    #[test]
    fn overlap_factor() {
        assert_eq!(SegmentationPlan::bartlett(5).unwrap().overlap_factor(), 1);
        assert_eq!(SegmentationPlan::welch_hann(16, 8).unwrap().overlap_factor(), 2);
        assert_eq!(SegmentationPlan::welch_hann(16, 3).unwrap().overlap_factor(), 6);
    }
}

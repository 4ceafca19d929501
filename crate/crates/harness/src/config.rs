//! Experiment configuration.
//!
//! A config file is flat TOML whose keys mirror [`ExperimentConfig`]; every
//! key is optional and unknown keys are rejected. CLI flags are merged on top
//! of the file before validation, so validation sees the final values and
//! reports every violated constraint at once.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use specden_core::bounds;
use specden_core::markov::MarkovModel;
use specden_core::{hann_vector, DMatrix, FrequencyGrid, SegmentationPlan, WindowSpec};

use crate::error::{HarnessError, Result};

pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_FREQS: [f64; 4] = [0.0, 0.125, 0.25, 0.375];
/// Doeblin coefficient used for the reference chain.
pub const REFERENCE_DELTA: f64 = 0.72;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bartlett,
    Welch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Batch,
    Online,
}

impl From<Algorithm> for bounds::Algorithm {
    fn from(a: Algorithm) -> Self {
        match a {
            Algorithm::Batch => bounds::Algorithm::Batch,
            Algorithm::Online => bounds::Algorithm::Online,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    Hann,
}

/// `g(x)`, either one value per state or one row per state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Observations {
    Scalar(Vec<f64>),
    Vector(Vec<Vec<f64>>),
}

impl Observations {
    fn rows(&self) -> Vec<Vec<f64>> {
        match self {
            Self::Scalar(v) => v.iter().map(|x| vec![*x]).collect(),
            Self::Vector(rows) => rows.clone(),
        }
    }
}

/// Raw, partially specified configuration as read from a file or flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub method: Option<Method>,
    pub algorithm: Option<Algorithm>,
    #[serde(rename = "M")]
    pub segment_len: Option<usize>,
    #[serde(rename = "K")]
    pub hop: Option<usize>,
    pub window: Option<Window>,
    /// Total samples per trial; defaults to [`DEFAULT_SAMPLES`] when
    /// simulating and to the whole file with external data.
    pub samples: Option<usize>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub q: Option<f64>,
    pub nu: Option<f64>,
    pub freqs: Option<Vec<f64>>,
    pub transition: Option<Vec<Vec<f64>>>,
    pub observations: Option<Observations>,
    pub delta: Option<f64>,
    /// External series (numeric CSV) used in place of simulation.
    pub data: Option<PathBuf>,
    pub checkpoints: Option<Vec<usize>>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Validation(vec![e.message().to_string()]))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(&text)
    }

    /// Fields set in `other` replace those in `self`.
    pub fn merge(mut self, other: ConfigFile) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(
            method, algorithm, segment_len, hop, window, samples, trials, seed, q, nu, freqs, transition,
            observations, delta, data, checkpoints, out
        );
        self
    }

    /// Fill in defaults and check every constraint.
    pub fn resolve(self) -> Result<ExperimentConfig> {
        let mut bad = Vec::new();
        let method = self.method.unwrap_or(Method::Bartlett);
        let algorithm = self.algorithm.unwrap_or(Algorithm::Online);
        let m = self.segment_len.unwrap_or(match method {
            Method::Bartlett => 5,
            Method::Welch => 16,
        });
        if m == 0 {
            bad.push("M must be at least 1".to_string());
        }
        let (hop, window) = match method {
            Method::Bartlett => {
                if let Some(k) = self.hop.filter(|&k| k != m) {
                    bad.push(format!("bartlett requires K = M, got K = {k}, M = {m}"));
                }
                if self.window == Some(Window::Hann) {
                    bad.push("bartlett requires a rectangular window".to_string());
                }
                (m, Window::Rectangular)
            }
            Method::Welch => (self.hop.unwrap_or((m / 2).max(1)), self.window.unwrap_or(Window::Hann)),
        };
        if hop == 0 || hop > m {
            bad.push(format!("K must satisfy 1 <= K <= M, got K = {hop}, M = {m}"));
        }
        if method == Method::Welch && window == Window::Hann && m < 3 {
            bad.push(format!("a Hann window needs M >= 3, got M = {m}"));
        }

        let trials = self.trials.unwrap_or(DEFAULT_TRIALS);
        if trials == 0 {
            bad.push("trials must be at least 1".to_string());
        }
        let q = self.q.unwrap_or(1.0);
        if !(q >= 1.0) || !q.is_finite() {
            bad.push(format!("q must be >= 1, got {q}"));
        }
        let nu = self.nu.unwrap_or(0.1);
        if !(nu > 0.0 && nu < 1.0) {
            bad.push(format!("nu must lie in (0, 1), got {nu}"));
        }

        let mut freqs = self.freqs.unwrap_or_else(|| DEFAULT_FREQS.to_vec());
        if freqs.is_empty() {
            bad.push("freqs must not be empty".to_string());
        }
        if let Some(s) = freqs.iter().find(|s| !(s.abs() <= 0.5)) {
            bad.push(format!("frequencies must lie in [-0.5, 0.5], got {s}"));
        }
        freqs.sort_by(f64::total_cmp);
        if freqs.windows(2).any(|w| w[0] == w[1]) {
            bad.push("freqs contains duplicates".to_string());
        }

        let custom_chain = self.transition.is_some() || self.observations.is_some();
        let transition = self.transition.unwrap_or_else(|| vec![vec![0.3, 0.7], vec![0.5, 0.5]]);
        let observations = self
            .observations
            .map(|o| o.rows())
            .unwrap_or_else(|| vec![vec![0.0], vec![1.0]]);
        let model = match build_model(&transition, &observations) {
            Ok(model) => {
                if !model.is_primitive() {
                    bad.push("transition matrix must be irreducible and aperiodic".to_string());
                }
                Some(model)
            }
            Err(msg) => {
                bad.push(msg);
                None
            }
        };
        let delta = match (self.delta, &model) {
            (Some(d), _) => d,
            (None, _) if !custom_chain => REFERENCE_DELTA,
            (None, Some(model)) => model.doeblin_coefficient(),
            (None, None) => f64::NAN,
        };
        if model.is_some() && !(delta > 0.0 && delta <= 1.0) {
            bad.push(format!(
                "delta must lie in (0, 1], got {delta}; set it explicitly when the chain's one-step Doeblin coefficient is zero"
            ));
        }

        let samples = match (self.samples, &self.data) {
            (Some(n), _) => Some(n),
            (None, None) => Some(DEFAULT_SAMPLES),
            (None, Some(_)) => None,
        };
        if let Some(n) = samples {
            if n < m {
                bad.push(format!("samples must be at least M = {m}, got {n}"));
            }
        }
        if self.data.is_some() && trials != 1 {
            bad.push(format!("external data gives a single trial, got trials = {trials}"));
        }

        let checkpoints = self.checkpoints.map(|mut c| {
            c.sort_unstable();
            c.dedup();
            c
        });
        if let Some(c) = &checkpoints {
            if c.is_empty() {
                bad.push("checkpoints must not be empty".to_string());
            }
            if c.first() == Some(&0) {
                bad.push("checkpoints must be positive".to_string());
            }
            if let (Some(n), Some(&last), true) = (samples, c.last(), hop >= 1 && hop <= m && m >= 1) {
                let k_max = (n - m) / hop + 1;
                if n >= m && last > k_max {
                    bad.push(format!("checkpoint {last} exceeds the {k_max} segments available"));
                }
            }
        }

        if !bad.is_empty() {
            return Err(HarnessError::Validation(bad));
        }
        Ok(ExperimentConfig {
            method,
            algorithm,
            segment_len: m,
            hop,
            window,
            samples,
            trials,
            seed: self.seed.unwrap_or(0),
            q,
            nu,
            freqs,
            transition,
            observations,
            delta,
            data: self.data,
            checkpoints,
            out: self.out.unwrap_or_else(|| PathBuf::from("errors.csv")),
        })
    }
}

fn build_model(transition: &[Vec<f64>], observations: &[Vec<f64>]) -> std::result::Result<MarkovModel, String> {
    let n = transition.len();
    if n == 0 || transition.iter().any(|r| r.len() != n) {
        return Err("transition must be a nonempty square matrix".to_string());
    }
    let dim = observations.first().map_or(0, Vec::len);
    if observations.len() != n || dim == 0 || observations.iter().any(|r| r.len() != dim) {
        return Err(format!("observations must give one value (or one equal-length row) per state, {n} states"));
    }
    let p = DMatrix::from_fn(n, n, |i, j| transition[i][j]);
    let g = DMatrix::from_fn(n, dim, |i, j| observations[i][j]);
    MarkovModel::new(p, g).map_err(|e| e.to_string())
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub method: Method,
    pub algorithm: Algorithm,
    #[serde(rename = "M")]
    pub segment_len: usize,
    #[serde(rename = "K")]
    pub hop: usize,
    pub window: Window,
    pub samples: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub q: f64,
    pub nu: f64,
    pub freqs: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
    pub observations: Vec<Vec<f64>>,
    pub delta: f64,
    pub data: Option<PathBuf>,
    pub checkpoints: Option<Vec<usize>>,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn plan(&self) -> Result<SegmentationPlan> {
        let window = match self.window {
            Window::Rectangular if self.method == Method::Bartlett => WindowSpec::Bartlett,
            Window::Rectangular => WindowSpec::welch(vec![1.0; self.segment_len])?,
            Window::Hann => WindowSpec::welch(hann_vector(self.segment_len)?)?,
        };
        Ok(SegmentationPlan::new(self.segment_len, self.hop, window)?)
    }

    pub fn grid(&self) -> Result<FrequencyGrid> {
        Ok(FrequencyGrid::new(self.freqs.clone())?)
    }

    pub fn model(&self) -> Result<MarkovModel> {
        build_model(&self.transition, &self.observations).map_err(|e| HarnessError::Validation(vec![e]))
    }

    /// Explicit checkpoints, or powers of two up to `k_max` followed by
    /// `k_max` itself.
    pub fn checkpoints_for(&self, k_max: usize) -> Result<Vec<usize>> {
        match &self.checkpoints {
            Some(c) => {
                if let Some(&last) = c.last().filter(|&&l| l > k_max) {
                    return Err(specden_core::Error::CheckpointOutOfRange {
                        checkpoint: last,
                        available: k_max,
                    }
                    .into());
                }
                Ok(c.clone())
            }
            None => {
                let mut ks: Vec<usize> = std::iter::successors(Some(1usize), |k| k.checked_mul(2))
                    .take_while(|&k| k <= k_max)
                    .collect();
                if ks.last() != Some(&k_max) {
                    ks.push(k_max);
                }
                Ok(ks)
            }
        }
    }

    pub fn meta_path(&self) -> PathBuf {
        meta_path(&self.out)
    }
}

/// `<out>.meta`.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_reference_run() {
        let cfg = ConfigFile::default().resolve().unwrap();
        assert_eq!((cfg.method, cfg.algorithm, cfg.segment_len, cfg.hop), (Method::Bartlett, Algorithm::Online, 5, 5));
        assert_eq!(cfg.samples, Some(DEFAULT_SAMPLES));
        assert_eq!(cfg.delta, REFERENCE_DELTA);
        assert_eq!(cfg.freqs, DEFAULT_FREQS);
        let ks = cfg.checkpoints_for(200_000).unwrap();
        assert_eq!(ks.first(), Some(&1));
        assert_eq!(ks[ks.len() - 2..], [131_072, 200_000]);
    }

    #[test]
    fn welch_defaults_to_hann_half_overlap() {
        let cfg = ConfigFile::parse("method = \"welch\"\nM = 16").unwrap().resolve().unwrap();
        assert_eq!((cfg.hop, cfg.window), (8, Window::Hann));
        assert!(cfg.plan().unwrap().window().taper().is_some());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ConfigFile::parse("M = 5\nwindow_len = 3").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("window_len"));
    }

    #[test]
    fn every_violation_is_reported() {
        let raw = ConfigFile::parse(
            "method = \"bartlett\"\nM = 5\nK = 2\nwindow = \"hann\"\ntrials = 0\nnu = 1.5\nfreqs = [0.7]",
        )
        .unwrap();
        let HarnessError::Validation(msgs) = raw.resolve().unwrap_err() else {
            panic!("expected validation error");
        };
        assert_eq!(msgs.len(), 5, "{msgs:?}");
    }

    #[test]
    fn custom_chain_takes_column_minimum_delta() {
        let raw = ConfigFile::parse("transition = [[0.5, 0.5], [0.2, 0.8]]\nobservations = [-1.0, 1.0]").unwrap();
        let cfg = raw.resolve().unwrap();
        assert!((cfg.delta - 0.7).abs() < 1e-15);

        let raw = ConfigFile::parse("transition = [[0.0, 1.0], [1.0, 0.0]]\nobservations = [0.0, 1.0]").unwrap();
        let HarnessError::Validation(msgs) = raw.resolve().unwrap_err() else {
            panic!("expected validation error");
        };
        assert_eq!(msgs.len(), 2, "{msgs:?}");
    }

    #[test]
    fn vector_observations_parse() {
        let raw = ConfigFile::parse(
            "transition = [[0.2, 0.8], [0.6, 0.4]]\nobservations = [[1.0, 0.0], [0.0, 1.0]]\ndelta = 0.4",
        )
        .unwrap();
        let cfg = raw.resolve().unwrap();
        assert_eq!(cfg.model().unwrap().dim(), 2);
    }

    #[test]
    fn merge_prefers_overrides() {
        let base = ConfigFile::parse("M = 5\ntrials = 3").unwrap();
        let over = ConfigFile {
            trials: Some(7),
            ..Default::default()
        };
        let merged = base.merge(over);
        assert_eq!((merged.segment_len, merged.trials), (Some(5), Some(7)));
    }

    #[test]
    fn explicit_checkpoints_must_fit() {
        let raw = ConfigFile::parse("samples = 50\ncheckpoints = [4, 11]").unwrap();
        assert!(raw.resolve().is_err());
        let raw = ConfigFile::parse("samples = 50\ncheckpoints = [10, 4]").unwrap();
        assert_eq!(raw.resolve().unwrap().checkpoints, Some(vec![4, 10]));
    }

    #[test]
    fn meta_path_appends_suffix() {
        assert_eq!(meta_path(Path::new("out/run.csv")), PathBuf::from("out/run.csv.meta"));
    }
}

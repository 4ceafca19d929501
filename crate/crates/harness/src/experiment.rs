//! Trial runner: simulate (or load), estimate at every checkpoint, and score
//! each estimate against the windowed expectation of the chain.

use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use specden_core::bounds::{BoundReport, MarkovMixing};
use specden_core::estimators::{batch_estimate, online_run};
use specden_core::linalg::frobenius_norm;
use specden_core::markov::{trial_rng, GroundTruth, Simulator, RNG_NAME};
use specden_core::{CMatrix, FrequencyGrid, SegmentationPlan, TimeSeries};

use crate::config::{Algorithm, ExperimentConfig, DEFAULT_SAMPLES};
use crate::error::Result;
use crate::io::{emit_csv, load_series, write_metadata};

/// One CSV row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub trial: usize,
    pub k: usize,
    pub s: f64,
    /// `||Phi_hat_k(s) - Phi_bar(s)||_F`.
    pub empirical_error: f64,
    pub expected_bound: f64,
    pub highprob_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constants {
    pub c1q: f64,
    pub c2q: f64,
    pub cq: f64,
    pub bq: f64,
    pub batch_coefficient: f64,
    pub online_tail: f64,
    pub c1_2q: f64,
    pub c2_2q: f64,
    pub c_2q: f64,
    pub overlap_factor: f64,
    pub bias_bound: Option<f64>,
}

/// Leading factors at one `q`, kept to show how the rate `r` was chosen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSample {
    pub q: f64,
    pub batch_coefficient: f64,
    pub online_leading: f64,
    pub online_tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    /// Smallest integer `r` with factor(q) <= factor(1) q^r on the samples.
    pub r: u32,
    pub batch_r: u32,
    pub online_r: u32,
    pub samples: Vec<RateSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub version: String,
    pub config: ExperimentConfig,
    pub rng: String,
    pub hann_convention: String,
    pub online_update: String,
    pub delta: f64,
    /// `sum_j min_i P(i, j)` for the configured chain, for comparison with
    /// `delta`.
    pub doeblin_column_minimum: f64,
    pub g_max: f64,
    pub constants: Constants,
    pub rate: RateFit,
    pub checkpoints: Vec<usize>,
    pub samples_requested: Option<usize>,
    pub samples_used: usize,
    pub segments: usize,
    pub generated_at_unix: u64,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub records: Vec<ErrorRecord>,
    pub metadata: Metadata,
}

pub fn version_string() -> String {
    format!("specden v{}", env!("CARGO_PKG_VERSION"))
}

fn estimates_at(
    series: &TimeSeries,
    plan: &SegmentationPlan,
    grid: &FrequencyGrid,
    algorithm: Algorithm,
    checkpoints: &[usize],
) -> Result<Vec<Vec<CMatrix>>> {
    match algorithm {
        Algorithm::Online => Ok(online_run(series, plan, grid, checkpoints)?
            .into_iter()
            .map(|snap| snap.estimate.matrices)
            .collect()),
        Algorithm::Batch => checkpoints
            .iter()
            .map(|&k| {
                let prefix = series.truncated(plan.samples_for(k))?;
                Ok(batch_estimate(&prefix, plan, grid)?.0.matrices)
            })
            .collect(),
    }
}

fn rate_fit(mix: &MarkovMixing, plan: &SegmentationPlan, report: &BoundReport, algorithm: Algorithm) -> Result<RateFit> {
    let samples = (1..=8)
        .map(|q| {
            let r = BoundReport::evaluate(mix, q as f64, plan)?;
            Ok(RateSample {
                q: q as f64,
                batch_coefficient: r.batch_coefficient,
                online_leading: r.bq,
                online_tail: r.online_tail,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateFit {
        r: report.rate(algorithm.into()),
        batch_r: report.batch_rate,
        online_r: report.online_rate,
        samples,
    })
}

/// Run every trial of `config`. Records come back ordered by
/// `(trial, k, s)` whatever order the worker pool finishes in.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Experiment> {
    let plan = config.plan()?;
    let grid = config.grid()?;
    let model = config.model()?;
    let truth = GroundTruth::new(&model)?;
    let mix = MarkovMixing::new(model.g_max(), config.delta)?;
    let report = BoundReport::evaluate(&mix, config.q, &plan)?;
    let alg = config.algorithm.into();

    let external = config.data.as_deref().map(load_series).transpose()?;
    if let Some(series) = &external {
        if series.dim() != model.dim() {
            return Err(specden_core::Error::DimensionMismatch {
                expected: model.dim(),
                found: series.dim(),
            }
            .into());
        }
    }
    let available = match (&external, config.samples) {
        (Some(series), Some(n)) if n > series.len() => {
            return Err(specden_core::Error::InsufficientData {
                samples: series.len(),
                segment_len: n,
            }
            .into())
        }
        (Some(series), None) => series.len(),
        (_, n) => n.unwrap_or(DEFAULT_SAMPLES),
    };
    let k_max = plan.segment_count(available);
    if k_max == 0 {
        return Err(specden_core::Error::InsufficientData {
            samples: available,
            segment_len: plan.segment_len(),
        }
        .into());
    }
    let checkpoints = config.checkpoints_for(k_max)?;
    let k_last = *checkpoints.last().expect("checkpoints are nonempty");
    let used = plan.samples_for(k_last);

    let targets = grid
        .values()
        .iter()
        .map(|&s| truth.windowed_expectation(&plan, s))
        .collect::<specden_core::Result<Vec<_>>>()?;
    let bounds = checkpoints
        .iter()
        .map(|&k| Ok((report.expected_bound(alg, k), report.highprob_threshold(alg, k, config.nu)?)))
        .collect::<Result<Vec<_>>>()?;

    let simulator = Simulator::new(&model)?;
    let per_trial = (0..config.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<ErrorRecord>> {
            let series = match &external {
                Some(series) => series.truncated(used)?,
                None => simulator.run(used, &mut trial_rng(config.seed, trial as u64))?,
            };
            let estimates = estimates_at(&series, &plan, &grid, config.algorithm, &checkpoints)?;
            let mut out = Vec::with_capacity(checkpoints.len() * targets.len());
            for ((&k, mats), &(expected, threshold)) in checkpoints.iter().zip(&estimates).zip(&bounds) {
                for ((&s, est), target) in grid.values().iter().zip(mats).zip(&targets) {
                    out.push(ErrorRecord {
                        trial,
                        k,
                        s,
                        empirical_error: frobenius_norm(&(est - target)),
                        expected_bound: expected,
                        highprob_threshold: threshold,
                    });
                }
            }
            Ok(out)
        })
        .collect::<Vec<_>>();
    let mut records = Vec::with_capacity(config.trials * checkpoints.len() * targets.len());
    for trial in per_trial {
        records.extend(trial?);
    }

    let metadata = Metadata {
        version: version_string(),
        config: config.clone(),
        rng: RNG_NAME.to_string(),
        hann_convention: "symmetric, v_k = 0.5 (1 - cos(2 pi k / (M - 1)))".to_string(),
        online_update: "spectral update uses the mean before it absorbs the current segment".to_string(),
        delta: config.delta,
        doeblin_column_minimum: model.doeblin_coefficient(),
        g_max: model.g_max(),
        constants: Constants {
            c1q: report.lemma1.c1q,
            c2q: report.lemma1.c2q,
            cq: report.cq,
            bq: report.bq,
            batch_coefficient: report.batch_coefficient,
            online_tail: report.online_tail,
            c1_2q: report.c1_2q,
            c2_2q: report.c2_2q,
            c_2q: report.c_2q,
            overlap_factor: report.overlap_factor,
            bias_bound: report.bias,
        },
        rate: rate_fit(&mix, &plan, &report, config.algorithm)?,
        checkpoints,
        samples_requested: config.samples,
        samples_used: used,
        segments: k_last,
        generated_at_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    Ok(Experiment { records, metadata })
}

/// Run and write `<out>` and `<out>.meta`. The output file is created before
/// any trial runs so an unwritable path fails fast.
pub fn run_to_files(config: &ExperimentConfig) -> Result<Experiment> {
    emit_csv(&[], &config.out)?;
    let exp = run_experiment(config)?;
    emit_csv(&exp.records, &config.out)?;
    write_metadata(&exp.metadata, &config.meta_path())?;
    Ok(exp)
}

/// Largest fraction of trials above the threshold over all `(k, s)` cells
/// with `k >= min_k`.
pub fn worst_exceedance(records: &[ErrorRecord], min_k: usize) -> f64 {
    let mut cells: std::collections::BTreeMap<(usize, u64), (usize, usize)> = Default::default();
    for r in records.iter().filter(|r| r.k >= min_k) {
        let cell = cells.entry((r.k, r.s.to_bits())).or_default();
        cell.0 += (r.empirical_error > r.highprob_threshold) as usize;
        cell.1 += 1;
    }
    cells
        .values()
        .map(|&(over, n)| over as f64 / n as f64)
        .fold(0.0, f64::max)
}

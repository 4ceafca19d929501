use std::collections::BTreeMap;

use crate::error::{HarnessError, Result};
use crate::experiment::ErrorRecord;

/// Checkpoints below this are left out of the fit.
pub const FIT_MIN_K: usize = 100;

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median error across trials at each checkpoint for frequency `s`.
pub fn median_curve(records: &[ErrorRecord], s: f64) -> Vec<(usize, f64)> {
    let mut by_k: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| (r.s - s).abs() <= 1e-12) {
        by_k.entry(r.k).or_default().push(r.empirical_error);
    }
    by_k.into_iter().map(|(k, mut v)| (k, median(&mut v))).collect()
}

/// Least-squares slope of log median error against log k, over checkpoints
/// with `k >= 100`. Needs at least four such checkpoints spanning two
/// decades.
pub fn fit_decay_rate(records: &[ErrorRecord], s: f64) -> Result<f64> {
    let curve: Vec<(usize, f64)> = median_curve(records, s)
        .into_iter()
        .filter(|&(k, _)| k >= FIT_MIN_K)
        .collect();
    if curve.len() < 4 {
        return Err(HarnessError::Analysis(format!(
            "need at least 4 checkpoints with k >= {FIT_MIN_K} at s = {s}, found {}",
            curve.len()
        )));
    }
    let (k_lo, k_hi) = (curve[0].0, curve[curve.len() - 1].0);
    if (k_hi as f64) < 100.0 * k_lo as f64 {
        return Err(HarnessError::Analysis(format!(
            "checkpoints {k_lo}..{k_hi} span less than two decades"
        )));
    }
    if let Some(&(k, _)) = curve.iter().find(|&&(_, e)| !(e > 0.0)) {
        return Err(HarnessError::Analysis(format!("median error at k = {k} is not positive")));
    }
    let pts: Vec<(f64, f64)> = curve.iter().map(|&(k, e)| ((k as f64).ln(), e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

//! Finite-state Markov chain test bed.
//!
//! Observations are `y[t] = g(X_t)` for a stationary chain `X_t` with
//! transition matrix `P`. Every population quantity the estimators target has
//! an exact expression in terms of `P`, its stationary law `pi` and the
//! observation matrix `G` (row `x` holds `g(x)`):
//!
//! ```text
//! mu         = G^T pi
//! R[k]       = (G^T diag(pi) P^k G)^T - mu mu^T,     k >= 0,   R[-k] = R[k]^T
//! Phi(s)     = R[0] + A(z) + A(z)^*,                 z = e^{-j 2 pi s}
//! A(z)       = (G^T diag(pi) z Q (I - z Q)^{-1} G)^T, Q = P - 1 pi^T
//! Phi_bar(s) = sum_{a,b < M} w_a(s) conj(w_b(s)) R[a - b]
//! ```
//!
//! `A(z)` is the closed-form geometric series `sum_{k >= 1} z^k R[k]`, using
//! `P^k - 1 pi^T = Q^k` for `k >= 1`. It exists when every eigenvalue of `P`
//! other than the Perron root lies strictly inside the unit circle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::series::{SegmentationPlan, TimeSeries};
use crate::{CMatrix, DMatrix, DVector, C64};

/// Identity string of the generator behind [`simulate`], for provenance.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha 0.9, seed_from_u64, stream = trial index)";

const STOCHASTIC_TOL: f64 = 1e-12;

/// Transition matrix plus observation map.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    transition: DMatrix<f64>,
    observations: DMatrix<f64>,
}

impl MarkovModel {
    /// `transition` is `m x m` row-stochastic; `observations` is `m x n`.
    pub fn new(transition: DMatrix<f64>, observations: DMatrix<f64>) -> Result<Self> {
        let m = transition.nrows();
        if m == 0 || transition.ncols() != m {
            return Err(Error::InvalidTransition(format!(
                "transition matrix must be square and nonempty, got {}x{}",
                transition.nrows(),
                transition.ncols()
            )));
        }
        if transition.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidTransition("entries must be finite and nonnegative".into()));
        }
        for (i, row) in transition.row_iter().enumerate() {
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::InvalidTransition(format!("row {i} sums to {total}")));
            }
        }
        if observations.nrows() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: observations.nrows(),
            });
        }
        if observations.ncols() == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(Self {
            transition,
            observations,
        })
    }

    /// Scalar observations `g(x) = values[x]`.
    pub fn scalar(transition: DMatrix<f64>, values: &[f64]) -> Result<Self> {
        Self::new(transition, DMatrix::from_column_slice(values.len(), 1, values))
    }

    /// Two-state chain with `P = [[0.3, 0.7], [0.5, 0.5]]` observed through
    /// its state label `g(x) = x`.
    pub fn two_state_reference() -> Self {
        Self::scalar(
            DMatrix::from_row_slice(2, 2, &[0.3, 0.7, 0.5, 0.5]),
            &[0.0, 1.0],
        )
        .expect("reference chain is valid")
    }

    pub fn states(&self) -> usize {
        self.transition.nrows()
    }

    pub fn dim(&self) -> usize {
        self.observations.ncols()
    }

    pub fn transition(&self) -> &DMatrix<f64> {
        &self.transition
    }

    pub fn observations(&self) -> &DMatrix<f64> {
        &self.observations
    }

    /// `max_x ||g(x)||_2`.
    pub fn g_max(&self) -> f64 {
        self.observations
            .row_iter()
            .map(|r| r.norm())
            .fold(0.0, f64::max)
    }

    /// Column-minimum minorisation constant `sum_j min_i P(i, j)`.
    pub fn doeblin_coefficient(&self) -> f64 {
        self.transition
            .column_iter()
            .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
            .sum()
    }

    /// Irreducible and aperiodic: some power `P^j`, `j <= m^2`, is entrywise
    /// positive.
    pub fn is_primitive(&self) -> bool {
        let m = self.states();
        let pattern = self.transition.map(|p| p > 0.0);
        let mut power = pattern.clone();
        for _ in 0..m * m {
            if power.iter().all(|&b| b) {
                return true;
            }
            power = DMatrix::from_fn(m, m, |i, j| (0..m).any(|l| power[(i, l)] && pattern[(l, j)]));
        }
        power.iter().all(|&b| b)
    }
}

/// Unique `pi` with `pi P = pi`, `sum pi = 1`.
pub fn stationary_dist(transition: &DMatrix<f64>) -> Result<DVector<f64>> {
    let m = transition.nrows();
    if m == 0 || transition.ncols() != m {
        return Err(Error::InvalidTransition("transition matrix must be square".into()));
    }
    let mut system = transition.transpose() - DMatrix::identity(m, m);
    system.row_mut(m - 1).fill(1.0);
    let mut rhs = DVector::zeros(m);
    rhs[m - 1] = 1.0;

    let sv = system.clone().svd(false, false).singular_values;
    let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if lo <= 1e-12 * hi {
        return Err(Error::Degenerate("stationary distribution is not unique".into()));
    }
    let mut pi = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Degenerate("singular stationary system".into()))?;
    // Clear round-off negatives on transient states.
    pi.iter_mut().for_each(|p| {
        if *p < 0.0 && *p > -1e-14 {
            *p = 0.0
        }
    });
    let residual = (transition.transpose() * &pi - &pi).amax();
    if residual > 1e-12 || pi.iter().any(|p| *p < 0.0) {
        return Err(Error::Degenerate(format!(
            "stationary solve residual {residual:e} or negative mass"
        )));
    }
    Ok(pi)
}

/// Exact population quantities of a stationary chain.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    model: MarkovModel,
    pi: DVector<f64>,
    mu: DVector<f64>,
    /// `Q = P - 1 pi^T`.
    deflated: DMatrix<f64>,
    /// `G^T diag(pi)`, `n x m`.
    weighted_obs: DMatrix<f64>,
}

impl GroundTruth {
    pub fn new(model: &MarkovModel) -> Result<Self> {
        let pi = stationary_dist(model.transition())?;
        let g = model.observations();
        let mu = g.transpose() * &pi;
        let m = model.states();
        let deflated = model.transition() - DMatrix::from_fn(m, m, |_, j| pi[j]);
        let weighted_obs = g.transpose() * DMatrix::from_diagonal(&pi);
        Ok(Self {
            model: model.clone(),
            pi,
            mu,
            deflated,
            weighted_obs,
        })
    }

    pub fn model(&self) -> &MarkovModel {
        &self.model
    }

    pub fn pi(&self) -> &DVector<f64> {
        &self.pi
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mu
    }

    /// `R[k]` via `P^{|k|}`.
    pub fn autocovariance(&self, lag: i64) -> DMatrix<f64> {
        let p = self.model.transition();
        let mut power = DMatrix::identity(p.nrows(), p.ncols());
        for _ in 0..lag.unsigned_abs() {
            power = &power * p;
        }
        let forward = self.lagged_moment(&power) - &self.mu * self.mu.transpose();
        if lag >= 0 {
            forward
        } else {
            forward.transpose()
        }
    }

    /// `R[0], ..., R[max_lag]`.
    pub fn autocovariances(&self, max_lag: usize) -> Vec<DMatrix<f64>> {
        let p = self.model.transition();
        let centre = &self.mu * self.mu.transpose();
        let mut power = DMatrix::identity(p.nrows(), p.ncols());
        let mut out = Vec::with_capacity(max_lag + 1);
        for _ in 0..=max_lag {
            out.push(self.lagged_moment(&power) - &centre);
            power = &power * p;
        }
        out
    }

    /// `E[y[t + k] y[t]^T] = (G^T diag(pi) P^k G)^T`.
    fn lagged_moment(&self, power: &DMatrix<f64>) -> DMatrix<f64> {
        (&self.weighted_obs * power * self.model.observations()).transpose()
    }

    /// Largest modulus among the non-Perron eigenvalues of `P`.
    pub fn subdominant_modulus(&self) -> f64 {
        self.deflated
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// True spectral density `Phi(s) = sum_k e^{-j 2 pi s k} R[k]`, closed form.
    pub fn true_psd(&self, s: f64) -> Result<CMatrix> {
        let rho = self.subdominant_modulus();
        if rho >= 1.0 - 1e-10 {
            return Err(Error::Divergence(format!(
                "chain has an eigenvalue of modulus {rho} on the unit circle"
            )));
        }
        let m = self.model.states();
        let z = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * s);
        let q = self.deflated.map(|v| C64::new(v, 0.0));
        let resolvent = (CMatrix::identity(m, m) - &q * z)
            .try_inverse()
            .ok_or_else(|| Error::Divergence("I - zQ is singular".into()))?;
        let left = self.weighted_obs.map(|v| C64::new(v, 0.0));
        let right = self.model.observations().map(|v| C64::new(v, 0.0));
        let forward = (left * (q * z) * resolvent * right).transpose();
        let r0 = self.autocovariance(0).map(|v| C64::new(v, 0.0));
        Ok(&r0 + &forward + forward.adjoint())
    }

    /// `sum_{|k| <= max_lag} e^{-j 2 pi s k} R[k]`; a cross-check for
    /// [`GroundTruth::true_psd`].
    pub fn truncated_psd(&self, s: f64, max_lag: usize) -> CMatrix {
        let lags = self.autocovariances(max_lag);
        let mut acc = lags[0].map(|v| C64::new(v, 0.0));
        for (k, r) in lags.iter().enumerate().skip(1) {
            let z = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * s * k as f64);
            let rc = r.map(|v| C64::new(v, 0.0));
            acc += &rc * z + rc.transpose() * z.conj();
        }
        acc
    }

    /// `Phi_bar(s) = E[(y_hat(s) - h(s) mu)(y_hat(s) - h(s) mu)^*]`.
    pub fn windowed_expectation(&self, plan: &SegmentationPlan, s: f64) -> Result<CMatrix> {
        let m = plan.segment_len();
        let w = plan.window().weights(m, s)?;
        let lags = self.autocovariances(m.saturating_sub(1));
        let n = self.model.dim();
        let mut acc = CMatrix::zeros(n, n);
        for (a, wa) in w.iter().enumerate() {
            for (b, wb) in w.iter().enumerate() {
                let coeff = wa * wb.conj();
                let r = if a >= b {
                    lags[a - b].clone()
                } else {
                    lags[b - a].transpose()
                };
                for (dst, v) in acc.iter_mut().zip(r.iter()) {
                    *dst += coeff * v;
                }
            }
        }
        Ok(acc)
    }
}

/// Draws stationary sample paths.
#[derive(Debug, Clone)]
pub struct Simulator {
    model: MarkovModel,
    initial_cdf: Vec<f64>,
    row_cdfs: Vec<Vec<f64>>,
    burn_in: usize,
}

fn cumulative(p: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut total = 0.0;
    p.map(|v| {
        total += v;
        total
    })
    .collect()
}

fn draw(cdf: &[f64], u: f64) -> usize {
    cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
}

impl Simulator {
    pub fn new(model: &MarkovModel) -> Result<Self> {
        let pi = stationary_dist(model.transition())?;
        Ok(Self {
            model: model.clone(),
            initial_cdf: cumulative(pi.iter().copied()),
            row_cdfs: model
                .transition()
                .row_iter()
                .map(|r| cumulative(r.iter().copied()))
                .collect(),
            burn_in: 0,
        })
    }

    /// Discard `steps` transitions before recording. Off by default: the
    /// initial state is already drawn from the stationary law.
    pub fn with_burn_in(mut self, steps: usize) -> Self {
        self.burn_in = steps;
        self
    }

    /// State sequence of length `len`.
    pub fn states<R: Rng>(&self, len: usize, rng: &mut R) -> Vec<usize> {
        let mut x = draw(&self.initial_cdf, rng.random::<f64>());
        for _ in 0..self.burn_in {
            x = draw(&self.row_cdfs[x], rng.random::<f64>());
        }
        let mut out = Vec::with_capacity(len);
        for t in 0..len {
            if t > 0 {
                x = draw(&self.row_cdfs[x], rng.random::<f64>());
            }
            out.push(x);
        }
        out
    }

    pub fn run<R: Rng>(&self, len: usize, rng: &mut R) -> Result<TimeSeries> {
        if len == 0 {
            return Err(Error::EmptySeries);
        }
        let n = self.model.dim();
        let g = self.model.observations();
        let mut data = Vec::with_capacity(len * n);
        for x in self.states(len, rng) {
            data.extend(g.row(x).iter());
        }
        TimeSeries::from_flat(data, n)
    }
}

/// Generator for trial `stream` under master seed `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stationary sample path of length `len`; identical seeds give identical
/// output on every platform.
pub fn simulate(model: &MarkovModel, len: usize, seed: u64) -> Result<TimeSeries> {
    Simulator::new(model)?.run(len, &mut trial_rng(seed, 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> GroundTruth {
        GroundTruth::new(&MarkovModel::two_state_reference()).unwrap()
    }

    #[test]
    fn stationary_examples() {
        let pi = stationary_dist(&DMatrix::from_row_slice(2, 2, &[0.3, 0.7, 0.5, 0.5])).unwrap();
        assert!((pi[0] - 5.0 / 12.0).abs() < 1e-14 && (pi[1] - 7.0 / 12.0).abs() < 1e-14);
        let pi = stationary_dist(&DMatrix::from_element(2, 2, 0.5)).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-15);
        let pi = stationary_dist(&DMatrix::from_element(1, 1, 1.0)).unwrap();
        assert_eq!(pi[0], 1.0);
    }

    #[test]
    fn reducible_chain_is_degenerate() {
        let p = DMatrix::<f64>::identity(3, 3);
        assert!(matches!(stationary_dist(&p), Err(Error::Degenerate(_))));
        let two_blocks = DMatrix::from_row_slice(4, 4, &[
            0.5, 0.5, 0.0, 0.0, //
            0.5, 0.5, 0.0, 0.0, //
            0.0, 0.0, 0.2, 0.8, //
            0.0, 0.0, 0.6, 0.4,
        ]);
        assert!(matches!(stationary_dist(&two_blocks), Err(Error::Degenerate(_))));
    }

    #[test]
    fn model_validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.3, 0.6, 0.5, 0.5]);
        assert!(matches!(MarkovModel::scalar(bad, &[0.0, 1.0]), Err(Error::InvalidTransition(_))));
        let neg = DMatrix::from_row_slice(2, 2, &[1.2, -0.2, 0.5, 0.5]);
        assert!(MarkovModel::scalar(neg, &[0.0, 1.0]).is_err());
        let p = DMatrix::from_element(2, 2, 0.5);
        assert!(matches!(MarkovModel::scalar(p, &[0.0, 1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn reference_chain_facts() {
        let model = MarkovModel::two_state_reference();
        assert!(model.is_primitive());
        assert!((model.doeblin_coefficient() - 0.8).abs() < 1e-15);
        assert_eq!(model.g_max(), 1.0);
        let flip = MarkovModel::scalar(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), &[0.0, 1.0]).unwrap();
        assert!(!flip.is_primitive());
    }

    #[test]
    fn reference_autocovariance() {
        let truth = reference();
        assert!((truth.mean()[0] - 7.0 / 12.0).abs() < 1e-15);
        let r0 = 35.0 / 144.0;
        assert!((truth.autocovariance(0)[(0, 0)] - r0).abs() < 1e-15);
        let lags = truth.autocovariances(50);
        for (k, r) in lags.iter().enumerate() {
            let expected = r0 * (-0.2f64).powi(k as i32);
            assert!((r[(0, 0)] - expected).abs() < 1e-12, "lag {k}");
            assert!((truth.autocovariance(k as i64)[(0, 0)] - expected).abs() < 1e-12);
            assert!((truth.autocovariance(-(k as i64))[(0, 0)] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_psd_closed_form() {
        let truth = reference();
        let r0 = 35.0 / 144.0;
        let lambda: f64 = -0.2;
        assert!((truth.subdominant_modulus() - 0.2).abs() < 1e-12);
        for i in 0..=32 {
            let s = -0.5 + i as f64 / 32.0;
            let expected =
                r0 * (1.0 - lambda * lambda) / (1.0 - 2.0 * lambda * (2.0 * std::f64::consts::PI * s).cos() + lambda * lambda);
            let phi = truth.true_psd(s).unwrap();
            assert!((phi[(0, 0)] - C64::new(expected, 0.0)).norm() < 1e-13, "s = {s}");
        }
        let dc = truth.true_psd(0.0).unwrap()[(0, 0)].re;
        assert!((dc - r0 * 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn iid_chain_is_white() {
        let p = DMatrix::from_row_slice(2, 2, &[0.25, 0.75, 0.25, 0.75]);
        let truth = GroundTruth::new(&MarkovModel::scalar(p, &[0.0, 1.0]).unwrap()).unwrap();
        let r0 = truth.autocovariance(0)[(0, 0)];
        assert!((r0 - 0.1875).abs() < 1e-15);
        let hann = SegmentationPlan::welch_hann(9, 3).unwrap();
        for s in [-0.4, 0.0, 0.17, 0.5] {
            assert!((truth.true_psd(s).unwrap()[(0, 0)].re - r0).abs() < 1e-14);
            let pbar = truth.windowed_expectation(&hann, s).unwrap();
            assert!((pbar[(0, 0)] - C64::new(r0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn single_tap_window_recovers_variance() {
        let truth = reference();
        let plan = SegmentationPlan::bartlett(1).unwrap();
        let pbar = truth.windowed_expectation(&plan, 0.3).unwrap();
        assert!((pbar[(0, 0)] - C64::new(35.0 / 144.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn periodic_chain_diverges() {
        let flip = MarkovModel::scalar(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]), &[0.0, 1.0]).unwrap();
        let truth = GroundTruth::new(&flip).unwrap();
        assert!(matches!(truth.true_psd(0.1), Err(Error::Divergence(_))));
    }

    #[test]
    fn single_state_chain_is_constant() {
        let model = MarkovModel::scalar(DMatrix::from_element(1, 1, 1.0), &[3.0]).unwrap();
        let series = simulate(&model, 25, 11).unwrap();
        assert!(series.as_flat().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn simulation_is_deterministic() {
        let model = MarkovModel::two_state_reference();
        let a = simulate(&model, 1000, 42).unwrap();
        let b = simulate(&model, 1000, 42).unwrap();
        let c = simulate(&model, 1000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let sim = Simulator::new(&model).unwrap();
        let s0 = sim.run(500, &mut trial_rng(7, 0)).unwrap();
        let s1 = sim.run(500, &mut trial_rng(7, 1)).unwrap();
        assert_ne!(s0, s1);
    }
}

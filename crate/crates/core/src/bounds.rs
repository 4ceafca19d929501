//! Closed-form error, bias and high-probability bounds for L-mixing data.
//!
//! A process enters every formula through two numbers per moment order `p`:
//! `M_p(y)`, a bound on `sup_k ||y_k||_{L_p}`, and `Gamma_{d,p}(y)`, a bound on
//! the summed dependence coefficients `sum_tau gamma_p(tau, y)`. These are
//! carried by [`MixingStats`], tagged with the order they hold at.
//!
//! The estimator bounds mix orders: at base order `q` the mean error needs
//! statistics at `2q`, while the spectral error bounds need them at `4q`. The
//! low-level functions check the order of the statistics they are handed and
//! fail with [`Error::OrderMismatch`] rather than return a plausible but wrong
//! number. [`BoundReport::evaluate`] pulls everything it needs from a
//! [`MixingProfile`] at the right orders.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::series::SegmentationPlan;
use crate::C64;

/// Mixing statistics of a process at one `L_p` order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingStats {
    /// The `L_p` order `p` (twice the base order `q` in the usual notation).
    pub order: f64,
    /// Bound on `M_p(y)`.
    pub moment: f64,
    /// Bound on `Gamma_{d,p}(y)`.
    pub dependence: f64,
}

impl MixingStats {
    pub fn new(order: f64, moment: f64, dependence: f64) -> Result<Self> {
        if !(order >= 1.0) || !order.is_finite() {
            return Err(Error::Domain(format!("moment order must be >= 1, got {order}")));
        }
        if !(moment >= 0.0 && dependence >= 0.0) || !moment.is_finite() || !dependence.is_finite() {
            return Err(Error::Domain("mixing statistics must be finite and nonnegative".into()));
        }
        Ok(Self {
            order,
            moment,
            dependence,
        })
    }

    /// Statistics of `y - E[y]`: the moment bound doubles, the dependence
    /// coefficients are unchanged.
    pub fn centred(&self) -> Self {
        Self {
            moment: 2.0 * self.moment,
            ..*self
        }
    }

    fn expect_order(&self, expected: f64) -> Result<()> {
        if (self.order - expected).abs() > 1e-12 * expected {
            return Err(Error::OrderMismatch {
                expected,
                found: self.order,
            });
        }
        Ok(())
    }
}

/// A process whose mixing statistics are known at every order.
pub trait MixingProfile {
    fn stats(&self, order: f64) -> Result<MixingStats>;

    /// Per-lag dependence sequence `gamma_2(tau, y)`, when known.
    fn gamma2(&self) -> Option<GammaSequence> {
        None
    }
}

/// Measurements `g(x)` of a uniformly ergodic finite chain with Doeblin
/// coefficient `delta` and `|g| <= g_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovMixing {
    pub g_max: f64,
    pub delta: f64,
}

impl MarkovMixing {
    pub fn new(g_max: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Domain(format!("Doeblin coefficient must lie in (0, 1], got {delta}")));
        }
        if !(g_max >= 0.0) || !g_max.is_finite() {
            return Err(Error::Domain(format!("G_max must be finite and nonnegative, got {g_max}")));
        }
        Ok(Self { g_max, delta })
    }

    /// `Gamma_{d,p} <= 4 G_max / (1 - (1 - delta)^{1/p})`.
    pub fn dependence(&self, order: f64) -> f64 {
        4.0 * self.g_max / (1.0 - (1.0 - self.delta).powf(1.0 / order))
    }

    /// The looser linear-in-order form `4 G_max p / delta`.
    pub fn dependence_loose(&self, order: f64) -> f64 {
        4.0 * self.g_max / self.delta * order
    }
}

impl MixingProfile for MarkovMixing {
    fn stats(&self, order: f64) -> Result<MixingStats> {
        MixingStats::new(order, self.g_max, self.dependence(order))
    }

    /// `gamma_2(tau) <= 4 G_max (1 - delta)^{tau/2}`, which sums to the
    /// order-2 dependence bound.
    fn gamma2(&self) -> Option<GammaSequence> {
        Some(GammaSequence::Geometric {
            scale: 4.0 * self.g_max,
            ratio: (1.0 - self.delta).sqrt(),
        })
    }
}

/// Mixing statistics of a finite chain at order `4q`, the order the spectral
/// error bounds consume.
pub fn markov_mixing_stats(g_max: f64, delta: f64, q: f64) -> Result<MixingStats> {
    if !(q >= 1.0) {
        return Err(Error::Domain(format!("q must be >= 1, got {q}")));
    }
    MarkovMixing::new(g_max, delta)?.stats(4.0 * q)
}

/// Nonnegative sequence `tau -> gamma_2(tau, y)`, `tau >= 0`.
#[derive(Clone)]
pub enum GammaSequence {
    /// `scale * ratio^tau`.
    Geometric { scale: f64, ratio: f64 },
    /// Listed values, zero afterwards.
    Finite(Vec<f64>),
    /// Arbitrary sequence. `tail(t)`, when given, bounds `sum_{tau >= t}`.
    /// Without it the sum is truncated once terms fall below `1e-12` of the
    /// partial sum, and must do so before `horizon`.
    Function {
        term: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
        tail: Option<Arc<dyn Fn(usize) -> f64 + Send + Sync>>,
        horizon: usize,
    },
}

impl fmt::Debug for GammaSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Geometric { scale, ratio } => f
                .debug_struct("Geometric")
                .field("scale", scale)
                .field("ratio", ratio)
                .finish(),
            Self::Finite(v) => f.debug_tuple("Finite").field(v).finish(),
            Self::Function { tail, horizon, .. } => f
                .debug_struct("Function")
                .field("has_tail", &tail.is_some())
                .field("horizon", horizon)
                .finish(),
        }
    }
}

const TRUNCATION_RTOL: f64 = 1e-12;

impl GammaSequence {
    pub fn value(&self, tau: usize) -> f64 {
        match self {
            Self::Geometric { scale, ratio } => scale * ratio.powi(tau as i32),
            Self::Finite(v) => v.get(tau).copied().unwrap_or(0.0),
            Self::Function { term, .. } => term(tau),
        }
    }

    /// `sum_{tau >= from} gamma(tau)`.
    pub fn tail_sum(&self, from: usize) -> Result<f64> {
        match self {
            Self::Geometric { scale, ratio } => {
                if *scale == 0.0 {
                    Ok(0.0)
                } else if !(0.0..1.0).contains(ratio) {
                    Err(Error::Divergence(format!("geometric ratio {ratio} is not below one")))
                } else {
                    Ok(scale * ratio.powi(from as i32) / (1.0 - ratio))
                }
            }
            Self::Finite(v) => Ok(v.iter().skip(from).sum()),
            Self::Function { term, tail, horizon } => {
                let mut partial = 0.0;
                let mut tau = from;
                while tau < *horizon {
                    if let Some(tail) = tail {
                        let rest = tail(tau);
                        if rest <= TRUNCATION_RTOL * partial || rest == 0.0 {
                            return Ok(partial + rest);
                        }
                    }
                    let t = term(tau);
                    partial += t;
                    tau += 1;
                    if tail.is_none() && t <= TRUNCATION_RTOL * partial {
                        return Ok(partial);
                    }
                }
                Err(Error::Divergence(format!(
                    "sum did not converge within {horizon} terms"
                )))
            }
        }
    }
}

fn overlap_factor(m: usize, hop: usize) -> Result<f64> {
    if m == 0 || hop == 0 || hop > m {
        return Err(Error::InvalidPlan {
            segment_len: m,
            hop,
        });
    }
    Ok(((m - 1) / hop + 1) as f64)
}

fn check_q(q: f64) -> Result<()> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::Domain(format!("q must be >= 1, got {q}")));
    }
    Ok(())
}

/// Weighted-sum moment bound for a zero-mean process:
/// `|| sum_k w_k y_k ||_{L_p} <= 2 (2 (p - 1) M_p Gamma_{d,p} sum |w_k|^2)^{1/2}`
/// with `p = stats.order`.
pub fn theorem1_bound(stats: &MixingStats, weights: &[C64]) -> f64 {
    let energy: f64 = weights.iter().map(|w| w.norm_sqr()).sum();
    2.0 * (2.0 * (stats.order - 1.0) * stats.moment * stats.dependence * energy).sqrt()
}

/// `c_{1,q} = 4 sqrt((2q - 1) M_{2q} Gamma_{d,2q})` from statistics at `2q`.
fn c1(at_2q: &MixingStats) -> f64 {
    4.0 * ((at_2q.order - 1.0) * at_2q.moment * at_2q.dependence).sqrt()
}

/// `c_{2,q} = F (2 c_{1,q} + Gamma_{d,2q})`.
fn c2(at_2q: &MixingStats, factor: f64) -> f64 {
    2.0 * factor * c1(at_2q) + factor * at_2q.dependence
}

/// Moment and dependence bounds for the centred segment transforms and their
/// outer products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma1Constants {
    /// Bound on `M_{2q}` of the centred transform.
    pub c1q: f64,
    /// Bound on `Gamma_{d,2q}` of the centred transform.
    pub c2q: f64,
    /// Bound on `M_{2q}` of the outer product, `c_{1,2q}^2`.
    pub m2q_outer: f64,
    /// Bound on `Gamma_{d,2q}` of the outer product, `6 c_{1,2q} c_{2,2q}`.
    pub gamma2q_outer: f64,
}

/// Constants at base order `q`; `at_2q` and `at_4q` are the statistics of `y`
/// at orders `2q` and `4q`.
pub fn lemma1_constants(
    at_2q: &MixingStats,
    at_4q: &MixingStats,
    segment_len: usize,
    hop: usize,
) -> Result<Lemma1Constants> {
    let factor = overlap_factor(segment_len, hop)?;
    let q = at_2q.order / 2.0;
    check_q(q)?;
    at_4q.expect_order(4.0 * q)?;
    let c1_2q = c1(at_4q);
    Ok(Lemma1Constants {
        c1q: c1(at_2q),
        c2q: c2(at_2q, factor),
        m2q_outer: c1_2q * c1_2q,
        gamma2q_outer: 6.0 * c1_2q * c2(at_4q, factor),
    })
}

/// Mean-error constant `c_q = c_{1,q} F`, from statistics at `2q`.
pub fn mean_error_constant(at_2q: &MixingStats, segment_len: usize, hop: usize) -> Result<f64> {
    Ok(c1(at_2q) * overlap_factor(segment_len, hop)?)
}

/// `|| mu_hat_k - mu ||_{L_{2q}} <= c_q / sqrt(M k)`.
pub fn lemma2_bound(at_2q: &MixingStats, segment_len: usize, hop: usize, k: usize, q: f64) -> Result<f64> {
    check_q(q)?;
    at_2q.expect_order(2.0 * q)?;
    if k < 1 {
        return Err(Error::Domain("mean error bound needs k >= 1".into()));
    }
    let cq = mean_error_constant(at_2q, segment_len, hop)?;
    Ok(cq / ((segment_len as f64) * k as f64).sqrt())
}

/// Coefficients shared by the batch and online spectral error bounds, built
/// from statistics at `4q`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct SpectralConstants {
    c1_2q: f64,
    c2_2q: f64,
    c_2q: f64,
    m4q: f64,
    concentration: f64,
}

impl SpectralConstants {
    fn new(at_4q: &MixingStats, segment_len: usize, hop: usize, q: f64) -> Result<Self> {
        check_q(q)?;
        at_4q.expect_order(4.0 * q)?;
        let factor = overlap_factor(segment_len, hop)?;
        let c1_2q = c1(at_4q);
        let c2_2q = c2(at_4q, factor);
        Ok(Self {
            c1_2q,
            c2_2q,
            c_2q: c1_2q * factor,
            m4q: at_4q.moment,
            concentration: 4.0 * (6.0 * (2.0 * q - 1.0) * c1_2q.powi(3) * c2_2q).sqrt(),
        })
    }

    fn batch_coefficient(&self) -> f64 {
        self.concentration + 2.0 * self.c1_2q * self.c_2q + self.c_2q * self.c_2q
    }

    fn online_leading(&self) -> f64 {
        self.concentration + 6.0 * self.c1_2q * self.c_2q + 2.0 * self.c_2q * self.c_2q
    }

    fn online_tail(&self) -> f64 {
        self.m4q * self.m4q + 2.0 * self.c1_2q * self.m4q
    }
}

fn check_k(k: usize, min: usize) -> Result<()> {
    if k < min {
        return Err(Error::Domain(format!("bound needs k >= {min}, got {k}")));
    }
    Ok(())
}

/// Batch estimator: `||Phi_hat_k - Phi_bar||_{L_q} <= a / sqrt(k)`.
pub fn theorem2_bound(at_4q: &MixingStats, segment_len: usize, hop: usize, k: usize, q: f64) -> Result<f64> {
    check_k(k, 1)?;
    let c = SpectralConstants::new(at_4q, segment_len, hop, q)?;
    Ok(c.batch_coefficient() / (k as f64).sqrt())
}

/// Online estimator: `b_q / sqrt(k) + (M_{4q}^2 + 2 c_{1,2q} M_{4q}) M / k`.
pub fn theorem3_bound(at_4q: &MixingStats, segment_len: usize, hop: usize, k: usize, q: f64) -> Result<f64> {
    check_k(k, 2)?;
    let c = SpectralConstants::new(at_4q, segment_len, hop, q)?;
    let k = k as f64;
    Ok(c.online_leading() / k.sqrt() + c.online_tail() * segment_len as f64 / k)
}

/// Error level exceeded with probability at most `nu` when the `L_q` error
/// bound is at most `f_k q^r` for all `q >= 1`:
/// `f_k e^r max{1, (ln(1/nu))^r / r^r}`.
pub fn theorem4_threshold(f_k: f64, r: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::Domain(format!("confidence nu must lie in (0, 1), got {nu}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("rate r must be positive, got {r}")));
    }
    if !(f_k >= 0.0) {
        return Err(Error::Domain(format!("f_k must be nonnegative, got {f_k}")));
    }
    let ln_inv = (1.0 / nu).ln();
    let arm = (ln_inv / r).powf(r);
    Ok(f_k * r.exp() * arm.max(1.0))
}

/// Bias bound for the Bartlett estimator, `||Phi(s) - Phi_bar(s)||_2 <=`
/// `2 M_q sum_{|k|>=M} gamma(|k|) + (2 M_q / M) sum_{|k|<M} |k| gamma(|k|)`.
pub fn bias_bartlett(gamma: &GammaSequence, mq: f64, segment_len: usize) -> Result<f64> {
    if segment_len == 0 {
        return Err(Error::InvalidLength {
            len: 0,
            reason: "segment length must be positive",
        });
    }
    let tail = 2.0 * gamma.tail_sum(segment_len)?;
    let weighted: f64 = 2.0
        * (1..segment_len)
            .map(|tau| tau as f64 * gamma.value(tau))
            .sum::<f64>();
    Ok(2.0 * mq * tail + 2.0 * mq / segment_len as f64 * weighted)
}

/// Normalised taper autocorrelation `sum_{i=tau}^{M-1} v_{i-tau} v_i / ||v||^2`.
pub fn taper_correlation(taper: &[f64], tau: usize) -> f64 {
    let energy: f64 = taper.iter().map(|v| v * v).sum();
    let lagged: f64 = (tau..taper.len()).map(|i| taper[i - tau] * taper[i]).sum();
    lagged / energy
}

/// Bias bound for the Welch estimator with taper `v` (`M = v.len()`):
/// `2 M_q sum_{|k|>=M} gamma(|k|) + 2 M_q sum_{|k|<M} gamma(|k|) rho(|k|)`,
/// `rho` the normalised taper autocorrelation.
pub fn bias_welch(gamma: &GammaSequence, mq: f64, taper: &[f64]) -> Result<f64> {
    let m = taper.len();
    if m == 0 || taper.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidWindow("window vector is empty or zero".into()));
    }
    let tail = 2.0 * gamma.tail_sum(m)?;
    let head: f64 = gamma.value(0) * taper_correlation(taper, 0)
        + 2.0
            * (1..m)
                .map(|tau| gamma.value(tau) * taper_correlation(taper, tau))
                .sum::<f64>();
    Ok(2.0 * mq * tail + 2.0 * mq * head)
}

/// Smallest integer `r` in `1..=max_r` with `coeff(q) <= coeff(1) q^r` at every
/// `q` in `qs`.
pub fn polynomial_rate(coeff: impl Fn(f64) -> Result<f64>, qs: &[f64], max_r: u32) -> Result<Option<u32>> {
    let base = coeff(1.0)?;
    let values = qs
        .iter()
        .map(|&q| coeff(q).map(|v| (q, v)))
        .collect::<Result<Vec<_>>>()?;
    Ok((1..=max_r).find(|&r| {
        values
            .iter()
            .all(|&(q, v)| v <= base * q.powi(r as i32) * (1.0 + 1e-12))
    }))
}

/// Which estimator a bound refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Batch,
    Online,
}

const RATE_GRID: [f64; 8] = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
const MAX_RATE: u32 = 16;

/// Every constant needed to draw the theoretical curves for one plan.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub q: f64,
    pub segment_len: usize,
    pub hop: usize,
    pub overlap_factor: f64,
    /// `c_{1,q}`, `c_{2,q}` and the outer-product bounds.
    pub lemma1: Lemma1Constants,
    /// `c_{1,2q}`, `c_{2,2q}`.
    pub c1_2q: f64,
    pub c2_2q: f64,
    /// Mean-error constants `c_q` and `c_{2q}`.
    pub cq: f64,
    pub c_2q: f64,
    /// `M_{4q}(y)` bound.
    pub m4q: f64,
    /// Batch bound is `batch_coefficient / sqrt(k)`.
    pub batch_coefficient: f64,
    /// Online bound is `bq / sqrt(k) + online_tail * M / k`.
    pub bq: f64,
    pub online_tail: f64,
    /// Polynomial growth rate in `q` of the batch and online coefficients,
    /// fitted over `q = 1..8`.
    pub batch_rate: u32,
    pub online_rate: u32,
    /// Bias bounds, when the profile supplies a per-lag sequence.
    pub bias: Option<f64>,
}

impl BoundReport {
    pub fn evaluate(profile: &impl MixingProfile, q: f64, plan: &SegmentationPlan) -> Result<Self> {
        check_q(q)?;
        let (m, hop) = (plan.segment_len(), plan.hop());
        let at_2q = profile.stats(2.0 * q)?;
        let at_4q = profile.stats(4.0 * q)?;
        let lemma1 = lemma1_constants(&at_2q, &at_4q, m, hop)?;
        let spectral = SpectralConstants::new(&at_4q, m, hop, q)?;

        let spectral_at = |qq: f64| SpectralConstants::new(&profile.stats(4.0 * qq)?, m, hop, qq);
        let batch_rate = polynomial_rate(|qq| Ok(spectral_at(qq)?.batch_coefficient()), &RATE_GRID, MAX_RATE)?;
        let lead_rate = polynomial_rate(|qq| Ok(spectral_at(qq)?.online_leading()), &RATE_GRID, MAX_RATE)?;
        let tail_rate = polynomial_rate(|qq| Ok(spectral_at(qq)?.online_tail()), &RATE_GRID, MAX_RATE)?;
        let no_rate = || Error::Domain(format!("bound factors grow faster than q^{MAX_RATE}"));
        let batch_rate = batch_rate.ok_or_else(no_rate)?;
        let online_rate = lead_rate.ok_or_else(no_rate)?.max(tail_rate.ok_or_else(no_rate)?);

        let bias = match profile.gamma2() {
            Some(gamma) => {
                let mq = profile.stats(2.0)?.moment;
                Some(match plan.window().taper() {
                    None => bias_bartlett(&gamma, mq, m)?,
                    Some(taper) => bias_welch(&gamma, mq, taper)?,
                })
            }
            None => None,
        };

        Ok(Self {
            q,
            segment_len: m,
            hop,
            overlap_factor: plan.overlap_factor() as f64,
            lemma1,
            c1_2q: spectral.c1_2q,
            c2_2q: spectral.c2_2q,
            cq: mean_error_constant(&at_2q, m, hop)?,
            c_2q: spectral.c_2q,
            m4q: spectral.m4q,
            batch_coefficient: spectral.batch_coefficient(),
            bq: spectral.online_leading(),
            online_tail: spectral.online_tail(),
            batch_rate,
            online_rate,
            bias,
        })
    }

    /// `f_k`: the expected-error bound at `k` segments. The online formula is
    /// proved for `k >= 2`; it is evaluated as written at `k = 1`.
    pub fn expected_bound(&self, algorithm: Algorithm, k: usize) -> f64 {
        let kf = k.max(1) as f64;
        match algorithm {
            Algorithm::Batch => self.batch_coefficient / kf.sqrt(),
            Algorithm::Online => self.bq / kf.sqrt() + self.online_tail * self.segment_len as f64 / kf,
        }
    }

    pub fn rate(&self, algorithm: Algorithm) -> u32 {
        match algorithm {
            Algorithm::Batch => self.batch_rate,
            Algorithm::Online => self.online_rate,
        }
    }

    /// Error level exceeded with probability at most `nu`.
    pub fn highprob_threshold(&self, algorithm: Algorithm, k: usize, nu: f64) -> Result<f64> {
        theorem4_threshold(self.expected_bound(algorithm, k), self.rate(algorithm) as f64, nu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::WindowSpec;

    fn unit(order: f64) -> MixingStats {
        MixingStats::new(order, 1.0, 1.0).unwrap()
    }

    #[test]
    fn theorem1_unit_case() {
        let w = WindowSpec::Bartlett.weights(7, 0.13).unwrap();
        let b = theorem1_bound(&unit(2.0), &w);
        assert!((b - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(theorem1_bound(&unit(2.0), &[C64::new(0.0, 0.0); 4]), 0.0);
    }

    #[test]
    fn theorem1_phase_invariance() {
        let w = WindowSpec::Bartlett.weights(5, 0.2).unwrap();
        let rotated: Vec<C64> = w
            .iter()
            .enumerate()
            .map(|(k, z)| z * C64::from_polar(1.0, 0.7 * k as f64 + 0.3))
            .collect();
        let stats = MixingStats::new(6.0, 1.3, 4.2).unwrap();
        assert!((theorem1_bound(&stats, &w) - theorem1_bound(&stats, &rotated)).abs() < 1e-12);
    }

    #[test]
    fn lemma1_bartlett_unit() {
        let c = lemma1_constants(&unit(2.0), &unit(4.0), 5, 5).unwrap();
        assert!((c.c1q - 4.0).abs() < 1e-14);
        assert!((c.c2q - 9.0).abs() < 1e-14);
    }

    #[test]
    fn lemma1_overlap_doubles() {
        let at2 = MixingStats::new(2.0, 1.0, 3.0).unwrap();
        let c = lemma1_constants(&at2, &unit(4.0), 16, 8).unwrap();
        assert!((c.c2q - (4.0 * c.c1q + 2.0 * 3.0)).abs() < 1e-12);
        assert_eq!(
            lemma1_constants(&at2, &unit(4.0), 4, 8).unwrap_err(),
            Error::InvalidPlan { segment_len: 4, hop: 8 }
        );
    }

    #[test]
    fn order_mismatch_is_rejected() {
        let err = lemma1_constants(&unit(2.0), &unit(2.0), 5, 5).unwrap_err();
        assert!(matches!(err, Error::OrderMismatch { .. }));
        assert!(matches!(theorem2_bound(&unit(2.0), 5, 5, 10, 1.0), Err(Error::OrderMismatch { .. })));
        assert!(matches!(lemma2_bound(&unit(4.0), 5, 5, 10, 1.0), Err(Error::OrderMismatch { .. })));
    }

    #[test]
    fn lemma2_scaling() {
        let s = MixingStats::new(2.0, 1.0, 8.5).unwrap();
        let b1 = lemma2_bound(&s, 5, 5, 1, 1.0).unwrap();
        assert!((b1 - 4.0 * 8.5f64.sqrt() / 5f64.sqrt()).abs() < 1e-12);
        let b4 = lemma2_bound(&s, 5, 5, 4, 1.0).unwrap();
        assert!((b1 / b4 - 2.0).abs() < 1e-14);
        assert!(matches!(lemma2_bound(&s, 5, 5, 0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn theorem2_and_3_shapes() {
        let s = markov_mixing_stats(1.0, 0.72, 1.0).unwrap();
        let b100 = theorem2_bound(&s, 5, 5, 100, 1.0).unwrap();
        let b400 = theorem2_bound(&s, 5, 5, 400, 1.0).unwrap();
        assert!((b100 / b400 - 2.0).abs() < 1e-14);
        let zero = MixingStats::new(4.0, 0.0, 0.0).unwrap();
        assert_eq!(theorem2_bound(&zero, 5, 5, 10, 1.0).unwrap(), 0.0);
        for k in [2, 3, 10, 1000, 100_000] {
            assert!(theorem3_bound(&s, 5, 5, k, 1.0).unwrap() >= theorem2_bound(&s, 5, 5, k, 1.0).unwrap());
        }
        assert!(matches!(theorem3_bound(&s, 5, 5, 1, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn theorem4_multipliers() {
        let e = std::f64::consts::E;
        assert!((theorem4_threshold(1.0, 1.0, 1.0 / e).unwrap() - e).abs() < 1e-12);
        assert!((theorem4_threshold(1.0, 1.0, 0.1).unwrap() - e * 10f64.ln()).abs() < 1e-12);
        assert!((theorem4_threshold(1.0, 1.0, 0.1).unwrap() - 6.259_07).abs() < 1e-5);
        assert!((theorem4_threshold(1.0, 1.0, 0.9).unwrap() - e).abs() < 1e-12);
        assert!((theorem4_threshold(2.5, 1.0, 0.9).unwrap() - 2.5 * e).abs() < 1e-12);
        for nu in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(theorem4_threshold(1.0, 1.0, nu), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn markov_stats_cases() {
        let one_step = markov_mixing_stats(2.0, 1.0, 1.0).unwrap();
        assert_eq!(one_step.dependence, 8.0);
        assert_eq!(one_step.order, 4.0);
        let s = markov_mixing_stats(1.0, 0.72, 1.0).unwrap();
        assert!((s.dependence - 4.0 / (1.0 - 0.28f64.powf(0.25))).abs() < 1e-12);
        assert!((s.dependence - 14.675).abs() < 1e-3);
        assert_eq!(s.moment, 1.0);
        for delta in [0.0, -0.2, 1.1] {
            assert!(matches!(markov_mixing_stats(1.0, delta, 1.0), Err(Error::Domain(_))));
        }
        for q in 1..=12 {
            for delta in [0.01, 0.3, 0.72, 0.99, 1.0] {
                let mix = MarkovMixing::new(1.0, delta).unwrap();
                let order = 4.0 * q as f64;
                assert!(mix.dependence_loose(order) >= mix.dependence(order));
            }
        }
    }

    #[test]
    fn bias_independent_samples_vanishes() {
        let gamma = GammaSequence::Finite(vec![3.0]);
        assert_eq!(bias_bartlett(&gamma, 1.0, 5).unwrap(), 0.0);
        let hann = crate::window::hann_vector(16).unwrap();
        assert!((bias_welch(&gamma, 1.5, &hann).unwrap() - 2.0 * 1.5 * 3.0).abs() < 1e-12);
    }

    #[test]
    fn bias_shrinks_with_segment_length() {
        let gamma = GammaSequence::Geometric { scale: 4.0, ratio: 0.5 };
        let mut last = f64::INFINITY;
        for m in [4, 16, 64, 256, 1024] {
            let b = bias_bartlett(&gamma, 1.0, m).unwrap();
            assert!(b < last);
            last = b;
        }
        assert!(last < 0.1);
    }

    #[test]
    fn divergent_sequences() {
        let g = GammaSequence::Geometric { scale: 1.0, ratio: 1.0 };
        assert!(matches!(bias_bartlett(&g, 1.0, 5), Err(Error::Divergence(_))));
        let harmonic = GammaSequence::Function {
            term: Arc::new(|t| 1.0 / (t as f64 + 1.0)),
            tail: None,
            horizon: 100_000,
        };
        assert!(matches!(bias_bartlett(&harmonic, 1.0, 5), Err(Error::Divergence(_))));
    }

    #[test]
    fn function_sequence_with_tail_matches_geometric() {
        let rho: f64 = 0.6;
        let geo = GammaSequence::Geometric { scale: 2.0, ratio: rho };
        let func = GammaSequence::Function {
            term: Arc::new(move |t| 2.0 * rho.powi(t as i32)),
            tail: Some(Arc::new(move |t| 2.0 * rho.powi(t as i32) / (1.0 - rho))),
            horizon: 10_000,
        };
        let plain = GammaSequence::Function {
            term: Arc::new(move |t| 2.0 * rho.powi(t as i32)),
            tail: None,
            horizon: 10_000,
        };
        let a = bias_bartlett(&geo, 1.0, 7).unwrap();
        assert!((a - bias_bartlett(&func, 1.0, 7).unwrap()).abs() < 1e-10);
        assert!((a - bias_bartlett(&plain, 1.0, 7).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn rate_fit_picks_smallest_integer() {
        let r = polynomial_rate(|q| Ok(3.0 * q.powf(2.5)), &RATE_GRID, 10).unwrap();
        assert_eq!(r, Some(3));
        let r = polynomial_rate(Ok, &RATE_GRID, 10).unwrap();
        assert_eq!(r, Some(1));
        let r = polynomial_rate(|q| Ok(q.exp()), &RATE_GRID, 2).unwrap();
        assert_eq!(r, None);
    }

    #[test]
    fn report_for_reference_chain() {
        let mix = MarkovMixing::new(1.0, 0.72).unwrap();
        let plan = SegmentationPlan::bartlett(5).unwrap();
        let report = BoundReport::evaluate(&mix, 1.0, &plan).unwrap();
        let at4 = mix.stats(4.0).unwrap();
        for k in [2, 17, 1000] {
            let t3 = theorem3_bound(&at4, 5, 5, k, 1.0).unwrap();
            assert!((report.expected_bound(Algorithm::Online, k) - t3).abs() <= 1e-12 * t3);
            let t2 = theorem2_bound(&at4, 5, 5, k, 1.0).unwrap();
            assert!((report.expected_bound(Algorithm::Batch, k) - t2).abs() <= 1e-12 * t2);
        }
        assert!(report.bias.unwrap() > 0.0);
        assert!(report.online_rate >= 1 && report.batch_rate >= 1);
    }
}

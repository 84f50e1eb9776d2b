//! Out-of-sample performance indicators and the studentized circular block
//! bootstrap test for Sharpe ratio differences.
//!
//! Annualization uses a configurable periods-per-year factor (52 for weekly
//! data). The reported Sharpe ratio is annual geometric return over annual
//! volatility with a zero risk-free rate; skewness and excess kurtosis are
//! plain standardized sample moments.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec;
use crate::optim::Weights;
use crate::risk::{historical_var_cvar, sample_moments, RiskError};

#[derive(Debug, Clone, Error)]
pub enum MetricsError {
    #[error("series too short: {got} observations, need {need}")]
    SeriesTooShort { got: usize, need: usize },
    #[error("weight trajectory is empty")]
    EmptyTrajectory,
    #[error("covariance count {covs} does not match window count {windows}")]
    CovarianceCountMismatch { covs: usize, windows: usize },
    #[error("Sharpe ratio undefined: series has zero variance")]
    SharpeUndefined,
    #[error("degenerate covariance: zero portfolio variance")]
    DegenerateCovariance,
    #[error("series lengths differ: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },
    #[error(transparent)]
    Risk(#[from] RiskError),
}

/// The indicator battery for one strategy track.
#[derive(Debug, Clone)]
pub struct PerformanceReport {
    pub annual_geometric_return: f64,
    pub annual_volatility: f64,
    pub sharpe: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub hist_var: f64,
    pub hist_cvar: f64,
    pub max_drawdown: f64,
    pub entropy_of_weights: f64,
    pub volatility_concentration: f64,
    pub diversification_ratio: f64,
    pub turnover: f64,
}

/// Exponential Shannon entropy of a weight vector with 0 ln 0 = 0; ranges
/// from 1 at a vertex to n at equal weights.
pub fn weights_entropy(w: &Weights) -> f64 {
    let h: f64 = w
        .as_slice()
        .iter()
        .map(|&x| if x > 0.0 { -x * x.ln() } else { 0.0 })
        .sum();
    h.exp()
}

/// Euler percentage volatility contributions w_i (Sigma w)_i / (w' Sigma w);
/// they sum to one by Euler's theorem on the quadratic form.
pub fn euler_contributions(w: &Weights, cov: &Array2<f64>) -> Result<Vec<f64>, MetricsError> {
    let wv = Array1::from_vec(w.as_slice().to_vec());
    let sw = cov.dot(&wv);
    let total = wv.dot(&sw);
    if !(total > 0.0) {
        return Err(MetricsError::DegenerateCovariance);
    }
    Ok(w.as_slice().iter().zip(sw.iter()).map(|(&wi, &si)| wi * si / total).collect())
}

/// Volatility diversification ratio (sum w_i sigma_i - portfolio sigma) /
/// (sum w_i sigma_i), in [0, 1]; zero iff no diversification.
pub fn diversification_ratio(w: &Weights, cov: &Array2<f64>) -> Result<f64, MetricsError> {
    let wv = Array1::from_vec(w.as_slice().to_vec());
    let port_var = wv.dot(&cov.dot(&wv));
    let weighted_sd: f64 = w
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &wi)| wi * cov[[i, i]].max(0.0).sqrt())
        .sum();
    if !(weighted_sd > 0.0) {
        return Err(MetricsError::DegenerateCovariance);
    }
    Ok(((weighted_sd - port_var.max(0.0).sqrt()) / weighted_sd).clamp(0.0, 1.0))
}

/// Largest peak-to-trough decline of the cumulative wealth path, <= 0.
pub fn max_drawdown(series: &[f64]) -> f64 {
    let mut wealth = 1.0f64;
    let mut peak = 1.0f64;
    let mut mdd = 0.0f64;
    for &p in series {
        wealth *= 1.0 + p;
        peak = peak.max(wealth);
        mdd = mdd.min(wealth / peak - 1.0);
    }
    mdd
}

/// Mean L1 weight change per rebalance over the trajectory.
pub fn turnover(weights: &[Weights]) -> f64 {
    if weights.len() < 2 {
        return 0.0;
    }
    let total: f64 = weights.windows(2).map(|w| w[0].l1_distance(&w[1])).sum();
    total / (weights.len() - 1) as f64
}

/// Builds the full indicator battery from an out-of-sample track.
/// `window_covs` are the per-window covariance estimates used for the risk
/// diversification measures (one per rebalance).
pub fn performance_report(
    series: &[f64],
    weights: &[Weights],
    window_covs: &[Array2<f64>],
    r: f64,
    periods_per_year: f64,
) -> Result<PerformanceReport, MetricsError> {
    if series.len() < 8 {
        return Err(MetricsError::SeriesTooShort { got: series.len(), need: 8 });
    }
    if weights.is_empty() {
        return Err(MetricsError::EmptyTrajectory);
    }
    if window_covs.len() != weights.len() {
        return Err(MetricsError::CovarianceCountMismatch {
            covs: window_covs.len(),
            windows: weights.len(),
        });
    }
    let t = series.len() as f64;
    let log_growth: f64 = series.iter().map(|&p| (1.0 + p).ln()).sum();
    let annual_geometric_return = (log_growth * periods_per_year / t).exp() - 1.0;
    let moments = sample_moments(series)?;
    // Constant series carry only summation round-off in their variance.
    if moments.sd <= 1e-13 * (1.0 + moments.mean.abs()) {
        return Err(MetricsError::SharpeUndefined);
    }
    let annual_volatility = moments.sd * periods_per_year.sqrt();
    let (hist_var, hist_cvar) = historical_var_cvar(series, r)?;

    let mut entropy_acc = 0.0;
    let mut conc_acc = 0.0;
    let mut div_acc = 0.0;
    for (w, cov) in weights.iter().zip(window_covs) {
        entropy_acc += weights_entropy(w);
        let euler = euler_contributions(w, cov)?;
        conc_acc += euler.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        div_acc += diversification_ratio(w, cov)?;
    }
    let k = weights.len() as f64;

    Ok(PerformanceReport {
        annual_geometric_return,
        annual_volatility,
        sharpe: annual_geometric_return / annual_volatility,
        skewness: moments.skew,
        excess_kurtosis: moments.excess_kurtosis,
        hist_var,
        hist_cvar,
        max_drawdown: max_drawdown(series),
        entropy_of_weights: entropy_acc / k,
        volatility_concentration: conc_acc / k,
        diversification_ratio: div_acc / k,
        turnover: turnover(weights),
    })
}

/// Result of the two-sided Sharpe difference test.
#[derive(Debug, Clone)]
pub struct SharpeTestResult {
    /// Per-period arithmetic Sharpe ratios entering the statistic.
    pub sharpe_a: f64,
    pub sharpe_b: f64,
    pub difference: f64,
    pub two_sided_p: f64,
    pub resamples: usize,
    pub block_size: usize,
}

/// First and second uncentered moments of both series.
fn mu_gamma(a: &[f64], b: &[f64]) -> [f64; 4] {
    let t = a.len() as f64;
    let mut v = [0.0; 4];
    for (&x, &y) in a.iter().zip(b) {
        v[0] += x;
        v[1] += y;
        v[2] += x * x;
        v[3] += y * y;
    }
    v.map(|s| s / t)
}

fn sharpe_from(v: &[f64; 4]) -> Option<(f64, f64, f64)> {
    let va = v[2] - v[0] * v[0];
    let vb = v[3] - v[1] * v[1];
    if !(va > 0.0 && vb > 0.0) {
        return None;
    }
    Some((v[0] / va.sqrt(), v[1] / vb.sqrt(), va))
}

/// Gradient of SR_a - SR_b with respect to (mu_a, mu_b, gamma_a, gamma_b).
fn gradient(v: &[f64; 4]) -> [f64; 4] {
    let va = (v[2] - v[0] * v[0]).max(f64::MIN_POSITIVE);
    let vb = (v[3] - v[1] * v[1]).max(f64::MIN_POSITIVE);
    [
        v[2] / va.powf(1.5),
        -v[3] / vb.powf(1.5),
        -v[0] / (2.0 * va.powf(1.5)),
        v[1] / (2.0 * vb.powf(1.5)),
    ]
}

/// Delta-method standard error of the Sharpe difference with the long-run
/// covariance of (a, b, a^2, b^2) estimated from non-overlapping block sums.
fn delta_se(a: &[f64], b: &[f64], v: &[f64; 4], block: usize) -> f64 {
    let t = a.len();
    let n_blocks = t / block;
    if n_blocks == 0 {
        return f64::NAN;
    }
    let grad = gradient(v);
    // Project u_t = (a, b, a^2, b^2) - mean onto the gradient and batch-mean.
    let mut acc = 0.0;
    for j in 0..n_blocks {
        let mut s = 0.0;
        for i in (j * block)..((j + 1) * block) {
            let u = [a[i] - v[0], b[i] - v[1], a[i] * a[i] - v[2], b[i] * b[i] - v[3]];
            s += grad.iter().zip(&u).map(|(g, x)| g * x).sum::<f64>();
        }
        acc += s * s / block as f64;
    }
    let long_run_var = acc / n_blocks as f64;
    (long_run_var / t as f64).sqrt()
}

fn studentized(diff: f64, se: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if se > 0.0 && se.is_finite() {
        diff / se
    } else {
        f64::INFINITY * diff.signum()
    }
}

/// Two-sided studentized circular-block-bootstrap p-value for equality of
/// Sharpe ratios. Blocks of paired observations wrap circularly, preserving
/// cross-dependence; each resample draws from its own deterministic ChaCha8
/// stream so the result is reproducible and independent of scheduling.
pub fn sharpe_test(
    a: &[f64],
    b: &[f64],
    resamples: usize,
    block_size: usize,
    seed: u64,
) -> Result<SharpeTestResult, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch { a: a.len(), b: b.len() });
    }
    let t = a.len();
    if t < 10 * block_size {
        return Err(MetricsError::SeriesTooShort { got: t, need: 10 * block_size });
    }
    let v = mu_gamma(a, b);
    let (sr_a, sr_b, _) = sharpe_from(&v).ok_or(MetricsError::SharpeUndefined)?;
    let diff = sr_a - sr_b;
    let se = delta_se(a, b, &v, block_size);
    let z_obs = studentized(diff, se);

    let n_blocks_per_resample = t.div_ceil(block_size);
    let exceed = exec::map_indexed(resamples, |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64 + 1);
        let mut ra = Vec::with_capacity(n_blocks_per_resample * block_size);
        let mut rb = Vec::with_capacity(n_blocks_per_resample * block_size);
        for _ in 0..n_blocks_per_resample {
            let start = rng.random_range(0..t);
            for o in 0..block_size {
                let idx = (start + o) % t;
                ra.push(a[idx]);
                rb.push(b[idx]);
            }
        }
        ra.truncate(t);
        rb.truncate(t);
        let vr = mu_gamma(&ra, &rb);
        let z = match sharpe_from(&vr) {
            Some((sa, sb, _)) => studentized(sa - sb - diff, delta_se(&ra, &rb, &vr, block_size)),
            None => 0.0,
        };
        u32::from(z.abs() >= z_obs.abs())
    });
    let count: u32 = exceed.iter().sum();
    Ok(SharpeTestResult {
        sharpe_a: sr_a,
        sharpe_b: sr_b,
        difference: diff,
        two_sided_p: count as f64 / resamples as f64,
        resamples,
        block_size,
    })
}

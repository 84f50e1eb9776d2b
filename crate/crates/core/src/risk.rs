//! Non-entropy risk measures and their estimators: sample and
//! constant-correlation shrinkage covariance, historical VaR/CVaR, and the
//! Cornish-Fisher / Edgeworth expansions for modified VaR and expected
//! shortfall.

use ndarray::{Array1, Array2, ArrayView2};
use statrs::function::erf::erfc_inv;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum RiskError {
    #[error("insufficient data: {got} observations, need at least {need}")]
    InsufficientData { got: usize, need: usize },
    #[error("scale parameter must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("confidence level {0} outside (0, 0.5]")]
    InvalidConfidenceLevel(f64),
    #[error("shrinkage intensity {0} outside [0, 1]")]
    InvalidShrinkage(f64),
    #[error("input contains non-finite values")]
    NonFinite,
}

/// Which covariance estimator produced a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CovKind {
    Sample,
    Shrinkage {
        delta: f64,
        /// Whether delta was chosen by the Ledoit-Wolf rule.
        auto: bool,
        /// Set when the auto rule degenerated (zero target distance) and
        /// delta fell back to 0.
        degenerate_fallback: bool,
    },
}

#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    pub matrix: Array2<f64>,
    pub kind: CovKind,
}

/// Shrinkage intensity choice: a fixed delta in [0, 1] or the Ledoit-Wolf
/// optimal rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShrinkageIntensity {
    Fixed(f64),
    Auto,
}

fn column_means(returns: &ArrayView2<f64>) -> Array1<f64> {
    let t = returns.nrows() as f64;
    returns.sum_axis(ndarray::Axis(0)) / t
}

/// Unbiased sample covariance (divisor T-1).
pub fn sample_covariance(returns: &ArrayView2<f64>) -> Result<CovarianceEstimate, RiskError> {
    let (t, n) = returns.dim();
    if t < 2 {
        return Err(RiskError::InsufficientData { got: t, need: 2 });
    }
    if returns.iter().any(|v| !v.is_finite()) {
        return Err(RiskError::NonFinite);
    }
    let means = column_means(returns);
    let mut cov = Array2::<f64>::zeros((n, n));
    for row in returns.rows() {
        for i in 0..n {
            let di = row[i] - means[i];
            for j in i..n {
                cov[[i, j]] += di * (row[j] - means[j]);
            }
        }
    }
    let denom = (t - 1) as f64;
    for i in 0..n {
        for j in i..n {
            let v = cov[[i, j]] / denom;
            cov[[i, j]] = v;
            cov[[j, i]] = v;
        }
    }
    Ok(CovarianceEstimate { matrix: cov, kind: CovKind::Sample })
}

/// Constant-correlation target: sample variances on the diagonal, average
/// sample correlation everywhere else.
fn constant_correlation_target(sample: &Array2<f64>) -> Array2<f64> {
    let n = sample.nrows();
    let sd: Vec<f64> = (0..n).map(|i| sample[[i, i]].max(0.0).sqrt()).collect();
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = sd[i] * sd[j];
            if d > 0.0 {
                sum += sample[[i, j]] / d;
            }
            count += 1;
        }
    }
    let rbar = if count > 0 { sum / count as f64 } else { 0.0 };
    let mut f = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            f[[i, j]] = if i == j { sample[[i, i]] } else { rbar * sd[i] * sd[j] };
        }
    }
    f
}

/// Ledoit-Wolf optimal intensity for the constant-correlation target,
/// clipped to [0, 1]. Returns (delta, degenerate_fallback).
fn ledoit_wolf_intensity(
    returns: &ArrayView2<f64>,
    sample: &Array2<f64>,
    target: &Array2<f64>,
) -> (f64, bool) {
    let (t, n) = returns.dim();
    let tf = t as f64;
    let means = column_means(returns);
    let sd: Vec<f64> = (0..n).map(|i| sample[[i, i]].max(0.0).sqrt()).collect();

    // pi_hat: sum of asymptotic variances of the sample covariance entries.
    let mut pi_mat = Array2::<f64>::zeros((n, n));
    // theta terms for the rho_hat correction: Cov(s_ii, s_ij) estimates.
    let mut theta_ii = Array2::<f64>::zeros((n, n));
    let mut theta_jj = Array2::<f64>::zeros((n, n));
    for row in returns.rows() {
        let d: Vec<f64> = (0..n).map(|i| row[i] - means[i]).collect();
        for i in 0..n {
            for j in 0..n {
                let prod = d[i] * d[j] - sample[[i, j]];
                pi_mat[[i, j]] += prod * prod;
                theta_ii[[i, j]] += (d[i] * d[i] - sample[[i, i]]) * prod;
                theta_jj[[i, j]] += (d[j] * d[j] - sample[[j, j]]) * prod;
            }
        }
    }
    pi_mat /= tf;
    theta_ii /= tf;
    theta_jj /= tf;

    let pi_hat: f64 = pi_mat.sum();
    let mut sum_corr = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = sd[i] * sd[j];
            if d > 0.0 {
                sum_corr += sample[[i, j]] / d;
            }
            count += 1;
        }
    }
    let rbar = if count > 0 { sum_corr / count as f64 } else { 0.0 };

    let mut rho_hat: f64 = (0..n).map(|i| pi_mat[[i, i]]).sum();
    for i in 0..n {
        for j in 0..n {
            if i != j && sd[i] > 0.0 && sd[j] > 0.0 {
                rho_hat += rbar / 2.0
                    * (sd[j] / sd[i] * theta_ii[[i, j]] + sd[i] / sd[j] * theta_jj[[i, j]]);
            }
        }
    }

    let mut gamma_hat = 0.0;
    for i in 0..n {
        for j in 0..n {
            let diff = target[[i, j]] - sample[[i, j]];
            gamma_hat += diff * diff;
        }
    }

    let scale = sample.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
    if gamma_hat <= 1e-14 * scale {
        return (0.0, true);
    }
    let kappa = (pi_hat - rho_hat) / gamma_hat;
    ((kappa / tf).clamp(0.0, 1.0), false)
}

/// Shrinkage covariance delta*F + (1-delta)*Sigma_hat with the constant
/// correlation target F.
pub fn shrinkage_covariance(
    returns: &ArrayView2<f64>,
    intensity: ShrinkageIntensity,
) -> Result<CovarianceEstimate, RiskError> {
    let (t, n) = returns.dim();
    if n < 2 || t <= n {
        return Err(RiskError::InsufficientData { got: t, need: n + 1 });
    }
    if let ShrinkageIntensity::Fixed(d) = intensity {
        if !(0.0..=1.0).contains(&d) {
            return Err(RiskError::InvalidShrinkage(d));
        }
    }
    let sample = sample_covariance(returns)?.matrix;
    let target = constant_correlation_target(&sample);
    let (delta, auto, degenerate_fallback) = match intensity {
        ShrinkageIntensity::Fixed(d) => (d, false, false),
        ShrinkageIntensity::Auto => {
            let (d, fellback) = ledoit_wolf_intensity(returns, &sample, &target);
            (d, true, fellback)
        }
    };
    let matrix = &target * delta + &sample * (1.0 - delta);
    Ok(CovarianceEstimate {
        matrix,
        kind: CovKind::Shrinkage { delta, auto, degenerate_fallback },
    })
}

/// Empirical quantile with linear interpolation between order statistics at
/// positions (i - 0.5)/N, clamped at the extremes. The convention is locked
/// by golden tests so backtests reproduce bit-for-bit.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    let k = p * n as f64 - 0.5;
    if k <= 0.0 {
        return sorted[0];
    }
    if k >= (n - 1) as f64 {
        return sorted[n - 1];
    }
    let i = k.floor() as usize;
    let frac = k - i as f64;
    sorted[i] + frac * (sorted[i + 1] - sorted[i])
}

/// Historical VaR and CVaR at confidence level `r`: VaR is the negated
/// empirical r-quantile, CVaR the negated mean of observations at or below
/// that quantile.
pub fn historical_var_cvar(x: &[f64], r: f64) -> Result<(f64, f64), RiskError> {
    if !(r > 0.0 && r <= 0.5) {
        return Err(RiskError::InvalidConfidenceLevel(r));
    }
    let need = (1.0 / r).ceil() as usize;
    if x.len() < need {
        return Err(RiskError::InsufficientData { got: x.len(), need });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(RiskError::NonFinite);
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = empirical_quantile(&sorted, r);
    let var = -q;
    let tail: Vec<f64> = sorted.iter().copied().take_while(|&v| v <= q).collect();
    let cvar = -tail.iter().sum::<f64>() / tail.len() as f64;
    Ok((var, cvar))
}

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn std_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Second-order Cornish-Fisher quantile adjustment of the standard normal
/// r-quantile for skewness `s` and excess kurtosis `k`.
fn cornish_fisher_z(r: f64, s: f64, k: f64) -> f64 {
    let z = std_normal_quantile(r);
    z + (z * z - 1.0) * s / 6.0 + (z * z * z - 3.0 * z) * k / 24.0
        - (2.0 * z * z * z - 5.0 * z) * s * s / 36.0
}

/// Modified VaR: -(mu + sigma * z_cf) with the Cornish-Fisher quantile.
pub fn cornish_fisher_var(
    mu: f64,
    sigma: f64,
    skew: f64,
    exkurt: f64,
    r: f64,
) -> Result<f64, RiskError> {
    if !(sigma > 0.0) {
        return Err(RiskError::NonPositiveScale(sigma));
    }
    if !(r > 0.0 && r <= 0.5) {
        return Err(RiskError::InvalidConfidenceLevel(r));
    }
    Ok(-(mu + sigma * cornish_fisher_z(r, skew, exkurt)))
}

/// Modified expected shortfall: the Edgeworth tail expectation below the
/// Cornish-Fisher quantile. With He the probabilists' Hermite polynomials,
///
/// ```text
/// E[Z | Z <= g] = -(phi(g)/r) [ 1 + S/6 g^3 + K/24 (g^4 - 2g^2 - 1)
///                               + S^2/72 (g^6 - 9g^4 + 9g^2 + 3) ]
/// ```
///
/// which reduces to the Gaussian shortfall phi(z)/r when S = K = 0.
pub fn modified_cvar(
    mu: f64,
    sigma: f64,
    skew: f64,
    exkurt: f64,
    r: f64,
) -> Result<f64, RiskError> {
    if !(sigma > 0.0) {
        return Err(RiskError::NonPositiveScale(sigma));
    }
    if !(r > 0.0 && r <= 0.5) {
        return Err(RiskError::InvalidConfidenceLevel(r));
    }
    let g = cornish_fisher_z(r, skew, exkurt);
    let g2 = g * g;
    let g4 = g2 * g2;
    let bracket = 1.0
        + skew / 6.0 * g * g2
        + exkurt / 24.0 * (g4 - 2.0 * g2 - 1.0)
        + skew * skew / 72.0 * (g2 * g4 - 9.0 * g4 + 9.0 * g2 + 3.0);
    let es_std = std_normal_pdf(g) / r * bracket;
    Ok(-(mu - sigma * es_std))
}

/// Plain standardized sample moments of a series: mean, the unbiased
/// standard deviation, and the (uncorrected) skewness and excess kurtosis.
#[derive(Debug, Clone, Copy)]
pub struct SampleMoments {
    pub mean: f64,
    pub sd: f64,
    pub skew: f64,
    pub excess_kurtosis: f64,
}

pub fn sample_moments(x: &[f64]) -> Result<SampleMoments, RiskError> {
    let n = x.len();
    if n < 2 {
        return Err(RiskError::InsufficientData { got: n, need: 2 });
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    let sd = (m2 * nf / (nf - 1.0)).sqrt();
    let (skew, excess_kurtosis) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Ok(SampleMoments { mean, sd, skew, excess_kurtosis })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use ndarray::array;

    #[test]
    fn identical_columns_give_rank_one_covariance() {
        let col = [0.01, -0.02, 0.005, 0.03, -0.01];
        let mut data = Array2::<f64>::zeros((5, 2));
        for (i, &v) in col.iter().enumerate() {
            data[[i, 0]] = v;
            data[[i, 1]] = v;
        }
        let cov = sample_covariance(&data.view()).unwrap().matrix;
        assert_relative_eq!(cov[[0, 0]], cov[[0, 1]], epsilon = 1e-15);
        assert_relative_eq!(cov[[0, 0]], cov[[1, 1]], epsilon = 1e-15);
    }

    #[test]
    fn constant_column_gives_zero_row() {
        let data = array![[0.01, 1.0], [-0.02, 1.0], [0.03, 1.0]];
        let cov = sample_covariance(&data.view()).unwrap().matrix;
        assert_eq!(cov[[1, 1]], 0.0);
        assert_eq!(cov[[0, 1]], 0.0);
    }

    #[test]
    fn sample_covariance_recovers_generator() {
        use crate::dists::Marginal;
        // Three correlated Gaussians via a fixed loading matrix.
        let n = 100_000;
        let z1 = Marginal::gaussian(0.0, 1.0).unwrap().sample(n, 1);
        let z2 = Marginal::gaussian(0.0, 1.0).unwrap().sample(n, 2);
        let z3 = Marginal::gaussian(0.0, 1.0).unwrap().sample(n, 3);
        let mut data = Array2::<f64>::zeros((n, 3));
        for i in 0..n {
            data[[i, 0]] = z1[i];
            data[[i, 1]] = 0.5 * z1[i] + 0.8 * z2[i];
            data[[i, 2]] = 0.2 * z1[i] - 0.3 * z2[i] + 0.9 * z3[i];
        }
        let truth: Array2<f64> = array![
            [1.0, 0.5, 0.2],
            [0.5, 0.89, -0.14],
            [0.2, -0.14, 0.94],
        ];
        let cov = sample_covariance(&data.view()).unwrap().matrix;
        for i in 0..3 {
            for j in 0..3 {
                let tol = 0.01 * (truth[[i, i]] * truth[[j, j]]).sqrt();
                assert_abs_diff_eq!(cov[[i, j]], truth[[i, j]], epsilon = tol);
            }
        }
    }

    #[test]
    fn shrinkage_endpoints_match_sample_and_target() {
        let data = array![
            [0.01, 0.002, -0.01],
            [-0.02, 0.01, 0.015],
            [0.005, -0.004, 0.02],
            [0.03, 0.007, -0.005],
            [-0.01, 0.001, 0.012]
        ];
        let s = sample_covariance(&data.view()).unwrap().matrix;
        let zero = shrinkage_covariance(&data.view(), ShrinkageIntensity::Fixed(0.0)).unwrap();
        assert_abs_diff_eq!(
            (&zero.matrix - &s).iter().map(|v| v.abs()).fold(0.0, f64::max),
            0.0,
            epsilon = 1e-15
        );
        let one = shrinkage_covariance(&data.view(), ShrinkageIntensity::Fixed(1.0)).unwrap();
        // All off-diagonal correlations in the full-shrinkage matrix agree.
        let sd: Vec<f64> = (0..3).map(|i| one.matrix[[i, i]].sqrt()).collect();
        let c01 = one.matrix[[0, 1]] / (sd[0] * sd[1]);
        let c02 = one.matrix[[0, 2]] / (sd[0] * sd[2]);
        let c12 = one.matrix[[1, 2]] / (sd[1] * sd[2]);
        assert_relative_eq!(c01, c02, epsilon = 1e-12);
        assert_relative_eq!(c01, c12, epsilon = 1e-12);
    }

    #[test]
    fn shrinkage_is_affine_in_delta() {
        let data = array![
            [0.01, 0.002, -0.01],
            [-0.02, 0.01, 0.015],
            [0.005, -0.004, 0.02],
            [0.03, 0.007, -0.005],
            [-0.011, 0.003, 0.009]
        ];
        let m0 = shrinkage_covariance(&data.view(), ShrinkageIntensity::Fixed(0.0)).unwrap().matrix;
        let m1 = shrinkage_covariance(&data.view(), ShrinkageIntensity::Fixed(1.0)).unwrap().matrix;
        for &d in &[0.2, 0.4, 0.6, 0.8] {
            let md = shrinkage_covariance(&data.view(), ShrinkageIntensity::Fixed(d)).unwrap().matrix;
            let blend = &m1 * d + &m0 * (1.0 - d);
            for (a, b) in md.iter().zip(blend.iter()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn auto_shrinkage_beats_sample_under_constant_correlation_truth() {
        use crate::dists::Marginal;
        use rand::SeedableRng;
        // True covariance: constant correlation 0.3, distinct variances.
        let n_assets = 10;
        let t = 60;
        let rho = 0.3;
        let sds: Vec<f64> = (0..n_assets).map(|i| 0.01 + 0.002 * i as f64).collect();
        let mut truth = Array2::<f64>::zeros((n_assets, n_assets));
        for i in 0..n_assets {
            for j in 0..n_assets {
                truth[[i, j]] = if i == j { sds[i] * sds[i] } else { rho * sds[i] * sds[j] };
            }
        }
        let g = Marginal::gaussian(0.0, 1.0).unwrap();
        let mut wins = 0;
        let panels = 100;
        for rep in 0..panels {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + rep);
            // Factor representation of constant correlation: sqrt(rho) F + sqrt(1-rho) e_i.
            let mut data = Array2::<f64>::zeros((t, n_assets));
            for row in 0..t {
                let f = g.draw(&mut rng);
                for (col, sd) in sds.iter().enumerate() {
                    let e = g.draw(&mut rng);
                    data[[row, col]] = sd * (rho.sqrt() * f + (1.0 - rho).sqrt() * e);
                }
            }
            let s = sample_covariance(&data.view()).unwrap().matrix;
            let lw = shrinkage_covariance(&data.view(), ShrinkageIntensity::Auto).unwrap().matrix;
            let frob = |m: &Array2<f64>| {
                m.iter().zip(truth.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
            };
            if frob(&lw) < frob(&s) {
                wins += 1;
            }
        }
        assert!(wins > 80, "shrinkage beat sample on only {wins}/{panels} panels");
    }

    #[test]
    fn auto_delta_stays_in_unit_interval() {
        use crate::dists::Marginal;
        let xs = Marginal::gaussian(0.0, 0.02).unwrap().sample(50 * 4, 3);
        let data = Array2::from_shape_vec((50, 4), xs).unwrap();
        let est = shrinkage_covariance(&data.view(), ShrinkageIntensity::Auto).unwrap();
        match est.kind {
            CovKind::Shrinkage { delta, auto, .. } => {
                assert!(auto);
                assert!((0.0..=1.0).contains(&delta), "delta {delta}");
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn historical_var_cvar_golden() {
        // 20 values: -10, -1, 0, 1, ..., 17. At r = 0.05 the (i-0.5)/N
        // convention interpolates halfway between the two smallest.
        let mut x: Vec<f64> = vec![-10.0, -1.0];
        x.extend((0..18).map(|i| i as f64));
        let (var, cvar) = historical_var_cvar(&x, 0.05).unwrap();
        assert_abs_diff_eq!(var, 5.5, epsilon = 1e-12);
        assert_abs_diff_eq!(cvar, 10.0, epsilon = 1e-12);
        assert!(cvar >= var);
    }

    #[test]
    fn all_positive_returns_give_negative_var() {
        let x: Vec<f64> = (1..=40).map(|i| 0.001 * i as f64).collect();
        let (var, cvar) = historical_var_cvar(&x, 0.05).unwrap();
        assert!(var < 0.0);
        assert!(cvar >= var);
    }

    #[test]
    fn cornish_fisher_gaussian_reduction() {
        let v = cornish_fisher_var(0.0, 1.0, 0.0, 0.0, 0.05).unwrap();
        assert_abs_diff_eq!(v, 1.6448536269514729, epsilon = 1e-10);
        let v2 = cornish_fisher_var(0.01, 2.0, 0.0, 0.0, 0.05).unwrap();
        assert_abs_diff_eq!(v2, -(0.01 - 2.0 * 1.6448536269514729), epsilon = 1e-10);
    }

    #[test]
    fn cornish_fisher_frozen_skewed_case() {
        // mu=0, sigma=1, S=-0.5, K=3, r=0.05; locked by direct evaluation of
        // the expansion (cross-checked against an independent evaluation).
        let v = cornish_fisher_var(0.0, 1.0, -0.5, 3.0, 0.05).unwrap();
        assert_abs_diff_eq!(v, 1.7217443293266212, epsilon = 1e-12);
    }

    #[test]
    fn kurtosis_sign_flips_at_sqrt_three_quantile() {
        // d(VaR)/dK has the sign of -(z^3 - 3z): at r = 5% the normal
        // quantile satisfies |z| < sqrt(3), so extra kurtosis pulls the
        // Cornish-Fisher quantile toward the center and lowers VaR; deeper
        // in the tail (r = 1%, |z| > sqrt(3)) it raises VaR.
        let lo = cornish_fisher_var(0.0, 1.0, -0.5, 2.0, 0.05).unwrap();
        let hi = cornish_fisher_var(0.0, 1.0, -0.5, 4.0, 0.05).unwrap();
        assert!(hi < lo);
        let lo = cornish_fisher_var(0.0, 1.0, -0.5, 2.0, 0.01).unwrap();
        let hi = cornish_fisher_var(0.0, 1.0, -0.5, 4.0, 0.01).unwrap();
        assert!(hi > lo);
    }

    #[test]
    fn modified_cvar_gaussian_reduction() {
        let v = modified_cvar(0.0, 1.0, 0.0, 0.0, 0.05).unwrap();
        assert_abs_diff_eq!(v, 2.0627128075074253, epsilon = 1e-10);
    }

    #[test]
    fn modified_cvar_matches_edgeworth_quadrature() {
        // Independent oracle: integrate z times the Edgeworth density below
        // the Cornish-Fisher quantile and divide by r.
        use crate::dists::{integrate, QuadratureSpec};
        let (s, k, r) = (-0.4, 1.5, 0.05);
        let g = cornish_fisher_z(r, s, k);
        let spec = QuadratureSpec { abs_tol: 1e-12, ..Default::default() };
        let edgeworth = |z: f64| {
            let he3 = z * z * z - 3.0 * z;
            let he4 = z * z * z * z - 6.0 * z * z + 3.0;
            let he6 = z.powi(6) - 15.0 * z.powi(4) + 45.0 * z * z - 15.0;
            std_normal_pdf(z) * (1.0 + s / 6.0 * he3 + k / 24.0 * he4 + s * s / 72.0 * he6)
        };
        let tail = integrate(|z| z * edgeworth(z), -40.0, g, &spec).unwrap();
        let oracle = -(0.0 - 1.0 * (-tail / r));
        let v = modified_cvar(0.0, 1.0, s, k, r).unwrap();
        assert_abs_diff_eq!(v, oracle, epsilon = 1e-9);
    }

    #[test]
    fn modified_cvar_dominates_var_on_mild_grid() {
        for s in [-0.6, -0.3, 0.0, 0.3] {
            for k in [0.0, 1.0, 2.0, 4.0] {
                let var = cornish_fisher_var(0.0, 1.0, s, k, 0.05).unwrap();
                let es = modified_cvar(0.0, 1.0, s, k, 0.05).unwrap();
                assert!(es >= var, "violation at s={s} k={k}: es={es} var={var}");
            }
        }
    }

    #[test]
    fn expansions_are_translation_covariant_and_homogeneous() {
        let (s, k, r) = (-0.3, 2.0, 0.05);
        let base_var = cornish_fisher_var(0.0, 1.0, s, k, r).unwrap();
        let base_es = modified_cvar(0.0, 1.0, s, k, r).unwrap();
        for &(mu, sigma) in &[(0.01, 2.0), (-0.03, 0.5), (0.2, 3.5)] {
            let v = cornish_fisher_var(mu, sigma, s, k, r).unwrap();
            assert_abs_diff_eq!(v, sigma * base_var - mu, epsilon = 1e-12);
            let e = modified_cvar(mu, sigma, s, k, r).unwrap();
            assert_abs_diff_eq!(e, sigma * base_es - mu, epsilon = 1e-12);
        }
    }

    #[test]
    fn moments_of_known_series() {
        let m = sample_moments(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(m.mean, 2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(m.sd, (5.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(m.skew, 0.0, epsilon = 1e-12);
    }
}

//! Exponential Rényi entropy: plug-in oracle evaluation from a density, the
//! overlapping m-spacings sample estimator family, asymptotic bias
//! correction, and the order-zero / order-infinity limit cases.
//!
//! The estimator of order `alpha` with spacing width `m` on a sorted sample
//! of size `N` is
//!
//! ```text
//! ( 1/(N-m) * sum_i ( (N+1)/m * (x[i+m] - x[i]) )^(1-alpha) )^(1/(1-alpha))
//! ```
//!
//! with the order-1 (Shannon) case taken through the logarithmic form. The
//! order-1 estimator carries a distribution-free asymptotic bias of
//! `digamma(m) - ln m` in log units; [`RenyiParams::bias_correct`] removes it
//! by scaling with `m / e^(digamma(m))`.

use statrs::function::gamma::digamma;
use thiserror::Error;

use crate::dists::quad::{integrate_with_tails, QuadError, QuadratureSpec};
use crate::dists::Marginal;

/// Orders closer to 1 than this are dispatched to the Shannon log-form; the
/// power form is numerically unstable near 1.
pub const SHANNON_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Error)]
pub enum EntropyError {
    #[error("order alpha must be non-negative, got {0}")]
    NegativeOrder(f64),
    #[error("spacing width m={m} invalid for sample of size {n} (need 1 <= m <= n-1)")]
    InvalidSpacing { m: usize, n: usize },
    #[error("sample too small: {n} values, need at least {need}")]
    SampleTooSmall { n: usize, need: usize },
    #[error("sample contains non-finite values")]
    NonFiniteSample,
    #[error("degenerate sample: zero range")]
    DegenerateSample,
    #[error("bias correction is defined for alpha = 1 only")]
    BiasCorrectRequiresShannon,
    #[error("entropy integral diverges")]
    Divergent,
    #[error("density supremum is not positive")]
    DegenerateDensity,
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// Parameters of one estimator evaluation.
#[derive(Debug, Clone, Copy)]
pub struct RenyiParams {
    /// Entropy order, >= 0.
    pub alpha: f64,
    /// Spacing width, 1 <= m < N.
    pub m: usize,
    /// Remove the order-1 asymptotic bias. Off by default: the bias is a
    /// constant shift in log units, so the minimizing weights are unaffected.
    pub bias_correct: bool,
}

impl RenyiParams {
    pub fn new(alpha: f64, m: usize) -> Self {
        Self { alpha, m, bias_correct: false }
    }

    pub fn with_bias_correction(alpha: f64, m: usize) -> Self {
        Self { alpha, m, bias_correct: true }
    }
}

/// Default spacing width: ceil(N^(2/3)), the value used throughout the
/// empirical backtests.
pub fn default_m(n: usize) -> usize {
    ((n as f64).powf(2.0 / 3.0).ceil() as usize).clamp(1, n.saturating_sub(1).max(1))
}

/// `digamma(m) - ln m`: the asymptotic log-domain bias of the order-1
/// estimator at fixed spacing width. Always negative, vanishing as m grows.
pub fn asymptotic_bias(m: usize) -> f64 {
    let m = m as f64;
    digamma(m) - m.ln()
}

fn validate_sample(values: &[f64], m: usize) -> Result<(), EntropyError> {
    let n = values.len();
    if n < 2 {
        return Err(EntropyError::SampleTooSmall { n, need: 2 });
    }
    if m < 1 || m >= n {
        return Err(EntropyError::InvalidSpacing { m, n });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(EntropyError::NonFiniteSample);
    }
    Ok(())
}

/// Sorts and resolves exact ties with a deterministic jitter of
/// `1e-12 * range`, so spacings are strictly positive on real data where
/// duplicate values occur. Continuous samples without ties pass through
/// unchanged.
fn sorted_with_tie_jitter(values: &[f64]) -> Result<Vec<f64>, EntropyError> {
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let range = xs[xs.len() - 1] - xs[0];
    if range <= 0.0 {
        return Err(EntropyError::DegenerateSample);
    }
    let eps = 1e-12 * range;
    for i in 1..xs.len() {
        if xs[i] <= xs[i - 1] {
            let mut bumped = xs[i - 1] + eps;
            if bumped <= xs[i - 1] {
                bumped = xs[i - 1] + xs[i - 1].abs() * 1e-15 + f64::MIN_POSITIVE;
            }
            xs[i] = bumped;
        }
    }
    Ok(xs)
}

/// m-spacings estimate on a sample in arbitrary order. Sorts internally.
pub fn m_spacings_estimate(values: &[f64], p: &RenyiParams) -> Result<f64, EntropyError> {
    validate_sample(values, p.m)?;
    let xs = sorted_with_tie_jitter(values)?;
    m_spacings_estimate_sorted(&xs, p)
}

/// m-spacings estimate on an already ascending sample with strictly positive
/// range. Lets callers that sweep many (alpha, m) pairs sort once.
pub fn m_spacings_estimate_sorted(xs: &[f64], p: &RenyiParams) -> Result<f64, EntropyError> {
    let n = xs.len();
    debug_assert!(xs.windows(2).all(|w| w[0] <= w[1]), "input must be ascending");
    validate_sample(xs, p.m)?;
    if p.alpha < 0.0 {
        return Err(EntropyError::NegativeOrder(p.alpha));
    }
    let shannon = (p.alpha - 1.0).abs() < SHANNON_EPS;
    if p.bias_correct && !shannon {
        return Err(EntropyError::BiasCorrectRequiresShannon);
    }
    // The order-0 width-1 case telescopes; evaluating it directly keeps the
    // identity with `h0_estimate` exact in floating point.
    if !shannon && p.alpha == 0.0 && p.m == 1 {
        return h0_estimate(xs);
    }
    let m = p.m;
    let scale = (n as f64 + 1.0) / m as f64;
    let count = (n - m) as f64;
    if shannon {
        let mut acc = 0.0;
        for i in 0..(n - m) {
            let spacing = xs[i + m] - xs[i];
            if spacing <= 0.0 {
                return Err(EntropyError::DegenerateSample);
            }
            acc += (scale * spacing).ln();
        }
        let mut est = (acc / count).exp();
        if p.bias_correct {
            est *= m as f64 / digamma(m as f64).exp();
        }
        Ok(est)
    } else {
        let power = 1.0 - p.alpha;
        let mut acc = 0.0;
        for i in 0..(n - m) {
            let spacing = xs[i + m] - xs[i];
            if spacing <= 0.0 && p.alpha > 1.0 {
                return Err(EntropyError::DegenerateSample);
            }
            acc += (scale * spacing).powf(power);
        }
        Ok((acc / count).powf(1.0 / power))
    }
}

/// Width-1 estimator; identical to [`m_spacings_estimate`] with m = 1.
pub fn one_spacing_estimate(values: &[f64], alpha: f64) -> Result<f64, EntropyError> {
    m_spacings_estimate(values, &RenyiParams::new(alpha, 1))
}

/// Order-0 support-measure estimate `(N+1)/(N-1) * (max - min)`; the
/// telescoped width-1 order-0 estimator.
pub fn h0_estimate(values: &[f64]) -> Result<f64, EntropyError> {
    let n = values.len();
    if n < 2 {
        return Err(EntropyError::SampleTooSmall { n, need: 2 });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(EntropyError::NonFiniteSample);
    }
    let mut lo = values[0];
    let mut hi = values[0];
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((n as f64 + 1.0) / (n as f64 - 1.0) * (hi - lo))
}

/// Exponential Rényi entropy of a density by quadrature:
/// `(∫ f^alpha)^(1/(1-alpha))`, with order 1 routed through
/// `exp(-∫ f ln f)` and order 0 through the support measure.
///
/// `core` is a finite interval carrying central mass (an interquartile
/// window); integration extends outward until the tails are resolved, so
/// non-integrable cases (order 0 with unbounded support) surface as
/// [`EntropyError::Divergent`].
pub fn exp_renyi_oracle<F: Fn(f64) -> f64>(
    f: F,
    core: (f64, f64),
    alpha: f64,
    spec: &QuadratureSpec,
) -> Result<f64, EntropyError> {
    if alpha < 0.0 {
        return Err(EntropyError::NegativeOrder(alpha));
    }
    let map_div = |e: QuadError| match e {
        QuadError::Divergent { .. } => EntropyError::Divergent,
        other => EntropyError::Quadrature(other),
    };
    if (alpha - 1.0).abs() < SHANNON_EPS {
        let integrand = |x: f64| {
            let y = f(x);
            if y > 0.0 {
                -y * y.ln()
            } else {
                0.0
            }
        };
        let h = integrate_with_tails(integrand, core.0, core.1, spec).map_err(map_div)?;
        return Ok(h.exp());
    }
    if alpha == 0.0 {
        let indicator = |x: f64| if f(x) > 0.0 { 1.0 } else { 0.0 };
        return integrate_with_tails(indicator, core.0, core.1, spec).map_err(map_div);
    }
    let integrand = |x: f64| {
        let y = f(x);
        if y > 0.0 {
            y.powf(alpha)
        } else {
            0.0
        }
    };
    let i = integrate_with_tails(integrand, core.0, core.1, spec).map_err(map_div)?;
    if !(i > 0.0 && i.is_finite()) {
        return Err(EntropyError::Divergent);
    }
    Ok(i.powf(1.0 / (1.0 - alpha)))
}

/// Oracle evaluation for an analytic marginal.
///
/// Order 0 is answered from the marginal's known support: the exact Lebesgue
/// measure when bounded, a divergence error otherwise. (A bare density
/// callable cannot decide this: any density in f64 underflows to zero far
/// enough out, so its numerical support is always bounded.)
pub fn marginal_exp_renyi(
    m: &Marginal,
    alpha: f64,
    spec: &QuadratureSpec,
) -> Result<f64, EntropyError> {
    if alpha == 0.0 {
        let (lo, hi) = m.support();
        if lo.is_infinite() || hi.is_infinite() {
            return Err(EntropyError::Divergent);
        }
        return Ok(hi - lo);
    }
    exp_renyi_oracle(|x| m.pdf(x), m.central_window(), alpha, spec)
}

/// Order-infinity limit `1 / sup f`, with the supremum located by grid
/// search over a widened window plus golden-section refinement.
pub fn h_infinity_oracle<F: Fn(f64) -> f64>(
    f: F,
    core: (f64, f64),
) -> Result<f64, EntropyError> {
    let width = core.1 - core.0;
    if !(width > 0.0 && width.is_finite()) {
        return Err(EntropyError::DegenerateDensity);
    }
    let lo = core.0 - 8.0 * width;
    let hi = core.1 + 8.0 * width;
    const GRID: usize = 4096;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=GRID {
        let x = lo + (hi - lo) * i as f64 / GRID as f64;
        let y = f(x);
        if y > best {
            best = y;
            best_i = i;
        }
    }
    if !(best > 0.0) {
        return Err(EntropyError::DegenerateDensity);
    }
    let step = (hi - lo) / GRID as f64;
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    // Golden-section maximization on the bracketing interval.
    let inv_phi = 0.6180339887498949;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-13 * (1.0 + a.abs()) {
            break;
        }
    }
    let sup = best.max(fc).max(fd);
    if !(sup > 0.0 && sup.is_finite()) {
        return Err(EntropyError::DegenerateDensity);
    }
    Ok(1.0 / sup)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dists::{Marginal, QuadratureSpec};
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const EULER_GAMMA: f64 = 0.5772156649015329;

    #[test]
    fn oracle_matches_gaussian_closed_form() {
        let spec = QuadratureSpec::default();
        let g = Marginal::gaussian(0.0, 0.2).unwrap();
        let v = marginal_exp_renyi(&g, 0.5, &spec).unwrap();
        assert_abs_diff_eq!(v, 1.0026513098524001, epsilon = 1e-6);
        let v1 = marginal_exp_renyi(&g, 1.0, &spec).unwrap();
        assert_abs_diff_eq!(v1, g.closed_form_entropy(1.0).unwrap(), epsilon = 1e-6);
    }

    #[test]
    fn oracle_on_uniform_is_one_for_every_order() {
        let spec = QuadratureSpec::default();
        let u = Marginal::uniform(0.0, 1.0).unwrap();
        for alpha in [0.0, 0.3, 0.5, 1.0, 2.0, 5.0] {
            let v = marginal_exp_renyi(&u, alpha, &spec).unwrap();
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-6);
        }
    }

    #[test]
    fn oracle_diverges_at_order_zero_on_unbounded_support() {
        let spec = QuadratureSpec::default();
        let g = Marginal::gaussian(0.0, 1.0).unwrap();
        assert!(matches!(marginal_exp_renyi(&g, 0.0, &spec), Err(EntropyError::Divergent)));
    }

    #[test]
    fn oracle_order_zero_recovers_bounded_support_measure() {
        let spec = QuadratureSpec::default();
        let u = Marginal::uniform(-1.5, 2.0).unwrap();
        let v = marginal_exp_renyi(&u, 0.0, &spec).unwrap();
        assert_abs_diff_eq!(v, 3.5, epsilon = 1e-6);
    }

    #[test]
    fn oracle_is_nonincreasing_in_alpha() {
        let spec = QuadratureSpec::default();
        for m in [
            Marginal::gaussian(0.0, 0.7).unwrap(),
            Marginal::student_t(0.0, 0.3, 10.0).unwrap(),
        ] {
            let grid = [0.2, 0.5, 0.7, 1.0, 1.5, 2.0];
            let vals: Vec<f64> =
                grid.iter().map(|&a| marginal_exp_renyi(&m, a, &spec).unwrap()).collect();
            for w in vals.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "not non-increasing: {vals:?}");
            }
        }
    }

    #[test]
    fn levy_closed_form_matches_quadrature_oracle() {
        // The order-1 Lévy value is fixed from the density itself; the
        // quadrature oracle confirms the constant.
        let spec = QuadratureSpec { abs_tol: 1e-9, ..Default::default() };
        let levy = Marginal::levy(0.0, 1.0).unwrap();
        let oracle = marginal_exp_renyi(&levy, 1.0, &spec).unwrap();
        assert_relative_eq!(oracle, levy.closed_form_entropy(1.0).unwrap(), epsilon = 1e-5);
    }

    #[test]
    fn one_spacing_hand_evaluated_two_point_sample() {
        // N=2, alpha=0.5: ((3 * 1)^0.5)^2 = 3.
        let v = one_spacing_estimate(&[0.0, 1.0], 0.5).unwrap();
        assert_abs_diff_eq!(v, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn h0_direct_formula_and_degenerate_cases() {
        assert_abs_diff_eq!(h0_estimate(&[0.0, 0.5, 1.0]).unwrap(), 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h0_estimate(&[3.0, 3.0]).unwrap(), 0.0, epsilon = 1e-15);
        assert!(h0_estimate(&[1.0]).is_err());
    }

    #[test]
    fn h0_matches_one_spacing_order_zero_exactly() {
        let xs = Marginal::uniform(0.0, 1.0).unwrap().sample(10_000, 77);
        let a = h0_estimate(&xs).unwrap();
        let b = m_spacings_estimate(&xs, &RenyiParams::new(0.0, 1)).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_abs_diff_eq!(a, 1.0, epsilon = 5e-3);
    }

    #[test]
    fn shannon_estimate_with_bias_correction_converges() {
        // m = sqrt(N): wide enough to kill variance, narrow enough that the
        // density-dependent smoothing bias (which grows with m/N) stays small.
        let xs = Marginal::gaussian(0.0, 1.0).unwrap().sample(1_000_000, 3);
        let est = m_spacings_estimate(&xs, &RenyiParams::with_bias_correction(1.0, 1000)).unwrap();
        let truth = (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt();
        assert!((est / truth - 1.0).abs() < 0.01, "est {est} truth {truth}");
    }

    #[test]
    fn fixed_m_log_gap_matches_digamma_law() {
        let xs = Marginal::gaussian(0.0, 1.0).unwrap().sample(100_000, 5);
        let est = m_spacings_estimate(&xs, &RenyiParams::new(1.0, 1)).unwrap();
        let truth = (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt();
        let gap = est.ln() - truth.ln();
        assert_abs_diff_eq!(gap, -EULER_GAMMA, epsilon = 0.02);
    }

    #[test]
    fn estimator_tracks_closed_form_at_sqrt_n() {
        let xs = Marginal::gaussian(0.0, 1.0).unwrap().sample(100_000, 11);
        let g = Marginal::gaussian(0.0, 1.0).unwrap();
        for alpha in [1.0, 2.0] {
            let est = m_spacings_estimate(&xs, &RenyiParams::new(alpha, 317)).unwrap();
            let truth = g.closed_form_entropy(alpha).unwrap();
            assert!((est / truth - 1.0).abs() < 0.02, "alpha {alpha}: {est} vs {truth}");
        }
    }

    /// Multiplicative finite-sample bias factor of the estimator at fixed
    /// (alpha, m, N), exact for the uniform law and, per the spacings
    /// machinery, distribution-free to first order:
    /// [Γ(m+1-a)/(Γ(m) m^{1-a})]^{1/(1-a)} · [(N+1)^{1-a} Γ(N+1)/Γ(N+2-a)]^{1/(1-a)}.
    fn small_m_bias_factor(alpha: f64, m: usize, n: usize) -> f64 {
        use statrs::function::gamma::ln_gamma;
        let (m, n) = (m as f64, n as f64);
        let p = 1.0 - alpha;
        let la = (ln_gamma(m + p) - ln_gamma(m) - p * m.ln()) / p;
        let lb = (p * (n + 1.0).ln() + ln_gamma(n + 1.0) - ln_gamma(n + 2.0 - alpha)) / p;
        (la + lb).exp()
    }

    #[test]
    fn small_m_bias_follows_distribution_free_law() {
        let n = 200_000;
        let u = Marginal::uniform(0.0, 1.0).unwrap().sample(n, 5);
        let g = Marginal::gaussian(0.0, 1.0).unwrap();
        let gs = g.sample(n, 5);
        for alpha in [0.3, 0.5] {
            for m in [1usize, 2, 5] {
                let pred = small_m_bias_factor(alpha, m, n);
                let eu = m_spacings_estimate(&u, &RenyiParams::new(alpha, m)).unwrap();
                assert!((eu / pred - 1.0).abs() < 5e-3, "uniform a={alpha} m={m}: {eu} vs {pred}");
            }
        }
        // Tailed densities converge to the same law, but slowly as alpha
        // drops; alpha = 0.5 is already settled at this sample size.
        for m in [1usize, 2, 5] {
            let pred = small_m_bias_factor(0.5, m, n);
            let eg = m_spacings_estimate(&gs, &RenyiParams::new(0.5, m)).unwrap();
            let ratio = eg / g.closed_form_entropy(0.5).unwrap();
            assert!((ratio / pred - 1.0).abs() < 1e-2, "gauss m={m}: {ratio} vs {pred}");
        }
    }

    #[test]
    fn estimator_oracle_cross_check_on_student_t() {
        let t = Marginal::student_t(0.0, 0.3, 10.0).unwrap();
        let spec = QuadratureSpec::default();
        let oracle = marginal_exp_renyi(&t, 0.7, &spec).unwrap();
        let xs = t.sample(1_000_000, 13);
        // m = N^{1/3}; small enough that the smoothing bias is inside 1%.
        let est = m_spacings_estimate(&xs, &RenyiParams::new(0.7, 100)).unwrap();
        assert!((est / oracle - 1.0).abs() < 0.01, "est {est} oracle {oracle}");
    }

    #[test]
    fn ties_are_resolved_deterministically() {
        let xs = [0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 2.0];
        let a = m_spacings_estimate(&xs, &RenyiParams::new(1.0, 2)).unwrap();
        let b = m_spacings_estimate(&xs, &RenyiParams::new(1.0, 2)).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(a.is_finite() && a > 0.0);
    }

    #[test]
    fn all_equal_sample_is_degenerate() {
        let xs = [2.0; 40];
        assert!(matches!(
            m_spacings_estimate(&xs, &RenyiParams::new(1.0, 3)),
            Err(EntropyError::DegenerateSample)
        ));
    }

    #[test]
    fn parameter_errors() {
        let xs = [0.0, 1.0, 2.0];
        assert!(matches!(
            m_spacings_estimate(&xs, &RenyiParams::new(1.0, 3)),
            Err(EntropyError::InvalidSpacing { .. })
        ));
        assert!(m_spacings_estimate(&xs, &RenyiParams::new(-0.5, 1)).is_err());
        assert!(matches!(
            m_spacings_estimate(&xs, &RenyiParams::with_bias_correction(0.5, 1)),
            Err(EntropyError::BiasCorrectRequiresShannon)
        ));
    }

    #[test]
    fn asymptotic_bias_identities() {
        assert_abs_diff_eq!(asymptotic_bias(1), -EULER_GAMMA, epsilon = 1e-12);
        assert_abs_diff_eq!(asymptotic_bias(2), 1.0 - EULER_GAMMA - 2f64.ln(), epsilon = 1e-12);
        assert!(asymptotic_bias(10_000) < 0.0);
        assert!(asymptotic_bias(10_000).abs() < 1e-4);
    }

    #[test]
    fn default_m_matches_empirical_choice() {
        assert_eq!(default_m(260), 41);
        assert_eq!(default_m(100_000), 2155);
    }

    #[test]
    fn oracle_vanishes_for_shrinking_scale() {
        // Deviation-measure behaviour: H(k + cX) = c H(X) -> 0 as c -> 0,
        // checked through the scaling identity on the oracle.
        let spec = QuadratureSpec::default();
        let g = Marginal::gaussian(0.3, 1.0).unwrap();
        let base = marginal_exp_renyi(&g, 0.7, &spec).unwrap();
        assert!(base > 0.0);
        for c in [1e-2, 1e-4] {
            let scaled = marginal_exp_renyi(&g.scaled(c).unwrap(), 0.7, &spec).unwrap();
            assert_relative_eq!(scaled, c * base, epsilon = 1e-6);
        }
    }

    #[test]
    fn h_infinity_on_known_densities() {
        let g = Marginal::gaussian(0.3, 1.7).unwrap();
        let v = h_infinity_oracle(|x| g.pdf(x), g.central_window()).unwrap();
        assert_relative_eq!(v, 1.7 * (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-8);

        let u = Marginal::uniform(0.0, 2.0).unwrap();
        let v = h_infinity_oracle(|x| u.pdf(x), u.central_window()).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-8);

        let t = Marginal::student_t(0.0, 0.3, 10.0).unwrap();
        let v = h_infinity_oracle(|x| t.pdf(x), t.central_window()).unwrap();
        assert_relative_eq!(v, 0.7709934104791476, epsilon = 1e-8);
    }
}

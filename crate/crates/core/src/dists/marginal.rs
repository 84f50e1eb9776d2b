//! Analytic univariate marginals: density, distribution function, quantile,
//! seeded sampling, and closed-form exponential Rényi entropy where known.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution as RandDistribution;
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::ln_gamma;

use super::quad::{integrate, integrate_with_tails, QuadratureSpec};
use super::DistError;

const SQRT_2PI: f64 = 2.5066282746310002;
/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.5772156649015329;

fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn std_normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Analytic univariate distribution. Parameters are in return units
/// (dimensionless per-period returns).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    Gaussian { mu: f64, sigma: f64 },
    /// Non-standardized Student-t: `mu + sigma * T(nu)`.
    StudentT { mu: f64, sigma: f64, nu: f64 },
    /// Location-scale-shape skew-normal; negative `shape` gives negative skew.
    SkewNormal { mu: f64, sigma: f64, shape: f64 },
    Levy { mu: f64, sigma: f64 },
    Uniform { a: f64, b: f64 },
    Exponential { rate: f64 },
}

impl Marginal {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self, DistError> {
        if !(sigma > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(DistError::InvalidMarginal("gaussian requires finite mu and sigma > 0"));
        }
        Ok(Self::Gaussian { mu, sigma })
    }

    pub fn student_t(mu: f64, sigma: f64, nu: f64) -> Result<Self, DistError> {
        if !(sigma > 0.0 && nu > 0.0 && mu.is_finite() && sigma.is_finite() && nu.is_finite()) {
            return Err(DistError::InvalidMarginal("student-t requires sigma > 0 and nu > 0"));
        }
        Ok(Self::StudentT { mu, sigma, nu })
    }

    pub fn skew_normal(mu: f64, sigma: f64, shape: f64) -> Result<Self, DistError> {
        if !(sigma > 0.0 && mu.is_finite() && sigma.is_finite() && shape.is_finite()) {
            return Err(DistError::InvalidMarginal("skew-normal requires sigma > 0"));
        }
        Ok(Self::SkewNormal { mu, sigma, shape })
    }

    pub fn levy(mu: f64, sigma: f64) -> Result<Self, DistError> {
        if !(sigma > 0.0 && mu.is_finite() && sigma.is_finite()) {
            return Err(DistError::InvalidMarginal("levy requires sigma > 0"));
        }
        Ok(Self::Levy { mu, sigma })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self, DistError> {
        if !(b > a && a.is_finite() && b.is_finite()) {
            return Err(DistError::InvalidMarginal("uniform requires b > a"));
        }
        Ok(Self::Uniform { a, b })
    }

    pub fn exponential(rate: f64) -> Result<Self, DistError> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(DistError::InvalidMarginal("exponential requires rate > 0"));
        }
        Ok(Self::Exponential { rate })
    }

    /// Probability density at `x`.
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mu, sigma } => std_normal_pdf((x - mu) / sigma) / sigma,
            Self::StudentT { mu, sigma, nu } => {
                let z = (x - mu) / sigma;
                let ln_c = ln_gamma(0.5 * (nu + 1.0))
                    - ln_gamma(0.5 * nu)
                    - 0.5 * (nu * std::f64::consts::PI).ln();
                (ln_c - 0.5 * (nu + 1.0) * (z * z / nu).ln_1p()).exp() / sigma
            }
            Self::SkewNormal { mu, sigma, shape } => {
                let z = (x - mu) / sigma;
                2.0 / sigma * std_normal_pdf(z) * std_normal_cdf(shape * z)
            }
            Self::Levy { mu, sigma } => {
                if x <= mu {
                    0.0
                } else {
                    let d = x - mu;
                    (sigma / (2.0 * std::f64::consts::PI)).sqrt()
                        * (-sigma / (2.0 * d)).exp()
                        / (d * d.sqrt())
                }
            }
            Self::Uniform { a, b } => {
                if x >= a && x <= b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            Self::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    rate * (-rate * x).exp()
                }
            }
        }
    }

    /// Cumulative distribution function at `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::Gaussian { mu, sigma } => std_normal_cdf((x - mu) / sigma),
            Self::StudentT { mu, sigma, nu } => {
                StudentsT::new(mu, sigma, nu).expect("validated").cdf(x)
            }
            Self::SkewNormal { mu, sigma, shape } => {
                let z = (x - mu) / sigma;
                (std_normal_cdf(z) - 2.0 * owen_t(z, shape)).clamp(0.0, 1.0)
            }
            Self::Levy { mu, sigma } => {
                if x <= mu {
                    0.0
                } else {
                    erfc((sigma / (2.0 * (x - mu))).sqrt())
                }
            }
            Self::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Self::Exponential { rate } => {
                if x < 0.0 {
                    0.0
                } else {
                    1.0 - (-rate * x).exp()
                }
            }
        }
    }

    /// Quantile function; `p` must lie in (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64, DistError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DistError::InvalidQuantileLevel(p));
        }
        Ok(match *self {
            Self::Gaussian { mu, sigma } => mu + sigma * std_normal_quantile(p),
            Self::StudentT { mu, sigma, nu } => {
                StudentsT::new(mu, sigma, nu).expect("validated").inverse_cdf(p)
            }
            Self::SkewNormal { mu, sigma, .. } => {
                // Bisection on the cdf; skew-normal tails are Gaussian-like so
                // +-60 sigma brackets far beyond any representable tail level.
                let (mut lo, mut hi) = (mu - 60.0 * sigma, mu + 60.0 * sigma);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo <= f64::EPSILON * (1.0 + mid.abs()) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            }
            Self::Levy { mu, sigma } => {
                let t = erfc_inv(p);
                mu + sigma / (2.0 * t * t)
            }
            Self::Uniform { a, b } => a + p * (b - a),
            Self::Exponential { rate } => -(-p).ln_1p() / rate,
        })
    }

    /// Natural support of the density, possibly unbounded.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Self::Gaussian { .. } | Self::StudentT { .. } | Self::SkewNormal { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            Self::Levy { mu, .. } => (mu, f64::INFINITY),
            Self::Uniform { a, b } => (a, b),
            Self::Exponential { .. } => (0.0, f64::INFINITY),
        }
    }

    /// Support clipped at symmetric extreme quantiles for quadrature.
    pub fn truncated_support(&self, spec: &QuadratureSpec) -> Result<(f64, f64), DistError> {
        let q = spec.tail_quantile;
        let (nat_lo, nat_hi) = self.support();
        let lo = self.quantile(q)?.max(nat_lo);
        let hi = self.quantile(1.0 - q)?.min(nat_hi);
        Ok((lo, hi))
    }

    /// Interquartile window; a compact interval always carrying central mass,
    /// used as the starting core for tail-extending quadrature.
    pub fn central_window(&self) -> (f64, f64) {
        let lo = self.quantile(0.25).expect("0.25 in range");
        let hi = self.quantile(0.75).expect("0.75 in range");
        (lo, hi)
    }

    /// One draw using the supplied generator.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Gaussian { mu, sigma } => {
                mu + sigma * rng.sample::<f64, _>(rand_distr::StandardNormal)
            }
            Self::StudentT { mu, sigma, nu } => {
                let t: f64 = rand_distr::StudentT::new(nu).expect("validated").sample(rng);
                mu + sigma * t
            }
            Self::SkewNormal { mu, sigma, shape } => {
                // Azzalini representation: delta|U0| + sqrt(1-delta^2) U1.
                let delta = shape / (1.0 + shape * shape).sqrt();
                let u0: f64 = rng.sample(rand_distr::StandardNormal);
                let u1: f64 = rng.sample(rand_distr::StandardNormal);
                mu + sigma * (delta * u0.abs() + (1.0 - delta * delta).sqrt() * u1)
            }
            Self::Levy { mu, sigma } => {
                // sigma / Z^2 for standard normal Z.
                let mut z: f64 = rng.sample(rand_distr::StandardNormal);
                while z == 0.0 {
                    z = rng.sample(rand_distr::StandardNormal);
                }
                mu + sigma / (z * z)
            }
            Self::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            Self::Exponential { rate } => rand_distr::Exp::new(rate).expect("validated").sample(rng),
        }
    }

    /// `count` i.i.d. draws, deterministic for a fixed seed (ChaCha8 stream).
    pub fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.draw(&mut rng)).collect()
    }

    /// Mean, where it exists.
    pub fn mean(&self) -> Option<f64> {
        match *self {
            Self::Gaussian { mu, .. } => Some(mu),
            Self::StudentT { mu, nu, .. } => (nu > 1.0).then_some(mu),
            Self::SkewNormal { mu, sigma, shape } => {
                let delta = shape / (1.0 + shape * shape).sqrt();
                Some(mu + sigma * delta * (2.0 / std::f64::consts::PI).sqrt())
            }
            Self::Levy { .. } => None,
            Self::Uniform { a, b } => Some(0.5 * (a + b)),
            Self::Exponential { rate } => Some(1.0 / rate),
        }
    }

    /// Variance, where it exists.
    pub fn variance(&self) -> Option<f64> {
        match *self {
            Self::Gaussian { sigma, .. } => Some(sigma * sigma),
            Self::StudentT { sigma, nu, .. } => {
                (nu > 2.0).then(|| sigma * sigma * nu / (nu - 2.0))
            }
            Self::SkewNormal { sigma, shape, .. } => {
                let delta = shape / (1.0 + shape * shape).sqrt();
                Some(sigma * sigma * (1.0 - 2.0 * delta * delta / std::f64::consts::PI))
            }
            Self::Levy { .. } => None,
            Self::Uniform { a, b } => Some((b - a) * (b - a) / 12.0),
            Self::Exponential { rate } => Some(1.0 / (rate * rate)),
        }
    }

    /// Full (non-excess) kurtosis, where it exists.
    pub fn kurtosis(&self) -> Option<f64> {
        match *self {
            Self::Gaussian { .. } => Some(3.0),
            Self::StudentT { nu, .. } => (nu > 4.0).then(|| 6.0 / (nu - 4.0) + 3.0),
            Self::Uniform { .. } => Some(1.8),
            Self::Exponential { .. } => Some(9.0),
            _ => None,
        }
    }

    /// Closed-form exponential Rényi entropy, where one is known:
    /// Gaussian, Uniform and Exponential for every order, Lévy at order 1.
    /// Absence is a value, not an error.
    pub fn closed_form_entropy(&self, alpha: f64) -> Option<f64> {
        if alpha < 0.0 {
            return None;
        }
        let shannon = (alpha - 1.0).abs() < 1e-9;
        match *self {
            Self::Gaussian { sigma, .. } => {
                if shannon {
                    // alpha -> 1 limit of alpha^{1/(2(1-alpha))} is e^{-1/2}.
                    Some(sigma * (2.0 * std::f64::consts::PI * std::f64::consts::E).sqrt())
                } else {
                    Some(sigma * SQRT_2PI / alpha.powf(0.5 / (1.0 - alpha)))
                }
            }
            Self::Uniform { a, b } => Some(b - a),
            Self::Exponential { rate } => {
                if shannon {
                    Some(std::f64::consts::E / rate)
                } else {
                    Some(1.0 / (rate * alpha.powf(1.0 / (1.0 - alpha))))
                }
            }
            Self::Levy { sigma, .. } => {
                // exp of the Shannon entropy of Levy(mu, sigma), derived from
                // the density: 4 sqrt(pi) e^{(1+3γ)/2} sigma. Known only at
                // order 1.
                shannon.then(|| {
                    sigma * 4.0
                        * std::f64::consts::PI.sqrt()
                        * ((1.0 + 3.0 * EULER_GAMMA) / 2.0).exp()
                })
            }
            _ => None,
        }
    }

    /// The law of c*X for c > 0; every family is closed under positive
    /// scaling (an exponential rate divides by c).
    pub fn scaled(&self, c: f64) -> Result<Self, DistError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(DistError::InvalidMarginal("scale factor must be positive"));
        }
        Ok(match *self {
            Self::Gaussian { mu, sigma } => Self::Gaussian { mu: c * mu, sigma: c * sigma },
            Self::StudentT { mu, sigma, nu } => {
                Self::StudentT { mu: c * mu, sigma: c * sigma, nu }
            }
            Self::SkewNormal { mu, sigma, shape } => {
                Self::SkewNormal { mu: c * mu, sigma: c * sigma, shape }
            }
            Self::Levy { mu, sigma } => Self::Levy { mu: c * mu, sigma: c * sigma },
            Self::Uniform { a, b } => Self::Uniform { a: c * a, b: c * b },
            Self::Exponential { rate } => Self::Exponential { rate: rate / c },
        })
    }

    /// Quadrature check that the density integrates to one; used by
    /// validation and tests. Starts from the interquartile window and sweeps
    /// outward, which also copes with the very heavy Lévy tail.
    pub fn normalization(&self, spec: &QuadratureSpec) -> Result<f64, DistError> {
        let (lo, hi) = self.central_window();
        Ok(integrate_with_tails(|x| self.pdf(x), lo, hi, spec)?)
    }
}

/// Owen's T function T(h, a) via its defining integral; it is what the
/// skew-normal distribution function needs.
fn owen_t(h: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if a < 0.0 {
        return -owen_t(h, -a);
    }
    let spec = QuadratureSpec { abs_tol: 1e-12, max_depth: 40, tail_quantile: 1e-9 };
    let h2 = h * h;
    let val = integrate(
        |x| (-0.5 * h2 * (1.0 + x * x)).exp() / (1.0 + x * x),
        0.0,
        a,
        &spec,
    )
    .unwrap_or(0.0);
    val / (2.0 * std::f64::consts::PI)
}

/// Kurtosis of an independent sum from component variances and full
/// kurtoses: (kx vx^2 + ky vy^2 + 6 vx vy) / (vx + vy)^2.
pub fn kurtosis_of_independent_sum(vx: f64, kx: f64, vy: f64, ky: f64) -> Result<f64, DistError> {
    if !(vx > 0.0 && vy > 0.0) {
        return Err(DistError::InvalidMarginal("variances must be positive"));
    }
    let s = vx + vy;
    Ok((kx * vx * vx + ky * vy * vy + 6.0 * vx * vy) / (s * s))
}

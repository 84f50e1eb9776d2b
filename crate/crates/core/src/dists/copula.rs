//! Bivariate Student-t copula sampling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution as RandDistribution;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{DistError, Marginal};

/// Dependence structure for paired draws.
#[derive(Debug, Clone, Copy)]
pub struct CopulaSpec {
    /// Degrees of freedom of the t copula.
    pub nu: f64,
    /// Copula correlation in [-1, 1].
    pub rho: f64,
    pub sample_count: usize,
}

impl CopulaSpec {
    pub fn student_t(nu: f64, rho: f64, sample_count: usize) -> Result<Self, DistError> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(DistError::InvalidMarginal("copula nu must be positive"));
        }
        if !(-1.0..=1.0).contains(&rho) {
            return Err(DistError::InvalidMarginal("copula rho must lie in [-1, 1]"));
        }
        if sample_count == 0 {
            return Err(DistError::InvalidMarginal("sample_count must be at least 1"));
        }
        Ok(Self { nu, rho, sample_count })
    }
}

/// Shared underlying randomness for copula draws, so the same draws can be
/// reused across several correlation values as in the convolution studies.
#[derive(Debug, Clone)]
pub struct CopulaDraws {
    z1: Vec<f64>,
    z2: Vec<f64>,
    chi2_over_nu: Vec<f64>,
}

impl CopulaDraws {
    pub fn generate(count: usize, nu: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = rand_distr::StandardNormal;
        let chi2 = rand_distr::Gamma::new(0.5 * nu, 2.0).expect("nu validated");
        let mut z1 = Vec::with_capacity(count);
        let mut z2 = Vec::with_capacity(count);
        let mut w = Vec::with_capacity(count);
        for _ in 0..count {
            z1.push(normal.sample(&mut rng));
            z2.push(normal.sample(&mut rng));
            w.push(chi2.sample(&mut rng) / nu);
        }
        Self { z1, z2, chi2_over_nu: w }
    }

    /// Copula-uniform pairs for a given correlation over the stored draws.
    pub fn uniforms(&self, nu: f64, rho: f64) -> Vec<(f64, f64)> {
        let t = StudentsT::new(0.0, 1.0, nu).expect("nu validated");
        let k = (1.0 - rho * rho).max(0.0).sqrt();
        self.z1
            .iter()
            .zip(&self.z2)
            .zip(&self.chi2_over_nu)
            .map(|((&a, &b), &w)| {
                let s = w.sqrt();
                let t1 = a / s;
                let t2 = (rho * a + k * b) / s;
                (t.cdf(t1), t.cdf(t2))
            })
            .collect()
    }
}

/// Draws (X, Y) with the given marginals linked by a bivariate t copula.
///
/// Deterministic for a fixed seed. The Lévy family has no practically
/// invertible place here and is rejected.
pub fn sample_copula(
    mx: &Marginal,
    my: &Marginal,
    spec: &CopulaSpec,
    seed: u64,
) -> Result<Vec<(f64, f64)>, DistError> {
    for m in [mx, my] {
        if matches!(m, Marginal::Levy { .. }) {
            return Err(DistError::UnsupportedMarginal("levy marginals are not supported in copula sampling"));
        }
    }
    let draws = CopulaDraws::generate(spec.sample_count, spec.nu, seed);
    let pairs = draws
        .uniforms(spec.nu, spec.rho)
        .into_iter()
        .map(|(u, v)| {
            let u = u.clamp(1e-15, 1.0 - 1e-15);
            let v = v.clamp(1e-15, 1.0 - 1e-15);
            Ok((mx.quantile(u)?, my.quantile(v)?))
        })
        .collect::<Result<Vec<_>, DistError>>()?;
    Ok(pairs)
}

//! Density of an independent sum by numerical convolution.

use super::quad::{integrate_lenient, QuadratureSpec};
use super::{DistError, Marginal};

/// Density of X + Y for independent marginals, evaluated pointwise as
/// ∫ f_X(t) f_Y(z - t) dt by adaptive Simpson over the overlap of the
/// truncated supports.
#[derive(Debug, Clone)]
pub struct ConvolvedDensity {
    x: Marginal,
    y: Marginal,
    spec: QuadratureSpec,
    x_window: (f64, f64),
    y_window: (f64, f64),
}

impl ConvolvedDensity {
    pub fn new(x: Marginal, y: Marginal, spec: QuadratureSpec) -> Result<Self, DistError> {
        spec.validate()?;
        let x_window = x.truncated_support(&spec)?;
        let y_window = y.truncated_support(&spec)?;
        Ok(Self { x, y, spec, x_window, y_window })
    }

    /// Support window of the sum implied by the truncated marginal windows.
    pub fn window(&self) -> (f64, f64) {
        (self.x_window.0 + self.y_window.0, self.x_window.1 + self.y_window.1)
    }

    /// Central interval for tail-extending quadrature over the sum.
    pub fn central_window(&self) -> (f64, f64) {
        let (xl, xh) = self.x.central_window();
        let (yl, yh) = self.y.central_window();
        (xl + yl, xh + yh)
    }

    /// Density of the sum at `z`. Interior integrand kinks (e.g. uniform
    /// edges) are accepted at their extrapolated value, which is why this is
    /// infallible; the normalization check below bounds the damage.
    pub fn eval(&self, z: f64) -> f64 {
        let lo = self.x_window.0.max(z - self.y_window.1);
        let hi = self.x_window.1.min(z - self.y_window.0);
        if lo >= hi {
            return 0.0;
        }
        integrate_lenient(&|t: f64| self.x.pdf(t) * self.y.pdf(z - t), lo, hi, &self.spec)
            .unwrap_or(0.0)
            .max(0.0)
    }

    /// Total mass over the truncated window; should be 1 within roughly ten
    /// times the quadrature tolerance.
    pub fn normalization(&self) -> Result<f64, DistError> {
        let (lo, hi) = self.window();
        Ok(super::quad::integrate(|z| self.eval(z), lo, hi, &self.spec)?)
    }
}

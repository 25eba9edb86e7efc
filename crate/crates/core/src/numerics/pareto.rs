//! Pareto distribution utilities: validation, inverse-transform sampling, and
//! closed-form partial moments of the form ∫ λᵏ dΠ(λ) over an interval.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pareto distribution with density α λ_mᵅ λ^(−α−1) on [λ_m, ∞).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoDist {
    /// Scale (minimum support point), > 0.
    pub scale: f64,
    /// Shape (tail index), > 0. Larger values mean thinner tails.
    pub shape: f64,
}

impl ParetoDist {
    pub fn new(scale: f64, shape: f64) -> Result<Self> {
        let dist = ParetoDist { scale, shape };
        dist.validate()?;
        Ok(dist)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::invalid(format!(
                "Pareto scale must be positive, got {}",
                self.scale
            )));
        }
        if !(self.shape > 0.0) || !self.shape.is_finite() {
            return Err(Error::invalid(format!(
                "Pareto shape must be positive, got {}",
                self.shape
            )));
        }
        Ok(())
    }

    /// CDF: 1 − (λ_m/x)^α for x ≥ λ_m, else 0.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.scale {
            0.0
        } else {
            1.0 - (self.scale / x).powf(self.shape)
        }
    }

    /// Survival function P(λ > x).
    pub fn survival(&self, x: f64) -> f64 {
        if x <= self.scale {
            1.0
        } else {
            (self.scale / x).powf(self.shape)
        }
    }

    /// Inverse-transform draw λ_m·u^(−1/α) with u uniform on (0, 1].
    ///
    /// Deterministic given the generator state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // gen() is in [0, 1); flip to (0, 1] so the power is always finite.
        let u: f64 = 1.0 - rng.gen::<f64>();
        self.scale * u.powf(-1.0 / self.shape)
    }

    /// Closed-form partial moment ∫ₐᵇ λᵏ · α λ_mᵅ λ^(−α−1) dλ.
    ///
    /// `upper` may be `f64::INFINITY`, in which case `power < shape` is required
    /// for convergence. The lower endpoint must lie inside the support.
    pub fn partial_moment(&self, power: f64, lower: f64, upper: f64) -> Result<f64> {
        if lower < self.scale {
            return Err(Error::Domain(format!(
                "partial moment lower endpoint {} is below the Pareto scale {}",
                lower, self.scale
            )));
        }
        if !(upper > lower) {
            return Err(Error::invalid(format!(
                "partial moment endpoints must satisfy upper > lower, got [{lower}, {upper}]"
            )));
        }
        let alpha = self.shape;
        let head = alpha * self.scale.powf(alpha);
        if upper.is_infinite() {
            if power >= alpha {
                return Err(Error::DivergentIntegral(format!(
                    "tail moment of order {} diverges for shape {}",
                    power, alpha
                )));
            }
            return Ok(head * lower.powf(power - alpha) / (alpha - power));
        }
        let eps = power - alpha;
        if eps == 0.0 {
            // Logarithmic limit of the power-law antiderivative.
            return Ok(head * (upper / lower).ln());
        }
        // a^ε − b^ε = −a^ε · expm1(ε·ln(b/a)); stable for ε near 0.
        let value = head * lower.powf(eps) * ((upper / lower).ln() * eps).exp_m1() / eps;
        Ok(value)
    }
}

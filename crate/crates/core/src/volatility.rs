//! Volatility functions of the lagged price.

use crate::error::{Error, Result};

/// Catalog of volatility functions v -> g(v).
///
/// Every public constructor enforces a positive floor on the represented
/// domain, so g cannot vanish on a (positive) price path and the market price
/// of risk stays well defined. The zero function is available only through
/// [`VolatilityFunction::engine_test_zero`], which exists for deterministic
/// engine tests and is rejected by the pricing entry points through the
/// degenerate-variance handling.
#[derive(Debug, Clone, PartialEq)]
pub enum VolatilityFunction {
    /// g(v) = sigma0.
    Constant { sigma0: f64 },
    /// g(v) = clamp(c0 + c1 * v, sigma_min, sigma_max).
    AffineClipped {
        c0: f64,
        c1: f64,
        sigma_min: f64,
        sigma_max: f64,
    },
    /// Piecewise-linear interpolation of (price, vol) points, constant beyond
    /// the first and last abscissae.
    Table { points: Vec<(f64, f64)> },
    /// g identically 0. Engine-test mode only.
    Zero,
}

impl VolatilityFunction {
    pub fn constant(sigma0: f64) -> Result<Self> {
        if !sigma0.is_finite() || sigma0 <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "constant volatility must be positive (got {sigma0})"
            )));
        }
        Ok(VolatilityFunction::Constant { sigma0 })
    }

    pub fn affine_clipped(c0: f64, c1: f64, sigma_min: f64, sigma_max: f64) -> Result<Self> {
        if ![c0, c1, sigma_min, sigma_max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("affine volatility parameters must be finite".into()));
        }
        if sigma_min <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "sigma_min must be positive (got {sigma_min}); a zero floor voids the no-vanishing condition"
            )));
        }
        if sigma_max < sigma_min {
            return Err(Error::InvalidInput(format!(
                "sigma_max ({sigma_max}) must be >= sigma_min ({sigma_min})"
            )));
        }
        Ok(VolatilityFunction::AffineClipped {
            c0,
            c1,
            sigma_min,
            sigma_max,
        })
    }

    /// Points must have strictly increasing abscissae and positive values.
    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("volatility table needs at least one point".into()));
        }
        for &(v, g) in &points {
            if !v.is_finite() || !g.is_finite() {
                return Err(Error::InvalidInput("volatility table entries must be finite".into()));
            }
            if g <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "volatility table value {g} at price {v} is not positive"
                )));
            }
        }
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidInput(
                "volatility table abscissae must be strictly increasing".into(),
            ));
        }
        Ok(VolatilityFunction::Table { points })
    }

    /// The zero function, for deterministic engine tests only.
    pub fn engine_test_zero() -> Self {
        VolatilityFunction::Zero
    }

    /// Evaluate g at a lagged price.
    pub fn eval(&self, v: f64) -> f64 {
        match self {
            VolatilityFunction::Constant { sigma0 } => *sigma0,
            VolatilityFunction::AffineClipped {
                c0,
                c1,
                sigma_min,
                sigma_max,
            } => (c0 + c1 * v).clamp(*sigma_min, *sigma_max),
            VolatilityFunction::Table { points } => {
                if v <= points[0].0 {
                    return points[0].1;
                }
                let last = points.len() - 1;
                if v >= points[last].0 {
                    return points[last].1;
                }
                let k = points.partition_point(|p| p.0 < v);
                let (v0, g0) = points[k - 1];
                let (v1, g1) = points[k];
                g0 + (g1 - g0) * (v - v0) / (v1 - v0)
            }
            VolatilityFunction::Zero => 0.0,
        }
    }
}

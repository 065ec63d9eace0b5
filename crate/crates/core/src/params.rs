//! Market and contract parameters.

use crate::error::{Error, Result};

/// Parameters of the lagged-coefficient market and the option written on it.
///
/// The stock drift at time t is mu * S(t - drift_delay) (per unit price, so mu
/// carries units of 1/(price * time)), and the volatility is a function of
/// S(t - vol_delay). The riskless bond grows at `rate`; the call contract is
/// (S(maturity) - strike)+.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub mu: f64,
    pub drift_delay: f64,
    pub vol_delay: f64,
    pub rate: f64,
    pub strike: f64,
    pub maturity: f64,
}

impl ModelParams {
    pub fn new(
        mu: f64,
        drift_delay: f64,
        vol_delay: f64,
        rate: f64,
        strike: f64,
        maturity: f64,
    ) -> Result<Self> {
        let all = [mu, drift_delay, vol_delay, rate, strike, maturity];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("model parameters must be finite".into()));
        }
        if drift_delay <= 0.0 || vol_delay <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "delays must be positive (got drift delay {drift_delay}, vol delay {vol_delay})"
            )));
        }
        if rate < 0.0 {
            return Err(Error::InvalidInput(format!("rate must be >= 0 (got {rate})")));
        }
        if strike <= 0.0 {
            return Err(Error::InvalidInput(format!("strike must be positive (got {strike})")));
        }
        if maturity <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "maturity must be positive (got {maturity})"
            )));
        }
        Ok(ModelParams {
            mu,
            drift_delay,
            vol_delay,
            rate,
            strike,
            maturity,
        })
    }

    /// L = max of the two delays; history must reach back this far.
    pub fn max_delay(&self) -> f64 {
        self.drift_delay.max(self.vol_delay)
    }

    /// l = min of the two delays; the closed form applies on [T - l, T].
    pub fn min_delay(&self) -> f64 {
        self.drift_delay.min(self.vol_delay)
    }
}

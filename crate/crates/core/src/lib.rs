//! Stock-price model with lagged drift and volatility, and the call pricing
//! and hedging theory it admits.
//!
//! The stock solves dS(t) = mu S(t-a) S(t) dt + g(S(t-b)) S(t) dW(t) with a
//! known price history on [-L, 0], L = max(a, b). The delays make the model
//! tractable in a way diffusion models are not: over the final window
//! [T - l, T], l = min(a, b), the remaining volatility is a deterministic
//! functional of already-observed prices, giving a Black-Scholes-shaped
//! closed form with the integrated lagged variance in place of sigma^2 tau,
//! an explicit replicating hedge, and before the window a Monte Carlo scheme
//! that only needs to simulate up to T - l.
//!
//! Module map:
//! - [`params`], [`volatility`], [`grid`], [`segment`]: model inputs and the
//!   exact delay-commensurable time grid.
//! - [`engine`]: exact-in-law path simulation under the physical or pricing
//!   measure, with a deterministic counter RNG ([`rng`]) that makes ensembles
//!   independent of worker count ([`parallel`]).
//! - [`measure`]: the market price of risk and the density process tying the
//!   two measures together.
//! - [`pricing`]: the closed form, its Monte Carlo complement, and classical
//!   Black-Scholes for the constant-volatility reduction.
//! - [`hedging`]: hedge ratios and a discrete self-financing replication
//!   backtest.
//! - [`normal`]: the Gaussian cdf and inverse the rest of the crate leans on.

pub mod engine;
pub mod error;
pub mod grid;
pub mod hedging;
pub mod history;
pub mod measure;
pub mod normal;
pub mod parallel;
pub mod params;
pub mod pricing;
pub mod rng;
pub mod segment;
pub mod volatility;

pub use engine::{
    integrated_variance, simulate_ensemble, simulate_path, simulate_path_with, Measure,
    PathRealization,
};
pub use error::{Error, Result, GRID_REL_TOL, VARIANCE_FLOOR};
pub use grid::TimeGrid;
pub use hedging::{
    hedge_position, replicate, replicate_path, HedgePosition, ReplicationReport, ReplicationStep,
};
pub use history::ObservedHistory;
pub use measure::{
    density_process, density_process_with_band, market_price_of_risk, q_increments, DensityPath,
    DEFAULT_LOG_DENSITY_BAND,
};
pub use normal::{std_normal_cdf, std_normal_inverse};
pub use params::ModelParams;
pub use pricing::{
    beta_pm, classical_bs, closed_form_price, h_function, mc_price, mc_price_payoff, McSettings,
    McStats, Payoff, PriceQuote, PricingMethod,
};
pub use rng::{CounterRng, NoiseSource};
pub use segment::InitialSegment;
pub use volatility::VolatilityFunction;

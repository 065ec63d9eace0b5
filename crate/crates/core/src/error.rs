use thiserror::Error;

/// Relative tolerance used when snapping delay and maturity ratios to grid integers.
pub const GRID_REL_TOL: f64 = 1e-9;

/// Integrated variance below this floor is treated as degenerate.
pub const VARIANCE_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A delay or the maturity is not an integer multiple of the grid step.
    #[error("{quantity} = {value} is not an integer multiple of step {step} (relative tolerance 1e-9); adjust steps_per_l or the parameter")]
    IncommensurableDelays {
        quantity: &'static str,
        value: f64,
        step: f64,
    },

    /// Lagged lookups need price data outside what the caller supplied.
    #[error("need prices on grid indices [{need_lo}, {need_hi}] but only [{have_lo}, {have_hi}] are available")]
    WindowNotCovered {
        need_lo: i64,
        need_hi: i64,
        have_lo: i64,
        have_hi: i64,
    },

    /// The volatility function evaluated to zero on a lagged price.
    #[error("volatility evaluates to 0 at lagged price {price}; the market price of risk is undefined")]
    ZeroVolatility { price: f64 },

    /// The log-density left the configured band; the density is numerically extreme.
    #[error("|log rho| = {value} exceeded the band {band} at step {step}")]
    Overflow { step: usize, value: f64, band: f64 },

    /// An input lies outside an operation's mathematical domain.
    #[error("{0}")]
    DomainError(String),

    /// The valuation time is on the wrong side of T - l for the requested method.
    #[error("valuation time {t0} is out of range: {detail}")]
    OutOfWindow { t0: f64, detail: &'static str },

    /// Integrated variance is numerically zero; beta_pm is undefined.
    #[error("integrated variance {sigma2} is below 1e-14; volatility is degenerate over the remaining window")]
    DegenerateVariance { sigma2: f64 },

    /// A constructor rejected its inputs.
    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Call valuation under the lagged-volatility model.
//!
//! The delay structure splits the problem at T - l, l = min(a, b). For
//! valuation times in [T - l, T] the remaining integrated variance
//! sigma2 = int_{t0}^{T} g(S(u - b))^2 du is a deterministic functional of the
//! observed history (every lagged lookup lands at or before t0), so the call
//! has the closed form
//!
//!   V(t0) = S(t0) Phi(beta_plus) - K e^{-r (T - t0)} Phi(beta_minus),
//!   beta_pm = [log(S(t0)/K) + r (T - t0) +- sigma2 / 2] / sqrt(sigma2).
//!
//! Earlier than T - l the variance is still random; the price is the
//! discounted expectation of H applied at the boundary,
//!
//!   V(t0) = e^{r t0} E_Q[ H(e^{-r (T - l)} S(T - l), -sigma2 / 2, sigma2) ],
//!
//! estimated by simulating pricing-measure paths of S up to T - l. The
//! boundary variance is computable there because b >= l pushes its lag window
//! entirely into the simulated range.
//!
//! All times entering formulas are grid times (index * step). The grid snaps
//! delays and maturity within 1e-9 relative, so mixing a caller-supplied
//! maturity with grid-derived valuation times could shift discount factors by
//! more than the 1e-12 identity tolerances guaranteed between the price, the
//! hedge portfolio value, and the variance integrals.

use crate::engine::{lagged_sq_sum, simulate_path_with, Measure};
use crate::error::{Error, Result, VARIANCE_FLOOR};
use crate::history::ObservedHistory;
use crate::normal::std_normal_cdf;
use crate::parallel::map_paths;
use crate::params::ModelParams;
use crate::rng::CounterRng;
use crate::segment::InitialSegment;
use crate::volatility::VolatilityFunction;

/// How a [`PriceQuote`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PricingMethod {
    ClosedForm,
    MonteCarlo,
}

/// Sampling-error report attached to Monte Carlo quotes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McStats {
    pub n_paths: u64,
    pub seed: u64,
    /// Sample standard error of the estimator.
    pub stderr: f64,
    /// Normal-approximation 95% interval: value -+ 1.96 stderr.
    pub ci_low: f64,
    pub ci_high: f64,
}

/// A call valuation and the method that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceQuote {
    pub value: f64,
    pub method: PricingMethod,
    /// Present exactly when method is MonteCarlo.
    pub mc: Option<McStats>,
}

/// Monte Carlo run controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McSettings {
    pub n_paths: u64,
    pub seed: u64,
    /// Pair each path with its sign-flipped twin and average per pair.
    pub antithetic: bool,
}

impl McSettings {
    pub fn new(n_paths: u64, seed: u64) -> Self {
        McSettings {
            n_paths,
            seed,
            antithetic: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.antithetic {
            if self.n_paths < 4 || self.n_paths % 2 != 0 {
                return Err(Error::InvalidInput(format!(
                    "antithetic estimation needs an even n_paths >= 4, got {}",
                    self.n_paths
                )));
            }
        } else if self.n_paths < 2 {
            return Err(Error::InvalidInput(format!(
                "n_paths must be at least 2 for a standard error, got {}",
                self.n_paths
            )));
        }
        Ok(())
    }
}

/// Terminal claims priced by direct simulation to maturity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Payoff {
    Call,
    Put,
    /// Pays 1 when S(T) > K.
    Digital,
}

impl Payoff {
    fn apply(self, s: f64, strike: f64) -> f64 {
        match self {
            Payoff::Call => (s - strike).max(0.0),
            Payoff::Put => (strike - s).max(0.0),
            Payoff::Digital => {
                if s > strike {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Classical Black-Scholes call value.
pub fn classical_bs(s: f64, strike: f64, rate: f64, sigma: f64, tau: f64) -> Result<f64> {
    if !(s > 0.0 && strike > 0.0 && sigma > 0.0 && tau > 0.0) || !rate.is_finite() {
        return Err(Error::DomainError(format!(
            "classical_bs needs S, K, sigma, tau > 0 and finite r; got S={s}, K={strike}, r={rate}, sigma={sigma}, tau={tau}"
        )));
    }
    let sq = sigma * tau.sqrt();
    let d1 = ((s / strike).ln() + (rate + 0.5 * sigma * sigma) * tau) / sq;
    let d2 = d1 - sq;
    Ok(s * std_normal_cdf(d1) - strike * (-rate * tau).exp() * std_normal_cdf(d2))
}

/// E_Q (x e^{m + sigma xi} - K e^{-rT})^+ for standard normal xi.
///
/// Closed form x e^{m + sigma2/2} Phi(alpha_1) - K e^{-rT} Phi(alpha_2) with
/// alpha_2 = [log(x/K) + rT + m] / sigma and alpha_1 = alpha_2 + sigma; below
/// the variance floor the payoff is deterministic and the positive part is
/// taken directly.
pub fn h_function(
    x: f64,
    m: f64,
    sigma2: f64,
    strike: f64,
    rate: f64,
    maturity: f64,
) -> Result<f64> {
    if !(x > 0.0) || !(strike > 0.0) {
        return Err(Error::DomainError(format!(
            "h_function needs x > 0 and K > 0, got x={x}, K={strike}"
        )));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::DomainError(format!(
            "h_function needs sigma2 >= 0, got {sigma2}"
        )));
    }
    Ok(h_core(x, m, sigma2, strike, rate, maturity))
}

/// [`h_function`] body without input checks, for per-path Monte Carlo use
/// where positivity of x is structural.
fn h_core(x: f64, m: f64, sigma2: f64, strike: f64, rate: f64, maturity: f64) -> f64 {
    let disc_strike = strike * (-rate * maturity).exp();
    if sigma2 < VARIANCE_FLOOR {
        return (x * m.exp() - disc_strike).max(0.0);
    }
    let sigma = sigma2.sqrt();
    let alpha2 = ((x / strike).ln() + rate * maturity + m) / sigma;
    let alpha1 = alpha2 + sigma;
    (x * (m + 0.5 * sigma2).exp() * std_normal_cdf(alpha1) - disc_strike * std_normal_cdf(alpha2))
        .max(0.0)
}

/// Value and hedge ratios of the boundary-window call formula.
///
/// When sigma2 is above the floor, `betas` holds (beta_plus, beta_minus) with
/// beta_plus = beta_minus + sqrt(sigma2) by construction, so the spread is
/// exact. Below the floor the payoff is deterministic: the value is the
/// discounted forward intrinsic and the positions collapse to indicators
/// (one half each exactly at the money).
pub(crate) struct FormulaParts {
    pub betas: Option<(f64, f64)>,
    pub value: f64,
    /// Phi(beta_plus): stock units held.
    pub stock_units: f64,
    /// -K e^{-rT} Phi(beta_minus): units of the unit bond e^{rt}.
    pub bond_units: f64,
}

pub(crate) fn call_parts(
    spot: f64,
    tau: f64,
    maturity: f64,
    sigma2: f64,
    strike: f64,
    rate: f64,
) -> FormulaParts {
    let disc_now = strike * (-rate * tau).exp();
    let disc_mat = strike * (-rate * maturity).exp();
    if sigma2 < VARIANCE_FLOOR {
        let fwd = spot - disc_now;
        let ind = if fwd > 0.0 {
            1.0
        } else if fwd < 0.0 {
            0.0
        } else {
            0.5
        };
        return FormulaParts {
            betas: None,
            value: fwd.max(0.0),
            stock_units: ind,
            bond_units: -disc_mat * ind,
        };
    }
    let sigma = sigma2.sqrt();
    let beta_minus = ((spot / strike).ln() + rate * tau - 0.5 * sigma2) / sigma;
    let beta_plus = beta_minus + sigma;
    let phi_plus = std_normal_cdf(beta_plus);
    let phi_minus = std_normal_cdf(beta_minus);
    FormulaParts {
        betas: Some((beta_plus, beta_minus)),
        value: (spot * phi_plus - disc_now * phi_minus).max(0.0),
        stock_units: phi_plus,
        bond_units: -disc_mat * phi_minus,
    }
}

/// Integrated variance int_{t0}^{T} g(S(u - b))^2 du from observed history.
///
/// Defined only on the closed-form window t0 >= T - l; there every lagged
/// lookup falls inside [t0 - b, t0] and the left-Riemann sum is the same rule
/// the engine steps with.
pub(crate) fn window_variance(hist: &ObservedHistory, g: &VolatilityFunction) -> Result<f64> {
    let grid = hist.grid();
    let t0 = hist.t0_index();
    if t0 < grid.closed_form_boundary() {
        return Err(Error::OutOfWindow {
            t0: grid.time(t0),
            detail: "before T - l the remaining variance is random; use mc_price",
        });
    }
    let count = grid.max_index() - t0;
    if count == 0 {
        return Ok(0.0);
    }
    let lo = t0 - grid.vol_lag as i64;
    let window = hist.window(lo, lo + count - 1)?;
    Ok(lagged_sq_sum(g, window, 0, count as usize, grid.step))
}

/// (beta_plus, beta_minus) for a valuation time in [T - l, T).
pub fn beta_pm(
    hist: &ObservedHistory,
    params: &ModelParams,
    g: &VolatilityFunction,
) -> Result<(f64, f64)> {
    let sigma2 = window_variance(hist, g)?;
    if sigma2 < VARIANCE_FLOOR {
        return Err(Error::DegenerateVariance { sigma2 });
    }
    let grid = hist.grid();
    let tau = grid.time(grid.max_index() - hist.t0_index());
    let parts = call_parts(
        hist.spot(),
        tau,
        grid.time(grid.max_index()),
        sigma2,
        params.strike,
        params.rate,
    );
    Ok(parts.betas.expect("variance checked above the floor"))
}

/// Call value for a valuation time in the closed-form window [T - l, T].
///
/// At t0 = T the window variance is empty and the quote is the intrinsic
/// value (S(T) - K)^+.
pub fn closed_form_price(
    hist: &ObservedHistory,
    params: &ModelParams,
    g: &VolatilityFunction,
) -> Result<PriceQuote> {
    let sigma2 = window_variance(hist, g)?;
    let grid = hist.grid();
    let tau = grid.time(grid.max_index() - hist.t0_index());
    let parts = call_parts(
        hist.spot(),
        tau,
        grid.time(grid.max_index()),
        sigma2,
        params.strike,
        params.rate,
    );
    Ok(PriceQuote {
        value: parts.value,
        method: PricingMethod::ClosedForm,
        mc: None,
    })
}

fn mc_quote(raw: &[f64], scale: f64, settings: &McSettings) -> PriceQuote {
    let (mean, se) = mean_stderr(raw);
    let value = scale * mean;
    let stderr = scale * se;
    PriceQuote {
        value,
        method: PricingMethod::MonteCarlo,
        mc: Some(McStats {
            n_paths: settings.n_paths,
            seed: settings.seed,
            stderr,
            ci_low: value - 1.96 * stderr,
            ci_high: value + 1.96 * stderr,
        }),
    }
}

/// Run the per-path estimator over plain or antithetic-paired streams.
///
/// Paths are collected in index order and reduced sequentially, so the result
/// is bit-identical whatever the worker count.
fn run_paths<F>(settings: &McSettings, one: F) -> Vec<f64>
where
    F: Fn(CounterRng) -> f64 + Sync + Send,
{
    if settings.antithetic {
        map_paths(settings.n_paths / 2, |p| {
            let plus = one(CounterRng::new(settings.seed, p));
            let minus = one(CounterRng::mirrored(settings.seed, p));
            0.5 * (plus + minus)
        })
    } else {
        map_paths(settings.n_paths, |p| one(CounterRng::new(settings.seed, p)))
    }
}

/// Checks the valuation time is strictly before T - l and rebases the history
/// onto a simulation of the remaining time: the dynamics are autonomous, so
/// the window [t0 - L, t0] becomes the initial segment of a fresh grid.
fn shifted_segment(hist: &ObservedHistory) -> Result<InitialSegment> {
    let grid = hist.grid();
    let t0 = hist.t0_index();
    if t0 >= grid.closed_form_boundary() {
        return Err(Error::OutOfWindow {
            t0: grid.time(t0),
            detail: "from T - l on the price is a closed form; use closed_form_price",
        });
    }
    let values = hist.window(t0 - grid.n_pre as i64, t0)?.to_vec();
    InitialSegment::from_values(values)
}

/// Monte Carlo call value for a valuation time before T - l.
///
/// Simulates pricing-measure paths from t0 to T - l only; the remaining
/// window is integrated in closed form per path via [`h_function`].
pub fn mc_price(
    hist: &ObservedHistory,
    params: &ModelParams,
    g: &VolatilityFunction,
    settings: &McSettings,
) -> Result<PriceQuote> {
    settings.validate()?;
    let seg = shifted_segment(hist)?;
    let grid = *hist.grid();
    let t0 = hist.t0_index();
    let horizon = (grid.closed_form_boundary() - t0) as usize;
    let sim_grid = grid.with_horizon(horizon);
    let t_boundary = grid.time(grid.closed_form_boundary());
    let t_mat = grid.time(grid.max_index());
    let disc_boundary = (-params.rate * t_boundary).exp();
    // Slot of the first lagged lookup of the boundary variance within the
    // shifted price buffer; the window length is l / h by construction.
    let var_slot = (horizon as i64 - grid.vol_lag as i64 + grid.n_pre as i64) as usize;
    let var_len = grid.steps_per_min_delay;
    let raw = run_paths(settings, |rng| {
        let path = simulate_path_with(params, g, &seg, &sim_grid, Measure::Q, &rng);
        let sigma2 = lagged_sq_sum(g, &path.prices, var_slot, var_len, grid.step);
        h_core(
            disc_boundary * path.terminal(),
            -0.5 * sigma2,
            sigma2,
            params.strike,
            params.rate,
            t_mat,
        )
    });
    let scale = (params.rate * grid.time(t0)).exp();
    Ok(mc_quote(&raw, scale, settings))
}

/// Monte Carlo value of a terminal claim, simulated all the way to maturity.
pub fn mc_price_payoff(
    hist: &ObservedHistory,
    params: &ModelParams,
    g: &VolatilityFunction,
    payoff: Payoff,
    settings: &McSettings,
) -> Result<PriceQuote> {
    settings.validate()?;
    let seg = shifted_segment(hist)?;
    let grid = *hist.grid();
    let t0 = hist.t0_index();
    let horizon = (grid.max_index() - t0) as usize;
    let sim_grid = grid.with_horizon(horizon);
    let raw = run_paths(settings, |rng| {
        let path = simulate_path_with(params, g, &seg, &sim_grid, Measure::Q, &rng);
        payoff.apply(path.terminal(), params.strike)
    });
    let scale = (-params.rate * grid.time(grid.max_index() - t0)).exp();
    Ok(mc_quote(&raw, scale, settings))
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_stderr(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    if vals.len() < 2 {
        return (mean, 0.0);
    }
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

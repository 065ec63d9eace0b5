//! Change of measure from the physical to the pricing dynamics.
//!
//! For a physical-measure path, the market price of risk is
//!
//!   Sigma(t_i) = -(mu * S[i - a/h] - r) / g(S[i - b/h])
//!
//! and the density of the pricing measure accumulates as a left-endpoint Ito
//! sum, log rho[i+1] = log rho[i] + Sigma_i * dW_i - Sigma_i^2 * h / 2. The
//! increments dW_hat_i = dW_i - Sigma_i * h drive the same path under the
//! pricing dynamics: re-running the stepping rule with drift r on them
//! reproduces the physical path sample for sample.

use crate::engine::{Measure, PathRealization};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::volatility::VolatilityFunction;

/// Default band on |log rho| before the density is declared numerically
/// extreme. exp is finite well beyond this, but a density this far out means
/// the estimator carries no statistical information.
pub const DEFAULT_LOG_DENSITY_BAND: f64 = 700.0;

/// Density of the pricing measure along one physical path.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPath {
    /// Market price of risk per step, [0, n_post).
    pub sigma_vals: Vec<f64>,
    /// log rho at each grid index in [0, n_post]; starts at 0.
    pub log_rho: Vec<f64>,
    /// rho at the horizon, exp(log_rho[n_post]).
    pub rho_terminal: f64,
}

fn require_physical(path: &PathRealization) -> Result<()> {
    if path.measure != Measure::P {
        return Err(Error::InvalidInput(
            "density computations need a path simulated under the physical measure".into(),
        ));
    }
    Ok(())
}

/// Market price of risk Sigma at step i of a physical path.
pub fn market_price_of_risk(
    path: &PathRealization,
    i: usize,
    params: &ModelParams,
    g: &VolatilityFunction,
) -> Result<f64> {
    require_physical(path)?;
    let grid = &path.grid;
    if i >= grid.n_post {
        return Err(Error::InvalidInput(format!(
            "step {i} out of range; path has {} steps",
            grid.n_post
        )));
    }
    let lagged_drift = path.prices[grid.n_pre + i - grid.drift_lag];
    let lagged_vol = path.prices[grid.n_pre + i - grid.vol_lag];
    let vol = g.eval(lagged_vol);
    if vol == 0.0 {
        return Err(Error::ZeroVolatility { price: lagged_vol });
    }
    Ok(-(params.mu * lagged_drift - params.rate) / vol)
}

/// Density process with the default overflow band.
pub fn density_process(
    path: &PathRealization,
    params: &ModelParams,
    g: &VolatilityFunction,
) -> Result<DensityPath> {
    density_process_with_band(path, params, g, DEFAULT_LOG_DENSITY_BAND)
}

/// Density process rho along a physical path, flagged if |log rho| leaves the
/// given band.
pub fn density_process_with_band(
    path: &PathRealization,
    params: &ModelParams,
    g: &VolatilityFunction,
    band: f64,
) -> Result<DensityPath> {
    require_physical(path)?;
    let grid = &path.grid;
    let h = grid.step;
    let mut sigma_vals = Vec::with_capacity(grid.n_post);
    let mut log_rho = Vec::with_capacity(grid.n_post + 1);
    log_rho.push(0.0);
    let mut acc = 0.0;
    for i in 0..grid.n_post {
        let sigma = market_price_of_risk(path, i, params, g)?;
        acc += sigma * path.increments[i] - 0.5 * sigma * sigma * h;
        if acc.abs() > band {
            return Err(Error::Overflow {
                step: i,
                value: acc.abs(),
                band,
            });
        }
        sigma_vals.push(sigma);
        log_rho.push(acc);
    }
    Ok(DensityPath {
        sigma_vals,
        log_rho,
        rho_terminal: acc.exp(),
    })
}

/// Increments of the pricing-measure Brownian motion along a physical path:
/// dW_hat_i = dW_i - Sigma_i * h.
pub fn q_increments(
    path: &PathRealization,
    params: &ModelParams,
    g: &VolatilityFunction,
) -> Result<Vec<f64>> {
    require_physical(path)?;
    let h = path.grid.step;
    (0..path.grid.n_post)
        .map(|i| Ok(path.increments[i] - market_price_of_risk(path, i, params, g)? * h))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate_path, simulate_path_with};
    use crate::grid::TimeGrid;
    use crate::parallel::map_paths;
    use crate::segment::InitialSegment;

    fn setup(mu: f64, r: f64, phi: f64) -> (ModelParams, TimeGrid, InitialSegment) {
        let params = ModelParams::new(mu, 0.5, 0.5, r, 1.0, 1.0).unwrap();
        let grid = TimeGrid::build(&params, 8).unwrap();
        let seg = InitialSegment::constant(phi, &grid).unwrap();
        (params, grid, seg)
    }

    #[test]
    fn drift_equal_to_rate_gives_zero_risk_price() {
        // mu * S(t-a) = r exactly along the constant segment.
        let (params, grid, seg) = setup(0.05, 0.05, 1.0);
        let g = VolatilityFunction::constant(0.2).unwrap();
        let path = simulate_path(&params, &g, &seg, &grid, Measure::P, 2, 0);
        let s0 = market_price_of_risk(&path, 0, &params, &g).unwrap();
        assert_eq!(s0, 0.0);
    }

    #[test]
    fn direct_substitution_value() {
        let (params, grid, seg) = setup(0.1, 0.05, 1.0);
        let g = VolatilityFunction::constant(0.2).unwrap();
        let path = simulate_path(&params, &g, &seg, &grid, Measure::P, 2, 0);
        // First step: S(u-a) = 1, so Sigma = -(0.1 - 0.05)/0.2 = -0.25.
        let s0 = market_price_of_risk(&path, 0, &params, &g).unwrap();
        assert!((s0 + 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_drift_zero_rate_keeps_density_at_one() {
        let (params, grid, seg) = setup(0.0, 0.0, 1.0);
        let g = VolatilityFunction::constant(0.2).unwrap();
        let path = simulate_path(&params, &g, &seg, &grid, Measure::P, 4, 0);
        let d = density_process(&path, &params, &g).unwrap();
        assert!(d.sigma_vals.iter().all(|&s| s == 0.0));
        assert!(d.log_rho.iter().all(|&l| l == 0.0));
        assert_eq!(d.rho_terminal, 1.0);
    }

    #[test]
    fn forced_zero_noise_density_is_deterministic() {
        // With mu = 0 the risk price r / sigma0 is constant whatever the path
        // does, and forcing dW == 0 kills the stochastic term, so
        // log rho(T) = -Sigma^2 T / 2 exactly.
        let (params, grid, seg) = setup(0.0, 0.05, 1.0);
        let g = VolatilityFunction::constant(0.2).unwrap();
        let silent = |_: u64| 0.0;
        let path = simulate_path_with(&params, &g, &seg, &grid, Measure::P, &silent);
        let d = density_process(&path, &params, &g).unwrap();
        let sigma = 0.05 / 0.2;
        let expect = (-0.5 * sigma * sigma * 1.0f64).exp();
        assert!((d.rho_terminal / expect - 1.0).abs() < 1e-13);
    }

    #[test]
    fn density_mean_is_one_for_bounded_vol() {
        let (params, grid, seg) = setup(0.1, 0.05, 1.0);
        let g = VolatilityFunction::constant(0.2).unwrap();
        let n = 100_000u64;
        let vals = map_paths(n, |p| {
            let path = simulate_path(&params, &g, &seg, &grid, Measure::P, 11, p);
            density_process(&path, &params, &g).unwrap().rho_terminal
        });
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var =
            vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0).abs() <= 3.0 * se, "mean {mean}, se {se}");
    }

    #[test]
    fn q_increment_formula_and_reconstruction() {
        let (params, grid, seg) = setup(0.1, 0.05, 1.0);
        let g = VolatilityFunction::affine_clipped(0.15, 0.05, 0.05, 0.5).unwrap();
        let path = simulate_path(&params, &g, &seg, &grid, Measure::P, 8, 3);
        let dwh = q_increments(&path, &params, &g).unwrap();

        // Replaying the pricing-measure stepping rule on dW_hat must rebuild
        // the physical path exactly: the drift substitution is algebraic.
        let replay = |k: u64| dwh[k as usize] / grid.step.sqrt();
        let rebuilt = simulate_path_with(&params, &g, &seg, &grid, Measure::Q, &replay);
        for (a, b) in path.prices.iter().zip(rebuilt.prices.iter()) {
            assert!((a / b - 1.0).abs() <= 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_sigma_keeps_increments() {
        let (params, grid, seg) = setup(0.0, 0.0, 1.0);
        let g = VolatilityFunction::constant(0.2).unwrap();
        let path = simulate_path(&params, &g, &seg, &grid, Measure::P, 8, 0);
        let dwh = q_increments(&path, &params, &g).unwrap();
        assert_eq!(dwh, path.increments);
    }

    #[test]
    fn overflow_is_flagged() {
        let (params, grid, seg) = setup(50.0, 0.0, 1.0);
        let g = VolatilityFunction::constant(0.2).unwrap();
        let path = simulate_path(&params, &g, &seg, &grid, Measure::P, 1, 0);
        let err = density_process_with_band(&path, &params, &g, 5.0).unwrap_err();
        assert!(matches!(err, Error::Overflow { .. }));
    }

    #[test]
    fn q_path_is_rejected() {
        let (params, grid, seg) = setup(0.1, 0.05, 1.0);
        let g = VolatilityFunction::constant(0.2).unwrap();
        let path = simulate_path(&params, &g, &seg, &grid, Measure::Q, 1, 0);
        assert!(density_process(&path, &params, &g).is_err());
        assert!(q_increments(&path, &params, &g).is_err());
        assert!(market_price_of_risk(&path, 0, &params, &g).is_err());
    }

    #[test]
    fn zero_volatility_is_reported() {
        let (params, grid, seg) = setup(0.1, 0.05, 1.0);
        let g = VolatilityFunction::engine_test_zero();
        let path = simulate_path(&params, &g, &seg, &grid, Measure::P, 1, 0);
        let err = market_price_of_risk(&path, 0, &params, &g).unwrap_err();
        assert!(matches!(err, Error::ZeroVolatility { .. }));
    }
}

//! Path simulation for the lagged-coefficient stock model.
//!
//! The stock follows dS(t) = mu * S(t-a) * S(t) dt + g(S(t-b)) * S(t) dW(t)
//! under the physical measure, with history phi on [-L, 0]. Both lagged
//! coefficients are evaluated at the left endpoint of each step, so each step
//! is conditionally lognormal and the scheme is exact whenever the lagged
//! inputs are constant across a step:
//!
//!   S[i+1] = S[i] * exp((d_i - v_i^2 / 2) * h + v_i * dW_i)
//!
//! with d_i = mu * S[i - a/h] under P or d_i = r under the pricing measure,
//! and v_i = g(S[i - b/h]). The exponential form keeps every price strictly
//! positive, and under the pricing measure it makes the discounted price an
//! exact martingale at any step size.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::params::ModelParams;
use crate::parallel::map_paths;
use crate::rng::{CounterRng, NoiseSource};
use crate::segment::InitialSegment;
use crate::volatility::VolatilityFunction;

/// Which dynamics drive the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// Physical measure: lagged drift mu * S(t-a).
    P,
    /// Pricing measure: drift r.
    Q,
}

/// One simulated path on the full grid [-n_pre, n_post].
#[derive(Debug, Clone, PartialEq)]
pub struct PathRealization {
    pub measure: Measure,
    pub grid: TimeGrid,
    /// Prices by slot; index i lives at slot i + n_pre.
    pub prices: Vec<f64>,
    /// Brownian increments per step, N(0, h) draws. Increments of W under P,
    /// of the pricing-measure Brownian motion under Q.
    pub increments: Vec<f64>,
    pub seed: u64,
    pub path_index: u64,
}

impl PathRealization {
    /// Price at a grid index (segment indices are negative).
    pub fn price(&self, index: i64) -> f64 {
        self.prices[self.grid.slot(index)]
    }

    /// Price at the simulation horizon.
    pub fn terminal(&self) -> f64 {
        *self.prices.last().unwrap()
    }
}

fn run_steps<N: NoiseSource>(
    prices: &mut Vec<f64>,
    increments: &mut Vec<f64>,
    params: &ModelParams,
    g: &VolatilityFunction,
    grid: &TimeGrid,
    measure: Measure,
    noise: &N,
) {
    let h = grid.step;
    let sqrt_h = h.sqrt();
    let drift_lag = grid.drift_lag;
    let vol_lag = grid.vol_lag;
    for k in 0..grid.n_post {
        let slot = grid.n_pre + k;
        let s = prices[slot];
        let drift = match measure {
            Measure::P => params.mu * prices[slot - drift_lag],
            Measure::Q => params.rate,
        };
        let vol = g.eval(prices[slot - vol_lag]);
        let dw = sqrt_h * noise.standard_normal(k as u64);
        let next = s * ((drift - 0.5 * vol * vol) * h + vol * dw).exp();
        debug_assert!(next > 0.0, "positivity lost at step {k}: {next}");
        increments.push(dw);
        prices.push(next);
    }
}

/// Simulate one path with the production counter RNG.
pub fn simulate_path(
    params: &ModelParams,
    g: &VolatilityFunction,
    seg: &InitialSegment,
    grid: &TimeGrid,
    measure: Measure,
    seed: u64,
    path_index: u64,
) -> PathRealization {
    let rng = CounterRng::new(seed, path_index);
    let mut path = simulate_path_with(params, g, seg, grid, measure, &rng);
    path.seed = seed;
    path.path_index = path_index;
    path
}

/// Simulate one path from an arbitrary noise source. The reproducibility keys
/// of the result are zeroed; use [`simulate_path`] for keyed production draws.
pub fn simulate_path_with<N: NoiseSource>(
    params: &ModelParams,
    g: &VolatilityFunction,
    seg: &InitialSegment,
    grid: &TimeGrid,
    measure: Measure,
    noise: &N,
) -> PathRealization {
    debug_assert_eq!(seg.len(), grid.n_pre + 1, "segment not gridded on this grid");
    let mut prices = Vec::with_capacity(grid.len());
    prices.extend_from_slice(seg.values());
    let mut increments = Vec::with_capacity(grid.n_post);
    run_steps(&mut prices, &mut increments, params, g, grid, measure, noise);
    PathRealization {
        measure,
        grid: *grid,
        prices,
        increments,
        seed: 0,
        path_index: 0,
    }
}

/// Simulate paths 0..n_paths, in path order.
pub fn simulate_ensemble(
    params: &ModelParams,
    g: &VolatilityFunction,
    seg: &InitialSegment,
    grid: &TimeGrid,
    measure: Measure,
    seed: u64,
    n_paths: u64,
) -> Vec<PathRealization> {
    map_paths(n_paths, |p| simulate_path(params, g, seg, grid, measure, seed, p))
}

/// Left-Riemann sum of g(S)^2 * h over `count` consecutive slots starting at
/// `start_slot`. Single implementation shared by every integrated-variance
/// consumer so cross-checks between formulas are exact identities.
pub(crate) fn lagged_sq_sum(
    g: &VolatilityFunction,
    prices: &[f64],
    start_slot: usize,
    count: usize,
    h: f64,
) -> f64 {
    let mut acc = 0.0;
    for &v in &prices[start_slot..start_slot + count] {
        let vol = g.eval(v);
        acc += vol * vol;
    }
    acc * h
}

/// Integral of g(S(u - b))^2 du over [i_from * h, i_to * h], left Riemann sum
/// on the grid (exact for the piecewise-constant-coefficient scheme).
pub fn integrated_variance(
    path: &PathRealization,
    g: &VolatilityFunction,
    i_from: i64,
    i_to: i64,
) -> Result<f64> {
    let grid = &path.grid;
    if i_from > i_to {
        return Err(Error::InvalidInput(format!(
            "integrated_variance: i_from {i_from} exceeds i_to {i_to}"
        )));
    }
    let need_lo = i_from - grid.vol_lag as i64;
    let need_hi = i_to - 1 - grid.vol_lag as i64;
    if i_from < 0 || i_to > grid.n_post as i64 || need_lo < grid.min_index() {
        return Err(Error::WindowNotCovered {
            need_lo,
            need_hi,
            have_lo: grid.min_index(),
            have_hi: grid.max_index(),
        });
    }
    if i_from == i_to {
        return Ok(0.0);
    }
    let start_slot = grid.slot(need_lo);
    Ok(lagged_sq_sum(g, &path.prices, start_slot, (i_to - i_from) as usize, grid.step))
}

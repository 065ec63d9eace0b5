//! Uniform time grid with exact integer delay offsets.

use crate::error::{Error, Result, GRID_REL_TOL};
use crate::params::ModelParams;

/// Discretization of [-L, T] with step h = l / steps_per_min_delay.
///
/// Grid index i maps to time i * h, with i in [-n_pre, n_post]. Both delays
/// and the maturity must be integer multiples of h; the offsets are snapped at
/// construction and stored exactly, so lagged lookups never interpolate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub step: f64,
    pub steps_per_min_delay: usize,
    /// Drift lag a as a step count.
    pub drift_lag: usize,
    /// Volatility lag b as a step count.
    pub vol_lag: usize,
    /// Steps covering [-L, 0].
    pub n_pre: usize,
    /// Steps covering [0, T].
    pub n_post: usize,
}

fn snap(quantity: &'static str, value: f64, step: f64) -> Result<usize> {
    let ratio = value / step;
    let snapped = ratio.round();
    if snapped < 1.0 || (ratio - snapped).abs() > GRID_REL_TOL * ratio.abs().max(1.0) {
        return Err(Error::IncommensurableDelays {
            quantity,
            value,
            step,
        });
    }
    Ok(snapped as usize)
}

impl TimeGrid {
    pub fn build(params: &ModelParams, steps_per_min_delay: usize) -> Result<TimeGrid> {
        if steps_per_min_delay == 0 {
            return Err(Error::InvalidInput("steps_per_l must be at least 1".into()));
        }
        let step = params.min_delay() / steps_per_min_delay as f64;
        let drift_lag = snap("drift delay a", params.drift_delay, step)?;
        let vol_lag = snap("vol delay b", params.vol_delay, step)?;
        let n_post = snap("maturity T", params.maturity, step)?;
        Ok(TimeGrid {
            step,
            steps_per_min_delay,
            drift_lag,
            vol_lag,
            n_pre: drift_lag.max(vol_lag),
            n_post,
        })
    }

    /// Same spacing and lags, different simulation horizon. Used internally to
    /// run sub-simulations that start at a later valuation time.
    pub(crate) fn with_horizon(&self, n_post: usize) -> TimeGrid {
        TimeGrid { n_post, ..*self }
    }

    pub fn time(&self, index: i64) -> f64 {
        index as f64 * self.step
    }

    /// Position of a grid index inside a [-n_pre, n_post] storage vector.
    pub fn slot(&self, index: i64) -> usize {
        debug_assert!(index >= -(self.n_pre as i64) && index <= self.n_post as i64);
        (index + self.n_pre as i64) as usize
    }

    pub fn min_index(&self) -> i64 {
        -(self.n_pre as i64)
    }

    pub fn max_index(&self) -> i64 {
        self.n_post as i64
    }

    /// Total number of stored samples, segment included.
    pub fn len(&self) -> usize {
        self.n_pre + self.n_post + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid index of the closed-form boundary T - l.
    pub fn closed_form_boundary(&self) -> i64 {
        self.n_post as i64 - self.steps_per_min_delay as i64
    }

    /// Snap an arbitrary time to a grid index, or report incommensurability.
    pub fn index_of(&self, quantity: &'static str, t: f64) -> Result<i64> {
        let ratio = t / self.step;
        let snapped = ratio.round();
        if (ratio - snapped).abs() > GRID_REL_TOL * ratio.abs().max(1.0) {
            return Err(Error::IncommensurableDelays {
                quantity,
                value: t,
                step: self.step,
            });
        }
        Ok(snapped as i64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(a: f64, b: f64, t: f64) -> ModelParams {
        ModelParams::new(0.1, a, b, 0.05, 100.0, t).unwrap()
    }

    #[test]
    fn equal_delays() {
        let g = TimeGrid::build(&params(1.0, 1.0, 2.0), 10).unwrap();
        assert_eq!(g.step, 0.1);
        assert_eq!(g.n_pre, 10);
        assert_eq!(g.n_post, 20);
        assert_eq!(g.drift_lag, 10);
        assert_eq!(g.vol_lag, 10);
    }

    #[test]
    fn unequal_delays_use_min_for_step() {
        let g = TimeGrid::build(&params(0.5, 1.0, 1.0), 5).unwrap();
        assert_eq!(g.step, 0.1);
        assert_eq!(g.drift_lag, 5);
        assert_eq!(g.vol_lag, 10);
        assert_eq!(g.n_pre, 10);
        assert_eq!(g.n_post, 10);
    }

    #[test]
    fn incommensurable_vol_delay_rejected() {
        let err = TimeGrid::build(&params(1.0 / 3.0, 0.5, 1.0), 1).unwrap_err();
        match err {
            Error::IncommensurableDelays { quantity, .. } => assert_eq!(quantity, "vol delay b"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn incommensurable_maturity_rejected() {
        let err = TimeGrid::build(&params(0.5, 0.5, 1.05), 1).unwrap_err();
        match err {
            Error::IncommensurableDelays { quantity, .. } => assert_eq!(quantity, "maturity T"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn slot_round_trips_indices() {
        let g = TimeGrid::build(&params(0.5, 1.0, 1.0), 5).unwrap();
        assert_eq!(g.slot(g.min_index()), 0);
        assert_eq!(g.slot(0), g.n_pre);
        assert_eq!(g.slot(g.max_index()), g.len() - 1);
        assert_eq!(g.closed_form_boundary(), 5);
    }

    #[test]
    fn index_of_snaps_grid_times() {
        let g = TimeGrid::build(&params(0.5, 0.5, 1.0), 8).unwrap();
        assert_eq!(g.index_of("t0", 0.4375).unwrap(), 7);
        assert!(g.index_of("t0", 0.3).is_err());
    }
}

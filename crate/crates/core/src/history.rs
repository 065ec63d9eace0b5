//! Observed price history feeding a valuation.

use crate::engine::PathRealization;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::segment::{interpolate_onto, InitialSegment};

/// Grid-aligned price observations ending at the valuation time t0.
///
/// The stored window is [start_index, t0_index] in grid indices. How far back
/// it must reach depends on the consumer: the closed form needs the
/// volatility-lag window [t0 - b, t0], the Monte Carlo branch the full
/// [t0 - L, t0]; each operation checks its own coverage.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedHistory {
    grid: TimeGrid,
    start_index: i64,
    t0_index: i64,
    values: Vec<f64>,
}

impl ObservedHistory {
    pub fn new(grid: TimeGrid, start_index: i64, t0_index: i64, values: Vec<f64>) -> Result<Self> {
        if t0_index < 0 || t0_index > grid.n_post as i64 {
            return Err(Error::InvalidInput(format!(
                "valuation index {t0_index} outside [0, {}]",
                grid.n_post
            )));
        }
        let expect = t0_index - start_index + 1;
        if expect <= 0 || values.len() as i64 != expect {
            return Err(Error::InvalidInput(format!(
                "history spanning [{start_index}, {t0_index}] needs {expect} values, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(
                "history values must be positive and finite".into(),
            ));
        }
        Ok(ObservedHistory {
            grid,
            start_index,
            t0_index,
            values,
        })
    }

    /// History for valuation at t0 = 0 given the initial segment.
    pub fn from_segment(seg: &InitialSegment, grid: &TimeGrid) -> Result<Self> {
        Self::new(*grid, grid.min_index(), 0, seg.values().to_vec())
    }

    /// History from a simulated path, valued at a grid index of that path.
    pub fn from_path(path: &PathRealization, t0_index: i64) -> Result<Self> {
        if t0_index < 0 || t0_index > path.grid.n_post as i64 {
            return Err(Error::InvalidInput(format!(
                "valuation index {t0_index} not on the simulated range"
            )));
        }
        let values = path.prices[..=path.grid.slot(t0_index)].to_vec();
        Self::new(path.grid, path.grid.min_index(), t0_index, values)
    }

    /// Interpolate raw (t, price) samples onto [lo_index, t0_index].
    pub fn from_samples(
        samples: &[(f64, f64)],
        grid: &TimeGrid,
        t0_index: i64,
        lo_index: i64,
    ) -> Result<Self> {
        let values = interpolate_onto(samples, grid, lo_index, t0_index)?;
        Self::new(*grid, lo_index, t0_index, values)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn t0_index(&self) -> i64 {
        self.t0_index
    }

    pub fn t0(&self) -> f64 {
        self.grid.time(self.t0_index)
    }

    pub fn start_index(&self) -> i64 {
        self.start_index
    }

    /// Price at the valuation time.
    pub fn spot(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn value_at(&self, index: i64) -> Result<f64> {
        self.check_covers(index, index)?;
        Ok(self.values[(index - self.start_index) as usize])
    }

    /// Contiguous values for grid indices [lo, hi].
    pub fn window(&self, lo: i64, hi: i64) -> Result<&[f64]> {
        self.check_covers(lo, hi)?;
        let a = (lo - self.start_index) as usize;
        let b = (hi - self.start_index) as usize;
        Ok(&self.values[a..=b])
    }

    fn check_covers(&self, lo: i64, hi: i64) -> Result<()> {
        if lo < self.start_index || hi > self.t0_index || lo > hi {
            return Err(Error::WindowNotCovered {
                need_lo: lo,
                need_hi: hi,
                have_lo: self.start_index,
                have_hi: self.t0_index,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;

    fn grid() -> TimeGrid {
        let p = ModelParams::new(0.001, 0.25, 0.5, 0.05, 100.0, 1.0).unwrap();
        TimeGrid::build(&p, 4).unwrap()
    }

    #[test]
    fn window_and_spot() {
        let g = grid();
        // h = 1/16; t0 at index 8 (= 0.5), window back to index 0.
        let vals: Vec<f64> = (0..=8).map(|i| 100.0 + i as f64).collect();
        let h = ObservedHistory::new(g, 0, 8, vals).unwrap();
        assert_eq!(h.spot(), 108.0);
        assert_eq!(h.t0(), 0.5);
        assert_eq!(h.window(0, 2).unwrap(), &[100.0, 101.0, 102.0]);
        assert!(h.window(-1, 2).is_err());
        assert!(h.value_at(9).is_err());
    }

    #[test]
    fn rejects_nonpositive_values() {
        let g = grid();
        assert!(ObservedHistory::new(g, 0, 2, vec![100.0, 0.0, 101.0]).is_err());
        assert!(ObservedHistory::new(g, 0, 2, vec![100.0, f64::NAN, 101.0]).is_err());
    }

    #[test]
    fn rejects_length_mismatch() {
        let g = grid();
        assert!(ObservedHistory::new(g, 0, 2, vec![100.0, 101.0]).is_err());
    }

    #[test]
    fn from_samples_interpolates() {
        let g = grid();
        let h =
            ObservedHistory::from_samples(&[(-0.5, 80.0), (0.5, 96.0)], &g, 8, -8).unwrap();
        assert_eq!(h.start_index(), -8);
        assert_eq!(h.spot(), 96.0);
        // t = 0 sits midway: 88.
        assert!((h.value_at(0).unwrap() - 88.0).abs() < 1e-12);
    }
}

//! Initial price history on [-L, 0].

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Price samples phi on the pre-period grid indices [-n_pre, 0].
///
/// phi(0) must be strictly positive because simulation grows the path
/// multiplicatively from it. Earlier samples only feed lagged coefficient
/// lookups and are merely required to be finite.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSegment {
    values: Vec<f64>,
}

impl InitialSegment {
    /// Constant history phi(t) = level.
    pub fn constant(level: f64, grid: &TimeGrid) -> Result<Self> {
        Self::from_values(vec![level; grid.n_pre + 1])
    }

    /// Takes one value per grid index in [-n_pre, 0], oldest first.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput("initial segment cannot be empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("initial segment values must be finite".into()));
        }
        let origin = *values.last().unwrap();
        if origin <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "phi(0) must be positive (got {origin})"
            )));
        }
        Ok(InitialSegment { values })
    }

    /// Linear interpolation of raw (t, price) samples onto the grid.
    ///
    /// Samples must be strictly increasing in t and must cover [-L, 0]; the
    /// value at t = 0 is taken verbatim from a sample lying exactly on the
    /// origin (within 1e-9 of a step), never interpolated.
    pub fn from_samples(samples: &[(f64, f64)], grid: &TimeGrid) -> Result<Self> {
        let eps = 1e-9 * grid.step;
        if !samples.iter().any(|&(t, _)| t.abs() <= eps) {
            return Err(Error::InvalidInput(
                "history must contain a sample exactly at t = 0; phi(0) is never interpolated"
                    .into(),
            ));
        }
        interpolate_onto(samples, grid, -(grid.n_pre as i64), 0).and_then(Self::from_values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// phi(0).
    pub fn origin(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// Interpolate raw samples onto grid indices [lo, hi]. A grid time that
/// coincides with a sample (within 1e-9 steps) takes the sample value exactly.
pub(crate) fn interpolate_onto(
    samples: &[(f64, f64)],
    grid: &TimeGrid,
    lo: i64,
    hi: i64,
) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no history samples supplied".into()));
    }
    if samples.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::InvalidInput(
            "history samples must be strictly increasing in t".into(),
        ));
    }
    if samples.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite()) {
        return Err(Error::InvalidInput("history samples must be finite".into()));
    }
    let h = grid.step;
    let eps = 1e-9 * h;
    let first = samples[0].0;
    let last = samples[samples.len() - 1].0;
    if first > grid.time(lo) + eps || last < grid.time(hi) - eps {
        return Err(Error::WindowNotCovered {
            need_lo: lo,
            need_hi: hi,
            have_lo: (first / h).ceil() as i64,
            have_hi: (last / h).floor() as i64,
        });
    }
    let mut out = Vec::with_capacity((hi - lo + 1) as usize);
    for i in lo..=hi {
        let t = grid.time(i);
        // Index of the first sample with sample.t >= t - eps.
        let k = samples.partition_point(|&(st, _)| st < t - eps);
        let v = if k < samples.len() && (samples[k].0 - t).abs() <= eps {
            samples[k].1
        } else {
            let (t0, v0) = samples[k - 1];
            let (t1, v1) = samples[k];
            v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        };
        out.push(v);
    }
    Ok(out)
}

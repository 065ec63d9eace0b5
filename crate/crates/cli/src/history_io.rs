//! Observed-history ingestion: CSV with header `t,S`, strictly increasing t.
//!
//! Samples are linearly interpolated onto the grid by the library; a window
//! that does not cover what the requested valuation needs is a hard failure,
//! never an extrapolation.

use crate::Failure;
use sddequant::{InitialSegment, ObservedHistory, TimeGrid};
use std::path::Path;

pub fn read_samples(path: &Path) -> Result<Vec<(f64, f64)>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if is_header(header) => {}
        Some((n, header)) => {
            return Err(Failure::input(format!(
                "{}: line {}: expected header `t,S`, got `{header}`",
                path.display(),
                n + 1
            )))
        }
        None => return Err(Failure::input(format!("{}: empty history file", path.display()))),
    }
    let mut samples: Vec<(f64, f64)> = Vec::new();
    for (n, line) in lines {
        let row = n + 1;
        let mut fields = line.split(',');
        let (t, s) = match (fields.next(), fields.next(), fields.next()) {
            (Some(t), Some(s), None) => (field(path, row, t)?, field(path, row, s)?),
            _ => {
                return Err(Failure::input(format!(
                    "{}: line {row}: expected exactly two fields `t,S`",
                    path.display()
                )))
            }
        };
        if let Some(&(prev, _)) = samples.last() {
            if t <= prev {
                return Err(Failure::input(format!(
                    "{}: line {row}: t = {t} does not increase (previous {prev})",
                    path.display()
                )));
            }
        }
        samples.push((t, s));
    }
    if samples.is_empty() {
        return Err(Failure::input(format!("{}: no samples after header", path.display())));
    }
    Ok(samples)
}

/// History for pricing: covers [t0 - L, t0] on the grid.
pub fn read_history(
    path: &Path,
    grid: &TimeGrid,
    t0_index: i64,
) -> Result<ObservedHistory, Failure> {
    let samples = read_samples(path)?;
    let lo = t0_index - grid.n_pre as i64;
    Ok(ObservedHistory::from_samples(&samples, grid, t0_index, lo)?)
}

/// Initial segment for simulation and hedging: covers [-L, 0] and must
/// include a sample at t = 0 itself.
pub fn read_segment(path: &Path, grid: &TimeGrid) -> Result<InitialSegment, Failure> {
    let samples = read_samples(path)?;
    Ok(InitialSegment::from_samples(&samples, grid)?)
}

fn is_header(line: &str) -> bool {
    let mut fields = line.split(',').map(str::trim);
    fields.next() == Some("t") && fields.next() == Some("S") && fields.next().is_none()
}

fn field(path: &Path, row: usize, text: &str) -> Result<f64, Failure> {
    let value: f64 = text
        .trim()
        .parse()
        .map_err(|_| Failure::input(format!("{}: line {row}: `{text}` is not a number", path.display())))?;
    if !value.is_finite() {
        return Err(Failure::input(format!("{}: line {row}: {value} is not finite", path.display())));
    }
    Ok(value)
}

//! Uniform time grids and the composite trapezoid rule used throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform sampling `t_i = t0 + i * dt`, `i < len`. Times are in units of 1/γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    pub const MIN_LEN: usize = 8;

    pub fn new(t0: f64, dt: f64, len: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return Err(Error::InvalidParameter(format!("grid spacing dt = {dt}")));
        }
        if len < Self::MIN_LEN {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least {} samples, got {len}",
                Self::MIN_LEN
            )));
        }
        Ok(TimeGrid { t0, dt, len })
    }

    /// Grid covering `[start, stop]` inclusive (stop rounded to the nearest sample).
    pub fn span(start: f64, dt: f64, stop: f64) -> Result<Self> {
        if !(stop > start) {
            return Err(Error::InvalidParameter(format!(
                "empty grid span [{start}, {stop}]"
            )));
        }
        let steps = ((stop - start) / dt).round() as usize;
        Self::new(start, dt, steps + 1)
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn end(&self) -> f64 {
        self.time(self.len - 1)
    }

    pub fn duration(&self) -> f64 {
        self.dt * (self.len - 1) as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |i| self.time(i))
    }

    /// Same sampling up to rounding in the stored start and spacing.
    pub fn matches(&self, other: &TimeGrid) -> bool {
        let tol = 1e-9 * self.dt;
        self.len == other.len
            && (self.dt - other.dt).abs() <= 1e-12 * self.dt
            && (self.t0 - other.t0).abs() <= tol.max(1e-12 * self.t0.abs())
    }

    pub fn ensure_matches(&self, other: &TimeGrid) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Index of the sample nearest to `t`, clamped to the grid.
    pub fn nearest_index(&self, t: f64) -> usize {
        let x = ((t - self.t0) / self.dt).round();
        if x <= 0.0 {
            0
        } else {
            (x as usize).min(self.len - 1)
        }
    }

    /// Same spacing and length, shifted start.
    pub fn shifted(&self, offset: f64) -> TimeGrid {
        TimeGrid {
            t0: self.t0 + offset,
            ..*self
        }
    }
}

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            dt * (inner + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// Running trapezoid integral, `out[0] = 0`.
pub fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * dt * (w[0] + w[1]);
        out.push(acc);
    }
    out.truncate(values.len());
    out
}

/// Piecewise-linear interpolation of grid samples, clamped outside the grid.
pub fn interpolate(grid: &TimeGrid, values: &[f64], t: f64) -> f64 {
    let x = (t - grid.t0) / grid.dt;
    if x <= 0.0 {
        return values[0];
    }
    let i = x.floor() as usize;
    if i + 1 >= grid.len {
        return values[grid.len - 1];
    }
    let frac = x - i as f64;
    values[i] + frac * (values[i + 1] - values[i])
}

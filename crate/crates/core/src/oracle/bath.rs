use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envelope::PulseEnvelope;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Smallest ratio of bath width to pulse RMS bandwidth accepted for an input.
pub const BANDWIDTH_RATIO: f64 = 20.0;

/// Resolution of the discretized continuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    /// Total detuning span W.
    pub width: f64,
    /// Mode spacing δ.
    pub spacing: f64,
}

impl Default for BathSpec {
    fn default() -> Self {
        BathSpec {
            width: 200.0,
            spacing: 1.0 / 50.0,
        }
    }
}

/// Flat band of modes `Δ_k = −W/2 + kδ` with uniform coupling κ.
#[derive(Debug, Clone, PartialEq)]
pub struct BathGrid {
    spec: BathSpec,
    gamma: f64,
    kappa: f64,
    detunings: Vec<f64>,
}

impl BathGrid {
    /// κ is set so that `γ = 2πκ²/δ`. `W/δ` must be an integer.
    pub fn new(spec: BathSpec, gamma: f64) -> Result<Self> {
        let BathSpec { width, spacing } = spec;
        if !(width > 0.0 && spacing > 0.0 && width.is_finite() && spacing < width) {
            return Err(Error::InvalidParameter(format!(
                "bath width {width} and spacing {spacing}"
            )));
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma = {gamma}")));
        }
        let ratio = width / spacing;
        let intervals = ratio.round();
        if (ratio - intervals).abs() > 1e-9 * ratio {
            return Err(Error::InvalidParameter(format!(
                "bath width {width} is not a multiple of the spacing {spacing}"
            )));
        }
        let n = intervals as usize + 1;
        let detunings = (0..n).map(|k| -0.5 * width + k as f64 * spacing).collect();
        Ok(BathGrid {
            spec,
            gamma,
            kappa: (gamma * spacing / (2.0 * PI)).sqrt(),
            detunings,
        })
    }

    pub fn spec(&self) -> BathSpec {
        self.spec
    }

    pub fn width(&self) -> f64 {
        self.spec.width
    }

    pub fn spacing(&self) -> f64 {
        self.spec.spacing
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn len(&self) -> usize {
        self.detunings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detunings.is_empty()
    }

    /// Time after which the discrete band rephases, `2π/δ`.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.spec.spacing
    }

    pub fn check_window(&self, window: f64) -> Result<()> {
        let recurrence = self.recurrence_time();
        if recurrence <= window {
            return Err(Error::Recurrence { recurrence, window });
        }
        Ok(())
    }

    /// Largest RK4 step allowed for this band.
    pub fn step_bound(&self) -> f64 {
        (0.02 / self.gamma).min(0.1 / self.spec.width)
    }

    /// Bath amplitudes of a free single-photon wavepacket whose field at the
    /// cavity is `h(t)`, with phases referenced to `t_start`.
    ///
    /// `ξ_k = −sqrt(δ/2π) ∫ h(t) e^{iΔ_k (t − t_start)} dt`, renormalized to Σ|ξ|² = 1.
    pub fn discretize_input(&self, h: &PulseEnvelope, t_start: f64) -> Result<Vec<Complex64>> {
        if h.is_zero() {
            return Ok(vec![Complex64::new(0.0, 0.0); self.len()]);
        }
        h.ensure_normalized()?;
        let pulse_bandwidth = h.rms_bandwidth();
        if self.spec.width < BANDWIDTH_RATIO * pulse_bandwidth {
            return Err(Error::Bandwidth {
                bandwidth: self.spec.width,
                pulse_bandwidth,
            });
        }
        let grid = *h.grid();
        self.check_window(grid.end() - t_start.min(grid.t0))?;
        let dt = grid.dt;
        let samples = h.samples();
        let last = samples.len() - 1;
        let scale = -(self.spec.spacing / (2.0 * PI)).sqrt() * dt;
        let mut xi: Vec<Complex64> = self
            .detunings
            .par_iter()
            .map(|&d| {
                let step = Complex64::from_polar(1.0, d * dt);
                let mut phase = Complex64::from_polar(1.0, d * (grid.t0 - t_start));
                let mut acc = Complex64::new(0.0, 0.0);
                for (i, s) in samples.iter().enumerate() {
                    let w = if i == 0 || i == last { 0.5 } else { 1.0 };
                    acc += s * phase * w;
                    phase *= step;
                }
                acc * scale
            })
            .collect();
        let norm: f64 = xi.iter().map(|z| z.norm_sqr()).sum();
        let inv = norm.sqrt().recip();
        for z in &mut xi {
            *z *= inv;
        }
        Ok(xi)
    }

    /// Field at the cavity carried by freely evolving bath amplitudes `xi`
    /// (given at `t_ref`), in envelope units: `−(κ/√γ) Σ_k ξ_k e^{−iΔ_k (t − t_ref)}`.
    pub fn free_field(&self, xi: &[Complex64], t_ref: f64, grid: TimeGrid) -> Result<PulseEnvelope> {
        if xi.len() != self.len() {
            return Err(Error::DimMismatch {
                left: self.len(),
                right: xi.len(),
            });
        }
        const CHUNK: usize = 256;
        let scale = -self.kappa / self.gamma.sqrt();
        let starts: Vec<usize> = (0..grid.len).step_by(CHUNK).collect();
        let chunks: Vec<Vec<Complex64>> = starts
            .par_iter()
            .map(|&start| {
                let len = CHUNK.min(grid.len - start);
                let mut out = vec![Complex64::new(0.0, 0.0); len];
                for (&d, &x) in self.detunings.iter().zip(xi) {
                    let step = Complex64::from_polar(1.0, -d * grid.dt);
                    let mut phase = x * Complex64::from_polar(1.0, -d * (grid.time(start) - t_ref));
                    for o in out.iter_mut() {
                        *o += phase;
                        phase *= step;
                    }
                }
                out
            })
            .collect();
        let samples = chunks.into_iter().flatten().map(|z| z * scale).collect();
        PulseEnvelope::new(grid, samples)
    }
}

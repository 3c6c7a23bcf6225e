//! Temporal mode functions h(t) sampled on a uniform grid.
//!
//! Units: time in 1/γ, amplitudes in √γ, so that a normalized single-photon
//! envelope has ∫|h|²dt = 1.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{trapezoid, TimeGrid};

/// Tolerance on ∫|h|²dt − 1 for an envelope to count as normalized.
pub const NORM_TOL: f64 = 1e-10;

/// Largest norm deficit accepted from an analytic pulse cut off by its grid.
pub const TRUNCATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PulseEnvelope {
    grid: TimeGrid,
    samples: Vec<Complex64>,
}

impl PulseEnvelope {
    pub fn new(grid: TimeGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len {
            return Err(Error::DimMismatch {
                left: grid.len,
                right: samples.len(),
            });
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("non-finite envelope sample".into()));
        }
        Ok(PulseEnvelope { grid, samples })
    }

    pub fn from_real(grid: TimeGrid, samples: &[f64]) -> Result<Self> {
        Self::new(grid, samples.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = grid.times().map(f).collect();
        PulseEnvelope { grid, samples }
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        PulseEnvelope {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.len],
        }
    }

    /// Hyperbolic-secant pulse `sech((t - t_c)/T) / sqrt(2T)`, renormalized on the grid.
    ///
    /// Fails with [`Error::Truncation`] when the grid cuts off more than
    /// [`TRUNCATION_TOL`] of the pulse energy.
    pub fn sech(width: f64, center: f64, grid: TimeGrid) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidParameter(format!("sech width {width}")));
        }
        let amp = 1.0 / (2.0 * width).sqrt();
        let env = Self::from_fn(grid, |t| {
            Complex64::new(amp / ((t - center) / width).cosh(), 0.0)
        });
        env.renormalized_within(TRUNCATION_TOL)
    }

    /// Gaussian pulse whose intensity |h|² has standard deviation `width`.
    pub fn gaussian(width: f64, center: f64, grid: TimeGrid) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidParameter(format!("gaussian width {width}")));
        }
        let amp = (width * (2.0 * std::f64::consts::PI).sqrt()).sqrt().recip();
        let env = Self::from_fn(grid, |t| {
            let x = (t - center) / width;
            Complex64::new(amp * (-0.25 * x * x).exp(), 0.0)
        });
        env.renormalized_within(TRUNCATION_TOL)
    }

    /// Rectangular pulse of unit energy on `[start, start + duration)`.
    pub fn square(start: f64, duration: f64, grid: TimeGrid) -> Result<Self> {
        if !(duration > 0.0) {
            return Err(Error::InvalidParameter(format!("square duration {duration}")));
        }
        let amp = 1.0 / duration.sqrt();
        let env = Self::from_fn(grid, |t| {
            if t >= start && t < start + duration {
                Complex64::new(amp, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        env.normalized()
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    /// ∫|h|²dt by the trapezoid rule.
    pub fn norm(&self) -> f64 {
        trapezoid(&self.intensity(), self.grid.dt)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= NORM_TOL
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() <= NORM_TOL {
            Ok(())
        } else {
            Err(Error::Unnormalized { norm })
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PulseEnvelope {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let norm = self.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter("cannot normalize a zero envelope".into()));
        }
        Ok(self.scaled(norm.sqrt().recip()))
    }

    fn renormalized_within(self, tol: f64) -> Result<Self> {
        let deficit = (1.0 - self.norm()).abs();
        if deficit > tol {
            return Err(Error::Truncation { deficit });
        }
        self.normalized()
    }

    /// Multiply every sample by `exp(i phase)`.
    pub fn with_phase(&self, phase: f64) -> Self {
        let rot = Complex64::from_polar(1.0, phase);
        PulseEnvelope {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z * rot).collect(),
        }
    }

    /// Same samples on a grid shifted by `offset`.
    pub fn shifted(&self, offset: f64) -> Self {
        PulseEnvelope {
            grid: self.grid.shifted(offset),
            samples: self.samples.clone(),
        }
    }

    /// Sample order reversed on the same grid: `h_rev(t0 + i dt) = h(t_end - i dt)`.
    pub fn time_reversed(&self) -> Self {
        PulseEnvelope {
            grid: self.grid,
            samples: self.samples.iter().rev().copied().collect(),
        }
    }

    /// ∫ conj(self) · other dt on a shared grid.
    pub fn overlap(&self, other: &PulseEnvelope) -> Result<Complex64> {
        self.grid.ensure_matches(&other.grid)?;
        let re: Vec<f64> = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a.conj() * b).re)
            .collect();
        let im: Vec<f64> = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a.conj() * b).im)
            .collect();
        let dt = self.grid.dt;
        Ok(Complex64::new(trapezoid(&re, dt), trapezoid(&im, dt)))
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Full RMS angular-frequency width, `2 sqrt(<ω²> - <ω>²)`, from centered differences.
    pub fn rms_bandwidth(&self) -> f64 {
        let n = self.samples.len();
        let dt = self.grid.dt;
        let norm = self.norm();
        if !(norm > 0.0) {
            return 0.0;
        }
        let mut second = vec![0.0; n];
        let mut first = vec![0.0; n];
        for i in 1..n - 1 {
            let d = (self.samples[i + 1] - self.samples[i - 1]) / (2.0 * dt);
            second[i] = d.norm_sqr();
            first[i] = (self.samples[i].conj() * d).im;
        }
        let mean = trapezoid(&first, dt) / norm;
        let var = (trapezoid(&second, dt) / norm - mean * mean).max(0.0);
        2.0 * var.sqrt()
    }
}

//! Reference integrators that keep the bath explicitly: a discretized band of
//! free-field modes coupled either to the dark amplitude directly, or to a
//! single-excitation Λ ensemble with its excited and spin amplitudes.

mod bath;
mod engine;

pub use bath::{BathGrid, BathSpec, BANDWIDTH_RATIO};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dark::{ControlSchedule, DarkAmplitudeTrajectory, RabiSchedule, SystemParams};
use crate::envelope::PulseEnvelope;
use crate::error::{Error, Result};
use crate::grid::{interpolate, TimeGrid};
use engine::Coupled;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Requested RK4 step; the largest allowed step when absent. The step
    /// actually used divides the schedule spacing evenly and never exceeds this.
    pub dt: Option<f64>,
}

/// Substeps per schedule interval for a step bound.
fn substeps(sample_dt: f64, requested: Option<f64>, bound: f64) -> Result<usize> {
    let dt = match requested {
        Some(dt) if !(dt > 0.0) => {
            return Err(Error::InvalidParameter(format!("oracle step {dt}")));
        }
        Some(dt) if dt > bound * (1.0 + 1e-12) => return Err(Error::StepSize { dt, bound }),
        Some(dt) => dt,
        None => bound,
    };
    Ok((sample_dt / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize)
}

/// Bath amplitudes of the input `h` referenced to its first sample.
pub fn discretize_input(h: &PulseEnvelope, bath: &BathGrid, t_start: f64) -> Result<Vec<Complex64>> {
    bath.discretize_input(h, t_start)
}

/// Output of [`integrate_mode_equations`], sampled on the schedule grid.
#[derive(Debug, Clone)]
pub struct ModeTrajectory {
    pub grid: TimeGrid,
    /// Collective amplitude D(t); the dark amplitude of the adiabatic model is `i D`.
    pub dark: Vec<Complex64>,
    /// `Σ|ξ|² + |D|²`
    pub norm: Vec<f64>,
    /// Bath amplitudes at the last sample.
    pub xi_final: Vec<Complex64>,
    pub step: f64,
}

impl ModeTrajectory {
    pub fn norm_drift(&self) -> f64 {
        norm_drift(&self.norm)
    }

    /// Dark amplitude in the phase convention of the adiabatic model.
    pub fn dark_amplitude(&self) -> DarkAmplitudeTrajectory {
        DarkAmplitudeTrajectory {
            grid: self.grid,
            d: self.dark.iter().map(|z| I * z).collect(),
        }
    }

    /// `max_t | |D(t)| − |d(t)| |` against a trajectory on the same grid.
    pub fn max_deviation(&self, d: &DarkAmplitudeTrajectory) -> Result<f64> {
        self.grid.ensure_matches(&d.grid)?;
        Ok(self
            .dark
            .iter()
            .zip(&d.d)
            .map(|(a, b)| (a.norm() - b.norm()).abs())
            .fold(0.0, f64::max))
    }

    /// Outgoing field reconstructed from the final bath state by free backward evolution.
    ///
    /// Only samples before the last one are the emitted field: at the final
    /// time the bath holds the emission up to `t_end` and the input still to
    /// arrive, so the last sample is the mean of the two one-sided values.
    pub fn output_envelope(&self, bath: &BathGrid) -> Result<PulseEnvelope> {
        bath.free_field(&self.xi_final, self.grid.end(), self.grid)
    }
}

fn norm_drift(norm: &[f64]) -> f64 {
    let n0 = norm[0];
    norm.iter().map(|n| (n - n0).abs()).fold(0.0, f64::max)
}

struct ModeSystem<'a> {
    kappa: f64,
    schedule: &'a ControlSchedule,
}

impl Coupled<1> for ModeSystem<'_> {
    fn rhs(&self, t: f64, y: &[Complex64; 1], bath_sum: Complex64) -> ([Complex64; 1], Complex64) {
        let c = self.schedule.value_at(t);
        let coupling = I * (self.kappa * c);
        ([coupling * bath_sum], coupling * y[0])
    }
}

/// Integrate `Ḋ = iκ cosθ Σξ_k`, `ξ̇_k = −iΔ_k ξ_k + iκ cosθ D` over the
/// schedule grid from `D = 0` and bath amplitudes `xi0` at the first sample.
pub fn integrate_mode_equations(
    xi0: &[Complex64],
    schedule: &ControlSchedule,
    bath: &BathGrid,
    options: &OracleOptions,
) -> Result<ModeTrajectory> {
    if xi0.len() != bath.len() {
        return Err(Error::DimMismatch {
            left: bath.len(),
            right: xi0.len(),
        });
    }
    let grid = *schedule.grid();
    bath.check_window(grid.duration())?;
    let m = substeps(grid.dt, options.dt, bath.step_bound())?;
    let step = grid.dt / m as f64;
    let sys = ModeSystem {
        kappa: bath.kappa(),
        schedule,
    };
    let out = engine::run(
        &sys,
        xi0,
        bath.detunings(),
        [Complex64::new(0.0, 0.0)],
        grid.t0,
        step,
        m,
        grid.len,
    );
    Ok(ModeTrajectory {
        grid,
        dark: out.y.iter().map(|y| y[0]).collect(),
        norm: out.norm,
        xi_final: out.xi_final,
        step,
    })
}

/// Output of [`integrate_lambda_system`], sampled on the Rabi-schedule grid.
#[derive(Debug, Clone)]
pub struct LambdaTrajectory {
    pub grid: TimeGrid,
    /// Cavity photon amplitude.
    pub e: Vec<Complex64>,
    /// Collective excited-state amplitude.
    pub p: Vec<Complex64>,
    /// Collective spin amplitude.
    pub s: Vec<Complex64>,
    /// `Σ|ξ|² + |e|² + |p|² + |s|²`
    pub norm: Vec<f64>,
    pub xi_final: Vec<Complex64>,
    pub step: f64,
}

impl LambdaTrajectory {
    pub fn pop_e(&self) -> Vec<f64> {
        self.e.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn pop_p(&self) -> Vec<f64> {
        self.p.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn pop_s(&self) -> Vec<f64> {
        self.s.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Final spin population: the probability that the photon was stored.
    pub fn capture_efficiency(&self) -> f64 {
        self.s.last().map_or(0.0, |z| z.norm_sqr())
    }

    pub fn norm_drift(&self) -> f64 {
        norm_drift(&self.norm)
    }

    /// Dark combination `cosθ e − sinθ s` with θ from the drive.
    pub fn dark_projection(&self, omega: &RabiSchedule, params: &SystemParams) -> Vec<Complex64> {
        let g = params.g_sqrt_n;
        self.grid
            .times()
            .enumerate()
            .map(|(i, t)| {
                let w = omega.value_at(t);
                let r = w.hypot(g);
                (self.e[i] * w - self.s[i] * g) / r
            })
            .collect()
    }
}

struct LambdaSystem<'a> {
    kappa: f64,
    g: f64,
    half_gamma_a: f64,
    omega: &'a RabiSchedule,
}

impl Coupled<3> for LambdaSystem<'_> {
    fn rhs(&self, t: f64, y: &[Complex64; 3], bath_sum: Complex64) -> ([Complex64; 3], Complex64) {
        let [e, p, s] = *y;
        let w = interpolate(&self.omega.grid, &self.omega.omega, t);
        let de = I * (bath_sum * self.kappa + p * self.g);
        let dp = -p * self.half_gamma_a + I * (e * self.g + s * w);
        let ds = I * p * w;
        ([de, dp, ds], I * self.kappa * e)
    }
}

/// Single-excitation Λ ensemble in the cavity, driven by the photon `h` and
/// the control `omega`, with the excited amplitude decaying at `γ_a/2`.
pub fn integrate_lambda_system(
    h: &PulseEnvelope,
    omega: &RabiSchedule,
    params: &SystemParams,
    bath: &BathGrid,
    options: &OracleOptions,
) -> Result<LambdaTrajectory> {
    params.validate()?;
    let grid = omega.grid;
    h.grid().ensure_matches(&grid)?;
    if omega.omega.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::InvalidParameter("Rabi frequencies must be finite and non-negative".into()));
    }
    let xi0 = bath.discretize_input(h, grid.t0)?;
    bath.check_window(grid.duration())?;
    let bound = bath.step_bound().min(0.05 / params.g_sqrt_n.max(omega.max()));
    let m = substeps(grid.dt, options.dt, bound)?;
    let step = grid.dt / m as f64;
    let sys = LambdaSystem {
        kappa: bath.kappa(),
        g: params.g_sqrt_n,
        half_gamma_a: 0.5 * params.gamma_a,
        omega,
    };
    let zero = Complex64::new(0.0, 0.0);
    let out = engine::run(&sys, &xi0, bath.detunings(), [zero; 3], grid.t0, step, m, grid.len);
    Ok(LambdaTrajectory {
        grid,
        e: out.y.iter().map(|y| y[0]).collect(),
        p: out.y.iter().map(|y| y[1]).collect(),
        s: out.y.iter().map(|y| y[2]).collect(),
        norm: out.norm,
        xi_final: out.xi_final,
        step,
    })
}

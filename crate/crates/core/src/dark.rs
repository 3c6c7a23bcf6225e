//! Dark-state ladder of the driven Λ-ensemble and its adiabatic capture dynamics.
//!
//! Under adiabatic elimination of the bright and excited states, a field with
//! envelope h(t) drives the dark amplitude
//!
//! ```text
//! ḋ = -(γ/2) cos²θ d + √γ cosθ h,        h_out = h - √γ cosθ d
//! ```
//!
//! which is solved here in integral form on the envelope's grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{project_and_renormalize, pure_loss, LossRouting};
use crate::envelope::PulseEnvelope;
use crate::error::{Error, Result};
use crate::fock::FockStateMatrix;
use crate::grid::{cumulative_trapezoid, interpolate, TimeGrid};

/// Physical constants in units of the bare-cavity decay rate γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    /// Bare-cavity decay rate; fixed to 1 by the unit convention.
    pub gamma: f64,
    /// Collective coupling g√N.
    pub g_sqrt_n: f64,
    /// Excited-state linewidth γ_a.
    pub gamma_a: f64,
    /// Metastable (dark-state) decay rate γ_0.
    pub gamma_0: f64,
    /// Number of atoms; only enters displayed dark-state algebra.
    pub n_atoms: u64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            gamma: 1.0,
            g_sqrt_n: 10.0,
            gamma_a: 1.0,
            gamma_0: 1e-3,
            n_atoms: 1_000_000,
        }
    }
}

impl SystemParams {
    pub fn new(g_sqrt_n: f64, gamma_a: f64, gamma_0: f64) -> Result<Self> {
        let p = SystemParams {
            g_sqrt_n,
            gamma_a,
            gamma_0,
            ..Default::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "gamma must be 1 (time unit 1/gamma), got {}",
                self.gamma
            )));
        }
        if !(self.g_sqrt_n > 0.0) || !self.g_sqrt_n.is_finite() {
            return Err(Error::InvalidParameter(format!("g_sqrt_n = {}", self.g_sqrt_n)));
        }
        for (name, v) in [("gamma_a", self.gamma_a), ("gamma_0", self.gamma_0)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {v}")));
            }
        }
        Ok(())
    }

    /// g²N
    pub fn g2n(&self) -> f64 {
        self.g_sqrt_n * self.g_sqrt_n
    }
}

/// Mixing-angle trajectory cos θ(t) on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    grid: TimeGrid,
    cos_theta: Vec<f64>,
}

impl ControlSchedule {
    pub fn new(grid: TimeGrid, cos_theta: Vec<f64>) -> Result<Self> {
        if cos_theta.len() != grid.len {
            return Err(Error::DimMismatch {
                left: grid.len,
                right: cos_theta.len(),
            });
        }
        if let Some((i, c)) = cos_theta
            .iter()
            .enumerate()
            .find(|(_, c)| !(**c >= 0.0 && **c <= 1.0))
        {
            return Err(Error::InvalidParameter(format!(
                "cos(theta) = {c} outside [0, 1] at t = {}",
                grid.time(i)
            )));
        }
        Ok(ControlSchedule { grid, cos_theta })
    }

    pub fn constant(grid: TimeGrid, cos_theta: f64) -> Result<Self> {
        Self::new(grid, vec![cos_theta; grid.len])
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.times().map(f).collect())
    }

    /// From sampled Rabi frequencies via the mixing-angle definition.
    pub fn from_rabi(grid: TimeGrid, omega: &[f64], params: &SystemParams) -> Result<Self> {
        let c = omega
            .iter()
            .map(|&w| mixing_angle_from_rabi(w, params))
            .collect::<Result<Vec<_>>>()?;
        Self::new(grid, c)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_theta
    }

    pub fn value_at(&self, t: f64) -> f64 {
        interpolate(&self.grid, &self.cos_theta, t)
    }

    /// Samples reversed in order on the same grid.
    pub fn time_reversed(&self) -> Self {
        ControlSchedule {
            grid: self.grid,
            cos_theta: self.cos_theta.iter().rev().copied().collect(),
        }
    }

    /// Rabi frequency per sample, `None` where cos θ = 1.
    pub fn rabi(&self, params: &SystemParams) -> Vec<Option<f64>> {
        self.cos_theta
            .iter()
            .map(|&c| rabi_from_mixing_angle(c, params).ok())
            .collect()
    }

    pub fn rabi_schedule(&self, params: &SystemParams) -> Result<RabiSchedule> {
        let omega = self
            .cos_theta
            .iter()
            .map(|&c| rabi_from_mixing_angle(c, params))
            .collect::<Result<Vec<_>>>()?;
        Ok(RabiSchedule {
            grid: self.grid,
            omega,
        })
    }
}

/// Sampled control Rabi frequency Ω(t).
#[derive(Debug, Clone, PartialEq)]
pub struct RabiSchedule {
    pub grid: TimeGrid,
    pub omega: Vec<f64>,
}

impl RabiSchedule {
    pub fn value_at(&self, t: f64) -> f64 {
        interpolate(&self.grid, &self.omega, t)
    }

    pub fn max(&self) -> f64 {
        self.omega.iter().copied().fold(0.0, f64::max)
    }
}

/// Dark-state amplitude d(t) sampled on the input grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DarkAmplitudeTrajectory {
    pub grid: TimeGrid,
    pub d: Vec<Complex64>,
}

impl DarkAmplitudeTrajectory {
    pub fn final_value(&self) -> Complex64 {
        *self.d.last().expect("grid has at least 8 samples")
    }

    pub fn abs(&self) -> Vec<f64> {
        self.d.iter().map(|z| z.norm()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// cos θ = Ω / sqrt(Ω² + g²N)
pub fn mixing_angle_from_rabi(omega: f64, params: &SystemParams) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::InvalidParameter(format!("negative Rabi frequency {omega}")));
    }
    if omega.is_infinite() {
        return Ok(1.0);
    }
    Ok(omega / omega.hypot(params.g_sqrt_n))
}

/// Ω = g√N c / sqrt(1 − c²)
pub fn rabi_from_mixing_angle(cos_theta: f64, params: &SystemParams) -> Result<f64> {
    if cos_theta == 1.0 {
        return Err(Error::UnboundedDrive);
    }
    if !(0.0..1.0).contains(&cos_theta) {
        return Err(Error::InvalidParameter(format!("cos(theta) = {cos_theta} outside [0, 1)")));
    }
    Ok(params.g_sqrt_n * cos_theta / ((1.0 - cos_theta) * (1.0 + cos_theta)).sqrt())
}

/// Coefficients of |n−k⟩|c^k⟩, k = 0..=n, in the dark state |D,n⟩.
pub fn dark_state_coeffs(n: usize, omega: f64, params: &SystemParams) -> Result<Vec<f64>> {
    let cos = mixing_angle_from_rabi(omega, params)?;
    let sin = params.g_sqrt_n / omega.hypot(params.g_sqrt_n);
    let sin = if omega.is_infinite() { 0.0 } else { sin };
    let mut binom = 1.0f64;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k > 0 {
            binom *= (n - k + 1) as f64 / k as f64;
        }
        out.push(binom.sqrt() * cos.powi((n - k) as i32) * (-sin).powi(k as i32));
    }
    Ok(out)
}

/// Evolve d(t) on the schedule grid from `d_init` at the first sample, with
/// optional input envelope (zero input when `None`).
///
/// The inner exponent is accumulated once, so the whole trajectory costs
/// O(len); the result equals the composite-trapezoid evaluation of the
/// double integral.
pub(crate) fn evolve_dark_amplitude(
    input: Option<&PulseEnvelope>,
    schedule: &ControlSchedule,
    params: &SystemParams,
    d_init: Complex64,
) -> DarkAmplitudeTrajectory {
    let grid = *schedule.grid();
    let dt = grid.dt;
    let c = schedule.cos_theta();
    let cos2: Vec<f64> = c.iter().map(|x| x * x).collect();
    let phi = cumulative_trapezoid(&cos2, dt);
    let sqrt_gamma = params.gamma.sqrt();
    let half = 0.5 * params.gamma;

    let source = |i: usize| -> Complex64 {
        match input {
            Some(h) => h.samples()[i] * (sqrt_gamma * c[i] * 0.5 * dt),
            None => Complex64::new(0.0, 0.0),
        }
    };

    let mut d = Vec::with_capacity(grid.len);
    d.push(d_init);
    // carry = d_{i-1} + (dt/2) √γ c h at i-1
    let mut carry = d_init + source(0);
    for i in 1..grid.len {
        let decay = (-half * (phi[i] - phi[i - 1])).exp();
        let s = source(i);
        let di = carry * decay + s;
        d.push(di);
        carry = di + s;
    }
    DarkAmplitudeTrajectory { grid, d }
}

/// Dark amplitude d(t) driven by envelope `h` under control `schedule`, from d(t0) = 0.
pub fn dark_amplitude(
    h: &PulseEnvelope,
    schedule: &ControlSchedule,
    params: &SystemParams,
) -> Result<DarkAmplitudeTrajectory> {
    h.grid().ensure_matches(schedule.grid())?;
    if h.is_zero() {
        return Ok(DarkAmplitudeTrajectory {
            grid: *schedule.grid(),
            d: vec![Complex64::new(0.0, 0.0); schedule.grid().len],
        });
    }
    h.ensure_normalized()?;
    Ok(evolve_dark_amplitude(
        Some(h),
        schedule,
        params,
        Complex64::new(0.0, 0.0),
    ))
}

/// Outgoing envelope `h_out = h − √γ cosθ d`.
pub fn output_envelope(
    h: &PulseEnvelope,
    traj: &DarkAmplitudeTrajectory,
    params: &SystemParams,
    schedule: &ControlSchedule,
) -> Result<PulseEnvelope> {
    h.grid().ensure_matches(&traj.grid)?;
    h.grid().ensure_matches(schedule.grid())?;
    let sqrt_gamma = params.gamma.sqrt();
    let samples = h
        .samples()
        .iter()
        .zip(&traj.d)
        .zip(schedule.cos_theta())
        .map(|((hi, di), ci)| hi - di * (sqrt_gamma * ci))
        .collect();
    PulseEnvelope::new(*h.grid(), samples)
}

/// How the stored state is formed from the incoming photon state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaptureModel {
    /// Beam splitter onto the collective mode with the leaked field traced out.
    #[default]
    BeamSplitter,
    /// `α_k → (−i d)^k α_k`, renormalized (post-selected on no leakage).
    Projection,
}

/// Map the incoming photon state onto the stored collective state for final
/// dark amplitude `d_final`: pure loss with transmission amplitude `−i d_final`.
pub fn capture_channel(rho_in: &FockStateMatrix, d_final: Complex64) -> Result<FockStateMatrix> {
    capture_channel_with(rho_in, d_final, CaptureModel::BeamSplitter)
}

pub fn capture_channel_with(
    rho_in: &FockStateMatrix,
    d_final: Complex64,
    model: CaptureModel,
) -> Result<FockStateMatrix> {
    if !(d_final.norm() <= 1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "|d| = {} exceeds 1",
            d_final.norm()
        )));
    }
    let t = Complex64::new(0.0, -1.0) * d_final;
    match model {
        CaptureModel::BeamSplitter => pure_loss(rho_in, t, LossRouting::Recycle),
        CaptureModel::Projection => project_and_renormalize(rho_in, t),
    }
}

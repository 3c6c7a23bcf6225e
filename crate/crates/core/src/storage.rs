//! Capture, storage and release composed into full memory cycles.
//!
//! Every stage is a pure-loss channel on the photon-number state: capture with
//! amplitude `−i d_in`, metastable decay with `exp(−γ0 t_s / 2)` and release
//! with `+i d_out`. The release phase undoes the capture phase, so a lossless
//! cycle returns the input state exactly.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{pure_loss, pure_loss_subsystem, LossRouting};
use crate::dark::{
    capture_channel_with, dark_amplitude, evolve_dark_amplitude, CaptureModel, ControlSchedule,
    DarkAmplitudeTrajectory, SystemParams,
};
use crate::envelope::PulseEnvelope;
use crate::error::{Error, Result};
use crate::fock::{hermiticity_error, hermitize, state_fidelity, CMatrix, FockStateMatrix};
use crate::grid::TimeGrid;
use crate::impedance::matched_schedule;

const AMPLITUDE_TOL: f64 = 1e-12;

fn check_decay(gamma_0: f64, t_s: f64) -> Result<()> {
    if !(gamma_0 >= 0.0) || !gamma_0.is_finite() {
        return Err(Error::InvalidParameter(format!("decay rate gamma_0 = {gamma_0}")));
    }
    if !(t_s >= 0.0) || !t_s.is_finite() {
        return Err(Error::InvalidParameter(format!("storage time t_s = {t_s}")));
    }
    Ok(())
}

/// Survival amplitude of one stored excitation, `exp(−γ0 t_s / 2)`.
pub fn survival_amplitude(gamma_0: f64, t_s: f64) -> Result<f64> {
    check_decay(gamma_0, t_s)?;
    Ok((-0.5 * gamma_0 * t_s).exp())
}

/// Amplitude damping of the stored state for a hold of `t_s`.
pub fn storage_decay(rho: &FockStateMatrix, gamma_0: f64, t_s: f64) -> Result<FockStateMatrix> {
    storage_decay_routed(rho, gamma_0, t_s, LossRouting::Recycle)
}

pub fn storage_decay_routed(
    rho: &FockStateMatrix,
    gamma_0: f64,
    t_s: f64,
    routing: LossRouting,
) -> Result<FockStateMatrix> {
    let t = survival_amplitude(gamma_0, t_s)?;
    pure_loss(rho, Complex64::new(t, 0.0), routing)
}

/// How the stored excitation is read out.
#[derive(Debug, Clone, PartialEq)]
pub enum Release {
    /// Run the capture schedule backwards about `t_d`: cos θ(t_d + τ) = cos θ(t_d − τ).
    TimeReverse { t_d: f64 },
    /// Emit into the given normalized envelope (on its own grid).
    Tailored(PulseEnvelope),
}

#[derive(Debug, Clone)]
pub struct ReleaseOutput {
    /// Emitted field, in the phase frame where a real stored amplitude gives a real pulse.
    pub envelope: PulseEnvelope,
    /// Amplitude of unit-efficiency release, `sqrt(∫|h_emit|²)` for `d_stored = 1`.
    pub d_out: Complex64,
    pub schedule: ControlSchedule,
    pub trajectory: DarkAmplitudeTrajectory,
}

fn release_on(
    d_stored: Complex64,
    schedule: ControlSchedule,
    params: &SystemParams,
) -> Result<ReleaseOutput> {
    let unit = evolve_dark_amplitude(None, &schedule, params, Complex64::new(1.0, 0.0));
    let sqrt_gamma = params.gamma.sqrt();
    let emitted: Vec<Complex64> = unit
        .d
        .iter()
        .zip(schedule.cos_theta())
        .map(|(d, c)| d * (sqrt_gamma * c))
        .collect();
    let unit_env = PulseEnvelope::new(*schedule.grid(), emitted)?;
    let d_out = Complex64::new(unit_env.norm().sqrt(), 0.0);
    let trajectory = DarkAmplitudeTrajectory {
        grid: unit.grid,
        d: unit.d.iter().map(|z| z * d_stored).collect(),
    };
    let envelope = PulseEnvelope::new(
        unit_env.grid().to_owned(),
        unit_env.samples().iter().map(|z| z * d_stored).collect(),
    )?;
    Ok(ReleaseOutput {
        envelope,
        d_out,
        schedule,
        trajectory,
    })
}

/// Schedule that emits `target` from a fully stored excitation.
pub fn tailored_schedule(target: &PulseEnvelope, params: &SystemParams) -> Result<ControlSchedule> {
    Ok(matched_schedule(&target.time_reversed(), params)?.time_reversed())
}

/// Grid mirrored about `t_d`; fails unless it starts at or after the capture grid ends.
fn mirrored_grid(capture: &TimeGrid, t_d: f64) -> Result<TimeGrid> {
    if !(t_d >= capture.end() - 1e-9 * capture.dt) {
        return Err(Error::InvalidParameter(format!(
            "reversal time t_d = {t_d} precedes the end of capture at {}",
            capture.end()
        )));
    }
    TimeGrid::new(2.0 * t_d - capture.end(), capture.dt, capture.len)
}

/// Read out a stored amplitude `d_stored`.
pub fn release(
    d_stored: Complex64,
    spec: &Release,
    s_capture: &ControlSchedule,
    params: &SystemParams,
) -> Result<ReleaseOutput> {
    if !(d_stored.norm() <= 1.0 + AMPLITUDE_TOL) {
        return Err(Error::InvalidParameter(format!(
            "stored amplitude |d| = {} exceeds 1",
            d_stored.norm()
        )));
    }
    let schedule = match spec {
        Release::TimeReverse { t_d } => {
            let grid = mirrored_grid(s_capture.grid(), *t_d)?;
            ControlSchedule::new(grid, s_capture.time_reversed().cos_theta().to_vec())?
        }
        Release::Tailored(target) => tailored_schedule(target, params)?,
    };
    release_on(d_stored, schedule, params)
}

/// Shape of the released pulse in a full cycle.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum ReleaseShape {
    /// Time-reversed capture, centred at `t_d = t_end + t_s / 2`.
    #[default]
    MirrorImage,
    /// Emit into this envelope shape, placed to start at `t_end + t_s`.
    Tailored(PulseEnvelope),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchingMode {
    /// d_in = d_out = 1; losses come from storage decay only.
    #[default]
    Ideal,
    /// Amplitudes from the dark-amplitude integration on the envelope grid.
    Simulated,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CycleSpec {
    pub t_s: f64,
    pub release: ReleaseShape,
    pub matching: MatchingMode,
    pub capture_model: CaptureModel,
    pub routing: LossRouting,
}

impl CycleSpec {
    pub fn new(t_s: f64) -> Self {
        CycleSpec {
            t_s,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct CycleResult {
    pub rho_out: FockStateMatrix,
    pub released_envelope: PulseEnvelope,
    pub capture_amplitude: Complex64,
    pub release_amplitude: Complex64,
    pub fidelity: f64,
    /// Total single-excitation transmissivity |d_in|² e^{−γ0 t_s} |d_out|².
    pub eta: f64,
    pub input_norm: f64,
    pub released_norm: f64,
}

/// Summary written by the `cycle` command.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub d_in: f64,
    pub d_out: f64,
    pub eta: f64,
    pub fidelity: f64,
    pub input_norm: f64,
    pub released_norm: f64,
}

impl CycleResult {
    pub fn report(&self) -> CycleReport {
        CycleReport {
            d_in: self.capture_amplitude.norm(),
            d_out: self.release_amplitude.norm(),
            eta: self.eta,
            fidelity: self.fidelity,
            input_norm: self.input_norm,
            released_norm: self.released_norm,
        }
    }
}

/// Capture and release amplitudes of one excitation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleAmplitudes {
    pub d_in: Complex64,
    pub d_out: Complex64,
}

impl CycleAmplitudes {
    pub const IDEAL: CycleAmplitudes = CycleAmplitudes {
        d_in: Complex64::new(1.0, 0.0),
        d_out: Complex64::new(1.0, 0.0),
    };

    /// Matched capture of `h` followed by a release of the given shape.
    pub fn simulate(h: &PulseEnvelope, params: &SystemParams, shape: &ReleaseShape) -> Result<Self> {
        let schedule = matched_schedule(h, params)?;
        let d_in = dark_amplitude(h, &schedule, params)?.final_value();
        let spec = match shape {
            ReleaseShape::MirrorImage => Release::TimeReverse {
                t_d: schedule.grid().end(),
            },
            ReleaseShape::Tailored(target) => Release::Tailored(target.clone()),
        };
        let d_out = release(Complex64::new(1.0, 0.0), &spec, &schedule, params)?.d_out;
        Ok(CycleAmplitudes { d_in, d_out })
    }

    /// Single-excitation transmissivity including a hold with survival amplitude `survival`.
    pub fn eta(&self, survival: f64) -> f64 {
        self.d_in.norm_sqr() * survival * survival * self.d_out.norm_sqr()
    }
}

/// Channel part of a cycle: capture, decay and release applied to `rho_in`.
fn cycle_state(
    rho_in: &FockStateMatrix,
    amps: CycleAmplitudes,
    survival: f64,
    model: CaptureModel,
    routing: LossRouting,
) -> Result<FockStateMatrix> {
    let captured = capture_channel_with(rho_in, amps.d_in, model)?;
    let held = pure_loss(&captured, Complex64::new(survival, 0.0), routing)?;
    pure_loss(&held, Complex64::i() * amps.d_out, LossRouting::Recycle)
}

/// Store `rho_in` carried by envelope `h` for `spec.t_s` and read it out.
pub fn full_cycle(
    rho_in: &FockStateMatrix,
    h: &PulseEnvelope,
    params: &SystemParams,
    spec: &CycleSpec,
) -> Result<CycleResult> {
    params.validate()?;
    h.ensure_normalized()?;
    let survival = survival_amplitude(params.gamma_0, spec.t_s)?;
    let t_end = h.grid().end();

    let (amps, released_envelope) = match spec.matching {
        MatchingMode::Ideal => {
            let shape = match &spec.release {
                ReleaseShape::MirrorImage => {
                    let grid = mirrored_grid(h.grid(), t_end + 0.5 * spec.t_s)?;
                    PulseEnvelope::new(grid, h.time_reversed().into_samples())?
                }
                ReleaseShape::Tailored(target) => place_after(target, t_end + spec.t_s)?,
            };
            (CycleAmplitudes::IDEAL, shape.scaled(survival))
        }
        MatchingMode::Simulated => {
            let schedule = matched_schedule(h, params)?;
            let d_in = dark_amplitude(h, &schedule, params)?.final_value();
            let release_spec = match &spec.release {
                ReleaseShape::MirrorImage => Release::TimeReverse {
                    t_d: t_end + 0.5 * spec.t_s,
                },
                ReleaseShape::Tailored(target) => {
                    Release::Tailored(place_after(target, t_end + spec.t_s)?)
                }
            };
            let out = release(d_in * survival, &release_spec, &schedule, params)?;
            (
                CycleAmplitudes {
                    d_in,
                    d_out: out.d_out,
                },
                out.envelope,
            )
        }
    };

    let rho_out = cycle_state(rho_in, amps, survival, spec.capture_model, spec.routing)?;
    let fidelity = state_fidelity(rho_in, &rho_out)?;
    Ok(CycleResult {
        rho_out,
        released_norm: released_envelope.norm(),
        released_envelope,
        capture_amplitude: amps.d_in,
        release_amplitude: amps.d_out,
        fidelity,
        eta: amps.eta(survival),
        input_norm: h.norm(),
    })
}

fn place_after(target: &PulseEnvelope, start: f64) -> Result<PulseEnvelope> {
    target.ensure_normalized()?;
    Ok(target.shifted(start - target.grid().t0))
}

/// One row of a fidelity-versus-storage-time sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub t_s: f64,
    pub fidelity: f64,
    pub eta: f64,
    pub trace_out: f64,
}

/// Fidelity `Tr{ρ_in ρ_out}` for each storage time, in input order.
pub fn fidelity_sweep(
    rho_in: &FockStateMatrix,
    t_s_values: &[f64],
    params: &SystemParams,
    amps: CycleAmplitudes,
    routing: LossRouting,
) -> Result<Vec<SweepPoint>> {
    if t_s_values.is_empty() {
        return Err(Error::InvalidParameter("empty storage-time list".into()));
    }
    params.validate()?;
    t_s_values
        .par_iter()
        .map(|&t_s| {
            let survival = survival_amplitude(params.gamma_0, t_s)?;
            let out = cycle_state(rho_in, amps, survival, CaptureModel::BeamSplitter, routing)?;
            Ok(SweepPoint {
                t_s,
                fidelity: state_fidelity(rho_in, &out)?,
                eta: amps.eta(survival),
                trace_out: out.trace(),
            })
        })
        .collect()
}

/// Single-mode cutoff of a two-mode state with `n*d + m` ordering.
pub fn bipartite_dim(rho_ab: &FockStateMatrix) -> Result<usize> {
    let total = rho_ab.dim();
    let d = (total as f64).sqrt().round() as usize;
    if d * d != total {
        return Err(Error::InvalidState(format!(
            "two-mode dimension {total} is not a perfect square"
        )));
    }
    Ok(d)
}

/// Store each mode of a two-mode state in its own ensemble.
pub fn bipartite_store(
    rho_ab: &FockStateMatrix,
    d_left: Complex64,
    d_right: Complex64,
    gamma_0: f64,
    t_s: f64,
) -> Result<FockStateMatrix> {
    let d = bipartite_dim(rho_ab)?;
    let survival = survival_amplitude(gamma_0, t_s)?;
    let minus_i = Complex64::new(0.0, -1.0);
    let left = pure_loss_subsystem(rho_ab.matrix(), (d, d), 0, minus_i * d_left * survival)?;
    let mut both = pure_loss_subsystem(&left, (d, d), 1, minus_i * d_right * survival)?;
    hermitize(&mut both);
    Ok(FockStateMatrix::from_matrix_unchecked(both))
}

/// Partial transpose on the second factor.
pub fn partial_transpose(m: &CMatrix, d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |r, c| {
        let (i, k) = (r / d, r % d);
        let (j, l) = (c / d, c % d);
        m[(i * d + l, j * d + k)]
    })
}

/// Sum of the magnitudes of the negative eigenvalues of the partial transpose.
pub fn negativity(rho_ab: &FockStateMatrix) -> Result<f64> {
    let d = bipartite_dim(rho_ab)?;
    let herm = hermiticity_error(rho_ab.matrix());
    if herm > 1e-10 {
        return Err(Error::InvalidState(format!("hermiticity error {herm:.3e}")));
    }
    let pt = partial_transpose(rho_ab.matrix(), d);
    let eig = SymmetricEigen::new(pt).eigenvalues;
    Ok(eig.iter().filter(|&&x| x < 0.0).map(|x| -x).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell(d: usize) -> FockStateMatrix {
        let mut amps = vec![c(0.0, 0.0); d * d];
        let s = 0.5f64.sqrt();
        amps[0] = c(s, 0.0);
        amps[d + 1] = c(s, 0.0);
        FockStateMatrix::from_amplitudes(&amps).unwrap()
    }

    #[test]
    fn storage_decay_examples() {
        let one = FockStateMatrix::fock(1, 4).unwrap();
        assert_eq!(storage_decay(&one, 0.3, 0.0).unwrap(), one);
        let out = storage_decay(&one, 1.0, 0.1).unwrap();
        let e = (-0.1f64).exp();
        assert!((out.get(1, 1).re - e).abs() < 1e-15);
        assert!((out.get(0, 0).re - (1.0 - e)).abs() < 1e-15);
        assert!((state_fidelity(&one, &out).unwrap() - 0.904837).abs() < 1e-6);
        let vac = FockStateMatrix::vacuum(4).unwrap();
        assert_eq!(storage_decay(&vac, 1.0, 50.0).unwrap(), vac);
        assert!(storage_decay(&one, -1.0, 1.0).is_err());
        assert!(storage_decay(&one, 1.0, -1.0).is_err());
    }

    #[test]
    fn zero_stored_amplitude_releases_nothing() {
        let grid = TimeGrid::span(0.0, 0.01, 200.0).unwrap();
        let h = PulseEnvelope::sech(10.0, 100.0, grid).unwrap();
        let p = SystemParams::new(10.0, 1.0, 0.0).unwrap();
        let s = matched_schedule(&h, &p).unwrap();
        let out = release(c(0.0, 0.0), &Release::TimeReverse { t_d: 210.0 }, &s, &p).unwrap();
        assert!(out.envelope.is_zero());
        assert!(release(c(0.0, 0.0), &Release::TimeReverse { t_d: 150.0 }, &s, &p).is_err());
        assert!(release(c(1.5, 0.0), &Release::TimeReverse { t_d: 210.0 }, &s, &p).is_err());
    }

    #[test]
    fn ideal_cycle_decays_fock_states() {
        let grid = TimeGrid::span(0.0, 0.01, 200.0).unwrap();
        let h = PulseEnvelope::sech(10.0, 100.0, grid).unwrap();
        let mut p = SystemParams::new(10.0, 1.0, 1.0).unwrap();
        for n in 1..4 {
            let st = FockStateMatrix::fock(n, 6).unwrap();
            let r = full_cycle(&st, &h, &p, &CycleSpec::new(0.5)).unwrap();
            assert!((r.fidelity - (-0.5 * n as f64).exp()).abs() < 1e-12);
            assert!((r.eta - (-0.5f64).exp()).abs() < 1e-12);
        }
        p.gamma_0 = 0.0;
        let sq = FockStateMatrix::squeezed_vacuum(0.5, 40).unwrap();
        let r = full_cycle(&sq, &h, &p, &CycleSpec::new(3.0)).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-12);
        assert!((r.released_norm - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bell_state_negativity() {
        let b = bell(2);
        assert!((negativity(&b).unwrap() - 0.5).abs() < 1e-12);
        let stored = bipartite_store(&b, c(1.0, 0.0), c(1.0, 0.0), 0.0, 0.0).unwrap();
        assert!((negativity(&stored).unwrap() - 0.5).abs() < 1e-12);
        let decayed = bipartite_store(&bell(3), c(1.0, 0.0), c(1.0, 0.0), 1.0, 1.0).unwrap();
        let n = negativity(&decayed).unwrap();
        assert!(n > 0.0 && n < 0.5);
    }

    #[test]
    fn products_have_no_negativity() {
        let vv = FockStateMatrix::vacuum(3).unwrap().tensor(&FockStateMatrix::vacuum(3).unwrap());
        assert!(negativity(&vv).unwrap().abs() < 1e-14);
        let a = FockStateMatrix::coherent(c(0.3, 0.1), 6).unwrap();
        let b = FockStateMatrix::squeezed_vacuum(0.1, 6).unwrap();
        assert!(negativity(&a.tensor(&b)).unwrap() < 1e-12);
        let odd = FockStateMatrix::vacuum(5).unwrap();
        assert!(negativity(&odd).is_err());
    }

    #[test]
    fn sweep_preserves_order_and_rejects_empty() {
        let one = FockStateMatrix::fock(1, 3).unwrap();
        let p = SystemParams::new(10.0, 1.0, 0.1).unwrap();
        let ts = [3.0, 0.0, 1.0];
        let pts = fidelity_sweep(&one, &ts, &p, CycleAmplitudes::IDEAL, LossRouting::Recycle).unwrap();
        for (pt, t) in pts.iter().zip(ts) {
            assert_eq!(pt.t_s, t);
            assert!((pt.fidelity - (-0.1 * t).exp()).abs() < 1e-12);
        }
        assert!(fidelity_sweep(&one, &[], &p, CycleAmplitudes::IDEAL, LossRouting::Recycle).is_err());
    }
}

//! Simulation of single-mode photon storage in an EIT Λ-ensemble inside a
//! one-sided cavity: impedance-matched capture, metastable storage and
//! time-reversed release, with a discretized-bath reference integrator.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod config;
pub mod dark;
pub mod envelope;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod grid;
pub mod io;
pub mod impedance;
pub mod oracle;
pub mod storage;

pub use channel::{pure_loss, LossRouting};
pub use dark::{
    capture_channel, capture_channel_with, dark_amplitude, dark_state_coeffs,
    mixing_angle_from_rabi, output_envelope, rabi_from_mixing_angle, CaptureModel,
    ControlSchedule, DarkAmplitudeTrajectory, RabiSchedule, SystemParams,
};
pub use envelope::PulseEnvelope;
pub use error::{Error, Result};
pub use fock::{state_fidelity, FockStateMatrix};
pub use grid::TimeGrid;
pub use impedance::{
    adiabaticity_margins, impedance_residual, matched_schedule, matched_schedule_clamped,
    AdiabaticityMargins,
};
pub use storage::{
    bipartite_store, fidelity_sweep, full_cycle, negativity, release, storage_decay, CycleAmplitudes,
    CycleResult, CycleSpec, MatchingMode, Release, ReleaseShape, SweepPoint,
};

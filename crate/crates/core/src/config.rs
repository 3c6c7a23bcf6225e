//! Run configuration: one JSON document with every default filled in.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::LossRouting;
use crate::dark::{CaptureModel, SystemParams};
use crate::envelope::PulseEnvelope;
use crate::error::{Error, Result};
use crate::fock::FockStateMatrix;
use crate::grid::TimeGrid;
use crate::io::read_envelope;
use crate::oracle::BathSpec;
use crate::storage::MatchingMode;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub grid: GridConfig,
    pub pulse: PulseConfig,
    pub system: SystemParams,
    pub storage: StorageConfig,
    pub bath: BathConfig,
    pub output: OutputConfig,
}

/// Capture window `[start, stop]` sampled every `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub start: f64,
    pub dt: f64,
    pub stop: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            start: 0.0,
            dt: 0.01,
            stop: 160.0,
        }
    }
}

impl GridConfig {
    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::span(self.start, self.dt, self.stop)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    #[default]
    Sech,
    Gaussian,
    /// Read from `pulse.file` (`t,re[,im]`); the grid section is ignored.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseConfig {
    pub shape: PulseShape,
    /// sech time constant T, or the intensity standard deviation for a Gaussian.
    pub width: f64,
    pub center: f64,
    pub file: Option<PathBuf>,
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig {
            shape: PulseShape::Sech,
            width: 10.0,
            center: 80.0,
            file: None,
        }
    }
}

impl PulseConfig {
    pub fn envelope(&self, grid: &GridConfig) -> Result<PulseEnvelope> {
        match self.shape {
            PulseShape::Sech => PulseEnvelope::sech(self.width, self.center, grid.time_grid()?),
            PulseShape::Gaussian => PulseEnvelope::gaussian(self.width, self.center, grid.time_grid()?),
            PulseShape::File => {
                let path = self
                    .file
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("pulse.shape = file needs pulse.file".into()))?;
                read_envelope(path)?.normalized()
            }
        }
    }
}

/// Input photon state of a memory cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateSpec {
    Fock { n: usize },
    Squeezed { r: f64 },
    Coherent { re: f64, im: f64 },
}

impl Default for StateSpec {
    fn default() -> Self {
        StateSpec::Fock { n: 1 }
    }
}

impl StateSpec {
    /// The state at `dim`, or at the smallest cutoff that holds it when `dim` is `None`.
    pub fn state(&self, dim: Option<usize>) -> Result<FockStateMatrix> {
        let build = |d: usize| match *self {
            StateSpec::Fock { n } => FockStateMatrix::fock(n, d),
            StateSpec::Squeezed { r } => FockStateMatrix::squeezed_vacuum(r, d),
            StateSpec::Coherent { re, im } => FockStateMatrix::coherent(Complex64::new(re, im), d),
        };
        match dim {
            Some(d) => build(d),
            None => {
                let first = match *self {
                    StateSpec::Fock { n } => n + 1,
                    _ => 2,
                };
                match build(first) {
                    Err(Error::CutoffTail { required_dim, .. }) => build(required_dim),
                    other => other,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StorageConfig {
    /// Hold time between the end of capture and the start of release.
    pub t_s: f64,
    /// Reversal time; overrides `t_s` with `2 (t_d − t_end)` when set.
    pub t_d: Option<f64>,
    pub state: StateSpec,
    /// Fock cutoff; the smallest adequate one when absent.
    pub cutoff: Option<usize>,
    pub matching: MatchingMode,
    pub routing: LossRouting,
    pub capture_model: CaptureModel,
    /// Sweep storage times `0, .., t_s_max` in `points` samples.
    pub t_s_max: f64,
    pub points: usize,
    /// Fock number for the Fock curve of the fidelity figure.
    pub fock_n: usize,
    /// Squeezing for the squeezed curve; equal mean photon number to `fock_n` when absent.
    pub squeeze_r: Option<f64>,
}

impl Default for StorageConfig {
    fn default() -> Self {
        StorageConfig {
            t_s: 50.0,
            t_d: None,
            state: StateSpec::default(),
            cutoff: None,
            matching: MatchingMode::Ideal,
            routing: LossRouting::Recycle,
            capture_model: CaptureModel::BeamSplitter,
            t_s_max: 5000.0,
            points: 51,
            fock_n: 1,
            squeeze_r: None,
        }
    }
}

impl StorageConfig {
    pub fn sweep_times(&self) -> Result<Vec<f64>> {
        if self.points < 2 || !(self.t_s_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sweep needs points >= 2 and t_s_max > 0 (got {} and {})",
                self.points, self.t_s_max
            )));
        }
        let step = self.t_s_max / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| i as f64 * step).collect())
    }

    /// Squeezing with `sinh² r = fock_n` unless set explicitly.
    pub fn squeezing(&self) -> f64 {
        self.squeeze_r
            .unwrap_or_else(|| (self.fock_n as f64).sqrt().asinh())
    }

    /// Hold time for a capture window ending at `t_end`.
    pub fn hold_time(&self, t_end: f64) -> Result<f64> {
        match self.t_d {
            None => Ok(self.t_s),
            Some(t_d) if t_d >= t_end => Ok(2.0 * (t_d - t_end)),
            Some(t_d) => Err(Error::InvalidParameter(format!(
                "reversal time t_d = {t_d} is before the end of the pulse window at {t_end}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathConfig {
    pub width: f64,
    pub spacing: f64,
    /// RK4 step; the largest stable one when absent.
    pub dt: Option<f64>,
}

impl Default for BathConfig {
    fn default() -> Self {
        let spec = BathSpec::default();
        BathConfig {
            width: spec.width,
            spacing: spec.spacing,
            dt: None,
        }
    }
}

impl BathConfig {
    pub fn spec(&self) -> BathSpec {
        BathSpec {
            width: self.width,
            spacing: self.spacing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(Error::file(path))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text)?;
        cfg.system.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

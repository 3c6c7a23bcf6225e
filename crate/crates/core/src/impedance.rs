//! Impedance-matched control design and adiabaticity checks.

use serde::{Deserialize, Serialize};

use crate::dark::{ControlSchedule, SystemParams};
use crate::envelope::PulseEnvelope;
use crate::error::{Error, Result};

/// Slack allowed on cos²θ ≤ 1 before a pulse is declared unmatchable.
const COS2_SLACK: f64 = 1e-12;

/// Default ratio standing in for "≫" in the adiabaticity conditions.
pub const DEFAULT_ADIABATIC_THRESHOLD: f64 = 10.0;

/// cos²θ(t) = |h|² / (γ F(t)) with F the cumulative pulse energy, plus the
/// pulse energy ahead of the grid.
///
/// When the first two samples rise exponentially at rate λ, the energy before
/// the grid is taken as |h(t0)|²/λ, which is exact for exponential leading
/// edges (sech, and the tails of most smooth pulses) and makes cos²θ(t0) = λ/γ.
/// Where F is still zero (no field yet) cos θ takes the first defined value
/// to its right.
fn matched_cos2(h: &PulseEnvelope, params: &SystemParams) -> Result<(Vec<f64>, usize)> {
    let f = h.intensity();
    let n = f.len();
    let dt = h.grid().dt;
    let Some(onset) = f.iter().position(|&x| x > 0.0) else {
        return Err(Error::InvalidParameter(
            "envelope is zero everywhere; nothing to match".into(),
        ));
    };
    let mut cumulative = if onset == 0 && f[1] > f[0] {
        let rate = (f[1] / f[0]).ln() / dt;
        f[0] / rate
    } else {
        0.0
    };
    let mut cos2 = vec![f64::NAN; n];
    for i in 0..n {
        if i > 0 {
            cumulative += 0.5 * dt * (f[i - 1] + f[i]);
        }
        if cumulative > 0.0 {
            cos2[i] = f[i] / (params.gamma * cumulative);
        }
    }
    let first = cos2
        .iter()
        .position(|x| !x.is_nan())
        .expect("energy accumulates after onset");
    let fill = cos2[first];
    for c in cos2.iter_mut().take(first) {
        *c = fill;
    }
    Ok((cos2, onset))
}

/// Impedance-matched schedule for envelope `h`.
///
/// Fails with [`Error::Unmatchable`] at the first time where the required
/// cos²θ exceeds one (pulse faster than the cavity response).
pub fn matched_schedule(h: &PulseEnvelope, params: &SystemParams) -> Result<ControlSchedule> {
    if !h.is_zero() {
        h.ensure_normalized()?;
    }
    let (cos2, onset) = matched_cos2(h, params)?;
    let grid = *h.grid();
    if let Some(i) = (onset..cos2.len()).find(|&i| cos2[i] > 1.0 + COS2_SLACK) {
        return Err(Error::Unmatchable {
            time: grid.time(i),
            cos2: cos2[i],
        });
    }
    ControlSchedule::new(grid, cos2.iter().map(|c| c.min(1.0).sqrt()).collect())
}

/// Best-effort variant that clamps cos²θ to one instead of failing.
///
/// Returns the schedule and whether any sample was clamped; when clamped the
/// capture is necessarily incomplete.
pub fn matched_schedule_clamped(
    h: &PulseEnvelope,
    params: &SystemParams,
) -> Result<(ControlSchedule, bool)> {
    let (cos2, _) = matched_cos2(h, params)?;
    let clamped = cos2.iter().any(|&c| c > 1.0 + COS2_SLACK);
    let schedule = ControlSchedule::new(*h.grid(), cos2.iter().map(|c| c.min(1.0).sqrt()).collect())?;
    Ok((schedule, clamped))
}

/// Max over interior samples of `|−d/dt ln cosθ + d/dt ln|h| − (γ/2)cos²θ|`,
/// with centered differences.
pub fn impedance_residual(
    schedule: &ControlSchedule,
    h: &PulseEnvelope,
    params: &SystemParams,
) -> Result<f64> {
    h.grid().ensure_matches(schedule.grid())?;
    let c = schedule.cos_theta();
    let hs = h.samples();
    let grid = h.grid();
    if let Some(i) = (0..grid.len).find(|&i| !(c[i] > 0.0) || !(hs[i].norm() > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "residual needs positive h and cos(theta); violated at t = {}",
            grid.time(i)
        )));
    }
    let ln_c: Vec<f64> = c.iter().map(|x| x.ln()).collect();
    let ln_h: Vec<f64> = hs.iter().map(|z| z.norm().ln()).collect();
    let inv = 0.5 / grid.dt;
    let mut worst: f64 = 0.0;
    for i in 1..grid.len - 1 {
        let dln_c = (ln_c[i + 1] - ln_c[i - 1]) * inv;
        let dln_h = (ln_h[i + 1] - ln_h[i - 1]) * inv;
        let r = -dln_c + dln_h - 0.5 * params.gamma * c[i] * c[i];
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// The three adiabaticity ratios `(Ω²+g²N)/X` for
/// `X ∈ {γγ_a, γ_a/T, sqrt(γ/T) γ_a}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityMargins {
    pub ratios: [f64; 3],
    pub threshold: f64,
}

impl AdiabaticityMargins {
    pub fn with_threshold(self, threshold: f64) -> Self {
        AdiabaticityMargins { threshold, ..self }
    }

    pub fn is_adiabatic(&self) -> bool {
        self.ratios.iter().all(|&r| r >= self.threshold)
    }

    /// Index of the most stringent condition (smallest ratio).
    pub fn binding(&self) -> usize {
        let mut best = 0;
        for i in 1..3 {
            if self.ratios[i] < self.ratios[best] {
                best = i;
            }
        }
        best
    }

    pub fn min_ratio(&self) -> f64 {
        self.ratios[self.binding()]
    }
}

pub fn adiabaticity_margins(
    params: &SystemParams,
    omega_min: f64,
    duration: f64,
) -> Result<AdiabaticityMargins> {
    if !(duration > 0.0) {
        return Err(Error::InvalidParameter(format!("pulse duration {duration}")));
    }
    let coupling = omega_min * omega_min + params.g2n();
    let g = params.gamma;
    let ga = params.gamma_a;
    let denominators = [g * ga, ga / duration, (g / duration).sqrt() * ga];
    Ok(AdiabaticityMargins {
        ratios: denominators.map(|x| coupling / x),
        threshold: DEFAULT_ADIABATIC_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;

    fn params() -> SystemParams {
        SystemParams::new(10.0, 1.0, 0.0).unwrap()
    }

    #[test]
    fn sech_schedule_matches_closed_form() {
        let (t_c, width) = (100.0, 10.0);
        let grid = TimeGrid::span(0.0, 0.01, 200.0).unwrap();
        let h = PulseEnvelope::sech(width, t_c, grid).unwrap();
        let s = matched_schedule(&h, &params()).unwrap();
        let c = s.cos_theta();
        assert!((c[0] * c[0] - 0.2).abs() < 1e-6);
        let mut worst: f64 = 0.0;
        for (i, t) in grid.times().enumerate() {
            let exact = (1.0 - ((t - t_c) / width).tanh()) / width;
            worst = worst.max((c[i] * c[i] - exact).abs());
        }
        assert!(worst < 1e-7, "worst {worst}");
    }

    #[test]
    fn short_sech_is_unmatchable() {
        let grid = TimeGrid::span(-10.0, 0.01, 10.0).unwrap();
        let h = PulseEnvelope::sech(1.0, 0.0, grid).unwrap();
        match matched_schedule(&h, &params()) {
            Err(Error::Unmatchable { time, cos2 }) => {
                assert!((time + 10.0).abs() < 1e-9);
                assert!((cos2 - 2.0).abs() < 1e-3);
            }
            other => panic!("expected unmatchable, got {other:?}"),
        }
        let (clamped, was) = matched_schedule_clamped(&h, &params()).unwrap();
        assert!(was);
        assert!(clamped.cos_theta().iter().all(|&c| c <= 1.0));
    }

    #[test]
    fn square_pulse_is_unmatchable_at_onset() {
        let grid = TimeGrid::span(0.0, 0.01, 20.0).unwrap();
        let h = PulseEnvelope::square(0.0, 10.0, grid).unwrap();
        match matched_schedule(&h, &params()) {
            Err(Error::Unmatchable { time, .. }) => assert!(time < 0.05),
            other => panic!("expected unmatchable, got {other:?}"),
        }
        // zero padding in front fails at the first lit sample
        let h = PulseEnvelope::square(5.0, 10.0, grid).unwrap();
        match matched_schedule(&h, &params()) {
            Err(Error::Unmatchable { time, .. }) => assert!((time - 5.0).abs() < 0.02),
            other => panic!("expected unmatchable, got {other:?}"),
        }
    }

    #[test]
    fn residual_examples() {
        let grid = TimeGrid::span(0.0, 0.01, 200.0).unwrap();
        let h = PulseEnvelope::sech(10.0, 100.0, grid).unwrap();
        let s = matched_schedule(&h, &params()).unwrap();
        let r = impedance_residual(&s, &h, &params()).unwrap();
        assert!(r <= 1e-6, "residual {r}");
        let flat = ControlSchedule::constant(grid, 0.5).unwrap();
        assert!(impedance_residual(&flat, &h, &params()).unwrap() >= 0.05);
        let off = ControlSchedule::constant(grid, 0.0).unwrap();
        assert!(impedance_residual(&off, &h, &params()).is_err());
    }

    #[test]
    fn adiabaticity_examples() {
        let p = SystemParams::new(3.0, 0.5, 0.0).unwrap();
        let m = adiabaticity_margins(&p, 1.0, 1.0).unwrap();
        assert!((m.ratios[0] - m.ratios[1]).abs() < 1e-12);
        assert!((m.ratios[0] - m.ratios[2]).abs() < 1e-12);

        let m = adiabaticity_margins(&p, 0.0, 10.0).unwrap();
        assert_eq!(m.binding(), 0);

        let p = SystemParams::new(10.0, 1.0, 0.0).unwrap();
        let m = adiabaticity_margins(&p, 0.0, 10.0).unwrap();
        assert!((m.ratios[0] - 100.0).abs() < 1e-9);
        assert!((m.ratios[1] - 1000.0).abs() < 1e-9);
        assert!((m.ratios[2] - 100.0 * 10f64.sqrt()).abs() < 1e-9);
        assert!(m.is_adiabatic());
        assert!(!m.with_threshold(200.0).is_adiabatic());

        assert!(adiabaticity_margins(&p, 0.0, 0.0).is_err());
    }
}

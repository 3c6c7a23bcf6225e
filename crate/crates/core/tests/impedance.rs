use approx::assert_abs_diff_eq;
use eit_memory::{
    adiabaticity_margins, dark_amplitude, impedance_residual, matched_schedule,
    matched_schedule_clamped, output_envelope, ControlSchedule, Error, PulseEnvelope,
    SystemParams, TimeGrid,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn params() -> SystemParams {
    SystemParams::default()
}

fn sech_on(dt: f64) -> PulseEnvelope {
    PulseEnvelope::sech(10.0, 80.0, TimeGrid::span(0.0, dt, 160.0).unwrap()).unwrap()
}

#[test]
fn residual_converges_at_second_order() {
    let p = params();
    let residual = |dt: f64| {
        let h = sech_on(dt);
        impedance_residual(&matched_schedule(&h, &p).unwrap(), &h, &p).unwrap()
    };
    let (r1, r2, r3) = (residual(0.02), residual(0.01), residual(0.005));
    assert!(r2 <= 1e-6, "{r2}");
    for ratio in [r1 / r2, r2 / r3] {
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio} ({r1}, {r2}, {r3})");
    }
}

#[test]
fn constant_schedule_leaves_large_residual() {
    let h = sech_on(0.01);
    let s = ControlSchedule::constant(*h.grid(), 0.5).unwrap();
    assert!(impedance_residual(&s, &h, &params()).unwrap() >= 0.05);
}

#[test]
fn schedule_is_translation_and_phase_invariant() {
    let p = params();
    let h = sech_on(0.01);
    let base = matched_schedule(&h, &p).unwrap();
    let moved = matched_schedule(&h.shifted(-37.5), &p).unwrap();
    let turned = matched_schedule(&h.with_phase(2.1), &p).unwrap();
    assert_eq!(base.cos_theta(), moved.cos_theta());
    for (a, b) in base.cos_theta().iter().zip(turned.cos_theta()) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-14);
    }
    assert_abs_diff_eq!(moved.grid().t0, -37.5, epsilon = 1e-12);
}

#[test]
fn matched_capture_leaks_nothing() {
    let p = params();
    let h = sech_on(0.01);
    let s = matched_schedule(&h, &p).unwrap();
    let d = dark_amplitude(&h, &s, &p).unwrap();
    assert!(d.final_value().norm() >= 0.9999);
    let leak = output_envelope(&h, &d, &p, &s).unwrap();
    assert!(leak.norm() <= 1e-4);
}

#[test]
fn unmatchable_pulses_fail_and_clamping_reports_loss() {
    let p = params();
    let grid = TimeGrid::span(0.0, 0.01, 40.0).unwrap();
    let fast = PulseEnvelope::sech(1.0, 20.0, grid).unwrap();
    match matched_schedule(&fast, &p) {
        Err(Error::Unmatchable { cos2, .. }) => assert!(cos2 > 1.0),
        other => panic!("expected unmatchable, got {other:?}"),
    }
    let square = PulseEnvelope::square(5.0, 10.0, grid).unwrap();
    match matched_schedule(&square, &p) {
        Err(Error::Unmatchable { time, .. }) => assert_abs_diff_eq!(time, 5.0, epsilon = 0.011),
        other => panic!("expected unmatchable, got {other:?}"),
    }
    let (s, clamped) = matched_schedule_clamped(&fast, &p).unwrap();
    assert!(clamped);
    let d = dark_amplitude(&fast, &s, &p).unwrap();
    assert!(d.final_value().norm() < 1.0);
}

#[test]
fn adiabaticity_threshold() {
    let p = SystemParams::new(10.0, 1.0, 0.0).unwrap();
    let m = adiabaticity_margins(&p, 0.0, 10.0).unwrap();
    assert!(m.is_adiabatic());
    assert_eq!(m.binding(), 0);
    let weak = SystemParams::new(0.1f64.sqrt(), 1.0, 0.0).unwrap();
    assert!(!adiabaticity_margins(&weak, 0.0, 10.0).unwrap().is_adiabatic());
    let m = adiabaticity_margins(&p, 0.0, 1.0).unwrap();
    assert_abs_diff_eq!(m.ratios[0], m.ratios[1], epsilon = 1e-12);
    assert_abs_diff_eq!(m.ratios[0], m.ratios[2], epsilon = 1e-12);
    assert!(adiabaticity_margins(&p, 0.0, 0.0).is_err());
    assert!(!m.with_threshold(1e3).is_adiabatic());
}

/// Gaussians with intensity standard deviation `width`.
fn gaussian_sum(parts: &[(f64, f64, f64)], dt: f64) -> PulseEnvelope {
    // start where the leading edge rises at rate < γ, end 8 widths after the last bump
    let t0 = parts
        .iter()
        .map(|&(_, c, w)| c - w * (0.9 * w).min(8.0))
        .fold(f64::INFINITY, f64::min);
    let t1 = parts.iter().map(|&(_, c, w)| c + 8.0 * w).fold(f64::NEG_INFINITY, f64::max);
    let grid = TimeGrid::span(t0, dt, t1).unwrap();
    PulseEnvelope::from_fn(grid, |t| {
        let v: f64 = parts
            .iter()
            .map(|&(a, c, w)| {
                let x = (t - c) / w;
                a * (-0.25 * x * x).exp()
            })
            .sum();
        Complex64::new(v, 0.0)
    })
    .normalized()
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matched_capture_of_smooth_pulses_is_complete(
        parts in prop::collection::vec((0.3f64..1.0, 0.0f64..30.0, 4.0f64..8.0), 3..=6)
    ) {
        let p = params();
        let h = gaussian_sum(&parts, 0.01);
        let s = match matched_schedule(&h, &p) {
            Ok(s) => s,
            Err(Error::Unmatchable { .. }) => return Err(TestCaseError::reject("unmatchable")),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let d = dark_amplitude(&h, &s, &p).unwrap();
        prop_assert!(d.final_value().norm() >= 1.0 - 1e-4, "d(end) = {}", d.final_value().norm());
    }
}

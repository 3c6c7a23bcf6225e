mod common;

use approx::assert_abs_diff_eq;
use common::{c, dense_loss, dense_negativity, dense_two_mode_loss, max_abs_diff};
use eit_memory::storage::ReleaseOutput;
use eit_memory::{
    bipartite_store, dark_amplitude, fidelity_sweep, full_cycle, matched_schedule, negativity,
    release, state_fidelity, storage_decay, CycleAmplitudes, CycleSpec, FockStateMatrix,
    LossRouting, MatchingMode, PulseEnvelope, Release, ReleaseShape, SystemParams, TimeGrid,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn params(gamma_0: f64) -> SystemParams {
    SystemParams::new(10.0, 1.0, gamma_0).unwrap()
}

fn sech() -> PulseEnvelope {
    PulseEnvelope::sech(10.0, 80.0, TimeGrid::span(0.0, 0.01, 160.0).unwrap()).unwrap()
}

fn capture_and_release(spec: &Release) -> (PulseEnvelope, ReleaseOutput) {
    let p = params(0.0);
    let h = sech();
    let s = matched_schedule(&h, &p).unwrap();
    let d = dark_amplitude(&h, &s, &p).unwrap().final_value();
    let out = release(d, spec, &s, &p).unwrap();
    (h, out)
}

#[test]
fn time_reversed_release_is_a_mirror_image() {
    let t_d = 200.0;
    let (h, out) = capture_and_release(&Release::TimeReverse { t_d });
    let g = out.envelope.grid();
    assert_abs_diff_eq!(g.t0, 2.0 * t_d - 160.0, epsilon = 1e-9);
    let n = h.len();
    let err = (0..n)
        .map(|i| (out.envelope.samples()[i] - h.samples()[n - 1 - i]).norm())
        .fold(0.0, f64::max);
    assert!(err <= 1e-3, "{err}");
    assert!(out.d_out.norm() >= 0.9999);
}

#[test]
fn release_before_capture_ends_is_rejected() {
    let p = params(0.0);
    let h = sech();
    let s = matched_schedule(&h, &p).unwrap();
    assert!(release(c(1.0), &Release::TimeReverse { t_d: 150.0 }, &s, &p).is_err());
}

#[test]
fn tailored_release_emits_the_target_shape() {
    // leading edge of the reversed target must rise slower than γ
    let width = 6.0;
    let grid = TimeGrid::span(300.0 - 8.0 * width, 0.01, 300.0 + 5.0 * width).unwrap();
    let target = PulseEnvelope::gaussian(width, 300.0, grid).unwrap();
    let (_, out) = capture_and_release(&Release::Tailored(target.clone()));
    let emitted = out.envelope.normalized().unwrap();
    let overlap = emitted.overlap(&target).unwrap().norm();
    assert!(overlap >= 0.999, "{overlap}");
}

#[test]
fn nothing_stored_nothing_released() {
    let p = params(0.0);
    let h = sech();
    let s = matched_schedule(&h, &p).unwrap();
    let out = release(c(0.0), &Release::TimeReverse { t_d: 160.0 }, &s, &p).unwrap();
    assert!(out.envelope.is_zero());
}

#[test]
fn storage_decay_examples() {
    let one = FockStateMatrix::fock(1, 2).unwrap();
    let out = storage_decay(&one, 0.01, 10.0).unwrap();
    let e = (-0.1f64).exp();
    assert_abs_diff_eq!(out.get(1, 1).re, e, epsilon = 1e-14);
    assert_abs_diff_eq!(out.get(0, 0).re, 1.0 - e, epsilon = 1e-14);
    assert_abs_diff_eq!(state_fidelity(&one, &out).unwrap(), 0.9048374180359595, epsilon = 1e-12);
    let sq = FockStateMatrix::squeezed_vacuum(0.4, 30).unwrap();
    assert_eq!(storage_decay(&sq, 0.01, 0.0).unwrap(), sq);
    let vac = FockStateMatrix::vacuum(5).unwrap();
    assert_eq!(storage_decay(&vac, 0.3, 7.0).unwrap(), vac);
    assert!(storage_decay(&vac, -1.0, 1.0).is_err());
    assert!(storage_decay(&vac, 1.0, -1.0).is_err());
}

#[test]
fn full_cycle_examples() {
    let h = sech();
    let one = FockStateMatrix::fock(1, 2).unwrap();

    let simulated = CycleSpec {
        matching: MatchingMode::Simulated,
        ..CycleSpec::new(0.0)
    };
    let r = full_cycle(&one, &h, &params(1e-3), &simulated).unwrap();
    assert!(r.fidelity >= 0.9995, "{}", r.fidelity);
    assert!(r.capture_amplitude.norm() >= 0.9999 && r.release_amplitude.norm() >= 0.9999);

    let r = full_cycle(&one, &h, &params(1e-3), &CycleSpec::new(500.0)).unwrap();
    assert_abs_diff_eq!(r.fidelity, (-0.5f64).exp(), epsilon = 1e-6);

    for n in 1..=4 {
        let rho = FockStateMatrix::fock(n, n + 1).unwrap();
        let r = full_cycle(&rho, &h, &params(1e-3), &CycleSpec::new(300.0)).unwrap();
        assert_abs_diff_eq!(r.fidelity, (-(n as f64) * 0.3).exp(), epsilon = 1e-12);
    }

    let ideal = full_cycle(&one, &h, &params(0.0), &CycleSpec::new(100.0)).unwrap();
    assert_abs_diff_eq!(ideal.fidelity, 1.0, epsilon = 1e-12);
}

#[test]
fn released_energy_is_the_transmissivity() {
    let h = sech();
    let one = FockStateMatrix::fock(1, 2).unwrap();
    for matching in [MatchingMode::Ideal, MatchingMode::Simulated] {
        for t_s in [0.0, 200.0, 1000.0] {
            let spec = CycleSpec {
                matching,
                ..CycleSpec::new(t_s)
            };
            let r = full_cycle(&one, &h, &params(1e-3), &spec).unwrap();
            assert_abs_diff_eq!(r.released_norm, r.eta, epsilon = 1e-9);
            // a single photon is retrieved with probability η
            assert_abs_diff_eq!(r.rho_out.get(1, 1).re, r.eta, epsilon = 1e-12);
        }
    }
}

#[test]
fn tailored_cycle_places_the_pulse_after_the_hold() {
    let h = sech();
    let grid = TimeGrid::span(0.0, 0.01, 80.0).unwrap();
    let target = PulseEnvelope::gaussian(5.0, 55.0, grid).unwrap();
    let spec = CycleSpec {
        release: ReleaseShape::Tailored(target),
        ..CycleSpec::new(40.0)
    };
    let r = full_cycle(&FockStateMatrix::fock(1, 2).unwrap(), &h, &params(1e-3), &spec).unwrap();
    assert_abs_diff_eq!(r.released_envelope.grid().t0, 200.0, epsilon = 1e-9);
}

fn squeezed_one_photon() -> FockStateMatrix {
    FockStateMatrix::squeezed_vacuum(1f64.asinh(), 60).unwrap()
}

#[test]
fn squeezed_sweep_matches_dense_beam_splitter() {
    let p = params(1e-3);
    let rho = squeezed_one_photon();
    let times: Vec<f64> = (0..=20).map(|k| 250.0 * k as f64).collect();
    let sweep = fidelity_sweep(&rho, &times, &p, CycleAmplitudes::IDEAL, LossRouting::Recycle).unwrap();
    for pt in &sweep {
        let t = (-0.5 * p.gamma_0 * pt.t_s).exp();
        let out = dense_loss(rho.matrix(), c(t));
        let f: f64 = (rho.matrix() * &out).trace().re;
        assert_abs_diff_eq!(pt.fidelity, f, epsilon = 1e-6);
    }
    assert_abs_diff_eq!(sweep[0].fidelity, 1.0, epsilon = 1e-12);
}

#[test]
fn fock_sweep_is_exponential_and_long_holds_reach_vacuum() {
    let p = params(1e-3);
    let times = [0.0, 100.0, 693.147_180_559_945_3, 3000.0];
    let one = FockStateMatrix::fock(1, 2).unwrap();
    let sweep = fidelity_sweep(&one, &times, &p, CycleAmplitudes::IDEAL, LossRouting::Recycle).unwrap();
    for pt in &sweep {
        assert_abs_diff_eq!(pt.fidelity, (-1e-3 * pt.t_s).exp(), epsilon = 1e-12);
    }
    assert_abs_diff_eq!(sweep[2].fidelity, 0.5, epsilon = 1e-6);

    let rho = squeezed_one_photon();
    let late = fidelity_sweep(&rho, &[1e5], &p, CycleAmplitudes::IDEAL, LossRouting::Recycle).unwrap();
    assert_abs_diff_eq!(late[0].fidelity, rho.get(0, 0).re, epsilon = 1e-12);
}

fn bell(d: usize) -> FockStateMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![c(0.0); d * d];
    amps[0] = c(s);
    amps[d + 1] = c(s);
    FockStateMatrix::from_amplitudes(&amps).unwrap()
}

#[test]
fn bell_state_storage() {
    let rho = bell(2);
    let kept = bipartite_store(&rho, c(1.0), c(1.0), 0.0, 0.0).unwrap();
    assert_abs_diff_eq!(negativity(&kept).unwrap(), 0.5, epsilon = 1e-9);
    assert_abs_diff_eq!(kept.purity(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(kept.trace(), 1.0, epsilon = 1e-12);

    for d in [2, 3] {
        let rho = bell(d);
        let stored = bipartite_store(&rho, c(1.0), c(1.0), 1e-3, 1000.0).unwrap();
        let t = Complex64::new(0.0, -(-0.5f64).exp());
        let dense = dense_two_mode_loss(rho.matrix(), d, t, t);
        assert!(max_abs_diff(stored.matrix(), &dense) < 1e-12);
        let n = negativity(&stored).unwrap();
        assert!(n > 0.0 && n < 0.5);
        assert_abs_diff_eq!(n, dense_negativity(&dense, d), epsilon = 1e-6);
    }
}

#[test]
fn product_states_stay_products() {
    let a = FockStateMatrix::coherent(Complex64::new(0.3, 0.2), 8).unwrap();
    let b = FockStateMatrix::squeezed_vacuum(0.2, 8).unwrap();
    let (da, db) = (Complex64::from_polar(0.9, 0.3), Complex64::from_polar(0.7, -1.0));
    let out = bipartite_store(&a.tensor(&b), da, db, 1e-3, 100.0).unwrap();
    let s = (-0.05f64).exp();
    let minus_i = Complex64::new(0.0, -1.0);
    let expect = dense_loss(a.matrix(), minus_i * da * s).kronecker(&dense_loss(b.matrix(), minus_i * db * s));
    assert!(max_abs_diff(out.matrix(), &expect) < 1e-12);
    assert!(negativity(&out).unwrap() < 1e-10);
    let vac = FockStateMatrix::vacuum(3).unwrap();
    assert!(negativity(&vac.tensor(&vac)).unwrap() < 1e-14);
}

#[test]
fn bipartite_needs_square_dimension() {
    assert!(bipartite_store(&FockStateMatrix::vacuum(5).unwrap(), c(1.0), c(1.0), 0.0, 0.0).is_err());
    assert!(negativity(&FockStateMatrix::vacuum(3).unwrap()).is_err());
}

#[test]
fn ideal_channels_keep_pure_states_pure() {
    let amps: Vec<Complex64> = (0..9)
        .map(|k| Complex64::from_polar(1.0 / 3.0, 0.7 * k as f64))
        .collect();
    let rho = FockStateMatrix::from_amplitudes(&amps).unwrap();
    let out = bipartite_store(&rho, c(1.0), Complex64::new(0.0, 1.0), 0.0, 5.0).unwrap();
    assert_abs_diff_eq!(out.trace(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(out.purity(), 1.0, epsilon = 1e-12);
}

#[derive(Debug, Clone)]
enum Input {
    Fock(usize),
    Squeezed(f64),
    Coherent(f64, f64),
}

impl Input {
    fn state(&self) -> FockStateMatrix {
        match *self {
            Input::Fock(n) => FockStateMatrix::fock(n, n + 1).unwrap(),
            Input::Squeezed(r) => FockStateMatrix::squeezed_vacuum(r, 80).unwrap(),
            Input::Coherent(a, phi) => FockStateMatrix::coherent(Complex64::from_polar(a, phi), 30).unwrap(),
        }
    }
}

fn inputs() -> impl Strategy<Value = Input> {
    prop_oneof![
        (0usize..=5).prop_map(Input::Fock),
        (0.0f64..=1.0).prop_map(Input::Squeezed),
        (0.0f64..=2.0, 0.0f64..6.3).prop_map(|(a, p)| Input::Coherent(a, p)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sweeps_are_monotone(input in inputs(), d_in in 0.9f64..=1.0, d_out in 0.9f64..=1.0) {
        let rho = input.state();
        let times: Vec<f64> = (0..=30).map(|k| 100.0 * k as f64).collect();
        let amps = CycleAmplitudes { d_in: c(d_in), d_out: c(d_out) };
        let sweep = fidelity_sweep(&rho, &times, &params(1e-3), amps, LossRouting::Recycle).unwrap();
        for w in sweep.windows(2) {
            prop_assert!(w[1].fidelity <= w[0].fidelity + 1e-12);
        }
        prop_assert!(sweep.iter().all(|p| p.fidelity <= 1.0 + 1e-9 && p.fidelity >= -1e-12));
    }

    #[test]
    fn fidelity_depends_only_on_total_transmissivity(
        input in inputs(),
        a in 0.3f64..=1.0,
        b in 0.3f64..=1.0,
        s in 0.3f64..=1.0,
    ) {
        let rho = input.state();
        let p = SystemParams::new(10.0, 1.0, 1.0).unwrap();
        let run = |d_in: f64, survival: f64, d_out: f64| {
            let amps = CycleAmplitudes { d_in: c(d_in), d_out: c(d_out) };
            let t_s = -2.0 * survival.ln();
            let pt = fidelity_sweep(&rho, &[t_s], &p, amps, LossRouting::Recycle).unwrap()[0];
            (pt.fidelity, pt.eta)
        };
        let (f0, eta0) = run(a, s, b);
        for (x, y, z) in [(s, a, b), (b, s, a), (a, b, s), (s, b, a)] {
            let (f, eta) = run(x, y, z);
            prop_assert!((f - f0).abs() < 1e-10);
            prop_assert!((eta - eta0).abs() < 1e-12);
        }
        let one = run((a * b * s).sqrt(), 1.0, (a * b * s).sqrt()).0;
        prop_assert!((one - f0).abs() < 1e-10);
    }
}

#[test]
fn sweep_of_simulated_amplitudes_starts_below_one() {
    let h = sech();
    let amps = CycleAmplitudes::simulate(&h, &params(1e-3), &ReleaseShape::MirrorImage).unwrap();
    let one = FockStateMatrix::fock(1, 2).unwrap();
    let sweep = fidelity_sweep(&one, &[0.0], &params(1e-3), amps, LossRouting::Recycle).unwrap();
    assert!(sweep[0].fidelity < 1.0 && sweep[0].fidelity > 0.9995);
}

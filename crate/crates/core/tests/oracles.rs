//! Cross-checks against values frozen from independent evaluations: a
//! 40-digit recomputation of the closed forms (with analytic ∂ₜΩ̃′ and a 10×
//! finer trapezoid) and the reference integrator.

#![allow(clippy::excessive_precision)]

use nads_core::dressed::{omega_tilde_at, snapshot_series};
use nads_core::overlap::{transition_probability, InitialState, NadsOverlaps};
use nads_core::tdse::{evolve, evolve_fixed, landau_zener_survival, lz_oracle, rabi_oracle};
use nads_core::{Chirp, Complex64, Envelope, FieldModel, Frame, SystemParams, Tolerance, UniformGrid};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// Gaussian{Ω₀=2, τ=20}, Δω=0.5, β=0.01, γ_g=0.05, γ_e=0.15 on [−60, 60].
fn chirped_damped() -> (SystemParams, FieldModel, UniformGrid) {
    let p = SystemParams::new(0.0, 5.5).with_damping(0.05, 0.15);
    let f = FieldModel::new(
        5.0,
        Envelope::Gaussian {
            omega0_peak: 2.0,
            t_center: 0.0,
            tau: 20.0,
        },
    )
    .with_phase(Chirp::new(0.0, 0.01));
    (p, f, UniformGrid::with_max_step(-60.0, 60.0, 0.05).unwrap())
}

#[test]
fn rabi_at_pulse_center_matches_high_precision() {
    let (p, f, grid) = chirped_damped();
    let expected = c(2.056_788_325_709_172_1, -0.019_447_796_110_087_393);
    assert!(rel(omega_tilde_at(&p, &f, 0.0).unwrap(), expected) < 1e-14);
    let s = snapshot_series(&p, &f, &grid).unwrap();
    assert!(rel(s.snapshots[1200].omega_tilde, expected) < 1e-14);
}

fn probability_at(t: f64, max_step: f64) -> f64 {
    let (p, f, _) = chirped_damped();
    let grid = UniformGrid::with_max_step(-60.0, 60.0, max_step).unwrap();
    let s = snapshot_series(&p, &f, &grid).unwrap();
    let k = ((t + 60.0) / grid.step()).round() as usize;
    assert!((s.snapshots[k].t - t).abs() < 1e-9);
    transition_probability(&s.snapshots[k])
}

#[test]
fn spot_values_match_high_precision() {
    let (p, f, grid) = chirped_damped();
    let s = snapshot_series(&p, &f, &grid).unwrap();
    // (t, P, Ω̃′) from the 40-digit evaluation with analytic ∂ₜΩ̃′
    let spots = [
        (
            -40.0,
            1.189_402_711_391_776_7e-6,
            c(0.896_539_468_757_418_9, 0.111_539_986_230_162_82),
        ),
        (
            -20.0,
            0.005_143_225_730_210_703_6,
            c(1.010_662_670_747_040_3, 0.009_894_498_223_238_433),
        ),
        (
            0.0,
            0.002_213_744_328_586_945_9,
            c(2.056_788_325_709_172_1, -0.019_447_796_110_087_393),
        ),
        (
            20.0,
            0.011_943_456_312_771_738,
            c(0.765_251_713_088_489_6, -0.065_337_978_530_233_32),
        ),
        (
            40.0,
            0.062_922_165_614_226_75,
            c(0.065_596_329_248_441_21, -0.304_895_109_667_668_9),
        ),
    ];
    for (t, p_expected, rabi) in spots {
        let k = ((t + 60.0) / grid.step()).round() as usize;
        assert!(rel(s.snapshots[k].omega_tilde, rabi) < 1e-13, "Ω̃′ at t = {t}");
        // finite-difference ∂ₜΩ̃′ is the only approximation in P: second order in h
        let coarse = (probability_at(t, 0.05) - p_expected).abs();
        let fine = (probability_at(t, 0.025) - p_expected).abs();
        let finest = probability_at(t, 0.0125);
        assert!(
            (finest - p_expected).abs() < 1e-5 * p_expected + 1e-10,
            "P at t = {t}: {finest} vs {p_expected}"
        );
        if coarse > 1e-7 * p_expected {
            let order = coarse / fine;
            assert!((3.5..4.5).contains(&order), "P at t = {t}: h-halving ratio {order}");
        }
    }
}

#[test]
fn overlaps_at_pulse_center_match_fine_quadrature() {
    let (p, f, grid) = chirped_damped();
    let s = snapshot_series(&p, &f, &grid).unwrap();
    let o = NadsOverlaps::new(&s);
    let k = 1200;
    // 40-digit trapezoid with h = 0.005
    let gg = 0.294_251_988_318_047_46;
    let ee = 1_374.073_512_511_592_5;
    let eg = c(-0.458_344_364_251_478_7, 0.827_641_288_677_254_9);
    // the h vs h/10 quadrature gap in the oracle itself is ~1.5e-6 relative
    let tol = 1e-5;
    assert!((o.gg(k).unwrap() - gg).abs() < tol * gg);
    assert!((o.ee(k).unwrap() - ee).abs() < tol * ee);
    assert!(rel(o.eg(k).unwrap(), eg) < tol);
    assert!((o.gg_expanded(k).unwrap() - gg).abs() < tol * gg);
    assert!((o.ee_expanded(k).unwrap() - ee).abs() < tol * ee);
    assert!(rel(o.eg_expanded(k).unwrap(), eg) < tol);
}

#[test]
fn concise_and_expanded_forms_agree() {
    let (p, f, grid) = chirped_damped();
    let s = snapshot_series(&p, &f, &grid).unwrap();
    let o = NadsOverlaps::new(&s);
    for k in 0..s.len() {
        let (gg, ee, eg) = (o.gg(k).unwrap(), o.ee(k).unwrap(), o.eg(k).unwrap());
        assert!((o.gg_expanded(k).unwrap() - gg).abs() <= 1e-9 * gg);
        assert!((o.ee_expanded(k).unwrap() - ee).abs() <= 1e-9 * ee);
        assert!((o.eg_expanded(k).unwrap() - eg).norm() <= 1e-9 * eg.norm().max(1e-300));
    }
}

#[test]
fn slow_pulse_ratio_matches_integrator() {
    let p = SystemParams::new(0.0, 6.0);
    let f = FieldModel::new(
        5.0,
        Envelope::Gaussian {
            omega0_peak: 0.3,
            t_center: 0.0,
            tau: 200.0,
        },
    );
    let grid = UniformGrid::with_max_step(-1200.0, 1200.0, 0.5).unwrap();
    let s = snapshot_series(&p, &f, &grid).unwrap();
    let o = NadsOverlaps::new(&s);
    let k = grid.len() / 2;
    assert_eq!(grid.t(k), 0.0);
    let nads = o.reconstruct(k, InitialState::Ground).unwrap().ratio.norm();
    let tr = evolve(
        &p,
        &f,
        &grid,
        InitialState::Ground,
        Frame::Rotating,
        Tolerance::default(),
    )
    .unwrap();
    let tdse = (tr.c_e[k] / tr.c_g[k]).norm();
    assert!((nads - tdse).abs() < 0.05 * tdse, "NADS {nads} vs TDSE {tdse}");
    // adiabatic-following value tan(θ/2) with tan θ = Ω/Δω
    let adiabatic = (0.5 * 0.3f64.atan()).tan();
    assert!((nads - adiabatic).abs() < 1e-3 * adiabatic);
}

#[test]
fn lab_pi_pulse_is_within_bloch_siegert_budget() {
    let p = SystemParams::new(0.0, 5.0);
    let f = FieldModel::new(5.0, Envelope::Constant { omega0: 0.2 });
    let t_end = std::f64::consts::PI / 0.2;
    let grid = UniformGrid::new(0.0, t_end, 401).unwrap();
    let lab = evolve(&p, &f, &grid, InitialState::Ground, Frame::Lab, Tolerance::default()).unwrap();
    let rot = evolve(
        &p,
        &f,
        &grid,
        InitialState::Ground,
        Frame::Rotating,
        Tolerance::default(),
    )
    .unwrap();
    let n = grid.len() - 1;
    assert!((lab.population_e(n) - 1.0).abs() < 1e-2);
    assert!((rot.population_e(n) - rabi_oracle(0.2, t_end).1).abs() < 1e-8);
    let budget = (0.2f64 / 5.0).powi(2) + 1e-6;
    assert!((lab.population_e(n) - rot.population_e(n)).abs() < budget);
}

#[test]
fn frames_agree_up_to_counter_rotating_terms() {
    for (omega0, omega) in [(0.5, 5.0), (0.1, 1.0), (0.2, 2.0), (0.2, 5.0)] {
        let p = SystemParams::new(0.0, omega);
        let f = FieldModel::new(omega, Envelope::Constant { omega0 });
        let grid = UniformGrid::new(0.0, std::f64::consts::PI / omega0, 201).unwrap();
        let lab = evolve(&p, &f, &grid, InitialState::Ground, Frame::Lab, Tolerance::default()).unwrap();
        let rot = evolve(
            &p,
            &f,
            &grid,
            InitialState::Ground,
            Frame::Rotating,
            Tolerance::default(),
        )
        .unwrap();
        let n = grid.len() - 1;
        let budget = (omega0 / omega).powi(2) + 1e-6;
        assert!((lab.population_e(n) - rot.population_e(n)).abs() < budget);
        assert!((lab.population_g(n) - rot.population_g(n)).abs() < budget);
    }
}

#[test]
fn rk4_is_fourth_order() {
    let p = SystemParams::new(0.0, 5.0);
    let f = FieldModel::new(5.0, Envelope::Constant { omega0: 0.2 });
    let t_end = std::f64::consts::PI / 0.2;
    let grid = UniformGrid::new(0.0, t_end, 11).unwrap();
    // exact π-pulse: c_g(T) = 0; the population error is quadratic in the amplitude error
    let err = |n| {
        let tr = evolve_fixed(&p, &f, &grid, InitialState::Ground.amplitudes(), Frame::Rotating, n);
        tr.c_g[10].norm()
    };
    let (e1, e2, e3) = (err(4), err(8), err(16));
    for ratio in [e1 / e2, e2 / e3] {
        assert!((12.0..20.0).contains(&ratio), "error ratio {ratio}");
    }
}

#[test]
fn landau_zener_survival_matches_oracle() {
    for v in [0.1, 0.25, 0.5] {
        let survival = landau_zener_survival(v, 1.0, 40.0, 0.1, Tolerance::default()).unwrap();
        let expected = lz_oracle(v, 1.0);
        assert!((survival - expected).abs() < 1e-3, "V = {v}: {survival} vs {expected}");
    }
}

#[test]
fn adiabatic_reduction_of_rabi_frequency() {
    let p = SystemParams::new(0.0, 6.0);
    let mut last = f64::INFINITY;
    for tau in [10.0, 100.0, 1000.0] {
        let f = FieldModel::new(
            5.0,
            Envelope::Gaussian {
                omega0_peak: 1.0,
                t_center: 0.0,
                tau,
            },
        );
        let t = 0.5 * tau;
        let omega = (-0.25f64).exp();
        let adiabatic = (omega * omega + 1.0).sqrt();
        let err = (omega_tilde_at(&p, &f, t).unwrap() - adiabatic).norm();
        assert!(err < last, "τ = {tau}: {err} !< {last}");
        last = err;
    }
    assert!(last < 1e-3);
}

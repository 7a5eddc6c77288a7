//! Instantaneous nonadiabatic dressed-state quantities along a time grid.
//!
//! All square roots are taken on the principal branch at the first grid
//! point and continued by nearest-root selection afterwards, so that Ω̃′,
//! COS(θ/2) and SIN(θ/2) are continuous functions of time. Every step where
//! the continued root departs from the (signed) principal root is recorded
//! in a [`BranchLog`].

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{NadsError, Result};
use crate::field::{phase_at, rabi_at, EnvelopeSample, FieldModel, PhaseSample, SystemParams};
use crate::grid::{finite_difference, UniformGrid};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Smallest |Ω̃′| that may appear in a denominator.
pub const DEGENERATE_RABI: f64 = 1e-12;

/// Relative tolerance under which the two square roots count as equidistant
/// from the previous sample.
pub const BRANCH_AMBIGUITY_TOL: f64 = 1e-14;

/// Δω = ω_e − ω_g − ω.
pub fn detuning(params: &SystemParams, field: &FieldModel) -> f64 {
    params.omega_e - params.omega_g - field.carrier_omega
}

/// sgn(Δω), with exact resonance counted as positive.
pub fn detuning_sign(delta: f64) -> f64 {
    if delta >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Δω̃′ = Δω − i(γ_g+γ_e)/2 − (∂ₜφ − iΩ⁻¹∂ₜΩ) and its time derivative
/// −∂ₜ²φ + i∂ₜ(Ω⁻¹∂ₜΩ).
pub fn nonadiabatic_detuning(
    params: &SystemParams,
    field: &FieldModel,
    env: &EnvelopeSample,
    phase: &PhaseSample,
) -> (Complex64, Complex64) {
    let delta = detuning(params, field);
    let delta_tilde = Complex64::new(delta, -0.5 * params.gamma_sum()) - Complex64::new(phase.dphi, -env.log_deriv);
    let d_delta_tilde = Complex64::new(-phase.d2phi, env.dlog_deriv);
    (delta_tilde, d_delta_tilde)
}

/// Picks `root` or `-root`, whichever lies closer to `prev`. The flag is
/// true when the negated root was chosen.
fn continue_root(root: Complex64, prev: Option<Complex64>, quantity: &'static str) -> Result<(Complex64, bool)> {
    let Some(prev) = prev else {
        return Ok((root, false));
    };
    if root == Complex64::new(0.0, 0.0) {
        return Ok((root, false));
    }
    let same = (root - prev).norm();
    let flipped = (root + prev).norm();
    if (same - flipped).abs() <= BRANCH_AMBIGUITY_TOL * same.max(flipped) {
        return Err(NadsError::BranchAmbiguity { quantity });
    }
    Ok(if flipped < same { (-root, true) } else { (root, false) })
}

fn rabi_with_flag(
    omega: f64,
    delta_tilde: Complex64,
    d_delta_tilde: Complex64,
    sign_delta: f64,
    prev: Option<Complex64>,
) -> Result<(Complex64, bool)> {
    let radicand = omega * omega + delta_tilde * delta_tilde - 2.0 * I * d_delta_tilde;
    continue_root(sign_delta * radicand.sqrt(), prev, "omega_tilde")
}

/// Ω̃′ = sgn(Δω)·[Ω² + Δω̃′² − 2i∂ₜΔω̃′]^{1/2}, continued from `prev` when given.
pub fn nonadiabatic_rabi(
    omega: f64,
    delta_tilde: Complex64,
    d_delta_tilde: Complex64,
    sign_delta: f64,
    prev: Option<Complex64>,
) -> Result<Complex64> {
    rabi_with_flag(omega, delta_tilde, d_delta_tilde, sign_delta, prev).map(|(v, _)| v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambdas {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub lambda_t1: Complex64,
    pub lambda_t2: Complex64,
}

/// Λ₁,₂ = (Δω̃′ ± Ω̃′)/2 and their shifted versions Λ̃′ⱼ = Λⱼ − i(2Ω̃′)⁻¹∂ₜΩ̃′.
pub fn lambdas(delta_tilde: Complex64, omega_tilde: Complex64, d_omega_tilde: Complex64) -> Result<Lambdas> {
    check_rabi(omega_tilde)?;
    let lambda1 = 0.5 * (delta_tilde + omega_tilde);
    let lambda2 = 0.5 * (delta_tilde - omega_tilde);
    let shift = I * d_omega_tilde / (2.0 * omega_tilde);
    Ok(Lambdas {
        lambda1,
        lambda2,
        lambda_t1: lambda1 - shift,
        lambda_t2: lambda2 - shift,
    })
}

fn check_rabi(omega_tilde: Complex64) -> Result<()> {
    let modulus = omega_tilde.norm();
    if !(modulus >= DEGENERATE_RABI) {
        return Err(NadsError::DegenerateRabi { modulus });
    }
    Ok(())
}

fn mixing_with_flags(
    lambda_t1: Complex64,
    lambda_t2: Complex64,
    omega_tilde: Complex64,
    sign_delta: f64,
    prev: Option<(Complex64, Complex64)>,
) -> Result<((Complex64, bool), (Complex64, bool))> {
    check_rabi(omega_tilde)?;
    let cos = continue_root((lambda_t1 / omega_tilde).sqrt(), prev.map(|p| p.0), "cos_half")?;
    let sin = continue_root(
        sign_delta * (-lambda_t2 / omega_tilde).sqrt(),
        prev.map(|p| p.1),
        "sin_half",
    )?;
    Ok((cos, sin))
}

/// COS(θ/2) = √(Λ̃′₁/Ω̃′) and SIN(θ/2) = sgn(Δω)·√(−Λ̃′₂/Ω̃′).
pub fn mixing_functions(
    lambda_t1: Complex64,
    lambda_t2: Complex64,
    omega_tilde: Complex64,
    sign_delta: f64,
    prev: Option<(Complex64, Complex64)>,
) -> Result<(Complex64, Complex64)> {
    let ((c, _), (s, _)) = mixing_with_flags(lambda_t1, lambda_t2, omega_tilde, sign_delta, prev)?;
    Ok((c, s))
}

/// Ground and excited NADS frequencies:
/// ω̃′_G = ω_g + Λ₂ and ω̃′_E = ω_e − Λ₂ − i(γ_g+γ_e)/2 − (∂ₜφ − iΩ⁻¹∂ₜΩ).
pub fn nads_frequencies(
    params: &SystemParams,
    lambda2: Complex64,
    env: &EnvelopeSample,
    phase: &PhaseSample,
) -> (Complex64, Complex64) {
    let omega_g = params.omega_g + lambda2;
    let omega_e = params.omega_e
        - lambda2
        - Complex64::new(0.0, 0.5 * params.gamma_sum())
        - Complex64::new(phase.dphi, -env.log_deriv);
    (omega_g, omega_e)
}

/// Ω̃′ at a single instant on the signed principal branch, for use where no
/// time grid is available.
pub fn omega_tilde_at(params: &SystemParams, field: &FieldModel, t: f64) -> Result<Complex64> {
    let env = rabi_at(params, field, t)?;
    let phase = phase_at(field, t);
    let (dt, ddt) = nonadiabatic_detuning(params, field, &env, &phase);
    nonadiabatic_rabi(env.omega, dt, ddt, detuning_sign(detuning(params, field)), None)
}

/// Every instantaneous NADS quantity at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NadsSnapshot {
    pub t: f64,
    pub omega: f64,
    pub log_deriv: f64,
    pub phi: f64,
    pub delta: f64,
    pub delta_tilde: Complex64,
    pub d_delta_tilde: Complex64,
    pub omega_tilde: Complex64,
    pub d_omega_tilde: Complex64,
    pub lambda1: Complex64,
    pub lambda2: Complex64,
    pub lambda_t1: Complex64,
    pub lambda_t2: Complex64,
    pub cos_half: Complex64,
    pub sin_half: Complex64,
    #[serde(rename = "omega_G")]
    pub omega_g_tilde: Complex64,
    #[serde(rename = "omega_E")]
    pub omega_e_tilde: Complex64,
}

/// Grid indices at which the continued root is the negative of the signed
/// principal root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BranchLog {
    pub omega_tilde: Vec<usize>,
    pub cos_half: Vec<usize>,
    pub sin_half: Vec<usize>,
}

impl BranchLog {
    pub fn is_principal_throughout(&self) -> bool {
        self.omega_tilde.is_empty() && self.cos_half.is_empty() && self.sin_half.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSeries {
    pub params: SystemParams,
    pub field: FieldModel,
    pub grid: UniformGrid,
    pub sign_delta: f64,
    pub snapshots: Vec<NadsSnapshot>,
    pub branch_log: BranchLog,
}

impl SnapshotSeries {
    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn get(&self, k: usize) -> Result<&NadsSnapshot> {
        self.grid.check_index(k)?;
        Ok(&self.snapshots[k])
    }

    /// Snapshot at the first grid point, holding the initial values.
    pub fn initial(&self) -> &NadsSnapshot {
        &self.snapshots[0]
    }
}

/// Evaluates the full NADS snapshot at every point of `grid`.
///
/// ∂ₜΩ̃′ is taken by finite differences of the branch-continued Ω̃′.
pub fn snapshot_series(params: &SystemParams, field: &FieldModel, grid: &UniformGrid) -> Result<SnapshotSeries> {
    let delta = detuning(params, field);
    let sign_delta = detuning_sign(delta);
    let n = grid.len();

    let mut envs = Vec::with_capacity(n);
    let mut phases = Vec::with_capacity(n);
    let mut detunings = Vec::with_capacity(n);
    let mut rabis: Vec<Complex64> = Vec::with_capacity(n);
    let mut log = BranchLog::default();

    for (k, t) in grid.times().enumerate() {
        let env = rabi_at(params, field, t).map_err(|e| e.at(k, t))?;
        let phase = phase_at(field, t);
        let (dt, ddt) = nonadiabatic_detuning(params, field, &env, &phase);
        let (ot, flipped) =
            rabi_with_flag(env.omega, dt, ddt, sign_delta, rabis.last().copied()).map_err(|e| e.at(k, t))?;
        if flipped {
            log.omega_tilde.push(k);
        }
        envs.push(env);
        phases.push(phase);
        detunings.push((dt, ddt));
        rabis.push(ot);
    }

    let d_rabis = finite_difference(&rabis, grid.step());

    let mut snapshots: Vec<NadsSnapshot> = Vec::with_capacity(n);
    for k in 0..n {
        let t = grid.t(k);
        let (env, phase) = (&envs[k], &phases[k]);
        let (delta_tilde, d_delta_tilde) = detunings[k];
        let (omega_tilde, d_omega_tilde) = (rabis[k], d_rabis[k]);
        let lam = lambdas(delta_tilde, omega_tilde, d_omega_tilde).map_err(|e| e.at(k, t))?;
        let prev = snapshots.last().map(|s| (s.cos_half, s.sin_half));
        let ((cos_half, cos_flip), (sin_half, sin_flip)) =
            mixing_with_flags(lam.lambda_t1, lam.lambda_t2, omega_tilde, sign_delta, prev).map_err(|e| e.at(k, t))?;
        if cos_flip {
            log.cos_half.push(k);
        }
        if sin_flip {
            log.sin_half.push(k);
        }
        let (omega_g_tilde, omega_e_tilde) = nads_frequencies(params, lam.lambda2, env, phase);
        snapshots.push(NadsSnapshot {
            t,
            omega: env.omega,
            log_deriv: env.log_deriv,
            phi: phase.phi,
            delta,
            delta_tilde,
            d_delta_tilde,
            omega_tilde,
            d_omega_tilde,
            lambda1: lam.lambda1,
            lambda2: lam.lambda2,
            lambda_t1: lam.lambda_t1,
            lambda_t2: lam.lambda_t2,
            cos_half,
            sin_half,
            omega_g_tilde,
            omega_e_tilde,
        });
    }

    Ok(SnapshotSeries {
        params: *params,
        field: *field,
        grid: *grid,
        sign_delta,
        snapshots,
        branch_log: log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Chirp, Envelope};
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn detuning_examples() {
        let f = |omega| FieldModel::new(omega, Envelope::Constant { omega0: 1.0 });
        assert_eq!(detuning(&SystemParams::new(0.0, 5.0), &f(5.0)), 0.0);
        assert_eq!(detuning(&SystemParams::new(0.0, 5.0), &f(4.0)), 1.0);
        assert_eq!(detuning(&SystemParams::new(1.0, 3.0), &f(2.5)), -0.5);
        assert_eq!(detuning_sign(0.0), 1.0);
        assert_eq!(detuning_sign(-1e-300), -1.0);
    }

    fn env(omega: f64, log_deriv: f64, dlog_deriv: f64) -> EnvelopeSample {
        EnvelopeSample {
            t: 0.0,
            omega,
            log_deriv,
            dlog_deriv,
        }
    }

    fn phase(dphi: f64, d2phi: f64) -> PhaseSample {
        PhaseSample { phi: 0.0, dphi, d2phi }
    }

    #[test]
    fn nonadiabatic_detuning_examples() {
        let field = FieldModel::new(4.0, Envelope::Constant { omega0: 1.0 });
        let p = SystemParams::new(0.0, 5.0);
        let (dt, ddt) = nonadiabatic_detuning(&p, &field, &env(1.0, 0.0, 0.0), &phase(0.0, 0.0));
        assert_eq!((dt, ddt), (c(1.0, 0.0), c(0.0, 0.0)));

        let pd = p.with_damping(0.1, 0.3);
        let (dt, ddt) = nonadiabatic_detuning(&pd, &field, &env(1.0, 0.0, 0.0), &phase(0.2, 0.0));
        assert!(close(dt, c(0.8, -0.2), 1e-15));
        assert_eq!(ddt, c(0.0, 0.0));

        let pulse = FieldModel::new(
            4.0,
            Envelope::Gaussian {
                omega0_peak: 1.0,
                t_center: 0.0,
                tau: 10.0,
            },
        );
        let e = rabi_at(&p, &pulse, 5.0).unwrap();
        let (dt, ddt) = nonadiabatic_detuning(&p, &pulse, &e, &phase_at(&pulse, 5.0));
        assert!(close(dt, c(1.0, -0.1), 1e-15));
        assert!(close(ddt, c(0.0, -0.02), 1e-15));
    }

    #[test]
    fn nonadiabatic_rabi_examples() {
        let v = nonadiabatic_rabi(3.0, c(4.0, 0.0), c(0.0, 0.0), 1.0, None).unwrap();
        assert_eq!(v, c(5.0, 0.0));

        let v = nonadiabatic_rabi(0.0, c(-2.0, 0.0), c(0.0, 0.0), -1.0, None).unwrap();
        assert_eq!(v, c(-2.0, 0.0));

        // sqrt(24.92 - 1.6i), frozen from a 40-digit evaluation
        let v = nonadiabatic_rabi(3.0, c(4.0, -0.2), c(0.0, -0.02), 1.0, None).unwrap();
        assert!(close(v, c(4.994_562_620_462_608, -0.160_174_185_567_804_98), 1e-14));
    }

    #[test]
    fn nonadiabatic_rabi_follows_previous_sample() {
        let principal = nonadiabatic_rabi(3.0, c(4.0, 0.0), c(0.0, 0.0), 1.0, None).unwrap();
        let cont = nonadiabatic_rabi(3.0, c(4.0, 0.0), c(0.0, 0.0), 1.0, Some(-principal * 0.99)).unwrap();
        assert_eq!(cont, -principal);
    }

    #[test]
    fn equidistant_roots_are_flagged() {
        // roots ±5 are equidistant from a purely imaginary previous sample
        let err = nonadiabatic_rabi(3.0, c(4.0, 0.0), c(0.0, 0.0), 1.0, Some(c(0.0, 1.0))).unwrap_err();
        assert_eq!(
            err,
            NadsError::BranchAmbiguity {
                quantity: "omega_tilde"
            }
        );
    }

    #[test]
    fn lambda_examples() {
        let l = lambdas(c(4.0, 0.0), c(5.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!((l.lambda1, l.lambda2), (c(4.5, 0.0), c(-0.5, 0.0)));
        assert_eq!((l.lambda_t1, l.lambda_t2), (c(4.5, 0.0), c(-0.5, 0.0)));

        let l = lambdas(c(0.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!((l.lambda1, l.lambda2), (c(1.0, 0.0), c(-1.0, 0.0)));

        let l = lambdas(c(4.0, 0.0), c(5.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!(close(l.lambda_t1, c(4.5, -0.1), 1e-15));
        assert!(close(l.lambda_t2, c(-0.5, -0.1), 1e-15));
        assert!(close(l.lambda_t1 - l.lambda_t2, c(5.0, 0.0), 1e-15));
    }

    #[test]
    fn degenerate_rabi_is_rejected() {
        assert!(matches!(
            lambdas(c(1.0, 0.0), c(1e-13, 0.0), c(0.0, 0.0)),
            Err(NadsError::DegenerateRabi { .. })
        ));
        assert!(matches!(
            mixing_functions(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), 1.0, None),
            Err(NadsError::DegenerateRabi { .. })
        ));
    }

    #[test]
    fn mixing_examples() {
        let (co, si) = mixing_functions(c(4.5, 0.0), c(-0.5, 0.0), c(5.0, 0.0), 1.0, None).unwrap();
        assert_relative_eq!(co.re, 0.9f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(si.re, 0.1f64.sqrt(), max_relative = 1e-15);
        assert_eq!((co.im, si.im), (0.0, 0.0));

        let (co, si) = mixing_functions(c(3.0, 0.0), c(0.0, 0.0), c(3.0, 0.0), 1.0, None).unwrap();
        assert_eq!((co, si), (c(1.0, 0.0), c(0.0, 0.0)));

        // values frozen from a 40-digit evaluation of sqrt(0.9-0.02i), sqrt(0.1+0.02i)
        let (co, si) = mixing_functions(c(4.5, -0.1), c(-0.5, -0.1), c(5.0, 0.0), 1.0, None).unwrap();
        assert!(close(co, c(0.948_741_849_713_121_9, -0.010_540_275_000_015_836), 1e-15));
        assert!(close(si, c(0.317_789_545_353_411_3, 0.031_467_366_205_767_02), 1e-15));
        assert!(close(co * co + si * si, c(1.0, 0.0), 1e-15));
    }

    #[test]
    fn frequency_examples() {
        let p = SystemParams::new(0.0, 5.0);
        let (g, e) = nads_frequencies(&p, c(0.0, 0.0), &env(1.0, 0.0, 0.0), &phase(0.0, 0.0));
        assert_eq!(g, c(0.0, 0.0));
        assert_eq!(e, c(5.0, 0.0));

        let (g, e) = nads_frequencies(&p, c(-0.5, 0.0), &env(1.0, 0.0, 0.0), &phase(0.0, 0.0));
        assert_eq!((g, e), (c(-0.5, 0.0), c(5.5, 0.0)));

        let pd = p.with_damping(0.1, 0.3);
        let (_, e) = nads_frequencies(&pd, c(-0.5, 0.0), &env(1.0, -0.1, 0.0), &phase(0.2, 0.0));
        assert!(close(e, c(5.3, -0.3), 1e-15));
    }

    fn static_series() -> SnapshotSeries {
        let p = SystemParams::new(0.0, 9.0);
        let f = FieldModel::new(5.0, Envelope::Constant { omega0: 3.0 });
        snapshot_series(&p, &f, &UniformGrid::new(0.0, 10.0, 101).unwrap()).unwrap()
    }

    #[test]
    fn static_problem_is_time_translation_invariant() {
        let s = static_series();
        let first = s.snapshots[0];
        assert_eq!(first.omega_tilde, c(5.0, 0.0));
        for snap in &s.snapshots {
            assert_eq!(snap.omega_tilde, first.omega_tilde);
            assert_eq!(snap.cos_half, first.cos_half);
            assert_eq!(snap.sin_half, first.sin_half);
            assert_eq!(snap.d_omega_tilde, c(0.0, 0.0));
        }
        assert!(s.branch_log.is_principal_throughout());
    }

    #[test]
    fn gaussian_log_derivative_is_odd_about_center() {
        let p = SystemParams::new(0.0, 6.0);
        let f = FieldModel::new(
            5.0,
            Envelope::Gaussian {
                omega0_peak: 1.0,
                t_center: 0.0,
                tau: 10.0,
            },
        );
        let s = snapshot_series(&p, &f, &UniformGrid::new(-40.0, 40.0, 3201).unwrap()).unwrap();
        let n = s.len();
        for k in 0..n {
            let a = s.snapshots[k].delta_tilde.im;
            let b = s.snapshots[n - 1 - k].delta_tilde.im;
            assert!((a + b).abs() < 1e-15, "k = {k}");
            assert_eq!(a, s.snapshots[k].log_deriv);
        }
    }

    #[test]
    fn underflow_carries_grid_index() {
        let p = SystemParams::new(0.0, 6.0);
        let f = FieldModel::new(
            5.0,
            Envelope::Gaussian {
                omega0_peak: 1.0,
                t_center: 0.0,
                tau: 1.0,
            },
        );
        let err = snapshot_series(&p, &f, &UniformGrid::new(0.0, 20.0, 21).unwrap()).unwrap_err();
        match err {
            NadsError::AtGridPoint { index, source, .. } => {
                assert_eq!(index, 9);
                assert!(matches!(*source, NadsError::EnvelopeUnderflow { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn chirped_pulse_keeps_branch_continuity() {
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
        let s = snapshot_series(&p, &f, &UniformGrid::with_max_step(-60.0, 60.0, 0.05).unwrap()).unwrap();
        for w in s.snapshots.windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!((b.omega_tilde - a.omega_tilde).norm() < (b.omega_tilde + a.omega_tilde).norm());
            assert!((b.cos_half - a.cos_half).norm() < (b.cos_half + a.cos_half).norm());
            assert!((b.sin_half - a.sin_half).norm() < (b.sin_half + a.sin_half).norm());
        }
    }
}

//! Invariant suite behind `nads validate`.

use std::f64::consts::PI;

use nads_core::dressed::snapshot_series;
use nads_core::field::{phase_at, rabi_at, rabi_envelope};
use nads_core::overlap::{reverse_transition_probability_from, transition_probability, transition_probability_from};
use nads_core::tdse::{evolve, evolve_fixed, landau_zener_survival, lz_oracle, rabi_oracle};
use nads_core::{
    Chirp, Complex64, Envelope, FieldModel, Frame, InitialState, NadsOverlaps, Result, SnapshotSeries, SystemParams,
    Tolerance, UniformGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::scenario::Scenario;
use crate::shipped;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// worst ≤ threshold
    Below,
    /// worst > threshold
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst measured value; for `Above` checks, the smallest.
    pub worst: f64,
    pub threshold: f64,
    pub bound: Bound,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    fn below(name: &'static str, worst: f64, threshold: f64) -> Self {
        Check {
            name,
            // negated so that NaN fails
            passed: !(worst > threshold) && !worst.is_nan(),
            worst,
            threshold,
            bound: Bound::Below,
            error: None,
        }
    }

    fn above(name: &'static str, worst: f64, threshold: f64) -> Self {
        Check {
            name,
            passed: worst > threshold,
            worst,
            threshold,
            bound: Bound::Above,
            error: None,
        }
    }

    fn from_result(name: &'static str, r: Result<Check>) -> Self {
        r.unwrap_or_else(|e| Check {
            name,
            passed: false,
            worst: f64::NAN,
            threshold: f64::NAN,
            bound: Bound::Below,
            error: Some(e.to_string()),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let op = match c.bound {
                Bound::Below => "<=",
                Bound::Above => ">",
            };
            out.push_str(&format!(
                "{status} {:<22} worst {:.3e} {op} {:.1e}",
                c.name, c.worst, c.threshold
            ));
            if let Some(e) = &c.error {
                out.push_str(&format!(" ({e})"));
            }
            out.push('\n');
        }
        out.push_str(if self.passed {
            "all checks passed\n"
        } else {
            "some checks failed\n"
        });
        out
    }
}

fn series_of(s: &Scenario) -> Result<SnapshotSeries> {
    snapshot_series(&s.system, &s.field, &s.time_grid())
}

pub fn trig_identity(series: &[SnapshotSeries]) -> Check {
    let worst = series
        .iter()
        .flat_map(|s| &s.snapshots)
        .map(|s| (s.cos_half * s.cos_half + s.sin_half * s.sin_half - 1.0).norm())
        .fold(0.0, f64::max);
    Check::below("trig_identity", worst, 1e-10)
}

/// Λ₁ + Λ₂ = Δω̃′, Λ₁ − Λ₂ = Ω̃′ and Λ̃′₁ − Λ̃′₂ = Ω̃′, relative to |Δω̃′| + |Ω̃′|.
pub fn lambda_consistency(series: &[SnapshotSeries]) -> Check {
    let worst = series
        .iter()
        .flat_map(|s| &s.snapshots)
        .map(|s| {
            let scale = s.delta_tilde.norm() + s.omega_tilde.norm();
            [
                s.lambda1 + s.lambda2 - s.delta_tilde,
                s.lambda1 - s.lambda2 - s.omega_tilde,
                s.lambda_t1 - s.lambda_t2 - s.omega_tilde,
            ]
            .iter()
            .map(|d| d.norm() / scale)
            .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    Check::below("lambda_consistency", worst, 1e-12)
}

/// Ten static, undamped, unchirped draws with Δω ≠ 0.
pub fn static_draws() -> Vec<(SystemParams, FieldModel)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..10)
        .map(|_| {
            let magnitude: f64 = rng.random_range(0.05..5.0);
            let delta = if rng.random_bool(0.5) { magnitude } else { -magnitude };
            let omega0 = rng.random_range(0.05..5.0);
            let phi0 = rng.random_range(-PI..PI);
            let params = SystemParams::new(0.0, 10.0 + delta);
            let field = FieldModel::new(10.0, Envelope::Constant { omega0 }).with_phase(Chirp::new(phi0, 0.0));
            (params, field)
        })
        .collect()
}

fn static_series() -> Result<Vec<SnapshotSeries>> {
    let grid = UniformGrid::new(0.0, 20.0, 401)?;
    static_draws()
        .iter()
        .map(|(p, f)| snapshot_series(p, f, &grid))
        .collect()
}

pub fn adiabatic_static(series: &[SnapshotSeries]) -> Check {
    let worst = series
        .iter()
        .flat_map(|s| &s.snapshots)
        .map(transition_probability)
        .fold(0.0, f64::max);
    Check::below("adiabatic_static", worst, 1e-12)
}

fn fuzzed_pairs() -> Vec<(Complex64, Complex64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    (0..10_000)
        .map(|i| {
            // mix of O(1) pairs and pairs spanning many decades
            let scale = if i % 2 == 0 {
                1.0
            } else {
                10f64.powf(rng.random_range(-150.0..150.0))
            };
            let mut z = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale;
            (z(), z())
        })
        .collect()
}

pub fn probability_bound() -> Check {
    let worst = fuzzed_pairs()
        .iter()
        .map(|&(s, c)| {
            let p = transition_probability_from(s, c);
            if p.is_nan() {
                f64::INFINITY
            } else {
                (-p).max(p - 1.0).max(0.0)
            }
        })
        .fold(0.0, f64::max);
    Check::below("probability_bound", worst, 0.0)
}

pub fn microreversibility() -> Check {
    let worst = fuzzed_pairs()
        .iter()
        .map(|&(s, c)| (transition_probability_from(s, c) - reverse_transition_probability_from(s, c)).abs())
        .fold(0.0, f64::max);
    Check::below("microreversibility", worst, f64::EPSILON)
}

fn over_points(series: &[SnapshotSeries], mut f: impl FnMut(&NadsOverlaps, usize) -> Result<f64>) -> Result<f64> {
    let mut worst = 0.0f64;
    for s in series {
        let o = NadsOverlaps::new(s);
        for k in 0..s.len() {
            worst = worst.max(f(&o, k)?);
        }
    }
    Ok(worst)
}

/// P from the mixing functions vs P from the full overlaps.
pub fn cancellation(series: &[SnapshotSeries]) -> Result<Check> {
    let worst = over_points(series, |o, k| {
        Ok((o.transition_probability_via_overlaps(k)? - transition_probability(&o.series().snapshots[k])).abs())
    })?;
    Ok(Check::below("cancellation", worst, 1e-9))
}

pub fn concise_vs_expanded(series: &[SnapshotSeries]) -> Result<Check> {
    let worst = over_points(series, |o, k| {
        let gg = (o.gg_expanded(k)? - o.gg(k)?).abs() / o.gg(k)?;
        let ee = (o.ee_expanded(k)? - o.ee(k)?).abs() / o.ee(k)?;
        let eg = (o.eg_expanded(k)? - o.eg(k)?).norm() / (o.gg(k)? * o.ee(k)?).sqrt();
        Ok(gg.max(ee).max(eg))
    })?;
    Ok(Check::below("concise_vs_expanded", worst, 1e-9))
}

/// ⟨G̃|Ẽ⟩ = conj(⟨Ẽ|G̃⟩), relative to √(gg·ee).
pub fn hermiticity(series: &[SnapshotSeries]) -> Result<Check> {
    let worst = over_points(series, |o, k| {
        let (gg, ee) = o.norms_inner(k)?;
        Ok((o.ge_inner(k)? - o.eg_inner(k)?.conj()).norm() / (gg * ee).sqrt())
    })?;
    Ok(Check::below("hermiticity", worst, 1e-12))
}

/// Smallest diagonal overlap over both routes; must be positive.
pub fn positivity(series: &[SnapshotSeries]) -> Result<Check> {
    let mut least = f64::INFINITY;
    over_points(series, |o, k| {
        let (gg, ee) = o.norms_inner(k)?;
        least = least.min(gg).min(ee).min(o.gg(k)?).min(o.ee(k)?);
        Ok(0.0)
    })?;
    Ok(Check::above("positivity", least, 0.0))
}

pub fn orthogonality_off(series: &[SnapshotSeries]) -> Result<Check> {
    let worst = over_points(series, |o, k| Ok(o.eg(k)?.norm().max(o.eg_inner(k)?.norm())))?;
    Ok(Check::below("orthogonality_off", worst, 1e-12))
}

/// |⟨Ẽ|G̃⟩| at the pulse center of a chirped, damped pulse.
pub fn orthogonality_on(series: &SnapshotSeries) -> Result<Check> {
    let center = series.field.envelope.center().unwrap_or(0.0);
    let k = ((center - series.grid.t_start()) / series.grid.step()).round() as usize;
    let o = NadsOverlaps::new(series);
    Ok(Check::above("orthogonality_on", o.eg(k)?.norm(), 1e-6))
}

pub fn rabi(s: &Scenario) -> Result<Check> {
    let grid = s.time_grid();
    let tr = evolve(
        &s.system,
        &s.field,
        &grid,
        InitialState::Ground,
        Frame::Rotating,
        s.tolerance(),
    )?;
    let omega0 = s.field.envelope.peak() * s.system.mu;
    let worst = (0..grid.len())
        .map(|k| (tr.population_e(k) - rabi_oracle(omega0, grid.t(k) - grid.t_start()).1).abs())
        .fold(0.0, f64::max);
    Ok(Check::below("rabi_oracle", worst, 1e-8))
}

pub fn decay(s: &Scenario) -> Result<Check> {
    let grid = s.time_grid();
    let tr = evolve(
        &s.system,
        &s.field,
        &grid,
        InitialState::Excited,
        Frame::Rotating,
        s.tolerance(),
    )?;
    let worst = (0..grid.len())
        .map(|k| (tr.population_e(k) - (-s.system.gamma_e * (grid.t(k) - grid.t_start())).exp()).abs())
        .fold(0.0, f64::max);
    Ok(Check::below("decay_oracle", worst, 1e-8))
}

pub fn landau_zener() -> Result<Check> {
    let mut worst = 0.0f64;
    for v in [0.1, 0.25, 0.5] {
        let survival = landau_zener_survival(v, 1.0, 40.0, 0.1, Tolerance::default())?;
        worst = worst.max((survival - lz_oracle(v, 1.0)).abs());
    }
    Ok(Check::below("landau_zener", worst, 1e-3))
}

/// |c_e/c_g| from the reconstruction vs the rotating-frame integrator at the
/// pulse center, relative.
pub fn slow_ratio(s: &Scenario) -> Result<Check> {
    let grid = s.time_grid();
    let series = snapshot_series(&s.system, &s.field, &grid)?;
    let center = s.field.envelope.center().unwrap_or(0.0);
    let k = ((center - grid.t_start()) / grid.step()).round() as usize;
    let nads = NadsOverlaps::new(&series)
        .reconstruct(k, InitialState::Ground)?
        .ratio
        .norm();
    let tr = evolve(
        &s.system,
        &s.field,
        &grid,
        InitialState::Ground,
        Frame::Rotating,
        s.tolerance(),
    )?;
    let tdse = (tr.c_e[k] / tr.c_g[k]).norm();
    Ok(Check::below("slow_ratio", (nads - tdse).abs() / tdse, 0.05))
}

/// Closed-form envelope and phase derivatives vs central differences at
/// 10³ random points, h = 10⁻⁵τ.
pub fn derivative_hygiene() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let params = SystemParams::new(0.0, 1.0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (omega0_peak, t_center, tau) = (
            rng.random_range(0.1..5.0),
            rng.random_range(-50.0..50.0),
            rng.random_range(1.0..200.0),
        );
        let env = if rng.random_bool(0.5) {
            Envelope::Gaussian {
                omega0_peak,
                t_center,
                tau,
            }
        } else {
            Envelope::Sech {
                omega0_peak,
                t_center,
                tau,
            }
        };
        let chirp = Chirp::new(rng.random_range(-3.0..3.0), rng.random_range(-0.1..0.1));
        let field = FieldModel::new(1.0, env).with_phase(chirp);
        let t = t_center + tau * rng.random_range(-3.0..3.0);
        let h = 1e-5 * tau;
        let central = |f: &dyn Fn(f64) -> f64| (f(t + h) - f(t - h)) / (2.0 * h);
        let s = rabi_at(&params, &field, t)?;
        let p = phase_at(&field, t);
        let fd_log = central(&|x| rabi_envelope(&params, &field, x).ln());
        let fd_dlog = central(&|x| rabi_at(&params, &field, x).map_or(f64::NAN, |e| e.log_deriv));
        let fd_dphi = central(&|x| phase_at(&field, x).phi);
        let fd_d2phi = central(&|x| phase_at(&field, x).dphi);
        // relative to the natural scale where the analytic value passes through zero
        let rel = |a: f64, n: f64, scale: f64| (a - n).abs() / a.abs().max(scale);
        worst = worst
            .max(rel(s.log_deriv, fd_log, 1.0 / tau))
            .max(rel(s.dlog_deriv, fd_dlog, 1.0 / (tau * tau)))
            .max(rel(p.dphi, fd_dphi, (chirp.beta.abs() * tau).max(1.0 / tau)))
            .max(rel(p.d2phi, fd_d2phi, chirp.beta.abs().max(1.0 / (tau * tau))));
    }
    Ok(Check::below("derivative_hygiene", worst, 1e-6))
}

/// Error ratio on substep halving for the π pulse; about 16 for RK4.
pub fn rk4_order(s: &Scenario) -> Result<Check> {
    let grid = UniformGrid::new(s.grid.t_start, s.grid.t_end, 11)?;
    let omega0 = s.field.envelope.peak() * s.system.mu;
    let start = InitialState::Ground.amplitudes();
    // the exact π-pulse leaves c_g = cos(Ω₀T/2)
    let exact = (0.5 * omega0 * (grid.t_end() - grid.t_start())).cos();
    let err = |n| {
        let tr = evolve_fixed(&s.system, &s.field, &grid, start, Frame::Rotating, n);
        (tr.c_g[grid.len() - 1].norm() - exact.abs()).abs()
    };
    let (e1, e2, e3) = (err(4), err(8), err(16));
    // distance of the log₂ ratios from 4
    let worst = [e1 / e2, e2 / e3]
        .iter()
        .map(|r| (r.log2() - 4.0).abs())
        .fold(0.0, f64::max);
    Ok(Check::below("rk4_order", worst, 0.25))
}

/// The full suite. `tamper` is applied to every dressed-state series before
/// the series-based checks run; use `|_| {}` for a normal run.
pub fn run_with(tamper: impl Fn(&mut SnapshotSeries)) -> Report {
    let mut checks = Vec::new();
    let load = |names: &[&str]| -> Result<Vec<SnapshotSeries>> {
        names
            .iter()
            .map(|n| {
                let mut s = series_of(&shipped::shipped(n).expect("shipped"))?;
                tamper(&mut s);
                Ok(s)
            })
            .collect()
    };
    let dressed_names: Vec<&str> = shipped::SHIPPED
        .iter()
        .map(|(n, _)| *n)
        .filter(|n| !shipped::FIELD_FREE.contains(n))
        .collect();

    match load(&dressed_names) {
        Ok(series) => {
            checks.push(trig_identity(&series));
            checks.push(lambda_consistency(&series));
            checks.push(Check::from_result("cancellation", cancellation(&series)));
            checks.push(Check::from_result("concise_vs_expanded", concise_vs_expanded(&series)));
            checks.push(Check::from_result("hermiticity", hermiticity(&series)));
            checks.push(Check::from_result("positivity", positivity(&series)));
            let gaussian = dressed_names.iter().position(|n| *n == "gaussian_chirped_damped");
            checks.push(Check::from_result(
                "orthogonality_on",
                orthogonality_on(&series[gaussian.expect("shipped")]),
            ));
        }
        Err(e) => {
            for name in [
                "trig_identity",
                "lambda_consistency",
                "cancellation",
                "concise_vs_expanded",
                "hermiticity",
                "positivity",
                "orthogonality_on",
            ] {
                checks.push(Check::from_result(name, Err(e.clone())));
            }
        }
    }

    let statics = static_series().map(|mut v| {
        v.iter_mut().for_each(&tamper);
        v
    });
    match statics.and_then(|mut v| {
        v.extend(load(&["static_adiabatic"])?);
        Ok(v)
    }) {
        Ok(v) => {
            checks.push(adiabatic_static(&v));
            checks.push(Check::from_result("orthogonality_off", orthogonality_off(&v)));
        }
        Err(e) => {
            checks.push(Check::from_result("adiabatic_static", Err(e.clone())));
            checks.push(Check::from_result("orthogonality_off", Err(e)));
        }
    }

    checks.push(probability_bound());
    checks.push(microreversibility());
    let pi = shipped::shipped("pi_pulse").expect("shipped");
    checks.push(Check::from_result("rabi_oracle", rabi(&pi)));
    checks.push(Check::from_result(
        "decay_oracle",
        decay(&shipped::shipped("decay").expect("shipped")),
    ));
    checks.push(Check::from_result("landau_zener", landau_zener()));
    checks.push(Check::from_result(
        "slow_ratio",
        slow_ratio(&shipped::shipped("slow_gaussian").expect("shipped")),
    ));
    checks.push(Check::from_result("derivative_hygiene", derivative_hygiene()));
    checks.push(Check::from_result("rk4_order", rk4_order(&pi)));

    Report {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}

pub fn run() -> Report {
    run_with(|_| {})
}

//! Reference integrator for the non-Hermitian two-level Schrödinger equation
//! in the bare basis, plus closed-form oracles used to validate it.
//!
//! The lab frame keeps the full real field −Ω(t)cos(ωt + φ(t)). The rotating
//! frame moves to the carrier, drops the counter-rotating terms and keeps
//! the chirp as a time-dependent detuning:
//!
//! ```text
//! i d/dt [c_g]   [ −iγ_g/2        −Ω/2              ] [c_g]
//!        [c_e] = [ −Ω/2     Δω − ∂ₜφ − iγ_e/2       ] [c_e]
//! ```
//!
//! The ground energy ω_g is removed in the rotating frame; populations and
//! amplitude moduli are unaffected.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dressed::detuning;
use crate::error::{NadsError, Result};
use crate::field::{phase_at, rabi_envelope, FieldModel, SystemParams};
use crate::grid::UniformGrid;
use crate::overlap::InitialState;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Substeps below this fraction of the integration window are refused.
pub const STEP_UNDERFLOW: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    Lab,
    #[default]
    Rotating,
}

pub type Amplitudes = [Complex64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerance {
    #[serde(default = "Tolerance::default_rtol")]
    pub rtol: f64,
    #[serde(default = "Tolerance::default_atol")]
    pub atol: f64,
}

impl Tolerance {
    fn default_rtol() -> f64 {
        1e-10
    }

    fn default_atol() -> f64 {
        1e-12
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rtol: Self::default_rtol(),
            atol: Self::default_atol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: UniformGrid,
    pub c_g: Vec<Complex64>,
    pub c_e: Vec<Complex64>,
    pub norm: Vec<f64>,
    pub frame: Frame,
    /// RK4 substeps per grid interval.
    pub substeps: usize,
}

impl Trajectory {
    pub fn population_g(&self, k: usize) -> f64 {
        self.c_g[k].norm_sqr()
    }

    pub fn population_e(&self, k: usize) -> f64 {
        self.c_e[k].norm_sqr()
    }

    pub fn last(&self) -> Amplitudes {
        let n = self.c_g.len() - 1;
        [self.c_g[n], self.c_e[n]]
    }
}

impl InitialState {
    pub fn amplitudes(self) -> Amplitudes {
        let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        match self {
            InitialState::Ground => [one, zero],
            InitialState::Excited => [zero, one],
        }
    }
}

/// Rotating-frame Hamiltonian (RWA) at time `t`, rows/columns ordered g, e.
pub fn rotating_hamiltonian(params: &SystemParams, field: &FieldModel, t: f64) -> [[Complex64; 2]; 2] {
    let half_rabi = Complex64::new(-0.5 * rabi_envelope(params, field, t), 0.0);
    let detuned = detuning(params, field) - phase_at(field, t).dphi;
    [
        [Complex64::new(0.0, -0.5 * params.gamma_g), half_rabi],
        [half_rabi, Complex64::new(detuned, -0.5 * params.gamma_e)],
    ]
}

/// dc/dt for the bare amplitudes.
pub fn rhs(t: f64, c: &Amplitudes, params: &SystemParams, field: &FieldModel, frame: Frame) -> Amplitudes {
    match frame {
        Frame::Lab => {
            let coupling = rabi_envelope(params, field, t) * (field.carrier_omega * t + phase_at(field, t).phi).cos();
            let eg = Complex64::new(params.omega_g, -0.5 * params.gamma_g);
            let ee = Complex64::new(params.omega_e, -0.5 * params.gamma_e);
            [
                -I * eg * c[0] + I * coupling * c[1],
                -I * ee * c[1] + I * coupling * c[0],
            ]
        }
        Frame::Rotating => {
            let h = rotating_hamiltonian(params, field, t);
            [
                -I * (h[0][0] * c[0] + h[0][1] * c[1]),
                -I * (h[1][0] * c[0] + h[1][1] * c[1]),
            ]
        }
    }
}

fn axpy(a: &Amplitudes, scale: f64, b: &Amplitudes) -> Amplitudes {
    [a[0] + b[0] * scale, a[1] + b[1] * scale]
}

fn rk4_step(t: f64, h: f64, c: &Amplitudes, params: &SystemParams, field: &FieldModel, frame: Frame) -> Amplitudes {
    let k1 = rhs(t, c, params, field, frame);
    let k2 = rhs(t + 0.5 * h, &axpy(c, 0.5 * h, &k1), params, field, frame);
    let k3 = rhs(t + 0.5 * h, &axpy(c, 0.5 * h, &k2), params, field, frame);
    let k4 = rhs(t + h, &axpy(c, h, &k3), params, field, frame);
    let sixth = h / 6.0;
    [
        c[0] + (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) * sixth,
        c[1] + (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) * sixth,
    ]
}

/// Classic RK4 with a fixed number of substeps per grid interval.
pub fn evolve_fixed(
    params: &SystemParams,
    field: &FieldModel,
    grid: &UniformGrid,
    initial: Amplitudes,
    frame: Frame,
    substeps: usize,
) -> Trajectory {
    let substeps = substeps.max(1);
    let h = grid.step() / substeps as f64;
    let n = grid.len();
    let mut c_g = Vec::with_capacity(n);
    let mut c_e = Vec::with_capacity(n);
    let mut c = initial;
    c_g.push(c[0]);
    c_e.push(c[1]);
    for k in 1..n {
        let t0 = grid.t(k - 1);
        for j in 0..substeps {
            c = rk4_step(t0 + j as f64 * h, h, &c, params, field, frame);
        }
        c_g.push(c[0]);
        c_e.push(c[1]);
    }
    let norm = c_g.iter().zip(&c_e).map(|(g, e)| g.norm_sqr() + e.norm_sqr()).collect();
    Trajectory {
        grid: *grid,
        c_g,
        c_e,
        norm,
        frame,
        substeps,
    }
}

/// Largest amplitude change between two trajectories on the same grid, and
/// the largest amplitude modulus of the finer one.
fn discrepancy(coarse: &Trajectory, fine: &Trajectory) -> (f64, f64) {
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for k in 0..fine.c_g.len() {
        let d = (fine.c_g[k] - coarse.c_g[k])
            .norm()
            .max((fine.c_e[k] - coarse.c_e[k]).norm());
        // NaN from a blown-up coarse level must not look converged
        diff = if d.is_nan() { f64::INFINITY } else { diff.max(d) };
        scale = scale.max(fine.c_g[k].norm()).max(fine.c_e[k].norm());
    }
    (diff, scale)
}

/// RK4 from an arbitrary initial vector. The substep is halved until a
/// further halving moves no reported amplitude by more than
/// `atol + rtol·max|c|`.
pub fn evolve_from(
    params: &SystemParams,
    field: &FieldModel,
    grid: &UniformGrid,
    initial: Amplitudes,
    frame: Frame,
    tol: Tolerance,
) -> Result<Trajectory> {
    refine(params, field, grid, initial, frame, tol, STEP_UNDERFLOW)
}

/// Levels in a row without a twofold improvement before roundoff is blamed.
const STALL_LEVELS: usize = 3;

fn refine(
    params: &SystemParams,
    field: &FieldModel,
    grid: &UniformGrid,
    initial: Amplitudes,
    frame: Frame,
    tol: Tolerance,
    underflow: f64,
) -> Result<Trajectory> {
    let limit = underflow * (grid.t_end() - grid.t_start());
    let mut substeps = 1usize;
    let mut current = evolve_fixed(params, field, grid, initial, frame, substeps);
    let mut last_diff = f64::INFINITY;
    let mut stalled = 0;
    loop {
        substeps *= 2;
        let step = grid.step() / substeps as f64;
        if step < limit {
            return Err(NadsError::StepUnderflow { step, limit });
        }
        let finer = evolve_fixed(params, field, grid, initial, frame, substeps);
        let (diff, scale) = discrepancy(&current, &finer);
        current = finer;
        let bound = tol.atol + tol.rtol * scale;
        if diff <= bound {
            return Ok(current);
        }
        stalled = if diff.is_finite() && diff > 0.5 * last_diff {
            stalled + 1
        } else {
            0
        };
        if stalled >= STALL_LEVELS {
            return Err(NadsError::ToleranceUnreachable {
                achieved: diff,
                requested: bound,
            });
        }
        last_diff = diff;
    }
}

/// RK4 from a bare eigenstate.
pub fn evolve(
    params: &SystemParams,
    field: &FieldModel,
    grid: &UniformGrid,
    init: InitialState,
    frame: Frame,
    tol: Tolerance,
) -> Result<Trajectory> {
    evolve_from(params, field, grid, init.amplitudes(), frame, tol)
}

/// Resonant Rabi populations (p_g, p_e) = (cos²(Ω₀t/2), sin²(Ω₀t/2)).
pub fn rabi_oracle(omega0: f64, t: f64) -> (f64, f64) {
    let p_e = (0.5 * omega0 * t).sin().powi(2);
    (1.0 - p_e, p_e)
}

/// Landau–Zener diabatic survival exp(−2πV²/|α|) for coupling V and gap
/// sweep rate α.
pub fn lz_oracle(coupling: f64, sweep_rate: f64) -> f64 {
    (-2.0 * PI * coupling * coupling / sweep_rate.abs()).exp()
}

/// Eigenvector of the real symmetric part of `h` for its lower or upper
/// eigenvalue. Only meaningful for an undamped Hamiltonian.
fn real_eigenvector(h: [[Complex64; 2]; 2], upper: bool) -> Amplitudes {
    let (a, b, d) = (h[0][0].re, h[0][1].re, h[1][1].re);
    let half_gap = (0.25 * (a - d).powi(2) + b * b).sqrt();
    let lambda = 0.5 * (a + d) + if upper { half_gap } else { -half_gap };
    // two equivalent rows of (H − λ)v = 0; take the larger one
    let (x, y) = if (a - lambda).abs() > (d - lambda).abs() {
        (b, lambda - a)
    } else {
        (lambda - d, b)
    };
    let n = x.hypot(y);
    [Complex64::new(x / n, 0.0), Complex64::new(y / n, 0.0)]
}

/// Diabatic survival through a linear-chirp crossing, integrated in the
/// rotating frame over `[−half_window, half_window]`.
///
/// Coupling V = Ω₀/2 with a constant envelope, and the gap is swept by a
/// chirp of rate `sweep_rate` centred on zero. The state is prepared in, and
/// projected onto, the instantaneous eigenvectors at the window ends, which
/// removes the slowly decaying oscillations a bare-state start produces over
/// a finite window.
pub fn landau_zener_survival(
    coupling: f64,
    sweep_rate: f64,
    half_window: f64,
    max_step: f64,
    tol: Tolerance,
) -> Result<f64> {
    use crate::field::{Chirp, Envelope};
    let params = SystemParams::new(0.0, 1.0);
    let field = FieldModel::new(1.0, Envelope::Constant { omega0: 2.0 * coupling })
        .with_phase(Chirp::new(0.0, sweep_rate).centered_at(0.0));
    let grid = UniformGrid::with_max_step(-half_window, half_window, max_step)?;
    let h0 = rotating_hamiltonian(&params, &field, -half_window);
    // the branch that coincides with |g⟩ far before the crossing
    let upper = h0[0][0].re > h0[1][1].re;
    let start = real_eigenvector(h0, upper);
    let tr = evolve_from(&params, &field, &grid, start, Frame::Rotating, tol)?;
    let other = real_eigenvector(rotating_hamiltonian(&params, &field, half_window), !upper);
    let end = tr.last();
    Ok((other[0].conj() * end[0] + other[1].conj() * end[1]).norm_sqr())
}

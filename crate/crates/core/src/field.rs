//! Two-level system parameters and the carrier-envelope driving field.
//!
//! Natural units throughout (ħ = 1): frequencies and rates are in radians per
//! user-chosen time unit and the envelope is parameterized directly by its
//! peak Rabi frequency. Every derivative is closed form.

use serde::{Deserialize, Serialize};

use crate::error::{NadsError, Result};

/// Default lower bound on Ω(t) below which Ω⁻¹∂ₜΩ is not trusted.
pub const DEFAULT_OMEGA_FLOOR: f64 = 1e-30;

fn default_mu() -> f64 {
    1.0
}

fn default_floor() -> f64 {
    DEFAULT_OMEGA_FLOOR
}

/// A parameter that failed validation, named relative to its owning struct.
#[derive(Debug, Clone, PartialEq)]
pub struct InvalidParam {
    pub field: String,
    pub reason: String,
}

impl InvalidParam {
    fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        InvalidParam {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

fn finite(field: &str, value: f64) -> std::result::Result<(), InvalidParam> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(InvalidParam::new(field, format!("must be finite, got {value}")))
    }
}

/// Bare frequencies, dipole scale and damping rates of the two-level system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub omega_g: f64,
    pub omega_e: f64,
    /// Multiplies the envelope; 1 means the envelope amplitude is already
    /// the Rabi frequency.
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default)]
    pub gamma_g: f64,
    #[serde(default)]
    pub gamma_e: f64,
}

impl SystemParams {
    pub fn new(omega_g: f64, omega_e: f64) -> Self {
        SystemParams {
            omega_g,
            omega_e,
            mu: 1.0,
            gamma_g: 0.0,
            gamma_e: 0.0,
        }
    }

    pub fn with_damping(mut self, gamma_g: f64, gamma_e: f64) -> Self {
        self.gamma_g = gamma_g;
        self.gamma_e = gamma_e;
        self
    }

    pub fn gamma_sum(&self) -> f64 {
        self.gamma_g + self.gamma_e
    }

    pub fn validate(&self) -> std::result::Result<(), InvalidParam> {
        finite("omega_g", self.omega_g)?;
        finite("omega_e", self.omega_e)?;
        finite("mu", self.mu)?;
        finite("gamma_g", self.gamma_g)?;
        finite("gamma_e", self.gamma_e)?;
        if self.omega_e <= self.omega_g {
            return Err(InvalidParam::new(
                "omega_e",
                format!("must exceed omega_g = {}", self.omega_g),
            ));
        }
        if self.mu <= 0.0 {
            return Err(InvalidParam::new("mu", "must be > 0"));
        }
        if self.gamma_g < 0.0 {
            return Err(InvalidParam::new("gamma_g", "must be >= 0"));
        }
        if self.gamma_e < 0.0 {
            return Err(InvalidParam::new("gamma_e", "must be >= 0"));
        }
        Ok(())
    }
}

/// Slowly varying field envelope, expressed as a Rabi frequency profile.
///
/// Only envelopes that are strictly positive for every finite `t` are
/// offered, since Ω⁻¹∂ₜΩ must exist everywhere on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Envelope {
    Constant {
        omega0: f64,
    },
    /// Ω₀ exp(−((t − t_center)/τ)²)
    Gaussian {
        omega0_peak: f64,
        t_center: f64,
        tau: f64,
    },
    /// Ω₀ sech((t − t_center)/τ)
    Sech {
        omega0_peak: f64,
        t_center: f64,
        tau: f64,
    },
}

impl Envelope {
    pub fn peak(&self) -> f64 {
        match *self {
            Envelope::Constant { omega0 } => omega0,
            Envelope::Gaussian { omega0_peak, .. } | Envelope::Sech { omega0_peak, .. } => omega0_peak,
        }
    }

    pub fn center(&self) -> Option<f64> {
        match *self {
            Envelope::Constant { .. } => None,
            Envelope::Gaussian { t_center, .. } | Envelope::Sech { t_center, .. } => Some(t_center),
        }
    }

    /// Pulse duration parameter, `None` for a constant envelope.
    pub fn tau(&self) -> Option<f64> {
        match *self {
            Envelope::Constant { .. } => None,
            Envelope::Gaussian { tau, .. } | Envelope::Sech { tau, .. } => Some(tau),
        }
    }

    /// Envelope value together with its logarithmic derivative and the
    /// derivative of that.
    fn eval(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            Envelope::Constant { omega0 } => (omega0, 0.0, 0.0),
            Envelope::Gaussian {
                omega0_peak,
                t_center,
                tau,
            } => {
                let x = (t - t_center) / tau;
                (
                    omega0_peak * (-x * x).exp(),
                    -2.0 * (t - t_center) / (tau * tau),
                    -2.0 / (tau * tau),
                )
            }
            Envelope::Sech {
                omega0_peak,
                t_center,
                tau,
            } => {
                let x = (t - t_center) / tau;
                let s = sech(x);
                (omega0_peak * s, -x.tanh() / tau, -(s * s) / (tau * tau))
            }
        }
    }

    pub fn validate(&self) -> std::result::Result<(), InvalidParam> {
        match *self {
            Envelope::Constant { omega0 } => {
                finite("omega0", omega0)?;
                // Zero is allowed so field-free integrator runs are expressible;
                // dressed-state evaluation rejects it through the floor.
                if omega0 < 0.0 {
                    return Err(InvalidParam::new("omega0", "must be >= 0"));
                }
            }
            Envelope::Gaussian {
                omega0_peak,
                t_center,
                tau,
            }
            | Envelope::Sech {
                omega0_peak,
                t_center,
                tau,
            } => {
                finite("omega0_peak", omega0_peak)?;
                finite("t_center", t_center)?;
                finite("tau", tau)?;
                if omega0_peak <= 0.0 {
                    return Err(InvalidParam::new("omega0_peak", "must be > 0"));
                }
                if tau <= 0.0 {
                    return Err(InvalidParam::new("tau", format!("must be > 0, got {tau}")));
                }
            }
        }
        Ok(())
    }
}

/// sech without overflow in the far wings.
fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Quadratic (linearly chirped) phase φ(t) = φ₀ + (β/2)(t − t_c)².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chirp {
    #[serde(default)]
    pub phi0: f64,
    #[serde(default)]
    pub beta: f64,
    /// Reference time of the chirp. When absent the envelope center is
    /// used, or zero for a constant envelope.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_center: Option<f64>,
}

impl Chirp {
    pub const NONE: Chirp = Chirp {
        phi0: 0.0,
        beta: 0.0,
        t_center: None,
    };

    pub fn new(phi0: f64, beta: f64) -> Self {
        Chirp {
            phi0,
            beta,
            t_center: None,
        }
    }

    pub fn centered_at(mut self, t_center: f64) -> Self {
        self.t_center = Some(t_center);
        self
    }
}

impl Default for Chirp {
    fn default() -> Self {
        Chirp::NONE
    }
}

/// Driving field E(t) = ½E₀(t)[e^{i(ωt+φ(t))} + c.c.] in Rabi-frequency units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldModel {
    pub carrier_omega: f64,
    pub envelope: Envelope,
    #[serde(default)]
    pub phase: Chirp,
    #[serde(default = "default_floor")]
    pub omega_floor: f64,
}

impl FieldModel {
    pub fn new(carrier_omega: f64, envelope: Envelope) -> Self {
        FieldModel {
            carrier_omega,
            envelope,
            phase: Chirp::NONE,
            omega_floor: DEFAULT_OMEGA_FLOOR,
        }
    }

    pub fn with_phase(mut self, phase: Chirp) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_floor(mut self, omega_floor: f64) -> Self {
        self.omega_floor = omega_floor;
        self
    }

    /// Reference time of the quadratic phase.
    pub fn phase_center(&self) -> f64 {
        self.phase.t_center.or_else(|| self.envelope.center()).unwrap_or(0.0)
    }

    /// Copy with the chirp reference time written out explicitly.
    pub fn resolved(mut self) -> Self {
        self.phase.t_center = Some(self.phase_center());
        self
    }

    pub fn validate(&self) -> std::result::Result<(), InvalidParam> {
        finite("carrier_omega", self.carrier_omega)?;
        self.envelope.validate().map_err(|e| InvalidParam {
            field: format!("envelope.{}", e.field),
            ..e
        })?;
        finite("phase.phi0", self.phase.phi0)?;
        finite("phase.beta", self.phase.beta)?;
        if let Some(tc) = self.phase.t_center {
            finite("phase.t_center", tc)?;
        }
        if !(self.omega_floor > 0.0 && self.omega_floor.is_finite()) {
            return Err(InvalidParam::new("omega_floor", "must be finite and > 0"));
        }
        Ok(())
    }
}

/// Rabi frequency and its logarithmic derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeSample {
    pub t: f64,
    pub omega: f64,
    /// Ω⁻¹∂ₜΩ
    pub log_deriv: f64,
    /// ∂ₜ(Ω⁻¹∂ₜΩ)
    pub dlog_deriv: f64,
}

/// Carrier phase φ(t) and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub phi: f64,
    pub dphi: f64,
    pub d2phi: f64,
}

/// Ω(t) without the floor check. The integrator uses this, including for
/// field-free runs.
pub fn rabi_envelope(params: &SystemParams, field: &FieldModel, t: f64) -> f64 {
    params.mu * field.envelope.eval(t).0
}

/// Ω(t), Ω⁻¹∂ₜΩ and ∂ₜ(Ω⁻¹∂ₜΩ) from the closed-form envelope.
pub fn rabi_at(params: &SystemParams, field: &FieldModel, t: f64) -> Result<EnvelopeSample> {
    let (value, log_deriv, dlog_deriv) = field.envelope.eval(t);
    let omega = params.mu * value;
    // negated comparison so that NaN also trips the guard
    if !(omega >= field.omega_floor) {
        return Err(NadsError::EnvelopeUnderflow {
            t,
            omega,
            floor: field.omega_floor,
        });
    }
    Ok(EnvelopeSample {
        t,
        omega,
        log_deriv,
        dlog_deriv,
    })
}

pub fn phase_at(field: &FieldModel, t: f64) -> PhaseSample {
    let Chirp { phi0, beta, .. } = field.phase;
    let s = t - field.phase_center();
    PhaseSample {
        phi: phi0 + 0.5 * beta * s * s,
        dphi: beta * s,
        d2phi: beta,
    }
}

/// Off-diagonal lab-frame Hamiltonian element −μE(t) = −Ω(t)cos(ωt + φ(t)).
pub fn field_value(field: &FieldModel, params: &SystemParams, t: f64) -> f64 {
    let phase = phase_at(field, t);
    -rabi_envelope(params, field, t) * (field.carrier_omega * t + phase.phi).cos()
}

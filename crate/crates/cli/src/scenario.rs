use std::fmt;
use std::path::Path;

use nads_core::field::InvalidParam;
use nads_core::{FieldModel, Frame, InitialState, SystemParams, Tolerance, UniformGrid};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest grid step allowed for a pulsed envelope, as a fraction of τ.
pub const STEP_PER_TAU: f64 = 1.0 / 400.0;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Parse(ParseError),

    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },
}

impl ScenarioError {
    fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ScenarioError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    fn prefixed(prefix: &str, e: InvalidParam) -> Self {
        ScenarioError::invalid(format!("{prefix}.{}", e.field), e.reason)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    /// Dotted location of the offending value, `.` for the document root.
    pub path: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub suggestion: Option<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at line {}, column {} ({}): {}",
            self.line, self.column, self.path, self.message
        )?;
        if let Some(s) = &self.suggestion {
            write!(f, "; did you mean `{s}`?")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_start: f64,
    pub t_end: f64,
    /// Upper bound on the step; the grid uses span/⌈span/step⌉.
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default)]
    pub frame: Frame,
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default = "default_init")]
    pub init: InitialState,
}

fn default_rtol() -> f64 {
    Tolerance::default().rtol
}

fn default_atol() -> f64 {
    Tolerance::default().atol
}

fn default_init() -> InitialState {
    InitialState::Ground
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec {
            frame: Frame::default(),
            rtol: default_rtol(),
            atol: default_atol(),
            init: default_init(),
        }
    }
}

/// Table formats written alongside a command's output file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Output {
    Csv,
    Json,
}

fn default_outputs() -> Vec<Output> {
    vec![Output::Csv]
}

/// What to do when a pulsed scenario's step exceeds τ/400.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepPolicy {
    #[default]
    Error,
    Warn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub system: SystemParams,
    pub field: FieldModel,
    pub grid: GridSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Output>,
    #[serde(default)]
    pub step_policy: StepPolicy,
}

impl Scenario {
    /// Parses and validates; step-policy warnings are logged.
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let scenario = parse(text)?;
        for w in scenario.check()? {
            log::warn!("{}: {w}", scenario.name);
        }
        Ok(scenario)
    }

    /// Checks every invariant. Returns the warnings that the step policy
    /// downgraded from errors.
    pub fn check(&self) -> Result<Vec<String>, ScenarioError> {
        if self.name.trim().is_empty() {
            return Err(ScenarioError::invalid("name", "must not be empty"));
        }
        self.system
            .validate()
            .map_err(|e| ScenarioError::prefixed("system", e))?;
        self.field.validate().map_err(|e| ScenarioError::prefixed("field", e))?;

        let g = &self.grid;
        for (name, v) in [("t_start", g.t_start), ("t_end", g.t_end), ("step", g.step)] {
            if !v.is_finite() {
                return Err(ScenarioError::invalid(
                    format!("grid.{name}"),
                    format!("must be finite, got {v}"),
                ));
            }
        }
        if g.step <= 0.0 {
            return Err(ScenarioError::invalid(
                "grid.step",
                format!("must be > 0, got {}", g.step),
            ));
        }
        if g.t_end <= g.t_start {
            return Err(ScenarioError::invalid(
                "grid.t_end",
                format!("must exceed t_start = {}, got {}", g.t_start, g.t_end),
            ));
        }

        let i = &self.integrator;
        if !(i.rtol > 0.0 && i.rtol.is_finite()) {
            return Err(ScenarioError::invalid(
                "integrator.rtol",
                format!("must be finite and > 0, got {}", i.rtol),
            ));
        }
        if !(i.atol >= 0.0 && i.atol.is_finite()) {
            return Err(ScenarioError::invalid(
                "integrator.atol",
                format!("must be finite and >= 0, got {}", i.atol),
            ));
        }

        let mut warnings = Vec::new();
        if let Some(tau) = self.field.envelope.tau() {
            let bound = tau * STEP_PER_TAU;
            if g.step > bound {
                let reason = format!("must be <= tau/400 = {bound} for a pulsed envelope, got {}", g.step);
                match self.step_policy {
                    StepPolicy::Error => return Err(ScenarioError::invalid("grid.step", reason)),
                    StepPolicy::Warn => warnings.push(format!("grid.step {reason}")),
                }
            }
        }
        Ok(warnings)
    }

    pub fn time_grid(&self) -> UniformGrid {
        UniformGrid::with_max_step(self.grid.t_start, self.grid.t_end, self.grid.step).expect("grid checked at load")
    }

    pub fn tolerance(&self) -> Tolerance {
        Tolerance {
            rtol: self.integrator.rtol,
            atol: self.integrator.atol,
        }
    }

    /// Copy with every implicit value written out, as echoed in table headers.
    pub fn resolved(&self) -> Scenario {
        Scenario {
            field: self.field.resolved(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_json(&text)
}

/// Strict deserialization without invariant checks.
pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let scenario: Scenario = serde_path_to_error::deserialize(&mut de).map_err(parse_error)?;
    de.end().map_err(|e| {
        ScenarioError::Parse(ParseError {
            path: ".".into(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
            suggestion: None,
        })
    })?;
    Ok(scenario)
}

fn parse_error(e: serde_path_to_error::Error<serde_json::Error>) -> ScenarioError {
    let path = e.path().to_string();
    let inner = e.into_inner();
    let message = inner.to_string();
    ScenarioError::Parse(ParseError {
        path,
        line: inner.line(),
        column: inner.column(),
        suggestion: suggest(&message),
        message,
    })
}

/// For serde's "unknown field `x`, expected one of `a`, `b`" messages, the
/// expected name closest to `x`.
fn suggest(message: &str) -> Option<String> {
    if !(message.starts_with("unknown field") || message.starts_with("unknown variant")) {
        return None;
    }
    let mut quoted = message.split('`').skip(1).step_by(2);
    let unknown = quoted.next()?;
    let (best, distance) = quoted
        .map(|k| (k, strsim::damerau_levenshtein(unknown, k)))
        .min_by_key(|&(_, d)| d)?;
    (distance <= 2.max(unknown.len() / 3)).then(|| best.to_string())
}

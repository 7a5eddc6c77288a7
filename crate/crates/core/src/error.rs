use thiserror::Error;

/// Errors raised while evaluating dressed-state quantities or integrating
/// the bare-basis amplitudes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NadsError {
    #[error("Rabi envelope {omega:e} at t = {t} is below the floor {floor:e}")]
    EnvelopeUnderflow { t: f64, omega: f64, floor: f64 },

    #[error("square-root branch for {quantity} is ambiguous: both roots are equidistant from the previous sample")]
    BranchAmbiguity { quantity: &'static str },

    #[error("nonadiabatic Rabi frequency modulus {modulus:e} is too small to divide by")]
    DegenerateRabi { modulus: f64 },

    #[error("amplitude ratio undefined: denominator {denominator:e} vs numerator {numerator:e}")]
    RatioUndefined { numerator: f64, denominator: f64 },

    #[error("RK4 substep {step:e} fell below the underflow limit {limit:e}")]
    StepUnderflow { step: f64, limit: f64 },

    #[error("RK4 refinement stalled at {achieved:e} above the requested {requested:e}")]
    ToleranceUnreachable { achieved: f64, requested: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("grid index {index} out of range (grid has {len} points)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("at grid point {index} (t = {t}): {source}")]
    AtGridPoint {
        index: usize,
        t: f64,
        #[source]
        source: Box<NadsError>,
    },
}

impl NadsError {
    pub(crate) fn at(self, index: usize, t: f64) -> Self {
        NadsError::AtGridPoint {
            index,
            t,
            source: Box::new(self),
        }
    }

    /// Innermost error, with any grid-point wrappers removed.
    pub fn root(&self) -> &NadsError {
        match self {
            NadsError::AtGridPoint { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, NadsError>;

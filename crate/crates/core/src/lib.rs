//! Nonadiabatic dressed states (NADS) of a driven, damped two-level system.
//!
//! * [`field`]: system parameters and the carrier-envelope field.
//! * [`dressed`]: instantaneous NADS quantities along a time grid.
//! * [`overlap`]: matrix elements, transition probability and bare-basis
//!   reconstruction of the NADS.
//! * [`tdse`]: an independent RK4 integrator of the Schrödinger equation and
//!   closed-form oracles.

pub mod dressed;
pub mod error;
pub mod field;
pub mod grid;
pub mod overlap;
pub mod tdse;

pub use num_complex::Complex64;

pub use dressed::{snapshot_series, BranchLog, NadsSnapshot, SnapshotSeries};
pub use error::{NadsError, Result};
pub use field::{Chirp, Envelope, EnvelopeSample, FieldModel, PhaseSample, SystemParams};
pub use grid::UniformGrid;
pub use overlap::{InitialState, NadsOverlaps, OverlapSet, ReconstructedAmplitudes};
pub use tdse::{Frame, Tolerance, Trajectory};

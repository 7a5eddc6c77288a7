//! Fixtures shared by the benchmarks.

use nads_core::{Chirp, Envelope, FieldModel, SystemParams, UniformGrid};

/// Damped, chirped Gaussian pulse on [−60, 60] with `points` grid points.
pub fn chirped_damped(points: usize) -> (SystemParams, FieldModel, UniformGrid) {
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
    (p, f, UniformGrid::new(-60.0, 60.0, points).expect("valid grid"))
}

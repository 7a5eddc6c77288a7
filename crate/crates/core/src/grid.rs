use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{NadsError, Result};

/// Uniform time grid t_k = t_start + k·step, k = 0..len.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    t_start: f64,
    step: f64,
    len: usize,
}

impl UniformGrid {
    /// Grid with `len` points from `t_start` to `t_end` inclusive.
    pub fn new(t_start: f64, t_end: f64, len: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(NadsError::InvalidGrid("end points must be finite".into()));
        }
        if t_end <= t_start {
            return Err(NadsError::InvalidGrid(format!(
                "t_end = {t_end} must exceed t_start = {t_start}"
            )));
        }
        if len < 2 {
            return Err(NadsError::InvalidGrid(format!("need at least 2 points, got {len}")));
        }
        Ok(UniformGrid {
            t_start,
            step: (t_end - t_start) / (len - 1) as f64,
            len,
        })
    }

    /// Smallest uniform grid spanning `[t_start, t_end]` whose step does not
    /// exceed `max_step`. End points are hit exactly.
    pub fn with_max_step(t_start: f64, t_end: f64, max_step: f64) -> Result<Self> {
        if !(max_step > 0.0 && max_step.is_finite()) {
            return Err(NadsError::InvalidGrid(format!("step must be > 0, got {max_step}")));
        }
        let ratio = (t_end - t_start) / max_step;
        // shave off representation noise so that span/step = 2400.0000000001
        // does not add an interval
        let intervals = (ratio * (1.0 - 1e-12)).ceil().max(1.0);
        if intervals > 1e9 {
            return Err(NadsError::InvalidGrid(format!("{intervals} intervals is too many")));
        }
        Self::new(t_start, t_end, intervals as usize + 1)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.len - 1)
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.step
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |k| self.t(k))
    }

    pub(crate) fn check_index(&self, k: usize) -> Result<()> {
        if k < self.len {
            Ok(())
        } else {
            Err(NadsError::IndexOutOfRange {
                index: k,
                len: self.len,
            })
        }
    }
}

/// Cumulative trapezoid integral from the first sample, same length as the
/// input with a leading zero.
pub fn cumulative_trapezoid<T>(values: &[T], step: f64) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let mut out = Vec::with_capacity(values.len());
    let mut acc = T::default();
    out.push(acc);
    for pair in values.windows(2) {
        acc = acc + (pair[0] + pair[1]) * (0.5 * step);
        out.push(acc);
    }
    out.truncate(values.len());
    out
}

/// Time derivative of uniformly sampled data: second-order central
/// differences inside, second-order one-sided stencils at the ends. Two
/// samples fall back to the single forward difference.
pub fn finite_difference<T>(values: &[T], step: f64) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let n = values.len();
    match n {
        0 => Vec::new(),
        1 => vec![T::default()],
        2 => {
            let d = (values[1] + values[0] * -1.0) * (1.0 / step);
            vec![d, d]
        }
        _ => {
            let inv2h = 0.5 / step;
            let mut out = Vec::with_capacity(n);
            out.push((values[0] * -3.0 + values[1] * 4.0 + values[2] * -1.0) * inv2h);
            for w in values.windows(3) {
                out.push((w[2] + w[0] * -1.0) * inv2h);
            }
            out.push((values[n - 1] * 3.0 + values[n - 2] * -4.0 + values[n - 3]) * inv2h);
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn max_step_grid_hits_end_points() {
        let g = UniformGrid::with_max_step(-60.0, 60.0, 0.05).unwrap();
        assert_eq!(g.len(), 2401);
        assert_eq!(g.t(0), -60.0);
        assert!((g.t_end() - 60.0).abs() < 1e-12);

        let g = UniformGrid::with_max_step(0.0, 1.0, 0.3).unwrap();
        assert_eq!(g.len(), 5);
        assert!(g.step() <= 0.3);
    }

    #[test]
    fn degenerate_grids_are_rejected() {
        assert!(UniformGrid::new(0.0, 1.0, 1).is_err());
        assert!(UniformGrid::new(1.0, 1.0, 4).is_err());
        assert!(UniformGrid::with_max_step(0.0, 1.0, 0.0).is_err());
        assert!(UniformGrid::with_max_step(0.0, 1.0, 5.0).unwrap().len() == 2);
    }

    #[test]
    fn trapezoid_is_exact_for_linear_integrands() {
        let g = UniformGrid::new(0.0, 2.0, 21).unwrap();
        let f: Vec<f64> = g.times().map(|t| 3.0 * t + 1.0).collect();
        let cum = cumulative_trapezoid(&f, g.step());
        for (k, t) in g.times().enumerate() {
            assert!((cum[k] - (1.5 * t * t + t)).abs() < 1e-13);
        }
    }

    #[test]
    fn finite_difference_is_exact_for_quadratics() {
        let g = UniformGrid::new(-1.0, 1.0, 11).unwrap();
        let f: Vec<Complex64> = g.times().map(|t| Complex64::new(t * t, -2.0 * t)).collect();
        let d = finite_difference(&f, g.step());
        for (k, t) in g.times().enumerate() {
            assert!((d[k] - Complex64::new(2.0 * t, -2.0)).norm() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn two_point_difference() {
        let d = finite_difference(&[1.0, 3.0], 0.5);
        assert_eq!(d, vec![4.0, 4.0]);
    }
}

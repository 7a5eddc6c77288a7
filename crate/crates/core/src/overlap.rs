//! Matrix elements between the nonadiabatic dressed states, the transition
//! probability between them, and the bare-basis form of each state.
//!
//! The inner product is the ordinary Hermitian one on the bare basis. The
//! NADS are not orthogonalized: ⟨Ẽ|G̃⟩ ≠ 0 is the quantity of interest.
//!
//! Phase and decay integrals ∫₀ᵗ … dt′ run from the first grid point and are
//! accumulated once per series with the trapezoid rule.

use num_complex::Complex64;
use serde::Serialize;

use crate::dressed::{NadsSnapshot, SnapshotSeries};
use crate::error::{NadsError, Result};
use crate::grid::cumulative_trapezoid;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// |c_g| below this fraction of |c_e| leaves c_e/c_g undefined.
pub const RATIO_GUARD: f64 = 1e-14;

/// Which bare state the system starts in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    Ground,
    Excited,
}

/// The three matrix elements at one instant plus the transition probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapSet {
    pub t: f64,
    pub gg: f64,
    pub ee: f64,
    pub eg: Complex64,
    pub p_ge: f64,
}

/// A vector on the bare basis, `[g, e]`.
pub type BareVector = [Complex64; 2];

fn inner(bra: &BareVector, ket: &BareVector) -> Complex64 {
    bra[0].conj() * ket[0] + bra[1].conj() * ket[1]
}

struct NadsVectors {
    g_real: BareVector,
    g_virtual: BareVector,
    e_real: BareVector,
    e_virtual: BareVector,
    g_tilde: BareVector,
    e_tilde: BareVector,
}

/// Bare-basis coefficients of the NADS and the amplitude ratio of the branch
/// the system starts on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructedAmplitudes {
    pub t: f64,
    pub init: InitialState,
    /// c_e/c_g for a ground start, c_g/c_e for an excited start.
    pub ratio: Complex64,
    pub g_real: BareVector,
    pub g_virtual: BareVector,
    pub e_real: BareVector,
    pub e_virtual: BareVector,
    pub g_tilde: BareVector,
    pub e_tilde: BareVector,
}

/// |a·b* − a*·b|² / (|a|² + |b|²)².
fn pair_probability(a: Complex64, b: Complex64) -> f64 {
    // the ratio is scale-free; a power-of-two rescale keeps the squares in
    // range without changing any rounding
    let m = a.re.abs().max(a.im.abs()).max(b.re.abs()).max(b.im.abs());
    let (a, b) = if m > 0.0 && m.is_finite() {
        // two factors so that subnormal inputs do not overflow the scale
        let e = -(m.log2().floor() as i32);
        let (s1, s2) = (2f64.powi(e / 2), 2f64.powi(e - e / 2));
        (a * s1 * s2, b * s1 * s2)
    } else {
        (a, b)
    };
    let bracket = a * b.conj() - a.conj() * b;
    let norm = a.norm_sqr() + b.norm_sqr();
    bracket.norm_sqr() / (norm * norm)
}

/// P(|G̃⟩→|Ẽ⟩) from the mixing functions alone.
pub fn transition_probability_from(sin_half: Complex64, cos_half: Complex64) -> f64 {
    pair_probability(sin_half, cos_half)
}

/// P(|Ẽ⟩→|G̃⟩), built from ⟨G̃|Ẽ⟩ whose bracket is the conjugate one.
pub fn reverse_transition_probability_from(sin_half: Complex64, cos_half: Complex64) -> f64 {
    pair_probability(cos_half, sin_half)
}

/// Pointwise transition probability between the NADS at one instant.
pub fn transition_probability(snapshot: &NadsSnapshot) -> f64 {
    transition_probability_from(snapshot.sin_half, snapshot.cos_half)
}

/// Matrix elements over a snapshot series, with its running integrals.
#[derive(Debug, Clone)]
pub struct NadsOverlaps<'a> {
    series: &'a SnapshotSeries,
    /// ∫ω̃′_G
    int_omega_g: Vec<Complex64>,
    /// ∫ω̃′_E
    int_omega_e: Vec<Complex64>,
    /// ∫(Ω⁻¹∂ₜΩ − Im Ω̃′)
    int_gg_expanded: Vec<f64>,
    /// ∫(Ω⁻¹∂ₜΩ + Im Ω̃′)
    int_ee_expanded: Vec<f64>,
    /// ∫(Ω⁻¹∂ₜΩ + i Re Ω̃′)
    int_eg_expanded: Vec<Complex64>,
}

impl<'a> NadsOverlaps<'a> {
    pub fn new(series: &'a SnapshotSeries) -> Self {
        let h = series.grid.step();
        let collect_c = |f: &dyn Fn(&NadsSnapshot) -> Complex64| -> Vec<Complex64> {
            cumulative_trapezoid(&series.snapshots.iter().map(f).collect::<Vec<_>>(), h)
        };
        let collect_r = |f: &dyn Fn(&NadsSnapshot) -> f64| -> Vec<f64> {
            cumulative_trapezoid(&series.snapshots.iter().map(f).collect::<Vec<_>>(), h)
        };
        NadsOverlaps {
            series,
            int_omega_g: collect_c(&|s| s.omega_g_tilde),
            int_omega_e: collect_c(&|s| s.omega_e_tilde),
            int_gg_expanded: collect_r(&|s| s.log_deriv - s.omega_tilde.im),
            int_ee_expanded: collect_r(&|s| s.log_deriv + s.omega_tilde.im),
            int_eg_expanded: collect_c(&|s| Complex64::new(s.log_deriv, s.omega_tilde.re)),
        }
    }

    pub fn series(&self) -> &SnapshotSeries {
        self.series
    }

    fn snap(&self, k: usize) -> Result<&NadsSnapshot> {
        self.series.get(k)
    }

    fn elapsed(&self, k: usize) -> f64 {
        self.series.grid.t(k) - self.series.grid.t_start()
    }

    fn mixing_norm(s: &NadsSnapshot) -> f64 {
        s.sin_half.norm_sqr() + s.cos_half.norm_sqr()
    }

    fn bracket(s: &NadsSnapshot) -> Complex64 {
        s.sin_half * s.cos_half.conj() - s.sin_half.conj() * s.cos_half
    }

    /// −(γ_g + γ_e)/2 · (t − t₀)
    fn decay(&self, k: usize) -> f64 {
        -0.5 * self.series.params.gamma_sum() * self.elapsed(k)
    }

    /// ⟨G̃|G̃⟩ = [|SIN|² + |COS|²] exp(2∫Im ω̃′_G)
    pub fn gg(&self, k: usize) -> Result<f64> {
        let s = self.snap(k)?;
        Ok(Self::mixing_norm(s) * (2.0 * self.int_omega_g[k].im).exp())
    }

    /// ⟨Ẽ|Ẽ⟩ = [|SIN|² + |COS|²] exp(2∫Im ω̃′_E)
    pub fn ee(&self, k: usize) -> Result<f64> {
        let s = self.snap(k)?;
        Ok(Self::mixing_norm(s) * (2.0 * self.int_omega_e[k].im).exp())
    }

    /// ⟨Ẽ|G̃⟩ = [SIN·COS* − SIN*·COS] exp{i∫[ω̃′_E* − ω̃′_G − ω]}
    pub fn eg(&self, k: usize) -> Result<Complex64> {
        let s = self.snap(k)?;
        let carrier = self.series.field.carrier_omega * self.elapsed(k);
        let exponent = I * (self.int_omega_e[k].conj() - self.int_omega_g[k] - carrier);
        Ok(Self::bracket(s) * exponent.exp())
    }

    /// ⟨G̃|G̃⟩ via exp{−(γ_g+γ_e)t/2 + ∫(Ω⁻¹∂ₜΩ − Im Ω̃′)}.
    pub fn gg_expanded(&self, k: usize) -> Result<f64> {
        let s = self.snap(k)?;
        Ok(Self::mixing_norm(s) * (self.decay(k) + self.int_gg_expanded[k]).exp())
    }

    /// ⟨Ẽ|Ẽ⟩ via exp{−(γ_g+γ_e)t/2 + ∫(Ω⁻¹∂ₜΩ + Im Ω̃′)}.
    pub fn ee_expanded(&self, k: usize) -> Result<f64> {
        let s = self.snap(k)?;
        Ok(Self::mixing_norm(s) * (self.decay(k) + self.int_ee_expanded[k]).exp())
    }

    /// ⟨Ẽ|G̃⟩ via exp{−(γ_g+γ_e)t/2 + ∫(Ω⁻¹∂ₜΩ + i Re Ω̃′)}.
    pub fn eg_expanded(&self, k: usize) -> Result<Complex64> {
        let s = self.snap(k)?;
        Ok(Self::bracket(s) * (self.decay(k) + self.int_eg_expanded[k]).exp())
    }

    fn assemble(&self, k: usize) -> Result<NadsVectors> {
        let s = self.snap(k)?;
        let zero = Complex64::new(0.0, 0.0);
        let carrier = self.series.field.carrier_omega * self.elapsed(k);
        let phi = s.phi;
        let (int_g, int_e) = (self.int_omega_g[k], self.int_omega_e[k]);

        let g_real = [(-I * int_g).exp(), zero];
        let g_virtual = [zero, (-I * (int_g + carrier) - I * phi).exp()];
        let e_real = [zero, (-I * int_e - I * phi).exp()];
        let e_virtual = [(-I * (int_e - carrier)).exp(), zero];

        let (c, sn) = (s.cos_half, s.sin_half);
        let g_tilde = [c * g_real[0] + sn * g_virtual[0], c * g_real[1] + sn * g_virtual[1]];
        let e_tilde = [c * e_real[0] - sn * e_virtual[0], c * e_real[1] - sn * e_virtual[1]];
        Ok(NadsVectors {
            g_real,
            g_virtual,
            e_real,
            e_virtual,
            g_tilde,
            e_tilde,
        })
    }

    /// Bare-basis components and assembled NADS at grid point `k`.
    ///
    /// The ratio is taken within the NADS branch connected to the initial
    /// state (|G̃⟩ for a ground start, |Ẽ⟩ for an excited start), which makes
    /// it independent of any overall prefactor.
    pub fn reconstruct(&self, k: usize, init: InitialState) -> Result<ReconstructedAmplitudes> {
        let v = self.assemble(k)?;
        let t = self.series.grid.t(k);
        let (num, den) = match init {
            InitialState::Ground => (v.g_tilde[1], v.g_tilde[0]),
            InitialState::Excited => (v.e_tilde[0], v.e_tilde[1]),
        };
        if den.norm() == 0.0 || !(den.norm() >= RATIO_GUARD * num.norm()) {
            return Err(NadsError::RatioUndefined {
                numerator: num.norm(),
                denominator: den.norm(),
            }
            .at(k, t));
        }
        Ok(ReconstructedAmplitudes {
            t,
            init,
            ratio: num / den,
            g_real: v.g_real,
            g_virtual: v.g_virtual,
            e_real: v.e_real,
            e_virtual: v.e_virtual,
            g_tilde: v.g_tilde,
            e_tilde: v.e_tilde,
        })
    }

    /// ⟨Ẽ|G̃⟩ from the Hermitian inner product of the reconstructed vectors.
    pub fn eg_inner(&self, k: usize) -> Result<Complex64> {
        let v = self.assemble(k)?;
        Ok(inner(&v.e_tilde, &v.g_tilde))
    }

    /// ⟨G̃|Ẽ⟩ from the Hermitian inner product of the reconstructed vectors.
    pub fn ge_inner(&self, k: usize) -> Result<Complex64> {
        let v = self.assemble(k)?;
        Ok(inner(&v.g_tilde, &v.e_tilde))
    }

    /// ⟨G̃|G̃⟩ and ⟨Ẽ|Ẽ⟩ from the reconstructed vectors.
    pub fn norms_inner(&self, k: usize) -> Result<(f64, f64)> {
        let v = self.assemble(k)?;
        Ok((inner(&v.g_tilde, &v.g_tilde).re, inner(&v.e_tilde, &v.e_tilde).re))
    }

    /// P from the full overlaps, exponential factors included.
    pub fn transition_probability_via_overlaps(&self, k: usize) -> Result<f64> {
        let eg = self.eg(k)?;
        Ok(eg.norm_sqr() / (self.gg(k)? * self.ee(k)?))
    }

    pub fn overlap_set(&self, k: usize) -> Result<OverlapSet> {
        let s = self.snap(k)?;
        Ok(OverlapSet {
            t: s.t,
            gg: self.gg(k)?,
            ee: self.ee(k)?,
            eg: self.eg(k)?,
            p_ge: transition_probability(s),
        })
    }
}

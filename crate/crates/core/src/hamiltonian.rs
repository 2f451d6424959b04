//! The instantaneous 2×2 Hamiltonian and its equivalent parametrizations.
//!
//! Units have `ħ = 1`. The off-diagonal convention is `H⁰₁ = R e^{-iλ}` for the
//! `(0, 1)` element, so `H¹₀ = R e^{+iλ}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{reduce_angle, BlochPoint, StateVector};

/// Gaps below this are treated as a degenerate spectrum.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// Hermitian 2×2 matrix stored as its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianMatrix {
    pub h00: f64,
    pub h11: f64,
    /// The `(0, 1)` element; the `(1, 0)` element is its conjugate.
    pub h01: Complex64,
}

impl HamiltonianMatrix {
    pub fn new(h00: f64, h11: f64, h01: Complex64) -> Self {
        Self { h00, h11, h01 }
    }

    pub fn diagonal(h00: f64, h11: f64) -> Self {
        Self::new(h00, h11, Complex64::new(0.0, 0.0))
    }

    pub fn h10(&self) -> Complex64 {
        self.h01.conj()
    }

    /// `H ψ` on raw amplitudes.
    #[inline]
    pub fn apply(&self, psi: [Complex64; 2]) -> [Complex64; 2] {
        [
            psi[0] * self.h00 + self.h01 * psi[1],
            self.h10() * psi[0] + psi[1] * self.h11,
        ]
    }

    pub fn trace(&self) -> f64 {
        self.h00 + self.h11
    }

    pub fn negated(&self) -> Self {
        Self::new(-self.h00, -self.h11, -self.h01)
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, s: &StateVector) -> f64 {
        let hp = self.apply(s.amplitudes());
        (s.psi0().conj() * hp[0] + s.psi1().conj() * hp[1]).re
    }
}

/// The ray-space parameters `(Ω, R, λ)` of a Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// `Ω = H⁰₀ - H¹₁`.
    pub omega_diag: f64,
    /// `R = |H⁰₁| ≥ 0`.
    pub r: f64,
    /// `λ ∈ [0, 2π)`, zero whenever `R = 0`.
    pub lambda: f64,
}

impl DriveParams {
    /// Canonicalizes: a negative `r` is absorbed into `λ + π`.
    pub fn new(omega_diag: f64, r: f64, lambda: f64) -> Self {
        let (r, lambda) = if r < 0.0 { (-r, lambda + PI) } else { (r, lambda) };
        let lambda = if r == 0.0 { 0.0 } else { reduce_angle(lambda) };
        Self {
            omega_diag,
            r,
            lambda,
        }
    }

    /// `H⁰₁ = R e^{-iλ}`.
    pub fn h01(&self) -> Complex64 {
        Complex64::from_polar(self.r, -self.lambda)
    }
}

/// Classical field whose Larmor precession reproduces a geometric drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagneticField {
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
}

impl MagneticField {
    pub fn magnitude(&self) -> f64 {
        (self.bx * self.bx + self.by * self.by + self.bz * self.bz).sqrt()
    }
}

pub fn relabel(h: &HamiltonianMatrix) -> DriveParams {
    DriveParams::new(h.h00 - h.h11, h.h01.norm(), -h.h01.arg())
}

/// `(E₀, E₁)` with `E₀ ≥ E₁`.
pub fn eigenvalues(h: &HamiltonianMatrix) -> (f64, f64) {
    let mean = 0.5 * h.trace();
    let half_gap = 0.5 * instantaneous_gap(h);
    (mean + half_gap, mean - half_gap)
}

/// `ω = E₀ - E₁ = √(Ω² + 4R²)`.
pub fn instantaneous_gap(h: &HamiltonianMatrix) -> f64 {
    let p = relabel(h);
    p.omega_diag.hypot(2.0 * p.r)
}

/// Bloch point `(θ′, φ′)` of the upper eigenket `|E₀⟩`.
///
/// The traceless part of `H` is `(ω/2) n·σ` with
/// `n = (2R cos λ, 2R sin λ, Ω)/ω`; the upper eigenket is the ray along `n`.
pub fn eigen_bloch(h: &HamiltonianMatrix) -> Result<BlochPoint> {
    let p = relabel(h);
    let gap = p.omega_diag.hypot(2.0 * p.r);
    if !(gap >= DEGENERACY_TOL) {
        return Err(Error::DegenerateSpectrum { gap });
    }
    Ok(BlochPoint::new((2.0 * p.r).atan2(p.omega_diag), p.lambda))
}

/// Inverts [`relabel`], with the unobservable trace split as `trace_part ± Ω/2`.
pub fn params_to_matrix(p: &DriveParams, trace_part: f64) -> HamiltonianMatrix {
    HamiltonianMatrix::new(
        trace_part + 0.5 * p.omega_diag,
        trace_part - 0.5 * p.omega_diag,
        p.h01(),
    )
}

/// `H → H + f I`.
pub fn gauge_shift(h: &HamiltonianMatrix, f: f64) -> HamiltonianMatrix {
    HamiltonianMatrix::new(h.h00 + f, h.h11 + f, h.h01)
}

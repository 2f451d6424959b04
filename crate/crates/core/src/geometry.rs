//! Ray-space geometry of a single qubit.
//!
//! The Bloch sphere used throughout has radius 1/2: the Fubini-Study distance
//! between two rays is half the central angle between their Bloch vectors, so
//! orthogonal states sit at distance `π/2`. Authors who draw the Bloch sphere
//! with unit radius get distances twice as large.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for angle comparisons.
pub const ANGLE_TOL: f64 = 1e-10;

/// Norms below this are treated as the zero vector.
pub const ZERO_NORM_TOL: f64 = 1e-12;

/// A normalized pair of amplitudes `(ψ⁰, ψ¹)` in the basis `{|u₀⟩, |u₁⟩}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    psi0: Complex64,
    psi1: Complex64,
}

impl StateVector {
    /// Normalizes `(psi0, psi1)`; fails on a zero vector.
    pub fn new(psi0: Complex64, psi1: Complex64) -> Result<Self> {
        let norm = (psi0.norm_sqr() + psi1.norm_sqr()).sqrt();
        if !(norm >= ZERO_NORM_TOL) {
            return Err(Error::DegenerateInput("state vector has zero norm"));
        }
        Ok(Self {
            psi0: psi0 / norm,
            psi1: psi1 / norm,
        })
    }

    /// Builds a state without renormalizing. The caller guarantees unit norm.
    pub(crate) fn from_normalized(psi0: Complex64, psi1: Complex64) -> Self {
        Self { psi0, psi1 }
    }

    pub fn psi0(&self) -> Complex64 {
        self.psi0
    }

    pub fn psi1(&self) -> Complex64 {
        self.psi1
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        [self.psi0, self.psi1]
    }

    pub fn norm(&self) -> f64 {
        (self.psi0.norm_sqr() + self.psi1.norm_sqr()).sqrt()
    }

    /// Multiplies both amplitudes by `e^{iα}`.
    pub fn with_global_phase(&self, alpha: f64) -> Self {
        let w = Complex64::from_polar(1.0, alpha);
        Self {
            psi0: self.psi0 * w,
            psi1: self.psi1 * w,
        }
    }
}

/// Spherical coordinates `(θ, φ)` of a ray.
///
/// `θ ∈ [0, π]`, `φ ∈ [0, 2π)`, and `φ = 0` at either pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct BlochPoint {
    theta: f64,
    phi: f64,
}

impl BlochPoint {
    pub const NORTH: BlochPoint = BlochPoint { theta: 0.0, phi: 0.0 };
    pub const SOUTH: BlochPoint = BlochPoint { theta: PI, phi: 0.0 };

    /// Canonicalizes arbitrary finite angles onto the sphere.
    ///
    /// A polar angle outside `[0, π]` is reflected through the pole it
    /// crossed, which shifts the azimuth by `π`.
    pub fn new(theta: f64, phi: f64) -> Self {
        let mut theta = if (0.0..=PI).contains(&theta) {
            theta
        } else {
            theta.rem_euclid(TAU)
        };
        let mut phi = phi;
        if theta > PI {
            theta = TAU - theta;
            phi += PI;
        }
        let mut phi = reduce_angle(phi);
        if theta == 0.0 || theta == PI {
            phi = 0.0;
        }
        Self { theta, phi }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Unit Bloch vector `(sin θ cos φ, sin θ sin φ, cos θ)`.
    pub fn to_unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Inverse of [`to_unit_vector`](Self::to_unit_vector); the input need not be normalized.
    pub fn from_vector(v: [f64; 3]) -> Self {
        let rho = v[0].hypot(v[1]);
        let theta = rho.atan2(v[2]);
        let phi = if rho == 0.0 { 0.0 } else { v[1].atan2(v[0]) };
        Self::new(theta, phi)
    }

    /// True when both angles agree within `tol`, with the azimuth compared on the circle.
    pub fn approx_eq(&self, other: &BlochPoint, tol: f64) -> bool {
        (self.theta - other.theta).abs() <= tol && angle_diff(self.phi, other.phi).abs() <= tol
    }
}

impl TryFrom<(f64, f64)> for BlochPoint {
    type Error = String;

    fn try_from((theta, phi): (f64, f64)) -> std::result::Result<Self, String> {
        if theta.is_finite() && phi.is_finite() {
            Ok(BlochPoint::new(theta, phi))
        } else {
            Err(format!("non-finite Bloch angles ({theta}, {phi})"))
        }
    }
}

impl From<BlochPoint> for (f64, f64) {
    fn from(p: BlochPoint) -> Self {
        (p.theta, p.phi)
    }
}

/// Stereographic coordinate `ξ = ψ¹/ψ⁰`, with the south pole sent to infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjectiveCoord {
    Finite(Complex64),
    Infinity,
}

/// Reduces an angle into `[0, 2π)`.
pub fn reduce_angle(a: f64) -> f64 {
    if (0.0..TAU).contains(&a) {
        return a;
    }
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed difference `a - b` wrapped into `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// `(cos(θ/2), e^{iφ} sin(θ/2))`, with `ψ⁰` real and non-negative.
pub fn bloch_to_state(p: BlochPoint) -> StateVector {
    let (s, c) = (0.5 * p.theta).sin_cos();
    StateVector::from_normalized(Complex64::new(c, 0.0), Complex64::from_polar(s, p.phi))
}

/// Projects a state onto the sphere, discarding its global phase.
pub fn state_to_bloch(s: &StateVector) -> Result<BlochPoint> {
    amplitudes_to_bloch(s.psi0, s.psi1)
}

/// As [`state_to_bloch`] but for raw, possibly unnormalized amplitudes.
pub fn amplitudes_to_bloch(psi0: Complex64, psi1: Complex64) -> Result<BlochPoint> {
    let (a0, a1) = (psi0.norm(), psi1.norm());
    if a0.hypot(a1) < ZERO_NORM_TOL {
        return Err(Error::DegenerateInput("state vector has zero norm"));
    }
    let theta = 2.0 * a1.atan2(a0);
    let phi = if a0 == 0.0 || a1 == 0.0 {
        0.0
    } else {
        psi1.arg() - psi0.arg()
    };
    Ok(BlochPoint::new(theta, phi))
}

/// `ξ = tan(θ/2) e^{iφ}`.
pub fn stereographic(p: BlochPoint) -> ProjectiveCoord {
    if p.theta == PI {
        return ProjectiveCoord::Infinity;
    }
    ProjectiveCoord::Finite(Complex64::from_polar((0.5 * p.theta).tan(), p.phi))
}

pub fn inverse_stereographic(xi: ProjectiveCoord) -> BlochPoint {
    match xi {
        ProjectiveCoord::Infinity => BlochPoint::SOUTH,
        ProjectiveCoord::Finite(z) => {
            let r = z.norm();
            let phi = if r == 0.0 { 0.0 } else { z.arg() };
            BlochPoint::new(2.0 * r.atan(), phi)
        }
    }
}

/// The point representing the orthogonal state.
pub fn antipode(p: BlochPoint) -> BlochPoint {
    BlochPoint::new(PI - p.theta, p.phi + PI)
}

/// Central angle between two points, in `[0, π]`.
pub fn central_angle(a: BlochPoint, b: BlochPoint) -> f64 {
    vector_angle(a.to_unit_vector(), b.to_unit_vector())
}

/// Angle between two 3-vectors, computed with `atan2` so it stays accurate
/// near 0 and near π.
pub(crate) fn vector_angle(u: [f64; 3], v: [f64; 3]) -> f64 {
    let c = cross(u, v);
    norm3(c).atan2(dot(u, v))
}

/// Fubini-Study distance: half the central angle.
pub fn fs_distance(a: BlochPoint, b: BlochPoint) -> f64 {
    0.5 * central_angle(a, b)
}

/// `⟨a|b⟩`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Complex64 {
    a.psi0.conj() * b.psi0 + a.psi1.conj() * b.psi1
}

pub(crate) fn dot(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

pub(crate) fn cross(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

pub(crate) fn norm3(u: [f64; 3]) -> f64 {
    dot(u, u).sqrt()
}

pub(crate) fn scale3(u: [f64; 3], s: f64) -> [f64; 3] {
    [u[0] * s, u[1] * s, u[2] * s]
}

pub(crate) fn add3(u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
    [u[0] + v[0], u[1] + v[1], u[2] + v[2]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_state(s: StateVector, psi0: Complex64, psi1: Complex64) {
        assert!((s.psi0() - psi0).norm() < 1e-15, "{s:?}");
        assert!((s.psi1() - psi1).norm() < 1e-15, "{s:?}");
    }

    #[test]
    fn bloch_to_state_examples() {
        assert_state(bloch_to_state(BlochPoint::new(0.0, 0.0)), c(1.0, 0.0), c(0.0, 0.0));
        assert_state(bloch_to_state(BlochPoint::new(PI, 0.0)), c(0.0, 0.0), c(1.0, 0.0));
        assert_state(
            bloch_to_state(BlochPoint::new(FRAC_PI_2, FRAC_PI_2)),
            c(FRAC_1_SQRT_2, 0.0),
            c(0.0, FRAC_1_SQRT_2),
        );
    }

    #[test]
    fn state_to_bloch_examples() {
        let p = state_to_bloch(&StateVector::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap()).unwrap();
        assert_eq!((p.theta(), p.phi()), (0.0, 0.0));

        let w = Complex64::from_polar(FRAC_1_SQRT_2, 0.7);
        let s = StateVector::new(w, w * Complex64::i()).unwrap();
        let p = state_to_bloch(&s).unwrap();
        assert!(p.approx_eq(&BlochPoint::new(FRAC_PI_2, FRAC_PI_2), 1e-14));

        let s = StateVector::new(c(1.0 / 5f64.sqrt(), 0.0), c(2.0 / 5f64.sqrt(), 0.0)).unwrap();
        let p = state_to_bloch(&s).unwrap();
        assert_abs_diff_eq!(p.theta(), 2.0 * 2f64.atan(), epsilon = 1e-15);
        assert_eq!(p.phi(), 0.0);
    }

    #[test]
    fn zero_vector_is_rejected() {
        assert!(matches!(
            StateVector::new(c(0.0, 0.0), c(1e-13, 0.0)),
            Err(Error::DegenerateInput(_))
        ));
        assert!(amplitudes_to_bloch(c(0.0, 0.0), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn stereographic_examples() {
        assert_eq!(
            stereographic(BlochPoint::new(0.0, 1.3)),
            ProjectiveCoord::Finite(c(0.0, 0.0))
        );
        match stereographic(BlochPoint::new(FRAC_PI_2, FRAC_PI_2)) {
            ProjectiveCoord::Finite(z) => assert!((z - c(0.0, 1.0)).norm() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert_eq!(stereographic(BlochPoint::new(PI, 0.0)), ProjectiveCoord::Infinity);
    }

    #[test]
    fn inverse_stereographic_examples() {
        let p = inverse_stereographic(ProjectiveCoord::Finite(c(0.0, 0.0)));
        assert_eq!((p.theta(), p.phi()), (0.0, 0.0));
        let p = inverse_stereographic(ProjectiveCoord::Finite(c(1.0, 0.0)));
        assert_abs_diff_eq!(p.theta(), FRAC_PI_2, epsilon = 1e-15);
        assert_eq!(p.phi(), 0.0);
        assert_eq!(inverse_stereographic(ProjectiveCoord::Infinity), BlochPoint::SOUTH);
    }

    #[test]
    fn antipode_examples() {
        assert_eq!(antipode(BlochPoint::new(0.0, 0.0)), BlochPoint::SOUTH);
        let a = antipode(BlochPoint::new(FRAC_PI_2, 0.0));
        assert!(a.approx_eq(&BlochPoint::new(FRAC_PI_2, PI), 1e-15));

        let p = BlochPoint::new(FRAC_PI_3, FRAC_PI_4);
        let a = antipode(p);
        assert!(a.approx_eq(&BlochPoint::new(2.0 * FRAC_PI_3, 5.0 * FRAC_PI_4), 1e-15));
        let overlap = inner_product(&bloch_to_state(p), &bloch_to_state(a));
        assert!(overlap.norm() < 1e-15);
    }

    #[test]
    fn fs_distance_examples() {
        let p = BlochPoint::new(1.1, 2.2);
        assert_eq!(fs_distance(p, p), 0.0);
        assert_abs_diff_eq!(
            fs_distance(BlochPoint::NORTH, BlochPoint::SOUTH),
            FRAC_PI_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            fs_distance(BlochPoint::NORTH, BlochPoint::new(FRAC_PI_2, 0.0)),
            FRAC_PI_4,
            epsilon = 1e-15
        );
    }

    #[test]
    fn inner_product_examples() {
        let up = StateVector::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let down = StateVector::new(c(0.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(inner_product(&up, &up), c(1.0, 0.0));
        assert_eq!(inner_product(&up, &down), c(0.0, 0.0));
        let plus = StateVector::new(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let plus_i = StateVector::new(c(1.0, 0.0), c(0.0, 1.0)).unwrap();
        assert!((inner_product(&plus, &plus_i) - c(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn poles_are_canonical() {
        assert_eq!(BlochPoint::new(0.0, 2.0).phi(), 0.0);
        assert_eq!(BlochPoint::new(PI, -1.0).phi(), 0.0);
        let p = BlochPoint::new(-0.3, 0.1);
        assert_abs_diff_eq!(p.theta(), 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(p.phi(), 0.1 + PI, epsilon = 1e-15);
        assert!(BlochPoint::new(1.0, -1e-300).phi() < TAU);
    }

    /// First-order Fubini-Study line element from the state difference.
    fn chord_line_element(a: BlochPoint, b: BlochPoint) -> f64 {
        let pa = bloch_to_state(a);
        let pb = bloch_to_state(b);
        let d0 = pb.psi0() - pa.psi0();
        let d1 = pb.psi1() - pa.psi1();
        let dd = d0.norm_sqr() + d1.norm_sqr();
        let overlap = pa.psi0().conj() * d0 + pa.psi1().conj() * d1;
        (dd - overlap.norm_sqr()).sqrt()
    }

    fn point() -> impl Strategy<Value = BlochPoint> {
        (0.0..PI, 0.0..TAU).prop_map(|(t, p)| BlochPoint::new(t, p))
    }

    proptest! {
        #[test]
        fn round_trip_through_state(p in point(), phase in -10.0..10.0f64) {
            let q = state_to_bloch(&bloch_to_state(p).with_global_phase(phase)).unwrap();
            prop_assert!(q.approx_eq(&p, ANGLE_TOL), "{:?} vs {:?}", p, q);
        }

        #[test]
        fn round_trip_through_stereographic(p in (0.0..PI - 1e-6, 0.0..TAU)) {
            let p = BlochPoint::new(p.0, p.1);
            let q = inverse_stereographic(stereographic(p));
            prop_assert!(q.approx_eq(&p, 1e-12));
        }

        #[test]
        fn antipodes_are_orthogonal(p in point()) {
            let overlap = inner_product(&bloch_to_state(p), &bloch_to_state(antipode(p)));
            prop_assert!(overlap.norm() < 1e-12);
        }

        #[test]
        fn distance_is_a_bounded_metric(a in point(), b in point(), c in point()) {
            let ab = fs_distance(a, b);
            prop_assert!((ab - fs_distance(b, a)).abs() < 1e-15);
            prop_assert!(ab <= FRAC_PI_2 + 1e-15);
            prop_assert!(fs_distance(a, c) <= ab + fs_distance(b, c) + 1e-14);
            prop_assert!((fs_distance(a, antipode(a)) - FRAC_PI_2).abs() < 1e-12);
            prop_assert!((fs_distance(antipode(a), antipode(b)) - ab).abs() < 1e-14);
        }

        #[test]
        fn distance_matches_line_element(
            p in (0.01..PI - 0.01, 0.0..TAU),
            dir in 0.0..TAU,
            step in 1e-7..1e-4f64,
        ) {
            let a = BlochPoint::new(p.0, p.1);
            let b = BlochPoint::new(p.0 + step * dir.cos(), p.1 + step * dir.sin());
            let exact = fs_distance(a, b);
            let chord = chord_line_element(a, b);
            prop_assert!((exact - chord).abs() <= 1e-4 * exact, "{} vs {}", exact, chord);
        }
    }
}

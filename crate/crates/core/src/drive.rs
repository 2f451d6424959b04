//! Time-dependent Hamiltonians.
//!
//! [`GeometricDrive`] describes the Hamiltonian by its gap `ω(t)` and the
//! Bloch point `(θ′(t), φ′(t))` of its upper eigenstate. [`MatrixDrive`] gives
//! the matrix elements directly. Both implement [`Drive`], which is all the
//! integrators and diagnostics need.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    add3, cross, dot, scale3, vector_angle, BlochPoint,
};
use crate::hamiltonian::{
    eigen_bloch, gauge_shift, instantaneous_gap, relabel, DriveParams,
    HamiltonianMatrix, MagneticField, DEGENERACY_TOL,
};
use crate::schedule::{HarmonicTerm, Schedule};

/// A source of instantaneous Hamiltonians.
///
/// Implementations must be side-effect free so drives can be shared across
/// sweep workers.
pub trait Drive: Sync {
    fn hamiltonian(&self, t: f64) -> HamiltonianMatrix;

    fn params(&self, t: f64) -> DriveParams {
        relabel(&self.hamiltonian(t))
    }

    /// Signed gap; geometric drives report `ω(t)` as given.
    fn gap(&self, t: f64) -> f64 {
        instantaneous_gap(&self.hamiltonian(t))
    }

    /// Bloch point of the upper eigenstate.
    fn eigen_point(&self, t: f64) -> Result<BlochPoint> {
        eigen_bloch(&self.hamiltonian(t))
    }
}

impl<D: Drive + ?Sized> Drive for &D {
    fn hamiltonian(&self, t: f64) -> HamiltonianMatrix {
        (**self).hamiltonian(t)
    }
    fn params(&self, t: f64) -> DriveParams {
        (**self).params(t)
    }
    fn gap(&self, t: f64) -> f64 {
        (**self).gap(t)
    }
    fn eigen_point(&self, t: f64) -> Result<BlochPoint> {
        (**self).eigen_point(t)
    }
}

/// Instantaneous value of a geometric drive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveSample {
    pub omega: f64,
    pub axis: BlochPoint,
}

/// Path traced by the upper-eigenstate axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum AxisPath {
    /// `θ′(t)` and `φ′(t)` given separately.
    Angles { theta: Schedule, phi: Schedule },
    /// `start` rotated about `about` by `rate·t`; a great circle when the two are orthogonal.
    Rotation {
        start: BlochPoint,
        about: BlochPoint,
        rate: f64,
    },
    /// Constant-speed great-circle arcs between nodes.
    Geodesic(GeodesicPath),
}

/// Nodes visited at the given times, joined by minor great-circle arcs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub nodes: Vec<BlochPoint>,
    pub times: Vec<f64>,
}

impl GeodesicPath {
    fn point_at(&self, t: f64) -> BlochPoint {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.nodes[0];
        }
        if t >= self.times[n - 1] {
            return self.nodes[n - 1];
        }
        let i = self.times.partition_point(|&x| x <= t);
        let s = (t - self.times[i - 1]) / (self.times[i] - self.times[i - 1]);
        slerp(self.nodes[i - 1], self.nodes[i], s)
    }
}

/// Point a fraction `s` of the way along the minor arc from `a` to `b`.
pub(crate) fn slerp(a: BlochPoint, b: BlochPoint, s: f64) -> BlochPoint {
    let (u, v) = (a.to_unit_vector(), b.to_unit_vector());
    let alpha = vector_angle(u, v);
    if alpha == 0.0 {
        return a;
    }
    let sa = alpha.sin();
    let w = add3(
        scale3(u, ((1.0 - s) * alpha).sin() / sa),
        scale3(v, (s * alpha).sin() / sa),
    );
    BlochPoint::from_vector(w)
}

/// Rodrigues rotation of `v` about unit `k` by `angle`.
pub(crate) fn rotate(v: [f64; 3], k: [f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    let kv = dot(k, v);
    add3(
        add3(scale3(v, c), scale3(cross(k, v), s)),
        scale3(k, kv * (1.0 - c)),
    )
}

impl AxisPath {
    pub fn point_at(&self, t: f64) -> BlochPoint {
        match self {
            AxisPath::Angles { theta, phi } => BlochPoint::new(theta.eval(t), phi.eval(t)),
            AxisPath::Rotation { start, about, rate } => BlochPoint::from_vector(rotate(
                start.to_unit_vector(),
                about.to_unit_vector(),
                rate * t,
            )),
            AxisPath::Geodesic(path) => path.point_at(t),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            AxisPath::Angles { theta, phi } => {
                theta.validate()?;
                phi.validate()
            }
            AxisPath::Rotation { rate, .. } if !rate.is_finite() => {
                Err(Error::InvalidConfig("rotation rate must be finite".into()))
            }
            AxisPath::Rotation { .. } => Ok(()),
            AxisPath::Geodesic(p) => {
                if p.nodes.len() < 2 || p.nodes.len() != p.times.len() {
                    return Err(Error::InvalidConfig(
                        "geodesic path needs matching nodes and times (at least two)".into(),
                    ));
                }
                if p.times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidConfig(
                        "geodesic path times must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Hamiltonian described by its gap `ω(t) ≥ 0` and upper-eigenstate axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricDrive {
    pub omega: Schedule,
    pub axis: AxisPath,
}

impl GeometricDrive {
    pub fn new(omega: Schedule, axis: AxisPath) -> Result<Self> {
        omega.validate()?;
        axis.validate()?;
        Ok(Self { omega, axis })
    }

    /// Constant gap, fixed axis.
    pub fn fixed(omega: f64, axis: BlochPoint) -> Self {
        Self {
            omega: Schedule::constant(omega),
            axis: AxisPath::Angles {
                theta: Schedule::constant(axis.theta()),
                phi: Schedule::constant(axis.phi()),
            },
        }
    }

    /// Axis on the equator rotating uniformly: `θ′ = π/2`, `φ′ = Ω t`, `ω = ω₀`.
    pub fn equatorial(omega0: f64, capital_omega: f64) -> Self {
        Self {
            omega: Schedule::constant(omega0),
            axis: AxisPath::Angles {
                theta: Schedule::constant(FRAC_PI_2),
                phi: Schedule::linear(0.0, capital_omega),
            },
        }
    }

    #[inline]
    pub fn sample(&self, t: f64) -> DriveSample {
        DriveSample {
            omega: self.omega.eval(t),
            axis: self.axis.point_at(t),
        }
    }
}

/// `λ = φ′`, `R = ω sin θ′ / 2`, `Ω = ω cos θ′`.
pub fn geometric_to_params(g: &GeometricDrive, t: f64) -> DriveParams {
    let s = g.sample(t);
    let (st, ct) = s.axis.theta().sin_cos();
    DriveParams::new(s.omega * ct, 0.5 * s.omega * st, s.axis.phi())
}

/// Field whose Larmor precession reproduces the drive: `B = (m/e) ω n`.
pub fn drive_to_field(g: &GeometricDrive, t: f64, m_over_e: f64) -> MagneticField {
    let s = g.sample(t);
    let n = s.axis.to_unit_vector();
    let scale = m_over_e * s.omega;
    MagneticField {
        bx: scale * n[0],
        by: scale * n[1],
        bz: scale * n[2],
    }
}

impl Drive for GeometricDrive {
    #[inline]
    fn hamiltonian(&self, t: f64) -> HamiltonianMatrix {
        let s = self.sample(t);
        let (st, ct) = s.axis.theta().sin_cos();
        let half = 0.5 * s.omega;
        HamiltonianMatrix::new(
            half * ct,
            -half * ct,
            Complex64::from_polar(half * st, -s.axis.phi()),
        )
    }

    #[inline]
    fn params(&self, t: f64) -> DriveParams {
        geometric_to_params(self, t)
    }

    fn gap(&self, t: f64) -> f64 {
        self.omega.eval(t)
    }

    fn eigen_point(&self, t: f64) -> Result<BlochPoint> {
        let s = self.sample(t);
        if !(s.omega >= DEGENERACY_TOL) {
            return Err(Error::DegenerateSpectrum { gap: s.omega });
        }
        Ok(s.axis)
    }
}

/// Hamiltonian given by its matrix elements as schedules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDrive {
    pub h00: Schedule,
    pub h11: Schedule,
    pub h01_re: Schedule,
    pub h01_im: Schedule,
}

impl MatrixDrive {
    pub fn validate(&self) -> Result<()> {
        self.h00.validate()?;
        self.h11.validate()?;
        self.h01_re.validate()?;
        self.h01_im.validate()
    }
}

impl Drive for MatrixDrive {
    fn hamiltonian(&self, t: f64) -> HamiltonianMatrix {
        HamiltonianMatrix::new(
            self.h00.eval(t),
            self.h11.eval(t),
            num_complex::Complex64::new(self.h01_re.eval(t), self.h01_im.eval(t)),
        )
    }
}

/// `H(t) + f(t) I`: same rays, different global phase.
#[derive(Debug, Clone)]
pub struct GaugeShifted<D> {
    pub inner: D,
    pub shift: Schedule,
}

impl<D: Drive> Drive for GaugeShifted<D> {
    fn hamiltonian(&self, t: f64) -> HamiltonianMatrix {
        gauge_shift(&self.inner.hamiltonian(t), self.shift.eval(t))
    }
    fn params(&self, t: f64) -> DriveParams {
        relabel(&self.hamiltonian(t))
    }
    fn gap(&self, t: f64) -> f64 {
        self.inner.gap(t)
    }
    fn eigen_point(&self, t: f64) -> Result<BlochPoint> {
        self.inner.eigen_point(t)
    }
}

/// A smooth, generally non-adiabatic geometric drive with mean gap `omega_scale`.
///
/// The gap stays within `[0.5, 1.5]·omega_scale` and the axis moves at rates
/// up to a fraction of the gap.
pub fn random_smooth_drive<R: Rng + ?Sized>(rng: &mut R, omega_scale: f64) -> GeometricDrive {
    let w = omega_scale;
    let term = |amp: f64, rng: &mut R| HarmonicTerm {
        amplitude: amp,
        frequency: rng.gen_range(0.05..0.5) * w,
        phase: rng.gen_range(0.0..TAU),
    };
    let omega = Schedule::Harmonic {
        offset: w,
        rate: 0.0,
        terms: vec![term(rng.gen_range(0.0..0.5) * w, rng)],
    };
    let theta = Schedule::Harmonic {
        offset: rng.gen_range(0.6..PI - 0.6),
        rate: 0.0,
        terms: vec![term(rng.gen_range(0.0..0.5), rng)],
    };
    let phi = Schedule::Harmonic {
        offset: rng.gen_range(0.0..TAU),
        rate: rng.gen_range(-0.3..0.3) * w,
        terms: vec![term(rng.gen_range(0.0..1.0), rng)],
    };
    GeometricDrive {
        omega,
        axis: AxisPath::Angles { theta, phi },
    }
}

//! Checks tying the geometry to the dynamics.
//!
//! Energy uncertainty, the Fubini-Study speed, distance to the instantaneous
//! eigenstate, pendulum energy and the time-energy passage bound.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::drive::Drive;
use crate::error::{Error, Result};
use crate::evolution::{to_pendulum_coords, EquatorialScenario, PendulumState, Trajectory};
use crate::geometry::{antipode, fs_distance, inner_product, StateVector};
use crate::hamiltonian::HamiltonianMatrix;

/// Largest `|⟨ψ(T)|ψ(0)⟩|` still counted as orthogonal.
pub const ORTHOGONALITY_TOL: f64 = 1e-6;

/// Slack allowed below `π/2` in the passage bound.
pub const PASSAGE_BOUND_SLACK: f64 = 1e-6;

/// Relative tolerance of the speed identity, as a fraction of `max δE`.
pub const SPEED_IDENTITY_REL_TOL: f64 = 1e-3;

/// Absolute floor of the speed identity tolerance.
pub const SPEED_IDENTITY_ABS_TOL: f64 = 1e-9;

/// `δE = sqrt(⟨H²⟩ - ⟨H⟩²)`.
///
/// Evaluated as `‖(A - ⟨A⟩)ψ‖` with `A` the traceless part of `h`, which is
/// the same quantity without the cancellation of the textbook form.
pub fn energy_uncertainty(s: &StateVector, h: &HamiltonianMatrix) -> Result<f64> {
    let half = 0.5 * h.trace();
    let a = HamiltonianMatrix::new(h.h00 - half, h.h11 - half, h.h01);
    let mean = a.expectation(s);
    let ap = a.apply(s.amplitudes());
    let r0 = ap[0] - s.psi0() * mean;
    let r1 = ap[1] - s.psi1() * mean;
    let var = r0.norm_sqr() + r1.norm_sqr();
    if var.is_nan() || var.is_infinite() {
        return Err(Error::NumericalInconsistency(format!(
            "energy variance is not finite ({var})"
        )));
    }
    Ok(var.sqrt())
}

/// Fubini-Study speed at every sample.
///
/// Interior samples use centered chords over `±1` and `±2` samples, combined
/// as `(4·s₁ - s₂)/3` to cancel the leading chord-versus-arc error. Samples
/// next to the ends, or where the grid is not uniform, use the single
/// centered chord; the end samples use the one-sided difference to their
/// neighbor.
pub fn fs_speed_series(traj: &Trajectory) -> Result<Vec<f64>> {
    let n = traj.len();
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    let (t, p) = (&traj.times, &traj.bloch);
    let chord = |a: usize, b: usize| fs_distance(p[a], p[b]) / (t[b] - t[a]);
    Ok((0..n)
        .map(|i| match i {
            0 => chord(0, 1),
            i if i == n - 1 => chord(n - 2, n - 1),
            i if i >= 2 && i + 2 < n => {
                let inner = t[i + 1] - t[i - 1];
                let outer = t[i + 2] - t[i - 2];
                if (outer - 2.0 * inner).abs() <= 1e-9 * outer {
                    (4.0 * chord(i - 1, i + 1) - chord(i - 2, i + 2)) / 3.0
                } else {
                    chord(i - 1, i + 1)
                }
            }
            i => chord(i - 1, i + 1),
        })
        .collect())
}

/// `δE(t)` along a trajectory.
pub fn energy_uncertainty_series<D: Drive + ?Sized>(traj: &Trajectory, drive: &D) -> Result<Vec<f64>> {
    (0..traj.len())
        .map(|i| energy_uncertainty(&traj.state(i), &drive.hamiltonian(traj.times[i])))
        .collect()
}

/// Which instantaneous eigenstate the deviation is measured from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenBranch {
    /// The upper eigenvalue `E₀`.
    #[default]
    Upper,
    /// The lower eigenvalue `E₁`, antipodal to the upper one.
    Lower,
}

/// Fubini-Study distance from each sample to the instantaneous eigenstate.
pub fn eigen_deviation_series<D: Drive + ?Sized>(
    traj: &Trajectory,
    drive: &D,
    branch: EigenBranch,
) -> Result<Vec<f64>> {
    traj.times
        .iter()
        .zip(&traj.bloch)
        .map(|(t, p)| {
            let e = drive.eigen_point(*t)?;
            let e = match branch {
                EigenBranch::Upper => e,
                EigenBranch::Lower => antipode(e),
            };
            Ok(fs_distance(*p, e))
        })
        .collect()
}

/// `E = η̇²/2 - ω₀² cos η`.
pub fn pendulum_energy(p: &PendulumState, omega0: f64) -> f64 {
    0.5 * p.eta_dot * p.eta_dot - omega0 * omega0 * p.eta.cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassageReport {
    /// `δE̅ = (1/Δt) ∫ δE dt`.
    pub delta_e_bar: f64,
    /// `Δs = ∫ δE dt`, on the same grid as `δE̅`.
    pub delta_s: f64,
    /// Sum of Fubini-Study distances between consecutive samples.
    pub path_length: f64,
    pub duration: f64,
    /// `δE̅ · Δt`.
    pub passage_product: f64,
    /// `|⟨ψ(T)|ψ(0)⟩|`.
    pub endpoint_overlap: f64,
    pub bound_satisfied: bool,
}

/// Trapezoid rule on a possibly uneven grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// Time-energy passage check for a trajectory ending orthogonal to its start.
///
/// Fails with [`Error::NotApplicable`] when the endpoints are not orthogonal.
pub fn passage_check<D: Drive + ?Sized>(traj: &Trajectory, drive: &D) -> Result<PassageReport> {
    let delta_e = energy_uncertainty_series(traj, drive)?;
    passage_from_series(traj, &delta_e)
}

fn passage_from_series(traj: &Trajectory, delta_e: &[f64]) -> Result<PassageReport> {
    let n = traj.len();
    if n < 2 {
        return Err(Error::TooFewSamples { needed: 2, got: n });
    }
    let overlap = inner_product(&traj.state(0), &traj.state(n - 1)).norm();
    if overlap > ORTHOGONALITY_TOL {
        return Err(Error::NotApplicable { overlap });
    }
    let duration = traj.times[n - 1] - traj.times[0];
    let delta_s = trapezoid(&traj.times, delta_e);
    let delta_e_bar = delta_s / duration;
    let passage_product = delta_e_bar * duration;
    let path_length = traj
        .bloch
        .windows(2)
        .map(|w| fs_distance(w[0], w[1]))
        .sum();
    Ok(PassageReport {
        delta_e_bar,
        delta_s,
        path_length,
        duration,
        passage_product,
        endpoint_overlap: overlap,
        bound_satisfied: passage_product >= FRAC_PI_2 - PASSAGE_BOUND_SLACK,
    })
}

/// Libration envelope `(η_max, ε_max) = (2 asin(Ω/ω₀), 2Ω/ω₀)`.
///
/// `ε_max` comes from the linearized pendulum and is accurate to
/// `O((Ω/ω₀)³)`.
pub fn libration_bound(omega0: f64, capital_omega: f64) -> Result<(f64, f64)> {
    if !(omega0 > 0.0) || !(capital_omega.abs() < omega0) {
        return Err(Error::RotationRegime {
            omega0,
            capital_omega,
        });
    }
    let ratio = capital_omega.abs() / omega0;
    Ok((2.0 * ratio.asin(), 2.0 * ratio))
}

/// Deviation coordinates relative to the drive axis.
///
/// `ε = θ - θ′(t)` and `η = 2(φ - φ′(t))`, with `η` unwrapped in steps of
/// `4π`. For the equatorial drive these are the pendulum coordinates.
pub fn relative_coords<D: Drive + ?Sized>(traj: &Trajectory, drive: &D) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut eps = Vec::with_capacity(traj.len());
    let mut eta: Vec<f64> = Vec::with_capacity(traj.len());
    let four_pi = 4.0 * PI;
    for (t, p) in traj.times.iter().zip(&traj.bloch) {
        let axis = drive.eigen_point(*t)?;
        eps.push(p.theta() - axis.theta());
        let raw = 2.0 * (p.phi() - axis.phi());
        let reference = eta.last().copied().unwrap_or(0.0);
        let k = ((reference - raw) / four_pi).round();
        eta.push(raw + k * four_pi);
    }
    Ok((eps, eta))
}

/// Outcome of the speed identity `ds/dt = δE` on interior samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedIdentity {
    pub max_abs_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares interior samples of `fs_speed` with `delta_e`.
pub fn speed_identity(fs_speed: &[f64], delta_e: &[f64]) -> SpeedIdentity {
    let n = fs_speed.len().min(delta_e.len());
    let max_de = delta_e.iter().copied().fold(0.0, f64::max);
    let tolerance = (SPEED_IDENTITY_REL_TOL * max_de).max(SPEED_IDENTITY_ABS_TOL);
    let max_abs_error = if n < 3 {
        0.0
    } else {
        (1..n - 1)
            .map(|i| (fs_speed[i] - delta_e[i]).abs())
            .fold(0.0, f64::max)
    };
    SpeedIdentity {
        max_abs_error,
        tolerance,
        passed: max_abs_error <= tolerance,
    }
}

/// Per-sample series and summary values for one trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub delta_e: Vec<f64>,
    pub fs_speed: Vec<f64>,
    pub eigen_deviation: Vec<f64>,
    /// Present for equatorial runs.
    pub pendulum_energy: Option<Vec<f64>>,
    pub delta_e_bar: f64,
    pub delta_s: f64,
    /// `None` unless the trajectory ends orthogonal to its start.
    pub passage: Option<PassageReport>,
    pub speed_identity: SpeedIdentity,
}

impl DiagnosticsReport {
    /// Computes every diagnostic. `equatorial` adds the pendulum energy.
    pub fn compute<D: Drive + ?Sized>(
        traj: &Trajectory,
        drive: &D,
        branch: EigenBranch,
        equatorial: Option<&EquatorialScenario>,
    ) -> Result<Self> {
        let delta_e = energy_uncertainty_series(traj, drive)?;
        let fs_speed = fs_speed_series(traj)?;
        let eigen_deviation = eigen_deviation_series(traj, drive, branch)?;
        let pendulum_energy = match equatorial {
            Some(sc) => Some(
                to_pendulum_coords(traj, sc.capital_omega)?
                    .iter()
                    .map(|p| pendulum_energy(p, sc.omega0))
                    .collect(),
            ),
            None => None,
        };
        let delta_s = trapezoid(&traj.times, &delta_e);
        let duration = traj.t_end() - traj.times[0];
        let passage = match passage_from_series(traj, &delta_e) {
            Ok(p) => Some(p),
            Err(Error::NotApplicable { .. }) => None,
            Err(e) => return Err(e),
        };
        let speed_identity = speed_identity(&fs_speed, &delta_e);
        Ok(Self {
            delta_e_bar: delta_s / duration,
            delta_s,
            passage,
            speed_identity,
            delta_e,
            fs_speed,
            eigen_deviation,
            pendulum_energy,
        })
    }

    pub fn max_eigen_deviation(&self) -> f64 {
        self.eigen_deviation.iter().copied().fold(0.0, f64::max)
    }
}

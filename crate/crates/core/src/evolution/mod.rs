//! Time integration of qubit dynamics.
//!
//! Two independent routes produce a Bloch-sphere trajectory from the same
//! drive: [`integrate_full`] evolves both amplitudes of the state vector and
//! projects afterwards, while [`integrate_projected`] integrates the ray-space
//! equations for `(θ, φ)` directly. They must agree; the experiment layer
//! refuses to report a run where they do not.

mod full;
mod geodesic;
pub(crate) mod ode;
mod pendulum;
mod projected;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::drive::Drive;
use crate::error::{Error, Result};
use crate::geometry::{BlochPoint, StateVector};

pub use full::integrate_full;
pub use geodesic::piecewise_geodesic_drive;
pub use ode::{Scheme, StepStats};
pub use pendulum::{
    integrate_pendulum, to_pendulum_coords, PendulumState, PendulumTrajectory, EPS_RATE_SIGN,
};
pub use projected::{integrate_equatorial, integrate_projected, EquatorialScenario};

#[doc(hidden)]
pub use projected::{integrate_projected_variant, ProjectedVariant};

/// Largest allowed `dt · ω_max`.
pub const MAX_STEP_PHASE: f64 = 0.1;

/// `dt · ω_max` used when no step is configured.
pub const DEFAULT_STEP_PHASE: f64 = 1e-3;

/// Output samples are never sparser than this per fastest precession period.
pub const MIN_SAMPLES_PER_PERIOD: f64 = 100.0;

/// Points used to scan a drive for its largest gap.
const GAP_SCAN_POINTS: usize = 4097;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub scheme: Scheme,
    /// Relative tolerance of the adaptive scheme.
    pub rel_tol: f64,
    pub norm_drift_limit: f64,
    /// Distance from a pole (radians of θ) below which projected integration
    /// leaves the `(θ, φ)` chart for a stereographic one.
    pub chart_switch_threshold: f64,
    /// Minimum number of output samples, endpoints included.
    pub samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_STEP_PHASE,
            scheme: Scheme::Rk4,
            rel_tol: 1e-10,
            norm_drift_limit: 1e-9,
            chart_switch_threshold: 0.2,
            samples: 2000,
        }
    }
}

impl IntegratorConfig {
    /// Defaults with `dt = DEFAULT_STEP_PHASE / omega_max`.
    pub fn for_gap(omega_max: f64) -> Self {
        Self {
            dt: DEFAULT_STEP_PHASE / omega_max,
            ..Self::default()
        }
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }

    pub fn with_samples(self, samples: usize) -> Self {
        Self { samples, ..self }
    }

    pub fn validate(&self, t_end: f64, omega_max: f64) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return bad(format!("t_end must be positive, got {t_end}"));
        }
        if !(self.rel_tol > 0.0) {
            return bad(format!("rel_tol must be positive, got {}", self.rel_tol));
        }
        if !(self.norm_drift_limit > 0.0) {
            return bad(format!(
                "norm_drift_limit must be positive, got {}",
                self.norm_drift_limit
            ));
        }
        if !(self.chart_switch_threshold > 0.0
            && self.chart_switch_threshold < std::f64::consts::FRAC_PI_2)
        {
            return bad(format!(
                "chart_switch_threshold must lie in (0, π/2), got {}",
                self.chart_switch_threshold
            ));
        }
        if self.samples < 3 {
            return bad(format!("samples must be at least 3, got {}", self.samples));
        }
        if self.dt * omega_max > MAX_STEP_PHASE * (1.0 + 1e-12) {
            return bad(format!(
                "dt·ω_max = {:.3e} exceeds {MAX_STEP_PHASE}; reduce dt below {:.3e}",
                self.dt * omega_max,
                MAX_STEP_PHASE / omega_max
            ));
        }
        Ok(())
    }

    /// Number of output samples for a run: at least `samples`, and at least
    /// [`MIN_SAMPLES_PER_PERIOD`] per period of the fastest precession.
    pub fn sample_count(&self, t_end: f64, omega_max: f64) -> usize {
        let resolved = (t_end * omega_max * MIN_SAMPLES_PER_PERIOD / TAU - 1e-9).ceil();
        self.samples.max(resolved as usize)
    }

    /// Equally spaced output times from 0 to `t_end` inclusive.
    pub fn sample_times(&self, t_end: f64, omega_max: f64) -> Vec<f64> {
        let n = self.sample_count(t_end, omega_max);
        let last = (n - 1) as f64;
        (0..n)
            .map(|k| if k == n - 1 { t_end } else { t_end * k as f64 / last })
            .collect()
    }
}

/// Largest gap of a drive over `[0, t_end]`, rejecting negative or non-finite values.
pub fn max_gap<D: Drive + ?Sized>(drive: &D, t_end: f64) -> Result<f64> {
    let mut max = 0.0f64;
    for k in 0..GAP_SCAN_POINTS {
        let t = t_end * k as f64 / (GAP_SCAN_POINTS - 1) as f64;
        let w = drive.gap(t);
        if !w.is_finite() || w < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "drive gap must be finite and non-negative, got {w} at t = {t}"
            )));
        }
        max = max.max(w);
    }
    Ok(max)
}

/// Where a trajectory came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectorySource {
    FullState,
    Projected,
    Equatorial,
    PendulumReconstructed,
}

/// Time-ordered samples of an integration run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Present only for full-state runs.
    pub states: Option<Vec<StateVector>>,
    pub bloch: Vec<BlochPoint>,
    /// Largest pre-renormalization norm error since the previous sample;
    /// zero for runs that carry no state vector.
    pub norm_drift: Vec<f64>,
    pub source: TrajectorySource,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Representative state vector of sample `i` (the stored one when present).
    pub fn state(&self, i: usize) -> StateVector {
        match &self.states {
            Some(s) => s[i],
            None => crate::geometry::bloch_to_state(self.bloch[i]),
        }
    }
}

/// Largest Fubini-Study distance between two trajectories sampled on the same grid.
pub fn sup_fs_distance(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::NumericalInconsistency(format!(
            "trajectories have different lengths ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(a.bloch
        .iter()
        .zip(&b.bloch)
        .map(|(p, q)| crate::geometry::fs_distance(*p, *q))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_grid_respects_precession() {
        let cfg = IntegratorConfig::default();
        // twenty precession periods at 100 samples each
        let t_end = 40.0 * std::f64::consts::PI;
        assert_eq!(cfg.sample_count(t_end, 1.0), 2000);
        assert_eq!(cfg.sample_count(10.0 * t_end, 1.0), 20000);
        let ts = cfg.sample_times(2.0, 1.0);
        assert_eq!(ts.len(), 2000);
        assert_eq!(ts[0], 0.0);
        assert_eq!(*ts.last().unwrap(), 2.0);
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn validation_catches_coarse_steps() {
        let cfg = IntegratorConfig::default().with_dt(0.2);
        assert!(matches!(cfg.validate(1.0, 1.0), Err(Error::InvalidConfig(_))));
        assert!(cfg.validate(1.0, 0.5).is_ok());
        assert!(IntegratorConfig::default().with_dt(-1.0).validate(1.0, 1.0).is_err());
        assert!(IntegratorConfig::default().validate(0.0, 1.0).is_err());
        assert!(IntegratorConfig::default().with_samples(2).validate(1.0, 1.0).is_err());
    }
}

//! Pendulum reduction of the equatorial scenario.
//!
//! With `ε = θ - π/2` and `η = 2(φ - Ωt)` the equatorial equations become
//! `ε̇ = -ω₀ sin(η/2)` and `η̇ = 2(ω₀ tan ε cos(η/2) - Ω)`. Differentiating
//! the second and dropping terms of second order in `ε` gives the pendulum
//! `η̈ = -ω₀² sin η`, started from `η = 0`, `η̇ = -2Ω`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::ode::{dopri5_step, rk4_step, scaled_error, Marcher, Scheme, StepStats};
use super::{EquatorialScenario, IntegratorConfig, Trajectory, TrajectorySource};
use crate::error::{Error, Result};
use crate::geometry::BlochPoint;

/// Sign `s` in the reconstruction `ε̇ = s·ω₀ sin(η/2)`.
///
/// Fixed by comparing against the full-state oracle of the equatorial
/// scenario (see `reconstruction_sign_matches_oracle` below).
pub const EPS_RATE_SIGN: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumState {
    pub eps: f64,
    pub eta: f64,
    pub eta_dot: f64,
}

#[derive(Debug, Clone)]
pub struct PendulumTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<PendulumState>,
    pub capital_omega: f64,
    pub stats: StepStats,
}

impl PendulumTrajectory {
    /// Bloch points `(π/2 + ε, Ωt + η/2)`.
    pub fn to_trajectory(&self) -> Trajectory {
        let bloch = self
            .times
            .iter()
            .zip(&self.states)
            .map(|(t, s)| BlochPoint::new(FRAC_PI_2 + s.eps, self.capital_omega * t + 0.5 * s.eta))
            .collect();
        Trajectory {
            times: self.times.clone(),
            states: None,
            bloch,
            norm_drift: vec![0.0; self.times.len()],
            source: TrajectorySource::PendulumReconstructed,
            stats: self.stats,
        }
    }
}

/// Converts an equatorial trajectory to pendulum coordinates.
///
/// `η` is unwrapped in multiples of `4π` (the ambiguity inherited from `φ`),
/// and `η̇` comes from second-order finite differences.
pub fn to_pendulum_coords(traj: &Trajectory, capital_omega: f64) -> Result<Vec<PendulumState>> {
    let n = traj.len();
    if n < 3 {
        return Err(Error::TooFewSamples { needed: 3, got: n });
    }
    let four_pi = 4.0 * PI;
    let mut eta = Vec::with_capacity(n);
    for (i, (t, p)) in traj.times.iter().zip(&traj.bloch).enumerate() {
        let raw = 2.0 * (p.phi() - capital_omega * t);
        let reference = if i == 0 { 0.0 } else { eta[i - 1] };
        let k = ((reference - raw) / four_pi).round();
        eta.push(raw + k * four_pi);
    }
    let t = &traj.times;
    let eta_dot = (0..n).map(|i| {
        if i == 0 {
            three_point(t[0], [t[0], t[1], t[2]], [eta[0], eta[1], eta[2]])
        } else if i == n - 1 {
            three_point(
                t[n - 1],
                [t[n - 3], t[n - 2], t[n - 1]],
                [eta[n - 3], eta[n - 2], eta[n - 1]],
            )
        } else {
            (eta[i + 1] - eta[i - 1]) / (t[i + 1] - t[i - 1])
        }
    });
    Ok(traj
        .bloch
        .iter()
        .zip(&eta)
        .zip(eta_dot)
        .map(|((p, &eta), eta_dot)| PendulumState {
            eps: p.theta() - FRAC_PI_2,
            eta,
            eta_dot,
        })
        .collect())
}

/// Derivative at `x` of the quadratic through three points.
fn three_point(x: f64, xs: [f64; 3], ys: [f64; 3]) -> f64 {
    let [x0, x1, x2] = xs;
    let [y0, y1, y2] = ys;
    y0 * (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2))
        + y1 * (2.0 * x - x0 - x2) / ((x1 - x0) * (x1 - x2))
        + y2 * (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1))
}

/// Integrates `η̈ = -ω₀² sin η` from `η = 0, η̇ = -2Ω`, carrying
/// `ε̇ = EPS_RATE_SIGN·ω₀ sin(η/2)` along.
pub fn integrate_pendulum(sc: &EquatorialScenario, cfg: &IntegratorConfig) -> Result<PendulumTrajectory> {
    sc.validate()?;
    cfg.validate(sc.t_end, sc.omega0)?;
    let w0 = sc.omega0;
    let w0_sq = w0 * w0;
    let rhs = |_t: f64, y: &[f64; 3]| {
        [
            y[1],
            -w0_sq * y[0].sin(),
            EPS_RATE_SIGN * w0 * (0.5 * y[0]).sin(),
        ]
    };

    let times = cfg.sample_times(sc.t_end, w0);
    let mut states = Vec::with_capacity(times.len());
    let mut stats = StepStats::default();
    let mut y = [0.0, -2.0 * sc.capital_omega, 0.0];
    let as_state = |y: &[f64; 3]| PendulumState {
        eps: y[2],
        eta: y[0],
        eta_dot: y[1],
    };
    states.push(as_state(&y));

    let mut marcher = Marcher::new(cfg.scheme, cfg.dt);
    for w in times.windows(2) {
        marcher.cross(
            w[0],
            w[1],
            &mut y,
            &mut stats,
            |y, t, h| match cfg.scheme {
                Scheme::Rk4 => (rk4_step(&rhs, t, y, h), 0.0),
                Scheme::Rk45Adaptive => {
                    let (next, e) = dopri5_step(&rhs, t, y, h);
                    (next, scaled_error(y, &next, &e, cfg.rel_tol))
                }
            },
            |_, _| Ok(()),
        )?;
        states.push(as_state(&y));
    }

    Ok(PendulumTrajectory {
        times,
        states,
        capital_omega: sc.capital_omega,
        stats,
    })
}

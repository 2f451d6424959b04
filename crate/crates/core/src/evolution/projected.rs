use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ode::{dopri5_step, rk4_step, scaled_error, Marcher, Scheme, StepStats, TimeCache};
use super::{max_gap, IntegratorConfig, Trajectory, TrajectorySource};
use crate::drive::{Drive, GeometricDrive};
use crate::error::{Error, Result};
use crate::geometry::BlochPoint;
use crate::hamiltonian::DriveParams;

/// Uniform rotation of the drive axis around the equator at constant gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquatorialScenario {
    /// Constant gap `ω₀ > 0`.
    pub omega0: f64,
    /// Rotation rate `Ω ≥ 0` of the axis.
    pub capital_omega: f64,
    pub t_end: f64,
}

impl EquatorialScenario {
    /// Runs for two full revolutions of the drive axis.
    pub fn two_revolutions(omega0: f64, capital_omega: f64) -> Self {
        Self {
            omega0,
            capital_omega,
            t_end: 4.0 * PI / capital_omega,
        }
    }

    /// Scenario with `Ω = ω₀ / ratio`, two revolutions long.
    pub fn from_ratio(omega0: f64, ratio: f64) -> Self {
        Self::two_revolutions(omega0, omega0 / ratio)
    }

    pub fn drive(&self) -> GeometricDrive {
        GeometricDrive::equatorial(self.omega0, self.capital_omega)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "omega0 must be positive, got {}",
                self.omega0
            )));
        }
        if !(self.capital_omega >= 0.0 && self.capital_omega.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "capital_omega must be non-negative, got {}",
                self.capital_omega
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        Ok(())
    }
}

/// Right-hand side used by the projected integrator.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectedVariant {
    Standard,
    /// Every derivative negated. Used only to check that the oracle comparison
    /// detects a sign error.
    SignFlipped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Chart {
    /// `(θ, φ)`.
    Angles,
    /// `ξ = tan(θ/2) e^{iφ}` around the north pole.
    North,
    /// `ζ = 1/ξ = cot(θ/2) e^{-iφ}` around the south pole.
    South,
}

fn chart_for(theta: f64, threshold: f64) -> Chart {
    if theta < threshold {
        Chart::North
    } else if theta > PI - threshold {
        Chart::South
    } else {
        Chart::Angles
    }
}

/// `θ̇ = -2R sin(φ-λ)`, `φ̇ = Ω - 2R cot θ cos(φ-λ)`.
#[inline]
fn angles_rhs(p: &DriveParams, y: &[f64; 2]) -> [f64; 2] {
    let (s, c) = (y[1] - p.lambda).sin_cos();
    [
        -2.0 * p.r * s,
        p.omega_diag - 2.0 * p.r * c / y[0].tan(),
    ]
}

/// `ξ̇ = i[ξΩ + ξ²H⁰₁ - H¹₀]`.
#[inline]
fn north_rhs(p: &DriveParams, y: &[f64; 2]) -> [f64; 2] {
    let xi = Complex64::new(y[0], y[1]);
    let h01 = p.h01();
    let d = Complex64::i() * (xi * p.omega_diag + xi * xi * h01 - h01.conj());
    [d.re, d.im]
}

/// `ζ̇ = i[-ζΩ + ζ²H¹₀ - H⁰₁]`, the same equation with the basis labels swapped.
#[inline]
fn south_rhs(p: &DriveParams, y: &[f64; 2]) -> [f64; 2] {
    let zeta = Complex64::new(y[0], y[1]);
    let h01 = p.h01();
    let d = Complex64::i() * (-zeta * p.omega_diag + zeta * zeta * h01.conj() - h01);
    [d.re, d.im]
}

fn to_chart(p: BlochPoint, chart: Chart) -> [f64; 2] {
    match chart {
        Chart::Angles => [p.theta(), p.phi()],
        Chart::North => {
            let xi = Complex64::from_polar((0.5 * p.theta()).tan(), p.phi());
            [xi.re, xi.im]
        }
        Chart::South => {
            let zeta = Complex64::from_polar(1.0 / (0.5 * p.theta()).tan(), -p.phi());
            [zeta.re, zeta.im]
        }
    }
}

fn from_chart(y: &[f64; 2], chart: Chart) -> BlochPoint {
    match chart {
        Chart::Angles => BlochPoint::new(y[0], y[1]),
        Chart::North => {
            let r = y[0].hypot(y[1]);
            let phi = if r == 0.0 { 0.0 } else { y[1].atan2(y[0]) };
            BlochPoint::new(2.0 * r.atan(), phi)
        }
        Chart::South => {
            let r = y[0].hypot(y[1]);
            let phi = if r == 0.0 { 0.0 } else { -y[1].atan2(y[0]) };
            BlochPoint::new(PI - 2.0 * r.atan(), phi)
        }
    }
}

/// Integrates the ray-space equations directly on the Bloch sphere.
///
/// Away from the poles the `(θ, φ)` chart is used. Within
/// `cfg.chart_switch_threshold` of a pole the step is taken in the
/// stereographic chart centred there, which has no `cot θ` singularity.
pub fn integrate_projected<D: Drive + ?Sized>(
    drive: &D,
    p_init: BlochPoint,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    integrate_projected_variant(drive, p_init, t_end, cfg, ProjectedVariant::Standard)
}

#[doc(hidden)]
pub fn integrate_projected_variant<D: Drive + ?Sized>(
    drive: &D,
    p_init: BlochPoint,
    t_end: f64,
    cfg: &IntegratorConfig,
    variant: ProjectedVariant,
) -> Result<Trajectory> {
    let omega_max = max_gap(drive, t_end.max(0.0))?;
    cfg.validate(t_end, omega_max)?;

    let sign = match variant {
        ProjectedVariant::Standard => 1.0,
        ProjectedVariant::SignFlipped => -1.0,
    };
    let times = cfg.sample_times(t_end, omega_max);
    let mut bloch = Vec::with_capacity(times.len());
    let mut stats = StepStats::default();
    let mut point = p_init;
    bloch.push(point);

    let mut marcher = Marcher::new(cfg.scheme, cfg.dt);
    let mut last_chart = chart_for(point.theta(), cfg.chart_switch_threshold);
    let mut switches = 0u64;
    let params = TimeCache::new(|t| drive.params(t));

    for w in times.windows(2) {
        marcher.cross(
            w[0],
            w[1],
            &mut point,
            &mut stats,
            |p, t, h| {
                let chart = chart_for(p.theta(), cfg.chart_switch_threshold);
                if chart != last_chart {
                    last_chart = chart;
                    switches += 1;
                }
                let rhs = |t: f64, y: &[f64; 2]| {
                    let params = params.get(t);
                    let d = match chart {
                        Chart::Angles => angles_rhs(&params, y),
                        Chart::North => north_rhs(&params, y),
                        Chart::South => south_rhs(&params, y),
                    };
                    [sign * d[0], sign * d[1]]
                };
                let y = to_chart(*p, chart);
                let (next, err) = match cfg.scheme {
                    Scheme::Rk4 => (rk4_step(&rhs, t, &y, h), 0.0),
                    Scheme::Rk45Adaptive => {
                        let (next, e) = dopri5_step(&rhs, t, &y, h);
                        (next, scaled_error(&y, &next, &e, cfg.rel_tol))
                    }
                };
                (from_chart(&next, chart), err)
            },
            |_, _| Ok(()),
        )?;
        bloch.push(point);
    }
    stats.chart_switches = switches;

    let n = times.len();
    Ok(Trajectory {
        times,
        states: None,
        bloch,
        norm_drift: vec![0.0; n],
        source: TrajectorySource::Projected,
        stats,
    })
}

/// Projected integration of the equatorial scenario.
///
/// Starts from the instantaneous eigenstate `(π/2, 0)` unless `p_init` is given.
pub fn integrate_equatorial(
    sc: &EquatorialScenario,
    p_init: Option<BlochPoint>,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    sc.validate()?;
    let p = p_init.unwrap_or_else(|| BlochPoint::new(FRAC_PI_2, 0.0));
    let mut traj = integrate_projected(&sc.drive(), p, sc.t_end, cfg)?;
    traj.source = TrajectorySource::Equatorial;
    Ok(traj)
}

use num_complex::Complex64;

use super::ode::{dopri5_step, rk4_step, scaled_error, Marcher, Scheme, StepStats, TimeCache};
use super::{max_gap, IntegratorConfig, Trajectory, TrajectorySource};
use crate::drive::Drive;
use crate::error::{Error, Result};
use crate::geometry::{state_to_bloch, StateVector};
use crate::hamiltonian::HamiltonianMatrix;

/// `ψ̇ = -i H ψ` on `[Re ψ⁰, Im ψ⁰, Re ψ¹, Im ψ¹]`.
#[inline]
fn schrodinger_rhs(h: &HamiltonianMatrix, y: &[f64; 4]) -> [f64; 4] {
    let hp = h.apply([Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])]);
    // -i (a + ib) = b - ia
    [hp[0].im, -hp[0].re, hp[1].im, -hp[1].re]
}

fn to_state(y: &[f64; 4]) -> StateVector {
    StateVector::from_normalized(Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
}

/// Integrates both amplitudes of the Schrödinger equation.
///
/// The state is renormalized after every step; the norm error seen just
/// before renormalization is recorded per sample and must stay under
/// `cfg.norm_drift_limit`.
pub fn integrate_full<D: Drive + ?Sized>(
    drive: &D,
    psi_init: &StateVector,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let omega_max = max_gap(drive, t_end.max(0.0))?;
    cfg.validate(t_end, omega_max)?;
    let init_drift = (psi_init.norm() - 1.0).abs();
    if init_drift > 1e-12 {
        return Err(Error::InvalidConfig(format!(
            "initial state is not normalized (|ψ| - 1 = {init_drift:e})"
        )));
    }

    let times = cfg.sample_times(t_end, omega_max);
    let mut states = Vec::with_capacity(times.len());
    let mut bloch = Vec::with_capacity(times.len());
    let mut norm_drift = Vec::with_capacity(times.len());
    let mut stats = StepStats::default();

    let [a, b] = psi_init.amplitudes();
    let mut y = [a.re, a.im, b.re, b.im];
    states.push(*psi_init);
    bloch.push(state_to_bloch(psi_init)?);
    norm_drift.push(init_drift);

    let hamiltonian = TimeCache::new(|t| drive.hamiltonian(t));
    let f = |t: f64, y: &[f64; 4]| schrodinger_rhs(&hamiltonian.get(t), y);
    let mut marcher = Marcher::new(cfg.scheme, cfg.dt);
    let limit = cfg.norm_drift_limit;

    for w in times.windows(2) {
        let mut interval_drift = 0.0f64;
        marcher.cross(
            w[0],
            w[1],
            &mut y,
            &mut stats,
            |y, t, h| match cfg.scheme {
                Scheme::Rk4 => (rk4_step(&f, t, y, h), 0.0),
                Scheme::Rk45Adaptive => {
                    let (next, err) = dopri5_step(&f, t, y, h);
                    (next, scaled_error(y, &next, &err, cfg.rel_tol))
                }
            },
            |y, t| {
                let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                let drift = (norm - 1.0).abs();
                if !(drift <= limit) {
                    return Err(Error::NormDriftExceeded { drift, limit, t });
                }
                interval_drift = interval_drift.max(drift);
                y.iter_mut().for_each(|v| *v /= norm);
                Ok(())
            },
        )?;
        stats.max_norm_drift = stats.max_norm_drift.max(interval_drift);
        let s = to_state(&y);
        bloch.push(state_to_bloch(&s)?);
        states.push(s);
        norm_drift.push(interval_drift);
    }

    Ok(Trajectory {
        times,
        states: Some(states),
        bloch,
        norm_drift,
        source: TrajectorySource::FullState,
        stats,
    })
}

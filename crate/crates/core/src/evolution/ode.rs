//! Explicit Runge-Kutta steppers on fixed-size real state vectors.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Classical fourth-order Runge-Kutta at a fixed step no larger than `dt`.
    #[default]
    Rk4,
    /// Dormand-Prince 5(4) with step control; `dt` caps the step.
    Rk45Adaptive,
}

/// Counters accumulated over one integration run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StepStats {
    pub steps: u64,
    pub rejections: u64,
    pub max_norm_drift: f64,
    pub chart_switches: u64,
}

/// Memo of the last two values of an expensive function of time.
///
/// An RK4 step asks for its midpoint twice and for its end point again as
/// the start of the next step, so two slots halve the drive evaluations.
pub(crate) struct TimeCache<T: Copy, F: Fn(f64) -> T> {
    f: F,
    slots: Cell<[(f64, Option<T>); 2]>,
    oldest: Cell<usize>,
}

impl<T: Copy, F: Fn(f64) -> T> TimeCache<T, F> {
    pub fn new(f: F) -> Self {
        Self {
            f,
            slots: Cell::new([(f64::NAN, None); 2]),
            oldest: Cell::new(0),
        }
    }

    #[inline]
    pub fn get(&self, t: f64) -> T {
        let mut slots = self.slots.get();
        for (st, v) in &slots {
            if *st == t {
                if let Some(v) = v {
                    return *v;
                }
            }
        }
        let v = (self.f)(t);
        let i = self.oldest.get();
        slots[i] = (t, Some(v));
        self.slots.set(slots);
        self.oldest.set(1 - i);
        v
    }
}

/// Consecutive rejections tolerated before the adaptive scheme gives up.
pub const MAX_CONSECUTIVE_REJECTIONS: usize = 60;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let hc = h * c;
        for i in 0..N {
            out[i] += hc * k[i];
        }
    }
    out
}

#[inline]
pub(crate) fn rk4_step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &[(1.0, &k1)]));
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &[(1.0, &k2)]));
    let k4 = f(t + h, &axpy(y, h, &[(1.0, &k3)]));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// One Dormand-Prince step: fifth-order solution and the embedded error vector.
pub(crate) fn dopri5_step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> ([f64; N], [f64; N])
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(t, y);
    let k2 = f(t + h / 5.0, &axpy(y, h, &[(1.0 / 5.0, &k1)]));
    let k3 = f(
        t + 3.0 * h / 10.0,
        &axpy(y, h, &[(3.0 / 40.0, &k1), (9.0 / 40.0, &k2)]),
    );
    let k4 = f(
        t + 4.0 * h / 5.0,
        &axpy(y, h, &[(44.0 / 45.0, &k1), (-56.0 / 15.0, &k2), (32.0 / 9.0, &k3)]),
    );
    let k5 = f(
        t + 8.0 * h / 9.0,
        &axpy(
            y,
            h,
            &[
                (19372.0 / 6561.0, &k1),
                (-25360.0 / 2187.0, &k2),
                (64448.0 / 6561.0, &k3),
                (-212.0 / 729.0, &k4),
            ],
        ),
    );
    let k6 = f(
        t + h,
        &axpy(
            y,
            h,
            &[
                (9017.0 / 3168.0, &k1),
                (-355.0 / 33.0, &k2),
                (46732.0 / 5247.0, &k3),
                (49.0 / 176.0, &k4),
                (-5103.0 / 18656.0, &k5),
            ],
        ),
    );
    let y5 = axpy(
        y,
        h,
        &[
            (35.0 / 384.0, &k1),
            (500.0 / 1113.0, &k3),
            (125.0 / 192.0, &k4),
            (-2187.0 / 6784.0, &k5),
            (11.0 / 84.0, &k6),
        ],
    );
    let k7 = f(t + h, &y5);
    let zero = [0.0; N];
    let err = axpy(
        &zero,
        h,
        &[
            (71.0 / 57600.0, &k1),
            (-71.0 / 16695.0, &k3),
            (71.0 / 1920.0, &k4),
            (-17253.0 / 339200.0, &k5),
            (22.0 / 525.0, &k6),
            (-1.0 / 40.0, &k7),
        ],
    );
    (y5, err)
}

/// Error norm scaled so that 1.0 sits exactly at the tolerance.
pub(crate) fn scaled_error<const N: usize>(
    y: &[f64; N],
    y_new: &[f64; N],
    err: &[f64; N],
    rel_tol: f64,
) -> f64 {
    (0..N)
        .map(|i| err[i].abs() / (rel_tol * (1.0 + y[i].abs().max(y_new[i].abs()))))
        .fold(0.0, f64::max)
}

/// Advances an arbitrary state across sample intervals with either scheme.
///
/// The caller supplies `attempt(state, t, h) -> (candidate, scaled_error)`; the
/// error is ignored by the fixed-step scheme.
pub(crate) struct Marcher {
    scheme: Scheme,
    max_step: f64,
    next_step: f64,
}

impl Marcher {
    pub fn new(scheme: Scheme, max_step: f64) -> Self {
        Self {
            scheme,
            max_step,
            next_step: max_step,
        }
    }

    pub fn cross<S, A, C>(
        &mut self,
        t0: f64,
        t1: f64,
        state: &mut S,
        stats: &mut StepStats,
        mut attempt: A,
        mut accept: C,
    ) -> Result<()>
    where
        A: FnMut(&S, f64, f64) -> (S, f64),
        C: FnMut(&mut S, f64) -> Result<()>,
    {
        let span = t1 - t0;
        match self.scheme {
            Scheme::Rk4 => {
                let n = ((span / self.max_step) - 1e-9).ceil().max(1.0) as u64;
                let h = span / n as f64;
                let mut t = t0;
                for k in 0..n {
                    let t_new = if k + 1 == n { t1 } else { t0 + (k + 1) as f64 * h };
                    // t + (t_new - t) lands on t_new, so step ends and starts coincide
                    let (next, _) = attempt(state, t, t_new - t);
                    *state = next;
                    stats.steps += 1;
                    accept(state, t_new)?;
                    t = t_new;
                }
                Ok(())
            }
            Scheme::Rk45Adaptive => {
                let mut t = t0;
                let mut in_a_row = 0usize;
                let eps = 1e-13 * t1.abs().max(span);
                while t1 - t > eps {
                    let remaining = t1 - t;
                    let h = self.next_step.min(self.max_step);
                    let last = h >= remaining;
                    let h = h.min(remaining);
                    let (candidate, err) = attempt(state, t, h);
                    if err <= 1.0 {
                        *state = candidate;
                        t = if last { t1 } else { t + h };
                        stats.steps += 1;
                        in_a_row = 0;
                        let factor = if err == 0.0 {
                            5.0
                        } else {
                            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        if !last {
                            self.next_step = h * factor;
                        } else {
                            self.next_step = self.next_step.max(h * factor);
                        }
                        accept(state, t)?;
                    } else {
                        stats.rejections += 1;
                        in_a_row += 1;
                        if in_a_row > MAX_CONSECUTIVE_REJECTIONS || !err.is_finite() {
                            return Err(Error::StepRejectionExhausted {
                                rejections: in_a_row,
                                t,
                            });
                        }
                        self.next_step = h * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                    }
                }
                Ok(())
            }
        }
    }
}

//! Scalar functions of time used to build drives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicTerm {
    pub amplitude: f64,
    pub frequency: f64,
    #[serde(default)]
    pub phase: f64,
}

/// A closed-form or tabulated real function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Schedule {
    Constant {
        value: f64,
    },
    Linear {
        start: f64,
        rate: f64,
    },
    /// `offset + rate·t + Σ amplitude·sin(frequency·t + phase)`.
    Harmonic {
        offset: f64,
        #[serde(default)]
        rate: f64,
        terms: Vec<HarmonicTerm>,
    },
    /// Piecewise-linear interpolation, held constant outside the table.
    Table {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Schedule {
    pub fn constant(value: f64) -> Self {
        Schedule::Constant { value }
    }

    pub fn linear(start: f64, rate: f64) -> Self {
        Schedule::Linear { start, rate }
    }

    pub fn table(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Schedule::Table { times, values };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |x: f64| x.is_finite();
        let ok = match self {
            Schedule::Constant { value } => finite(*value),
            Schedule::Linear { start, rate } => finite(*start) && finite(*rate),
            Schedule::Harmonic {
                offset,
                rate,
                terms,
            } => {
                finite(*offset)
                    && finite(*rate)
                    && terms
                        .iter()
                        .all(|h| finite(h.amplitude) && finite(h.frequency) && finite(h.phase))
            }
            Schedule::Table { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::InvalidConfig(format!(
                        "schedule table needs matching non-empty columns (got {} times, {} values)",
                        times.len(),
                        values.len()
                    )));
                }
                if times.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidConfig(
                        "schedule table times must be strictly increasing".into(),
                    ));
                }
                times.iter().chain(values).all(|x| x.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig("schedule has non-finite parameters".into()))
        }
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Schedule::Constant { value } => *value,
            Schedule::Linear { start, rate } => start + rate * t,
            Schedule::Harmonic {
                offset,
                rate,
                terms,
            } => {
                offset
                    + rate * t
                    + terms
                        .iter()
                        .map(|h| h.amplitude * (h.frequency * t + h.phase).sin())
                        .sum::<f64>()
            }
            Schedule::Table { times, values } => interpolate(times, values, t),
        }
    }
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let n = times.len();
    if t <= times[0] {
        return values[0];
    }
    if t >= times[n - 1] {
        return values[n - 1];
    }
    // first index with times[i] > t
    let i = times.partition_point(|&x| x <= t);
    let (t0, t1) = (times[i - 1], times[i]);
    let (v0, v1) = (values[i - 1], values[i]);
    v0 + (v1 - v0) * (t - t0) / (t1 - t0)
}

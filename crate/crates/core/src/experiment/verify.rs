use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    energy_uncertainty, energy_uncertainty_series, fs_speed_series, passage_check,
    pendulum_energy, speed_identity,
};
use crate::drive::{random_smooth_drive, AxisPath, GeometricDrive};
use crate::error::{Error, Result};
use crate::evolution::{
    integrate_full, integrate_pendulum, integrate_projected_variant, sup_fs_distance,
    EquatorialScenario, IntegratorConfig, ProjectedVariant,
};
use crate::geometry::{
    antipode, bloch_to_state, central_angle, fs_distance, inner_product, inverse_stereographic,
    state_to_bloch, stereographic, BlochPoint,
};
use crate::hamiltonian::{eigen_bloch, eigenvalues, gauge_shift, relabel, HamiltonianMatrix};
use crate::schedule::{HarmonicTerm, Schedule};

use super::run::ORACLE_LIMIT;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Negates the projected vector field; the oracle check must notice.
    pub inject_sign_flip: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest error measure seen (for bounds: largest shortfall).
    pub worst: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub cases: usize,
    pub checks: Vec<CheckSummary>,
    pub failed: usize,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

const CHECKS: [(&str, f64); 9] = [
    ("state_round_trip", 1e-12),
    ("stereographic_round_trip", 1e-10),
    ("antipodal_orthogonality", 1e-12),
    ("gauge_invariance", 1e-12),
    ("eigen_structure", 1e-12),
    ("oracle_equivalence", ORACLE_LIMIT),
    ("speed_identity", 0.0),
    ("passage_bound", 1e-6),
    ("pendulum_energy", 1e-8),
];

/// Random point uniform on the sphere.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R) -> BlochPoint {
    let z: f64 = rng.gen_range(-1.0..1.0);
    BlochPoint::new(z.acos(), rng.gen_range(0.0..TAU))
}

/// Random Hermitian matrix with entries of order one.
pub fn random_hamiltonian<R: Rng + ?Sized>(rng: &mut R) -> HamiltonianMatrix {
    HamiltonianMatrix::new(
        rng.gen_range(-2.0..2.0),
        rng.gen_range(-2.0..2.0),
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    )
}

/// A run from some state to its antipode under a fixed axis with a
/// fluctuating gap `ω̄(1 + a sin(f t + p))`.
#[derive(Debug, Clone)]
pub struct PassageCase {
    pub drive: GeometricDrive,
    pub start: BlochPoint,
    /// First time with `∫ω dt = π`.
    pub duration: f64,
}

/// Draws a [`PassageCase`]; the duration is found by bisection on the
/// closed-form integral of the gap.
pub fn random_passage_case<R: Rng + ?Sized>(rng: &mut R) -> PassageCase {
    let mean = rng.gen_range(0.5..2.0);
    let a = rng.gen_range(0.0..0.8);
    let f = rng.gen_range(0.5..2.0) * mean;
    let p = rng.gen_range(0.0..TAU);
    let phase = |t: f64| mean * (t + a / f * (p.cos() - (f * t + p).cos()));
    let (mut lo, mut hi) = (0.0, PI / (mean * (1.0 - a)));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phase(mid) < PI {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let axis = random_point(rng);
    let n = axis.to_unit_vector();
    let helper = if n[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let u = crate::geometry::cross(n, helper);
    let start = BlochPoint::from_vector(u);
    let drive = GeometricDrive {
        omega: Schedule::Harmonic {
            offset: mean,
            rate: 0.0,
            terms: vec![HarmonicTerm {
                amplitude: a * mean,
                frequency: f,
                phase: p,
            }],
        },
        axis: AxisPath::Angles {
            theta: Schedule::constant(axis.theta()),
            phi: Schedule::constant(axis.phi()),
        },
    };
    PassageCase {
        drive,
        start,
        duration: 0.5 * (lo + hi),
    }
}

type CaseResult = [(bool, f64); 9];

fn run_case(seed: u64, index: usize, opts: VerifyOptions) -> Result<CaseResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);

    let p = random_point(&mut rng);
    let alpha = rng.gen_range(0.0..TAU);
    let back = state_to_bloch(&bloch_to_state(p).with_global_phase(alpha))?;
    let rt = central_angle(p, back);

    let stereo = central_angle(p, inverse_stereographic(stereographic(p)));

    let q = antipode(p);
    let orth = inner_product(&bloch_to_state(p), &bloch_to_state(q))
        .norm()
        .max((fs_distance(p, q) - FRAC_PI_2).abs());

    let h = random_hamiltonian(&mut rng);
    let shift = rng.gen_range(-5.0..5.0);
    let hs = gauge_shift(&h, shift);
    let s = bloch_to_state(random_point(&mut rng));
    let e = eigen_bloch(&h)?;
    let (pa, pb) = (relabel(&h), relabel(&hs));
    let gauge = central_angle(e, eigen_bloch(&hs)?)
        .max((pa.omega_diag - pb.omega_diag).abs())
        .max((pa.r - pb.r).abs())
        .max((energy_uncertainty(&s, &h)? - energy_uncertainty(&s, &hs)?).abs());

    let (e0, _) = eigenvalues(&h);
    let v = bloch_to_state(e);
    let hv = h.apply(v.amplitudes());
    let eig = (hv[0] - v.psi0() * e0).norm().max((hv[1] - v.psi1() * e0).norm());

    let scale = rng.gen_range(0.5..2.0);
    let drive = random_smooth_drive(&mut rng, scale);
    let start = random_point(&mut rng);
    let t_end = rng.gen_range(5.0..15.0);
    let w_max = crate::evolution::max_gap(&drive, t_end)?;
    let cfg = IntegratorConfig::for_gap(w_max);
    let full = integrate_full(&drive, &bloch_to_state(start), t_end, &cfg)?;
    let variant = if opts.inject_sign_flip {
        ProjectedVariant::SignFlipped
    } else {
        ProjectedVariant::Standard
    };
    let proj = integrate_projected_variant(&drive, start, t_end, &cfg, variant)?;
    let oracle = sup_fs_distance(&full, &proj)?;

    let speed = speed_identity(
        &fs_speed_series(&full)?,
        &energy_uncertainty_series(&full, &drive)?,
    );

    let pc = random_passage_case(&mut rng);
    let pcfg = IntegratorConfig::for_gap(crate::evolution::max_gap(&pc.drive, pc.duration)?);
    let ptraj = integrate_full(&pc.drive, &bloch_to_state(pc.start), pc.duration, &pcfg)?;
    let shortfall = match passage_check(&ptraj, &pc.drive) {
        Ok(r) => (FRAC_PI_2 - r.passage_product).max(0.0),
        Err(Error::NotApplicable { overlap }) => overlap,
        Err(e) => return Err(e),
    };

    let ratio = rng.gen_range(10.0..100.0);
    let sc = EquatorialScenario::from_ratio(1.0, ratio);
    let sc = EquatorialScenario {
        t_end: TAU / sc.capital_omega,
        ..sc
    };
    let pend = integrate_pendulum(&sc, &IntegratorConfig::for_gap(1.0))?;
    let en0 = pendulum_energy(&pend.states[0], 1.0);
    let drift = pend
        .states
        .iter()
        .map(|s| (pendulum_energy(s, 1.0) - en0).abs() / en0.abs())
        .fold(0.0, f64::max);

    let ok = |x: f64, k: usize| (x <= CHECKS[k].1, x);
    Ok([
        ok(rt, 0),
        ok(stereo, 1),
        ok(orth, 2),
        ok(gauge, 3),
        ok(eig, 4),
        ok(oracle, 5),
        (speed.passed, speed.max_abs_error),
        ok(shortfall, 7),
        ok(drift, 8),
    ])
}

/// Randomized property checks across every module; deterministic in `seed`.
pub fn verify(seed: u64, n_cases: usize) -> Result<VerificationReport> {
    verify_with(seed, n_cases, VerifyOptions::default())
}

pub fn verify_with(seed: u64, n_cases: usize, opts: VerifyOptions) -> Result<VerificationReport> {
    if n_cases == 0 {
        return Err(Error::InvalidConfig("cases must be at least 1".into()));
    }
    let results: Vec<Option<CaseResult>> = (0..n_cases)
        .into_par_iter()
        .map(|i| run_case(seed, i, opts).ok())
        .collect();
    let mut checks: Vec<CheckSummary> = CHECKS
        .iter()
        .map(|(name, tol)| CheckSummary {
            name: name.to_string(),
            cases: n_cases,
            failures: 0,
            worst: 0.0,
            tolerance: *tol,
        })
        .collect();
    let mut errored = 0;
    for r in &results {
        match r {
            Some(r) => {
                for (c, (passed, value)) in checks.iter_mut().zip(r) {
                    if !passed {
                        c.failures += 1;
                    }
                    c.worst = c.worst.max(*value);
                }
            }
            None => errored += 1,
        }
    }
    if errored > 0 {
        checks.push(CheckSummary {
            name: "case_completed".into(),
            cases: n_cases,
            failures: errored,
            worst: errored as f64,
            tolerance: 0.0,
        });
    }
    let failed = checks.iter().map(|c| c.failures).sum();
    Ok(VerificationReport {
        seed,
        cases: n_cases,
        checks,
        failed,
    })
}

/// One line per check.
pub fn format_verification(report: &VerificationReport) -> String {
    let mut out = String::new();
    for c in &report.checks {
        out.push_str(&format!(
            "{:<26} {} {:>4}/{:<4} worst {:.3e} (tol {:.1e})\n",
            c.name,
            if c.failures == 0 { "PASS" } else { "FAIL" },
            c.cases - c.failures,
            c.cases,
            c.worst,
            c.tolerance
        ));
    }
    out
}

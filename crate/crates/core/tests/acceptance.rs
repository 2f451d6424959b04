//! Acceptance suite. Runs every criterion in sequence and prints one
//! PASS/FAIL line per criterion; exits non-zero if any failed.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use bloch_adiabatic::diagnostics::{
    energy_uncertainty_series, fs_speed_series, passage_check, pendulum_energy, speed_identity,
    SpeedIdentity,
};
use bloch_adiabatic::drive::{
    geometric_to_params, random_smooth_drive, AxisPath, Drive, GeometricDrive,
};
use bloch_adiabatic::evolution::{
    integrate_full, integrate_pendulum, integrate_projected, max_gap, sup_fs_distance,
    to_pendulum_coords, EquatorialScenario, IntegratorConfig, Trajectory,
};
use bloch_adiabatic::experiment::{config_for_ratio, execute, ExperimentConfig, RunOutcome};
use bloch_adiabatic::geometry::{
    angle_diff, antipode, bloch_to_state, inner_product, inverse_stereographic, state_to_bloch,
    stereographic, BlochPoint,
};
use bloch_adiabatic::hamiltonian::{
    eigen_bloch, eigenvalues, gauge_shift, instantaneous_gap, params_to_matrix, relabel,
    HamiltonianMatrix,
};
use bloch_adiabatic::schedule::{HarmonicTerm, Schedule};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RATIOS: [f64; 3] = [10.0, 100.0, 1000.0];

struct Suite {
    failed: usize,
    speed: Vec<(String, SpeedIdentity)>,
}

impl Suite {
    fn line(&mut self, id: &str, pass: bool, detail: String) {
        if !pass {
            self.failed += 1;
        }
        println!("{} [{id}] {detail}", if pass { "PASS" } else { "FAIL" });
    }

    fn record_speed(&mut self, label: impl Into<String>, traj: &Trajectory, drive: &dyn Drive) {
        let s = speed_identity(
            &fs_speed_series(traj).unwrap(),
            &energy_uncertainty_series(traj, drive).unwrap(),
        );
        self.speed.push((label.into(), s));
    }
}

struct SweepRun {
    ratio: f64,
    outcome: RunOutcome,
    seconds: f64,
}

fn within(measured: f64, target: f64, rel: f64) -> bool {
    (measured - target).abs() <= rel * target
}

fn uniform_point(rng: &mut ChaCha8Rng) -> BlochPoint {
    let z: f64 = rng.gen_range(-1.0..1.0);
    BlochPoint::new(z.acos(), rng.gen_range(0.0..TAU))
}

fn criterion_1(suite: &mut Suite) -> Vec<SweepRun> {
    let base = ExperimentConfig::equatorial(1.0, 0.1);
    let runs: Vec<SweepRun> = RATIOS
        .iter()
        .map(|&ratio| {
            let cfg = config_for_ratio(&base, ratio).unwrap();
            let start = Instant::now();
            let outcome = execute(&cfg).unwrap();
            SweepRun {
                ratio,
                outcome,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for r in &runs {
        let s = &r.outcome.summary;
        let dev_ok = within(s.max_eigen_deviation, 1.0 / r.ratio, 0.25);
        let eps_ok = within(s.max_abs_eps, 2.0 / r.ratio, 0.25);
        let time_ok = r.seconds < 10.0;
        pass &= dev_ok && eps_ok && time_ok;
        parts.push(format!(
            "ratio {}: dev {:.4e} (target {:.0e}), max|θ-π/2| {:.4e} (target {:.0e}), {:.2}s",
            r.ratio,
            s.max_eigen_deviation,
            1.0 / r.ratio,
            s.max_abs_eps,
            2.0 / r.ratio,
            r.seconds
        ));
    }
    suite.line("1 sweep envelope", pass, parts.join("; "));
    for r in &runs {
        let drive = GeometricDrive::equatorial(1.0, 1.0 / r.ratio);
        suite.record_speed(format!("sweep {}", r.ratio), &r.outcome.full, &drive);
    }
    runs
}

fn criterion_2(suite: &mut Suite, sweep: &[SweepRun]) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let scale = rng.gen_range(0.5..2.0);
        let drive = random_smooth_drive(&mut rng, scale);
        let p0 = uniform_point(&mut rng);
        let t_end = rng.gen_range(10.0..30.0);
        let w = max_gap(&drive, t_end).unwrap();
        let cfg = IntegratorConfig::for_gap(w).with_dt(1e-3 / w);
        let full = integrate_full(&drive, &bloch_to_state(p0), t_end, &cfg).unwrap();
        let proj = integrate_projected(&drive, p0, t_end, &cfg).unwrap();
        worst = worst.max(sup_fs_distance(&full, &proj).unwrap());
        suite.record_speed(format!("random drive {i}"), &full, &drive);
    }
    let random_seconds = start.elapsed().as_secs_f64();
    let sweep_worst = sweep
        .iter()
        .map(|r| r.outcome.summary.oracle_distance)
        .fold(0.0, f64::max);
    let sweep_seconds: f64 = sweep.iter().map(|r| r.seconds).sum();
    let total = random_seconds + sweep_seconds;
    suite.line(
        "2 oracle equivalence",
        worst < 1e-6 && sweep_worst < 1e-6 && total < 120.0,
        format!(
            "50 random drives sup FS {worst:.3e}, sweep sup FS {sweep_worst:.3e} (limit 1e-6), {total:.1}s"
        ),
    );
}

/// Gap `ω̄(1 + a sin(f t + p))` about a random fixed axis, started on the
/// great circle orthogonal to it and stopped when the accumulated phase is π.
fn passage_case(rng: &mut ChaCha8Rng) -> (GeometricDrive, BlochPoint, f64) {
    let mean = rng.gen_range(0.5..2.0);
    let a = rng.gen_range(0.0..0.8);
    let f = rng.gen_range(0.5..2.0) * mean;
    let p = rng.gen_range(0.0..TAU);
    let accumulated = |t: f64| mean * t + mean * a / f * (p.cos() - (f * t + p).cos());
    let (mut lo, mut hi) = (0.0f64, 2.0 * PI / mean);
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if accumulated(mid) < PI {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let axis = uniform_point(rng);
    // rotate the axis by π/2 along its meridian
    let start = BlochPoint::new(axis.theta() + FRAC_PI_2, axis.phi());
    let drive = GeometricDrive {
        omega: Schedule::Harmonic {
            offset: mean,
            rate: 0.0,
            terms: vec![HarmonicTerm {
                amplitude: mean * a,
                frequency: f,
                phase: p,
            }],
        },
        axis: AxisPath::Angles {
            theta: Schedule::constant(axis.theta()),
            phi: Schedule::constant(axis.phi()),
        },
    };
    (drive, start, 0.5 * (lo + hi))
}

fn criterion_4(suite: &mut Suite) {
    let drive = GeometricDrive::fixed(2.0, BlochPoint::NORTH);
    let p0 = BlochPoint::new(FRAC_PI_2, 0.0);
    let t = PI / 2.0;
    let traj = integrate_full(&drive, &bloch_to_state(p0), t, &IntegratorConfig::for_gap(2.0)).unwrap();
    let sat = passage_check(&traj, &drive).unwrap();
    let sat_ok = (sat.passage_product - FRAC_PI_2).abs() <= 1e-6;
    suite.record_speed("passage saturation", &traj, &drive);

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut violations = 0;
    let mut not_orthogonal = 0;
    let mut min_product = f64::INFINITY;
    for i in 0..1000 {
        let (drive, start, duration) = passage_case(&mut rng);
        let w = max_gap(&drive, duration).unwrap();
        let traj =
            integrate_full(&drive, &bloch_to_state(start), duration, &IntegratorConfig::for_gap(w))
                .unwrap();
        match passage_check(&traj, &drive) {
            Ok(r) => {
                min_product = min_product.min(r.passage_product);
                if r.passage_product < FRAC_PI_2 - 1e-6 {
                    violations += 1;
                }
            }
            Err(_) => not_orthogonal += 1,
        }
        if i % 100 == 0 {
            suite.record_speed(format!("passage {i}"), &traj, &drive);
        }
    }
    suite.line(
        "4 passage bound",
        sat_ok && violations == 0 && not_orthogonal == 0,
        format!(
            "saturation δE̅Δt - π/2 = {:.3e}; 1000 random runs: min δE̅Δt - π/2 = {:.3e}, {violations} violations, {not_orthogonal} not orthogonal",
            sat.passage_product - FRAC_PI_2,
            min_product - FRAC_PI_2
        ),
    );
}

fn criterion_5(suite: &mut Suite, sweep: &[SweepRun]) {
    let mut eta_pass = true;
    let mut eta_parts = Vec::new();
    let mut energy_pass = true;
    let mut energy_parts = Vec::new();
    let mut turn_pass = true;
    let mut turn_parts = Vec::new();
    for r in sweep {
        let sc = EquatorialScenario::from_ratio(1.0, r.ratio);
        let cfg = IntegratorConfig::for_gap(1.0);
        let pend = integrate_pendulum(&sc, &cfg).unwrap();
        let exact = to_pendulum_coords(&r.outcome.full, sc.capital_omega).unwrap();
        let eta_max = 2.0 * (sc.capital_omega / sc.omega0).asin();
        let period = TAU / sc.capital_omega;

        let mismatch = |limit: f64| {
            exact
                .iter()
                .zip(&pend.states)
                .zip(&pend.times)
                .filter(|(_, t)| **t <= limit * (1.0 + 1e-12))
                .map(|((a, b), _)| (a.eta - b.eta).abs())
                .fold(0.0, f64::max)
                / eta_max
        };
        let one_period = mismatch(period);
        let whole = mismatch(sc.t_end);
        eta_pass &= one_period <= 0.05;
        eta_parts.push(format!(
            "ratio {}: {:.2}% over one drive period ({:.2}% over the run)",
            r.ratio,
            100.0 * one_period,
            100.0 * whole
        ));

        let e0 = 2.0 * sc.capital_omega.powi(2) - sc.omega0.powi(2);
        let start_ok = (pendulum_energy(&pend.states[0], sc.omega0) - e0).abs() <= 1e-15;
        let drift = pend
            .states
            .iter()
            .map(|s| (pendulum_energy(s, sc.omega0) - e0).abs() / e0.abs())
            .fold(0.0, f64::max);
        energy_pass &= start_ok && drift <= 1e-8;
        energy_parts.push(format!("ratio {}: max drift {:.2e}", r.ratio, drift));

        let peak = pend.states.iter().map(|s| s.eta.abs()).fold(0.0, f64::max);
        let rel = (peak - eta_max).abs() / eta_max;
        turn_pass &= rel <= 0.01;
        turn_parts.push(format!("ratio {}: {:.3e} vs {:.3e} ({:.3}%)", r.ratio, peak, eta_max, 100.0 * rel));
    }
    suite.line(
        "5a pendulum η tracks the exact run (5% of η_max)",
        eta_pass,
        eta_parts.join("; "),
    );
    suite.line(
        "5b pendulum energy 2Ω² - ω₀² conserved (1e-8)",
        energy_pass,
        energy_parts.join("; "),
    );
    suite.line(
        "5c turning points 2·asin(Ω/ω₀) (1%)",
        turn_pass,
        turn_parts.join("; "),
    );
}

/// Roots of `λ² - tr·λ + det` by bisection, bracketed on either side of `tr/2`.
fn char_poly_roots(h: &HamiltonianMatrix) -> (f64, f64) {
    let p = |x: f64| (x - h.h00) * (x - h.h11) - h.h01.norm_sqr();
    let mid = 0.5 * (h.h00 + h.h11);
    let bound = h.h00.abs() + h.h11.abs() + 2.0 * h.h01.norm() + 1.0;
    let root = |mut inside: f64, mut outside: f64| {
        // p(inside) ≤ 0 < p(outside)
        for _ in 0..200 {
            let m = 0.5 * (inside + outside);
            if m == inside || m == outside {
                break;
            }
            if p(m) <= 0.0 {
                inside = m;
            } else {
                outside = m;
            }
        }
        0.5 * (inside + outside)
    };
    (root(mid, mid + bound), root(mid, mid - bound))
}

fn criterion_6(suite: &mut Suite) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 10_000;
    let mut fails = [0usize; 6];
    let mut worst = [0.0f64; 6];
    let mut note = |k: usize, err: f64, tol: f64, fails: &mut [usize; 6]| {
        worst[k] = worst[k].max(err);
        if !(err <= tol) {
            fails[k] += 1;
        }
    };
    for _ in 0..n {
        // round trip through a state with an arbitrary global phase
        let p = uniform_point(&mut rng);
        let alpha = rng.gen_range(0.0..TAU);
        let back = state_to_bloch(&bloch_to_state(p).with_global_phase(alpha)).unwrap();
        let phi_err = if p.theta() > 1e-6 && p.theta() < PI - 1e-6 {
            angle_diff(back.phi(), p.phi()).abs()
        } else {
            0.0
        };
        note(0, (back.theta() - p.theta()).abs().max(phi_err), 1e-10, &mut fails);
        let s = inverse_stereographic(stereographic(p));
        let phi_err = if p.theta() > 1e-6 && p.theta() < PI - 1e-6 {
            angle_diff(s.phi(), p.phi()).abs()
        } else {
            0.0
        };
        note(1, (s.theta() - p.theta()).abs().max(phi_err), 1e-12, &mut fails);

        let q = antipode(p);
        note(2, inner_product(&bloch_to_state(p), &bloch_to_state(q)).norm(), 1e-12, &mut fails);

        let h = HamiltonianMatrix::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
        let f = rng.gen_range(-3.0..3.0);
        let hs = gauge_shift(&h, f);
        let (a, b) = (relabel(&h), relabel(&hs));
        let e = eigen_bloch(&h).unwrap();
        let es = eigen_bloch(&hs).unwrap();
        let gauge = (a.omega_diag - b.omega_diag)
            .abs()
            .max((a.r - b.r).abs())
            .max(angle_diff(a.lambda, b.lambda).abs())
            .max((e.theta() - es.theta()).abs())
            .max(angle_diff(e.phi(), es.phi()).abs());
        note(3, gauge, 1e-12, &mut fails);

        // eigen-structure: eigenvalues vs characteristic polynomial, the
        // eigenket equation, and antipodality of the lower eigenstate
        let (e0, e1) = eigenvalues(&h);
        let (r0, r1) = char_poly_roots(&h);
        let scale = e0.abs().max(e1.abs());
        let eig_val = ((e0 - r0).abs().max((e1 - r1).abs())) / scale;
        let v = bloch_to_state(e);
        let hv = h.apply(v.amplitudes());
        let residual = (hv[0] - v.psi0() * e0).norm().max((hv[1] - v.psi1() * e0).norm()) / scale;
        let lower = eigen_bloch(&h.negated()).unwrap();
        let anti = antipode(e);
        let anti_err = (lower.theta() - anti.theta())
            .abs()
            .max(if anti.theta() > 1e-6 && anti.theta() < PI - 1e-6 {
                angle_diff(lower.phi(), anti.phi()).abs()
            } else {
                0.0
            });
        note(4, eig_val.max(residual), 1e-12, &mut fails);
        note(4, anti_err, 1e-10, &mut fails);

        // conversion cycle through a random geometric drive
        let g = random_smooth_drive(&mut rng, 1.0);
        let t = rng.gen_range(0.0..50.0);
        let sample = g.sample(t);
        let m = params_to_matrix(&geometric_to_params(&g, t), rng.gen_range(-2.0..2.0));
        let back = eigen_bloch(&m).unwrap();
        let cyc = (back.theta() - sample.axis.theta())
            .abs()
            .max(angle_diff(back.phi(), sample.axis.phi()).abs())
            .max((instantaneous_gap(&m) - sample.omega).abs());
        note(5, cyc, 1e-10, &mut fails);
    }
    let seconds = start.elapsed().as_secs_f64();
    let names = [
        "round-trip",
        "stereographic",
        "antipodal-orthogonality",
        "gauge",
        "eigen-structure",
        "conversion-cycle",
    ];
    let detail = names
        .iter()
        .zip(fails.iter().zip(&worst))
        .map(|(n, (f, w))| format!("{n} {f} fails (worst {w:.1e})"))
        .collect::<Vec<_>>()
        .join(", ");
    suite.line(
        "6 geometry suite (10⁴ cases)",
        fails.iter().all(|f| *f == 0) && seconds < 30.0,
        format!("{detail}; {seconds:.2}s"),
    );
}

fn criterion_7(suite: &mut Suite) {
    let capital_omega = 1.3;
    let drive = GeometricDrive::fixed(capital_omega, BlochPoint::NORTH);
    let p0 = BlochPoint::new(1.1, 0.4);
    let t_end = 100.0 * TAU / capital_omega;
    let cfg = IntegratorConfig::for_gap(capital_omega);
    let check = |traj: &Trajectory| {
        let mut theta_err = 0.0f64;
        let mut slope_err = 0.0f64;
        let mut unwrapped = p0.phi();
        let mut prev = p0.phi();
        for (t, p) in traj.times.iter().zip(&traj.bloch) {
            unwrapped += angle_diff(p.phi(), prev);
            prev = p.phi();
            theta_err = theta_err.max((p.theta() - p0.theta()).abs());
            if *t > 0.0 {
                let expected = capital_omega * t;
                slope_err = slope_err.max(((unwrapped - p0.phi()) - expected).abs() / expected);
            }
        }
        (theta_err, slope_err)
    };
    let proj = integrate_projected(&drive, p0, t_end, &cfg).unwrap();
    let full = integrate_full(&drive, &bloch_to_state(p0), t_end, &cfg).unwrap();
    let (tp, sp) = check(&proj);
    let (tf, sf) = check(&full);
    suite.record_speed("autonomous", &full, &drive);
    suite.line(
        "7 autonomous solution (100 periods)",
        tp.max(tf) <= 1e-9 && sp.max(sf) <= 1e-9,
        format!(
            "projected: |Δθ| {tp:.2e}, slope rel {sp:.2e}; full: |Δθ| {tf:.2e}, slope rel {sf:.2e}"
        ),
    );
}

fn criterion_3(suite: &mut Suite) {
    let failures: Vec<&str> = suite
        .speed
        .iter()
        .filter(|(_, s)| !s.passed)
        .map(|(l, _)| l.as_str())
        .collect();
    let worst = suite
        .speed
        .iter()
        .map(|(_, s)| s.max_abs_error / s.tolerance)
        .fold(0.0, f64::max);
    let pass = failures.is_empty();
    let detail = format!(
        "{} runs, worst error/tolerance {:.3}{}",
        suite.speed.len(),
        worst,
        if pass {
            String::new()
        } else {
            format!(", failing: {}", failures.join(", "))
        }
    );
    suite.line("3 speed identity", pass, detail);
}

fn main() -> ExitCode {
    let mut suite = Suite {
        failed: 0,
        speed: Vec::new(),
    };
    let sweep = criterion_1(&mut suite);
    criterion_2(&mut suite, &sweep);
    criterion_4(&mut suite);
    criterion_5(&mut suite, &sweep);
    criterion_6(&mut suite);
    criterion_7(&mut suite);
    criterion_3(&mut suite);
    if suite.failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", suite.failed);
        ExitCode::FAILURE
    }
}

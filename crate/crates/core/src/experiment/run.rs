use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ResolvedExperiment};
use crate::diagnostics::{
    libration_bound, relative_coords, DiagnosticsReport, EigenBranch, PassageReport,
    SpeedIdentity,
};
use crate::drive::Drive;
use crate::error::{Error, Result};
use crate::evolution::{
    integrate_full, integrate_pendulum, integrate_projected, sup_fs_distance,
    to_pendulum_coords, StepStats, Trajectory,
};
use crate::geometry::bloch_to_state;

/// Largest tolerated Fubini-Study distance between the two integrators.
pub const ORACLE_LIMIT: f64 = 1e-6;

/// Trajectory CSV header.
pub const CSV_COLUMNS: [&str; 11] = [
    "t",
    "theta",
    "phi",
    "theta_prime",
    "phi_prime",
    "eps",
    "eta",
    "delta_e",
    "fs_speed",
    "eigen_deviation",
    "norm_drift",
];

/// Envelope comparison for equatorial runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumCheck {
    pub ratio: f64,
    pub eta_max_predicted: f64,
    pub eps_max_predicted: f64,
    pub eps_max_measured: f64,
    /// `Ω/ω₀`, the predicted peak eigen-deviation.
    pub eigen_deviation_predicted: f64,
    pub eigen_deviation_measured: f64,
    /// Largest `|η_exact - η_pendulum|` as a fraction of `η_max`.
    pub eta_mismatch: f64,
    pub within_envelope: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub samples: usize,
    pub t_end: f64,
    pub max_eigen_deviation: f64,
    pub max_abs_eps: f64,
    pub oracle_distance: f64,
    pub delta_e_bar: f64,
    pub delta_s: f64,
    pub passage: Option<PassageReport>,
    pub speed_identity: SpeedIdentity,
    pub pendulum: Option<PendulumCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub dt: f64,
    pub full: StepStats,
    pub projected: StepStats,
}

/// Everything reported about one run, written as JSON beside the trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub trajectory: PathBuf,
    pub summary: RunSummary,
    pub stats: IntegratorStats,
    pub wall_clock_seconds: f64,
    /// Choices made here rather than prescribed by the model.
    pub notes: Vec<String>,
}

/// Output of [`execute`] before anything is written.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub resolved: ResolvedExperiment,
    pub full: Trajectory,
    pub projected: Trajectory,
    pub diagnostics: DiagnosticsReport,
    pub eps: Vec<f64>,
    pub eta: Vec<f64>,
    pub summary: RunSummary,
}

/// Integrates, cross-checks and diagnoses without touching the file system.
pub fn execute(config: &ExperimentConfig) -> Result<RunOutcome> {
    let resolved = config.resolve()?;
    if let Some(sc) = &resolved.scenario {
        libration_bound(sc.omega0, sc.capital_omega)?;
    }
    let drive = &resolved.drive;
    let cfg = &resolved.integrator;
    let full = integrate_full(drive, &bloch_to_state(resolved.initial), resolved.t_end, cfg)?;
    let projected = integrate_projected(drive, resolved.initial, resolved.t_end, cfg)?;
    let distance = sup_fs_distance(&full, &projected)?;
    if !(distance <= ORACLE_LIMIT) {
        return Err(Error::OracleMismatch {
            distance,
            limit: ORACLE_LIMIT,
        });
    }

    let diagnostics =
        DiagnosticsReport::compute(&full, drive, EigenBranch::Upper, resolved.scenario.as_ref())?;
    let (eps, eta) = relative_coords(&full, drive)?;
    let max_abs_eps = eps.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let max_eigen_deviation = diagnostics.max_eigen_deviation();

    let pendulum = match &resolved.scenario {
        Some(sc) => Some(pendulum_check(
            sc,
            &full,
            cfg,
            max_abs_eps,
            max_eigen_deviation,
        )?),
        None => None,
    };

    let summary = RunSummary {
        samples: full.len(),
        t_end: resolved.t_end,
        max_eigen_deviation,
        max_abs_eps,
        oracle_distance: distance,
        delta_e_bar: diagnostics.delta_e_bar,
        delta_s: diagnostics.delta_s,
        passage: diagnostics.passage,
        speed_identity: diagnostics.speed_identity,
        pendulum,
    };
    Ok(RunOutcome {
        resolved,
        full,
        projected,
        diagnostics,
        eps,
        eta,
        summary,
    })
}

fn pendulum_check(
    sc: &crate::evolution::EquatorialScenario,
    full: &Trajectory,
    cfg: &crate::evolution::IntegratorConfig,
    max_abs_eps: f64,
    max_eigen_deviation: f64,
) -> Result<PendulumCheck> {
    let (eta_max, eps_max) = libration_bound(sc.omega0, sc.capital_omega)?;
    let exact = to_pendulum_coords(full, sc.capital_omega)?;
    let model = integrate_pendulum(sc, cfg)?;
    let eta_mismatch = if eta_max > 0.0 {
        exact
            .iter()
            .zip(&model.states)
            .map(|(a, b)| (a.eta - b.eta).abs())
            .fold(0.0, f64::max)
            / eta_max
    } else {
        0.0
    };
    let predicted = sc.capital_omega / sc.omega0;
    let within = |measured: f64, target: f64| {
        measured >= 0.75 * target && measured <= 1.25 * target
    };
    Ok(PendulumCheck {
        ratio: sc.omega0 / sc.capital_omega,
        eta_max_predicted: eta_max,
        eps_max_predicted: eps_max,
        eps_max_measured: max_abs_eps,
        eigen_deviation_predicted: predicted,
        eigen_deviation_measured: max_eigen_deviation,
        eta_mismatch,
        within_envelope: within(max_eigen_deviation, predicted) && within(max_abs_eps, eps_max),
    })
}

/// Writes the trajectory CSV: header row, then one row per sample with
/// every float printed to 17 significant digits.
pub fn write_trajectory_csv(path: &Path, outcome: &RunOutcome) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    let d = &outcome.diagnostics;
    let traj = &outcome.full;
    let drive = &outcome.resolved.drive;
    for i in 0..traj.len() {
        let t = traj.times[i];
        let p = traj.bloch[i];
        let axis = drive.eigen_point(t)?;
        let row = [
            t,
            p.theta(),
            p.phi(),
            axis.theta(),
            axis.phi(),
            outcome.eps[i],
            outcome.eta[i],
            d.delta_e[i],
            d.fs_speed[i],
            d.eigen_deviation[i],
            traj.norm_drift[i],
        ];
        let mut first = true;
        for v in row {
            if !first {
                w.write_all(b",")?;
            }
            first = false;
            write!(w, "{v:.16e}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn notes(config: &ExperimentConfig) -> Vec<String> {
    let mut notes = vec![
        "distances are Fubini-Study distances on the Bloch sphere of radius 1/2".to_string(),
    ];
    if let super::config::DriveConfig::Equatorial { .. } = config.drive {
        if config.t_end.is_none() {
            notes.push("t_end defaulted to two drive revolutions (4π/Ω)".into());
        }
        notes.push("plot defaults (polar trace about the instantaneous pole) are a choice of this tool".into());
    }
    notes
}

/// Runs one experiment and writes `<name>.csv` and `<name>.json` to the
/// output directory.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    let start = Instant::now();
    let outcome = execute(config)?;
    let dir = config.output_dir();
    fs::create_dir_all(&dir)?;
    let csv_path = dir.join(format!("{}.csv", config.output.name));
    write_trajectory_csv(&csv_path, &outcome)?;
    let report = RunReport {
        config: config.clone(),
        trajectory: csv_path,
        stats: IntegratorStats {
            dt: outcome.resolved.integrator.dt,
            full: outcome.full.stats,
            projected: outcome.projected.stats,
        },
        summary: outcome.summary,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        notes: notes(config),
    };
    let json_path = dir.join(format!("{}.json", config.output.name));
    fs::write(&json_path, serde_json::to_string_pretty(&report)?)?;
    Ok(report)
}

/// Path of the JSON report [`run`] writes for `config`.
pub fn report_path(config: &ExperimentConfig) -> PathBuf {
    config
        .output_dir()
        .join(format!("{}.json", config.output.name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::{DriveConfig, ScheduleRef};
    use std::f64::consts::FRAC_PI_2;

    fn in_dir(mut cfg: ExperimentConfig, dir: &Path, name: &str) -> ExperimentConfig {
        cfg.output.dir = dir.to_path_buf();
        cfg.output.name = name.into();
        cfg
    }

    #[test]
    fn equatorial_ratio_ten() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = in_dir(ExperimentConfig::equatorial(1.0, 0.1), dir.path(), "r10");
        let report = run(&cfg).unwrap();
        let text = fs::read_to_string(&report.trajectory).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(lines.count(), 2000);
        let s = &report.summary;
        assert!((s.max_abs_eps - 0.2).abs() < 0.05, "{}", s.max_abs_eps);
        assert!(s.oracle_distance < ORACLE_LIMIT);
        assert!(s.speed_identity.passed);
        assert!(s.pendulum.unwrap().within_envelope, "{:?}", s.pendulum);
        let back: RunReport =
            serde_json::from_str(&fs::read_to_string(report_path(&cfg)).unwrap()).unwrap();
        assert_eq!(back.summary, report.summary);
    }

    #[test]
    fn static_eigenstate_has_no_deviation() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::equatorial(1.0, 0.1);
        cfg.drive = DriveConfig::Geometric {
            omega: ScheduleRef::Constant(1.5),
            theta: ScheduleRef::Constant(1.2),
            phi: ScheduleRef::Constant(0.4),
        };
        cfg.t_end = Some(20.0);
        let report = run(&in_dir(cfg, dir.path(), "static")).unwrap();
        let mut rdr = csv::Reader::from_path(&report.trajectory).unwrap();
        for row in rdr.records() {
            let dev: f64 = row.unwrap()[9].parse().unwrap();
            assert!(dev < 1e-9);
        }
    }

    #[test]
    fn output_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::equatorial(1.0, 0.2);
        cfg.t_end = Some(30.0);
        let a = run(&in_dir(cfg.clone(), dir.path(), "a")).unwrap();
        let b = run(&in_dir(cfg, dir.path(), "b")).unwrap();
        assert_eq!(fs::read(a.trajectory).unwrap(), fs::read(b.trajectory).unwrap());
    }

    #[test]
    fn rotation_regime_is_refused() {
        let cfg = ExperimentConfig::equatorial(1.0, 2.0);
        assert!(matches!(execute(&cfg), Err(Error::RotationRegime { .. })));
    }

    #[test]
    fn passage_reported_for_orthogonal_endpoints() {
        let mut cfg = ExperimentConfig::equatorial(1.0, 0.1);
        cfg.drive = DriveConfig::Geometric {
            omega: ScheduleRef::Constant(2.0),
            theta: ScheduleRef::Constant(0.0),
            phi: ScheduleRef::Constant(0.0),
        };
        cfg.t_end = Some(FRAC_PI_2);
        cfg.initial = Some(super::super::config::InitialPoint { theta: FRAC_PI_2, phi: 0.0 });
        let out = execute(&cfg).unwrap();
        let p = out.summary.passage.unwrap();
        assert!((p.passage_product - FRAC_PI_2).abs() < 1e-6);
    }
}

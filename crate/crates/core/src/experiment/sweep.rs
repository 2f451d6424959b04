use std::fs;
use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DriveConfig, ExperimentConfig};
use super::run::{run, RunReport};
use crate::error::{Error, Result};

/// Ratios at or above this are held to the eigen-deviation envelope.
pub const ENVELOPE_MIN_RATIO: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub ratio: f64,
    pub max_eigen_deviation: Option<f64>,
    /// `Ω/ω₀`.
    pub predicted: f64,
    pub envelope_checked: bool,
    pub passed: bool,
    pub report: Option<PathBuf>,
    pub error: Option<String>,
    #[serde(skip)]
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub table: PathBuf,
}

impl SweepReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    /// 0 when every ratio passed; otherwise the code of the first failure,
    /// with envelope misses counted as verification failures.
    pub fn exit_code(&self) -> i32 {
        self.rows
            .iter()
            .find(|r| !r.passed)
            .map_or(0, |r| r.exit_code)
    }
}

/// The base config with `Ω = ω₀ / ratio` and two revolutions of run time.
pub fn config_for_ratio(base: &ExperimentConfig, ratio: f64) -> Result<ExperimentConfig> {
    let DriveConfig::Equatorial { omega0, .. } = base.drive else {
        return Err(Error::InvalidConfig(
            "sweep needs an equatorial base drive".into(),
        ));
    };
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::InvalidConfig(format!("ratio must be positive, got {ratio}")));
    }
    let mut cfg = base.clone();
    cfg.drive = DriveConfig::Equatorial {
        omega0,
        capital_omega: omega0 / ratio,
    };
    cfg.t_end = None;
    cfg.output.name = format!("{}_ratio_{}", base.output.name, ratio);
    Ok(cfg)
}

fn evaluate(base: &ExperimentConfig, ratio: f64) -> SweepRow {
    let predicted = 1.0 / ratio;
    let envelope_checked = ratio >= ENVELOPE_MIN_RATIO;
    let outcome: Result<RunReport> = config_for_ratio(base, ratio).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(report) => {
            let dev = report.summary.max_eigen_deviation;
            let passed = !envelope_checked || (dev >= 0.75 * predicted && dev <= 1.25 * predicted);
            SweepRow {
                ratio,
                max_eigen_deviation: Some(dev),
                predicted,
                envelope_checked,
                passed,
                report: Some(super::run::report_path(&report.config)),
                error: None,
                exit_code: if passed { 0 } else { 4 },
            }
        }
        Err(e) => SweepRow {
            ratio,
            max_eigen_deviation: None,
            predicted,
            envelope_checked,
            passed: false,
            report: None,
            error: Some(e.to_string()),
            exit_code: e.exit_code(),
        },
    }
}

/// Runs every ratio, `jobs` at a time (all cores when `None`), and writes a
/// comparison table `<name>_sweep.csv` plus `<name>_sweep.json`.
///
/// A failing ratio does not stop the others.
pub fn sweep(ratios: &[f64], base: &ExperimentConfig, jobs: Option<usize>) -> Result<SweepReport> {
    if ratios.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one ratio".into()));
    }
    config_for_ratio(base, ratios[0].abs().max(1.0))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        if n == 0 {
            return Err(Error::InvalidConfig("jobs must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| ratios.par_iter().map(|&r| evaluate(base, r)).collect());

    let dir = base.output_dir();
    fs::create_dir_all(&dir)?;
    let table = dir.join(format!("{}_sweep.csv", base.output.name));
    let mut w = std::io::BufWriter::new(fs::File::create(&table)?);
    writeln!(w, "ratio,max_eigen_deviation,predicted,lower,upper,status")?;
    for r in &rows {
        let dev = r
            .max_eigen_deviation
            .map_or_else(|| "nan".to_string(), |d| format!("{d:.16e}"));
        let status = match (&r.error, r.passed) {
            (Some(_), _) => "error",
            (None, true) => "pass",
            (None, false) => "fail",
        };
        writeln!(
            w,
            "{},{},{:.16e},{:.16e},{:.16e},{}",
            r.ratio,
            dev,
            r.predicted,
            0.75 * r.predicted,
            1.25 * r.predicted,
            status
        )?;
    }
    w.flush()?;
    let report = SweepReport { rows, table };
    fs::write(
        dir.join(format!("{}_sweep.json", base.output.name)),
        serde_json::to_string_pretty(&report)?,
    )?;
    Ok(report)
}

/// Plain-text rendering of the comparison table.
pub fn format_table(report: &SweepReport) -> String {
    let mut out = format!(
        "{:>10}  {:>14}  {:>12}  {:>22}  {}\n",
        "ratio", "max_deviation", "predicted", "envelope", "status"
    );
    for r in &report.rows {
        let dev = r
            .max_eigen_deviation
            .map_or_else(|| "-".to_string(), |d| format!("{d:.6e}"));
        let status = match (&r.error, r.passed) {
            (Some(e), _) => format!("ERROR {e}"),
            (None, true) => "PASS".into(),
            (None, false) => "FAIL".into(),
        };
        let envelope = if r.envelope_checked {
            format!("[{:.4e}, {:.4e}]", 0.75 * r.predicted, 1.25 * r.predicted)
        } else {
            "unchecked".into()
        };
        out.push_str(&format!(
            "{:>10}  {:>14}  {:>12.6e}  {:>22}  {}\n",
            r.ratio, dev, r.predicted, envelope, status
        ));
    }
    out
}

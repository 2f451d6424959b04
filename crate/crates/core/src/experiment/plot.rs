use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::RunReport;
use crate::error::{Error, Result};
use crate::geometry::{dot, BlochPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotFiles {
    pub polar: PathBuf,
    pub deviation: PathBuf,
    pub svg: Option<PathBuf>,
    /// Largest distance of the polar trace from the pole, in radians.
    pub band: f64,
}

/// One sample of the trace around the instantaneous pole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarSample {
    pub t: f64,
    /// Component along the local `θ` direction at the pole.
    pub x: f64,
    /// Component along the local `φ` direction at the pole.
    pub y: f64,
    pub eigen_deviation: f64,
}

/// Projects `p` onto the tangent plane at `pole`.
pub fn tangent_coords(p: BlochPoint, pole: BlochPoint) -> (f64, f64) {
    let v = p.to_unit_vector();
    let (st, ct) = pole.theta().sin_cos();
    let (sp, cp) = pole.phi().sin_cos();
    let e_theta = [ct * cp, ct * sp, -st];
    let e_phi = [-sp, cp, 0.0];
    (dot(v, e_theta), dot(v, e_phi))
}

/// Reads the trajectory CSV written by a run.
pub fn read_trace(path: &Path) -> Result<Vec<PolarSample>> {
    if !path.is_file() {
        return Err(Error::MissingTrajectory(path.display().to_string()));
    }
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidConfig(format!("trajectory has no `{name}` column")))
    };
    let idx = [
        col("t")?,
        col("theta")?,
        col("phi")?,
        col("theta_prime")?,
        col("phi_prime")?,
        col("eigen_deviation")?,
    ];
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        let v: Vec<f64> = idx
            .iter()
            .map(|&i| {
                row[i]
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidConfig(format!("bad number `{}`: {e}", &row[i])))
            })
            .collect::<Result<_>>()?;
        let (x, y) = tangent_coords(BlochPoint::new(v[1], v[2]), BlochPoint::new(v[3], v[4]));
        out.push(PolarSample {
            t: v[0],
            x,
            y,
            eigen_deviation: v[5],
        });
    }
    Ok(out)
}

/// Writes `<stem>_polar.csv`, `<stem>_deviation.csv` and, if asked,
/// `<stem>.svg` next to the trajectory named in the report.
pub fn emit_plot_data(report: &RunReport, svg: bool) -> Result<PlotFiles> {
    let traj = &report.trajectory;
    let trace = read_trace(traj)?;
    let dir = traj.parent().map(Path::to_path_buf).unwrap_or_default();
    let stem = traj
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());

    let polar = dir.join(format!("{stem}_polar.csv"));
    let mut w = std::io::BufWriter::new(fs::File::create(&polar)?);
    writeln!(w, "t,x,y")?;
    for s in &trace {
        writeln!(w, "{:.16e},{:.16e},{:.16e}", s.t, s.x, s.y)?;
    }
    w.flush()?;

    let deviation = dir.join(format!("{stem}_deviation.csv"));
    let mut w = std::io::BufWriter::new(fs::File::create(&deviation)?);
    writeln!(w, "t,eigen_deviation")?;
    for s in &trace {
        writeln!(w, "{:.16e},{:.16e}", s.t, s.eigen_deviation)?;
    }
    w.flush()?;

    let band = trace.iter().map(|s| s.x.hypot(s.y)).fold(0.0, f64::max);
    let svg = if svg {
        let path = dir.join(format!("{stem}.svg"));
        fs::write(&path, render_svg(&trace, band))?;
        Some(path)
    } else {
        None
    };
    Ok(PlotFiles {
        polar,
        deviation,
        svg,
        band,
    })
}

/// Loads a report and emits its plot files.
pub fn plot_report(path: &Path, svg: Option<bool>) -> Result<PlotFiles> {
    let text = fs::read_to_string(path).map_err(|e| Error::ConfigParse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let report: RunReport = serde_json::from_str(&text).map_err(|e| Error::ConfigParse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let svg = svg.unwrap_or(report.config.output.svg);
    emit_plot_data(&report, svg)
}

const PANEL: f64 = 300.0;
const PAD: f64 = 30.0;

fn polyline(points: impl Iterator<Item = (f64, f64)>, colour: &str) -> String {
    let mut s = String::from("<polyline fill=\"none\" stroke-width=\"0.8\" stroke=\"");
    s.push_str(colour);
    s.push_str("\" points=\"");
    for (x, y) in points {
        let _ = write!(s, "{x:.2},{y:.2} ");
    }
    s.push_str("\"/>\n");
    s
}

fn render_svg(trace: &[PolarSample], band: f64) -> String {
    let scale = if band > 0.0 { 0.5 * PANEL / band } else { 1.0 };
    let cx = PAD + 0.5 * PANEL;
    let cy = PAD + 0.5 * PANEL;
    let width = 3.0 * PAD + 2.0 * PANEL;
    let height = 2.0 * PAD + PANEL;
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    let _ = writeln!(
        s,
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{PANEL}\" height=\"{PANEL}\" fill=\"none\" stroke=\"#999\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{PAD}\" y=\"{}\">trace about the instantaneous pole, radius {band:.3e} rad</text>",
        PAD - 8.0
    );
    let _ = writeln!(s, "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"2\" fill=\"#c00\"/>");
    s.push_str(&polyline(
        trace.iter().map(|p| (cx + scale * p.y, cy + scale * p.x)),
        "#1f4e9c",
    ));

    let x0 = 2.0 * PAD + PANEL;
    let _ = writeln!(
        s,
        "<rect x=\"{x0}\" y=\"{PAD}\" width=\"{PANEL}\" height=\"{PANEL}\" fill=\"none\" stroke=\"#999\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{x0}\" y=\"{}\">eigen deviation against time</text>",
        PAD - 8.0
    );
    let t_end = trace.last().map_or(1.0, |p| p.t).max(f64::MIN_POSITIVE);
    let dmax = trace
        .iter()
        .map(|p| p.eigen_deviation)
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    s.push_str(&polyline(
        trace.iter().map(|p| {
            (
                x0 + PANEL * p.t / t_end,
                PAD + PANEL * (1.0 - p.eigen_deviation / dmax),
            )
        }),
        "#333",
    ));
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::{DriveConfig, ExperimentConfig, ScheduleRef};
    use crate::experiment::run::run;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn tangent_plane_coordinates() {
        let pole = BlochPoint::new(FRAC_PI_2, 1.0);
        let (x, y) = tangent_coords(BlochPoint::new(FRAC_PI_2 + 0.01, 1.0), pole);
        assert!((x - 0.01f64.sin()).abs() < 1e-15 && y.abs() < 1e-15);
        let (x, y) = tangent_coords(pole, pole);
        assert!(x.abs() < 1e-15 && y.abs() < 1e-15);
    }

    #[test]
    fn band_width_and_static_point() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::equatorial(1.0, 0.1);
        cfg.output.dir = dir.path().into();
        cfg.output.name = "eq".into();
        let report = run(&cfg).unwrap();
        let files = emit_plot_data(&report, true).unwrap();
        assert!((files.band - 0.2).abs() < 0.05, "{}", files.band);
        let svg = fs::read_to_string(files.svg.unwrap()).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));

        cfg.drive = DriveConfig::Geometric {
            omega: ScheduleRef::Constant(1.0),
            theta: ScheduleRef::Constant(0.5),
            phi: ScheduleRef::Constant(0.0),
        };
        cfg.t_end = Some(10.0);
        cfg.output.name = "still".into();
        let report = run(&cfg).unwrap();
        let files = emit_plot_data(&report, false).unwrap();
        assert!(files.band < 1e-9);
        assert!(files.svg.is_none());
    }

    #[test]
    fn missing_trajectory() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::equatorial(1.0, 0.2);
        cfg.t_end = Some(5.0);
        cfg.output.dir = dir.path().into();
        let report = run(&cfg).unwrap();
        fs::remove_file(&report.trajectory).unwrap();
        let e = emit_plot_data(&report, false).unwrap_err();
        assert!(matches!(e, Error::MissingTrajectory(_)));
    }
}

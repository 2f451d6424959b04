use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::drive::{AxisPath, Drive, GeometricDrive, MatrixDrive};
use crate::error::{Error, Result};
use crate::evolution::{
    max_gap, piecewise_geodesic_drive, EquatorialScenario, IntegratorConfig, Scheme,
    DEFAULT_STEP_PHASE,
};
use crate::geometry::BlochPoint;
use crate::hamiltonian::HamiltonianMatrix;
use crate::schedule::Schedule;

/// A schedule given inline, as a bare constant, or as a two-column CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleRef {
    Constant(f64),
    File { file: PathBuf },
    Inline(Schedule),
}

impl ScheduleRef {
    /// Resolves file references relative to `base`.
    pub fn resolve(&self, base: &Path) -> Result<Schedule> {
        let s = match self {
            ScheduleRef::Constant(v) => Schedule::constant(*v),
            ScheduleRef::Inline(s) => s.clone(),
            ScheduleRef::File { file } => load_schedule_file(&base.join(file))?,
        };
        s.validate()?;
        Ok(s)
    }
}

/// Reads a `t,value` CSV with a header row into a table schedule.
pub fn load_schedule_file(path: &Path) -> Result<Schedule> {
    let display = path.display().to_string();
    let parse_err = |message: String| Error::ConfigParse {
        path: display.clone(),
        message,
    };
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| parse_err(format!("cannot read schedule file: {e}")))?;
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| parse_err(e.to_string()))?;
        let line = i + 2;
        if row.len() != 2 {
            return Err(parse_err(format!("line {line}: expected 2 columns, got {}", row.len())));
        }
        let num = |k: usize| {
            row[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| parse_err(format!("line {line}, column {}: {e}", k + 1)))
        };
        times.push(num(0)?);
        values.push(num(1)?);
    }
    Schedule::table(times, values).map_err(|e| parse_err(e.to_string()))
}

/// Drive section of an experiment file; `type` selects the variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriveConfig {
    /// Axis circling the equator: `ω = omega0`, `θ′ = π/2`, `φ′ = capital_omega·t`.
    Equatorial { omega0: f64, capital_omega: f64 },
    /// Gap and axis angles as schedules.
    Geometric {
        omega: ScheduleRef,
        theta: ScheduleRef,
        phi: ScheduleRef,
    },
    /// Matrix elements as schedules.
    Matrix {
        h00: ScheduleRef,
        h11: ScheduleRef,
        h01_re: ScheduleRef,
        #[serde(default = "zero_schedule")]
        h01_im: ScheduleRef,
    },
    /// Axis following great-circle arcs through `(θ, φ)` waypoints.
    Piecewise {
        waypoints: Vec<(f64, f64)>,
        omega: f64,
        total_time: f64,
        n_segments: usize,
    },
}

fn zero_schedule() -> ScheduleRef {
    ScheduleRef::Constant(0.0)
}

/// Integrator section; anything omitted takes its default, and a missing
/// `dt` becomes `1e-3 / ω_max`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub dt: Option<f64>,
    pub scheme: Option<Scheme>,
    pub rel_tol: Option<f64>,
    pub norm_drift_limit: Option<f64>,
    pub chart_switch_threshold: Option<f64>,
    pub samples: Option<usize>,
}

impl IntegratorSection {
    pub fn resolve(&self, omega_max: f64) -> IntegratorConfig {
        let d = IntegratorConfig::default();
        let dt = self.dt.unwrap_or(if omega_max > 0.0 {
            DEFAULT_STEP_PHASE / omega_max
        } else {
            d.dt
        });
        IntegratorConfig {
            dt,
            scheme: self.scheme.unwrap_or(d.scheme),
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            norm_drift_limit: self.norm_drift_limit.unwrap_or(d.norm_drift_limit),
            chart_switch_threshold: self.chart_switch_threshold.unwrap_or(d.chart_switch_threshold),
            samples: self.samples.unwrap_or(d.samples),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_name")]
    pub name: String,
    /// Also render an SVG when plotting.
    #[serde(default)]
    pub svg: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_name() -> String {
    "run".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            name: default_name(),
            svg: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialPoint {
    pub theta: f64,
    pub phi: f64,
}

/// A complete experiment file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub drive: DriveConfig,
    /// Defaults to `4π/Ω` for equatorial drives and `total_time` for piecewise ones.
    pub t_end: Option<f64>,
    /// Defaults to the upper eigenstate at `t = 0`.
    pub initial: Option<InitialPoint>,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    /// Parses experiment TOML. Errors carry the line and column of the
    /// offending key, including keys inside `[drive]`.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let err = |e: toml::de::Error| Error::ConfigParse {
            path: origin.to_string(),
            message: e.to_string().trim_end().to_string(),
        };
        let rest: probe::Rest = toml::from_str(text).map_err(err)?;
        let header: probe::Header = toml::from_str(text).map_err(err)?;
        let drive = match header.drive.kind.as_str() {
            "equatorial" => {
                let d = toml::from_str::<probe::Probe<probe::Equatorial>>(text).map_err(err)?.drive;
                DriveConfig::Equatorial {
                    omega0: d.omega0,
                    capital_omega: d.capital_omega,
                }
            }
            "geometric" => {
                let d = toml::from_str::<probe::Probe<probe::Geometric>>(text).map_err(err)?.drive;
                DriveConfig::Geometric {
                    omega: d.omega,
                    theta: d.theta,
                    phi: d.phi,
                }
            }
            "matrix" => {
                let d = toml::from_str::<probe::Probe<probe::Matrix>>(text).map_err(err)?.drive;
                DriveConfig::Matrix {
                    h00: d.h00,
                    h11: d.h11,
                    h01_re: d.h01_re,
                    h01_im: d.h01_im,
                }
            }
            "piecewise" => {
                let d = toml::from_str::<probe::Probe<probe::Piecewise>>(text).map_err(err)?.drive;
                DriveConfig::Piecewise {
                    waypoints: d.waypoints,
                    omega: d.omega,
                    total_time: d.total_time,
                    n_segments: d.n_segments,
                }
            }
            other => {
                return Err(Error::ConfigParse {
                    path: origin.to_string(),
                    message: format!(
                        "drive.type: unknown drive `{other}`, expected one of equatorial, geometric, matrix, piecewise"
                    ),
                })
            }
        };
        Ok(Self {
            drive,
            t_end: rest.t_end,
            initial: rest.initial,
            integrator: rest.integrator,
            output: rest.output,
            seed: rest.seed,
            base_dir: PathBuf::new(),
        })
    }

    /// Parses a file; relative paths inside it are taken from its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::ConfigParse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::from_toml_str(&text, &path.display().to_string())?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// An equatorial experiment with everything else at its default.
    pub fn equatorial(omega0: f64, capital_omega: f64) -> Self {
        Self {
            drive: DriveConfig::Equatorial {
                omega0,
                capital_omega,
            },
            t_end: None,
            initial: None,
            integrator: IntegratorSection::default(),
            output: OutputConfig::default(),
            seed: 0,
            base_dir: PathBuf::new(),
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.base_dir.join(&self.output.dir)
    }

    /// Builds the drive and fills in every defaulted quantity.
    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        let (drive, scenario) = match &self.drive {
            DriveConfig::Equatorial {
                omega0,
                capital_omega,
            } => {
                let sc = EquatorialScenario {
                    omega0: *omega0,
                    capital_omega: *capital_omega,
                    t_end: self.t_end.unwrap_or(4.0 * PI / capital_omega),
                };
                sc.validate()?;
                (BuiltDrive::Geometric(sc.drive()), Some(sc))
            }
            DriveConfig::Geometric { omega, theta, phi } => {
                let g = GeometricDrive::new(
                    omega.resolve(&self.base_dir)?,
                    AxisPath::Angles {
                        theta: theta.resolve(&self.base_dir)?,
                        phi: phi.resolve(&self.base_dir)?,
                    },
                )?;
                (BuiltDrive::Geometric(g), None)
            }
            DriveConfig::Matrix {
                h00,
                h11,
                h01_re,
                h01_im,
            } => {
                let m = MatrixDrive {
                    h00: h00.resolve(&self.base_dir)?,
                    h11: h11.resolve(&self.base_dir)?,
                    h01_re: h01_re.resolve(&self.base_dir)?,
                    h01_im: h01_im.resolve(&self.base_dir)?,
                };
                m.validate()?;
                (BuiltDrive::Matrix(m), None)
            }
            DriveConfig::Piecewise {
                waypoints,
                omega,
                total_time,
                n_segments,
            } => {
                let pts: Vec<BlochPoint> =
                    waypoints.iter().map(|&(t, p)| BlochPoint::new(t, p)).collect();
                let g = piecewise_geodesic_drive(&pts, *omega, *total_time, *n_segments)?;
                (BuiltDrive::Geometric(g), None)
            }
        };
        let t_end = match (&self.drive, self.t_end) {
            (_, Some(t)) => t,
            (DriveConfig::Equatorial { capital_omega, .. }, None) => 4.0 * PI / capital_omega,
            (DriveConfig::Piecewise { total_time, .. }, None) => *total_time,
            _ => {
                return Err(Error::InvalidConfig(
                    "t_end is required for geometric and matrix drives".into(),
                ))
            }
        };
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_end must be positive, got {t_end}")));
        }
        let omega_max = max_gap(&drive, t_end)?;
        if omega_max == 0.0 && self.integrator.dt.is_none() {
            return Err(Error::InvalidConfig(
                "the drive has zero gap throughout; set integrator.dt explicitly".into(),
            ));
        }
        let integrator = self.integrator.resolve(omega_max);
        integrator.validate(t_end, omega_max)?;
        let initial = match self.initial {
            Some(p) => BlochPoint::new(p.theta, p.phi),
            None => drive.eigen_point(0.0)?,
        };
        Ok(ResolvedExperiment {
            drive,
            scenario,
            t_end,
            initial,
            integrator,
            omega_max,
        })
    }
}

/// Shapes used to parse one section at a time, so that errors keep their
/// position in the source.
mod probe {
    use serde::de::IgnoredAny;
    use serde::Deserialize;

    use super::{InitialPoint, IntegratorSection, OutputConfig, ScheduleRef};

    #[derive(Deserialize)]
    pub struct Tag {
        #[serde(rename = "type")]
        pub kind: String,
    }

    #[derive(Deserialize)]
    pub struct Header {
        pub drive: Tag,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Rest {
        #[allow(dead_code)]
        pub drive: IgnoredAny,
        pub t_end: Option<f64>,
        pub initial: Option<InitialPoint>,
        #[serde(default)]
        pub integrator: IntegratorSection,
        #[serde(default)]
        pub output: OutputConfig,
        #[serde(default)]
        pub seed: u64,
    }

    #[derive(Deserialize)]
    pub struct Probe<T> {
        pub drive: T,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Equatorial {
        #[serde(rename = "type")]
        #[allow(dead_code)]
        pub kind: IgnoredAny,
        pub omega0: f64,
        pub capital_omega: f64,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Geometric {
        #[serde(rename = "type")]
        #[allow(dead_code)]
        pub kind: IgnoredAny,
        pub omega: ScheduleRef,
        pub theta: ScheduleRef,
        pub phi: ScheduleRef,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Matrix {
        #[serde(rename = "type")]
        #[allow(dead_code)]
        pub kind: IgnoredAny,
        pub h00: ScheduleRef,
        pub h11: ScheduleRef,
        pub h01_re: ScheduleRef,
        #[serde(default = "super::zero_schedule")]
        pub h01_im: ScheduleRef,
    }

    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct Piecewise {
        #[serde(rename = "type")]
        #[allow(dead_code)]
        pub kind: IgnoredAny,
        pub waypoints: Vec<(f64, f64)>,
        pub omega: f64,
        pub total_time: f64,
        pub n_segments: usize,
    }
}

/// The drive an experiment actually integrates.
#[derive(Debug, Clone)]
pub enum BuiltDrive {
    Geometric(GeometricDrive),
    Matrix(MatrixDrive),
}

impl Drive for BuiltDrive {
    fn hamiltonian(&self, t: f64) -> HamiltonianMatrix {
        match self {
            BuiltDrive::Geometric(g) => g.hamiltonian(t),
            BuiltDrive::Matrix(m) => m.hamiltonian(t),
        }
    }
    fn params(&self, t: f64) -> crate::hamiltonian::DriveParams {
        match self {
            BuiltDrive::Geometric(g) => g.params(t),
            BuiltDrive::Matrix(m) => m.params(t),
        }
    }
    fn gap(&self, t: f64) -> f64 {
        match self {
            BuiltDrive::Geometric(g) => g.gap(t),
            BuiltDrive::Matrix(m) => m.gap(t),
        }
    }
    fn eigen_point(&self, t: f64) -> Result<BlochPoint> {
        match self {
            BuiltDrive::Geometric(g) => g.eigen_point(t),
            BuiltDrive::Matrix(m) => m.eigen_point(t),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResolvedExperiment {
    pub drive: BuiltDrive,
    /// Present for equatorial drives.
    pub scenario: Option<EquatorialScenario>,
    pub t_end: f64,
    pub initial: BlochPoint,
    pub integrator: IntegratorConfig,
    pub omega_max: f64,
}

use crate::drive::{slerp, AxisPath, GeodesicPath, GeometricDrive};
use crate::error::{Error, Result};
use crate::geometry::{central_angle, BlochPoint};
use crate::schedule::Schedule;

/// Arcs longer than `π - ANTIPODAL_TOL` are treated as joining antipodes.
const ANTIPODAL_TOL: f64 = 1e-9;

/// Drive whose axis follows the waypoint polyline, approximated by
/// `n_segments` great-circle pieces of equal path length.
///
/// The polyline through the waypoints is cut at `n_segments` equally spaced
/// arc-length positions and consecutive cut points are joined by minor arcs.
/// Time is allotted to each arc in proportion to its length, so the axis moves
/// at one constant angular speed; the gap stays at `omega`.
pub fn piecewise_geodesic_drive(
    waypoints: &[BlochPoint],
    omega: f64,
    total_time: f64,
    n_segments: usize,
) -> Result<GeometricDrive> {
    if waypoints.len() < 2 {
        return Err(Error::TooFewWaypoints(waypoints.len()));
    }
    if n_segments == 0 {
        return Err(Error::InvalidConfig("n_segments must be positive".into()));
    }
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "total_time must be positive, got {total_time}"
        )));
    }
    if !(omega >= 0.0 && omega.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "omega must be non-negative, got {omega}"
        )));
    }

    let arcs: Vec<f64> = waypoints
        .windows(2)
        .map(|w| central_angle(w[0], w[1]))
        .collect();
    if let Some(index) = arcs
        .iter()
        .position(|a| *a > std::f64::consts::PI - ANTIPODAL_TOL)
    {
        return Err(Error::AntipodalWaypoints { index });
    }
    let total: f64 = arcs.iter().sum();

    let nodes: Vec<BlochPoint> = if total == 0.0 {
        vec![waypoints[0], waypoints[0]]
    } else {
        (0..=n_segments)
            .map(|k| point_on_polyline(waypoints, &arcs, total * k as f64 / n_segments as f64))
            .collect()
    };

    let pieces: Vec<f64> = nodes.windows(2).map(|w| central_angle(w[0], w[1])).collect();
    if pieces.iter().any(|a| *a > std::f64::consts::PI - ANTIPODAL_TOL) {
        return Err(Error::InvalidConfig(
            "a geodesic piece joins antipodal points; increase n_segments".into(),
        ));
    }
    let length: f64 = pieces.iter().sum();
    let mut times = Vec::with_capacity(nodes.len());
    let mut acc = 0.0;
    times.push(0.0);
    for (i, piece) in pieces.iter().enumerate() {
        acc += piece;
        let t = if i + 1 == pieces.len() || length == 0.0 {
            total_time * (i + 1) as f64 / pieces.len() as f64
        } else {
            total_time * acc / length
        };
        times.push(t);
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        // zero-length pieces from repeated waypoints: spread time evenly instead
        let n = times.len() - 1;
        times = (0..=n).map(|k| total_time * k as f64 / n as f64).collect();
    }

    GeometricDrive::new(
        Schedule::constant(omega),
        AxisPath::Geodesic(GeodesicPath { nodes, times }),
    )
}

fn point_on_polyline(waypoints: &[BlochPoint], arcs: &[f64], s: f64) -> BlochPoint {
    let mut remaining = s;
    for (i, arc) in arcs.iter().enumerate() {
        if remaining <= *arc || i + 1 == arcs.len() {
            if *arc == 0.0 {
                return waypoints[i];
            }
            return slerp(waypoints[i], waypoints[i + 1], (remaining / arc).min(1.0));
        }
        remaining -= arc;
    }
    *waypoints.last().expect("at least two waypoints")
}

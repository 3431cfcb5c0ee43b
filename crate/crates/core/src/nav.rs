//! Path deviation, waypoint and aperture metrics.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ApertureTier, Minutes, Trajectory, Vec3};
use crate::stats;

/// Desired flight path as a polyline; `closed` adds the segment back to the first vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePath {
    vertices: Vec<Vec3>,
    closed: bool,
}

impl ReferencePath {
    pub fn new(vertices: Vec<Vec3>, closed: bool) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InsufficientSamples {
                needed: 2,
                got: vertices.len(),
            });
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("path vertex is not finite".into()));
        }
        if let Some(i) = vertices.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!(
                "path vertices {i} and {} coincide",
                i + 1
            )));
        }
        Ok(Self { vertices, closed })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn closed(&self) -> bool {
        self.closed
    }

    pub fn segments(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        let n = self.vertices.len();
        let closing = (self.closed && self.vertices[0] != self.vertices[n - 1])
            .then(|| (self.vertices[n - 1], self.vertices[0]));
        self.vertices
            .windows(2)
            .map(|w| (w[0], w[1]))
            .chain(closing)
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }
}

pub(crate) fn point_segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let ap = p - a;
    let len2 = ab.dot(ab);
    let proj = ap.dot(ab);
    if proj <= 0.0 || len2 == 0.0 {
        return ap.norm();
    }
    if proj >= len2 {
        return (p - b).norm();
    }
    // |ab x ap| / |ab| stays exactly zero for collinear points
    let cross = Vec3::new(
        ab.y * ap.z - ab.z * ap.y,
        ab.z * ap.x - ab.x * ap.z,
        ab.x * ap.y - ab.y * ap.x,
    );
    cross.norm() / len2.sqrt()
}

pub fn point_path_deviation(p: Vec3, path: &ReferencePath) -> f64 {
    path.segments()
        .map(|(a, b)| point_segment_distance(p, a, b))
        .fold(f64::INFINITY, f64::min)
}

/// Per-sample (time, deviation) pairs.
pub fn deviation_series(traj: &Trajectory, path: &ReferencePath) -> Vec<(f64, f64)> {
    traj.samples()
        .iter()
        .map(|s| (s.t, point_path_deviation(s.pos, path)))
        .collect()
}

/// Mean deviation over samples, each sample weighted equally.
pub fn average_deviation(traj: &Trajectory, path: &ReferencePath) -> Result<f64> {
    let d: Vec<f64> = deviation_series(traj, path)
        .into_iter()
        .map(|(_, d)| d)
        .collect();
    stats::mean(&d).ok_or(Error::EmptySpan)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationSummary {
    pub per_flight_ad: Vec<f64>,
    pub mean_ad: f64,
    pub std_ad: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

pub fn deviation_summary(flights: &[(Trajectory, ReferencePath)]) -> Result<DeviationSummary> {
    let per_flight_ad = flights
        .iter()
        .map(|(t, p)| average_deviation(t, p))
        .collect::<Result<Vec<_>>>()?;
    summarize_ad(per_flight_ad)
}

pub fn summarize_ad(per_flight_ad: Vec<f64>) -> Result<DeviationSummary> {
    let s = stats::summarize(&per_flight_ad)?;
    let warning = (per_flight_ad.len() == 1)
        .then(|| "single flight: standard deviation reported as 0".to_string());
    Ok(DeviationSummary {
        per_flight_ad,
        mean_ad: s.mean,
        std_ad: s.std,
        warning,
    })
}

/// Horizontal distance between the landing position and the waypoint.
pub fn waypoint_error(final_pos: Vec3, waypoint: Vec3) -> f64 {
    (final_pos - waypoint).horizontal_norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaypointSummary {
    pub accuracy: f64,
    pub precision: f64,
    pub trials: usize,
}

pub fn waypoint_summary(errors: &[f64]) -> Result<WaypointSummary> {
    let s = stats::summarize(errors)?;
    Ok(WaypointSummary {
        accuracy: s.mean,
        precision: s.std,
        trials: s.n,
    })
}

/// Length over duration, in m/s.
pub fn traversal_speed(length_m: f64, duration: Minutes) -> Result<f64> {
    if !(duration.0 > 0.0) {
        return Err(Error::ZeroDuration);
    }
    Ok(length_m / duration.seconds())
}

pub fn classify_aperture_trial(passed: bool, contact: bool, ripped: bool) -> Result<ApertureTier> {
    match (passed, contact, ripped) {
        (_, false, true) => Err(Error::InconsistentFlags(
            "ripped without contact".into(),
        )),
        (false, _, _) => Ok(ApertureTier::B1),
        (true, false, false) => Ok(ApertureTier::A1),
        (true, true, false) => Ok(ApertureTier::A2),
        (true, true, true) => Ok(ApertureTier::A3),
    }
}

//! Obstacle distance, time to collision, MASI, maximum delta-V and categorical outcome tables.

use indexmap::IndexMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    CrCategory, ObstacleGeometry, ObstacleKind, OaCategory, PoseSample, TrialRecord, Trajectory,
    Vec3,
};
use crate::stats;

pub const GRAVITY: f64 = 9.8;
/// Speeds below this are treated as hovering for time-to-collision.
pub const STATIONARY_SPEED: f64 = 0.05;
pub const DELTA_V_WINDOW: f64 = 0.3;
/// Longest sample spacing accepted inside the delta-V window (10 Hz).
pub const MAX_WINDOW_GAP: f64 = 0.1;
pub const DEFAULT_IMPACT_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Smoothing {
    pub width: usize,
}

impl Default for Smoothing {
    fn default() -> Self {
        Self { width: 5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CollisionKinematics {
    pub include_vertical: bool,
    pub smoothing: Option<Smoothing>,
}

impl CollisionKinematics {
    pub const G: f64 = GRAVITY;
}

/// Three-point derivative on a non-uniform grid; exact for quadratics.
fn differentiate(t: &[f64], f: &[Vec3]) -> Vec<Vec3> {
    let n = t.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (j, at) = match i {
            0 => (1, 0),
            i if i == n - 1 => (n - 2, 2),
            i => (i, 1),
        };
        let (t0, t1, t2) = (t[j - 1], t[j], t[j + 1]);
        let (h1, h2) = (t1 - t0, t2 - t1);
        let (c0, c1, c2) = match at {
            0 => (
                -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
                (h1 + h2) / (h1 * h2),
                -h1 / (h2 * (h1 + h2)),
            ),
            1 => (
                -h2 / (h1 * (h1 + h2)),
                (h2 - h1) / (h1 * h2),
                h1 / (h2 * (h1 + h2)),
            ),
            _ => (
                h2 / (h1 * (h1 + h2)),
                -(h1 + h2) / (h1 * h2),
                (2.0 * h2 + h1) / (h2 * (h1 + h2)),
            ),
        };
        out.push(f[j - 1] * c0 + f[j] * c1 + f[j + 1] * c2);
    }
    out
}

/// Centered moving average, truncated at the ends.
pub fn moving_average(values: &[Vec3], width: usize) -> Result<Vec<Vec3>> {
    if width == 0 || width.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "smoothing width {width} must be odd"
        )));
    }
    let half = width / 2;
    let n = values.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let sum = values[lo..=hi].iter().fold(Vec3::ZERO, |acc, &v| acc + v);
            sum * (1.0 / (hi - lo + 1) as f64)
        })
        .collect())
}

/// Fill missing velocity from position and missing acceleration from velocity.
pub fn derive_kinematics(traj: &Trajectory, smoothing: Option<Smoothing>) -> Result<Trajectory> {
    if traj.has_velocity() && traj.has_acceleration() {
        return Ok(traj.clone());
    }
    if traj.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: traj.len(),
        });
    }
    let s = traj.samples();
    let t: Vec<f64> = s.iter().map(|p| p.t).collect();
    let vel: Vec<Vec3> = if traj.has_velocity() {
        s.iter().map(|p| p.vel.unwrap_or_default()).collect()
    } else {
        let pos: Vec<Vec3> = s.iter().map(|p| p.pos).collect();
        differentiate(&t, &pos)
    };
    let acc: Vec<Vec3> = if traj.has_acceleration() {
        s.iter().map(|p| p.acc.unwrap_or_default()).collect()
    } else {
        let raw = differentiate(&t, &vel);
        match smoothing {
            Some(sm) => moving_average(&raw, sm.width)?,
            None => raw,
        }
    };
    Ok(traj.map_samples(|i, p| PoseSample {
        vel: Some(vel[i]),
        acc: Some(acc[i]),
        ..*p
    }))
}

fn with_velocity(traj: &Trajectory) -> Result<Trajectory> {
    if traj.has_velocity() {
        Ok(traj.clone())
    } else {
        derive_kinematics(traj, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MasiResult {
    pub masi: f64,
    /// Peak acceleration magnitude in m/s², equal to `masi * g`.
    pub max_deceleration: f64,
    pub at_time: f64,
}

pub fn masi(traj: &Trajectory, kin: &CollisionKinematics) -> Result<MasiResult> {
    let traj = if traj.has_acceleration() {
        traj.clone()
    } else {
        derive_kinematics(traj, kin.smoothing)?
    };
    let mut best = (0.0, traj.start());
    for s in traj.samples() {
        let a = s.acc.unwrap_or_default();
        let mag = if kin.include_vertical {
            a.norm()
        } else {
            a.horizontal_norm()
        };
        if mag > best.0 {
            best = (mag, s.t);
        }
    }
    Ok(MasiResult {
        masi: best.0 / GRAVITY,
        max_deceleration: best.0,
        at_time: best.1,
    })
}

fn velocity_at(s: &[PoseSample], t: f64) -> Vec3 {
    let j = s.partition_point(|p| p.t < t);
    if j < s.len() && s[j].t == t {
        return s[j].vel.unwrap_or_default();
    }
    let (a, b) = (&s[j - 1], &s[j]);
    let u = (t - a.t) / (b.t - a.t);
    a.vel.unwrap_or_default().lerp(b.vel.unwrap_or_default(), u)
}

/// Largest velocity change after the collision instant, within `window` seconds.
pub fn max_delta_v(traj: &Trajectory, t_c: f64, window: f64) -> Result<f64> {
    if t_c < traj.start() || t_c > traj.end() || !t_c.is_finite() {
        return Err(Error::CollisionOutsideSpan {
            t_c,
            start: traj.start(),
            end: traj.end(),
        });
    }
    let traj = with_velocity(traj)?;
    let s = traj.samples();
    let t_end = (t_c + window).min(traj.end());

    let max_gap = s
        .windows(2)
        .filter(|w| w[1].t > t_c && w[0].t < t_end)
        .map(|w| w[1].t - w[0].t)
        .fold(0.0, f64::max);
    if max_gap > MAX_WINDOW_GAP + 1e-9 {
        return Err(Error::RateTooLow { max_gap_s: max_gap });
    }

    let v0 = velocity_at(s, t_c);
    Ok(s.iter()
        .filter(|p| p.t > t_c && p.t <= t_end + 1e-12)
        .map(|p| (p.vel.unwrap_or_default() - v0).norm())
        .fold(0.0, f64::max))
}

/// First sample whose horizontal acceleration exceeds `threshold`; a hint only.
pub fn suggest_collision_time(traj: &Trajectory, threshold: f64) -> Result<Option<f64>> {
    let traj = derive_kinematics(traj, None)?;
    Ok(traj
        .samples()
        .iter()
        .find(|s| s.acc.unwrap_or_default().horizontal_norm() > threshold)
        .map(|s| s.t))
}

pub fn point_obstacle_distance(p: Vec3, ob: &ObstacleGeometry) -> f64 {
    let (dx, dy) = (ob.p1.x - ob.p0.x, ob.p1.y - ob.p0.y);
    let (px, py) = (p.x - ob.p0.x, p.y - ob.p0.y);
    let len2 = dx * dx + dy * dy;
    let proj = px * dx + py * dy;
    let plan = if ob.kind == ObstacleKind::PlaneSegment && proj <= 0.0 {
        px.hypot(py)
    } else if ob.kind == ObstacleKind::PlaneSegment && proj >= len2 {
        (p.x - ob.p1.x).hypot(p.y - ob.p1.y)
    } else {
        (dx * py - dy * px).abs() / len2.sqrt()
    };
    let vertical = if p.z < 0.0 {
        -p.z
    } else if p.z > ob.height {
        p.z - ob.height
    } else {
        0.0
    };
    plan.hypot(vertical)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObstacleDistance {
    pub series: Vec<f64>,
    pub min: f64,
}

pub fn distance_to_obstacle(traj: &Trajectory, ob: &ObstacleGeometry) -> ObstacleDistance {
    let mut series: Vec<f64> = traj
        .samples()
        .iter()
        .map(|s| point_obstacle_distance(s.pos, ob))
        .collect();
    // Consecutive samples on opposite sides of a segment obstacle crossed it.
    for (i, w) in traj.samples().windows(2).enumerate() {
        if crosses(w[0].pos, w[1].pos, ob) {
            series[i + 1] = 0.0;
        }
    }
    let min = series.iter().copied().fold(f64::INFINITY, f64::min);
    ObstacleDistance { series, min }
}

fn crosses(a: Vec3, b: Vec3, ob: &ObstacleGeometry) -> bool {
    let (dx, dy) = (ob.p1.x - ob.p0.x, ob.p1.y - ob.p0.y);
    let side = |p: Vec3| dx * (p.y - ob.p0.y) - dy * (p.x - ob.p0.x);
    let (sa, sb) = (side(a), side(b));
    if sa == 0.0 || sb == 0.0 || sa.signum() == sb.signum() {
        return false;
    }
    let u = sa / (sa - sb);
    let q = a.lerp(b, u);
    if q.z < 0.0 || q.z > ob.height {
        return false;
    }
    if ob.kind == ObstacleKind::InfinitePlane {
        return true;
    }
    let along = ((q.x - ob.p0.x) * dx + (q.y - ob.p0.y) * dy) / (dx * dx + dy * dy);
    (0.0..=1.0).contains(&along)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TtcResult {
    pub min_ttc: f64,
    pub at_time: f64,
}

pub fn ttc_series(traj: &Trajectory, ob: &ObstacleGeometry) -> Result<Vec<(f64, f64)>> {
    let traj = with_velocity(traj)?;
    let d = distance_to_obstacle(&traj, ob);
    Ok(traj
        .samples()
        .iter()
        .zip(&d.series)
        .filter_map(|(s, &dist)| {
            let speed = s.vel.unwrap_or_default().norm();
            (speed >= STATIONARY_SPEED).then(|| (s.t, dist / speed))
        })
        .collect())
}

pub fn min_ttc(traj: &Trajectory, ob: &ObstacleGeometry) -> Result<TtcResult> {
    ttc_series(traj, ob)?
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(t, v)| TtcResult {
            min_ttc: v,
            at_time: t,
        })
        .ok_or(Error::AllStationary)
}

/// Per-flight values feeding the flight-set averages.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FlightMetrics {
    pub collided: bool,
    pub min_distance: Option<f64>,
    pub min_ttc: Option<f64>,
    pub masi: Option<f64>,
    pub max_delta_v: Option<f64>,
    pub max_deceleration: Option<f64>,
}

impl FlightMetrics {
    /// Collision flights report zero clearance and zero time to collision.
    pub fn normalized(mut self) -> Self {
        if self.collided {
            self.min_distance = Some(0.0);
            self.min_ttc = Some(0.0);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlightSetSummary {
    pub flights: usize,
    pub collisions: usize,
    pub mean_min_distance: Option<f64>,
    pub mean_min_ttc: Option<f64>,
    pub mean_masi: Option<f64>,
    pub mean_max_delta_v: Option<f64>,
    pub mean_max_deceleration: Option<f64>,
}

pub fn summarize_flights(flights: &[FlightMetrics]) -> FlightSetSummary {
    let flights: Vec<FlightMetrics> = flights.iter().map(|f| f.normalized()).collect();
    let avg = |get: fn(&FlightMetrics) -> Option<f64>| {
        let v: Vec<f64> = flights.iter().filter_map(get).collect();
        stats::mean(&v)
    };
    FlightSetSummary {
        flights: flights.len(),
        collisions: flights.iter().filter(|f| f.collided).count(),
        mean_min_distance: avg(|f| f.min_distance),
        mean_min_ttc: avg(|f| f.min_ttc),
        mean_masi: avg(|f| f.masi),
        mean_max_delta_v: avg(|f| f.max_delta_v),
        mean_max_deceleration: avg(|f| f.max_deceleration),
    }
}

pub fn collision_count(trials: &[TrialRecord]) -> usize {
    trials.iter().filter(|t| t.collided()).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CategoryKind {
    Oa,
    Cr,
}

impl CategoryKind {
    pub fn labels(self) -> Vec<&'static str> {
        match self {
            CategoryKind::Oa => OaCategory::ALL.iter().map(|c| c.as_str()).collect(),
            CategoryKind::Cr => CrCategory::ALL.iter().map(|c| c.as_str()).collect(),
        }
    }

    fn index_of(self, t: &TrialRecord) -> Option<usize> {
        match self {
            CategoryKind::Oa => t
                .oa_category
                .and_then(|c| OaCategory::ALL.iter().position(|&x| x == c)),
            CategoryKind::Cr => t
                .cr_category
                .and_then(|c| CrCategory::ALL.iter().position(|&x| x == c)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryRow {
    pub group: String,
    pub trials: usize,
    /// Percentages aligned with `CategoryKind::labels`.
    pub percentages: Vec<f64>,
}

/// Percentage of trials in each category, one row per group (obstacle type), groups in
/// first-seen order.
pub fn category_distribution<'a>(
    trials: impl IntoIterator<Item = (String, &'a TrialRecord)>,
    which: CategoryKind,
) -> Result<Vec<CategoryRow>> {
    let width = which.labels().len();
    let mut counts: IndexMap<String, Vec<usize>> = IndexMap::new();
    for (group, t) in trials {
        let idx = which
            .index_of(t)
            .ok_or_else(|| Error::MissingCategory(t.trial_id.clone()))?;
        counts.entry(group).or_insert_with(|| vec![0; width])[idx] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(group, c)| {
            let n: usize = c.iter().sum();
            CategoryRow {
                group,
                trials: n,
                percentages: c.iter().map(|&k| 100.0 * k as f64 / n as f64).collect(),
            }
        })
        .collect())
}

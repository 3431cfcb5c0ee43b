//! Shared domain types and trajectory preparation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn horizontal_norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn lerp(self, o: Vec3, u: f64) -> Vec3 {
        Vec3::new(
            self.x + (o.x - self.x) * u,
            self.y + (o.y - self.y) * u,
            self.z + (o.z - self.z) * u,
        )
    }

    pub fn axis(self, i: usize) -> f64 {
        match i {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Point in the floor plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, o: Vec2) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

/// Duration recorded by an administrator, in minutes.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Minutes(pub f64);

impl Minutes {
    pub fn seconds(self) -> f64 {
        self.0 * 60.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseSample {
    pub t: f64,
    pub pos: Vec3,
    pub vel: Option<Vec3>,
    pub acc: Option<Vec3>,
}

impl PoseSample {
    pub fn at(t: f64, pos: Vec3) -> Self {
        Self {
            t,
            pos,
            vel: None,
            acc: None,
        }
    }

    fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.pos.is_finite()
            && self.vel.is_none_or(Vec3::is_finite)
            && self.acc.is_none_or(Vec3::is_finite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackingSource {
    #[default]
    Internal,
    External,
}

/// Time-ordered samples with at least two entries and strictly increasing time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<PoseSample>,
    source: TrackingSource,
    marker_offset: Vec3,
}

impl Trajectory {
    pub fn new(samples: Vec<PoseSample>) -> Result<Self> {
        Self::with_source(samples, TrackingSource::Internal, Vec3::ZERO)
    }

    pub fn with_source(
        samples: Vec<PoseSample>,
        source: TrackingSource,
        marker_offset: Vec3,
    ) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InsufficientSamples {
                needed: 2,
                got: samples.len(),
            });
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::InvalidInput(format!("sample {i} is not finite")));
        }
        if !marker_offset.is_finite() {
            return Err(Error::InvalidInput("marker offset is not finite".into()));
        }
        if let Some(i) = samples.windows(2).position(|w| w[1].t <= w[0].t) {
            return Err(Error::NonMonotonicTime(i + 1));
        }
        Ok(Self {
            samples,
            source,
            marker_offset,
        })
    }

    pub fn samples(&self) -> &[PoseSample] {
        &self.samples
    }

    pub fn source(&self) -> TrackingSource {
        self.source
    }

    pub fn marker_offset(&self) -> Vec3 {
        self.marker_offset
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    pub fn has_velocity(&self) -> bool {
        self.samples.iter().all(|s| s.vel.is_some())
    }

    pub fn has_acceleration(&self) -> bool {
        self.samples.iter().all(|s| s.acc.is_some())
    }

    /// Same trajectory with a different marker offset.
    pub fn set_marker_offset(mut self, offset: Vec3) -> Self {
        self.marker_offset = offset;
        self
    }

    /// Translate every position by the negated marker offset.
    pub fn apply_marker_offset(&self) -> Trajectory {
        let off = self.marker_offset;
        let samples = self
            .samples
            .iter()
            .map(|s| PoseSample {
                pos: s.pos - off,
                ..*s
            })
            .collect();
        Trajectory {
            samples,
            source: self.source,
            marker_offset: off,
        }
    }

    /// Replace samples without re-validating; callers keep the time grid intact.
    pub(crate) fn map_samples(&self, f: impl Fn(usize, &PoseSample) -> PoseSample) -> Trajectory {
        Trajectory {
            samples: self
                .samples
                .iter()
                .enumerate()
                .map(|(i, s)| f(i, s))
                .collect(),
            source: self.source,
            marker_offset: self.marker_offset,
        }
    }
}

/// A resampled trajectory plus the source gaps wider than three output periods.
#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub trajectory: Trajectory,
    pub dropouts: Vec<(f64, f64)>,
}

impl Resampled {
    pub fn flagged(&self) -> bool {
        !self.dropouts.is_empty()
    }
}

pub fn resample_uniform(traj: &Trajectory, rate_hz: f64) -> Result<Resampled> {
    if !(rate_hz.is_finite() && rate_hz > 0.0) {
        return Err(Error::InvalidInput(format!("rate {rate_hz} Hz")));
    }
    let (t0, t1) = (traj.start(), traj.end());
    let span = t1 - t0;
    let step = 1.0 / rate_hz;
    if span + 1e-12 < step {
        return Err(Error::EmptySpan);
    }
    let count = (span * rate_hz + 1e-9).floor() as usize + 1;
    let src = traj.samples();
    let with_vel = traj.has_velocity();
    let with_acc = traj.has_acceleration();

    let mut out = Vec::with_capacity(count);
    let mut seg = 0usize;
    for k in 0..count {
        let t = (t0 + k as f64 / rate_hz).min(t1);
        while seg + 2 < src.len() && src[seg + 1].t < t {
            seg += 1;
        }
        let (a, b) = (&src[seg], &src[seg + 1]);
        let u = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        let pick = |x: Option<Vec3>, y: Option<Vec3>| match (x, y) {
            (Some(x), Some(y)) => Some(x.lerp(y, u)),
            _ => None,
        };
        out.push(PoseSample {
            t: t0 + k as f64 / rate_hz,
            pos: interp(a.pos, b.pos, u),
            vel: if with_vel { pick(a.vel, b.vel) } else { None },
            acc: if with_acc { pick(a.acc, b.acc) } else { None },
        });
    }
    let dropouts = src
        .windows(2)
        .filter(|w| w[1].t - w[0].t > 3.0 * step)
        .map(|w| (w[0].t, w[1].t))
        .collect();
    let trajectory =
        Trajectory::with_source(out, traj.source(), traj.marker_offset()).map_err(|e| match e {
            Error::InsufficientSamples { .. } => Error::EmptySpan,
            other => other,
        })?;
    Ok(Resampled {
        trajectory,
        dropouts,
    })
}

fn interp(a: Vec3, b: Vec3, u: f64) -> Vec3 {
    if u == 0.0 {
        a
    } else if u == 1.0 {
        b
    } else {
        a.lerp(b, u)
    }
}

/// Per-axis mean (accuracy) and sample standard deviation (precision) of a static recording.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub accuracy: Vec3,
    pub precision: Vec3,
}

pub fn tracker_calibration(static_traj: &Trajectory) -> Result<Calibration> {
    let s = static_traj.samples();
    if s.len() < 2 {
        return Err(Error::EmptySpan);
    }
    let n = s.len() as f64;
    let mut mean = [0.0; 3];
    let mut std = [0.0; 3];
    for (axis, (m, sd)) in mean.iter_mut().zip(std.iter_mut()).enumerate() {
        *m = s.iter().map(|p| p.pos.axis(axis)).sum::<f64>() / n;
        let ss: f64 = s.iter().map(|p| (p.pos.axis(axis) - *m).powi(2)).sum();
        *sd = (ss / (n - 1.0)).sqrt();
    }
    Ok(Calibration {
        accuracy: Vec3::new(mean[0], mean[1], mean[2]),
        precision: Vec3::new(std[0], std[1], std[2]),
    })
}

macro_rules! category_enum {
    ($(#[$m:meta])* $name:ident { $($var:ident => $s:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name { $($var),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$var),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$var => $s),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s.trim() {
                    $($s => Ok($name::$var),)+
                    other => Err(other.to_string()),
                }
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
                ser.serialize_str(self.as_str())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(de)?;
                s.parse().map_err(|v| serde::de::Error::custom(format!("unknown category {v}")))
            }
        }
    };
}

category_enum!(
    /// Obstacle-avoidance outcome; declaration order is best to worst.
    OaCategory {
        A1 => "OA-A1",
        B1 => "OA-B1",
        B2 => "OA-B2",
        B3 => "OA-B3",
        B4 => "OA-B4",
        C1 => "OA-C1",
    }
);

category_enum!(
    /// Collision-resilience outcome; declaration order is best to worst.
    CrCategory {
        A1 => "CR-A1",
        A2 => "CR-A2",
        A3 => "CR-A3",
        B1 => "CR-B1",
        B2 => "CR-B2",
        B3 => "CR-B3",
        B4 => "CR-B4",
        C1 => "CR-C1",
    }
);

category_enum!(
    /// Aperture pass-through result; declaration order is best to worst.
    ApertureTier {
        A1 => "A1",
        A2 => "A2",
        A3 => "A3",
        B1 => "B1",
    }
);

category_enum!(
    Outcome {
        Success => "success",
        Failure => "failure",
    }
);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: String,
    pub test_id: String,
    pub suas_id: String,
    pub outcome: Outcome,
    pub collisions: u32,
    pub rollovers: u32,
    pub oa_category: Option<OaCategory>,
    pub cr_category: Option<CrCategory>,
    pub aperture_tier: Option<ApertureTier>,
    pub t_collision_s: Option<f64>,
    pub duration: Minutes,
    pub laps: Option<u32>,
    pub notes: String,
}

impl TrialRecord {
    pub fn new(trial_id: &str, test_id: &str, suas_id: &str, outcome: Outcome) -> Self {
        Self {
            trial_id: trial_id.into(),
            test_id: test_id.into(),
            suas_id: suas_id.into(),
            outcome,
            collisions: 0,
            rollovers: 0,
            oa_category: None,
            cr_category: None,
            aperture_tier: None,
            t_collision_s: None,
            duration: Minutes(0.0),
            laps: None,
            notes: String::new(),
        }
    }

    pub fn collided(&self) -> bool {
        self.collisions > 0
    }

    /// Checks the collision time against a trajectory span when both are known.
    pub fn check_span(&self, traj: &Trajectory) -> Result<()> {
        match self.t_collision_s {
            Some(t_c) if t_c < traj.start() || t_c > traj.end() => {
                Err(Error::CollisionOutsideSpan {
                    t_c,
                    start: traj.start(),
                    end: traj.end(),
                })
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleKind {
    PlaneSegment,
    InfinitePlane,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Material {
    Wall,
    Mesh,
    ChainLink,
    DoorClosed,
    Door45,
    DoorOpen,
}

impl Material {
    pub fn label(self) -> &'static str {
        match self {
            Material::Wall => "Wall",
            Material::Mesh => "Plastic mesh",
            Material::ChainLink => "Chain link fence",
            Material::DoorClosed => "Door (closed)",
            Material::Door45 => "Door (45 deg)",
            Material::DoorOpen => "Door (open)",
        }
    }
}

/// Vertical obstacle standing on the floor plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObstacleGeometry {
    pub kind: ObstacleKind,
    pub p0: Vec2,
    pub p1: Vec2,
    pub height: f64,
    pub material: Material,
}

impl ObstacleGeometry {
    pub fn new(
        kind: ObstacleKind,
        p0: Vec2,
        p1: Vec2,
        height: f64,
        material: Material,
    ) -> Result<Self> {
        if !(height.is_finite() && height > 0.0) {
            return Err(Error::InvalidInput(format!(
                "obstacle height {height} must be positive"
            )));
        }
        if p0 == p1 {
            return Err(Error::InvalidInput(
                "obstacle endpoints must differ".into(),
            ));
        }
        Ok(Self {
            kind,
            p0,
            p1,
            height,
            material,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lighting {
    Lighted,
    Dark,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Obstruction {
    pub count: u32,
    pub material: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentProfile {
    pub lighting: Lighting,
    #[serde(default)]
    pub lux: Option<f64>,
    #[serde(default)]
    pub dims: Option<[f64; 3]>,
    #[serde(default)]
    pub surfaces: Vec<String>,
    #[serde(default)]
    pub obstructions: Vec<Obstruction>,
    #[serde(default = "default_true")]
    pub indoor: bool,
}

fn default_true() -> bool {
    true
}

impl EnvironmentProfile {
    /// Lighted needs at least 100 lux and dark under 1 lux, when lux was measured.
    pub fn validate(&self) -> Result<()> {
        match (self.lighting, self.lux) {
            (Lighting::Lighted, Some(l)) if l < 100.0 => Err(Error::InvalidInput(format!(
                "lighted environment measured at {l} lux"
            ))),
            (Lighting::Dark, Some(l)) if l >= 1.0 => Err(Error::InvalidInput(format!(
                "dark environment measured at {l} lux"
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuasDescriptor {
    pub id: String,
    #[serde(default)]
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    #[serde(default = "default_kind")]
    pub kind: ObstacleKind,
    pub p0: [f64; 2],
    pub p1: [f64; 2],
    pub height: f64,
    pub material: Material,
}

fn default_kind() -> ObstacleKind {
    ObstacleKind::PlaneSegment
}

impl ObstacleSpec {
    pub fn geometry(&self) -> Result<ObstacleGeometry> {
        ObstacleGeometry::new(
            self.kind,
            Vec2::new(self.p0[0], self.p0[1]),
            Vec2::new(self.p1[0], self.p1[1]),
            self.height,
            self.material,
        )
    }
}

/// One test method set-up: a type tag plus whatever geometry the metrics need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestDefinition {
    pub id: String,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub environment: Option<String>,
    #[serde(default)]
    pub path: Option<Vec<[f64; 3]>>,
    #[serde(default)]
    pub closed: bool,
    #[serde(default)]
    pub obstacle: Option<ObstacleSpec>,
    #[serde(default)]
    pub waypoint: Option<[f64; 3]>,
    #[serde(default)]
    pub lap_length_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedEnvironment {
    pub id: String,
    #[serde(flatten)]
    pub profile: EnvironmentProfile,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Campaign {
    pub schema_version: String,
    pub suas: Vec<SuasDescriptor>,
    pub tests: Vec<TestDefinition>,
    pub environments: Vec<NamedEnvironment>,
    pub trials: Vec<TrialRecord>,
    /// trial id to resolved telemetry path
    pub telemetry: BTreeMap<String, PathBuf>,
}

impl Campaign {
    pub fn test(&self, id: &str) -> Option<&TestDefinition> {
        self.tests.iter().find(|t| t.id == id)
    }

    pub fn trials_for<'a>(&'a self, test_id: &'a str) -> impl Iterator<Item = &'a TrialRecord> {
        self.trials.iter().filter(move |t| t.test_id == test_id)
    }
}

/// Landolt C gap sizes used on the acuity targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LandoltLevel {
    Mm20,
    Mm8,
    Mm3,
    Mm1_3,
    Mm0_5,
}

impl LandoltLevel {
    pub const ALL: [LandoltLevel; 5] = [
        LandoltLevel::Mm20,
        LandoltLevel::Mm8,
        LandoltLevel::Mm3,
        LandoltLevel::Mm1_3,
        LandoltLevel::Mm0_5,
    ];

    pub fn mm(self) -> f64 {
        match self {
            LandoltLevel::Mm20 => 20.0,
            LandoltLevel::Mm8 => 8.0,
            LandoltLevel::Mm3 => 3.0,
            LandoltLevel::Mm1_3 => 1.3,
            LandoltLevel::Mm0_5 => 0.5,
        }
    }

    pub fn from_mm(mm: f64) -> Option<Self> {
        Self::ALL.into_iter().find(|l| (l.mm() - mm).abs() < 1e-9)
    }
}

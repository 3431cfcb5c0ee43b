//! Field readiness: endurance, room clearing, noise, NLOS reach, video latency and
//! checklist matching.

use std::collections::HashSet;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::{LandoltLevel, Minutes, Obstruction};
use crate::stats;

/// Nominal length of one figure-8 lap.
pub const LAP_LENGTH_M: f64 = 13.0;
pub const MIN_LATENCY_TRIALS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Endurance {
    pub laps: u32,
    pub distance_m: f64,
    pub avg_speed_mps: f64,
}

pub fn endurance_metrics(laps: u32, duration: Minutes) -> Result<Endurance> {
    if !(duration.0 > 0.0) {
        return Err(Error::ZeroDuration);
    }
    let distance_m = LAP_LENGTH_M * f64::from(laps);
    Ok(Endurance {
        laps,
        distance_m,
        avg_speed_mps: distance_m / duration.seconds(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surface {
    Wall,
    Floor,
    Ceiling,
}

impl Surface {
    pub const ALL: [Surface; 3] = [Surface::Wall, Surface::Floor, Surface::Ceiling];

    /// Targets mounted on each surface class in the standard room.
    pub fn target_count(self) -> usize {
        match self {
            Surface::Wall => 18,
            Surface::Floor => 5,
            Surface::Ceiling => 5,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Surface::Wall => "Walls",
            Surface::Floor => "Floor",
            Surface::Ceiling => "Ceiling",
        }
    }
}

pub const ROOM_TARGETS: usize = 28;

#[derive(Debug, Clone, PartialEq)]
pub struct AcuityObservation {
    pub target_id: String,
    pub surface: Surface,
    pub resolved: Option<LandoltLevel>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceCoverage {
    pub surface: Surface,
    pub seen: usize,
    pub total: usize,
    pub coverage_pct: f64,
    pub acuity_mean_mm: Option<f64>,
    pub acuity_std_mm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoomClearing {
    pub surfaces: Vec<SurfaceCoverage>,
    pub overall: SurfaceCoverageTotal,
    pub duration_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurfaceCoverageTotal {
    pub seen: usize,
    pub total: usize,
    pub coverage_pct: f64,
    pub acuity_mean_mm: Option<f64>,
    pub acuity_std_mm: Option<f64>,
}

pub fn room_clearing_summary(
    observations: &[AcuityObservation],
    duration: Minutes,
) -> Result<RoomClearing> {
    let mut ids = HashSet::new();
    for o in observations {
        if !ids.insert(o.target_id.as_str()) {
            return Err(Error::DuplicateTarget(o.target_id.clone()));
        }
    }
    let acuity = |levels: &[f64]| (stats::mean(levels), stats::sample_std(levels));
    let mut surfaces = Vec::new();
    for surface in Surface::ALL {
        let levels: Vec<f64> = observations
            .iter()
            .filter(|o| o.surface == surface)
            .filter_map(|o| o.resolved.map(LandoltLevel::mm))
            .collect();
        let total = surface.target_count();
        if levels.len() > total {
            return Err(Error::CountOutOfRange {
                count: levels.len(),
                total,
            });
        }
        let (m, s) = acuity(&levels);
        surfaces.push(SurfaceCoverage {
            surface,
            seen: levels.len(),
            total,
            coverage_pct: 100.0 * levels.len() as f64 / total as f64,
            acuity_mean_mm: m,
            acuity_std_mm: s,
        });
    }
    let all: Vec<f64> = observations
        .iter()
        .filter_map(|o| o.resolved.map(LandoltLevel::mm))
        .collect();
    let (m, s) = acuity(&all);
    let warning = all
        .is_empty()
        .then(|| "no acuity targets were identified".to_string());
    Ok(RoomClearing {
        surfaces,
        overall: SurfaceCoverageTotal {
            seen: all.len(),
            total: ROOM_TARGETS,
            coverage_pct: 100.0 * all.len() as f64 / ROOM_TARGETS as f64,
            acuity_mean_mm: m,
            acuity_std_mm: s,
        },
        duration_min: duration.0,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseRow {
    pub condition: String,
    pub mean_db: f64,
    pub delta_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseSummary {
    pub ambient_db: f64,
    pub rows: Vec<NoiseRow>,
}

pub fn noise_summary(
    ambient: &[f64],
    conditions: &IndexMap<String, Vec<f64>>,
) -> Result<NoiseSummary> {
    let ambient_db = stats::mean(ambient).ok_or(Error::EmptySample)?;
    let rows = conditions
        .iter()
        .map(|(name, samples)| {
            let mean_db = stats::mean(samples).ok_or(Error::EmptySample)?;
            Ok(NoiseRow {
                condition: name.clone(),
                mean_db,
                delta_db: mean_db - ambient_db,
            })
        })
        .collect::<Result<_>>()?;
    Ok(NoiseSummary { ambient_db, rows })
}

/// Three-state link quality cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    Good,
    Bad,
    None,
}

impl Link {
    pub fn glyph(self) -> &'static str {
        match self {
            Link::Good => "\u{2713}",
            Link::Bad => "/",
            Link::None => "X",
        }
    }

    pub fn ascii(self) -> &'static str {
        match self {
            Link::Good => "ok",
            Link::Bad => "bad",
            Link::None => "none",
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.glyph())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flight {
    Possible,
    NotPossible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlosPosition {
    pub label: String,
    pub distance_m: f64,
    #[serde(default)]
    pub obstructions: Vec<Obstruction>,
    pub connect: Link,
    pub fly: Flight,
    #[serde(default)]
    pub latency_frames: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reach {
    pub distance_m: f64,
    pub obstructions: Vec<Obstruction>,
}

impl Reach {
    pub fn describe(&self) -> String {
        let obs: Vec<String> = self
            .obstructions
            .iter()
            .map(|o| format!("{} {}", o.count, o.material))
            .collect();
        if obs.is_empty() {
            format!("{} m", fmt_trim(self.distance_m))
        } else {
            format!("{} m, {}", fmt_trim(self.distance_m), obs.join(", "))
        }
    }
}

fn fmt_trim(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NlosMax {
    /// `None` renders as 0: no position held a good link.
    pub static_max: Option<Reach>,
    pub fly_max: Option<Reach>,
}

pub fn nlos_max_performance(positions: &[NlosPosition]) -> NlosMax {
    let furthest = |pred: &dyn Fn(&NlosPosition) -> bool| {
        positions
            .iter()
            .filter(|p| pred(p))
            .max_by(|a, b| a.distance_m.total_cmp(&b.distance_m))
            .map(|p| Reach {
                distance_m: p.distance_m,
                obstructions: p.obstructions.clone(),
            })
    };
    NlosMax {
        static_max: furthest(&|p| p.connect == Link::Good),
        fly_max: furthest(&|p| p.fly == Flight::Possible),
    }
}

pub fn video_latency(frames: u32, fps: f64) -> Result<f64> {
    if !(fps > 0.0) {
        return Err(Error::ZeroFps);
    }
    Ok(1000.0 * f64::from(frames) / fps)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencySummary {
    pub trials: usize,
    pub mean_ms: f64,
    pub std_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Latency from (frame count, fps) pairs, one per trial.
pub fn latency_summary(trials: &[(u32, f64)]) -> Result<LatencySummary> {
    let ms = trials
        .iter()
        .map(|&(f, fps)| video_latency(f, fps))
        .collect::<Result<Vec<_>>>()?;
    let s = stats::summarize(&ms)?;
    let warning = (ms.len() < MIN_LATENCY_TRIALS).then(|| {
        format!(
            "only {} latency trials; at least {MIN_LATENCY_TRIALS} are expected",
            ms.len()
        )
    });
    Ok(LatencySummary {
        trials: ms.len(),
        mean_ms: s.mean,
        std_ms: s.std,
        warning,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "value", rename_all = "snake_case")]
pub enum Criterion {
    Equals(Value),
    Min(f64),
    Max(f64),
    Contains(String),
}

impl Criterion {
    fn check(&self, v: &Value) -> std::result::Result<bool, String> {
        let num = || {
            v.as_f64()
                .or_else(|| v.as_str().and_then(|s| s.trim().parse().ok()))
                .ok_or_else(|| format!("response {v} is not numeric"))
        };
        Ok(match self {
            Criterion::Equals(want) => match (want, v) {
                (Value::String(a), Value::String(b)) => a.trim().eq_ignore_ascii_case(b.trim()),
                (Value::Number(a), _) => a.as_f64() == num().ok(),
                _ => want == v,
            },
            Criterion::Min(m) => num()? >= *m,
            Criterion::Max(m) => num()? <= *m,
            Criterion::Contains(s) => v
                .as_str()
                .map(|text| text.to_lowercase().contains(&s.to_lowercase()))
                .ok_or_else(|| format!("response {v} is not text"))?,
        })
    }
}

pub type ChecklistCriteria = IndexMap<String, Criterion>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldCheck {
    pub field: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RequirementsMet {
    pub fields: Vec<FieldCheck>,
    pub percentage: f64,
}

pub fn requirements_met(
    responses: &IndexMap<String, Value>,
    criteria: &ChecklistCriteria,
) -> Result<RequirementsMet> {
    if criteria.is_empty() {
        return Err(Error::EmptySample);
    }
    let fields: Vec<FieldCheck> = criteria
        .iter()
        .map(|(field, c)| {
            let (pass, note) = match responses.get(field) {
                None | Some(Value::Null) => (false, Some("no response".to_string())),
                Some(v) => match c.check(v) {
                    Ok(p) => (p, None),
                    Err(msg) => (false, Some(msg)),
                },
            };
            FieldCheck {
                field: field.clone(),
                pass,
                note,
            }
        })
        .collect();
    let passed = fields.iter().filter(|f| f.pass).count();
    Ok(RequirementsMet {
        percentage: 100.0 * passed as f64 / fields.len() as f64,
        fields,
    })
}

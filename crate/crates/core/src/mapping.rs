//! Map resolution and accuracy scoring from administrator measurements.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LandoltLevel, Vec2};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappedState {
    Complete,
    Partial,
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiducialObservation {
    pub fiducial_id: String,
    pub half: u8,
    pub map_xy: Option<Vec2>,
    pub mapped: MappedState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiducialGroundTruth {
    pub fiducial_id: String,
    pub gt_xy: Vec2,
    pub min_traversal_m: f64,
    pub min_turns: u32,
}

pub fn dimensional_accuracy(reported: &[f64], truth: &[f64]) -> Result<f64> {
    if reported.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: reported.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() || truth.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidInput(
            "ground-truth dimensions must be positive".into(),
        ));
    }
    Ok(100.0 * reported.iter().sum::<f64>() / truth.iter().sum::<f64>())
}

pub fn fov_coverage(visible: usize, total: usize) -> Result<f64> {
    if total == 0 || visible > total {
        return Err(Error::CountOutOfRange {
            count: visible,
            total,
        });
    }
    Ok(100.0 * visible as f64 / total as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeClass {
    Complete,
    Incomplete,
    Shifted,
}

pub fn shape_accuracy_rate(classes: &[ShapeClass]) -> Result<f64> {
    if classes.is_empty() {
        return Err(Error::EmptySample);
    }
    let complete = classes
        .iter()
        .filter(|&&c| c == ShapeClass::Complete)
        .count();
    Ok(100.0 * complete as f64 / classes.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalError {
    pub scale: f64,
    pub error_cm: f64,
    pub matched: usize,
    pub pairs: usize,
}

/// Fiducial map positions: the mean of each fiducial's located halves.
pub fn fiducial_positions(obs: &[FiducialObservation]) -> BTreeMap<String, Vec2> {
    let mut acc: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
    for o in obs {
        if let (Some(p), false) = (o.map_xy, o.mapped == MappedState::Missing) {
            let e = acc.entry(o.fiducial_id.clone()).or_default();
            e.0 += p.x;
            e.1 += p.y;
            e.2 += 1;
        }
    }
    acc.into_iter()
        .map(|(id, (x, y, n))| (id, Vec2::new(x / n as f64, y / n as f64)))
        .collect()
}

/// Mean pairwise distance error after fitting one map-to-meters scale by least squares.
pub fn global_error(obs: &[FiducialObservation], truth: &[FiducialGroundTruth]) -> Result<GlobalError> {
    let mapped = fiducial_positions(obs);
    let matched: Vec<(Vec2, Vec2)> = truth
        .iter()
        .filter_map(|g| mapped.get(&g.fiducial_id).map(|&m| (m, g.gt_xy)))
        .collect();
    if matched.len() < 3 {
        return Err(Error::TooFewFiducials(matched.len()));
    }
    let mut pairs = Vec::new();
    for i in 0..matched.len() {
        for j in i + 1..matched.len() {
            pairs.push((
                matched[i].0.distance(matched[j].0),
                matched[i].1.distance(matched[j].1),
            ));
        }
    }
    let num: f64 = pairs.iter().map(|(m, g)| m * g).sum();
    let den: f64 = pairs.iter().map(|(m, _)| m * m).sum();
    if den == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let scale = num / den;
    let err: Vec<f64> = pairs.iter().map(|(m, g)| (scale * m - g).abs()).collect();
    Ok(GlobalError {
        scale,
        error_cm: 100.0 * stats::mean(&err).unwrap_or(0.0),
        matched: matched.len(),
        pairs: pairs.len(),
    })
}

pub fn fiducial_coverage(obs: &[FiducialObservation], truth: &[FiducialGroundTruth]) -> Result<f64> {
    if truth.is_empty() {
        return Err(Error::EmptySample);
    }
    let known: std::collections::HashSet<&str> =
        truth.iter().map(|g| g.fiducial_id.as_str()).collect();
    let mapped = obs
        .iter()
        .filter(|o| o.mapped != MappedState::Missing && known.contains(o.fiducial_id.as_str()))
        .map(|o| (o.fiducial_id.as_str(), o.half))
        .collect::<std::collections::HashSet<_>>()
        .len();
    Ok(100.0 * mapped as f64 / (2 * truth.len()) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Difficulty {
    L,
    M,
    H,
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::L => "L",
            Difficulty::M => "M",
            Difficulty::H => "H",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifficultyThresholds {
    pub high_traversal_m: f64,
    pub high_turns: u32,
    pub low_traversal_m: f64,
    pub low_turns: u32,
}

impl Default for DifficultyThresholds {
    fn default() -> Self {
        Self {
            high_traversal_m: 20.0,
            high_turns: 5,
            low_traversal_m: 10.0,
            low_turns: 2,
        }
    }
}

impl DifficultyThresholds {
    pub fn rate(&self, min_traversal_m: f64, min_turns: u32) -> Difficulty {
        if min_traversal_m >= self.high_traversal_m || min_turns >= self.high_turns {
            Difficulty::H
        } else if min_traversal_m <= self.low_traversal_m && min_turns <= self.low_turns {
            Difficulty::L
        } else {
            Difficulty::M
        }
    }
}

pub fn difficulty_rating(min_traversal_m: f64, min_turns: u32) -> Difficulty {
    DifficultyThresholds::default().rate(min_traversal_m, min_turns)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcuitySummary {
    pub mean_mm: f64,
    pub std_mm: f64,
    pub n: usize,
}

pub fn acuity_summary(levels_mm: &[f64]) -> Result<AcuitySummary> {
    if let Some(bad) = levels_mm.iter().find(|&&l| LandoltLevel::from_mm(l).is_none()) {
        return Err(Error::InvalidInput(format!(
            "{bad} mm is not a Landolt level"
        )));
    }
    let s = stats::summarize(levels_mm)?;
    Ok(AcuitySummary {
        mean_mm: s.mean,
        std_mm: s.std,
        n: s.n,
    })
}

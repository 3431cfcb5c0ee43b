//! Mission-independent autonomy ranking from vendor feature sheets.
//!
//! Each system's component potential is a weighted product of its encoded features,
//! with lower-is-better features entering through a negated exponent. The potential
//! pairs with the count of autonomy capabilities to form a coordinate; systems are
//! ranked by distance from the origin and compared by distance to the best one.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "higher")]
    HigherBetter,
    #[serde(rename = "lower")]
    LowerBetter,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::HigherBetter => 1.0,
            Direction::LowerBetter => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub direction: Direction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinal_map: Option<IndexMap<String, f64>>,
    /// Degree of autonomy the feature supports, for degree-based weighting.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValue {
    Number(f64),
    Token(String),
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AutonomyCapabilities {
    #[serde(default)]
    pub perception: bool,
    #[serde(default)]
    pub modeling: bool,
    #[serde(default)]
    pub planning: bool,
    #[serde(default)]
    pub execution: bool,
}

/// Number of capability areas present, 0 to 4.
pub fn autonomy_level(caps: &AutonomyCapabilities) -> u8 {
    [caps.perception, caps.modeling, caps.planning, caps.execution]
        .iter()
        .filter(|&&b| b)
        .count() as u8
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemRow {
    pub id: String,
    pub values: IndexMap<String, FeatureValue>,
    pub capabilities: Option<AutonomyCapabilities>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub features: Vec<FeatureSpec>,
    pub systems: Vec<SystemRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EncodedTable {
    pub system_ids: Vec<String>,
    pub feature_names: Vec<String>,
    pub directions: Vec<Direction>,
    /// rows = systems, columns = features
    pub values: Vec<Vec<f64>>,
    /// (system, feature) pairs that were filled in for a missing value
    pub filled: Vec<(String, String)>,
}

pub fn encode_features(table: &FeatureTable) -> Result<EncodedTable> {
    let nf = table.features.len();
    let mut cells: Vec<Vec<Option<f64>>> = Vec::with_capacity(table.systems.len());
    for sys in &table.systems {
        let mut row = Vec::with_capacity(nf);
        for f in &table.features {
            let v = sys.values.get(&f.name).unwrap_or(&FeatureValue::Absent);
            let encoded = match (v, &f.ordinal_map) {
                (FeatureValue::Absent, _) => None,
                (FeatureValue::Number(x), _) => Some(*x),
                (FeatureValue::Token(t), Some(map)) => Some(*map.get(t.trim()).ok_or_else(|| {
                    Error::UnmappedToken {
                        feature: f.name.clone(),
                        token: t.clone(),
                    }
                })?),
                (FeatureValue::Token(t), None) => {
                    return Err(Error::UnmappedToken {
                        feature: f.name.clone(),
                        token: t.clone(),
                    })
                }
            };
            if let Some(x) = encoded {
                if !(x.is_finite() && x > 0.0) {
                    return Err(Error::NonPositiveValue {
                        feature: f.name.clone(),
                        system: sys.id.clone(),
                        value: x,
                    });
                }
            }
            row.push(encoded);
        }
        cells.push(row);
    }

    let mut filled = Vec::new();
    let mut fill = Vec::with_capacity(nf);
    for (j, f) in table.features.iter().enumerate() {
        let cohort_min = cells
            .iter()
            .filter_map(|r| r[j])
            .fold(f64::INFINITY, f64::min);
        let value = if cohort_min.is_finite() {
            cohort_min
        } else if let Some(map) = &f.ordinal_map {
            let lowest = map.values().copied().fold(f64::INFINITY, f64::min);
            if lowest.is_finite() { lowest } else { 1.0 }
        } else {
            1.0
        };
        fill.push(value);
    }
    let values = cells
        .iter()
        .zip(&table.systems)
        .map(|(row, sys)| {
            row.iter()
                .enumerate()
                .map(|(j, c)| {
                    c.unwrap_or_else(|| {
                        filled.push((sys.id.clone(), table.features[j].name.clone()));
                        fill[j]
                    })
                })
                .collect()
        })
        .collect();
    Ok(EncodedTable {
        system_ids: table.systems.iter().map(|s| s.id.clone()).collect(),
        feature_names: table.features.iter().map(|f| f.name.clone()).collect(),
        directions: table.features.iter().map(|f| f.direction).collect(),
        values,
        filled,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum WeightScheme {
    Uniform,
    /// Degree of autonomy per feature; raw weight 2^-n.
    DegreeOfAutonomy { degrees: IndexMap<String, u32> },
    Explicit { weights: IndexMap<String, f64> },
}

impl WeightScheme {
    /// Degree-based scheme from the degrees declared on a sheet's features.
    pub fn degrees_from(table: &FeatureTable) -> Result<Self> {
        let degrees = table
            .features
            .iter()
            .map(|f| {
                f.degree
                    .map(|d| (f.name.clone(), d))
                    .ok_or_else(|| Error::InvalidInput(format!("feature {} declares no degree", f.name)))
            })
            .collect::<Result<_>>()?;
        Ok(WeightScheme::DegreeOfAutonomy { degrees })
    }

    /// Weights aligned with `features`, normalized to sum to 1.
    pub fn normalized(&self, features: &[String]) -> Result<Vec<f64>> {
        if features.is_empty() {
            return Err(Error::EmptySample);
        }
        let raw: Vec<f64> = match self {
            WeightScheme::Uniform => vec![1.0; features.len()],
            WeightScheme::DegreeOfAutonomy { degrees } => features
                .iter()
                .map(|f| {
                    degrees
                        .get(f)
                        .map(|&n| 2f64.powi(-(n as i32)))
                        .ok_or_else(|| Error::InvalidInput(format!("no degree for feature {f}")))
                })
                .collect::<Result<_>>()?,
            WeightScheme::Explicit { weights } => features
                .iter()
                .map(|f| {
                    weights
                        .get(f)
                        .copied()
                        .ok_or_else(|| Error::InvalidInput(format!("no weight for feature {f}")))
                })
                .collect::<Result<_>>()?,
        };
        if raw.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidInput(
                "weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidInput("weights sum to zero".into()));
        }
        Ok(raw.iter().map(|w| w / total).collect())
    }
}

/// Product of values raised to their signed weights.
pub fn weighted_product(values: &[f64], weights: &[f64], directions: &[Direction]) -> Result<f64> {
    if values.len() != weights.len() || values.len() != directions.len() {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: weights.len().min(directions.len()),
        });
    }
    let mut log_sum = 0.0;
    for ((&v, &w), d) in values.iter().zip(weights).zip(directions) {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::DomainError(v));
        }
        log_sum += d.sign() * w * v.ln();
    }
    Ok(log_sum.exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NcapEntry {
    pub id: String,
    pub n_al: u8,
    pub n_cp: f64,
    pub absolute_distance: f64,
    pub relative_distance: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NcapResult {
    /// Ordered by rank.
    pub entries: Vec<NcapEntry>,
    pub best: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Distances from the origin and from the best system for (id, N_AL, N_CP) triples.
pub fn autonomy_distances(systems: &[(String, u8, f64)]) -> Result<NcapResult> {
    if systems.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut entries: Vec<NcapEntry> = systems
        .iter()
        .map(|(id, n_al, n_cp)| NcapEntry {
            id: id.clone(),
            n_al: *n_al,
            n_cp: *n_cp,
            absolute_distance: f64::from(*n_al).hypot(*n_cp),
            relative_distance: 0.0,
            rank: 0,
        })
        .collect();
    entries.sort_by(|a, b| {
        b.absolute_distance
            .total_cmp(&a.absolute_distance)
            .then(b.n_al.cmp(&a.n_al))
            .then(a.id.cmp(&b.id))
    });
    let warning = (entries.len() > 1
        && entries[0].absolute_distance == entries[1].absolute_distance)
        .then(|| {
            format!(
                "{} and {} tie on absolute distance; {} chosen as best",
                entries[0].id, entries[1].id, entries[0].id
            )
        });
    let (bx, by) = (f64::from(entries[0].n_al), entries[0].n_cp);
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
        e.relative_distance = if i == 0 {
            0.0
        } else {
            (f64::from(e.n_al) - bx).hypot(e.n_cp - by)
        };
    }
    Ok(NcapResult {
        best: entries[0].id.clone(),
        entries,
        warning,
    })
}

/// Component potential for every system in a sheet.
pub fn component_potentials(table: &FeatureTable, scheme: &WeightScheme) -> Result<Vec<(String, f64)>> {
    let enc = encode_features(table)?;
    let w = scheme.normalized(&enc.feature_names)?;
    enc.system_ids
        .iter()
        .zip(&enc.values)
        .map(|(id, row)| Ok((id.clone(), weighted_product(row, &w, &enc.directions)?)))
        .collect()
}

/// Full ranking; systems without declared capabilities count as level 0.
pub fn rank_table(table: &FeatureTable, scheme: &WeightScheme) -> Result<NcapResult> {
    let potentials = component_potentials(table, scheme)?;
    let triples: Vec<(String, u8, f64)> = potentials
        .into_iter()
        .zip(&table.systems)
        .map(|((id, p), s)| (id, s.capabilities.as_ref().map_or(0, autonomy_level), p))
        .collect();
    autonomy_distances(&triples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const NAMES: [&str; 10] = [
        "flight_time_min",
        "charge_time_min",
        "stream_res",
        "fov_deg",
        "max_range_m",
        "thermal_res",
        "weight_g",
        "max_speed_mps",
        "sensors",
        "smart_behaviors",
    ];

    fn ordinal(pairs: &[(&str, f64)]) -> Option<IndexMap<String, f64>> {
        Some(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    fn sheet() -> FeatureTable {
        let features = NAMES
            .iter()
            .map(|&n| FeatureSpec {
                name: n.into(),
                direction: if n == "charge_time_min" || n == "weight_g" {
                    Direction::LowerBetter
                } else {
                    Direction::HigherBetter
                },
                ordinal_map: match n {
                    "stream_res" => ordinal(&[("FHD30p", 2.0), ("FHD", 3.0)]),
                    "thermal_res" => ordinal(&[("160x120", 1.0)]),
                    _ => None,
                },
                degree: None,
            })
            .collect();
        let row = |id: &str, vals: [FeatureValue; 10], caps: [bool; 4]| SystemRow {
            id: id.into(),
            values: NAMES.iter().map(|n| n.to_string()).zip(vals).collect(),
            capabilities: Some(AutonomyCapabilities {
                perception: caps[0],
                modeling: caps[1],
                planning: caps[2],
                execution: caps[3],
            }),
        };
        use FeatureValue::{Absent, Number as N, Token as T};
        FeatureTable {
            features,
            systems: vec![
                row(
                    "A",
                    [N(15.0), N(50.0), T("FHD".into()), N(100.0), N(2000.0), Absent, N(370.0), N(3.0), N(3.0), N(2.0)],
                    [true, true, true, false],
                ),
                row(
                    "B",
                    [N(10.0), N(90.0), T("FHD30p".into()), N(114.0), N(500.0), T("160x120".into()), N(1450.0), N(6.5), N(10.0), N(7.0)],
                    [true, false, false, false],
                ),
            ],
        }
    }

    fn user_weights() -> WeightScheme {
        let w = [0.07, 0.03, 0.1, 0.1, 0.05, 0.1, 0.05, 0.05, 0.15, 0.30];
        WeightScheme::Explicit {
            weights: NAMES.iter().map(|n| n.to_string()).zip(w).collect(),
        }
    }

    #[test]
    fn encoding_fills_absent_with_cohort_min() {
        let enc = encode_features(&sheet()).unwrap();
        assert_eq!(enc.values[0][2], 3.0);
        assert_eq!(enc.values[1][2], 2.0);
        assert_eq!(enc.values[0][5], 1.0);
        assert_eq!(enc.filled, vec![("A".to_string(), "thermal_res".to_string())]);
    }

    #[test]
    fn encoding_errors() {
        let mut t = sheet();
        t.systems[0].values.insert("fov_deg".into(), FeatureValue::Number(0.0));
        assert!(matches!(encode_features(&t), Err(Error::NonPositiveValue { .. })));
        let mut t = sheet();
        t.systems[0].values.insert("stream_res".into(), FeatureValue::Token("4K".into()));
        assert!(matches!(encode_features(&t), Err(Error::UnmappedToken { .. })));
    }

    #[test]
    fn uniform_potentials() {
        let p = component_potentials(&sheet(), &WeightScheme::Uniform).unwrap();
        assert!((p[0].1 - 2.48).abs() < 0.01);
        // The published row for B gives 2.29 here, not the tabulated 2.69.
        assert!((p[1].1 - 2.2905).abs() < 1e-4);
    }

    #[test]
    fn user_weight_potentials() {
        let p = component_potentials(&sheet(), &user_weights()).unwrap();
        assert!((p[0].1 - 3.17).abs() < 0.01);
        assert!((p[1].1 - 4.66).abs() < 0.01);
        let r = rank_table(&sheet(), &user_weights()).unwrap();
        assert_eq!(r.best, "B");
        assert!((r.entries[1].relative_distance - 2.49).abs() < 0.01);
    }

    #[test]
    fn published_coordinates() {
        let r = autonomy_distances(&[("A".into(), 3, 2.48), ("B".into(), 1, 2.69)]).unwrap();
        assert_eq!(r.best, "A");
        assert_eq!(r.entries[0].relative_distance, 0.0);
        assert!((r.entries[1].relative_distance - 2.011).abs() < 1e-3);
        let r = autonomy_distances(&[("A".into(), 3, 3.17), ("B".into(), 1, 4.66)]).unwrap();
        assert_eq!(r.best, "B");
        assert!((r.entries[1].relative_distance - 2.494).abs() < 1e-3);
        let one = autonomy_distances(&[("Z".into(), 2, 1.5)]).unwrap();
        assert_eq!(one.entries[0].relative_distance, 0.0);
    }

    #[test]
    fn ties_prefer_level_then_id() {
        let r = autonomy_distances(&[("b".into(), 0, 5.0), ("c".into(), 3, 4.0), ("a".into(), 3, 4.0)]).unwrap();
        assert_eq!(r.best, "a");
        assert!(r.warning.is_some());
    }

    #[test]
    fn weighted_product_identities() {
        let d = [Direction::HigherBetter; 3];
        let w = [0.1, 0.3, 0.6];
        assert_eq!(weighted_product(&[1.0, 1.0, 1.0], &w, &d).unwrap(), 1.0);
        let base = weighted_product(&[2.0, 3.0, 4.0], &w, &d).unwrap();
        let doubled = weighted_product(&[4.0, 3.0, 4.0], &w, &d).unwrap();
        assert!((doubled / base - 2f64.powf(0.1)).abs() < 1e-12);
        assert_eq!(weighted_product(&[0.0, 1.0, 1.0], &w, &d), Err(Error::DomainError(0.0)));
    }

    #[test]
    fn levels() {
        assert_eq!(autonomy_level(&AutonomyCapabilities::default()), 0);
        let all = AutonomyCapabilities { perception: true, modeling: true, planning: true, execution: true };
        assert_eq!(autonomy_level(&all), 4);
        let s = sheet();
        assert_eq!(autonomy_level(s.systems[0].capabilities.as_ref().unwrap()), 3);
        assert_eq!(autonomy_level(s.systems[1].capabilities.as_ref().unwrap()), 1);
    }

    #[test]
    fn degree_scheme() {
        let names: Vec<String> = vec!["a".into(), "b".into()];
        let s = WeightScheme::DegreeOfAutonomy { degrees: [("a".to_string(), 1), ("b".to_string(), 2)].into_iter().collect() };
        let w = s.normalized(&names).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn weights_sum_to_one(raw in prop::collection::vec(0.001f64..10.0, 1..12)) {
            let names: Vec<String> = (0..raw.len()).map(|i| format!("f{i}")).collect();
            let s = WeightScheme::Explicit { weights: names.iter().cloned().zip(raw.iter().copied()).collect() };
            let w = s.normalized(&names).unwrap();
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn monotone_in_features(vals in prop::collection::vec(0.1f64..100.0, 2..8), bump in 1.01f64..3.0, lower in any::<bool>()) {
            let n = vals.len();
            let w = vec![1.0 / n as f64; n];
            let mut d = vec![Direction::HigherBetter; n];
            if lower { d[0] = Direction::LowerBetter; }
            let base = weighted_product(&vals, &w, &d).unwrap();
            let mut up = vals.clone();
            up[0] *= bump;
            let moved = weighted_product(&up, &w, &d).unwrap();
            if lower { prop_assert!(moved < base); } else { prop_assert!(moved > base); }
        }

        #[test]
        fn common_factor_keeps_order(a in prop::collection::vec(0.1f64..100.0, 3), b in prop::collection::vec(0.1f64..100.0, 3), k in 0.01f64..100.0) {
            let w = [0.2, 0.3, 0.5];
            let d = [Direction::HigherBetter, Direction::LowerBetter, Direction::HigherBetter];
            let pa = weighted_product(&a, &w, &d).unwrap();
            let pb = weighted_product(&b, &w, &d).unwrap();
            prop_assume!((pa / pb - 1.0).abs() > 1e-9);
            let mut a2 = a.clone(); a2[1] *= k;
            let mut b2 = b.clone(); b2[1] *= k;
            let qa = weighted_product(&a2, &w, &d).unwrap();
            let qb = weighted_product(&b2, &w, &d).unwrap();
            prop_assert_eq!(pa > pb, qa > qb);
        }

        #[test]
        fn best_has_zero_relative(pts in prop::collection::vec((0u8..=4, 0.1f64..10.0), 1..6)) {
            let sys: Vec<(String, u8, f64)> = pts.iter().enumerate().map(|(i, &(l, p))| (format!("s{i}"), l, p)).collect();
            let r = autonomy_distances(&sys).unwrap();
            prop_assert_eq!(r.entries[0].relative_distance, 0.0);
            let (bx, by) = (f64::from(r.entries[0].n_al), r.entries[0].n_cp);
            for e in &r.entries[1..] {
                prop_assert!((e.relative_distance - (f64::from(e.n_al) - bx).hypot(e.n_cp - by)).abs() < 1e-12);
                prop_assert!(e.absolute_distance <= r.entries[0].absolute_distance);
            }
        }
    }
}

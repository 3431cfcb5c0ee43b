//! Operator attention, situation awareness and trust survey analysis.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{self, PMethod};

/// SEEV parameters of one situation element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeParams {
    pub se_id: String,
    pub saliency: f64,
    pub effort: f64,
    pub expectancy: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeevWeights {
    pub s: f64,
    pub ef: f64,
    pub ex: f64,
    pub v: f64,
}

impl Default for SeevWeights {
    fn default() -> Self {
        Self { s: 1.0, ef: 1.0, ex: 1.0, v: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    pub se_id: String,
    pub attention: f64,
    pub fraction: f64,
}

/// Share of attention each element draws: expectancy times saliency times value over effort.
pub fn attention_allocation(params: &[SeParams]) -> Result<Vec<Allocation>> {
    if params.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut out = Vec::with_capacity(params.len());
    for p in params {
        for (field, v) in [
            ("saliency", p.saliency),
            ("effort", p.effort),
            ("expectancy", p.expectancy),
            ("value", p.value),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::NonPositiveParam { se: p.se_id.clone(), field });
            }
        }
        out.push(Allocation {
            se_id: p.se_id.clone(),
            attention: p.expectancy * p.saliency * p.value / p.effort,
            fraction: 0.0,
        });
    }
    let total: f64 = out.iter().map(|a| a.attention).sum();
    for a in &mut out {
        a.fraction = a.attention / total;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attending {
    pub values: Vec<(String, f64)>,
    pub warnings: Vec<String>,
}

/// Weighted SEEV sum per element. Negative sums are clamped to zero and reported.
pub fn probability_attending(params: &[SeParams], weights: &SeevWeights) -> Result<Attending> {
    let w = [weights.s, weights.ef, weights.ex, weights.v];
    if w.iter().any(|x| *x < 0.0 || !x.is_finite()) || w.iter().all(|x| *x == 0.0) {
        return Err(Error::InvalidInput("SEEV weights must be non-negative and not all zero".into()));
    }
    let mut warnings = Vec::new();
    let values = params
        .iter()
        .map(|p| {
            let raw = weights.s * p.saliency - weights.ef * p.effort
                + weights.ex * p.expectancy
                + weights.v * p.value;
            if raw < 0.0 {
                warnings.push(format!("P({}) = {raw:.4} clamped to 0", p.se_id));
            }
            (p.se_id.clone(), raw.max(0.0))
        })
        .collect();
    Ok(Attending { values, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMode {
    #[default]
    LeastSquares,
    /// Straight line through the two present rates closest to the missing one.
    TwoPoint,
}

/// Stand-in proportion for an element the display lacks, read off a line of
/// proportion against correct rate fitted to the elements that are present.
pub fn virtual_proportion(present: &[(f64, f64)], missing_rate: f64, mode: FitMode) -> Result<f64> {
    if present.len() < 2 {
        return Err(Error::TooFewValues { needed: 2, got: present.len() });
    }
    let pts: Vec<(f64, f64)> = match mode {
        FitMode::LeastSquares => present.to_vec(),
        FitMode::TwoPoint => {
            let mut sorted = present.to_vec();
            sorted.sort_by(|a, b| {
                (a.0 - missing_rate)
                    .abs()
                    .total_cmp(&(b.0 - missing_rate).abs())
                    .then(a.0.total_cmp(&b.0))
            });
            let first = sorted[0];
            let second = sorted[1..]
                .iter()
                .copied()
                .find(|p| p.0 != first.0)
                .ok_or(Error::DegenerateFit)?;
            vec![first, second]
        }
    };
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * n {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Ok(my + slope * (missing_rate - mx))
}

/// Scale non-negative values to sum to one.
pub fn renormalize(values: &mut [f64]) -> Result<()> {
    let total: f64 = values.iter().sum();
    if !(total > 0.0) || values.iter().any(|v| *v < 0.0) {
        return Err(Error::InvalidInput("cannot renormalize: values must be non-negative with a positive sum".into()));
    }
    values.iter_mut().for_each(|v| *v /= total);
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perception {
    Undetected,
    Detected,
    Comprehended,
}

impl Perception {
    pub fn value(self) -> f64 {
        match self {
            Perception::Undetected => 0.0,
            Perception::Detected => 0.5,
            Perception::Comprehended => 1.0,
        }
    }

    /// Level derived from a scored answer when no explicit rating was recorded.
    pub fn from_answer(sa_level: u8, correct: bool) -> Self {
        match (correct, sa_level) {
            (false, _) => Perception::Undetected,
            (true, 1) => Perception::Detected,
            (true, _) => Perception::Comprehended,
        }
    }
}

impl FromStr for Perception {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_lowercase().as_str() {
            "undetected" => Ok(Perception::Undetected),
            "detected" => Ok(Perception::Detected),
            "comprehended" => Ok(Perception::Comprehended),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SagatResponse {
    pub participant: String,
    pub question_id: String,
    pub se_id: String,
    pub sa_level: u8,
    pub correct: bool,
    pub perception: Perception,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeTally {
    pub correct: usize,
    pub asked: usize,
}

impl SeTally {
    pub fn rate(&self) -> f64 {
        self.correct as f64 / self.asked as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SagatScores {
    pub tallies: IndexMap<String, SeTally>,
    /// Per participant, the best perception reached on each element.
    pub perception: IndexMap<String, IndexMap<String, f64>>,
}

pub fn sagat_scores(responses: &[SagatResponse]) -> Result<SagatScores> {
    if responses.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut tallies: IndexMap<String, SeTally> = IndexMap::new();
    let mut perception: IndexMap<String, IndexMap<String, f64>> = IndexMap::new();
    for r in responses {
        let t = tallies.entry(r.se_id.clone()).or_insert(SeTally { correct: 0, asked: 0 });
        t.asked += 1;
        t.correct += usize::from(r.correct);
        let p = perception
            .entry(r.participant.clone())
            .or_default()
            .entry(r.se_id.clone())
            .or_insert(0.0);
        *p = p.max(r.perception.value());
    }
    Ok(SagatScores { tallies, perception })
}

/// Weighted situation awareness. Weights are rescaled to sum to one.
pub fn osa(weights: &[f64], perception: &[f64]) -> Result<f64> {
    if weights.len() != perception.len() {
        return Err(Error::LengthMismatch { left: weights.len(), right: perception.len() });
    }
    let mut w = weights.to_vec();
    renormalize(&mut w)?;
    Ok(w.iter().zip(perception).map(|(w, p)| w * p).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightModel {
    /// Attention allocation fractions.
    #[serde(rename = "AAM")]
    Aam,
    /// Normalized probability of attending.
    #[serde(rename = "MDS")]
    Mds,
}

impl fmt::Display for WeightModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightModel::Aam => "AAM",
            WeightModel::Mds => "MDS",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeKind {
    LandoltC,
    Image,
    Altitude,
    Heading,
    FrontDistance,
    Battery,
    Understanding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MissionGroup {
    Aviate,
    Navigate,
    Hazard,
    Overall,
}

/// Relative weight of a desired element against a required one.
pub const DESIRED_WEIGHT: f64 = 0.5;

impl MissionGroup {
    pub const ALL: [MissionGroup; 4] =
        [MissionGroup::Aviate, MissionGroup::Navigate, MissionGroup::Hazard, MissionGroup::Overall];

    pub fn label(self) -> &'static str {
        match self {
            MissionGroup::Aviate => "Aviate",
            MissionGroup::Navigate => "Navigate",
            MissionGroup::Hazard => "Hazard",
            MissionGroup::Overall => "Overall",
        }
    }

    /// 1 for required elements, [`DESIRED_WEIGHT`] for desired, 0 otherwise.
    pub fn emphasis(self, kind: SeKind) -> f64 {
        use SeKind::*;
        let (required, desired): (&[SeKind], &[SeKind]) = match self {
            MissionGroup::Aviate => (&[Altitude, Heading, FrontDistance, Battery], &[Image, LandoltC]),
            MissionGroup::Navigate => (&[Altitude, Heading, FrontDistance, Image], &[LandoltC]),
            MissionGroup::Hazard => (&[LandoltC, Image], &[Altitude, Heading, FrontDistance]),
            MissionGroup::Overall => return 1.0,
        };
        if required.contains(&kind) {
            1.0
        } else if desired.contains(&kind) {
            DESIRED_WEIGHT
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OsaRow {
    pub group: MissionGroup,
    pub model: WeightModel,
    pub mean: f64,
    pub std: f64,
    pub participants: usize,
}

/// Per-mission OSA over participants. `base` holds the model weight of each element
/// alongside its kind; unanswered elements count as undetected.
pub fn osa_by_group(
    model: WeightModel,
    base: &[(String, SeKind, f64)],
    perception: &IndexMap<String, IndexMap<String, f64>>,
) -> Result<Vec<OsaRow>> {
    if perception.is_empty() {
        return Err(Error::EmptySample);
    }
    MissionGroup::ALL
        .iter()
        .map(|&group| {
            let weights: Vec<f64> = base.iter().map(|(_, k, w)| w * group.emphasis(*k)).collect();
            let scores = perception
                .values()
                .map(|p| {
                    let pv: Vec<f64> = base.iter().map(|(id, _, _)| p.get(id).copied().unwrap_or(0.0)).collect();
                    osa(&weights, &pv)
                })
                .collect::<Result<Vec<_>>>()?;
            let summary = stats::summarize(&scores)?;
            Ok(OsaRow { group, model, mean: summary.mean, std: summary.std, participants: scores.len() })
        })
        .collect()
}

/// One display element. Elements without SEEV parameters are absent from the
/// display and get a virtual proportion from their correct rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementSpec {
    pub se_id: String,
    pub kind: SeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub saliency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub effort: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expectancy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

impl ElementSpec {
    fn params(&self) -> Result<Option<SeParams>> {
        match (self.saliency, self.effort, self.expectancy, self.value) {
            (None, None, None, None) => Ok(None),
            (Some(saliency), Some(effort), Some(expectancy), Some(value)) => Ok(Some(SeParams {
                se_id: self.se_id.clone(),
                saliency,
                effort,
                expectancy,
                value,
            })),
            _ => Err(Error::InvalidInput(format!("element {} sets only some SEEV parameters", self.se_id))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaSetup {
    #[serde(default)]
    pub weights: SeevWeights,
    #[serde(default)]
    pub fit: FitMode,
    pub elements: Vec<ElementSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementRow {
    pub se_id: String,
    pub kind: SeKind,
    pub correct_rate: Option<f64>,
    /// Attention allocation fraction.
    pub f: f64,
    /// Normalized probability of attending.
    pub p_se: f64,
    pub is_virtual: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SaReport {
    pub elements: Vec<ElementRow>,
    pub osa: Vec<OsaRow>,
    pub warnings: Vec<String>,
}

/// Fill virtual entries of `weights` from the correct-rate line, then renormalize.
fn complete_weights(
    weights: &mut [f64],
    rates: &[Option<f64>],
    virtual_idx: &[usize],
    mode: FitMode,
    label: &str,
    ids: &[String],
    warnings: &mut Vec<String>,
) -> Result<()> {
    let present: Vec<(f64, f64)> = (0..weights.len())
        .filter(|i| !virtual_idx.contains(i))
        .filter_map(|i| rates[i].map(|r| (r, weights[i])))
        .collect();
    for &i in virtual_idx {
        let rate = rates[i].ok_or_else(|| {
            Error::InvalidInput(format!("virtual element {} has no SAGAT responses", ids[i]))
        })?;
        let v = virtual_proportion(&present, rate, mode)?;
        if v < 0.0 {
            warnings.push(format!("{label} virtual proportion for {} = {v:.4} clamped to 0", ids[i]));
        }
        weights[i] = v.max(0.0);
    }
    renormalize(weights)
}

/// Attention weights, virtual proportions and per-mission OSA for one platform.
pub fn sa_analysis(setup: &SaSetup, responses: &[SagatResponse]) -> Result<SaReport> {
    if setup.elements.is_empty() {
        return Err(Error::EmptySample);
    }
    let scores = sagat_scores(responses)?;
    let mut warnings = Vec::new();
    let ids: Vec<String> = setup.elements.iter().map(|e| e.se_id.clone()).collect();
    for se in scores.tallies.keys() {
        if !ids.contains(se) {
            warnings.push(format!("responses about {se} are not tied to a display element"));
        }
    }
    let rates: Vec<Option<f64>> = ids.iter().map(|id| scores.tallies.get(id).map(SeTally::rate)).collect();
    let mut params = Vec::new();
    let mut virtual_idx = Vec::new();
    for (i, e) in setup.elements.iter().enumerate() {
        match e.params()? {
            Some(p) => params.push(p),
            None => virtual_idx.push(i),
        }
    }
    if params.is_empty() {
        return Err(Error::InvalidInput("no element carries SEEV parameters".into()));
    }
    let alloc = attention_allocation(&params)?;
    let attending = probability_attending(&params, &setup.weights)?;
    warnings.extend(attending.warnings.iter().cloned());

    let mut f = vec![0.0; ids.len()];
    let mut p = vec![0.0; ids.len()];
    let mut k = 0;
    for i in 0..ids.len() {
        if !virtual_idx.contains(&i) {
            f[i] = alloc[k].fraction;
            p[i] = attending.values[k].1;
            k += 1;
        }
    }
    let p_total: f64 = p.iter().sum();
    if p_total <= 0.0 {
        return Err(Error::InvalidInput("every probability of attending is zero".into()));
    }
    p.iter_mut().for_each(|v| *v /= p_total);
    complete_weights(&mut f, &rates, &virtual_idx, setup.fit, "AAM", &ids, &mut warnings)?;
    complete_weights(&mut p, &rates, &virtual_idx, setup.fit, "MDS", &ids, &mut warnings)?;

    let mut osa_rows = Vec::new();
    for (model, w) in [(WeightModel::Mds, &p), (WeightModel::Aam, &f)] {
        let base: Vec<(String, SeKind, f64)> = setup
            .elements
            .iter()
            .zip(w.iter())
            .map(|(e, w)| (e.se_id.clone(), e.kind, *w))
            .collect();
        osa_rows.extend(osa_by_group(model, &base, &scores.perception)?);
    }
    let elements = setup
        .elements
        .iter()
        .enumerate()
        .map(|(i, e)| ElementRow {
            se_id: e.se_id.clone(),
            kind: e.kind,
            correct_rate: rates[i],
            f: f[i],
            p_se: p[i],
            is_virtual: virtual_idx.contains(&i),
        })
        .collect();
    Ok(SaReport { elements, osa: osa_rows, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Instrument {
    #[serde(rename = "CTPA")]
    Ctpa,
    #[serde(rename = "HCTM")]
    Hctm,
}

impl Instrument {
    pub fn item_count(self) -> usize {
        match self {
            Instrument::Ctpa => 9,
            Instrument::Hctm => 12,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Instrument::Ctpa => "CTPA",
            Instrument::Hctm => "HCTM",
        }
    }
}

impl FromStr for Instrument {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_uppercase().as_str() {
            "CTPA" => Ok(Instrument::Ctpa),
            "HCTM" => Ok(Instrument::Hctm),
            _ => Err(s.to_string()),
        }
    }
}

impl fmt::Display for Instrument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyRow {
    pub participant_id: String,
    pub instrument: Instrument,
    pub item_id: String,
    pub score: u8,
    pub manip_pass: bool,
    pub condition: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preference {
    pub participant_id: String,
    pub choice: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SurveyDataset {
    pub rows: Vec<SurveyRow>,
    pub preferences: Vec<Preference>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrustItem {
    pub instrument: Instrument,
    pub item_id: String,
    pub n_a: usize,
    pub n_b: usize,
    pub mean_a: f64,
    pub mean_b: f64,
    pub u: f64,
    pub p: f64,
    pub method: PMethod,
    pub welch_p: Option<f64>,
    pub outliers_removed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreferenceTally {
    pub choice: String,
    pub count: usize,
    pub reasons: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrustReport {
    pub condition_a: String,
    pub condition_b: String,
    pub removed_participants: Vec<String>,
    pub items: Vec<TrustItem>,
    pub preferences: Vec<PreferenceTally>,
    pub warnings: Vec<String>,
}

/// Compare two conditions item by item after dropping participants who failed the
/// manipulation check and trimming IQR outliers per item and condition.
pub fn trust_pipeline(data: &SurveyDataset, condition_a: &str, condition_b: &str) -> Result<TrustReport> {
    let mut removed: Vec<String> = data
        .rows
        .iter()
        .filter(|r| !r.manip_pass)
        .map(|r| r.participant_id.clone())
        .collect();
    removed.sort();
    removed.dedup();
    let kept = |r: &&SurveyRow| removed.binary_search(&r.participant_id).is_err();

    for cond in [condition_a, condition_b] {
        if !data.rows.iter().filter(kept).any(|r| r.condition == cond) {
            return Err(Error::EmptyCondition(cond.to_string()));
        }
    }

    let mut grouped: IndexMap<(Instrument, String), [Vec<f64>; 2]> = IndexMap::new();
    for r in data.rows.iter().filter(kept) {
        let side = if r.condition == condition_a {
            0
        } else if r.condition == condition_b {
            1
        } else {
            continue;
        };
        grouped.entry((r.instrument, r.item_id.clone())).or_default()[side].push(f64::from(r.score));
    }
    grouped.sort_by(|(ia, a), _, (ib, b), _| ia.cmp(ib).then_with(|| natural_cmp(a, b)));

    let mut warnings = Vec::new();
    let mut items = Vec::new();
    for ((instrument, item_id), sides) in grouped {
        let mut trimmed = Vec::with_capacity(2);
        let mut outliers = 0;
        for (side, values) in sides.iter().enumerate() {
            match stats::iqr_filter(values) {
                Ok(f) => {
                    if let Some(w) = &f.warning {
                        let cond = if side == 0 { condition_a } else { condition_b };
                        warnings.push(format!("{instrument} {item_id} ({cond}): {w}"));
                    }
                    outliers += f.removed.len();
                    trimmed.push(f.kept);
                }
                Err(_) => trimmed.push(values.clone()),
            }
        }
        let (a, b) = (&trimmed[0], &trimmed[1]);
        if a.is_empty() || b.is_empty() {
            warnings.push(format!("{instrument} {item_id}: one condition has no responses, skipped"));
            continue;
        }
        let mw = stats::mann_whitney(a, b)?;
        items.push(TrustItem {
            instrument,
            item_id,
            n_a: a.len(),
            n_b: b.len(),
            mean_a: stats::mean(a).unwrap_or(f64::NAN),
            mean_b: stats::mean(b).unwrap_or(f64::NAN),
            u: mw.u,
            p: mw.p_two_sided,
            method: mw.method,
            welch_p: stats::welch_t(a, b).map(|w| w.p_two_sided),
            outliers_removed: outliers,
        });
    }

    let mut preferences: Vec<PreferenceTally> = Vec::new();
    for p in data.preferences.iter().filter(|p| removed.binary_search(&p.participant_id).is_err()) {
        let slot = match preferences.iter_mut().position(|t| t.choice == p.choice) {
            Some(i) => &mut preferences[i],
            None => {
                preferences.push(PreferenceTally { choice: p.choice.clone(), count: 0, reasons: Vec::new() });
                preferences.last_mut().expect("just pushed")
            }
        };
        slot.count += 1;
        if !p.reason.is_empty() {
            slot.reasons.push(p.reason.clone());
        }
    }

    Ok(TrustReport {
        condition_a: condition_a.to_string(),
        condition_b: condition_b.to_string(),
        removed_participants: removed,
        items,
        preferences,
        warnings,
    })
}

/// Orders "Q2" before "Q10".
fn natural_cmp(a: &str, b: &str) -> std::cmp::Ordering {
    let split = |s: &str| {
        let digits = s.trim_start_matches(|c: char| !c.is_ascii_digit());
        let prefix = &s[..s.len() - digits.len()];
        (prefix.to_string(), digits.parse::<u64>().ok(), s.to_string())
    };
    split(a).cmp(&split(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn se(id: &str, sa: f64, e: f64, ex: f64, v: f64) -> SeParams {
        SeParams { se_id: id.into(), saliency: sa, effort: e, expectancy: ex, value: v }
    }

    #[test]
    fn allocation_normalizes() {
        let f = attention_allocation(&[se("a", 2.0, 1.0, 1.0, 1.0), se("b", 1.0, 1.0, 1.0, 1.0), se("c", 1.0, 1.0, 1.0, 1.0)])
            .unwrap();
        let fr: Vec<f64> = f.iter().map(|a| a.fraction).collect();
        assert_eq!(fr, vec![0.5, 0.25, 0.25]);
        let err = attention_allocation(&[se("x", 1.0, 0.0, 1.0, 1.0)]).unwrap_err();
        assert_eq!(err, Error::NonPositiveParam { se: "x".into(), field: "effort" });
    }

    #[test]
    fn published_allocation_columns_sum_to_one() {
        let a = [0.116, 0.125, 0.135, 0.143, 0.112, 0.114, 0.054, 0.051, 0.051, 0.099];
        let b = [0.128, 0.138, 0.142, 0.127, 0.106, 0.124, 0.054, 0.052, 0.053, 0.076];
        for col in [a, b] {
            let s: f64 = col.iter().sum();
            assert!((s - 1.0).abs() < 5e-4, "{s}");
        }
    }

    #[test]
    fn attending_clamps() {
        let only_s = SeevWeights { s: 1.0, ef: 0.0, ex: 0.0, v: 0.0 };
        let p = probability_attending(&[se("a", 0.6, 0.3, 0.1, 0.1)], &only_s).unwrap();
        assert_eq!(p.values[0].1, 0.6);
        assert!(p.warnings.is_empty());
        let only_ef = SeevWeights { s: 0.0, ef: 1.0, ex: 0.0, v: 0.0 };
        let p = probability_attending(&[se("a", 0.6, 0.3, 0.1, 0.1)], &only_ef).unwrap();
        assert_eq!(p.values[0].1, 0.0);
        assert_eq!(p.warnings.len(), 1);
        let zero = SeevWeights { s: 0.0, ef: 0.0, ex: 0.0, v: 0.0 };
        assert!(probability_attending(&[], &zero).is_err());
    }

    #[test]
    fn virtual_proportion_line() {
        let pairs = [(0.5, 0.05), (1.0, 0.10)];
        let v = virtual_proportion(&pairs, 0.75, FitMode::LeastSquares).unwrap();
        assert!((v - 0.075).abs() < 1e-12);
        let v = virtual_proportion(&pairs, 0.5, FitMode::TwoPoint).unwrap();
        assert!((v - 0.05).abs() < 1e-12);
        assert_eq!(
            virtual_proportion(&[(0.5, 0.1), (0.5, 0.2)], 0.7, FitMode::LeastSquares),
            Err(Error::DegenerateFit)
        );
    }

    #[test]
    fn two_point_uses_nearest_rates() {
        let pairs = [(0.0, 0.0), (0.5, 0.5), (1.0, 0.6)];
        let v = virtual_proportion(&pairs, 0.9, FitMode::TwoPoint).unwrap();
        assert!((v - 0.58).abs() < 1e-12);
    }

    fn response(p: &str, se: &str, level: u8, correct: bool) -> SagatResponse {
        SagatResponse {
            participant: p.into(),
            question_id: format!("{se}-{level}"),
            se_id: se.into(),
            sa_level: level,
            correct,
            perception: Perception::from_answer(level, correct),
        }
    }

    #[test]
    fn sagat_tallies_match_recount() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ses = ["alt", "head", "img"];
        let rs: Vec<SagatResponse> = (0..60)
            .map(|i| response(&format!("p{}", i % 5), ses[i % 3], 1 + (i % 2) as u8, rng.gen_bool(0.6)))
            .collect();
        let scores = sagat_scores(&rs).unwrap();
        for s in ses {
            let asked = rs.iter().filter(|r| r.se_id == s).count();
            let correct = rs.iter().filter(|r| r.se_id == s && r.correct).count();
            assert_eq!(scores.tallies[s].asked, asked);
            assert_eq!(scores.tallies[s].correct, correct);
        }
        let three_of_four: Vec<_> = [true, true, true, false].iter().map(|&c| response("p", "x", 1, c)).collect();
        assert_eq!(sagat_scores(&three_of_four).unwrap().tallies["x"].rate(), 0.75);
    }

    #[test]
    fn all_undetected_gives_zero() {
        let rs: Vec<_> = ["a", "b"].iter().map(|s| response("p1", s, 1, false)).collect();
        let scores = sagat_scores(&rs).unwrap();
        assert!(scores.perception["p1"].values().all(|v| *v == 0.0));
    }

    #[test]
    fn osa_cases() {
        assert_eq!(osa(&[0.5, 0.25, 0.25], &[1.0, 0.0, 0.0]).unwrap(), 0.5);
        assert!((osa(&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(osa(&[1.0], &[1.0, 0.0]), Err(Error::LengthMismatch { left: 1, right: 2 }));
    }

    #[test]
    fn mission_groups_weight_elements() {
        let base = vec![
            ("alt".to_string(), SeKind::Altitude, 0.5),
            ("lc".to_string(), SeKind::LandoltC, 0.5),
        ];
        let mut perception = IndexMap::new();
        perception.insert("p1".to_string(), [("alt".to_string(), 1.0)].into_iter().collect());
        let rows = osa_by_group(WeightModel::Aam, &base, &perception).unwrap();
        let get = |g: MissionGroup| rows.iter().find(|r| r.group == g).unwrap().mean;
        assert!((get(MissionGroup::Aviate) - 1.0 / 1.5).abs() < 1e-12);
        assert!((get(MissionGroup::Hazard) - 0.5 / 1.5).abs() < 1e-12);
        assert!((get(MissionGroup::Overall) - 0.5).abs() < 1e-12);
    }

    fn survey(a: &[u8], b: &[u8]) -> SurveyDataset {
        let mut rows = Vec::new();
        for (cond, scores) in [("A", a), ("B", b)] {
            for (i, s) in scores.iter().enumerate() {
                rows.push(SurveyRow {
                    participant_id: format!("{cond}{i}"),
                    instrument: Instrument::Ctpa,
                    item_id: "Q1".into(),
                    score: *s,
                    manip_pass: true,
                    condition: cond.into(),
                });
            }
        }
        SurveyDataset { rows, preferences: Vec::new() }
    }

    #[test]
    fn identical_conditions_are_indistinguishable() {
        let scores = [3, 4, 5, 4, 3, 5, 6, 4, 2, 5];
        let report = trust_pipeline(&survey(&scores, &scores), "A", "B").unwrap();
        assert!(report.items[0].p > 0.95);
    }

    #[test]
    fn shifted_likert_is_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a: Vec<u8> = (0..30).map(|_| rng.gen_range(1..=5)).collect();
        let b: Vec<u8> = a.iter().map(|s| (s + 2).min(7)).collect();
        let report = trust_pipeline(&survey(&a, &b), "A", "B").unwrap();
        assert!(report.items[0].p < 0.05, "{}", report.items[0].p);
    }

    #[test]
    fn manipulation_failures_are_dropped() {
        let mut data = survey(&[4, 4, 5, 5], &[3, 3, 4, 4]);
        data.rows[0].manip_pass = false;
        data.preferences.push(Preference { participant_id: "A0".into(), choice: "A".into(), reason: "x".into() });
        data.preferences.push(Preference { participant_id: "B1".into(), choice: "B".into(), reason: "faster".into() });
        let report = trust_pipeline(&data, "A", "B").unwrap();
        assert_eq!(report.removed_participants, vec!["A0".to_string()]);
        assert_eq!(report.items[0].n_a, 3);
        assert_eq!(report.preferences.len(), 1);
        assert_eq!(report.preferences[0].reasons, vec!["faster".to_string()]);
        assert_eq!(trust_pipeline(&data, "A", "C").unwrap_err(), Error::EmptyCondition("C".into()));
    }

    #[test]
    fn sa_analysis_fills_virtual_element() {
        let el = |id: &str, kind, sa: Option<f64>| ElementSpec {
            se_id: id.into(),
            kind,
            saliency: sa,
            effort: sa.map(|_| 1.0),
            expectancy: sa.map(|_| 1.0),
            value: sa.map(|_| 1.0),
        };
        let setup = SaSetup {
            weights: SeevWeights::default(),
            fit: FitMode::LeastSquares,
            elements: vec![
                el("lc", SeKind::LandoltC, Some(2.0)),
                el("alt", SeKind::Altitude, Some(1.0)),
                el("fd", SeKind::FrontDistance, None),
            ],
        };
        let mut rs = Vec::new();
        for (se, correct) in [("lc", [true, true]), ("alt", [true, false]), ("fd", [true, false])] {
            for (i, c) in correct.iter().enumerate() {
                rs.push(response(&format!("p{i}"), se, 1, *c));
            }
        }
        let report = sa_analysis(&setup, &rs).unwrap();
        let f: Vec<f64> = report.elements.iter().map(|e| e.f).collect();
        // line through (1.0, 2/3) and (0.5, 1/3) gives 1/3 at rate 0.5
        let expect = [2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0].map(|v| v / (4.0 / 3.0));
        for (a, b) in f.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(report.elements[2].is_virtual);
        assert_eq!(report.osa.len(), 8);
        assert!(report.osa.iter().all(|r| (0.0..=1.0).contains(&r.mean)));
    }

    #[test]
    fn items_sort_naturally() {
        assert_eq!(natural_cmp("Q2", "Q10"), std::cmp::Ordering::Less);
    }

    proptest! {
        #[test]
        fn allocation_is_probability_vector(params in prop::collection::vec((0.01f64..10.0, 0.01f64..10.0, 0.01f64..10.0, 0.01f64..10.0), 1..12)) {
            let ses: Vec<SeParams> = params.iter().enumerate()
                .map(|(i, (a, b, c, d))| se(&format!("s{i}"), *a, *b, *c, *d)).collect();
            let f = attention_allocation(&ses).unwrap();
            let total: f64 = f.iter().map(|a| a.fraction).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(f.iter().all(|a| a.fraction > 0.0 && a.fraction <= 1.0));
        }

        #[test]
        fn osa_stays_in_unit_interval(pairs in prop::collection::vec((0.001f64..1.0, 0usize..3), 1..12)) {
            let w: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let p: Vec<f64> = pairs.iter().map(|p| p.1 as f64 * 0.5).collect();
            let v = osa(&w, &p).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        }

        #[test]
        fn virtual_then_renormalize_is_probability(rates in prop::collection::vec((0.0f64..1.0, 0.01f64..0.2), 2..8), missing in 0.0f64..1.0) {
            let distinct = rates.iter().any(|r| (r.0 - rates[0].0).abs() > 1e-3);
            prop_assume!(distinct);
            let v = virtual_proportion(&rates, missing, FitMode::LeastSquares).unwrap();
            let mut all: Vec<f64> = rates.iter().map(|r| r.1).collect();
            all.push(v.max(0.0));
            renormalize(&mut all).unwrap();
            prop_assert!((all.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}

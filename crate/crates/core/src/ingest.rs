//! Readers and writers for the on-disk formats.
//!
//! Every reader returns either a value with a [`ParseReport`] or an error that
//! names the file and, where it applies, the line.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::cfis::{FisConfig, FisConfigSpec};
use crate::error::{Error, IngestError};
use crate::human::{Instrument, Perception, Preference, SagatResponse, SurveyDataset, SurveyRow};
use crate::mapping::{FiducialGroundTruth, FiducialObservation, MappedState};
use crate::model::{
    ApertureTier, Campaign, CrCategory, Minutes, NamedEnvironment, OaCategory, Outcome, PoseSample,
    SuasDescriptor, TestDefinition, Trajectory, TrialRecord, Vec2, Vec3,
};
use crate::ncap::{AutonomyCapabilities, Direction, FeatureSpec, FeatureTable, FeatureValue, SystemRow};

pub const SCHEMA_VERSION: &str = "1";

type IngestResult<T> = std::result::Result<T, IngestError>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParseWarning {
    /// File path, optionally suffixed with `:line`.
    pub location: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ParseReport {
    pub source: PathBuf,
    pub warnings: Vec<ParseWarning>,
    pub counts: IndexMap<String, usize>,
}

impl ParseReport {
    fn new(source: &Path) -> Self {
        Self { source: source.to_path_buf(), ..Self::default() }
    }

    fn warn(&mut self, line: Option<usize>, message: impl Into<String>) {
        let location = match line {
            Some(l) => format!("{}:{l}", self.source.display()),
            None => self.source.display().to_string(),
        };
        self.warnings.push(ParseWarning { location, message: message.into() });
    }

    fn count(&mut self, what: &str, n: usize) {
        self.counts.insert(what.to_string(), n);
    }
}

fn read(path: &Path) -> IngestResult<String> {
    fs::read_to_string(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes())
}

fn csv_err(path: &Path, source: csv::Error) -> IngestError {
    IngestError::Csv { path: path.to_path_buf(), source }
}

/// Column lookup over a CSV header.
struct Columns {
    index: IndexMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord) -> Self {
        Self { index: headers.iter().enumerate().map(|(i, h)| (h.to_lowercase(), i)).collect() }
    }

    fn require(&self, path: &Path, name: &str) -> IngestResult<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| IngestError::MissingColumn { path: path.to_path_buf(), column: name.to_string() })
    }

    fn optional(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn number(path: &Path, record: &csv::StringRecord, idx: usize, field: &str) -> IngestResult<f64> {
    record
        .get(idx)
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|v| v.is_finite())
        .ok_or_else(|| IngestError::NonNumericField {
            path: path.to_path_buf(),
            line: line_of(record),
            field: field.to_string(),
        })
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_lowercase().as_str() {
        "true" | "1" | "yes" | "y" | "pass" => Some(true),
        "false" | "0" | "no" | "n" | "fail" => Some(false),
        _ => None,
    }
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> IngestError {
    IngestError::Malformed { path: path.to_path_buf(), line, message: message.into() }
}

// ---------------------------------------------------------------- telemetry

pub fn parse_telemetry(path: &Path) -> IngestResult<(Trajectory, ParseReport)> {
    parse_telemetry_str(&read(path)?, path)
}

/// Parse telemetry text; `path` is only used in messages. Lines are 1-based with
/// the header on line 1.
pub fn parse_telemetry_str(text: &str, path: &Path) -> IngestResult<(Trajectory, ParseReport)> {
    let mut report = ParseReport::new(path);
    let mut rdr = csv_reader(text);
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let cols = Columns::new(&headers);
    let base: Vec<usize> = ["t", "x", "y", "z"]
        .iter()
        .map(|c| cols.require(path, c))
        .collect::<IngestResult<_>>()?;
    let triple = |names: [&str; 3]| -> IngestResult<Option<[usize; 3]>> {
        let found: Vec<Option<usize>> = names.iter().map(|n| cols.optional(n)).collect();
        match found.iter().filter(|f| f.is_some()).count() {
            0 => Ok(None),
            3 => Ok(Some([found[0].unwrap(), found[1].unwrap(), found[2].unwrap()])),
            _ => {
                let missing = names.iter().zip(&found).find(|(_, f)| f.is_none()).map(|(n, _)| *n).unwrap();
                Err(IngestError::MissingColumn { path: path.to_path_buf(), column: missing.to_string() })
            }
        }
    };
    let vel_cols = triple(["vx", "vy", "vz"])?;
    let acc_cols = triple(["ax", "ay", "az"])?;
    let known: BTreeSet<&str> = ["t", "x", "y", "z", "vx", "vy", "vz", "ax", "ay", "az"].into();
    for h in headers.iter() {
        if !known.contains(h.to_lowercase().as_str()) {
            report.warn(Some(1), format!("ignoring column {h}"));
        }
    }

    let vec_at = |rec: &csv::StringRecord, idx: [usize; 3]| -> IngestResult<Vec3> {
        let mut v = [0.0; 3];
        for (k, &i) in idx.iter().enumerate() {
            v[k] = number(path, rec, i, &headers[i])?;
        }
        Ok(Vec3::new(v[0], v[1], v[2]))
    };

    let mut samples = Vec::new();
    let mut last_t = f64::NEG_INFINITY;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = line_of(&rec);
        let t = number(path, &rec, base[0], "t")?;
        if t <= last_t {
            return Err(IngestError::NonMonotonicTime { path: path.to_path_buf(), line });
        }
        last_t = t;
        let pos = vec_at(&rec, [base[1], base[2], base[3]])?;
        let mut s = PoseSample::at(t, pos);
        if let Some(idx) = vel_cols {
            s.vel = Some(vec_at(&rec, idx)?);
        }
        if let Some(idx) = acc_cols {
            s.acc = Some(vec_at(&rec, idx)?);
        }
        samples.push(s);
    }
    report.count("samples", samples.len());
    let traj = Trajectory::new(samples)?;
    Ok((traj, report))
}

/// Render samples back to telemetry CSV with round-trip-exact numbers.
pub fn write_telemetry(traj: &Trajectory) -> String {
    let vel = traj.has_velocity();
    let acc = traj.has_acceleration();
    let mut out = String::from("t,x,y,z");
    if vel {
        out.push_str(",vx,vy,vz");
    }
    if acc {
        out.push_str(",ax,ay,az");
    }
    out.push('\n');
    for s in traj.samples() {
        let _ = write!(out, "{},{},{},{}", s.t, s.pos.x, s.pos.y, s.pos.z);
        for v in [vel.then_some(s.vel).flatten(), acc.then_some(s.acc).flatten()].into_iter().flatten() {
            let _ = write!(out, ",{},{},{}", v.x, v.y, v.z);
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------- campaign

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrial {
    trial_id: String,
    test_id: String,
    suas_id: String,
    outcome: String,
    #[serde(default)]
    collisions: u32,
    #[serde(default)]
    rollovers: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    oa_category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cr_category: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    aperture_tier: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_collision_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    duration_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    laps: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    telemetry: Option<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    notes: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawManifest {
    schema_version: serde_json::Value,
    #[serde(default)]
    suas: Vec<SuasDescriptor>,
    #[serde(default)]
    tests: Vec<TestDefinition>,
    #[serde(default)]
    environments: Vec<NamedEnvironment>,
    #[serde(default)]
    trials: Vec<RawTrial>,
}

fn category<T: std::str::FromStr<Err = String>>(value: &Option<String>) -> IngestResult<Option<T>> {
    value
        .as_deref()
        .map(|s| s.trim().parse::<T>().map_err(|_| IngestError::UnknownCategory(s.to_string())))
        .transpose()
}

fn check_unique<'a>(what: &str, ids: impl Iterator<Item = &'a str>) -> IngestResult<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::InvalidInput(format!("duplicate {what} id {id}")).into());
        }
    }
    Ok(())
}

pub fn parse_campaign(path: &Path) -> IngestResult<(Campaign, ParseReport)> {
    parse_campaign_str(&read(path)?, path)
}

/// Telemetry paths resolve against the manifest's directory.
pub fn parse_campaign_str(text: &str, path: &Path) -> IngestResult<(Campaign, ParseReport)> {
    let mut report = ParseReport::new(path);
    let raw: RawManifest =
        serde_json::from_str(text).map_err(|source| IngestError::Json { path: path.to_path_buf(), source })?;
    let version = match &raw.schema_version {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if !matches!(version.as_str(), "1" | "1.0") {
        return Err(IngestError::SchemaVersionUnsupported(version));
    }
    check_unique("suas", raw.suas.iter().map(|s| s.id.as_str()))?;
    check_unique("test", raw.tests.iter().map(|s| s.id.as_str()))?;
    check_unique("environment", raw.environments.iter().map(|s| s.id.as_str()))?;
    check_unique("trial", raw.trials.iter().map(|s| s.trial_id.as_str()))?;

    for env in &raw.environments {
        env.profile
            .validate()
            .map_err(|e| Error::InvalidInput(format!("environment {}: {e}", env.id)))?;
    }
    for test in &raw.tests {
        if let Some(env) = &test.environment {
            if !raw.environments.iter().any(|e| &e.id == env) {
                return Err(IngestError::DanglingReference(format!("test {} references unknown environment {env}", test.id)));
            }
        }
        if let Some(ob) = &test.obstacle {
            ob.geometry().map_err(|e| Error::InvalidInput(format!("test {}: {e}", test.id)))?;
        }
        if let Some(p) = &test.path {
            if p.len() < 2 {
                return Err(Error::InvalidInput(format!("test {}: path needs at least 2 vertices", test.id)).into());
            }
        }
    }

    let base = path.parent().unwrap_or(Path::new("."));
    let mut trials = Vec::with_capacity(raw.trials.len());
    let mut telemetry = BTreeMap::new();
    for t in &raw.trials {
        if !raw.suas.iter().any(|s| s.id == t.suas_id) {
            return Err(IngestError::DanglingReference(format!(
                "trial {} references unknown suas {}",
                t.trial_id, t.suas_id
            )));
        }
        if !raw.tests.iter().any(|s| s.id == t.test_id) {
            return Err(IngestError::DanglingReference(format!(
                "trial {} references unknown test {}",
                t.trial_id, t.test_id
            )));
        }
        let outcome: Outcome = t
            .outcome
            .trim()
            .parse()
            .map_err(|_| IngestError::UnknownCategory(t.outcome.clone()))?;
        if t.t_collision_s.is_some() && t.collisions == 0 {
            return Err(Error::InconsistentFlags(format!(
                "trial {} has a collision time but no collisions",
                t.trial_id
            ))
            .into());
        }
        let duration = t.duration_min.unwrap_or(0.0);
        if !(duration >= 0.0 && duration.is_finite()) {
            return Err(Error::InvalidInput(format!("trial {}: duration_min {duration}", t.trial_id)).into());
        }
        let mut rec = TrialRecord::new(&t.trial_id, &t.test_id, &t.suas_id, outcome);
        rec.collisions = t.collisions;
        rec.rollovers = t.rollovers;
        rec.oa_category = category::<OaCategory>(&t.oa_category)?;
        rec.cr_category = category::<CrCategory>(&t.cr_category)?;
        rec.aperture_tier = category::<ApertureTier>(&t.aperture_tier)?;
        rec.t_collision_s = t.t_collision_s;
        rec.duration = Minutes(duration);
        rec.laps = t.laps;
        rec.notes = t.notes.clone();
        if let Some(rel) = &t.telemetry {
            let full = base.join(rel);
            if !full.is_file() {
                return Err(IngestError::MissingTelemetry(full));
            }
            telemetry.insert(t.trial_id.clone(), full);
        }
        trials.push(rec);
    }
    if trials.is_empty() {
        report.warn(None, "no trials");
    }
    for s in &raw.suas {
        if !trials.iter().any(|t| t.suas_id == s.id) {
            report.warn(None, format!("suas {} has no trials", s.id));
        }
    }
    report.count("suas", raw.suas.len());
    report.count("tests", raw.tests.len());
    report.count("environments", raw.environments.len());
    report.count("trials", trials.len());
    report.count("telemetry", telemetry.len());
    let campaign = Campaign {
        schema_version: version,
        suas: raw.suas,
        tests: raw.tests,
        environments: raw.environments,
        trials,
        telemetry,
    };
    Ok((campaign, report))
}

/// Serialize a campaign; telemetry paths are written relative to `base` when possible.
pub fn write_campaign(campaign: &Campaign, base: &Path) -> String {
    let trials = campaign
        .trials
        .iter()
        .map(|t| RawTrial {
            trial_id: t.trial_id.clone(),
            test_id: t.test_id.clone(),
            suas_id: t.suas_id.clone(),
            outcome: t.outcome.to_string(),
            collisions: t.collisions,
            rollovers: t.rollovers,
            oa_category: t.oa_category.map(|c| c.to_string()),
            cr_category: t.cr_category.map(|c| c.to_string()),
            aperture_tier: t.aperture_tier.map(|c| c.to_string()),
            t_collision_s: t.t_collision_s,
            duration_min: Some(t.duration.0),
            laps: t.laps,
            telemetry: campaign.telemetry.get(&t.trial_id).map(|p| {
                p.strip_prefix(base).unwrap_or(p).to_string_lossy().replace('\\', "/")
            }),
            notes: t.notes.clone(),
        })
        .collect();
    let raw = RawManifest {
        schema_version: serde_json::Value::String(campaign.schema_version.clone()),
        suas: campaign.suas.clone(),
        tests: campaign.tests.clone(),
        environments: campaign.environments.clone(),
        trials,
    };
    let mut s = serde_json::to_string_pretty(&raw).expect("manifest serializes");
    s.push('\n');
    s
}

// ---------------------------------------------------------------- surveys

pub fn parse_survey(path: &Path) -> IngestResult<(SurveyDataset, ParseReport)> {
    parse_survey_str(&read(path)?, path)
}

pub fn parse_survey_str(text: &str, path: &Path) -> IngestResult<(SurveyDataset, ParseReport)> {
    let mut report = ParseReport::new(path);
    let mut rdr = csv_reader(text);
    let cols = Columns::new(&rdr.headers().map_err(|e| csv_err(path, e))?.clone());
    let [pid, inst, item, score, manip, cond] = [
        "participant_id",
        "instrument",
        "item_id",
        "score",
        "manip_pass",
        "condition",
    ]
    .map(|c| cols.require(path, c));
    let (pid, inst, item, score, manip, cond) = (pid?, inst?, item?, score?, manip?, cond?);
    let pref = cols.optional("preference");
    let reason = cols.optional("reason");

    let mut rows: IndexMap<(String, Instrument, String, String), (usize, SurveyRow)> = IndexMap::new();
    let mut prefs: IndexMap<String, Preference> = IndexMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = line_of(&rec);
        let instrument: Instrument = rec[inst]
            .parse()
            .map_err(|_| IngestError::UnknownInstrument(rec[inst].to_string()))?;
        let raw_score: i64 = rec[score].parse().map_err(|_| IngestError::NonNumericField {
            path: path.to_path_buf(),
            line,
            field: "score".into(),
        })?;
        if !(1..=7).contains(&raw_score) {
            return Err(IngestError::ScoreOutOfRange { path: path.to_path_buf(), line, score: raw_score });
        }
        let manip_pass = parse_bool(&rec[manip])
            .ok_or_else(|| malformed(path, line, format!("manip_pass {:?} is not a boolean", &rec[manip])))?;
        let row = SurveyRow {
            participant_id: rec[pid].to_string(),
            instrument,
            item_id: rec[item].to_string(),
            score: raw_score as u8,
            manip_pass,
            condition: rec[cond].to_string(),
        };
        if let Some(choice) = pref.map(|i| &rec[i]).filter(|s| !s.is_empty()) {
            prefs.insert(
                row.participant_id.clone(),
                Preference {
                    participant_id: row.participant_id.clone(),
                    choice: choice.to_string(),
                    reason: reason.map(|i| rec[i].to_string()).unwrap_or_default(),
                },
            );
        }
        let key = (row.participant_id.clone(), instrument, row.item_id.clone(), row.condition.clone());
        if let Some((first, _)) = rows.get(&key) {
            report.warn(
                Some(line),
                format!(
                    "duplicate response {} {} {} (first on line {first}); keeping the later one",
                    key.0, key.1, key.2
                ),
            );
        }
        rows.insert(key, (line, row));
    }

    let mut items: BTreeMap<(String, Instrument, String), BTreeSet<String>> = BTreeMap::new();
    for (p, i, item, c) in rows.keys() {
        items.entry((p.clone(), *i, c.clone())).or_default().insert(item.clone());
    }
    for ((p, i, c), set) in &items {
        if set.len() != i.item_count() {
            report.warn(
                None,
                format!("participant {p} answered {} {i} items under {c}, expected {}", set.len(), i.item_count()),
            );
        }
    }
    let data = SurveyDataset {
        rows: rows.into_values().map(|(_, r)| r).collect(),
        preferences: prefs.into_values().collect(),
    };
    report.count("responses", data.rows.len());
    report.count("participants", data.rows.iter().map(|r| &r.participant_id).collect::<BTreeSet<_>>().len());
    report.count("preferences", data.preferences.len());
    Ok((data, report))
}

pub fn write_survey(data: &SurveyDataset) -> String {
    let mut out = String::from("participant_id,instrument,item_id,score,manip_pass,condition,preference,reason\n");
    let prefs: BTreeMap<&str, &Preference> =
        data.preferences.iter().map(|p| (p.participant_id.as_str(), p)).collect();
    let mut emitted = BTreeSet::new();
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in &data.rows {
        let (choice, reason) = match prefs.get(r.participant_id.as_str()) {
            Some(p) if emitted.insert(r.participant_id.clone()) => (p.choice.as_str(), p.reason.as_str()),
            _ => ("", ""),
        };
        w.write_record([
            r.participant_id.as_str(),
            r.instrument.as_str(),
            &r.item_id,
            &r.score.to_string(),
            if r.manip_pass { "true" } else { "false" },
            &r.condition,
            choice,
            reason,
        ])
        .expect("in-memory write");
    }
    out.push_str(&String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"));
    out
}

pub fn parse_sagat(path: &Path) -> IngestResult<(Vec<SagatResponse>, ParseReport)> {
    parse_sagat_str(&read(path)?, path)
}

/// Without a `perception` column the level comes from the answer: a correct level-1
/// answer counts as detected, a correct level-2 answer as comprehended.
pub fn parse_sagat_str(text: &str, path: &Path) -> IngestResult<(Vec<SagatResponse>, ParseReport)> {
    let mut report = ParseReport::new(path);
    let mut rdr = csv_reader(text);
    let cols = Columns::new(&rdr.headers().map_err(|e| csv_err(path, e))?.clone());
    let pid = cols.require(path, "participant_id")?;
    let qid = cols.require(path, "question_id")?;
    let se = cols.require(path, "se_id")?;
    let level = cols.require(path, "sa_level")?;
    let correct = cols.require(path, "correct")?;
    let perception = cols.optional("perception");
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = line_of(&rec);
        let sa_level: u8 = match rec[level].trim() {
            "1" => 1,
            "2" => 2,
            other => return Err(malformed(path, line, format!("sa_level {other:?} must be 1 or 2"))),
        };
        let ok = parse_bool(&rec[correct])
            .ok_or_else(|| malformed(path, line, format!("correct {:?} is not a boolean", &rec[correct])))?;
        let p = match perception.map(|i| rec[i].trim()).filter(|s| !s.is_empty()) {
            Some(s) => s
                .parse::<Perception>()
                .map_err(|v| malformed(path, line, format!("unknown perception {v:?}")))?,
            None => Perception::from_answer(sa_level, ok),
        };
        out.push(SagatResponse {
            participant: rec[pid].to_string(),
            question_id: rec[qid].to_string(),
            se_id: rec[se].to_string(),
            sa_level,
            correct: ok,
            perception: p,
        });
    }
    if out.is_empty() {
        report.warn(None, "no responses");
    }
    report.count("responses", out.len());
    Ok((out, report))
}

// ---------------------------------------------------------------- feature sheets

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawFeature {
    name: String,
    #[serde(default)]
    direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ordinal_map: Option<IndexMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawSystem {
    id: String,
    values: IndexMap<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    capabilities: Option<AutonomyCapabilities>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawSheet {
    features: Vec<RawFeature>,
    systems: Vec<RawSystem>,
}

fn is_absent_token(s: &str) -> bool {
    matches!(s.trim().to_uppercase().as_str(), "" | "N/A" | "NA" | "-")
}

pub fn parse_feature_sheet(path: &Path) -> IngestResult<(FeatureTable, ParseReport)> {
    parse_feature_sheet_str(&read(path)?, path)
}

pub fn parse_feature_sheet_str(text: &str, path: &Path) -> IngestResult<(FeatureTable, ParseReport)> {
    let mut report = ParseReport::new(path);
    let raw: RawSheet =
        serde_json::from_str(text).map_err(|source| IngestError::Json { path: path.to_path_buf(), source })?;
    let features = raw
        .features
        .into_iter()
        .map(|f| {
            let direction = f.direction.ok_or_else(|| IngestError::MissingDirection(f.name.clone()))?;
            Ok(FeatureSpec { name: f.name, direction, ordinal_map: f.ordinal_map, degree: f.degree })
        })
        .collect::<IngestResult<Vec<_>>>()?;
    check_unique("feature", features.iter().map(|f| f.name.as_str()))?;
    check_unique("system", raw.systems.iter().map(|s| s.id.as_str()))?;
    let mut systems = Vec::with_capacity(raw.systems.len());
    for sys in raw.systems {
        let mut values = IndexMap::new();
        for (name, v) in sys.values {
            if !features.iter().any(|f| f.name == name) {
                report.warn(None, format!("system {}: value for undeclared feature {name} ignored", sys.id));
                continue;
            }
            let value = match v {
                serde_json::Value::Null => FeatureValue::Absent,
                serde_json::Value::Number(n) => FeatureValue::Number(n.as_f64().unwrap_or(f64::NAN)),
                serde_json::Value::String(s) if is_absent_token(&s) => FeatureValue::Absent,
                serde_json::Value::String(s) => match s.trim().parse::<f64>() {
                    Ok(x) => FeatureValue::Number(x),
                    Err(_) => FeatureValue::Token(s),
                },
                other => {
                    return Err(Error::InvalidInput(format!("system {}: feature {name} has value {other}", sys.id)).into())
                }
            };
            values.insert(name, value);
        }
        for f in &features {
            match values.get(&f.name) {
                None => {
                    report.warn(None, format!("system {} has no value for {}", sys.id, f.name));
                    values.insert(f.name.clone(), FeatureValue::Absent);
                }
                Some(FeatureValue::Absent) => {
                    report.warn(None, format!("system {}: {} is N/A", sys.id, f.name));
                }
                _ => {}
            }
        }
        systems.push(SystemRow { id: sys.id, values, capabilities: sys.capabilities });
    }
    report.count("features", features.len());
    report.count("systems", systems.len());
    Ok((FeatureTable { features, systems }, report))
}

pub fn write_feature_sheet(table: &FeatureTable) -> String {
    let raw = RawSheet {
        features: table
            .features
            .iter()
            .map(|f| RawFeature {
                name: f.name.clone(),
                direction: Some(f.direction),
                ordinal_map: f.ordinal_map.clone(),
                degree: f.degree,
            })
            .collect(),
        systems: table
            .systems
            .iter()
            .map(|s| RawSystem {
                id: s.id.clone(),
                values: s
                    .values
                    .iter()
                    .map(|(k, v)| {
                        let json = match v {
                            FeatureValue::Number(x) => serde_json::json!(x),
                            FeatureValue::Token(t) => serde_json::json!(t),
                            FeatureValue::Absent => serde_json::json!("N/A"),
                        };
                        (k.clone(), json)
                    })
                    .collect(),
                capabilities: s.capabilities,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&raw).expect("sheet serializes");
    s.push('\n');
    s
}

// ---------------------------------------------------------------- fuzzy configs

pub fn parse_fis_config(path: &Path) -> IngestResult<(FisConfig, ParseReport)> {
    parse_fis_config_str(&read(path)?, path)
}

pub fn parse_fis_config_str(text: &str, path: &Path) -> IngestResult<(FisConfig, ParseReport)> {
    let mut report = ParseReport::new(path);
    let spec: FisConfigSpec =
        serde_json::from_str(text).map_err(|source| IngestError::Json { path: path.to_path_buf(), source })?;
    let cfg = FisConfig::compile(spec)?;
    for w in cfg.warnings() {
        report.warn(None, w.clone());
    }
    report.count("systems", cfg.systems().count());
    report.count("rules", cfg.systems().map(|s| s.rules.len()).sum());
    Ok((cfg, report))
}

pub fn write_fis_config(cfg: &FisConfig) -> String {
    let mut s = serde_json::to_string_pretty(cfg.spec()).expect("config serializes");
    s.push('\n');
    s
}

// ---------------------------------------------------------------- fiducials

pub fn parse_fiducial_truth(path: &Path) -> IngestResult<(Vec<FiducialGroundTruth>, ParseReport)> {
    parse_fiducial_truth_str(&read(path)?, path)
}

/// Columns `fiducial_id,x,y,min_traversal_m,min_turns`.
pub fn parse_fiducial_truth_str(text: &str, path: &Path) -> IngestResult<(Vec<FiducialGroundTruth>, ParseReport)> {
    let mut report = ParseReport::new(path);
    let mut rdr = csv_reader(text);
    let cols = Columns::new(&rdr.headers().map_err(|e| csv_err(path, e))?.clone());
    let id = cols.require(path, "fiducial_id")?;
    let x = cols.require(path, "x")?;
    let y = cols.require(path, "y")?;
    let trav = cols.require(path, "min_traversal_m")?;
    let turns = cols.require(path, "min_turns")?;
    let mut out: Vec<FiducialGroundTruth> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = line_of(&rec);
        let fid = rec[id].to_string();
        if out.iter().any(|f| f.fiducial_id == fid) {
            return Err(malformed(path, line, format!("duplicate fiducial {fid}")));
        }
        let min_turns: u32 = rec[turns].parse().map_err(|_| IngestError::NonNumericField {
            path: path.to_path_buf(),
            line,
            field: "min_turns".into(),
        })?;
        out.push(FiducialGroundTruth {
            fiducial_id: fid,
            gt_xy: Vec2::new(number(path, &rec, x, "x")?, number(path, &rec, y, "y")?),
            min_traversal_m: number(path, &rec, trav, "min_traversal_m")?,
            min_turns,
        });
    }
    report.count("fiducials", out.len());
    Ok((out, report))
}

pub fn parse_fiducial_observations(path: &Path) -> IngestResult<(Vec<FiducialObservation>, ParseReport)> {
    parse_fiducial_observations_str(&read(path)?, path)
}

/// Columns `fiducial_id,half,x,y,mapped`; x and y stay empty for halves not located.
pub fn parse_fiducial_observations_str(
    text: &str,
    path: &Path,
) -> IngestResult<(Vec<FiducialObservation>, ParseReport)> {
    let mut report = ParseReport::new(path);
    let mut rdr = csv_reader(text);
    let cols = Columns::new(&rdr.headers().map_err(|e| csv_err(path, e))?.clone());
    let id = cols.require(path, "fiducial_id")?;
    let half = cols.require(path, "half")?;
    let x = cols.require(path, "x")?;
    let y = cols.require(path, "y")?;
    let mapped = cols.require(path, "mapped")?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = line_of(&rec);
        let h: u8 = match rec[half].trim() {
            "1" => 1,
            "2" => 2,
            other => return Err(malformed(path, line, format!("half {other:?} must be 1 or 2"))),
        };
        let state = match rec[mapped].trim().to_lowercase().as_str() {
            "complete" => MappedState::Complete,
            "partial" => MappedState::Partial,
            "missing" => MappedState::Missing,
            other => return Err(malformed(path, line, format!("mapped {other:?} must be complete, partial or missing"))),
        };
        let map_xy = if rec[x].is_empty() && rec[y].is_empty() {
            None
        } else {
            Some(Vec2::new(number(path, &rec, x, "x")?, number(path, &rec, y, "y")?))
        };
        if map_xy.is_none() && state != MappedState::Missing {
            report.warn(Some(line), format!("{} half {h} is {state:?} but has no position", &rec[id]));
        }
        out.push(FiducialObservation { fiducial_id: rec[id].to_string(), half: h, map_xy, mapped: state });
    }
    report.count("observations", out.len());
    Ok((out, report))
}

// ---------------------------------------------------------------- per-test score sheets

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub line: usize,
    pub suas_id: String,
    pub test_id: String,
    /// Precomputed normalized score, when given.
    pub score: Option<f64>,
    /// Raw rulebase inputs by variable name.
    pub inputs: IndexMap<String, f64>,
}

pub fn parse_score_sheet(path: &Path) -> IngestResult<(Vec<ScoreRow>, ParseReport)> {
    parse_score_sheet_str(&read(path)?, path)
}

/// Columns `suas_id,test_id` followed by either `score` or rulebase input columns.
/// Empty cells are skipped.
pub fn parse_score_sheet_str(text: &str, path: &Path) -> IngestResult<(Vec<ScoreRow>, ParseReport)> {
    let mut report = ParseReport::new(path);
    let mut rdr = csv_reader(text);
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    let cols = Columns::new(&headers);
    let suas = cols.require(path, "suas_id")?;
    let test = cols.require(path, "test_id")?;
    let score = cols.optional("score");
    let mut out: Vec<ScoreRow> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = line_of(&rec);
        let mut row = ScoreRow {
            line,
            suas_id: rec[suas].to_string(),
            test_id: rec[test].to_string(),
            score: None,
            inputs: IndexMap::new(),
        };
        for (i, h) in headers.iter().enumerate() {
            if i == suas || i == test || rec[i].is_empty() {
                continue;
            }
            let v = number(path, &rec, i, h)?;
            if Some(i) == score {
                row.score = Some(v);
            } else {
                row.inputs.insert(h.to_lowercase(), v);
            }
        }
        if row.score.is_some() && !row.inputs.is_empty() {
            report.warn(Some(line), "both a score and raw inputs given; using the score");
        }
        if row.score.is_none() && row.inputs.is_empty() {
            report.warn(Some(line), format!("{} {} has no values; treated as not run", row.suas_id, row.test_id));
        }
        if out.iter().any(|r| r.suas_id == row.suas_id && r.test_id == row.test_id) {
            return Err(malformed(path, line, format!("duplicate row for {} {}", row.suas_id, row.test_id)));
        }
        out.push(row);
    }
    report.count("rows", out.len());
    Ok((out, report))
}

// ---------------------------------------------------------------- generic CSV tables

/// Rows of a headered CSV as string cells, for re-reading rendered reports.
pub fn read_csv_table(text: &str, path: &Path) -> IngestResult<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv_reader(text);
    let headers = rdr.headers().map_err(|e| csv_err(path, e))?.iter().map(str::to_string).collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect()).map_err(|e| csv_err(path, e)))
        .collect::<IngestResult<Vec<Vec<String>>>>()?;
    Ok((headers, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str) -> PathBuf {
        PathBuf::from(name)
    }

    #[test]
    fn minimal_telemetry() {
        let (traj, report) = parse_telemetry_str("t,x,y,z\n0,0,0,1\n0.1,0.1,0,1\n0.2,0.2,0,1\n", &p("a.csv")).unwrap();
        assert_eq!(traj.len(), 3);
        assert_eq!(report.counts["samples"], 3);
        assert!(!traj.has_velocity());
    }

    #[test]
    fn telemetry_errors() {
        let mut text = String::from("t,x,y,z\n");
        for t in [0.0, 0.1, 0.2, 0.3, 0.4, 0.35] {
            text.push_str(&format!("{t},0,0,0\n"));
        }
        match parse_telemetry_str(&text, &p("a.csv")) {
            Err(IngestError::NonMonotonicTime { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_telemetry_str("t,x,y\n0,0,0\n", &p("a.csv")),
            Err(IngestError::MissingColumn { column, .. }) if column == "z"
        ));
        assert!(matches!(
            parse_telemetry_str("t,x,y,z\n0,0,0,0\n1,abc,0,0\n", &p("a.csv")),
            Err(IngestError::NonNumericField { line: 3, field, .. }) if field == "x"
        ));
        assert!(matches!(
            parse_telemetry_str("t,x,y,z,vx\n0,0,0,0,1\n", &p("a.csv")),
            Err(IngestError::MissingColumn { column, .. }) if column == "vy"
        ));
    }

    #[test]
    fn telemetry_round_trip_with_acceleration() {
        let text = "t,x,y,z,ax,ay,az\n0,0,0,0,-1.5,0,0\n0.05,0.1,0,0,-1.5,0,0\n0.1,0.2,0.000001,0,-1.5,0,0.25\n";
        let (traj, _) = parse_telemetry_str(text, &p("a.csv")).unwrap();
        assert!(traj.has_acceleration());
        let written = write_telemetry(&traj);
        let (again, _) = parse_telemetry_str(&written, &p("b.csv")).unwrap();
        assert_eq!(traj, again);
    }

    const MANIFEST: &str = r#"{
      "schema_version": "1",
      "suas": [{"id": "A"}],
      "tests": [{"id": "oa", "type": "obstacle_avoidance"}],
      "environments": [],
      "trials": [
        {"trial_id": "t1", "test_id": "oa", "suas_id": "A", "outcome": "failure", "collisions": 1, "oa_category": "OA-C1", "t_collision_s": 2.0},
        {"trial_id": "t2", "test_id": "oa", "suas_id": "A", "outcome": "success", "oa_category": "OA-A1"}
      ]
    }"#;

    #[test]
    fn campaign_loads_and_round_trips() {
        let (c, report) = parse_campaign_str(MANIFEST, &p("m.json")).unwrap();
        assert_eq!(c.trials.len(), 2);
        assert_eq!(c.trials[0].oa_category, Some(OaCategory::C1));
        assert!(report.warnings.is_empty());
        let written = write_campaign(&c, Path::new("."));
        let (again, _) = parse_campaign_str(&written, &p("m.json")).unwrap();
        assert_eq!(c.trials, again.trials);
        assert_eq!(c.tests, again.tests);
    }

    #[test]
    fn campaign_errors() {
        let bad = MANIFEST.replace("OA-C1", "OA-B5");
        assert!(matches!(parse_campaign_str(&bad, &p("m.json")), Err(IngestError::UnknownCategory(v)) if v == "OA-B5"));
        let bad = MANIFEST.replace(r#""suas_id": "A", "outcome": "success""#, r#""suas_id": "Z", "outcome": "success""#);
        match parse_campaign_str(&bad, &p("m.json")) {
            Err(IngestError::DanglingReference(m)) => assert!(m.contains("t2") && m.contains('Z')),
            other => panic!("{other:?}"),
        }
        let bad = MANIFEST.replace(r#""schema_version": "1""#, r#""schema_version": "7""#);
        assert!(matches!(parse_campaign_str(&bad, &p("m.json")), Err(IngestError::SchemaVersionUnsupported(_))));
        let bad = MANIFEST.replace(r#""oa_category": "OA-A1""#, r#""oa_category": "OA-A1", "telemetry": "nope.csv""#);
        assert!(matches!(parse_campaign_str(&bad, &p("m.json")), Err(IngestError::MissingTelemetry(_))));
    }

    #[test]
    fn empty_campaign_warns() {
        let text = r#"{"schema_version": "1", "suas": [{"id": "A"}], "tests": [{"id": "x", "type": "nav"}], "trials": []}"#;
        let (c, report) = parse_campaign_str(text, &p("m.json")).unwrap();
        assert!(c.trials.is_empty());
        assert!(report.warnings.iter().any(|w| w.message == "no trials"));
    }

    #[test]
    fn survey_rules() {
        let text = "participant_id,instrument,item_id,score,manip_pass,condition\n\
                    p1,CTPA,Q1,5,true,A\np1,CTPA,Q1,6,true,A\np2,HCTM,Q1,3,false,B\n";
        let (data, report) = parse_survey_str(text, &p("s.csv")).unwrap();
        assert_eq!(data.rows.len(), 2);
        assert_eq!(data.rows[0].score, 6);
        assert!(report.warnings.iter().any(|w| w.message.contains("duplicate") && w.location.ends_with(":3")));
        assert!(report.warnings.iter().any(|w| w.message.contains("expected 9")));

        let bad = "participant_id,instrument,item_id,score,manip_pass,condition\np1,CTPA,Q1,8,true,A\n";
        assert!(matches!(parse_survey_str(bad, &p("s.csv")), Err(IngestError::ScoreOutOfRange { score: 8, line: 2, .. })));
        let bad = "participant_id,instrument,item_id,score,manip_pass,condition\np1,NASA,Q1,3,true,A\n";
        assert!(matches!(parse_survey_str(bad, &p("s.csv")), Err(IngestError::UnknownInstrument(_))));
    }

    #[test]
    fn survey_round_trip() {
        let text = "participant_id,instrument,item_id,score,manip_pass,condition,preference,reason\n\
                    p1,CTPA,Q1,5,true,A,A,\"steadier, quieter\"\np1,CTPA,Q2,4,true,A,,\np2,HCTM,Q1,3,false,B,,\n";
        let (data, _) = parse_survey_str(text, &p("s.csv")).unwrap();
        assert_eq!(data.preferences[0].reason, "steadier, quieter");
        let (again, _) = parse_survey_str(&write_survey(&data), &p("s.csv")).unwrap();
        assert_eq!(data, again);
    }

    #[test]
    fn sagat_defaults_perception() {
        let text = "participant_id,question_id,se_id,sa_level,correct\np1,q1,alt,1,true\np1,q2,rooms,2,true\np1,q3,alt,1,false\n";
        let (rs, _) = parse_sagat_str(text, &p("g.csv")).unwrap();
        assert_eq!(rs[0].perception, Perception::Detected);
        assert_eq!(rs[1].perception, Perception::Comprehended);
        assert_eq!(rs[2].perception, Perception::Undetected);
        let bad = "participant_id,question_id,se_id,sa_level,correct\np1,q1,alt,3,true\n";
        assert!(matches!(parse_sagat_str(bad, &p("g.csv")), Err(IngestError::Malformed { line: 2, .. })));
    }

    const SHEET: &str = r#"{
      "features": [
        {"name": "flight_time_min", "direction": "higher"},
        {"name": "thermal_res", "direction": "higher", "ordinal_map": {"160x120": 1}}
      ],
      "systems": [
        {"id": "A", "values": {"flight_time_min": 15, "thermal_res": "N/A"}, "capabilities": {"perception": true}},
        {"id": "B", "values": {"flight_time_min": 10, "thermal_res": "160x120"}}
      ]
    }"#;

    #[test]
    fn feature_sheet_loads() {
        let (t, report) = parse_feature_sheet_str(SHEET, &p("f.json")).unwrap();
        assert_eq!(t.systems[0].values["thermal_res"], FeatureValue::Absent);
        assert_eq!(t.systems[1].values["thermal_res"], FeatureValue::Token("160x120".into()));
        assert_eq!(report.warnings.len(), 1);
        let (again, _) = parse_feature_sheet_str(&write_feature_sheet(&t), &p("f.json")).unwrap();
        assert_eq!(t, again);
        let bad = SHEET.replace(r#", "direction": "higher", "ordinal_map""#, r#", "ordinal_map""#);
        assert!(matches!(parse_feature_sheet_str(&bad, &p("f.json")), Err(IngestError::MissingDirection(f)) if f == "thermal_res"));
    }

    #[test]
    fn fis_config_round_trip() {
        let (cfg, _) = parse_fis_config_str(crate::cfis::TAKEOFF_LAND_JSON, &p("c.json")).unwrap();
        let (again, _) = parse_fis_config_str(&write_fis_config(&cfg), &p("c.json")).unwrap();
        assert_eq!(cfg, again);
        let bad = crate::cfis::TAKEOFF_LAND_JSON.replacen("[0.0, 0.0, 1.25]", "[2, 1, 3]", 1);
        assert!(matches!(parse_fis_config_str(&bad, &p("c.json")), Err(IngestError::MalformedTuple { .. })));
    }

    #[test]
    fn score_sheet() {
        let text = "suas_id,test_id,score,crashes,completion,rollovers\nA,takeoff,0.71,,,\nB,takeoff,,0,1,0\nC,takeoff,,,,\n";
        let (rows, report) = parse_score_sheet_str(text, &p("s.csv")).unwrap();
        assert_eq!(rows[0].score, Some(0.71));
        assert_eq!(rows[1].inputs["completion"], 1.0);
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn fiducial_files() {
        let (gt, _) = parse_fiducial_truth_str("fiducial_id,x,y,min_traversal_m,min_turns\nA,0,0,3,0\nB,4,0,25,6\n", &p("g.csv")).unwrap();
        assert_eq!(gt[1].min_turns, 6);
        let (obs, report) =
            parse_fiducial_observations_str("fiducial_id,half,x,y,mapped\nA,1,0.1,0,complete\nA,2,,,partial\n", &p("o.csv"))
                .unwrap();
        assert_eq!(obs[1].map_xy, None);
        assert_eq!(report.warnings.len(), 1);
    }
}

//! Contextual autonomy scoring with zero-order fuzzy inference.
//!
//! Each axis (mission complexity, environmental complexity, optionally human
//! independence) is its own rulebase over triangular terms. Axis outputs feed a
//! combiner rulebase, and per-test scores roll up into a predictive mission score.

use std::collections::{BTreeMap, BTreeSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IngestError, Result};

/// Shipped rulebase for the takeoff and landing test.
pub const TAKEOFF_LAND_JSON: &str = include_str!("../configs/takeoff_land.json");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 3]", try_from = "[f64; 3]")]
pub struct TriangularMf {
    a: f64,
    b: f64,
    c: f64,
}

impl TriangularMf {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) || a > b || b > c {
            return Err(Error::InvalidInput(format!("triangle ({a}, {b}, {c}) is not ordered")));
        }
        Ok(Self { a, b, c })
    }

    pub fn points(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    /// Degree of membership. A degenerate left or right side acts as a shoulder.
    pub fn eval(&self, x: f64) -> f64 {
        let Self { a, b, c } = *self;
        if x == b || (a == b && x <= b) || (c == b && x >= b) {
            return 1.0;
        }
        if x <= a || x >= c {
            0.0
        } else if x < b {
            (x - a) / (b - a)
        } else {
            (c - x) / (c - b)
        }
    }
}

impl From<TriangularMf> for [f64; 3] {
    fn from(mf: TriangularMf) -> Self {
        mf.points()
    }
}

impl TryFrom<[f64; 3]> for TriangularMf {
    type Error = Error;

    fn try_from(p: [f64; 3]) -> Result<Self> {
        TriangularMf::new(p[0], p[1], p[2])
    }
}

/// Membership of `x` after clamping it into `range`.
pub fn mf_eval(mf: &TriangularMf, range: (f64, f64), x: f64) -> f64 {
    mf.eval(x.clamp(range.0, range.1))
}

/// Low, medium and high triangles spread evenly over the unit interval.
pub fn uniform_terms() -> IndexMap<String, TriangularMf> {
    let mut terms = IndexMap::new();
    terms.insert("low".to_string(), TriangularMf { a: 0.0, b: 0.0, c: 0.5 });
    terms.insert("medium".to_string(), TriangularMf { a: 0.0, b: 0.5, c: 1.0 });
    terms.insert("high".to_string(), TriangularMf { a: 0.5, b: 1.0, c: 1.0 });
    terms
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinguisticVariable {
    pub name: String,
    pub range: (f64, f64),
    pub terms: IndexMap<String, TriangularMf>,
    /// System whose crisp output feeds this variable.
    pub source: Option<String>,
}

impl LinguisticVariable {
    pub fn membership(&self, term: &str, x: f64) -> Option<f64> {
        self.terms.get(term).map(|mf| mf_eval(mf, self.range, x))
    }

    /// First point of an evenly spaced sweep where no term has positive membership.
    pub fn coverage_gap(&self, points: usize) -> Option<f64> {
        let (lo, hi) = self.range;
        let steps = points.max(2) - 1;
        (0..=steps)
            .map(|k| lo + (hi - lo) * k as f64 / steps as f64)
            .find(|&x| self.terms.values().all(|mf| mf_eval(mf, self.range, x) <= 0.0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    Is(String),
    Not(String),
}

impl Predicate {
    pub fn term(&self) -> &str {
        match self {
            Predicate::Is(t) | Predicate::Not(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub antecedents: Vec<(String, Predicate)>,
    pub consequent: String,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fis {
    pub id: String,
    pub inputs: Vec<LinguisticVariable>,
    pub rules: Vec<Rule>,
}

impl Fis {
    fn variable(&self, name: &str) -> Option<&LinguisticVariable> {
        self.inputs.iter().find(|v| v.name == name)
    }

    /// Per-rule firing strengths paired with their output constants.
    pub fn strengths(&self, inputs: &IndexMap<String, f64>) -> Result<Vec<(f64, f64)>> {
        for var in &self.inputs {
            match inputs.get(&var.name) {
                Some(x) if x.is_finite() => {}
                Some(x) => return Err(Error::InvalidInput(format!("{} = {x}", var.name))),
                None => return Err(Error::InvalidInput(format!("{}: missing input {}", self.id, var.name))),
            }
        }
        Ok(self
            .rules
            .iter()
            .map(|rule| {
                let w = rule
                    .antecedents
                    .iter()
                    .map(|(name, pred)| {
                        let var = self.variable(name).expect("validated at load");
                        let mu = var.membership(pred.term(), inputs[name]).expect("validated at load");
                        match pred {
                            Predicate::Is(_) => mu,
                            Predicate::Not(_) => 1.0 - mu,
                        }
                    })
                    .fold(1.0, f64::min);
                (w, rule.level)
            })
            .collect())
    }

    pub fn eval(&self, inputs: &IndexMap<String, f64>) -> Result<f64> {
        let fired = self.strengths(inputs)?;
        defuzzify(&fired).map_err(|e| match e {
            Error::NoRuleFired(_) => Error::NoRuleFired(format!("{} at {}", self.id, describe(inputs))),
            other => other,
        })
    }
}

fn describe(inputs: &IndexMap<String, f64>) -> String {
    inputs
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Weighted average of constant consequents.
pub fn defuzzify(fired: &[(f64, f64)]) -> Result<f64> {
    let total: f64 = fired.iter().map(|(w, _)| w).sum();
    if total <= 0.0 {
        return Err(Error::NoRuleFired(String::new()));
    }
    Ok(fired.iter().map(|(w, c)| w * c).sum::<f64>() / total)
}

/// Evaluate a single rulebase.
pub fn fis_eval(fis: &Fis, inputs: &IndexMap<String, f64>) -> Result<f64> {
    fis.eval(inputs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<IndexMap<String, Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleSpec {
    #[serde(rename = "if")]
    pub antecedents: IndexMap<String, String>,
    #[serde(rename = "then")]
    pub consequent: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub id: String,
    pub inputs: Vec<VariableSpec>,
    pub rules: Vec<RuleSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeSpec {
    pub mc: String,
    pub ec: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<String>,
    pub combiner: String,
    /// Mission inputs of a flawless run, used as the normalization reference.
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub ideal_mission: IndexMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Repair {
    pub term: String,
    pub published: Vec<f64>,
    pub used: Vec<f64>,
}

/// On-disk form of a rulebase configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisConfigSpec {
    pub name: String,
    #[serde(default = "default_levels")]
    pub output_levels: IndexMap<String, f64>,
    #[serde(default)]
    pub aliases: IndexMap<String, String>,
    pub systems: Vec<SystemSpec>,
    pub cascade: CascadeSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub repairs: Vec<Repair>,
}

fn default_levels() -> IndexMap<String, f64> {
    [("very_bad", 0.0), ("bad", 0.25), ("medium", 0.5), ("good", 0.75), ("very_good", 1.0)]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
}

fn level_key(s: &str) -> String {
    s.trim().to_lowercase().split_whitespace().collect::<Vec<_>>().join("_")
}

#[derive(Debug, Clone, PartialEq)]
pub struct FisConfig {
    spec: FisConfigSpec,
    systems: IndexMap<String, Fis>,
    order: Vec<String>,
    warnings: Vec<String>,
}

/// Axis and combined scores from one cascade evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CascadeScores {
    pub mc: f64,
    pub ec: f64,
    pub hi: Option<f64>,
    pub combined: f64,
}

impl FisConfig {
    pub fn takeoff_land() -> Self {
        let spec: FisConfigSpec =
            serde_json::from_str(TAKEOFF_LAND_JSON).expect("shipped config is valid JSON");
        Self::compile(spec).expect("shipped config is valid")
    }

    pub fn compile(spec: FisConfigSpec) -> Result<Self, IngestError> {
        let mut levels = IndexMap::new();
        for (name, &c) in &spec.output_levels {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::InvalidInput(format!("output level {name} = {c} outside [0, 1]")).into());
            }
            levels.insert(level_key(name), c);
        }
        let aliases: IndexMap<String, String> = spec
            .aliases
            .iter()
            .map(|(k, v)| (k.trim().to_lowercase(), v.trim().to_lowercase()))
            .collect();

        let mut systems = IndexMap::new();
        let mut warnings = Vec::new();
        for sys in &spec.systems {
            if systems.contains_key(&sys.id) {
                return Err(Error::InvalidInput(format!("duplicate system {}", sys.id)).into());
            }
            let inputs = sys
                .inputs
                .iter()
                .map(compile_variable)
                .collect::<Result<Vec<_>, _>>()?;
            for var in &inputs {
                if let Some(x) = var.coverage_gap(1000) {
                    warnings.push(format!("{}.{}: no term covers {x:.4}", sys.id, var.name));
                }
            }
            if sys.rules.is_empty() {
                return Err(Error::InvalidInput(format!("system {} has no rules", sys.id)).into());
            }
            let mut rules = Vec::with_capacity(sys.rules.len());
            for (i, r) in sys.rules.iter().enumerate() {
                let unknown = |what: String| IngestError::UnknownTerm { fis: sys.id.clone(), rule: i + 1, what };
                let mut antecedents = Vec::new();
                for (name, text) in &r.antecedents {
                    let var = inputs
                        .iter()
                        .find(|v| &v.name == name)
                        .ok_or_else(|| unknown(name.clone()))?;
                    let pred = parse_predicate(text, &aliases);
                    if !var.terms.contains_key(pred.term()) {
                        return Err(unknown(format!("{name}.{}", pred.term())));
                    }
                    antecedents.push((name.clone(), pred));
                }
                let consequent = level_key(&r.consequent);
                let level = *levels.get(&consequent).ok_or_else(|| unknown(r.consequent.clone()))?;
                rules.push(Rule { antecedents, consequent, level });
            }
            systems.insert(sys.id.clone(), Fis { id: sys.id.clone(), inputs, rules });
        }

        for id in [&spec.cascade.mc, &spec.cascade.ec, &spec.cascade.combiner]
            .into_iter()
            .chain(spec.cascade.hi.as_ref())
        {
            if !systems.contains_key(id) {
                return Err(IngestError::DanglingReference(id.clone()));
            }
        }
        if systems[&spec.cascade.combiner].inputs.len() != 2 {
            return Err(Error::InvalidInput("combiner must take exactly two inputs".into()).into());
        }
        for name in spec.cascade.ideal_mission.keys().cloned().collect::<Vec<_>>() {
            if !systems[&spec.cascade.mc].inputs.iter().any(|v| v.name == name) {
                return Err(IngestError::DanglingReference(format!("ideal_mission.{name}")));
            }
        }
        let order = topo_order(&systems)?;
        Ok(Self { spec, systems, order, warnings })
    }

    pub fn spec(&self) -> &FisConfigSpec {
        &self.spec
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn system(&self, id: &str) -> Option<&Fis> {
        self.systems.get(id)
    }

    pub fn systems(&self) -> impl Iterator<Item = &Fis> {
        self.order.iter().map(|id| &self.systems[id])
    }

    pub fn output_range(&self) -> (f64, f64) {
        let levels = self.spec.output_levels.values();
        let lo = levels.clone().copied().fold(f64::INFINITY, f64::min);
        let hi = levels.copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Raw (non-derived) input names of a system.
    pub fn raw_inputs(&self, id: &str) -> Vec<String> {
        self.systems
            .get(id)
            .map(|s| s.inputs.iter().filter(|v| v.source.is_none()).map(|v| v.name.clone()).collect())
            .unwrap_or_default()
    }

    fn eval_system(&self, id: &str, raw: &IndexMap<String, f64>, derived: &BTreeMap<String, f64>) -> Result<f64> {
        let fis = &self.systems[id];
        let mut inputs = IndexMap::new();
        for var in &fis.inputs {
            let value = match &var.source {
                Some(src) => derived.get(src).copied(),
                None => raw.get(&var.name).copied(),
            }
            .ok_or_else(|| Error::InvalidInput(format!("{id}: missing input {}", var.name)))?;
            inputs.insert(var.name.clone(), value);
        }
        fis.eval(&inputs)
    }

    /// Evaluate the axis rulebases and their combination.
    ///
    /// A human-independence axis, when configured, is folded in as a second
    /// pass through the combiner. That stage is experimental.
    pub fn cascade_eval(&self, raw: &IndexMap<String, f64>) -> Result<CascadeScores> {
        let cascade = &self.spec.cascade;
        let mut derived = BTreeMap::new();
        for id in &self.order {
            if id == &cascade.combiner {
                continue;
            }
            let needed = self.axis_needed(id);
            if !needed {
                continue;
            }
            let v = self.eval_system(id, raw, &derived)?;
            derived.insert(id.clone(), v);
        }
        let mc = derived[&cascade.mc];
        let ec = derived[&cascade.ec];
        let mut combined = self.eval_system(&cascade.combiner, raw, &derived)?;
        let hi = match &cascade.hi {
            Some(id) => {
                let hi = derived[id];
                combined = self.combine(combined, hi)?;
                Some(hi)
            }
            None => None,
        };
        Ok(CascadeScores { mc, ec, hi, combined })
    }

    fn axis_needed(&self, id: &str) -> bool {
        // Anything the combiner or the named axes depend on, transitively.
        let c = &self.spec.cascade;
        let mut roots: Vec<&str> = vec![&c.mc, &c.ec, &c.combiner];
        if let Some(h) = &c.hi {
            roots.push(h);
        }
        let mut seen = BTreeSet::new();
        while let Some(r) = roots.pop() {
            if !seen.insert(r.to_string()) {
                continue;
            }
            for v in &self.systems[r].inputs {
                if let Some(src) = &v.source {
                    roots.push(src);
                }
            }
        }
        seen.contains(id)
    }

    /// Feed two scores through the combiner in its input declaration order.
    pub fn combine(&self, first: f64, second: f64) -> Result<f64> {
        let fis = &self.systems[&self.spec.cascade.combiner];
        let inputs: IndexMap<String, f64> = fis
            .inputs
            .iter()
            .map(|v| v.name.clone())
            .zip([first, second])
            .collect();
        fis.eval(&inputs)
    }

    /// Normalized score of a test: combined output relative to a flawless mission run.
    pub fn test_score(&self, raw: &IndexMap<String, f64>) -> Result<(CascadeScores, f64)> {
        if self.spec.cascade.ideal_mission.is_empty() {
            return Err(Error::InvalidInput("config declares no ideal_mission inputs".into()));
        }
        let actual = self.cascade_eval(raw)?;
        let mut ideal_inputs = raw.clone();
        for (name, value) in self.ideal_mission_inputs() {
            ideal_inputs.insert(name, value);
        }
        let ideal = self.cascade_eval(&ideal_inputs)?;
        Ok((actual, normalized_test_score(actual.combined, ideal.combined)?))
    }

    fn ideal_mission_inputs(&self) -> Vec<(String, f64)> {
        let ideal = &self.spec.cascade.ideal_mission;
        ideal.iter().map(|(k, v)| (k.clone(), *v)).collect()
    }
}

fn compile_variable(spec: &VariableSpec) -> Result<LinguisticVariable, IngestError> {
    let (range, terms) = match (&spec.terms, spec.from.is_some()) {
        (None, true) => ((0.0, 1.0), uniform_terms()),
        (None, false) => {
            return Err(Error::InvalidInput(format!("variable {} declares no terms", spec.name)).into())
        }
        (Some(raw), _) => {
            let range = match spec.range {
                Some([lo, hi]) if lo < hi => (lo, hi),
                None if spec.from.is_some() => (0.0, 1.0),
                _ => return Err(Error::InvalidInput(format!("variable {} needs a range lo < hi", spec.name)).into()),
            };
            let mut terms = IndexMap::new();
            for (term, tuple) in raw {
                let malformed = || IngestError::MalformedTuple {
                    variable: spec.name.clone(),
                    term: term.clone(),
                    tuple: tuple.clone(),
                };
                let [a, b, c] = <[f64; 3]>::try_from(tuple.as_slice()).map_err(|_| malformed())?;
                let mf = TriangularMf::new(a, b, c).map_err(|_| malformed())?;
                if a < range.0 || c > range.1 {
                    return Err(malformed());
                }
                terms.insert(term.trim().to_lowercase(), mf);
            }
            (range, terms)
        }
    };
    Ok(LinguisticVariable { name: spec.name.clone(), range, terms, source: spec.from.clone() })
}

fn parse_predicate(text: &str, aliases: &IndexMap<String, String>) -> Predicate {
    let norm = text.trim().to_lowercase();
    let norm = aliases.get(&norm).cloned().unwrap_or(norm);
    match norm.strip_prefix("not ") {
        Some(rest) => Predicate::Not(rest.trim().to_string()),
        None => Predicate::Is(norm),
    }
}

fn topo_order(systems: &IndexMap<String, Fis>) -> Result<Vec<String>, IngestError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Active,
        Done,
    }
    fn visit(
        id: &str,
        systems: &IndexMap<String, Fis>,
        marks: &mut BTreeMap<String, Mark>,
        out: &mut Vec<String>,
    ) -> Result<(), IngestError> {
        match marks.get(id).copied().unwrap_or(Mark::Fresh) {
            Mark::Done => return Ok(()),
            Mark::Active => return Err(IngestError::CyclicCascade(id.to_string())),
            Mark::Fresh => {}
        }
        marks.insert(id.to_string(), Mark::Active);
        for var in &systems[id].inputs {
            if let Some(src) = &var.source {
                if !systems.contains_key(src) {
                    return Err(IngestError::DanglingReference(src.clone()));
                }
                visit(src, systems, marks, out)?;
            }
        }
        marks.insert(id.to_string(), Mark::Done);
        out.push(id.to_string());
        Ok(())
    }
    let mut marks = BTreeMap::new();
    let mut out = Vec::new();
    for id in systems.keys() {
        visit(id, systems, &mut marks, &mut out)?;
    }
    Ok(out)
}

pub fn normalized_test_score(combined: f64, ideal: f64) -> Result<f64> {
    if ideal <= 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok((combined / ideal).min(1.0))
}

/// Weighted product of per-test fractions; absent tests are dropped and the
/// remaining weights rescaled. Equal weights reduce to the geometric mean.
pub fn predictive_score(
    scores: &IndexMap<String, Option<f64>>,
    weights: Option<&IndexMap<String, f64>>,
) -> Result<f64> {
    let present: Vec<(&String, f64)> = scores.iter().filter_map(|(k, v)| v.map(|v| (k, v))).collect();
    if present.is_empty() {
        return Err(Error::AllTestsMissing);
    }
    let mut terms = Vec::with_capacity(present.len());
    for (test, s) in &present {
        if !(*s > 0.0) {
            return Err(Error::NonPositiveScore((*test).clone()));
        }
        if *s > 1.0 + 1e-12 {
            return Err(Error::InvalidInput(format!("test {test} score {s} exceeds 1")));
        }
        let w = match weights {
            Some(w) => *w
                .get(*test)
                .ok_or_else(|| Error::InvalidInput(format!("no weight for test {test}")))?,
            None => 1.0,
        };
        if w < 0.0 || !w.is_finite() {
            return Err(Error::InvalidInput(format!("weight for {test} is {w}")));
        }
        terms.push((w, *s));
    }
    let total: f64 = terms.iter().map(|(w, _)| w).sum();
    if total <= 0.0 {
        return Err(Error::AllTestsMissing);
    }
    Ok(terms.iter().map(|(w, s)| w / total * s.ln()).sum::<f64>().exp())
}

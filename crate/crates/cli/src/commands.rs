use std::fs;
use std::path::{Path, PathBuf};

use decisive_core::cfis::FisConfig;
use decisive_core::collision::{
    self, CategoryKind, CollisionKinematics, FlightMetrics, DELTA_V_WINDOW,
};
use decisive_core::field::{self, LAP_LENGTH_M};
use decisive_core::human::{self, SaSetup, WeightModel};
use decisive_core::ingest::{self, ScoreRow};
use decisive_core::mapping;
use decisive_core::model::{ApertureTier, Campaign, Outcome, Trajectory, Vec3};
use decisive_core::nav::{self, ReferencePath};
use decisive_core::ncap::{self, FeatureTable, WeightScheme};
use decisive_core::{stats, Error};
use indexmap::IndexMap;

use crate::plot::{self, PlotKind};
use crate::report::{render_document, Cell, Column, ReportTable};
use crate::{CliError, Command, Context, MetricTest};

type CmdResult<T> = Result<T, CliError>;

pub(crate) fn dispatch(cmd: &Command, ctx: &mut Context<'_>) -> CmdResult<String> {
    match cmd {
        Command::Validate { manifest } => {
            let loaded = load_campaign(manifest, ctx)?;
            render(ctx, &[summary_table(&loaded)])
        }
        Command::Metrics { manifest, test, truth, observed } => {
            let tables = match test {
                MetricTest::Mapping => mapping_tables(truth.as_deref(), observed.as_deref(), ctx)?,
                other => {
                    let path = manifest
                        .as_deref()
                        .ok_or_else(|| CliError::Input("a campaign manifest is required".into()))?;
                    let loaded = load_campaign(path, ctx)?;
                    match other {
                        MetricTest::Nav => nav_tables(&loaded, ctx)?,
                        MetricTest::Collision => collision_tables(&loaded, ctx)?,
                        MetricTest::Field => field_tables(&loaded)?,
                        MetricTest::Mapping => unreachable!(),
                    }
                }
            };
            render(ctx, &tables)
        }
        Command::Ncap { features, weights } => {
            let (table, scheme) = load_sheet(features, weights, ctx)?;
            let t = ncap_table(&table, &scheme, ctx)?;
            render(ctx, &[t])
        }
        Command::Cfis { scores, fis, test_weights } => {
            let t = cfis_tables(scores, fis.as_deref(), test_weights.as_deref(), ctx)?;
            render(ctx, &t)
        }
        Command::Sa { setup, sagat } => {
            let t = sa_tables(setup, sagat, ctx)?;
            render(ctx, &t)
        }
        Command::Trust { survey, condition_a, condition_b } => {
            let t = trust_tables(survey, condition_a, condition_b, ctx)?;
            render(ctx, &t)
        }
        Command::Report { manifest, truth, observed } => {
            let loaded = load_campaign(manifest, ctx)?;
            let mut tables = vec![summary_table(&loaded)];
            tables.extend(nav_tables(&loaded, ctx)?);
            tables.extend(collision_tables(&loaded, ctx)?);
            tables.extend(field_tables(&loaded)?);
            if truth.is_some() || observed.is_some() {
                tables.extend(mapping_tables(truth.as_deref(), observed.as_deref(), ctx)?);
            }
            render(ctx, &tables)
        }
        Command::Plot { kind, manifest, trial, features, weights } => match kind {
            PlotKind::NcapScatter => {
                let path = features
                    .as_deref()
                    .ok_or_else(|| CliError::Input("--features is required for ncap-scatter".into()))?;
                let (table, scheme) = load_sheet(path, weights, ctx)?;
                let ranked = ncap::rank_table(&table, &scheme)?;
                let mut points: Vec<(String, u8, f64)> =
                    ranked.entries.iter().map(|e| (e.id.clone(), e.n_al, e.n_cp)).collect();
                points.sort_by(|a, b| a.0.cmp(&b.0));
                Ok(plot::ncap_scatter(&points)?)
            }
            PlotKind::Deviation => {
                let path = manifest
                    .as_deref()
                    .ok_or_else(|| CliError::Input("a campaign manifest is required for deviation".into()))?;
                let trial = trial
                    .as_deref()
                    .ok_or_else(|| CliError::Input("--trial is required for deviation".into()))?;
                let loaded = load_campaign(path, ctx)?;
                let record = loaded
                    .campaign
                    .trials
                    .iter()
                    .find(|t| t.trial_id == trial)
                    .ok_or_else(|| CliError::Input(format!("no trial {trial}")))?;
                let test = loaded.campaign.test(&record.test_id).expect("validated reference");
                let path = reference_path(test)?
                    .ok_or_else(|| CliError::Input(format!("test {} has no reference path", test.id)))?;
                let traj = loaded
                    .telemetry
                    .get(trial)
                    .ok_or_else(|| CliError::Input(format!("trial {trial} has no telemetry")))?;
                Ok(plot::deviation_plot(trial, &nav::deviation_series(traj, &path))?)
            }
        },
    }
}

fn render(ctx: &Context<'_>, tables: &[ReportTable]) -> CmdResult<String> {
    Ok(render_document(tables, ctx.format, ctx.glyphs)?)
}

struct Loaded {
    campaign: Campaign,
    telemetry: IndexMap<String, Trajectory>,
}

fn load_campaign(path: &Path, ctx: &mut Context<'_>) -> CmdResult<Loaded> {
    let (campaign, report) = ingest::parse_campaign(path)?;
    ctx.report(&report);
    let mut telemetry = IndexMap::new();
    for (trial_id, file) in &campaign.telemetry {
        let (traj, report) = ingest::parse_telemetry(file)?;
        ctx.report(&report);
        let record = campaign.trials.iter().find(|t| &t.trial_id == trial_id).expect("telemetry keyed by trial");
        record
            .check_span(&traj)
            .map_err(|e| CliError::Input(format!("trial {trial_id}: {e}")))?;
        telemetry.insert(trial_id.clone(), traj);
    }
    Ok(Loaded { campaign, telemetry })
}

fn summary_table(loaded: &Loaded) -> ReportTable {
    let c = &loaded.campaign;
    let mut t = ReportTable::new("Campaign summary", vec![Column::new("Item", 0), Column::new("Count", 0)]);
    let samples: usize = loaded.telemetry.values().map(Trajectory::len).sum();
    for (k, v) in [
        ("sUAS", c.suas.len()),
        ("Tests", c.tests.len()),
        ("Environments", c.environments.len()),
        ("Trials", c.trials.len()),
        ("Telemetry files", loaded.telemetry.len()),
        ("Telemetry samples", samples),
    ] {
        t.push(vec![k.into(), v.into()]);
    }
    t
}

fn reference_path(test: &decisive_core::model::TestDefinition) -> CmdResult<Option<ReferencePath>> {
    test.path
        .as_ref()
        .map(|p| {
            let v = p.iter().map(|q| Vec3::new(q[0], q[1], q[2])).collect();
            ReferencePath::new(v, test.closed).map_err(|e| CliError::Input(format!("test {}: {e}", test.id)))
        })
        .transpose()
}

fn nav_tables(loaded: &Loaded, ctx: &mut Context<'_>) -> CmdResult<Vec<ReportTable>> {
    let c = &loaded.campaign;
    let mut per_flight = ReportTable::new(
        "Path deviation",
        vec![
            Column::new("Test", 0),
            Column::new("sUAS", 0),
            Column::new("Trial", 0),
            Column::new("Samples", 0),
            Column::new("AD (m)", 3),
            Column::new("Speed (m/s)", 2),
        ],
    );
    let mut summary = ReportTable::new(
        "Path deviation summary",
        vec![
            Column::new("Test", 0),
            Column::new("sUAS", 0),
            Column::new("Flights", 0),
            Column::new("Mean AD (m)", 3),
            Column::new("Std AD (m)", 3),
        ],
    );
    let mut wp_flights = ReportTable::new(
        "Waypoint error",
        vec![Column::new("Test", 0), Column::new("sUAS", 0), Column::new("Trial", 0), Column::new("Error (m)", 3)],
    );
    let mut wp_summary = ReportTable::new(
        "Waypoint summary",
        vec![
            Column::new("Test", 0),
            Column::new("sUAS", 0),
            Column::new("Trials", 0),
            Column::new("Accuracy (m)", 3),
            Column::new("Precision (m)", 3),
        ],
    );
    let mut apertures = ReportTable::new(
        "Aperture tiers (%)",
        std::iter::once(Column::new("Test", 0))
            .chain(std::iter::once(Column::new("sUAS", 0)))
            .chain(std::iter::once(Column::new("Trials", 0)))
            .chain(ApertureTier::ALL.iter().map(|a| Column::new(a.as_str(), 0)))
            .collect(),
    );

    for test in &c.tests {
        let path = reference_path(test)?;
        for s in &c.suas {
            let trials: Vec<_> = c.trials_for(&test.id).filter(|t| t.suas_id == s.id).collect();
            if trials.is_empty() {
                continue;
            }
            let mut ads = Vec::new();
            let mut errors = Vec::new();
            for t in &trials {
                let Some(traj) = loaded.telemetry.get(&t.trial_id) else {
                    if path.is_some() || test.waypoint.is_some() {
                        ctx.warn(&format!("trial {} has no telemetry; skipped", t.trial_id));
                    }
                    continue;
                };
                if let Some(path) = &path {
                    let ad = nav::average_deviation(traj, path)?;
                    let speed = (t.duration.0 > 0.0)
                        .then(|| nav::traversal_speed(path.length(), t.duration))
                        .transpose()?;
                    per_flight.push(vec![
                        test.id.as_str().into(),
                        s.id.as_str().into(),
                        t.trial_id.as_str().into(),
                        traj.len().into(),
                        ad.into(),
                        speed.into(),
                    ]);
                    ads.push(ad);
                }
                if let Some(w) = test.waypoint {
                    let last = traj.samples().last().expect("trajectory is non-empty").pos;
                    let e = nav::waypoint_error(last, Vec3::new(w[0], w[1], w[2]));
                    wp_flights.push(vec![
                        test.id.as_str().into(),
                        s.id.as_str().into(),
                        t.trial_id.as_str().into(),
                        e.into(),
                    ]);
                    errors.push(e);
                }
            }
            if !ads.is_empty() {
                let sum = nav::summarize_ad(ads)?;
                if let Some(w) = &sum.warning {
                    ctx.warn(&format!("{} {}: {w}", test.id, s.id));
                }
                summary.push(vec![
                    test.id.as_str().into(),
                    s.id.as_str().into(),
                    sum.per_flight_ad.len().into(),
                    sum.mean_ad.into(),
                    sum.std_ad.into(),
                ]);
            }
            if !errors.is_empty() {
                let sum = nav::waypoint_summary(&errors)?;
                wp_summary.push(vec![
                    test.id.as_str().into(),
                    s.id.as_str().into(),
                    sum.trials.into(),
                    sum.accuracy.into(),
                    sum.precision.into(),
                ]);
            }
            let tiers: Vec<ApertureTier> = trials.iter().filter_map(|t| t.aperture_tier).collect();
            if !tiers.is_empty() {
                let mut row: Vec<Cell> = vec![test.id.as_str().into(), s.id.as_str().into(), tiers.len().into()];
                for tier in ApertureTier::ALL {
                    let n = tiers.iter().filter(|&&x| x == *tier).count();
                    row.push(Cell::Number(100.0 * n as f64 / tiers.len() as f64));
                }
                apertures.push(row);
            }
        }
    }
    Ok([per_flight, summary, wp_flights, wp_summary, apertures]
        .into_iter()
        .filter(|t| !t.rows.is_empty())
        .collect())
}

fn collision_tables(loaded: &Loaded, ctx: &mut Context<'_>) -> CmdResult<Vec<ReportTable>> {
    let c = &loaded.campaign;
    let metric_cols = |first: Vec<Column>| -> Vec<Column> {
        first
            .into_iter()
            .chain([
                Column::new("Min distance (m)", 3),
                Column::new("Min TTC (s)", 2),
                Column::new("MASI", 3),
                Column::new("Max ΔV (m/s)", 2),
                Column::new("Max deceleration (m/s²)", 2),
            ])
            .collect()
    };
    let mut flights = ReportTable::new(
        "Collision metrics",
        metric_cols(vec![
            Column::new("Test", 0),
            Column::new("sUAS", 0),
            Column::new("Trial", 0),
            Column::new("Collided", 0),
        ]),
    );
    let mut summary = ReportTable::new(
        "Collision summary",
        metric_cols(vec![
            Column::new("Test", 0),
            Column::new("sUAS", 0),
            Column::new("Flights", 0),
            Column::new("Collisions", 0),
        ]),
    );
    let kin = CollisionKinematics::default();
    for test in &c.tests {
        let Some(spec) = &test.obstacle else { continue };
        let ob = spec.geometry()?;
        for s in &c.suas {
            let mut set = Vec::new();
            for t in c.trials_for(&test.id).filter(|t| t.suas_id == s.id) {
                let Some(traj) = loaded.telemetry.get(&t.trial_id) else {
                    ctx.warn(&format!("trial {} has no telemetry; skipped", t.trial_id));
                    continue;
                };
                let mut m = FlightMetrics { collided: t.collided(), ..FlightMetrics::default() };
                if m.collided {
                    let r = collision::masi(traj, &kin)?;
                    m.masi = Some(r.masi);
                    m.max_deceleration = Some(r.max_deceleration);
                    match t.t_collision_s {
                        Some(tc) => m.max_delta_v = Some(collision::max_delta_v(traj, tc, DELTA_V_WINDOW)?),
                        None => ctx.warn(&format!("trial {} collided without a collision time", t.trial_id)),
                    }
                } else {
                    m.min_distance = Some(collision::distance_to_obstacle(traj, &ob).min);
                    m.min_ttc = match collision::min_ttc(traj, &ob) {
                        Ok(r) => Some(r.min_ttc),
                        Err(Error::AllStationary) => {
                            ctx.warn(&format!("trial {} never moves; no TTC", t.trial_id));
                            None
                        }
                        Err(e) => return Err(e.into()),
                    };
                }
                let m = m.normalized();
                flights.push(vec![
                    test.id.as_str().into(),
                    s.id.as_str().into(),
                    t.trial_id.as_str().into(),
                    if m.collided { "yes" } else { "no" }.into(),
                    m.min_distance.into(),
                    m.min_ttc.into(),
                    m.masi.into(),
                    m.max_delta_v.into(),
                    m.max_deceleration.into(),
                ]);
                set.push(m);
            }
            if set.is_empty() {
                continue;
            }
            let sum = collision::summarize_flights(&set);
            summary.push(vec![
                test.id.as_str().into(),
                s.id.as_str().into(),
                sum.flights.into(),
                sum.collisions.into(),
                sum.mean_min_distance.into(),
                sum.mean_min_ttc.into(),
                sum.mean_masi.into(),
                sum.mean_max_delta_v.into(),
                sum.mean_max_deceleration.into(),
            ]);
        }
    }

    let mut tables = vec![flights, summary];
    for (kind, title) in [(CategoryKind::Oa, "Obstacle avoidance categories (%)"), (CategoryKind::Cr, "Collision resilience categories (%)")] {
        let tagged: Vec<(String, &decisive_core::model::TrialRecord)> = c
            .trials
            .iter()
            .filter(|t| match kind {
                CategoryKind::Oa => t.oa_category.is_some(),
                CategoryKind::Cr => t.cr_category.is_some(),
            })
            .map(|t| {
                let material = c
                    .test(&t.test_id)
                    .and_then(|d| d.obstacle.as_ref())
                    .map_or("unspecified", |o| o.material.label());
                (format!("{} / {material}", t.suas_id), t)
            })
            .collect();
        if tagged.is_empty() {
            continue;
        }
        let rows = collision::category_distribution(tagged, kind)?;
        let mut table = ReportTable::new(
            title,
            [Column::new("Group", 0), Column::new("Trials", 0)]
                .into_iter()
                .chain(kind.labels().into_iter().map(|l| Column::new(l, 0)))
                .collect(),
        );
        for r in rows {
            let mut row: Vec<Cell> = vec![r.group.into(), r.trials.into()];
            row.extend(r.percentages.into_iter().map(Cell::Number));
            table.push(row);
        }
        tables.push(table);
    }
    Ok(tables.into_iter().filter(|t| !t.rows.is_empty()).collect())
}

const COMPLETION_THRESHOLDS: [f64; 2] = [0.70, 0.85];

fn field_tables(loaded: &Loaded) -> CmdResult<Vec<ReportTable>> {
    let c = &loaded.campaign;
    let mut completion = ReportTable::new(
        "Completion",
        [
            Column::new("Test", 0),
            Column::new("sUAS", 0),
            Column::new("Successes", 0),
            Column::new("Failures", 0),
            Column::new("Rate", 2),
        ]
        .into_iter()
        .chain(COMPLETION_THRESHOLDS.iter().map(|p| Column::new(&format!("Confidence p0={p:.2}"), 3)))
        .collect(),
    );
    let mut endurance = ReportTable::new(
        "Endurance",
        vec![
            Column::new("Test", 0),
            Column::new("sUAS", 0),
            Column::new("Trial", 0),
            Column::new("Laps", 0),
            Column::new("Distance (m)", 1),
            Column::new("Duration (min)", 2),
            Column::new("Avg speed (m/s)", 2),
        ],
    );
    for test in &c.tests {
        for s in &c.suas {
            let trials: Vec<_> = c.trials_for(&test.id).filter(|t| t.suas_id == s.id).collect();
            if trials.is_empty() {
                continue;
            }
            let successes = trials.iter().filter(|t| t.outcome == Outcome::Success).count() as u32;
            let failures = trials.len() as u32 - successes;
            let r = stats::completion(successes, failures, &COMPLETION_THRESHOLDS)?;
            let mut row: Vec<Cell> = vec![
                test.id.as_str().into(),
                s.id.as_str().into(),
                successes.into(),
                failures.into(),
                r.rate.into(),
            ];
            row.extend(r.confidence_at.iter().map(|(_, v)| Cell::Number(*v)));
            completion.push(row);

            for t in trials.iter().filter(|t| t.laps.is_some()) {
                let laps = t.laps.expect("filtered");
                let e = field::endurance_metrics(laps, t.duration)?;
                let scale = test.lap_length_m.unwrap_or(LAP_LENGTH_M) / LAP_LENGTH_M;
                endurance.push(vec![
                    test.id.as_str().into(),
                    s.id.as_str().into(),
                    t.trial_id.as_str().into(),
                    laps.into(),
                    (e.distance_m * scale).into(),
                    t.duration.0.into(),
                    (e.avg_speed_mps * scale).into(),
                ]);
            }
        }
    }
    Ok([completion, endurance].into_iter().filter(|t| !t.rows.is_empty()).collect())
}

fn mapping_tables(truth: Option<&Path>, observed: Option<&Path>, ctx: &mut Context<'_>) -> CmdResult<Vec<ReportTable>> {
    let (Some(truth), Some(observed)) = (truth, observed) else {
        return Err(CliError::Input("mapping needs both --truth and --observed".into()));
    };
    let (gt, report) = ingest::parse_fiducial_truth(truth)?;
    ctx.report(&report);
    let (obs, report) = ingest::parse_fiducial_observations(observed)?;
    ctx.report(&report);
    let mut difficulty = ReportTable::new(
        "Fiducial difficulty",
        vec![
            Column::new("Fiducial", 0),
            Column::new("Min traversal (m)", 1),
            Column::new("Min turns", 0),
            Column::new("Difficulty", 0),
        ],
    );
    for f in &gt {
        difficulty.push(vec![
            f.fiducial_id.as_str().into(),
            f.min_traversal_m.into(),
            f.min_turns.into(),
            mapping::difficulty_rating(f.min_traversal_m, f.min_turns).to_string().into(),
        ]);
    }
    let ge = mapping::global_error(&obs, &gt)?;
    let coverage = mapping::fiducial_coverage(&obs, &gt)?;
    let mut accuracy = ReportTable::new(
        "Map accuracy",
        vec![
            Column::new("Matched", 0),
            Column::new("Pairs", 0),
            Column::new("Scale", 4),
            Column::new("Global error (cm)", 2),
            Column::new("Coverage (%)", 1),
        ],
    );
    accuracy.push(vec![ge.matched.into(), ge.pairs.into(), ge.scale.into(), ge.error_cm.into(), coverage.into()]);
    Ok(vec![difficulty, accuracy])
}

fn load_sheet(path: &Path, weights: &str, ctx: &mut Context<'_>) -> CmdResult<(FeatureTable, WeightScheme)> {
    let (table, report) = ingest::parse_feature_sheet(path)?;
    ctx.report(&report);
    let scheme = match weights {
        "uniform" => WeightScheme::Uniform,
        "degree" => WeightScheme::degrees_from(&table).map_err(|e| CliError::Input(e.to_string()))?,
        file => {
            let p = PathBuf::from(file);
            let text = fs::read_to_string(&p).map_err(|e| CliError::Input(format!("{file}: {e}")))?;
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{file}: {e}")))?
        }
    };
    Ok((table, scheme))
}

fn ncap_table(table: &FeatureTable, scheme: &WeightScheme, ctx: &mut Context<'_>) -> CmdResult<ReportTable> {
    let enc = ncap::encode_features(table)?;
    for (sys, feat) in &enc.filled {
        ctx.warn(&format!("{sys}: {feat} missing, filled with the cohort minimum"));
    }
    let result = ncap::rank_table(table, scheme)?;
    if let Some(w) = &result.warning {
        ctx.warn(w);
    }
    let mut t = ReportTable::new(
        "NCAP",
        vec![
            Column::new("sUAS", 0),
            Column::new("N_AL", 0),
            Column::new("N_CP", 2),
            Column::new("Absolute distance", 2),
            Column::new("Relative distance", 2),
            Column::new("Rank", 0),
        ],
    );
    for e in &result.entries {
        t.push(vec![
            e.id.as_str().into(),
            Cell::Int(i64::from(e.n_al)),
            e.n_cp.into(),
            e.absolute_distance.into(),
            e.relative_distance.into(),
            e.rank.into(),
        ]);
    }
    Ok(t)
}

fn cfis_tables(
    scores: &Path,
    fis: Option<&Path>,
    test_weights: Option<&Path>,
    ctx: &mut Context<'_>,
) -> CmdResult<Vec<ReportTable>> {
    let config = match fis {
        Some(p) => {
            let (cfg, report) = ingest::parse_fis_config(p)?;
            ctx.report(&report);
            cfg
        }
        None => FisConfig::takeoff_land(),
    };
    let weights: Option<IndexMap<String, f64>> = test_weights
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        })
        .transpose()?;
    let (rows, report) = ingest::parse_score_sheet(scores)?;
    ctx.report(&report);

    let mut per_test = ReportTable::new(
        "Per-test scores",
        vec![
            Column::new("sUAS", 0),
            Column::new("Test", 0),
            Column::new("MC", 3),
            Column::new("EC", 3),
            Column::new("Combined", 3),
            Column::new("Normalized", 3),
        ],
    );
    let mut tests: Vec<String> = Vec::new();
    let mut by_suas: IndexMap<String, IndexMap<String, Option<f64>>> = IndexMap::new();
    for row in &rows {
        if !tests.contains(&row.test_id) {
            tests.push(row.test_id.clone());
        }
        let value = score_row(&config, row, &mut per_test, ctx)?;
        by_suas.entry(row.suas_id.clone()).or_default().insert(row.test_id.clone(), value);
    }

    let mut predictive = ReportTable::new(
        "Predictive mission score",
        std::iter::once(Column::new("sUAS", 0))
            .chain(tests.iter().map(|t| Column::new(t, 2)))
            .chain(std::iter::once(Column::new("Predictive", 2)))
            .collect(),
    );
    for (suas, scores) in &mut by_suas {
        for t in &tests {
            scores.entry(t.clone()).or_insert(None);
        }
        let mut row: Vec<Cell> = vec![suas.as_str().into()];
        row.extend(tests.iter().map(|t| match scores[t] {
            Some(v) => Cell::Number(v),
            None => Cell::Text("-".into()),
        }));
        let p = decisive_core::cfis::predictive_score(scores, weights.as_ref())?;
        row.push(p.into());
        predictive.push(row);
    }
    Ok(vec![per_test, predictive])
}

fn score_row(config: &FisConfig, row: &ScoreRow, table: &mut ReportTable, ctx: &mut Context<'_>) -> CmdResult<Option<f64>> {
    let base: Vec<Cell> = vec![row.suas_id.as_str().into(), row.test_id.as_str().into()];
    if let Some(s) = row.score {
        table.push(base.into_iter().chain([Cell::Empty, Cell::Empty, Cell::Empty, s.into()]).collect());
        return Ok(Some(s));
    }
    if row.inputs.is_empty() {
        return Ok(None);
    }
    match config.test_score(&row.inputs) {
        Ok((s, norm)) => {
            table.push(base.into_iter().chain([s.mc.into(), s.ec.into(), s.combined.into(), norm.into()]).collect());
            Ok(Some(norm))
        }
        Err(Error::NoRuleFired(m)) => {
            ctx.warn(&format!("line {}: no rule fired ({m}); test treated as not run", row.line));
            Ok(None)
        }
        Err(Error::InvalidInput(m)) => Err(CliError::Input(format!("line {}: {m}", row.line))),
        Err(e) => Err(e.into()),
    }
}

fn sa_tables(setup: &Path, sagat: &Path, ctx: &mut Context<'_>) -> CmdResult<Vec<ReportTable>> {
    let text = fs::read_to_string(setup).map_err(|e| CliError::Input(format!("{}: {e}", setup.display())))?;
    let setup: SaSetup =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", setup.display())))?;
    let (responses, report) = ingest::parse_sagat(sagat)?;
    ctx.report(&report);
    let result = human::sa_analysis(&setup, &responses)?;
    for w in &result.warnings {
        ctx.warn(w);
    }
    let mut elements = ReportTable::new(
        "Attention allocation",
        vec![
            Column::new("SE", 0),
            Column::new("Correct rate", 2),
            Column::new("f", 3),
            Column::new("P(SE)", 3),
            Column::new("Virtual", 0),
        ],
    );
    for e in &result.elements {
        elements.push(vec![
            e.se_id.as_str().into(),
            e.correct_rate.into(),
            e.f.into(),
            e.p_se.into(),
            if e.is_virtual { "*" } else { "" }.into(),
        ]);
    }
    let mut osa = ReportTable::new(
        "Operator situation awareness (μ, σ)",
        vec![Column::new("Mission", 0), Column::new("MDS", 2), Column::new("AAM", 2), Column::new("Participants", 0)],
    );
    for group in human::MissionGroup::ALL {
        let get = |m: WeightModel| result.osa.iter().find(|r| r.group == group && r.model == m).expect("all groups");
        let (mds, aam) = (get(WeightModel::Mds), get(WeightModel::Aam));
        osa.push(vec![
            group.label().into(),
            Cell::Pair(mds.mean, mds.std),
            Cell::Pair(aam.mean, aam.std),
            mds.participants.into(),
        ]);
    }
    Ok(vec![elements, osa])
}

fn trust_tables(survey: &Path, a: &str, b: &str, ctx: &mut Context<'_>) -> CmdResult<Vec<ReportTable>> {
    let (data, report) = ingest::parse_survey(survey)?;
    ctx.report(&report);
    let result = human::trust_pipeline(&data, a, b).map_err(|e| match e {
        Error::EmptyCondition(_) => CliError::Input(e.to_string()),
        other => other.into(),
    })?;
    for w in &result.warnings {
        ctx.warn(w);
    }
    let mut items = ReportTable::new(
        "Trust items",
        vec![
            Column::new("Instrument", 0),
            Column::new("Item", 0),
            Column::new(&format!("n {a}"), 0),
            Column::new(&format!("n {b}"), 0),
            Column::new(&format!("Mean {a}"), 2),
            Column::new(&format!("Mean {b}"), 2),
            Column::new("U", 1),
            Column::new("p (Mann-Whitney)", 3),
            Column::new("Method", 0),
            Column::new("p (Welch)", 3),
            Column::new("Outliers removed", 0),
        ],
    );
    for it in &result.items {
        items.push(vec![
            it.instrument.as_str().into(),
            it.item_id.as_str().into(),
            it.n_a.into(),
            it.n_b.into(),
            it.mean_a.into(),
            it.mean_b.into(),
            it.u.into(),
            it.p.into(),
            match it.method {
                stats::PMethod::Exact => "exact",
                stats::PMethod::Normal => "normal",
            }
            .into(),
            it.welch_p.into(),
            it.outliers_removed.into(),
        ]);
    }
    let mut removed = ReportTable::new("Removed participants", vec![Column::new("Participant", 0)]);
    for p in &result.removed_participants {
        removed.push(vec![p.as_str().into()]);
    }
    let mut prefs = ReportTable::new(
        "Preferences",
        vec![Column::new("Choice", 0), Column::new("Count", 0), Column::new("Reasons", 0)],
    );
    for p in &result.preferences {
        prefs.push(vec![p.choice.as_str().into(), p.count.into(), p.reasons.join("; ").into()]);
    }
    Ok(vec![items, removed, prefs])
}

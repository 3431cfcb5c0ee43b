//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::path::Path;
use std::process::ExitCode;

use decisive_cli::report::{fixed, split_csv_document};
use decisive_core::cfis::{predictive_score, FisConfig};
use decisive_core::collision::{self, CollisionKinematics, FlightMetrics, DELTA_V_WINDOW};
use decisive_core::human::{self, SeParams};
use decisive_core::ingest::{self, read_csv_table};
use decisive_core::mapping::{self, FiducialGroundTruth, FiducialObservation, MappedState};
use decisive_core::model::{PoseSample, Trajectory, Vec2, Vec3};
use decisive_core::nav::{self, ReferencePath};
use decisive_core::ncap::{self, WeightScheme};
use decisive_core::{stats, Error};
use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn close(what: &str, got: f64, want: f64, tol: f64) -> Check {
    if (got - want).abs() <= tol {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, want {want} ± {tol}"))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// ---------------------------------------------------------------- AC-1

fn ncap_reproduction() -> Check {
    let (table, _) = ingest::parse_feature_sheet(Path::new(&common::data("sample/features.json"))).map_err(e2s)?;
    let cp = ncap::component_potentials(&table, &WeightScheme::Uniform).map_err(e2s)?;
    let a = cp.iter().find(|(id, _)| id == "A").ok_or("no system A")?;
    close("N_CP(A)", a.1, 2.48, 0.01)?;

    let uniform = ncap::autonomy_distances(&[("A".into(), 3, 2.48), ("B".into(), 1, 2.69)]).map_err(e2s)?;
    let rel = |r: &ncap::NcapResult, id: &str| r.entries.iter().find(|e| e.id == id).map(|e| e.relative_distance);
    close("relative(B), uniform table", rel(&uniform, "B").ok_or("no B")?, 2.01, 0.01)?;
    let user = ncap::autonomy_distances(&[("A".into(), 3, 3.17), ("B".into(), 1, 4.66)]).map_err(e2s)?;
    close("relative(A), user-weight table", rel(&user, "A").ok_or("no A")?, 2.49, 0.01)
}

// ---------------------------------------------------------------- AC-2

fn predictive_scores() -> Check {
    let tests = ["corridors", "apertures", "takeoff", "landing", "endurance", "room_clearing"];
    let rows: [(&str, [Option<f64>; 6], f64); 7] = [
        ("A", [Some(0.90), Some(1.0), Some(0.71), Some(0.87), Some(0.76), Some(0.73)], 0.82),
        ("B", [Some(1.0), Some(1.0), Some(1.0), Some(1.0), Some(0.5), Some(0.76)], 0.85),
        ("C", [Some(0.84), Some(1.0), Some(1.0), Some(0.87), None, None], 0.92),
        ("D", [Some(0.83), Some(0.83), Some(1.0), Some(1.0), Some(0.5), Some(0.79)], 0.80),
        ("E", [None, None, Some(0.75), Some(0.97), Some(0.65), Some(0.75)], 0.77),
        ("F", [None, None, Some(0.99), Some(0.91), None, None], 0.95),
        ("G", [Some(0.80), Some(1.0), Some(0.82), Some(0.89), None, Some(0.85)], 0.87),
    ];
    for (id, scores, want) in rows {
        let map: IndexMap<String, Option<f64>> = tests.iter().map(|t| t.to_string()).zip(scores).collect();
        let got = predictive_score(&map, None).map_err(e2s)?;
        close(&format!("predictive({id})"), got, want, 0.01)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- AC-3

fn completion_confidence() -> Check {
    close("(10, 0, 0.85)", stats::completion_confidence(10, 0, 0.85).map_err(e2s)?, 0.803, 0.001)?;
    close("(5, 0, 0.70)", stats::completion_confidence(5, 0, 0.70).map_err(e2s)?, 0.832, 0.001)
}

// ---------------------------------------------------------------- AC-4

fn trajectory(samples: Vec<PoseSample>) -> Result<Trajectory, String> {
    Trajectory::new(samples).map_err(e2s)
}

fn collision_severity() -> Check {
    // constant 1.96 m/s² braking, positions only
    let decel = 1.96;
    let samples = (0..=40)
        .map(|k| {
            let t = k as f64 * 0.01;
            PoseSample::at(t, Vec3::new(2.0 * t - 0.5 * decel * t * t, 0.0, 1.0))
        })
        .collect();
    let m = collision::masi(&trajectory(samples)?, &CollisionKinematics::default()).map_err(e2s)?;
    close("MASI", m.masi, 0.2, 1e-6)?;

    // 0.5 m/s velocity step at the annotated collision, 20 Hz
    let t_c = 1.0;
    let samples = (0..=40)
        .map(|k| {
            let t = k as f64 / 20.0;
            // v(t_c) is the last pre-impact velocity; the step shows from the next sample
            let v = if t <= t_c { 1.0 } else { 0.5 };
            let x = if t <= t_c { t } else { t_c + 0.5 * (t - t_c) };
            PoseSample { vel: Some(Vec3::new(v, 0.0, 0.0)), ..PoseSample::at(t, Vec3::new(x, 0.0, 1.0)) }
        })
        .collect();
    let dv = collision::max_delta_v(&trajectory(samples)?, t_c, DELTA_V_WINDOW).map_err(e2s)?;
    close("max delta-V", dv, 0.5, 1e-6)?;

    let dist = [0.0, 0.0, 0.32, 0.24, 0.26];
    let ttc = [0.0, 0.0, 0.5, 0.2, 0.8];
    let masi = [0.17, 0.2, 0.14, 0.15, 0.16];
    let delta_v = [0.7, 0.8, 1.2, 0.8, 1.1];
    let flights: Vec<FlightMetrics> = (0..5)
        .map(|i| FlightMetrics {
            collided: i < 2,
            min_distance: Some(dist[i]),
            min_ttc: Some(ttc[i]),
            masi: Some(masi[i]),
            max_delta_v: Some(delta_v[i]),
            max_deceleration: None,
        })
        .collect();
    let s = collision::summarize_flights(&flights);
    ensure(s.collisions == 2, || format!("collisions {}", s.collisions))?;
    for (what, got, want) in [
        ("mean MASI", s.mean_masi, 0.164),
        ("mean delta-V", s.mean_max_delta_v, 0.92),
        ("mean min distance", s.mean_min_distance, 0.164),
        ("mean min TTC", s.mean_min_ttc, 0.3),
    ] {
        close(what, got.ok_or_else(|| format!("{what} missing"))?, want, 1e-12)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- AC-5

/// Closest approach found by walking every segment in 1 mm steps.
fn dense_oracle(p: Vec3, verts: &[Vec3], closed: bool) -> f64 {
    let mut segs: Vec<(Vec3, Vec3)> = verts.windows(2).map(|w| (w[0], w[1])).collect();
    if closed {
        segs.push((verts[verts.len() - 1], verts[0]));
    }
    let mut best = f64::INFINITY;
    for (a, b) in segs {
        let len = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2) + (b.z - a.z).powi(2)).sqrt();
        let steps = (len / 0.001).ceil().max(1.0) as usize;
        for k in 0..=steps {
            let u = k as f64 / steps as f64;
            let q = Vec3::new(a.x + (b.x - a.x) * u, a.y + (b.y - a.y) * u, a.z + (b.z - a.z) * u);
            let d = ((p.x - q.x).powi(2) + (p.y - q.y).powi(2) + (p.z - q.z).powi(2)).sqrt();
            best = best.min(d);
        }
    }
    best
}

fn navigation_geometry() -> Check {
    let square = vec![
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(4.0, 0.0, 1.0),
        Vec3::new(4.0, 4.0, 1.0),
        Vec3::new(0.0, 4.0, 1.0),
    ];
    let path = ReferencePath::new(square, true).map_err(e2s)?;
    let offset = 0.37;
    let samples = (0..=320)
        .map(|k| {
            let s = k as f64 * 0.05;
            let (x, y) = match (s / 4.0) as usize {
                0 => (s, 0.0),
                1 => (4.0, s - 4.0),
                2 => (12.0 - s, 4.0),
                _ => (0.0, 16.0 - s),
            };
            PoseSample::at(k as f64 * 0.1, Vec3::new(x, y, 1.0 + offset))
        })
        .collect();
    let ad = nav::average_deviation(&trajectory(samples)?, &path).map_err(e2s)?;
    close("constant-offset AD", ad, offset, 1e-9)?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let coord = |rng: &mut ChaCha8Rng| Vec3::new(rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0), rng.gen_range(0.0..3.0));
    for case in 0..1000 {
        let n = rng.gen_range(2..=5);
        let verts: Vec<Vec3> = (0..n).map(|_| coord(&mut rng)).collect();
        let closed = n > 2 && rng.gen_bool(0.3);
        let p = coord(&mut rng);
        let path = ReferencePath::new(verts.clone(), closed).map_err(e2s)?;
        let got = nav::point_path_deviation(p, &path);
        close(&format!("case {case}"), got, dense_oracle(p, &verts, closed), 1e-3)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- AC-6

/// Two-sided exact p from every split of the pooled values, counting U directly from pairs.
fn enumeration_oracle(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let u_of = |x: &[f64], y: &[f64]| -> f64 {
        x.iter()
            .flat_map(|xi| y.iter().map(move |yj| if xi > yj { 1.0 } else if xi == yj { 0.5 } else { 0.0 }))
            .sum()
    };
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let n = pooled.len();
    let observed = u_of(a, b);
    let (mut le, mut ge, mut total) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != a.len() {
            continue;
        }
        let pick = |inside: bool| -> Vec<f64> {
            (0..n).filter(|i| (mask & (1 << i) != 0) == inside).map(|i| pooled[i]).collect()
        };
        let (x, y) = (pick(true), pick(false));
        let u = u_of(&x, &y);
        total += 1;
        le += u64::from(u <= observed);
        ge += u64::from(u >= observed);
    }
    let p = (2.0 * le.min(ge) as f64 / total as f64).min(1.0);
    (p, observed, u_of(b, a))
}

fn mann_whitney_exact() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n1 in 1..=6usize {
        for n2 in 1..=6usize {
            for set in 0..200 {
                let likert = set % 2 == 0;
                let mut draw = |n: usize| -> Vec<f64> {
                    (0..n)
                        .map(|_| if likert { f64::from(rng.gen_range(1..=7u8)) } else { rng.gen_range(0.0..10.0) })
                        .collect()
                };
                let (a, b) = (draw(n1), draw(n2));
                let mw = stats::mann_whitney(&a, &b).map_err(e2s)?;
                let (p, u_a, u_b) = enumeration_oracle(&a, &b);
                let tag = format!("n=({n1},{n2}) set {set}");
                close(&format!("{tag} p"), mw.p_two_sided, p, 1e-12)?;
                close(&format!("{tag} U_a"), mw.u_a, u_a, 1e-9)?;
                close(&format!("{tag} U_a+U_b"), mw.u_a + mw.u_b, (n1 * n2) as f64, 1e-9)?;
                close(&format!("{tag} U_b"), mw.u_b, u_b, 1e-9)?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- AC-7

fn fis_properties() -> Check {
    let configs = [("takeoff_land", FisConfig::takeoff_land())];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, cfg) in &configs {
        // every variable of every system leaves no gap in its range
        for sys in cfg.systems() {
            for var in &sys.inputs {
                if let Some(x) = var.coverage_gap(10_001) {
                    return Err(format!("{name}/{}: {} uncovered at {x}", sys.id, var.name));
                }
            }
        }
        // each system alone, then the full cascade
        for sys in cfg.systems() {
            let mut fired = 0;
            for _ in 0..10_000 {
                let inputs: IndexMap<String, f64> =
                    sys.inputs.iter().map(|v| (v.name.clone(), rng.gen_range(v.range.0..=v.range.1))).collect();
                match sys.eval(&inputs) {
                    Ok(y) => {
                        ensure((0.0..=1.0).contains(&y), || format!("{name}/{} gave {y} at {inputs:?}", sys.id))?;
                        fired += 1;
                    }
                    Err(Error::NoRuleFired(_)) => {}
                    Err(e) => return Err(format!("{name}/{}: {e}", sys.id)),
                }
            }
            ensure(fired > 0, || format!("{name}/{}: no rule fired anywhere", sys.id))?;
        }
        let mut ranges: IndexMap<String, (f64, f64)> = IndexMap::new();
        for sys in cfg.systems() {
            for v in sys.inputs.iter().filter(|v| v.source.is_none()) {
                ranges.insert(v.name.clone(), v.range);
            }
        }
        for _ in 0..10_000 {
            let raw: IndexMap<String, f64> =
                ranges.iter().map(|(k, r)| (k.clone(), rng.gen_range(r.0..=r.1))).collect();
            match cfg.cascade_eval(&raw) {
                Ok(s) => {
                    for (what, y) in [("mc", s.mc), ("ec", s.ec), ("combined", s.combined)] {
                        ensure((0.0..=1.0).contains(&y), || format!("{name} cascade {what} = {y}"))?;
                    }
                }
                Err(Error::NoRuleFired(_)) => {}
                Err(e) => return Err(format!("{name} cascade: {e}")),
            }
        }
    }

    let cfg = FisConfig::takeoff_land();
    let mc = cfg.system("mc").ok_or("no mc system")?;
    let inputs = |c: f64, done: f64, r: f64| -> IndexMap<String, f64> {
        [("crashes", c), ("completion", done), ("rollovers", r)].into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    };
    let exact = |what: &str, got: f64, want: f64| ensure(got == want, || format!("{what}: got {got}, want {want}"));
    exact("MC(0, 1, 0)", mc.eval(&inputs(0.0, 1.0, 0.0)).map_err(e2s)?, 1.0)?;
    exact("MC(3, 0, 3)", mc.eval(&inputs(3.0, 0.0, 3.0)).map_err(e2s)?, 0.0)?;
    exact("combine(1, 1)", cfg.combine(1.0, 1.0).map_err(e2s)?, 1.0)?;
    exact("combine(0, 0)", cfg.combine(0.0, 0.0).map_err(e2s)?, 0.0)?;
    exact("combine(0.5, 0.5)", cfg.combine(0.5, 0.5).map_err(e2s)?, 0.5)
}

// ---------------------------------------------------------------- AC-8

fn seev_sa() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..2000 {
        let n = rng.gen_range(1..=12);
        let params: Vec<SeParams> = (0..n)
            .map(|i| SeParams {
                se_id: format!("se{i}"),
                saliency: rng.gen_range(0.1..5.0),
                effort: rng.gen_range(0.1..5.0),
                expectancy: rng.gen_range(0.1..5.0),
                value: rng.gen_range(0.1..5.0),
            })
            .collect();
        let alloc = human::attention_allocation(&params).map_err(e2s)?;
        let sum: f64 = alloc.iter().map(|a| a.fraction).sum();
        close(&format!("case {case} allocation sum"), sum, 1.0, 1e-12)?;
        ensure(alloc.iter().all(|a| a.fraction >= 0.0), || format!("case {case}: negative fraction"))?;

        let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        let p: Vec<f64> = (0..n).map(|_| [0.0, 0.5, 1.0][rng.gen_range(0..3)]).collect();
        let o = human::osa(&w, &p).map_err(e2s)?;
        ensure((0.0..=1.0).contains(&o), || format!("case {case}: OSA {o}"))?;
    }
    let column_a = [0.116, 0.125, 0.135, 0.143, 0.112, 0.114, 0.054, 0.051, 0.051, 0.099];
    let column_b = [0.128, 0.138, 0.142, 0.127, 0.106, 0.124, 0.054, 0.052, 0.053, 0.076];
    for (name, col) in [("A", column_a), ("B", column_b)] {
        let sum: f64 = col.iter().sum();
        ensure(fixed(sum, 3) == "1.000", || format!("column {name} sums to {sum}"))?;
    }
    Ok(())
}

// ---------------------------------------------------------------- AC-9

/// Pairwise distance error after the least-squares scale, computed from raw coordinates.
fn pairwise_oracle(map: &[(f64, f64)], truth: &[(f64, f64)]) -> f64 {
    let d = |p: (f64, f64), q: (f64, f64)| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
    let mut pairs = Vec::new();
    for i in 0..map.len() {
        for j in 0..map.len() {
            if i < j {
                pairs.push((d(map[i], map[j]), d(truth[i], truth[j])));
            }
        }
    }
    let scale = pairs.iter().map(|(m, g)| m * g).sum::<f64>() / pairs.iter().map(|(m, _)| m * m).sum::<f64>();
    100.0 * pairs.iter().map(|(m, g)| (scale * m - g).abs()).sum::<f64>() / pairs.len() as f64
}

fn fixture(map: &[(f64, f64)], truth: &[(f64, f64)]) -> (Vec<FiducialObservation>, Vec<FiducialGroundTruth>) {
    let obs = map
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| FiducialObservation {
            fiducial_id: format!("f{i}"),
            half: 1,
            map_xy: Some(Vec2::new(x, y)),
            mapped: MappedState::Complete,
        })
        .collect();
    let gt = truth
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| FiducialGroundTruth {
            fiducial_id: format!("f{i}"),
            gt_xy: Vec2::new(x, y),
            min_traversal_m: 1.0,
            min_turns: 1,
        })
        .collect();
    (obs, gt)
}

fn mapping_checks() -> Check {
    let labelled = [
        ("A", 11.0, 2, "M"),
        ("B", 8.0, 2, "L"),
        ("C", 35.0, 7, "H"),
        ("D", 5.0, 2, "L"),
        ("E", 12.0, 3, "M"),
        ("F", 7.0, 2, "L"),
        ("G", 27.0, 5, "H"),
        ("H", 7.0, 2, "L"),
        ("I", 16.0, 3, "M"),
        ("J", 10.0, 2, "L"),
    ];
    for (id, dist, turns, want) in labelled {
        let got = mapping::difficulty_rating(dist, turns).to_string();
        ensure(got == want, || format!("fiducial {id}: got {got}, want {want}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for case in 0..200 {
        let side = rng.gen_range(2.0..20.0);
        let truth = [(0.0, 0.0), (side, 0.0), (side, side), (0.0, side)];
        let k = rng.gen_range(0.1..50.0);
        let scaled: Vec<(f64, f64)> = truth.iter().map(|&(x, y)| (k * x, k * y)).collect();
        let (obs, gt) = fixture(&scaled, &truth);
        let ge = mapping::global_error(&obs, &gt).map_err(e2s)?;
        close(&format!("case {case} scaled-identical"), ge.error_cm, 0.0, 1e-6)?;

        let perturbed: Vec<(f64, f64)> = scaled
            .iter()
            .map(|&(x, y)| (x + rng.gen_range(-0.3..0.3) * k, y + rng.gen_range(-0.3..0.3) * k))
            .collect();
        let (obs, gt) = fixture(&perturbed, &truth);
        let ge = mapping::global_error(&obs, &gt).map_err(e2s)?;
        close(&format!("case {case} perturbed"), ge.error_cm, pairwise_oracle(&perturbed, &truth), 1e-6)?;
    }
    Ok(())
}

// ---------------------------------------------------------------- AC-10

fn end_to_end() -> Check {
    let mut commands_seen = std::collections::BTreeSet::new();
    for (name, args) in common::golden_cases() {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        commands_seen.insert(argv[0].to_string());
        let first = common::run(&argv);
        ensure(first.code == 0, || format!("{name} exited {}: {}", first.code, first.stderr))?;
        let again = common::run(&argv);
        ensure(first.stdout == again.stdout, || format!("{name} is not byte-stable"))?;
        common::check_golden(name, &first.stdout)?;

        if name.ends_with(".csv") {
            reingest(name, &first.stdout)?;
        }
    }
    for cmd in ["validate", "metrics", "ncap", "cfis", "trust", "sa", "plot"] {
        ensure(commands_seen.contains(cmd), || format!("{cmd} not exercised"))?;
    }
    Ok(())
}

/// Parse every emitted CSV block and re-render each numeric cell at its own precision.
fn reingest(name: &str, text: &str) -> Check {
    let blocks = split_csv_document(text);
    ensure(!blocks.is_empty(), || format!("{name}: no tables"))?;
    for (title, body) in blocks {
        let (headers, rows) = read_csv_table(&body, Path::new(name)).map_err(e2s)?;
        for row in rows {
            ensure(row.len() == headers.len(), || format!("{name}/{title}: ragged row"))?;
            for cell in row.iter().filter(|c| !c.is_empty()) {
                if let Ok(v) = cell.parse::<f64>() {
                    let decimals = cell.split_once('.').map_or(0, |(_, f)| f.len());
                    ensure(fixed(v, decimals) == *cell, || format!("{name}/{title}: {cell} does not round-trip"))?;
                }
            }
        }
    }
    if name == "ncap_uniform.csv" {
        let (table, _) = ingest::parse_feature_sheet(Path::new(&common::data("sample/features.json"))).map_err(e2s)?;
        let computed = ncap::rank_table(&table, &WeightScheme::Uniform).map_err(e2s)?;
        let (headers, rows) = read_csv_table(&split_csv_document(text)[0].1, Path::new(name)).map_err(e2s)?;
        let col = |h: &str| headers.iter().position(|x| x == h).ok_or(format!("no column {h}"));
        for row in rows {
            let id = &row[col("sUAS")?];
            let e = computed.entries.iter().find(|e| &e.id == id).ok_or("unknown system")?;
            let parsed: f64 = row[col("N_CP")?].parse().map_err(e2s)?;
            ensure(fixed(e.n_cp, 2) == fixed(parsed, 2), || format!("N_CP {} vs {}", e.n_cp, parsed))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("NCAP reproduction", ncap_reproduction),
        ("predictive mission scores", predictive_scores),
        ("completion confidence", completion_confidence),
        ("collision severity oracles", collision_severity),
        ("navigation geometry", navigation_geometry),
        ("Mann-Whitney exact p", mann_whitney_exact),
        ("FIS properties", fis_properties),
        ("SEEV and situation awareness", seev_sa),
        ("mapping", mapping_checks),
        ("end-to-end sample campaign", end_to_end),
    ];
    let mut failed = 0;
    for (i, (label, check)) in criteria.iter().enumerate() {
        let started = std::time::Instant::now();
        match check() {
            Ok(()) => println!("[PASS] AC-{} {label} ({:.2?})", i + 1, started.elapsed()),
            Err(why) => {
                failed += 1;
                println!("[FAIL] AC-{} {label}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

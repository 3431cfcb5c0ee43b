#![allow(dead_code)]

use std::path::PathBuf;

pub fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("decisive").chain(args.iter().copied());
    let code = decisive_cli::run(argv, &mut out, &mut err, false);
    Outcome {
        code,
        stdout: String::from_utf8(out).expect("utf-8 stdout"),
        stderr: String::from_utf8(err).expect("utf-8 stderr"),
    }
}

/// The argument lists behind each golden report, keyed by golden file name.
pub fn golden_cases() -> Vec<(&'static str, Vec<String>)> {
    let s = |rel: &str| data(&format!("sample/{rel}"));
    let campaign = s("campaign.json");
    let v = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    vec![
        ("validate.md", v(&["validate", &campaign])),
        ("metrics_nav.md", v(&["metrics", &campaign, "--test", "nav"])),
        ("metrics_collision.csv", v(&["metrics", &campaign, "--test", "collision", "--format", "csv"])),
        ("metrics_field.json", v(&["metrics", &campaign, "--test", "field", "--format", "json"])),
        (
            "metrics_mapping.md",
            v(&[
                "metrics",
                "--test",
                "mapping",
                "--truth",
                &s("fiducials_truth.csv"),
                "--observed",
                &s("fiducials_observed.csv"),
            ]),
        ),
        ("ncap_uniform.csv", v(&["ncap", "--features", &s("features.json"), "--weights", "uniform", "--format", "csv"])),
        ("ncap_user.md", v(&["ncap", "--features", &s("features.json"), "--weights", &s("user_weights.json")])),
        ("cfis_predictive.md", v(&["cfis", "--scores", &s("predictive_scores.csv")])),
        ("cfis_takeoff.csv", v(&["cfis", "--scores", &s("takeoff_scores.csv"), "--format", "csv"])),
        ("sa.md", v(&["sa", "--setup", &s("sa_setup.json"), "--sagat", &s("sagat.csv")])),
        ("trust.csv", v(&["trust", "--survey", &s("survey.csv"), "--a", "A", "--b", "B", "--format", "csv"])),
        (
            "report.md",
            v(&[
                "report",
                &campaign,
                "--truth",
                &s("fiducials_truth.csv"),
                "--observed",
                &s("fiducials_observed.csv"),
            ]),
        ),
        ("plot_ncap.svg", v(&["plot", "--kind", "ncap-scatter", "--features", &s("features.json")])),
        ("plot_deviation.svg", v(&["plot", "--kind", "deviation", &campaign, "--trial", "A-loop-2"])),
    ]
}

pub fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compare against the stored golden, rewriting it when UPDATE_GOLDEN is set.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!("{name} differs from its golden"))
    }
}

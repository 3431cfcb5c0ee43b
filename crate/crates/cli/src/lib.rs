//! Command-line front end: argument parsing, exit codes and output routing.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use decisive_core::ingest::ParseReport;
use decisive_core::{Error, IngestError};

mod commands;
pub mod plot;
pub mod report;

use plot::PlotKind;
use report::{Format, GlyphStyle};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_COMPUTE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "decisive", version, about = "Metrics for small unmanned aircraft test campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Debug, Clone, Args)]
struct GlobalArgs {
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format: md, csv or json.
    #[arg(long, global = true, default_value = "md")]
    format: Format,
    /// Seed for randomized diagnostics. Accepted for scripting; every current
    /// subcommand is deterministic.
    #[arg(long, global = true)]
    #[allow(dead_code)]
    seed: Option<u64>,
    /// Render link glyphs as ok/bad/none.
    #[arg(long, global = true)]
    ascii: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub(crate) enum MetricTest {
    Nav,
    Collision,
    Field,
    Mapping,
}

#[derive(Debug, Subcommand)]
pub(crate) enum Command {
    /// Check a campaign manifest and every telemetry file it references.
    Validate { manifest: PathBuf },
    /// Compute one family of metrics for a campaign.
    Metrics {
        manifest: Option<PathBuf>,
        #[arg(long, value_enum)]
        test: MetricTest,
        /// Fiducial ground truth CSV (mapping).
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Fiducial observations CSV (mapping).
        #[arg(long)]
        observed: Option<PathBuf>,
    },
    /// Rank systems from a feature sheet.
    Ncap {
        #[arg(long)]
        features: PathBuf,
        /// uniform, degree, or a weight scheme JSON file.
        #[arg(long, default_value = "uniform")]
        weights: String,
    },
    /// Contextual scores from a per-test score sheet.
    Cfis {
        #[arg(long)]
        scores: PathBuf,
        /// Rulebase JSON; defaults to the shipped takeoff and landing config.
        #[arg(long)]
        fis: Option<PathBuf>,
        /// JSON object of test weights; equal weights when absent.
        #[arg(long)]
        test_weights: Option<PathBuf>,
    },
    /// Attention allocation and operator situation awareness.
    Sa {
        #[arg(long)]
        setup: PathBuf,
        #[arg(long)]
        sagat: PathBuf,
    },
    /// Compare trust survey responses between two conditions.
    Trust {
        #[arg(long)]
        survey: PathBuf,
        #[arg(long = "a")]
        condition_a: String,
        #[arg(long = "b")]
        condition_b: String,
    },
    /// Every campaign metric in one document.
    Report {
        manifest: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        observed: Option<PathBuf>,
    },
    /// Emit an SVG chart.
    Plot {
        #[arg(long)]
        kind: PlotKind,
        /// Campaign manifest (deviation).
        manifest: Option<PathBuf>,
        /// Trial to plot (deviation).
        #[arg(long)]
        trial: Option<String>,
        /// Feature sheet (ncap-scatter).
        #[arg(long)]
        features: Option<PathBuf>,
        #[arg(long, default_value = "uniform")]
        weights: String,
    },
}

/// Failure classes that map onto exit codes.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Compute(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Compute(_) => EXIT_COMPUTE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Compute(m) => f.write_str(m),
        }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e.to_string())
    }
}

/// Output settings and the diagnostic stream shared by all subcommands.
pub(crate) struct Context<'a> {
    pub format: Format,
    pub glyphs: GlyphStyle,
    pub color: bool,
    pub err: &'a mut dyn Write,
}

impl Context<'_> {
    pub fn warn(&mut self, message: &str) {
        let tag = if self.color { "\x1b[33mwarning\x1b[0m" } else { "warning" };
        let _ = writeln!(self.err, "{tag}: {message}");
    }

    pub fn report(&mut self, report: &ParseReport) {
        for w in &report.warnings {
            self.warn(&format!("{}: {}", w.location, w.message));
        }
    }
}

/// Run with explicit arguments and streams; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_INPUT
                }
            };
        }
    };
    let mut ctx = Context {
        format: cli.global.format,
        glyphs: if cli.global.ascii { GlyphStyle::Ascii } else { GlyphStyle::Unicode },
        color,
        err,
    };
    let result = commands::dispatch(&cli.command, &mut ctx);
    match result {
        Ok(bytes) => match &cli.global.out {
            Some(path) => match std::fs::write(path, bytes) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(ctx.err, "error: {}: {e}", path.display());
                    EXIT_INPUT
                }
            },
            None => {
                let _ = out.write_all(bytes.as_bytes());
                EXIT_OK
            }
        },
        Err(e) => {
            let tag = if ctx.color { "\x1b[31merror\x1b[0m" } else { "error" };
            let _ = writeln!(ctx.err, "{tag}: {e}");
            e.code()
        }
    }
}

//! Command-line front end for `kinemap`. [`run`] parses an argument vector,
//! runs one analysis, writes its report to `--out` and returns the one-line
//! summary with the exit code.

mod commands;
pub mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

/// Exit codes: 0 success, 1 failing analysis report, 2 usage, parse or
/// missing-input error before any analysis ran.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub code: i32,
    pub summary: String,
    pub written: Vec<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "kinemap", version, about = "Kinematic maps, singularities, path lifting and manipulation plans")]
pub struct Cli {
    /// Report destination (CSV, JSON or SVG depending on the command).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Read angle inputs in degrees.
    #[arg(long, global = true)]
    pub degrees: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mechanism documents.
    #[command(subcommand)]
    Mech(MechCommand),
    /// Forward kinematics at one configuration.
    Fk(PointArgs),
    /// Jacobian at one configuration.
    Jac(PointArgs),
    /// Singular-set analysis.
    #[command(subcommand)]
    Singular(SingularCommand),
    /// Path lifting by Jacobian tracking.
    #[command(subcommand)]
    Track(TrackCommand),
    /// Manipulation plans.
    #[command(subcommand)]
    Plan(PlanCommand),
    /// Fixture maps.
    #[command(subcommand)]
    Fixture(FixtureCommand),
    /// SVG plots.
    #[command(subcommand)]
    Render(RenderCommand),
}

#[derive(Debug, Subcommand)]
pub enum MechCommand {
    Validate { file: PathBuf },
    Classify { file: PathBuf },
    Mobility {
        file: PathBuf,
        /// Use the planar formula.
        #[arg(long)]
        planar: bool,
        /// Redundant degrees of freedom to subtract.
        #[arg(long = "override", default_value_t = 0)]
        redundancy: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputKind {
    Pose,
    Position,
    Orientation,
    Planar,
}

/// A canonical map by name, or a serial mechanism document.
#[derive(Debug, Args)]
pub struct MapArgs {
    /// Mechanism document.
    pub file: Option<PathBuf>,
    /// Canonical map name.
    #[arg(long, conflicts_with = "file")]
    pub map: Option<String>,
    /// Canonical map parameters, comma separated.
    #[arg(long, requires = "map", allow_hyphen_values = true)]
    pub params: Option<String>,
    /// End-effector link of a mechanism (default: highest link).
    #[arg(long)]
    pub end: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutputKind::Pose)]
    pub output: OutputKind,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Configuration, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub config: String,
    /// Relative rank tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum SingularCommand {
    Scan {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 90)]
        grid: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Damped,
    Pseudoinverse,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[arg(long, value_enum, default_value_t = Method::Damped)]
    pub method: Method,
    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long)]
    pub gain: Option<f64>,
    /// RK4 steps per path segment.
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Circle,
    Lollipop,
}

#[derive(Debug, Args)]
pub struct LoopArgs {
    /// Loop centre in work coordinates, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub center: String,
    #[arg(long, value_enum, default_value_t = Shape::Circle)]
    pub shape: Shape,
    /// Section branch giving the start configuration.
    #[arg(long)]
    pub branch: Option<String>,
    /// Start configuration instead of a section branch.
    #[arg(long, allow_hyphen_values = true)]
    pub config: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum TrackCommand {
    /// Lift a work path given as CSV.
    Lift {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long)]
        path: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        config: String,
        #[command(flatten)]
        tracking: TrackArgs,
    },
    /// Drift of the lift of one closed loop.
    Drift {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        lp: LoopArgs,
        #[arg(long)]
        radius: f64,
        #[command(flatten)]
        tracking: TrackArgs,
    },
    /// Drift of shrinking loops.
    Probe {
        #[command(flatten)]
        map: MapArgs,
        #[command(flatten)]
        lp: LoopArgs,
        /// Radii, comma separated.
        #[arg(long, default_value = "0.4,0.2,0.1")]
        radii: String,
        #[command(flatten)]
        tracking: TrackArgs,
    },
}

/// A built-in plan by name, or a plan document.
#[derive(Debug, Args)]
pub struct PlanSource {
    pub file: Option<PathBuf>,
    #[arg(long, conflicts_with = "file")]
    pub builtin: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum PlanCommand {
    Validate {
        #[command(flatten)]
        plan: PlanSource,
        #[arg(long, default_value_t = 12)]
        grid: usize,
        /// Continuity modulus.
        #[arg(long, default_value_t = kinemap::planning::CONTINUITY_LIPSCHITZ)]
        lipschitz: f64,
    },
    Instability {
        #[command(flatten)]
        plan: PlanSource,
        #[arg(long, default_value_t = 12)]
        grid: usize,
        /// Neighbourhood radius (default: twice the grid spacing).
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Write a built-in plan document.
    Builtin { name: String },
}

#[derive(Debug, Subcommand)]
pub enum FixtureCommand {
    /// Section jump of the step map at each `y` (default: a 1e-3 grid on [0, 2]).
    HGap {
        #[arg(allow_hyphen_values = true)]
        y: Vec<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum RenderCommand {
    /// Image of a configuration grid under the forward map.
    Workspace {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 60)]
        grid: usize,
    },
    /// Singular cells of a two-dimensional configuration chart.
    SingularScan {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 90)]
        grid: usize,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Instability orders on a two-axis slice of the `C × W` grid.
    InstabilitySlice {
        #[command(flatten)]
        plan: PlanSource,
        #[arg(long, default_value_t = 24)]
        grid: usize,
        #[arg(long)]
        eps: Option<f64>,
        /// The two free grid axes.
        #[arg(long, default_value = "0,1")]
        free: String,
        /// Grid indices of the remaining axes, in axis order.
        #[arg(long)]
        at: Option<String>,
    },
}

/// Failures before analysis (exit 2) or a failing analysis report (exit 1).
#[derive(Debug)]
pub(crate) enum Failure {
    Usage(String),
    Analysis(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.to_string())
    }
}

/// Output of a command: summary line, optional report text, and whether
/// the analysis passed.
pub(crate) struct Done {
    pub summary: String,
    pub report: Option<String>,
    pub passed: bool,
}

impl Done {
    pub fn ok(summary: impl Into<String>, report: Option<String>) -> Self {
        Self { summary: summary.into(), report, passed: true }
    }
}

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return CommandOutcome { code, summary: e.to_string().trim_end().to_string(), written: vec![] };
        }
    };
    let result = commands::dispatch(&cli);
    match result {
        Ok(done) => {
            let mut written = Vec::new();
            if let (Some(path), Some(text)) = (&cli.out, &done.report) {
                if let Err(e) = std::fs::write(path, text) {
                    return CommandOutcome { code: 2, summary: format!("error: cannot write {}: {e}", path.display()), written };
                }
                written.push(path.clone());
            }
            CommandOutcome { code: if done.passed { 0 } else { 1 }, summary: done.summary, written }
        }
        Err(Failure::Usage(msg)) => CommandOutcome { code: 2, summary: format!("error: {msg}"), written: vec![] },
        Err(Failure::Analysis(msg)) => CommandOutcome { code: 1, summary: format!("failed: {msg}"), written: vec![] },
    }
}

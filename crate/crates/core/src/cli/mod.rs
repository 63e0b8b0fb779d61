//! The `mcrefine` command line: `refine`, `basin`, `study` and `render`.
//!
//! Exit codes are 0 on success, 1 for configuration errors (bad flags,
//! missing or malformed input files) and 2 for failures while running.
//! Every CSV written starts with a `#` line holding the resolved
//! configuration, and identical invocations write identical bytes.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

pub const THREADS_ENV: &str = "MCREFINE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mcrefine", version, about = "Render-and-compare camera pose refinement")]
pub struct Cli {
    /// Worker threads (default: MCREFINE_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Refine initial poses of query images against a scene.
    Refine(RefineArgs),
    /// Profile the score along one pose axis around a reference pose.
    Basin(BasinArgs),
    /// Convergence from perturbed ground-truth poses over a magnitude grid.
    Study(StudyArgs),
    /// Render one view of a scene to PNG.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SceneArgs {
    /// OBJ mesh.
    #[arg(long, conflicts_with = "synthetic")]
    pub scene: Option<PathBuf>,
    /// Texture image for the mesh's `vt` coordinates.
    #[arg(long, requires = "scene")]
    pub texture: Option<PathBuf>,
    /// Generate a procedural textured room from this seed instead of loading a mesh.
    #[arg(long)]
    pub synthetic: Option<u64>,
    /// Camera as `fx,fy,cx,cy,width,height` (default for synthetic rooms: 100,100,80,60,160,120).
    #[arg(long)]
    pub intrinsics: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    /// Schedule template: standalone, preprocess or postprocess.
    #[arg(long, default_value = "standalone")]
    pub preset: String,
    /// Flat `key=value` schedule file, applied over the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Schedule override `key=value`, applied last (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ScoringArgs {
    /// dense, exhaustive, patchwise[:W] or implicit[:W].
    #[arg(long, default_value = "dense")]
    pub scorer: String,
    /// `builtin` or a directory of precomputed `.fpyr` feature files.
    #[arg(long, default_value = "builtin")]
    pub features: String,
    /// Shading of rendered candidates: textured, color or raw.
    #[arg(long, default_value = "textured")]
    pub mode: String,
}

#[derive(Debug, Clone, Args)]
pub struct RefineArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Directory of query images named `<name>.png` or `<name>.ppm`.
    /// Without it, queries are rendered (textured) from `--gt`.
    #[arg(long)]
    pub queries: Option<PathBuf>,
    /// Initial poses, one `name qw qx qy qz cx cy cz` line per query.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Ground-truth poses; enables the error summary.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Derive initial poses from `--gt` by an exact offset `METERS,DEGREES`.
    #[arg(long, conflicts_with = "init", requires = "gt")]
    pub perturb: Option<String>,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct PoseArgs {
    /// Pose file; the first entry is used unless `--name` is given.
    #[arg(long)]
    pub pose: Option<PathBuf>,
    #[arg(long, requires = "pose")]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct BasinArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub pose: PoseArgs,
    /// `features` and `mode` as for refine.
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// yaw, pitch, tx, ty, tz or random:SEED.
    #[arg(long, default_value = "yaw")]
    pub axis: String,
    /// Half range, degrees or meters.
    #[arg(long, default_value_t = 30.0)]
    pub range: f64,
    /// Odd number of offsets.
    #[arg(long, default_value_t = 21)]
    pub samples: usize,
    /// Compare a textured query against every shading mode.
    #[arg(long)]
    pub domains: bool,
    /// Seed for the sampled camera when no `--pose` is given.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[command(flatten)]
    pub scoring: ScoringArgs,
    /// Ground-truth poses. Synthetic rooms may instead use `--num-poses`.
    #[arg(long)]
    pub poses: Option<PathBuf>,
    /// Number of cameras sampled in a synthetic room.
    #[arg(long, default_value_t = 4, conflicts_with = "poses")]
    pub num_poses: usize,
    /// Translation magnitudes, meters, comma-separated.
    #[arg(long, default_value = "0.25,0.5,1")]
    pub trans: String,
    /// Rotation magnitudes, degrees, comma-separated.
    #[arg(long, default_value = "5,10,20")]
    pub rot: String,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub scene: SceneArgs,
    #[command(flatten)]
    pub pose: PoseArgs,
    /// textured, color or raw.
    #[arg(long, default_value = "textured")]
    pub mode: String,
    /// Output height; the camera is scaled to keep its aspect.
    #[arg(long)]
    pub height: Option<u32>,
    /// Seed for the sampled camera when no `--pose` is given.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "render.png")]
    pub out: PathBuf,
    /// Also write the depth map as CSV.
    #[arg(long)]
    pub dump_depth: Option<PathBuf>,
}

/// Why a command stopped: configuration (exit 1) or execution (exit 2).
#[derive(Debug)]
pub enum Failure {
    Config(Error),
    Runtime(Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(e) => write!(f, "configuration error: {e}"),
            Failure::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, Failure> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::Config(Error::config(THREADS_ENV, format!("invalid thread count `{v}`")))),
        Err(_) => Ok(None),
    }
}

/// Runs an already parsed command line.
pub fn execute(cli: Cli) -> Result<(), Failure> {
    let threads = thread_count(cli.threads)?;
    if threads == Some(0) {
        return Err(Failure::Config(Error::config("threads", "must be at least 1")));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Failure::Runtime(Error::InvalidArgument(format!("thread pool: {e}"))))?;
    pool.install(|| match &cli.command {
        Command::Refine(a) => commands::cmd_refine(a),
        Command::Basin(a) => commands::cmd_basin(a),
        Command::Study(a) => commands::cmd_study(a),
        Command::Render(a) => commands::cmd_render(a),
    })
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code. Messages go to stderr.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("mcrefine: {f}");
            f.exit_code()
        }
    }
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    ExitCode::from(run(std::env::args_os()))
}

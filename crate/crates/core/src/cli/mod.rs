//! The `realant` command line: train, eval, ablate and export, plus the
//! three mesh processes (control, pose, rollout-server).
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime failure.

mod commands;
mod config;
mod spawn;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

pub use commands::{export_summary, run_training, Summary, TrainOutcome};
pub use config::{ConfigError, Mode, RunConfig};
pub use spawn::MeshChildren;

use crate::mesh::Clock;
use crate::rl::Algorithm;
use crate::sensors::RealismConfig;
use crate::tasks::TaskId;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "realant", version, about = "RealAnt quadruped RL stack on a built-in simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a policy and write curve, checkpoint and manifest.
    Train(TrainArgs),
    /// Evaluate a checkpoint with the deterministic policy.
    Eval(EvalArgs),
    /// One training run per grid point with shared seeds.
    Ablate(AblateArgs),
    /// Summarize a run (or ablation) directory as JSON.
    Export(ExportArgs),
    /// Robot-side process: simulator, servo telemetry and ground truth.
    Control(ControlArgs),
    /// Pose-estimation process: latency, jitter and noise on ground truth.
    Pose(PoseArgs),
    /// Rollout server: runs episodes for the train client.
    RolloutServer(ServerArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RealismArgs {
    /// Start from zero latency and zero noise before applying overrides.
    #[arg(long)]
    pub clean: bool,
    #[arg(long)]
    pub latency_steps: Option<usize>,
    #[arg(long)]
    pub sigma_xyz: Option<f64>,
    #[arg(long)]
    pub sigma_rpy: Option<f64>,
    #[arg(long)]
    pub lowpass_alpha: Option<f64>,
    #[arg(long)]
    pub diff_window: Option<usize>,
    #[arg(long)]
    pub stack_k: Option<usize>,
}

impl RealismArgs {
    fn is_set(&self) -> bool {
        self.clean
            || self.latency_steps.is_some()
            || self.sigma_xyz.is_some()
            || self.sigma_rpy.is_some()
            || self.lowpass_alpha.is_some()
            || self.diff_window.is_some()
            || self.stack_k.is_some()
    }

    pub fn resolve(&self) -> Result<RealismConfig, ConfigError> {
        let mut r = if self.clean {
            RealismConfig::clean()
        } else {
            RealismConfig::default()
        };
        if let Some(v) = self.latency_steps {
            r.latency_steps = v;
        }
        if let Some(v) = self.sigma_xyz {
            r.sigma_xyz = v;
        }
        if let Some(v) = self.sigma_rpy {
            r.sigma_rpy = v;
        }
        if let Some(v) = self.lowpass_alpha {
            r.lowpass_alpha = v;
        }
        if let Some(v) = self.diff_window {
            r.diff_window = v;
        }
        if let Some(v) = self.stack_k {
            r.stack_k = v;
        }
        r.validate().map_err(|e| ConfigError {
            key: e.key,
            reason: e.reason,
        })?;
        Ok(r)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// sleep, stand, turn or walk [default: sleep]
    #[arg(long)]
    pub task: Option<TaskId>,
    /// td3, sac or redq [default: td3]
    #[arg(long)]
    pub algo: Option<Algorithm>,
    /// [default: 100]
    #[arg(long)]
    pub episodes: Option<usize>,
    /// [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub realism: RealismArgs,
    /// Physics config file (`key = value` lines, must contain `model = realant`).
    #[arg(long)]
    pub physics: Option<PathBuf>,
    /// Ground friction coefficient override.
    #[arg(long)]
    pub friction: Option<f64>,
    /// Dense connections in all networks [default: on].
    #[arg(long)]
    pub dense: Option<bool>,
    /// Gradient updates per episode [default: 200, 2000 for redq].
    #[arg(long)]
    pub updates: Option<usize>,
    /// in-process, mesh or mesh-distributed [default: in-process]
    #[arg(long)]
    pub mode: Option<Mode>,
    /// Mesh clock: lockstep, realtime or realtime:<acceleration> [default: lockstep]
    #[arg(long)]
    pub clock: Option<Clock>,
    /// Rollout server address for mesh-distributed mode.
    #[arg(long, env = "REALANT_SERVER")]
    pub server: Option<String>,
}

impl RunArgs {
    fn is_set(&self) -> bool {
        self.task.is_some()
            || self.algo.is_some()
            || self.episodes.is_some()
            || self.seed.is_some()
            || self.realism.is_set()
            || self.physics.is_some()
            || self.friction.is_some()
            || self.dense.is_some()
            || self.updates.is_some()
            || self.mode.is_some()
            || self.clock.is_some()
    }

    pub fn to_config(&self) -> Result<RunConfig, ConfigError> {
        let mut c = RunConfig::new(
            self.task.unwrap_or(TaskId::Sleep),
            self.algo.unwrap_or(Algorithm::Td3),
            self.episodes.unwrap_or(100),
            self.seed.unwrap_or(1),
        );
        c.realism = self.realism.resolve()?;
        c.physics = self.physics.clone();
        c.friction = self.friction;
        c.dense = self.dense;
        c.updates = self.updates;
        c.mode = self.mode.unwrap_or(Mode::InProcess);
        c.clock = self.clock.unwrap_or(Clock::Lockstep);
        c.server = self.server.clone();
        Ok(c)
    }
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Output directory; must not exist yet.
    #[arg(long)]
    pub out: PathBuf,
    /// Re-run the configuration recorded in a `run.manifest`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Suppress per-episode progress lines.
    #[arg(long)]
    pub quiet: bool,
    /// Executable used for mesh child processes [default: this executable].
    #[arg(long, env = "REALANT_BIN", hide = true)]
    pub bin: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value = "walk")]
    pub task: TaskId,
    #[arg(long, default_value_t = 5)]
    pub episodes: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub realism: RealismArgs,
    #[arg(long)]
    pub physics: Option<PathBuf>,
    /// One or more friction coefficients (comma separated); one table row each.
    #[arg(long, value_delimiter = ',')]
    pub friction: Vec<f64>,
    /// Whether the checkpoint's networks use dense connections.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub dense: bool,
    /// Also write the table as `eval.csv` into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AblationKind {
    Latency,
    Noise,
    Dense,
    Updates,
}

impl AblationKind {
    pub fn default_grid(self) -> &'static str {
        match self {
            AblationKind::Latency => "0,2,6,10",
            AblationKind::Noise => "0,0.005,0.01,0.02,0.05",
            AblationKind::Dense => "true,false",
            AblationKind::Updates => "200,2000",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AblationKind::Latency => "latency",
            AblationKind::Noise => "noise",
            AblationKind::Dense => "dense",
            AblationKind::Updates => "updates",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct AblateArgs {
    #[arg(long, value_enum)]
    pub kind: AblationKind,
    /// Comma-separated grid [default depends on --kind].
    #[arg(long)]
    pub grid: Option<String>,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub quiet: bool,
    #[arg(long, env = "REALANT_BIN", hide = true)]
    pub bin: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExportArgs {
    pub run_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ControlArgs {
    /// Bind address for SERVO_TELEMETRY.
    #[arg(long, env = "REALANT_TELEMETRY", default_value = "127.0.0.1:5701")]
    pub telemetry: String,
    /// Bind address for ground-truth poses.
    #[arg(long, env = "REALANT_TRUTH", default_value = "127.0.0.1:5702")]
    pub truth: String,
    /// Rollout server's ACTION publisher.
    #[arg(long, env = "REALANT_ACTIONS", default_value = "127.0.0.1:5703")]
    pub actions: String,
    #[arg(long, default_value = "lockstep")]
    pub clock: Clock,
    #[arg(long)]
    pub physics: Option<PathBuf>,
    #[arg(long)]
    pub friction: Option<f64>,
    /// Actions older than this (logical ms) are flagged stale.
    #[arg(long, default_value_t = 250)]
    pub stale_ms: u64,
}

#[derive(Debug, Clone, Args)]
pub struct PoseArgs {
    /// Control process's ground-truth publisher.
    #[arg(long, env = "REALANT_TRUTH", default_value = "127.0.0.1:5702")]
    pub truth: String,
    /// Bind address for POSE_ESTIMATE.
    #[arg(long, env = "REALANT_POSES", default_value = "127.0.0.1:5704")]
    pub poses: String,
    #[arg(long, default_value = "lockstep")]
    pub clock: Clock,
}

#[derive(Debug, Clone, Args)]
pub struct ServerArgs {
    /// Bind address for train-client requests.
    #[arg(long, env = "REALANT_SERVER", default_value = "127.0.0.1:5700")]
    pub rollout: String,
    /// Bind address for ACTION.
    #[arg(long, env = "REALANT_ACTIONS", default_value = "127.0.0.1:5703")]
    pub actions: String,
    #[arg(long, env = "REALANT_TELEMETRY", default_value = "127.0.0.1:5701")]
    pub telemetry: String,
    #[arg(long, env = "REALANT_POSES", default_value = "127.0.0.1:5704")]
    pub poses: String,
    #[arg(long, default_value = "lockstep")]
    pub clock: Clock,
    #[arg(long)]
    pub physics: Option<PathBuf>,
    #[arg(long)]
    pub friction: Option<f64>,
    /// Cached telemetry or pose older than this (logical ms) aborts the episode.
    #[arg(long, default_value_t = 250)]
    pub staleness_ms: u64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_FAILURE,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}\n\n{}", Cli::command().render_usage()),
                CliError::Runtime(m) => eprintln!("error: {m}"),
            }
            e.code()
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Train(a) => commands::cmd_train(&a),
        Command::Eval(a) => commands::cmd_eval(&a),
        Command::Ablate(a) => commands::cmd_ablate(&a),
        Command::Export(a) => commands::cmd_export(&a),
        Command::Control(a) => commands::cmd_control(&a),
        Command::Pose(a) => commands::cmd_pose(&a),
        Command::RolloutServer(a) => commands::cmd_server(&a),
    }
}

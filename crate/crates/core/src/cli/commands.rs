use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{Mode, RunConfig};
use super::spawn::MeshChildren;
use super::{runtime, AblateArgs, AblationKind, CliError, ControlArgs, EvalArgs, ExportArgs, PoseArgs, ServerArgs, TrainArgs};
use crate::mesh::{
    run_control, run_pose, train_client, ClientConfig, ControlConfig, Publisher, Replier, RolloutServer, ServerConfig,
    Subscriber,
};
use crate::physics::{load_model, BodyModel, NUM_JOINTS};
use crate::rl::agent::actor_architecture;
use crate::rl::checkpoint::{self, write_atomic};
use crate::rl::{evaluate, read_curve, read_timing, write_curve, write_timing, AlgoConfig, CurveRow, Trainer};
use crate::tasks::OBS_DIM;

pub const MANIFEST: &str = "run.manifest";
pub const ABLATION_MANIFEST: &str = "ablation.manifest";
pub const CURVE: &str = "curve.csv";
pub const TIMING: &str = "timing.csv";
pub const CHECKPOINT: &str = "checkpoint.rant";
pub const PHYSICS: &str = "physics.cfg";
pub const SUMMARY: &str = "summary.json";
pub const SUMMARY_LINES: &str = "summary.jsonl";

const CHECKPOINT_EVERY: usize = 10;

/// Create `dir` (and missing parents); fails if `dir` already exists.
fn create_fresh_dir(dir: &Path) -> Result<(), CliError> {
    if let Some(parent) = dir.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(runtime)?;
    }
    fs::create_dir(dir).map_err(|e| match e.kind() {
        io::ErrorKind::AlreadyExists => CliError::Usage(format!("output directory {} already exists", dir.display())),
        _ => runtime(e),
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> io::Result<()> {
    write_atomic(path, bytes)
}

fn persist(dir: &Path, t: &Trainer, checkpoint_now: bool) -> io::Result<()> {
    let mut buf = Vec::new();
    write_curve(&mut buf, &t.curve)?;
    write_file(&dir.join(CURVE), &buf)?;
    buf.clear();
    write_timing(&mut buf, &t.curve)?;
    write_file(&dir.join(TIMING), &buf)?;
    if checkpoint_now {
        checkpoint::save(&t.policy(), &dir.join(CHECKPOINT)).map_err(io::Error::other)?;
    }
    Ok(())
}

pub struct TrainOutcome {
    pub dir: PathBuf,
    pub curve: Vec<CurveRow>,
    pub diverged_episodes: usize,
}

/// Run one training configuration into a new directory `out`: manifest and
/// resolved physics first, then curve, timing and checkpoint as episodes
/// complete. A failed run keeps everything written so far.
pub fn run_training(
    cfg: &RunConfig,
    out: &Path,
    bin: Option<&Path>,
    mut progress: impl FnMut(&CurveRow),
) -> Result<TrainOutcome, CliError> {
    cfg.validate()?;
    let tc = cfg.train_config()?;
    let mut trainer = Trainer::new(tc).map_err(|e| CliError::Usage(e.to_string()))?;
    create_fresh_dir(out)?;
    write_file(&out.join(PHYSICS), trainer.cfg.model.summary().as_bytes()).map_err(runtime)?;
    write_file(&out.join(MANIFEST), cfg.manifest(PHYSICS)?.as_bytes()).map_err(runtime)?;

    let mut io_error: Option<io::Error> = None;
    let mut on_episode = |t: &Trainer, row: &CurveRow| {
        let every = (row.episode + 1) % CHECKPOINT_EVERY == 0;
        if let Err(e) = persist(out, t, every) {
            io_error.get_or_insert(e);
        }
        progress(row);
    };
    let result = match cfg.mode {
        Mode::InProcess => {
            trainer.run_in_process(&mut on_episode);
            Ok(())
        }
        Mode::Mesh => {
            let bin = match bin {
                Some(b) => b.to_path_buf(),
                None => std::env::current_exe().map_err(runtime)?,
            };
            let physics = fs::canonicalize(out.join(PHYSICS)).map_err(runtime)?;
            let children = MeshChildren::spawn(&bin, &physics, cfg.clock).map_err(runtime)?;
            let r = train_client(&mut trainer, &ClientConfig::new(&children.server), &mut on_episode);
            drop(children);
            r
        }
        Mode::MeshDistributed => {
            let server = cfg.server.as_deref().unwrap_or_default();
            train_client(&mut trainer, &ClientConfig::new(server), &mut on_episode)
        }
    };
    persist(out, &trainer, true).map_err(runtime)?;
    if let Some(e) = io_error {
        return Err(runtime(e));
    }
    result.map_err(|e| CliError::Runtime(format!("{e} (partial results kept in {})", out.display())))?;
    Ok(TrainOutcome {
        dir: out.to_path_buf(),
        diverged_episodes: trainer.diverged_episodes,
        curve: trainer.curve,
    })
}

fn progress_line(quiet: bool) -> impl FnMut(&CurveRow) {
    move |r: &CurveRow| {
        if !quiet {
            println!(
                "episode {:>4}  return {:>10.4}  updates {:>4}  {:>8.1}s",
                r.episode, r.episode_return, r.updates, r.wallclock_s
            );
        }
    }
}

pub(super) fn cmd_train(a: &TrainArgs) -> Result<(), CliError> {
    let cfg = match &a.manifest {
        Some(path) => {
            if a.run.is_set() {
                return Err(CliError::Usage("--manifest cannot be combined with run flags".into()));
            }
            let text = fs::read_to_string(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            RunConfig::from_manifest(&text, path.parent().unwrap_or(Path::new(".")))?
        }
        None => a.run.to_config()?,
    };
    let outcome = run_training(&cfg, &a.out, a.bin.as_deref(), progress_line(a.quiet))?;
    let n = outcome.curve.len();
    if outcome.diverged_episodes * 2 > n {
        return Err(CliError::Runtime(format!(
            "{} of {n} episodes diverged; results in {}",
            outcome.diverged_episodes,
            outcome.dir.display()
        )));
    }
    if !a.quiet {
        println!("wrote {}", outcome.dir.display());
    }
    Ok(())
}

fn base_model(physics: Option<&Path>) -> Result<BodyModel, CliError> {
    match physics {
        Some(p) => load_model(p).map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(BodyModel::default()),
    }
}

fn with_friction(mut model: BodyModel, friction: Option<f64>) -> Result<BodyModel, CliError> {
    if let Some(mu) = friction {
        model.contact.friction_coeff = mu;
        model.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(model)
}

pub const EVAL_HEADER: &str = "friction,mean_return,std_return,mean_speed_cm_s,diverged_episodes";

pub(super) fn cmd_eval(a: &EvalArgs) -> Result<(), CliError> {
    if a.episodes == 0 {
        return Err(CliError::Usage("--episodes must be >= 1".into()));
    }
    let realism = a.realism.resolve()?;
    let base = base_model(a.physics.as_deref())?;
    let policy = checkpoint::load(&a.checkpoint).map_err(|e| runtime(format!("{}: {e}", a.checkpoint.display())))?;
    let algo = AlgoConfig {
        dense: a.dense,
        ..AlgoConfig::for_algorithm(policy.algorithm)
    };
    let arch = actor_architecture(&algo, realism.stack_k * OBS_DIM, NUM_JOINTS);
    checkpoint::check_compatible(&policy, policy.algorithm, &arch).map_err(runtime)?;
    let frictions = if a.friction.is_empty() {
        vec![base.contact.friction_coeff]
    } else {
        a.friction.clone()
    };
    let mut table = format!("{EVAL_HEADER}\n");
    for mu in frictions {
        let model = with_friction(base.clone(), Some(mu))?;
        let r = evaluate(&policy, a.task, &model, realism, a.episodes, a.seed);
        let _ = writeln!(
            table,
            "{mu},{:.6},{:.6},{:.3},{}",
            r.mean_return, r.std_return, r.mean_speed_cm_s, r.diverged_episodes
        );
    }
    print!("{table}");
    if let Some(out) = &a.out {
        fs::create_dir_all(out).map_err(runtime)?;
        write_file(&out.join("eval.csv"), table.as_bytes()).map_err(runtime)?;
    }
    Ok(())
}

fn arm_config(kind: AblationKind, value: &str, base: &RunConfig) -> Result<RunConfig, CliError> {
    let bad = || CliError::Usage(format!("bad {} grid value {value:?}", kind.name()));
    let mut c = base.clone();
    match kind {
        AblationKind::Latency => c.realism.latency_steps = value.parse().map_err(|_| bad())?,
        AblationKind::Noise => {
            let s: f64 = value.parse().map_err(|_| bad())?;
            c.realism.sigma_xyz = s;
            c.realism.sigma_rpy = s;
        }
        AblationKind::Dense => c.dense = Some(value.parse().map_err(|_| bad())?),
        AblationKind::Updates => c.updates = Some(value.parse().map_err(|_| bad())?),
    }
    c.validate()?;
    Ok(c)
}

fn final_mean(curve: &[CurveRow], n: usize) -> f64 {
    let tail = &curve[curve.len().saturating_sub(n)..];
    if tail.is_empty() {
        return f64::NAN;
    }
    tail.iter().map(|r| r.episode_return).sum::<f64>() / tail.len() as f64
}

pub(super) fn cmd_ablate(a: &AblateArgs) -> Result<(), CliError> {
    let base = a.run.to_config()?;
    base.validate()?;
    let grid = a.grid.clone().unwrap_or_else(|| a.kind.default_grid().to_string());
    let values: Vec<&str> = grid.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(CliError::Usage("--grid is empty".into()));
    }
    let arms = values
        .iter()
        .map(|v| arm_config(a.kind, v, &base))
        .collect::<Result<Vec<_>, _>>()?;
    create_fresh_dir(&a.out)?;
    let mut manifest = format!("kind = {}\ngrid = {}\n", a.kind.name(), values.join(","));
    manifest.push_str(&base.manifest(PHYSICS)?);
    write_file(&a.out.join(PHYSICS), base.model()?.summary().as_bytes()).map_err(runtime)?;
    write_file(&a.out.join(ABLATION_MANIFEST), manifest.as_bytes()).map_err(runtime)?;

    let mut merged = String::from("arm,value,episode,steps,return,updates\n");
    let mut status = String::from("arm,value,status,final10_mean_return,message\n");
    let mut failures = 0;
    for (i, (value, cfg)) in values.iter().zip(&arms).enumerate() {
        let dir = a.out.join(format!("arm{i:02}-{}-{value}", a.kind.name()));
        if !a.quiet {
            println!("arm {i}: {} = {value}", a.kind.name());
        }
        match run_training(cfg, &dir, a.bin.as_deref(), progress_line(a.quiet)) {
            Ok(o) => {
                for r in &o.curve {
                    let _ = writeln!(merged, "{i},{value},{},{},{:?},{}", r.episode, r.steps, r.episode_return, r.updates);
                }
                let _ = writeln!(status, "{i},{value},ok,{:?},", final_mean(&o.curve, 10));
            }
            Err(e) => {
                failures += 1;
                let msg = match e {
                    CliError::Usage(m) | CliError::Runtime(m) => m.replace([',', '\n'], " "),
                };
                let _ = writeln!(status, "{i},{value},failed,,{msg}");
            }
        }
        write_file(&a.out.join("merged.csv"), merged.as_bytes()).map_err(runtime)?;
        write_file(&a.out.join("arms.csv"), status.as_bytes()).map_err(runtime)?;
    }
    if failures > 0 {
        return Err(CliError::Runtime(format!("{failures} of {} arms failed; see arms.csv", arms.len())));
    }
    Ok(())
}

/// Machine-readable digest of one run directory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub run: String,
    pub task: String,
    pub algo: String,
    pub seed: u64,
    pub episodes_planned: usize,
    pub episodes_completed: usize,
    pub final10_mean_return: f64,
    pub mean_return: f64,
    pub best_return: f64,
    pub best_episode: usize,
    pub total_updates: usize,
    pub wallclock_s: f64,
}

fn summarize(dir: &Path) -> Result<Summary, CliError> {
    let manifest = dir.join(MANIFEST);
    let text = fs::read_to_string(&manifest).map_err(|_| runtime(format!("missing {}", manifest.display())))?;
    let cfg = RunConfig::from_manifest(&text, dir).map_err(|e| runtime(format!("{}: {e}", manifest.display())))?;
    let curve_path = dir.join(CURVE);
    let file = fs::File::open(&curve_path).map_err(|_| runtime(format!("missing {}", curve_path.display())))?;
    let curve = read_curve(io::BufReader::new(file)).map_err(runtime)?;
    if curve.is_empty() {
        return Err(runtime(format!("{} has no episodes", curve_path.display())));
    }
    let wallclock_s = fs::File::open(dir.join(TIMING))
        .ok()
        .and_then(|f| read_timing(io::BufReader::new(f)).ok())
        .and_then(|t| t.last().map(|r| r.1))
        .unwrap_or(f64::NAN);
    let best = curve
        .iter()
        .max_by(|a, b| a.episode_return.total_cmp(&b.episode_return))
        .expect("non-empty");
    Ok(Summary {
        run: dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        task: cfg.task.to_string(),
        algo: cfg.algorithm.to_string(),
        seed: cfg.seed,
        episodes_planned: cfg.episodes,
        episodes_completed: curve.len(),
        final10_mean_return: final_mean(&curve, 10),
        mean_return: final_mean(&curve, curve.len()),
        best_return: best.episode_return,
        best_episode: best.episode,
        total_updates: curve.iter().map(|r| r.updates).sum(),
        wallclock_s,
    })
}

/// Write `summary.json` for a run directory, or `summary.jsonl` (one line
/// per arm, in grid order) for an ablation directory. Returns the text.
pub fn export_summary(dir: &Path) -> Result<String, CliError> {
    if dir.join(ABLATION_MANIFEST).is_file() {
        let mut arms: Vec<PathBuf> = fs::read_dir(dir)
            .map_err(runtime)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join(MANIFEST).is_file())
            .collect();
        arms.sort();
        let mut text = String::new();
        for arm in arms {
            let s = summarize(&arm)?;
            text.push_str(&serde_json::to_string(&s).map_err(runtime)?);
            text.push('\n');
        }
        write_file(&dir.join(SUMMARY_LINES), text.as_bytes()).map_err(runtime)?;
        return Ok(text);
    }
    let s = summarize(dir)?;
    let mut text = serde_json::to_string_pretty(&s).map_err(runtime)?;
    text.push('\n');
    write_file(&dir.join(SUMMARY), text.as_bytes()).map_err(runtime)?;
    Ok(text)
}

pub(super) fn cmd_export(a: &ExportArgs) -> Result<(), CliError> {
    let text = export_summary(&a.run_dir)?;
    print!("{text}");
    Ok(())
}

fn announce(line: &str) {
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

pub(super) fn cmd_control(a: &ControlArgs) -> Result<(), CliError> {
    let model = with_friction(base_model(a.physics.as_deref())?, a.friction)?;
    let telemetry = Publisher::bind(&a.telemetry).map_err(runtime)?;
    let truth = Publisher::bind(&a.truth).map_err(runtime)?;
    let actions = Subscriber::connect(&a.actions);
    announce(&format!("ready control telemetry={} truth={}", telemetry.local_addr(), truth.local_addr()));
    let cfg = ControlConfig {
        stale_after_us: a.stale_ms * 1000,
        ..ControlConfig::new(model, a.clock)
    };
    run_control(cfg, &telemetry, &truth, &actions);
    Ok(())
}

pub(super) fn cmd_pose(a: &PoseArgs) -> Result<(), CliError> {
    let poses = Publisher::bind(&a.poses).map_err(runtime)?;
    let truth = Subscriber::connect(&a.truth);
    announce(&format!("ready pose poses={}", poses.local_addr()));
    run_pose(a.clock, &truth, &poses);
    Ok(())
}

pub(super) fn cmd_server(a: &ServerArgs) -> Result<(), CliError> {
    let model = with_friction(base_model(a.physics.as_deref())?, a.friction)?;
    let replier = Replier::bind(&a.rollout).map_err(runtime)?;
    let actions = Publisher::bind(&a.actions).map_err(runtime)?;
    let telemetry = Subscriber::connect(&a.telemetry);
    let poses = Subscriber::connect(&a.poses);
    announce(&format!(
        "ready rollout-server rollout={} actions={}",
        replier.local_addr().map_err(runtime)?,
        actions.local_addr()
    ));
    let cfg = ServerConfig {
        staleness_us: a.staleness_ms * 1000,
        ..ServerConfig::new(model, a.clock)
    };
    RolloutServer::new(cfg, actions, telemetry, poses).serve(&replier).map_err(runtime)
}

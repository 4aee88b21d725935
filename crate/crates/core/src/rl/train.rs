use std::io::{self, BufRead, Write};
use std::time::Instant;

use super::rollout::{run_episode, EpisodeData, RolloutRequest};
use super::{ActionMode, Agent, AlgoConfig, AlgoConfigError, Policy, ReplayBuffer, Transition};
use crate::physics::{BodyModel, CONTROL_DT, NUM_JOINTS};
use crate::rng::{derive, rng_for, stream, Rng};
use crate::sensors::RealismConfig;
use crate::tasks::{LocalIo, TaskId, EPISODE_STEPS, OBS_DIM};

/// A complete training-run description.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub task: TaskId,
    pub algo: AlgoConfig,
    pub episodes: usize,
    pub seed: u64,
    pub realism: RealismConfig,
    pub model: BodyModel,
    pub episode_len: usize,
}

impl TrainConfig {
    pub fn new(task: TaskId, algo: AlgoConfig, episodes: usize, seed: u64) -> Self {
        Self {
            task,
            algo,
            episodes,
            seed,
            realism: RealismConfig::default(),
            model: BodyModel::default(),
            episode_len: EPISODE_STEPS,
        }
    }

    pub fn state_dim(&self) -> usize {
        OBS_DIM * self.realism.stack_k
    }
}

/// One learning-curve row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub episode: usize,
    pub steps: usize,
    pub episode_return: f64,
    /// Gradient updates run after this episode.
    pub updates: usize,
    pub wallclock_s: f64,
}

impl CurveRow {
    /// Everything except wall-clock time, for determinism comparisons.
    pub fn key(&self) -> (usize, usize, u64, usize) {
        (self.episode, self.steps, self.episode_return.to_bits(), self.updates)
    }
}

pub const CURVE_HEADER: &str = "episode,steps,return,updates";
pub const TIMING_HEADER: &str = "episode,wallclock_s";

/// Deterministic learning curve: repeated runs produce identical bytes.
pub fn write_curve<W: Write>(mut w: W, rows: &[CurveRow]) -> io::Result<()> {
    writeln!(w, "{CURVE_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{:?},{}", r.episode, r.steps, r.episode_return, r.updates)?;
    }
    Ok(())
}

/// Wall-clock seconds since the start of training, per episode.
pub fn write_timing<W: Write>(mut w: W, rows: &[CurveRow]) -> io::Result<()> {
    writeln!(w, "{TIMING_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{:.3}", r.episode, r.wallclock_s)?;
    }
    Ok(())
}

fn read_table<R: BufRead>(r: R, header: &str) -> io::Result<Vec<Vec<f64>>> {
    let bad = |msg: String| io::Error::new(io::ErrorKind::InvalidData, msg);
    let mut lines = r.lines();
    if lines.next().transpose()?.unwrap_or_default().trim() != header {
        return Err(bad(format!("missing header {header:?}")));
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| bad(format!("row {}: {e}", i + 1))))
            .collect::<io::Result<Vec<_>>>()?;
        if row.len() != width {
            return Err(bad(format!("row {}: expected {width} fields", i + 1)));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Read a curve; wall-clock times are zero.
pub fn read_curve<R: BufRead>(r: R) -> io::Result<Vec<CurveRow>> {
    Ok(read_table(r, CURVE_HEADER)?
        .into_iter()
        .map(|f| CurveRow {
            episode: f[0] as usize,
            steps: f[1] as usize,
            episode_return: f[2],
            updates: f[3] as usize,
            wallclock_s: 0.0,
        })
        .collect())
}

/// `(episode, wallclock_s)` pairs.
pub fn read_timing<R: BufRead>(r: R) -> io::Result<Vec<(usize, f64)>> {
    Ok(read_table(r, TIMING_HEADER)?.into_iter().map(|f| (f[0] as usize, f[1])).collect())
}

/// Learner state across episodes. Collection is external: ask for a
/// [`RolloutRequest`] and the current [`Policy`], collect the episode
/// anywhere, then hand the data back to [`Trainer::ingest`].
pub struct Trainer {
    pub cfg: TrainConfig,
    pub agent: Agent<f32>,
    pub replay: ReplayBuffer,
    learner_rng: Rng,
    pub curve: Vec<CurveRow>,
    pub diverged_episodes: usize,
    started: Instant,
}

impl Trainer {
    pub fn new(cfg: TrainConfig) -> Result<Self, AlgoConfigError> {
        cfg.algo.validate()?;
        if cfg.episodes == 0 {
            return Err(AlgoConfigError {
                key: "episodes".into(),
                reason: "must be >= 1".into(),
            });
        }
        let agent = Agent::new(cfg.algo.clone(), cfg.state_dim(), NUM_JOINTS, cfg.seed);
        Ok(Self {
            replay: ReplayBuffer::new(cfg.algo.replay_capacity),
            learner_rng: rng_for(cfg.seed, stream::LEARNER, 0),
            curve: Vec::new(),
            diverged_episodes: 0,
            started: Instant::now(),
            agent,
            cfg,
        })
    }

    pub fn next_episode(&self) -> usize {
        self.curve.len()
    }

    pub fn finished(&self) -> bool {
        self.next_episode() >= self.cfg.episodes
    }

    pub fn policy(&self) -> Policy {
        Policy {
            algorithm: self.cfg.algo.algorithm,
            actor: self.agent.actor.clone(),
        }
    }

    pub fn rollout_request(&self) -> RolloutRequest {
        let e = self.next_episode();
        let mode = if e < self.cfg.algo.warmup_episodes {
            ActionMode::Random
        } else {
            ActionMode::Explore {
                std: self.cfg.algo.explore_std,
            }
        };
        RolloutRequest {
            task: self.cfg.task,
            episode_len: self.cfg.episode_len,
            mode,
            seed: derive(self.cfg.seed, stream::EPISODE, e as u64),
            episode: e as u64,
            realism: self.cfg.realism,
        }
    }

    /// Store an episode, run the scheduled updates and log the curve row.
    pub fn ingest(&mut self, data: &EpisodeData) -> CurveRow {
        let e = self.next_episode();
        for t in &data.transitions {
            self.replay.push(Transition {
                state: t.state.iter().map(|v| *v as f32).collect(),
                action: t.action.iter().map(|v| *v as f32).collect(),
                reward: t.reward as f32,
                next_state: t.next_state.iter().map(|v| *v as f32).collect(),
                terminal: t.terminal,
            });
        }
        self.diverged_episodes += data.diverged as usize;
        let mut updates = 0;
        if e + 1 >= self.cfg.algo.warmup_episodes {
            for _ in 0..self.cfg.algo.updates_per_episode {
                let Some(batch) = self.replay.sample(self.cfg.algo.batch_size, &mut self.learner_rng) else {
                    break;
                };
                self.agent.update(&batch, &mut self.learner_rng);
                updates += 1;
            }
        }
        let row = CurveRow {
            episode: e,
            steps: data.transitions.len(),
            episode_return: data.episode_return(),
            updates,
            wallclock_s: self.started.elapsed().as_secs_f64(),
        };
        self.curve.push(row);
        row
    }
}

impl Trainer {
    /// Collect the remaining episodes in-process.
    pub fn run_in_process(&mut self, mut on_episode: impl FnMut(&Trainer, &CurveRow)) {
        let mut io = LocalIo::new(self.cfg.model.clone());
        while !self.finished() {
            let req = self.rollout_request();
            let policy = self.policy();
            let data = run_episode(&mut io, &self.cfg.model, &policy, &req).expect("default poses are valid");
            let row = self.ingest(&data);
            on_episode(self, &row);
        }
    }
}

/// Train in-process, calling `on_episode` after every episode.
pub fn train(cfg: TrainConfig, on_episode: impl FnMut(&Trainer, &CurveRow)) -> Result<Trainer, AlgoConfigError> {
    let mut trainer = Trainer::new(cfg)?;
    trainer.run_in_process(on_episode);
    Ok(trainer)
}

/// Deterministic-policy evaluation summary.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub returns: Vec<f64>,
    pub mean_return: f64,
    pub std_return: f64,
    /// Mean ground-truth forward speed, cm/s.
    pub mean_speed_cm_s: f64,
    pub diverged_episodes: usize,
}

pub fn evaluate(
    policy: &Policy,
    task: TaskId,
    model: &BodyModel,
    realism: RealismConfig,
    episodes: usize,
    seed: u64,
) -> EvalReport {
    let mut io = LocalIo::new(model.clone());
    let mut returns = Vec::with_capacity(episodes);
    let mut speeds = Vec::with_capacity(episodes);
    let mut diverged = 0;
    for e in 0..episodes {
        let req = RolloutRequest {
            task,
            episode_len: EPISODE_STEPS,
            mode: ActionMode::Exploit,
            seed: derive(seed, stream::EPISODE, e as u64),
            episode: e as u64,
            realism,
        };
        let data = run_episode(&mut io, model, policy, &req).expect("default poses are valid");
        returns.push(data.episode_return());
        let duration = data.transitions.len().max(1) as f64 * CONTROL_DT;
        let dx = data.truth_displacement.map(|d| d[0]).unwrap_or(0.0);
        speeds.push(100.0 * dx / duration);
        diverged += data.diverged as usize;
    }
    let n = episodes.max(1) as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
    EvalReport {
        mean_return: mean,
        std_return: var.sqrt(),
        mean_speed_cm_s: speeds.iter().sum::<f64>() / n,
        returns,
        diverged_episodes: diverged,
    }
}

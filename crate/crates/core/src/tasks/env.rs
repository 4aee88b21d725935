use std::io::{self, Write};

use super::device::{EpisodeIo, EpisodeSetup, LocalIo};
use super::observer::TaskObserver;
use super::{action_to_targets, Observation, TaskSpec, EPISODE_STEPS};
use crate::physics::{BodyModel, RobotState, CONTROL_DT};
use crate::sensors::RealismConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub true_state: RobotState,
    pub diverged: bool,
    pub stacked: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error("step called after the episode finished; call reset first")]
    StepAfterDone,
    #[error("step called before reset")]
    NotReset,
    #[error(transparent)]
    Physics(#[from] crate::physics::PhysicsError),
}

/// Single-process environment: simulator, sensor pipeline and task.
#[derive(Debug, Clone)]
pub struct Env {
    io: LocalIo,
    observer: TaskObserver,
    realism: RealismConfig,
    steps: usize,
    started: bool,
    done: bool,
}

impl Env {
    pub fn new(spec: TaskSpec, model: BodyModel, realism: RealismConfig) -> Self {
        Self {
            io: LocalIo::new(model),
            observer: TaskObserver::new(spec, &realism),
            realism,
            steps: 0,
            started: false,
            done: false,
        }
    }

    pub fn spec(&self) -> &TaskSpec {
        &self.observer.spec
    }

    pub fn model(&self) -> &BodyModel {
        &self.io.device.model
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn state(&self) -> &RobotState {
        &self.io.device.state
    }

    /// Reset simulator and pipeline; `seed` drives this episode's noise.
    pub fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        let setup = EpisodeSetup {
            initial_pose: self.observer.spec.initial_pose.clone(),
            realism: self.realism,
            seed,
        };
        let tick = self.io.reset(&setup)?;
        self.observer.reset();
        self.steps = 0;
        self.started = true;
        self.done = false;
        Ok(self.observer.observe(&tick).observation)
    }

    pub fn step(&mut self, action: &[f64]) -> Result<StepResult, EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.done {
            return Err(EnvError::StepAfterDone);
        }
        let cmd = action_to_targets(action, &self.io.device.model);
        let tick = self.io.step(&cmd, self.steps as u64)?;
        let seen = self.observer.observe(&tick);
        self.steps += 1;
        self.done = tick.diverged || self.steps >= EPISODE_STEPS;
        Ok(StepResult {
            observation: seen.observation,
            reward: if tick.diverged { 0.0 } else { seen.reward },
            done: self.done,
            info: StepInfo {
                true_state: tick.truth.expect("local transport carries ground truth"),
                diverged: tick.diverged,
                stacked: seen.stacked,
            },
        })
    }
}

/// One row of a trajectory dump.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub action: Vec<f64>,
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
}

/// CSV dump: `step,time,action[8],obs[29],reward,done`.
pub fn write_trajectory_csv<W: Write>(mut w: W, rows: &[TrajectoryRow]) -> io::Result<()> {
    let mut header = vec!["step".to_string(), "time".to_string()];
    header.extend((0..8).map(|i| format!("action{i}")));
    header.extend((0..29).map(|i| format!("obs{i}")));
    header.push("reward".into());
    header.push("done".into());
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let mut fields = vec![r.step.to_string(), format!("{}", r.step as f64 * CONTROL_DT)];
        fields.extend(r.action.iter().map(|v| v.to_string()));
        fields.extend(r.observation.to_array().iter().map(|v| v.to_string()));
        fields.push(r.reward.to_string());
        fields.push((r.done as u8).to_string());
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

//! Sleep, stand, turn and walk: episodic environments with rewards computed
//! from the (possibly degraded) observations, as on the robot.

mod device;
mod env;
mod observation;
mod observer;
mod spec;

pub use device::{Device, EpisodeIo, EpisodeSetup, LocalIo, Tick, TICK_US};
pub use env::{write_trajectory_csv, Env, EnvError, StepInfo, StepResult, TrajectoryRow};
pub use observation::{assemble_observation, Observation, JOINT_VELOCITY_SCALE, OBS_DIM};
pub use observer::{Observed, TaskObserver};
pub use spec::{
    action_to_targets, reward_height, reward_turn, reward_walk, TaskId, TaskSpec, EPISODE_STEPS, STAND_GOAL_HEIGHT,
    TURN_GOAL_YAW,
};

use std::fmt;
use std::str::FromStr;

use crate::physics::{BodyModel, InitialPose, ServoCommand, NUM_JOINTS};

/// Goal yaw of the turn task, rad.
pub const TURN_GOAL_YAW: f64 = 3.14;
/// Goal torso height of the stand task, m.
pub const STAND_GOAL_HEIGHT: f64 = 0.12;
/// Control steps per episode (10 s at 20 Hz).
pub const EPISODE_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskId {
    Sleep,
    Stand,
    Turn,
    Walk,
}

impl TaskId {
    pub const ALL: [TaskId; 4] = [TaskId::Sleep, TaskId::Stand, TaskId::Turn, TaskId::Walk];

    pub fn code(self) -> u8 {
        match self {
            TaskId::Sleep => 0,
            TaskId::Stand => 1,
            TaskId::Turn => 2,
            TaskId::Walk => 3,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        Self::ALL.get(c as usize).copied()
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskId::Sleep => "sleep",
            TaskId::Stand => "stand",
            TaskId::Turn => "turn",
            TaskId::Walk => "walk",
        })
    }
}

impl FromStr for TaskId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .iter()
            .find(|t| t.to_string() == s.to_ascii_lowercase())
            .copied()
            .ok_or_else(|| format!("unknown task `{s}` (expected sleep, stand, turn or walk)"))
    }
}

/// A task: its goal constants and starting posture.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub task: TaskId,
    pub goal_height: f64,
    pub goal_yaw: f64,
    pub initial_pose: InitialPose,
}

impl TaskSpec {
    pub fn new(task: TaskId) -> Self {
        let (goal_height, initial_pose) = match task {
            TaskId::Sleep => (0.0, InitialPose::Standing),
            TaskId::Stand => (STAND_GOAL_HEIGHT, InitialPose::Lying),
            TaskId::Turn | TaskId::Walk => (0.0, InitialPose::Lying),
        };
        Self {
            task,
            goal_height,
            goal_yaw: TURN_GOAL_YAW,
            initial_pose,
        }
    }

    /// Reward from the observed torso height, unwrapped yaw and forward velocity.
    pub fn reward(&self, z: f64, unwrapped_yaw: f64, x_velocity: f64) -> f64 {
        match self.task {
            TaskId::Sleep | TaskId::Stand => reward_height(z, self.goal_height),
            TaskId::Turn => reward_turn(unwrapped_yaw),
            TaskId::Walk => reward_walk(x_velocity),
        }
    }
}

pub fn reward_height(z: f64, z_goal: f64) -> f64 {
    -(z - z_goal).powi(2)
}

pub fn reward_turn(yaw: f64) -> f64 {
    -(yaw - TURN_GOAL_YAW).powi(2)
}

pub fn reward_walk(x_velocity: f64) -> f64 {
    x_velocity
}

/// Affine map of `[−1, 1]` actions onto each joint's limit interval.
pub fn action_to_targets(action: &[f64], model: &BodyModel) -> ServoCommand {
    assert_eq!(action.len(), NUM_JOINTS, "action dimension");
    let mut targets = [0.0; NUM_JOINTS];
    for (j, a) in action.iter().enumerate() {
        let lim = model.joint_limits(j);
        let a = if a.is_nan() { 0.0 } else { a.clamp(-1.0, 1.0) };
        targets[j] = lim.lower + 0.5 * (a + 1.0) * (lim.upper - lim.lower);
    }
    ServoCommand { targets }
}

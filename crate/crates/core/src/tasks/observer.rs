use super::{Observation, TaskSpec};
use crate::sensors::{FrameStack, ObservationAssembler, RealismConfig};
use super::device::Tick;

/// Learner-side view of one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Observed {
    pub observation: Observation,
    /// Newest-first stack of the last K policy inputs.
    pub stacked: Vec<f64>,
    pub reward: f64,
    pub unwrapped_yaw: f64,
}

/// Assembles observations, stacks them and scores them against the task.
#[derive(Debug, Clone)]
pub struct TaskObserver {
    pub spec: TaskSpec,
    assembler: ObservationAssembler,
    stack: FrameStack,
}

impl TaskObserver {
    pub fn new(spec: TaskSpec, realism: &RealismConfig) -> Self {
        Self {
            spec,
            assembler: ObservationAssembler::new(realism),
            stack: FrameStack::new(realism.stack_k),
        }
    }

    pub fn reset(&mut self) {
        self.assembler.reset();
        self.stack.clear();
    }

    pub fn observe(&mut self, tick: &Tick) -> Observed {
        let a = self.assembler.assemble(&tick.pose, &tick.joints);
        let o = &a.observation;
        let yaw = a.unwrapped_rpy[2];
        let reward = self.spec.reward(o.torso_z, yaw, o.torso_velocity[0]);
        let stacked = self.stack.push(&o.policy_input());
        Observed {
            observation: a.observation,
            stacked,
            reward,
            unwrapped_yaw: yaw,
        }
    }
}

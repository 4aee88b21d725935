//! Observation realism: pose latency, tracking noise, z lowpass,
//! smooth differentiation and frame stacking.
//!
//! The pipeline is split the way the robot splits it: [`PoseChannel`] runs
//! where the pose estimate is produced (latency and noise), while
//! [`ObservationAssembler`] runs next to the learner (filtering,
//! differentiation and assembly). [`Pipeline`] chains both in-process.

mod assembler;
mod config;
mod delay;
mod diff;
mod lowpass;
mod noise;
mod pose;
mod stack;

pub use assembler::{Assembled, ObservationAssembler, Unwrapper};
pub use config::{RealismConfig, RealismError};
pub use delay::DelayLine;
pub use diff::{holoborodko_coefficients, Differentiator};
pub use lowpass::Lowpass;
pub use noise::NoiseModel;
pub use pose::{JointSample, PoseChannel, PoseSample};
pub use stack::FrameStack;

use crate::physics::RobotState;
use crate::rng::Rng;

/// Full ground truth → observation chain.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub pose: PoseChannel,
    pub assembler: ObservationAssembler,
}

impl Pipeline {
    pub fn new(cfg: &RealismConfig, noise_rng: Rng) -> Self {
        Self {
            pose: PoseChannel::new(cfg, noise_rng),
            assembler: ObservationAssembler::new(cfg),
        }
    }

    pub fn reset(&mut self, noise_rng: Rng) {
        self.pose.reset(noise_rng);
        self.assembler.reset();
    }

    pub fn process(&mut self, state: &RobotState, timestamp_us: u64) -> Assembled {
        let pose = self.pose.process(PoseSample::from_state(state, timestamp_us));
        self.assembler.assemble(&pose, &JointSample::from_state(state))
    }
}

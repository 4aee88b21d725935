use super::{DelayLine, NoiseModel, RealismConfig};
use crate::physics::{RobotState, NUM_JOINTS};
use crate::rng::Rng;

/// One motion-capture style pose estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseSample {
    pub position: [f64; 3],
    /// Roll, pitch, yaw, wrapped to (−π, π].
    pub rpy: [f64; 3],
    pub timestamp_us: u64,
}

impl PoseSample {
    pub fn from_state(state: &RobotState, timestamp_us: u64) -> Self {
        let p = state.torso_position;
        let e = state.euler();
        Self {
            position: [p.x, p.y, p.z],
            rpy: [e.x, e.y, e.z],
            timestamp_us,
        }
    }
}

/// Servo telemetry: joint positions and rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointSample {
    pub angles: [f64; NUM_JOINTS],
    pub velocities: [f64; NUM_JOINTS],
}

impl JointSample {
    pub fn from_state(state: &RobotState) -> Self {
        Self {
            angles: state.joint_angles,
            velocities: state.joint_velocities,
        }
    }
}

/// The pose-estimation side of the pipeline: latency, then tracking noise.
#[derive(Debug, Clone)]
pub struct PoseChannel {
    delay: DelayLine<PoseSample>,
    noise: NoiseModel,
}

impl PoseChannel {
    pub fn new(cfg: &RealismConfig, rng: Rng) -> Self {
        Self {
            delay: DelayLine::new(cfg.latency_steps),
            noise: NoiseModel::new(cfg.sigma_xyz, cfg.sigma_rpy, rng),
        }
    }

    /// Start a new episode with a fresh noise stream.
    pub fn reset(&mut self, rng: Rng) {
        self.delay.clear();
        self.noise = NoiseModel::new(self.noise.sigma_xyz, self.noise.sigma_rpy, rng);
    }

    pub fn process(&mut self, truth: PoseSample) -> PoseSample {
        let mut out = self.delay.push_pop(truth);
        self.noise.perturb(&mut out);
        out
    }
}

use std::f64::consts::PI;

use super::{Differentiator, JointSample, Lowpass, PoseSample, RealismConfig};
use crate::physics::CONTROL_DT;
use crate::tasks::Observation;

/// Continuity unwrapping of an angle stream; the first sample is kept as is.
#[derive(Debug, Clone, Default)]
pub struct Unwrapper {
    last_raw: Option<f64>,
    value: f64,
}

impl Unwrapper {
    pub fn reset(&mut self) {
        self.last_raw = None;
        self.value = 0.0;
    }

    pub fn push(&mut self, raw: f64) -> f64 {
        match self.last_raw {
            None => self.value = raw,
            Some(prev) => {
                let mut d = raw - prev;
                d -= 2.0 * PI * ((d + PI) / (2.0 * PI)).floor();
                self.value += d;
            }
        }
        self.last_raw = Some(raw);
        self.value
    }
}

/// Observation plus the pipeline's unwrapped attitude estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Assembled {
    pub observation: Observation,
    pub unwrapped_rpy: [f64; 3],
}

/// Server-side stage: z lowpass, unwrapping, differentiation and assembly.
#[derive(Debug, Clone)]
pub struct ObservationAssembler {
    lowpass: Lowpass,
    unwrap: [Unwrapper; 3],
    diffs: Vec<Differentiator>,
}

impl ObservationAssembler {
    pub fn new(cfg: &RealismConfig) -> Self {
        Self {
            lowpass: Lowpass::new(cfg.lowpass_alpha),
            unwrap: Default::default(),
            diffs: (0..6).map(|_| Differentiator::new(cfg.diff_window, CONTROL_DT)).collect(),
        }
    }

    pub fn reset(&mut self) {
        self.lowpass.reset();
        for u in &mut self.unwrap {
            u.reset();
        }
        for d in &mut self.diffs {
            d.reset();
        }
    }

    pub fn assemble(&mut self, pose: &PoseSample, joints: &JointSample) -> Assembled {
        let z = self.lowpass.filter(pose.position[2]);
        let position = [pose.position[0], pose.position[1], z];
        let mut velocity = [0.0; 3];
        for i in 0..3 {
            velocity[i] = self.diffs[i].push(position[i]);
        }
        let mut unwrapped = [0.0; 3];
        let mut rates = [0.0; 3];
        for i in 0..3 {
            unwrapped[i] = self.unwrap[i].push(pose.rpy[i]);
            rates[i] = self.diffs[3 + i].push(unwrapped[i]);
        }
        Assembled {
            observation: Observation::from_channels(
                velocity,
                z,
                pose.rpy,
                rates,
                joints.angles,
                joints.velocities,
            ),
            unwrapped_rpy: unwrapped,
        }
    }
}

use crate::physics::{reset, step, BodyModel, InitialPose, PhysicsError, RobotState, ServoCommand, CONTROL_DT};
use crate::rng::{rng_for, stream};
use crate::sensors::{JointSample, PoseChannel, PoseSample, RealismConfig};

/// Microseconds per control tick.
pub const TICK_US: u64 = 50_000;

/// The simulated robot as the control process sees it: servos that hold
/// their last set-points, ticked at the control rate.
#[derive(Debug, Clone)]
pub struct Device {
    pub model: BodyModel,
    pub state: RobotState,
    pub command: ServoCommand,
    pub diverged: bool,
    pub tick: u64,
}

impl Device {
    pub fn new(model: BodyModel, pose: &InitialPose) -> Result<Self, PhysicsError> {
        let state = reset(&model, pose)?;
        Ok(Self {
            command: ServoCommand::hold(&state),
            state,
            model,
            diverged: false,
            tick: 0,
        })
    }

    pub fn reset(&mut self, pose: &InitialPose) -> Result<(), PhysicsError> {
        self.state = reset(&self.model, pose)?;
        self.command = ServoCommand::hold(&self.state);
        self.diverged = false;
        self.tick = 0;
        Ok(())
    }

    pub fn apply(&mut self, cmd: ServoCommand) {
        self.command = cmd;
    }

    /// Advance one control period. After a divergence the last valid state is
    /// kept and the device stops moving.
    pub fn advance(&mut self) {
        if !self.diverged {
            match step(&self.model, &self.state, &self.command, CONTROL_DT) {
                Ok(s) => self.state = s,
                Err(PhysicsError::Diverged { last_valid }) => {
                    self.state = *last_valid;
                    self.diverged = true;
                }
                Err(e) => panic!("control step rejected by the simulator: {e}"),
            }
        }
        self.tick += 1;
    }

    pub fn timestamp_us(&self) -> u64 {
        self.tick * TICK_US
    }

    pub fn telemetry(&self) -> JointSample {
        JointSample::from_state(&self.state)
    }

    pub fn truth_pose(&self) -> PoseSample {
        PoseSample::from_state(&self.state, self.timestamp_us())
    }
}

/// What the learner side receives at each control tick.
#[derive(Debug, Clone, PartialEq)]
pub struct Tick {
    pub pose: PoseSample,
    pub joints: JointSample,
    pub diverged: bool,
    /// Ground truth, when the transport has it (in-process only).
    pub truth: Option<RobotState>,
}

/// Everything the robot side needs to start an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSetup {
    pub initial_pose: InitialPose,
    pub realism: RealismConfig,
    /// Seed of this episode's random streams.
    pub seed: u64,
}

/// Transport between the learner-side episode loop and the robot.
pub trait EpisodeIo {
    type Error: std::error::Error + Send + Sync + 'static;

    /// Reset the robot and return the first tick.
    fn reset(&mut self, setup: &EpisodeSetup) -> Result<Tick, Self::Error>;

    /// Send set-points, let one control period pass and return the next tick.
    fn step(&mut self, cmd: &ServoCommand, seq: u64) -> Result<Tick, Self::Error>;
}

/// In-process robot: device plus the pose-estimation channel.
#[derive(Debug, Clone)]
pub struct LocalIo {
    pub device: Device,
    pub pose: PoseChannel,
}

impl LocalIo {
    pub fn new(model: BodyModel) -> Self {
        let device = Device::new(model, &InitialPose::Lying).expect("default poses are valid");
        Self {
            pose: PoseChannel::new(&RealismConfig::default(), rng_for(0, stream::POSE_NOISE, 0)),
            device,
        }
    }

    fn tick(&mut self) -> Tick {
        Tick {
            pose: self.pose.process(self.device.truth_pose()),
            joints: self.device.telemetry(),
            diverged: self.device.diverged,
            truth: Some(self.device.state.clone()),
        }
    }
}

impl EpisodeIo for LocalIo {
    type Error = PhysicsError;

    fn reset(&mut self, setup: &EpisodeSetup) -> Result<Tick, PhysicsError> {
        self.device.reset(&setup.initial_pose)?;
        self.pose = PoseChannel::new(&setup.realism, rng_for(setup.seed, stream::POSE_NOISE, 0));
        Ok(self.tick())
    }

    fn step(&mut self, cmd: &ServoCommand, _seq: u64) -> Result<Tick, PhysicsError> {
        self.device.apply(*cmd);
        self.device.advance();
        Ok(self.tick())
    }
}

//! Learning: MLPs with hand-written gradients, replay, TD3, SAC and REDQ,
//! and the alternating collect/update training loop.

mod adam;
pub mod agent;
pub mod checkpoint;
mod config;
pub mod losses;
mod mlp;
mod policy;
mod replay;
mod scalar;

pub use adam::{polyak, Adam};
pub use agent::{Agent, LossRecord};
pub use config::{AlgoConfig, AlgoConfigError, Algorithm};
pub use mlp::{Architecture, Layer, Mlp, ShapeError, Tape};
pub use policy::{random_action, ActionMode, Policy};
pub use replay::{Batch, ReplayBuffer, Transition};
pub use scalar::Scalar;

mod rollout;
mod train;

pub use rollout::{run_episode, EpisodeData, RolloutRequest, StepRecord};
pub use train::{
    evaluate, read_curve, read_timing, train, write_curve, write_timing, CurveRow, EvalReport, TrainConfig, Trainer,
    CURVE_HEADER, TIMING_HEADER,
};

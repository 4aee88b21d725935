//! Desk-scale RealAnt reinforcement-learning stack.
//!
//! * [`physics`]: reduced quadruped simulator standing in for the robot.
//! * [`sensors`]: latency, tracking noise, noise-robust differentiation,
//!   lowpass filtering and frame stacking.
//! * [`tasks`]: the sleep/stand, turn and walk environments.
//! * [`rl`]: dense-connection MLPs with hand-written gradients, replay, TD3,
//!   SAC and REDQ, and the episode/update training loop.
//! * [`mesh`]: the four-process rollout architecture over a binary TCP protocol.
//! * [`cli`]: train / eval / ablate / export commands behind the `realant` binary.

pub mod cli;
pub mod mesh;
pub mod physics;
pub mod rl;
pub mod rng;
pub mod sensors;
pub mod tasks;

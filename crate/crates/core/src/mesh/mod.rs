//! The four-process rollout mesh: train client, rollout server, control
//! process and pose process, talking length-prefixed binary frames over TCP.
//!
//! ```text
//! train client --REQ/REP--> rollout server --ACTION pub--> control
//!                                 ^   ^                      |   |
//!                                 |   +--SERVO_TELEMETRY pub-+   | truth pub
//!                                 +------POSE_ESTIMATE pub--- pose <-+
//! ```
//!
//! Episode starts travel as ROLLOUT_REQUEST frames from the server to the
//! control process, which forwards them to the pose process ahead of the
//! first ground-truth frame. Both answer with an ACK marker on their
//! publishing socket so the server can discard anything older.
//!
//! In lockstep mode every process is driven by the control tick: an ACTION
//! advances the simulator by one period, and the server blocks until the
//! resulting telemetry and pose arrive. Runs are then bit-identical to the
//! in-process path. In real-time mode each process keeps its own wall clock
//! (optionally accelerated) and the server reads latest-value caches.

mod client;
mod control;
mod pose;
mod server;
pub mod transport;
pub mod wire;

use std::time::Duration;

pub use client::{train_client, ClientConfig};
pub use control::{run_control, ControlConfig, ControlProcess};
pub use pose::{run_pose, PoseProcess};
pub use server::{MeshIo, RolloutServer, ServerConfig, ServerState};
pub use transport::{Publisher, Replier, Requester, Subscriber};
pub use wire::{decode, decode_exact, encode, ActionMsg, DecodeError, Message, MsgType, Status, Telemetry};

use crate::rl::RolloutRequest;
use crate::tasks::TICK_US;

/// Logical staleness bound for cached telemetry and pose.
pub const STALENESS_US: u64 = 250_000;

/// ERROR codes.
pub mod code {
    pub const NO_POLICY: u16 = 1;
    pub const BAD_WEIGHTS: u16 = 2;
    pub const EPISODE_ABORTED: u16 = 3;
    pub const BAD_REQUEST: u16 = 4;
    pub const UNEXPECTED: u16 = 5;
    pub const DEVICE: u16 = 6;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Clock {
    /// Shared logical clock stepped by the control process.
    Lockstep,
    /// Wall clock running `accel` times faster than the robot.
    RealTime { accel: f64 },
}

impl Clock {
    /// Wall-clock length of one control period.
    pub fn period(&self) -> Duration {
        match self {
            Clock::Lockstep => Duration::ZERO,
            Clock::RealTime { accel } => Duration::from_secs_f64(TICK_US as f64 * 1e-6 / accel),
        }
    }

    /// Wall-clock span corresponding to `us` logical microseconds.
    pub fn wall(&self, us: u64) -> Duration {
        match self {
            Clock::Lockstep => Duration::from_micros(us),
            Clock::RealTime { accel } => Duration::from_secs_f64(us as f64 * 1e-6 / accel),
        }
    }
}

impl std::fmt::Display for Clock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Clock::Lockstep => write!(f, "lockstep"),
            Clock::RealTime { accel } => write!(f, "realtime:{accel}"),
        }
    }
}

impl std::str::FromStr for Clock {
    type Err = String;

    /// `lockstep`, `realtime` or `realtime:<accel>`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            None if s == "lockstep" => Ok(Clock::Lockstep),
            None if s == "realtime" => Ok(Clock::RealTime { accel: 1.0 }),
            Some(("realtime", a)) => match a.parse::<f64>() {
                Ok(accel) if accel.is_finite() && accel > 0.0 => Ok(Clock::RealTime { accel }),
                _ => Err(format!("bad acceleration factor {a:?}")),
            },
            _ => Err(format!("unknown clock {s:?} (lockstep, realtime[:accel])")),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Frame(#[from] wire::FrameError),
    #[error("{0} is stale")]
    Stale(&'static str),
    #[error("remote error {}: {}", .0.code, .0.text)]
    Remote(Status),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("episode {episode}: giving up after {attempts} attempts: {last}")]
    RetriesExhausted { episode: usize, attempts: usize, last: String },
}

/// Text of the ACK that marks an episode reset on a publishing socket.
pub fn reset_marker(req: &RolloutRequest) -> String {
    format!("reset {} {}", req.episode, req.seed)
}

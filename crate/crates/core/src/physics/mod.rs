//! Reduced rigid-body simulator of the eight-joint quadruped.

mod dynamics;
mod model;
mod state;

pub use dynamics::{
    contact_force, contact_points, max_penetration, servo_torque, step, step_with, total_energy,
    Actuation, LEG_SIGNS,
};
pub use model::{
    load_model, BodyModel, ContactParams, JointLimits, ServoParams, DEFAULT_TOTAL_MASS, NUM_JOINTS,
    NUM_LEGS,
};
pub use state::{
    euler_rates, euler_zyx, mirror_command, quaternion_from_euler, reset, InitialPose, RobotState,
    ServoCommand,
};

/// Control period of the robot, s (20 Hz).
pub const CONTROL_DT: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum PhysicsError {
    #[error("physics config `{key}`: {reason}")]
    Config { key: String, reason: String },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("control step {dt} s is not a whole multiple of the {substep} s substep")]
    Timestep { dt: f64, substep: f64 },
    #[error("simulation diverged")]
    Diverged { last_valid: Box<RobotState> },
}

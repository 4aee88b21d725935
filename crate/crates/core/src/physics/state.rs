use nalgebra::{Quaternion, UnitQuaternion, Vector3};

use super::model::{BodyModel, NUM_JOINTS};
use super::PhysicsError;

/// Full simulator state in generalized coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub torso_position: Vector3<f64>,
    pub torso_orientation: UnitQuaternion<f64>,
    /// World frame, m/s.
    pub torso_linear_velocity: Vector3<f64>,
    /// World frame, rad/s.
    pub torso_angular_velocity: Vector3<f64>,
    pub joint_angles: [f64; NUM_JOINTS],
    pub joint_velocities: [f64; NUM_JOINTS],
    pub sim_time: f64,
}

/// Commanded joint set-points, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServoCommand {
    pub targets: [f64; NUM_JOINTS],
}

impl ServoCommand {
    /// Hold the joints where they are.
    pub fn hold(state: &RobotState) -> Self {
        Self {
            targets: state.joint_angles,
        }
    }

    pub fn clamped(&self, model: &BodyModel) -> Self {
        let mut targets = self.targets;
        for (j, t) in targets.iter_mut().enumerate() {
            *t = model.joint_limits(j).clamp(*t);
        }
        Self { targets }
    }
}

/// Initial configuration for [`reset`].
#[derive(Debug, Clone, PartialEq)]
pub enum InitialPose {
    /// Torso resting on the ground, hips centred, knees at their upper limit.
    Lying,
    /// Torso held up by near-vertical lower legs, knees at their lower limit.
    Standing,
    Custom(Box<RobotState>),
}

/// Roll, pitch and yaw (Z-Y-X convention) of a rotation.
pub fn euler_zyx(q: &UnitQuaternion<f64>) -> Vector3<f64> {
    let (w, x, y, z) = (q.w, q.i, q.j, q.k);
    let roll = (2.0 * (w * x + y * z)).atan2(1.0 - 2.0 * (x * x + y * y));
    let sin_pitch = (2.0 * (w * y - z * x)).clamp(-1.0, 1.0);
    let pitch = sin_pitch.asin();
    let yaw = (2.0 * (w * z + x * y)).atan2(1.0 - 2.0 * (y * y + z * z));
    Vector3::new(roll, pitch, yaw)
}

/// Inverse of [`euler_zyx`].
pub fn quaternion_from_euler(roll: f64, pitch: f64, yaw: f64) -> UnitQuaternion<f64> {
    let (sr, cr) = (0.5 * roll).sin_cos();
    let (sp, cp) = (0.5 * pitch).sin_cos();
    let (sy, cy) = (0.5 * yaw).sin_cos();
    UnitQuaternion::new_normalize(Quaternion::new(
        cr * cp * cy + sr * sp * sy,
        sr * cp * cy - cr * sp * sy,
        cr * sp * cy + sr * cp * sy,
        cr * cp * sy - sr * sp * cy,
    ))
}

/// Euler-angle rates from a world-frame angular velocity at the given angles.
/// Near gimbal lock (|pitch| → π/2) the roll rate is limited by clamping cos(pitch).
pub fn euler_rates(angles: &Vector3<f64>, omega_world: &Vector3<f64>) -> Vector3<f64> {
    let (sp, cp) = angles.y.sin_cos();
    let (sy, cy) = angles.z.sin_cos();
    let wx = cy * omega_world.x + sy * omega_world.y;
    let wy = -sy * omega_world.x + cy * omega_world.y;
    let cp = if cp.abs() < 1e-9 { 1e-9f64.copysign(cp) } else { cp };
    let roll_rate = wx / cp;
    Vector3::new(roll_rate, wy, omega_world.z + sp * roll_rate)
}

impl RobotState {
    pub fn euler(&self) -> Vector3<f64> {
        euler_zyx(&self.torso_orientation)
    }

    pub fn is_finite(&self) -> bool {
        self.torso_position.iter().all(|v| v.is_finite())
            && self.torso_orientation.coords.iter().all(|v| v.is_finite())
            && self.torso_linear_velocity.iter().all(|v| v.is_finite())
            && self.torso_angular_velocity.iter().all(|v| v.is_finite())
            && self.joint_angles.iter().all(|v| v.is_finite())
            && self.joint_velocities.iter().all(|v| v.is_finite())
    }

    /// Reflect across the x–z plane.
    ///
    /// Leg correspondence: front-left ↔ front-right, back-left ↔ back-right.
    /// Hip angles change sign (the hip axis is vertical and the mount angles
    /// mirror), knee angles carry over. Roll and yaw flip sign, pitch is kept;
    /// the angular velocity is an axial vector, so its x and z flip.
    pub fn mirror(&self) -> RobotState {
        let q = self.torso_orientation.quaternion();
        let mirrored_q = UnitQuaternion::new_unchecked(Quaternion::new(q.w, -q.i, q.j, -q.k));
        let mut joint_angles = [0.0; NUM_JOINTS];
        let mut joint_velocities = [0.0; NUM_JOINTS];
        for leg in 0..4 {
            let partner = leg ^ 1;
            joint_angles[2 * partner] = -self.joint_angles[2 * leg];
            joint_angles[2 * partner + 1] = self.joint_angles[2 * leg + 1];
            joint_velocities[2 * partner] = -self.joint_velocities[2 * leg];
            joint_velocities[2 * partner + 1] = self.joint_velocities[2 * leg + 1];
        }
        let p = self.torso_position;
        let v = self.torso_linear_velocity;
        let w = self.torso_angular_velocity;
        RobotState {
            torso_position: Vector3::new(p.x, -p.y, p.z),
            torso_orientation: mirrored_q,
            torso_linear_velocity: Vector3::new(v.x, -v.y, v.z),
            torso_angular_velocity: Vector3::new(-w.x, w.y, -w.z),
            joint_angles,
            joint_velocities,
            sim_time: self.sim_time,
        }
    }
}

/// Mirror a command with the same leg correspondence as [`RobotState::mirror`].
pub fn mirror_command(cmd: &ServoCommand) -> ServoCommand {
    let mut targets = [0.0; NUM_JOINTS];
    for leg in 0..4 {
        let partner = leg ^ 1;
        targets[2 * partner] = -cmd.targets[2 * leg];
        targets[2 * partner + 1] = cmd.targets[2 * leg + 1];
    }
    ServoCommand { targets }
}

/// Build a resting state for the requested pose.
pub fn reset(model: &BodyModel, pose: &InitialPose) -> Result<RobotState, PhysicsError> {
    let (knee, z) = match pose {
        InitialPose::Custom(state) => {
            for (j, angle) in state.joint_angles.iter().enumerate() {
                let limits = model.joint_limits(j);
                if !limits.contains(*angle) {
                    return Err(PhysicsError::InvalidState(format!(
                        "joint {j} angle {angle} outside [{}, {}]",
                        limits.lower, limits.upper
                    )));
                }
            }
            if !state.is_finite() {
                return Err(PhysicsError::InvalidState("non-finite value".into()));
            }
            let mut s = (**state).clone();
            s.torso_linear_velocity = Vector3::zeros();
            s.torso_angular_velocity = Vector3::zeros();
            s.joint_velocities = [0.0; NUM_JOINTS];
            s.sim_time = 0.0;
            return Ok(s);
        }
        InitialPose::Lying => (model.knee_limits.upper, model.torso_half_extents.z),
        InitialPose::Standing => {
            let knee = model.knee_limits.lower;
            // Foot tip exactly on the ground.
            let z = -(model.hip_offset.z - model.lower_leg_length * knee.cos());
            (knee, z.max(model.torso_half_extents.z))
        }
    };
    let mut joint_angles = [0.0; NUM_JOINTS];
    for leg in 0..4 {
        joint_angles[2 * leg] = model.hip_limits.clamp(0.0);
        joint_angles[2 * leg + 1] = knee;
    }
    Ok(RobotState {
        torso_position: Vector3::new(0.0, 0.0, z),
        torso_orientation: UnitQuaternion::identity(),
        torso_linear_velocity: Vector3::zeros(),
        torso_angular_velocity: Vector3::zeros(),
        joint_angles,
        joint_velocities: [0.0; NUM_JOINTS],
        sim_time: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_state() -> RobotState {
        RobotState {
            torso_position: Vector3::new(0.3, -0.2, 0.1),
            torso_orientation: quaternion_from_euler(0.1, -0.2, 0.7),
            torso_linear_velocity: Vector3::new(0.5, 0.25, -0.1),
            torso_angular_velocity: Vector3::new(0.3, -1.0, 2.0),
            joint_angles: [0.1, 0.5, -0.2, 0.6, 0.3, 1.0, -0.4, 1.2],
            joint_velocities: [1.0, -2.0, 0.5, 0.25, -0.75, 3.0, 0.0, -1.5],
            sim_time: 1.25,
        }
    }

    #[test]
    fn euler_round_trip() {
        let q = quaternion_from_euler(0.3, -0.4, 2.9);
        let e = euler_zyx(&q);
        assert!((e - Vector3::new(0.3, -0.4, 2.9)).norm() < 1e-12);
    }

    #[test]
    fn mirror_is_an_involution() {
        let s = sample_state();
        assert_eq!(s.mirror().mirror(), s);
    }

    #[test]
    fn mirror_negates_roll_and_yaw() {
        let s = sample_state();
        let e = s.euler();
        let m = s.mirror().euler();
        assert!((m.x + e.x).abs() < 1e-12);
        assert!((m.y - e.y).abs() < 1e-12);
        assert!((m.z + e.z).abs() < 1e-12);
    }

    #[test]
    fn symmetric_state_is_fixed_point() {
        let model = BodyModel::default();
        let mut s = reset(&model, &InitialPose::Standing).unwrap();
        s.joint_angles = [0.2, 0.5, -0.2, 0.5, 0.1, 0.9, -0.1, 0.9];
        s.torso_orientation = quaternion_from_euler(0.0, 0.15, 0.0);
        assert_eq!(s.mirror(), s);
    }

    #[test]
    fn euler_rates_match_finite_difference() {
        let omega = Vector3::new(0.4, -0.3, 0.9);
        let q0 = quaternion_from_euler(0.2, 0.3, -1.0);
        let h = 1e-6;
        let q1 = UnitQuaternion::from_scaled_axis(omega * h) * q0;
        let fd = (euler_zyx(&q1) - euler_zyx(&q0)) / h;
        let rates = euler_rates(&euler_zyx(&q0), &omega);
        assert!((fd - rates).norm() < 1e-5, "{fd} vs {rates}");
    }

    #[test]
    fn resets_are_at_rest() {
        let model = BodyModel::default();
        for pose in [InitialPose::Lying, InitialPose::Standing] {
            let s = reset(&model, &pose).unwrap();
            assert_eq!(s.torso_linear_velocity, Vector3::zeros());
            assert_eq!(s.joint_velocities, [0.0; 8]);
            assert_eq!(s.sim_time, 0.0);
            let e = s.euler();
            assert_eq!((e.x, e.y), (0.0, 0.0));
        }
    }

    #[test]
    fn custom_reset_accepts_limits_and_rejects_outside() {
        let model = BodyModel::default();
        let mut s = reset(&model, &InitialPose::Lying).unwrap();
        s.joint_angles[0] = model.hip_limits.upper;
        s.joint_angles[1] = model.knee_limits.lower;
        assert!(reset(&model, &InitialPose::Custom(Box::new(s.clone()))).is_ok());
        s.joint_angles[1] = model.knee_limits.lower - 1e-3;
        assert!(reset(&model, &InitialPose::Custom(Box::new(s))).is_err());
    }
}

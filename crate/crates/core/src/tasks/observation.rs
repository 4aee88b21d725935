use crate::physics::{euler_rates, RobotState, NUM_JOINTS};

pub const OBS_DIM: usize = 29;

/// Joint velocities reach ~20 rad/s on impacts; the network sees them in
/// units of 10 rad/s.
pub const JOINT_VELOCITY_SCALE: f64 = 0.1;

/// The robot's 29-dimensional observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// World-frame ẋ, ẏ, ż, m/s.
    pub torso_velocity: [f64; 3],
    pub torso_z: f64,
    /// sin α, cos α, sin β, cos β, sin γ, cos γ (roll, pitch, yaw).
    pub euler_sincos: [f64; 6],
    /// α̇, β̇, γ̇, rad/s.
    pub euler_rates: [f64; 3],
    pub joint_angles: [f64; NUM_JOINTS],
    pub joint_velocities: [f64; NUM_JOINTS],
}

fn sincos(angles: &[f64; 3]) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (i, a) in angles.iter().enumerate() {
        let (s, c) = a.sin_cos();
        out[2 * i] = s;
        out[2 * i + 1] = c;
    }
    out
}

impl Observation {
    /// Build from already-estimated channels; `rpy` is encoded as sin/cos pairs.
    pub fn from_channels(
        torso_velocity: [f64; 3],
        torso_z: f64,
        rpy: [f64; 3],
        euler_rates: [f64; 3],
        joint_angles: [f64; NUM_JOINTS],
        joint_velocities: [f64; NUM_JOINTS],
    ) -> Self {
        Self {
            torso_velocity,
            torso_z,
            euler_sincos: sincos(&rpy),
            euler_rates,
            joint_angles,
            joint_velocities,
        }
    }

    pub fn to_array(&self) -> [f64; OBS_DIM] {
        let mut out = [0.0; OBS_DIM];
        out[..3].copy_from_slice(&self.torso_velocity);
        out[3] = self.torso_z;
        out[4..10].copy_from_slice(&self.euler_sincos);
        out[10..13].copy_from_slice(&self.euler_rates);
        out[13..21].copy_from_slice(&self.joint_angles);
        out[21..29].copy_from_slice(&self.joint_velocities);
        out
    }

    /// Network input: [`Self::to_array`] with joint velocities brought to
    /// the range of the other channels.
    pub fn policy_input(&self) -> [f64; OBS_DIM] {
        let mut out = self.to_array();
        for v in &mut out[21..29] {
            *v *= JOINT_VELOCITY_SCALE;
        }
        out
    }

    pub fn from_slice(v: &[f64]) -> Option<Self> {
        if v.len() != OBS_DIM {
            return None;
        }
        let mut o = Self {
            torso_velocity: [0.0; 3],
            torso_z: v[3],
            euler_sincos: [0.0; 6],
            euler_rates: [0.0; 3],
            joint_angles: [0.0; NUM_JOINTS],
            joint_velocities: [0.0; NUM_JOINTS],
        };
        o.torso_velocity.copy_from_slice(&v[..3]);
        o.euler_sincos.copy_from_slice(&v[4..10]);
        o.euler_rates.copy_from_slice(&v[10..13]);
        o.joint_angles.copy_from_slice(&v[13..21]);
        o.joint_velocities.copy_from_slice(&v[21..29]);
        Some(o)
    }
}

/// Ground-truth observation straight from the simulator state.
pub fn assemble_observation(state: &RobotState) -> Observation {
    let e = state.euler();
    let rates = euler_rates(&e, &state.torso_angular_velocity);
    let v = state.torso_linear_velocity;
    Observation::from_channels(
        [v.x, v.y, v.z],
        state.torso_position.z,
        [e.x, e.y, e.z],
        [rates.x, rates.y, rates.z],
        state.joint_angles,
        state.joint_velocities,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{quaternion_from_euler, reset, BodyModel, InitialPose};
    use nalgebra::{UnitQuaternion, Vector3};
    use proptest::prelude::*;

    fn still(z: f64) -> RobotState {
        RobotState {
            torso_position: Vector3::new(0.0, 0.0, z),
            torso_orientation: UnitQuaternion::identity(),
            torso_linear_velocity: Vector3::zeros(),
            torso_angular_velocity: Vector3::zeros(),
            joint_angles: [0.0; 8],
            joint_velocities: [0.0; 8],
            sim_time: 0.0,
        }
    }

    #[test]
    fn zero_angles_encode_to_unit_cosines() {
        let o = assemble_observation(&still(0.0));
        assert_eq!(o.euler_sincos, [0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn height_only_state() {
        let v = assemble_observation(&still(0.12)).to_array();
        assert_eq!(v.len(), 29);
        for (i, x) in v.iter().enumerate() {
            let expected = match i {
                3 => 0.12,
                5 | 7 | 9 => 1.0,
                _ => 0.0,
            };
            assert_eq!(*x, expected, "index {i}");
        }
    }

    #[test]
    fn field_order() {
        let mut s = reset(&BodyModel::default(), &InitialPose::Standing).unwrap();
        s.torso_linear_velocity = Vector3::new(1.0, 2.0, 3.0);
        s.joint_velocities = [9.0; 8];
        let v = assemble_observation(&s).to_array();
        assert_eq!(&v[..3], &[1.0, 2.0, 3.0]);
        assert_eq!(v[3], s.torso_position.z);
        assert_eq!(&v[13..21], &s.joint_angles);
        assert_eq!(&v[21..], &[9.0; 8]);
    }

    #[test]
    fn policy_input_scales_only_joint_velocities() {
        let mut s = still(0.1);
        s.joint_velocities = [20.0; 8];
        s.joint_angles[0] = 0.3;
        let o = assemble_observation(&s);
        let (raw, input) = (o.to_array(), o.policy_input());
        assert_eq!(raw[..21], input[..21]);
        assert!(input[21..].iter().all(|v| *v == 2.0));
    }

    #[test]
    fn array_round_trip() {
        let mut s = still(0.1);
        s.torso_orientation = quaternion_from_euler(0.1, 0.2, 0.3);
        s.torso_angular_velocity = Vector3::new(0.5, -0.5, 1.0);
        let o = assemble_observation(&s);
        assert_eq!(Observation::from_slice(&o.to_array()).unwrap(), o);
        assert!(Observation::from_slice(&[0.0; 28]).is_none());
    }

    proptest! {
        #[test]
        fn sincos_pairs_lie_on_unit_circle(r in -3.0f64..3.0, p in -1.5f64..1.5, y in -3.0f64..3.0) {
            let mut s = still(0.1);
            s.torso_orientation = quaternion_from_euler(r, p, y);
            let o = assemble_observation(&s);
            for k in 0..3 {
                let (a, b) = (o.euler_sincos[2 * k], o.euler_sincos[2 * k + 1]);
                prop_assert!((a * a + b * b - 1.0).abs() < 1e-9);
            }
        }
    }
}

//! Body model of the eight-joint quadruped and its `key = value` config file.
//!
//! The geometry defaults are placeholders: the real robot's link dimensions
//! and mass split are not published in machine-readable form, so everything
//! here is config-driven. The only anchored number is the total mass of
//! 0.710 kg.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;

use super::PhysicsError;

/// Total mass of the default model, kg.
pub const DEFAULT_TOTAL_MASS: f64 = 0.710;

/// Number of actuated joints (hip + knee per leg).
pub const NUM_JOINTS: usize = 8;

/// Number of legs.
pub const NUM_LEGS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointLimits {
    pub lower: f64,
    pub upper: f64,
}

impl JointLimits {
    pub fn contains(&self, angle: f64) -> bool {
        angle >= self.lower && angle <= self.upper
    }

    pub fn clamp(&self, angle: f64) -> f64 {
        angle.clamp(self.lower, self.upper)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServoParams {
    /// Proportional gain, N·m/rad.
    pub kp: f64,
    /// Derivative gain, N·m·s/rad.
    pub kd: f64,
    /// Saturation torque, N·m.
    pub torque_limit: f64,
    /// No drive torque is produced past this joint speed, rad/s.
    pub velocity_limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactParams {
    /// Normal penalty stiffness, N/m.
    pub stiffness: f64,
    /// Normal penalty damping, N·s/m.
    pub damping: f64,
    /// Coulomb coefficient.
    pub friction_coeff: f64,
    /// Viscous slope of the regularized friction law near zero slip, N·s/m.
    pub slip_damping: f64,
}

/// Reduced quadruped: a rigid box torso and, per leg, a point mass at the knee
/// (upper link) and one at the foot tip (lower link).
///
/// Leg order is front-left, front-right, back-left, back-right; joint vector
/// order is `[hip, knee]` per leg in that order. The hip axis is the torso's
/// vertical axis, the knee axis is horizontal and perpendicular to the upper
/// link. A knee angle of 0 points the lower link straight down, positive
/// angles swing the foot outward and up.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyModel {
    pub torso_half_extents: Vector3<f64>,
    /// Magnitudes of the hip mount offset from the torso centre; the x/y
    /// signs come from the leg's quadrant.
    pub hip_offset: Vector3<f64>,
    pub upper_leg_length: f64,
    pub lower_leg_length: f64,
    pub torso_mass: f64,
    pub upper_link_mass: f64,
    pub lower_link_mass: f64,
    pub servo: ServoParams,
    pub hip_limits: JointLimits,
    pub knee_limits: JointLimits,
    pub contact: ContactParams,
    /// Gravitational acceleration magnitude, m/s², acting along −z.
    pub gravity: f64,
    /// Fixed integration substep, s.
    pub substep: f64,
}

impl Default for BodyModel {
    fn default() -> Self {
        Self {
            torso_half_extents: Vector3::new(0.08, 0.08, 0.02),
            hip_offset: Vector3::new(0.06, 0.06, -0.02),
            upper_leg_length: 0.06,
            lower_leg_length: 0.10,
            torso_mass: 0.310,
            upper_link_mass: 0.050,
            lower_link_mass: 0.050,
            servo: ServoParams {
                kp: 8.0,
                kd: 0.1,
                torque_limit: 0.75,
                velocity_limit: 6.0,
            },
            hip_limits: JointLimits {
                lower: -45f64.to_radians(),
                upper: 45f64.to_radians(),
            },
            knee_limits: JointLimits {
                lower: 10f64.to_radians(),
                upper: 100f64.to_radians(),
            },
            contact: ContactParams {
                stiffness: 5000.0,
                damping: 20.0,
                friction_coeff: 0.8,
                slip_damping: 40.0,
            },
            gravity: 9.81,
            substep: 0.001,
        }
    }
}

impl BodyModel {
    pub fn total_mass(&self) -> f64 {
        self.torso_mass + NUM_LEGS as f64 * (self.upper_link_mass + self.lower_link_mass)
    }

    /// Limits of joint `j` in the 8-vector.
    pub fn joint_limits(&self, joint: usize) -> JointLimits {
        if joint % 2 == 0 {
            self.hip_limits
        } else {
            self.knee_limits
        }
    }

    /// Principal moments of the torso box about its centre, body frame.
    pub fn torso_inertia(&self) -> Vector3<f64> {
        let (a, b, c) = (
            2.0 * self.torso_half_extents.x,
            2.0 * self.torso_half_extents.y,
            2.0 * self.torso_half_extents.z,
        );
        let k = self.torso_mass / 12.0;
        Vector3::new(k * (b * b + c * c), k * (a * a + c * c), k * (a * a + b * b))
    }

    /// Parse a physics config from text. Absent optional keys keep defaults.
    pub fn from_config_str(text: &str) -> Result<Self, PhysicsError> {
        let mut model = BodyModel::default();
        let mut saw_model_key = false;
        let mut total_mass: Option<f64> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| PhysicsError::Config {
                key: line.to_string(),
                reason: format!("line {line_no}: expected `key = value`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key == "model" {
                if value != "realant" {
                    return Err(PhysicsError::Config {
                        key: key.into(),
                        reason: format!("unsupported model `{value}` (expected `realant`)"),
                    });
                }
                saw_model_key = true;
                continue;
            }
            let number: f64 = value.parse().map_err(|_| PhysicsError::Config {
                key: key.into(),
                reason: format!("line {line_no}: `{value}` is not a number"),
            })?;
            if !number.is_finite() {
                return Err(PhysicsError::Config {
                    key: key.into(),
                    reason: "must be finite".into(),
                });
            }
            let slot: &mut f64 = match key {
                "torso_half_x" => &mut model.torso_half_extents.x,
                "torso_half_y" => &mut model.torso_half_extents.y,
                "torso_half_z" => &mut model.torso_half_extents.z,
                "hip_offset_x" => &mut model.hip_offset.x,
                "hip_offset_y" => &mut model.hip_offset.y,
                "hip_offset_z" => &mut model.hip_offset.z,
                "upper_leg_length" => &mut model.upper_leg_length,
                "lower_leg_length" => &mut model.lower_leg_length,
                "torso_mass" => &mut model.torso_mass,
                "upper_link_mass" => &mut model.upper_link_mass,
                "lower_link_mass" => &mut model.lower_link_mass,
                "servo_kp" => &mut model.servo.kp,
                "servo_kd" => &mut model.servo.kd,
                "torque_limit" => &mut model.servo.torque_limit,
                "velocity_limit" => &mut model.servo.velocity_limit,
                "hip_lower" => &mut model.hip_limits.lower,
                "hip_upper" => &mut model.hip_limits.upper,
                "knee_lower" => &mut model.knee_limits.lower,
                "knee_upper" => &mut model.knee_limits.upper,
                "contact_stiffness" => &mut model.contact.stiffness,
                "contact_damping" => &mut model.contact.damping,
                "friction_coeff" => &mut model.contact.friction_coeff,
                "slip_damping" => &mut model.contact.slip_damping,
                "gravity" => &mut model.gravity,
                "substep" => &mut model.substep,
                "total_mass" => {
                    total_mass = Some(number);
                    continue;
                }
                other => {
                    return Err(PhysicsError::Config {
                        key: other.into(),
                        reason: format!("line {line_no}: unknown key"),
                    })
                }
            };
            *slot = number;
        }

        if !saw_model_key {
            return Err(PhysicsError::Config {
                key: "model".into(),
                reason: "missing mandatory key".into(),
            });
        }
        model.validate()?;
        if let Some(expected) = total_mass {
            if (model.total_mass() - expected).abs() > 1e-9 {
                return Err(PhysicsError::Config {
                    key: "total_mass".into(),
                    reason: format!(
                        "link masses sum to {} kg, configured total is {} kg",
                        model.total_mass(),
                        expected
                    ),
                });
            }
        }
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), PhysicsError> {
        let positive = [
            ("torso_half_x", self.torso_half_extents.x),
            ("torso_half_y", self.torso_half_extents.y),
            ("torso_half_z", self.torso_half_extents.z),
            ("upper_leg_length", self.upper_leg_length),
            ("lower_leg_length", self.lower_leg_length),
            ("torso_mass", self.torso_mass),
            ("upper_link_mass", self.upper_link_mass),
            ("lower_link_mass", self.lower_link_mass),
            ("torque_limit", self.servo.torque_limit),
            ("velocity_limit", self.servo.velocity_limit),
            ("contact_stiffness", self.contact.stiffness),
            ("substep", self.substep),
        ];
        for (key, value) in positive {
            if !(value > 0.0) {
                return Err(PhysicsError::Config {
                    key: key.into(),
                    reason: format!("{key} must be positive"),
                });
            }
        }
        let non_negative = [
            ("servo_kp", self.servo.kp),
            ("servo_kd", self.servo.kd),
            ("contact_damping", self.contact.damping),
            ("friction_coeff", self.contact.friction_coeff),
            ("slip_damping", self.contact.slip_damping),
            ("gravity", self.gravity),
        ];
        for (key, value) in non_negative {
            if !(value >= 0.0) {
                return Err(PhysicsError::Config {
                    key: key.into(),
                    reason: format!("{key} must be non-negative"),
                });
            }
        }
        for (key, limits) in [("hip", self.hip_limits), ("knee", self.knee_limits)] {
            if !(limits.lower < limits.upper) {
                return Err(PhysicsError::Config {
                    key: format!("{key}_lower"),
                    reason: format!("{key}_lower must be below {key}_upper"),
                });
            }
        }
        Ok(())
    }

    /// Stable text dump of the resolved model, one `key = value` per line.
    /// The output parses back through [`BodyModel::from_config_str`].
    pub fn summary(&self) -> String {
        let mut out = String::from("model = realant\n");
        let rows: [(&str, f64); 26] = [
            ("torso_half_x", self.torso_half_extents.x),
            ("torso_half_y", self.torso_half_extents.y),
            ("torso_half_z", self.torso_half_extents.z),
            ("hip_offset_x", self.hip_offset.x),
            ("hip_offset_y", self.hip_offset.y),
            ("hip_offset_z", self.hip_offset.z),
            ("upper_leg_length", self.upper_leg_length),
            ("lower_leg_length", self.lower_leg_length),
            ("torso_mass", self.torso_mass),
            ("upper_link_mass", self.upper_link_mass),
            ("lower_link_mass", self.lower_link_mass),
            ("total_mass", self.total_mass()),
            ("servo_kp", self.servo.kp),
            ("servo_kd", self.servo.kd),
            ("torque_limit", self.servo.torque_limit),
            ("velocity_limit", self.servo.velocity_limit),
            ("hip_lower", self.hip_limits.lower),
            ("hip_upper", self.hip_limits.upper),
            ("knee_lower", self.knee_limits.lower),
            ("knee_upper", self.knee_limits.upper),
            ("contact_stiffness", self.contact.stiffness),
            ("contact_damping", self.contact.damping),
            ("friction_coeff", self.contact.friction_coeff),
            ("slip_damping", self.contact.slip_damping),
            ("gravity", self.gravity),
            ("substep", self.substep),
        ];
        for (key, value) in rows {
            let _ = writeln!(out, "{key} = {value:?}");
        }
        out
    }
}

/// Read and parse a physics config file.
pub fn load_model(path: &Path) -> Result<BodyModel, PhysicsError> {
    let text = std::fs::read_to_string(path).map_err(|e| PhysicsError::Config {
        key: path.display().to_string(),
        reason: e.to_string(),
    })?;
    BodyModel::from_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_sum_to_total_mass() {
        let m = BodyModel::from_config_str("model = realant\n").unwrap();
        assert!((m.total_mass() - DEFAULT_TOTAL_MASS).abs() < 1e-9);
        assert_eq!(m, BodyModel::default());
    }

    #[test]
    fn zero_torso_mass_is_rejected() {
        let err = BodyModel::from_config_str("model = realant\ntorso_mass = 0\n").unwrap_err();
        assert!(err.to_string().contains("torso_mass must be positive"), "{err}");
    }

    #[test]
    fn missing_model_key_is_rejected() {
        let err = BodyModel::from_config_str("friction_coeff = 0.9\n").unwrap_err();
        assert!(err.to_string().contains("model"), "{err}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = BodyModel::from_config_str("model = realant\nwheel_count = 4\n").unwrap_err();
        assert!(err.to_string().contains("wheel_count"), "{err}");
    }

    #[test]
    fn friction_override_shows_in_summary() {
        let m = BodyModel::from_config_str("model = realant\nfriction_coeff = 0.9 # vinyl\n").unwrap();
        assert!(m.summary().contains("friction_coeff = 0.9\n"));
    }

    #[test]
    fn inconsistent_total_mass_is_rejected() {
        let err =
            BodyModel::from_config_str("model = realant\ntotal_mass = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("total_mass"));
    }

    #[test]
    fn inverted_limits_are_rejected() {
        let err = BodyModel::from_config_str("model = realant\nknee_lower = 2.0\n").unwrap_err();
        assert!(err.to_string().contains("knee_lower"));
    }

    #[test]
    fn summary_golden() {
        let golden = "\
model = realant
torso_half_x = 0.08
torso_half_y = 0.08
torso_half_z = 0.02
hip_offset_x = 0.06
hip_offset_y = 0.06
hip_offset_z = -0.02
upper_leg_length = 0.06
lower_leg_length = 0.1
torso_mass = 0.31
upper_link_mass = 0.05
lower_link_mass = 0.05
total_mass = 0.71
servo_kp = 8.0
servo_kd = 0.1
torque_limit = 0.75
velocity_limit = 6.0
hip_lower = -0.7853981633974483
hip_upper = 0.7853981633974483
knee_lower = 0.17453292519943295
knee_upper = 1.7453292519943295
contact_stiffness = 5000.0
contact_damping = 20.0
friction_coeff = 0.8
slip_damping = 40.0
gravity = 9.81
substep = 0.001
";
        assert_eq!(BodyModel::default().summary(), golden);
        let reparsed = BodyModel::from_config_str(golden).unwrap();
        assert_eq!(reparsed, BodyModel::default());
    }
}

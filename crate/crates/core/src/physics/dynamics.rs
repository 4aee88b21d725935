//! Generalized-coordinate dynamics of the reduced quadruped.
//!
//! Coordinates are the torso pose (position + unit quaternion) and the eight
//! joint angles; velocities are the torso's world-frame linear and angular
//! velocity plus joint rates (14 in total). Each substep assembles the mass
//! matrix from the torso inertia and the per-leg point masses, projects
//! gravity, penalty contact and servo torques onto the coordinates, and
//! solves for accelerations with a Cholesky factorization.
//!
//! Time stepping is the symplectic (semi-implicit) Euler scheme in its
//! kick-drift-kick arrangement; joint limit stops are enforced by projection
//! with plastic impulses.

use nalgebra::{Cholesky, Matrix3, SMatrix, SVector, UnitQuaternion, Vector3};

use super::model::{BodyModel, NUM_JOINTS, NUM_LEGS};
use super::state::{mirror_command, RobotState, ServoCommand};
use super::PhysicsError;

const DOF: usize = 6 + NUM_JOINTS;
type GenVector = SVector<f64, DOF>;
type GenMatrix = SMatrix<f64, DOF, DOF>;

/// Speeds above which the state is treated as diverged, m/s or rad/s.
const DIVERGENCE_SPEED: f64 = 1.0e3;

/// Quadrant signs of the legs: front-left, front-right, back-left, back-right.
pub const LEG_SIGNS: [(f64, f64); NUM_LEGS] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

#[derive(Debug, Clone, Copy)]
pub enum Actuation<'a> {
    Servo(&'a ServoCommand),
    /// Motors unpowered: no joint torque at all.
    Off,
}

/// Position-servo torque: saturated PD, with no drive past the speed limit.
pub fn servo_torque(target: f64, angle: f64, velocity: f64, model: &BodyModel) -> f64 {
    let s = &model.servo;
    let tau = (s.kp * (target - angle) - s.kd * velocity).clamp(-s.torque_limit, s.torque_limit);
    if velocity.abs() > s.velocity_limit && tau * velocity > 0.0 {
        0.0
    } else {
        tau
    }
}

/// Body-frame knee and foot positions of one leg with their first and second
/// partial derivatives with respect to (hip, knee).
#[derive(Debug, Clone, Copy)]
pub(crate) struct LegKinematics {
    pub knee: Vector3<f64>,
    pub knee_dh: Vector3<f64>,
    pub knee_dhh: Vector3<f64>,
    pub foot: Vector3<f64>,
    pub foot_dh: Vector3<f64>,
    pub foot_dk: Vector3<f64>,
    pub foot_dhh: Vector3<f64>,
    pub foot_dhk: Vector3<f64>,
    pub foot_dkk: Vector3<f64>,
}

pub(crate) fn leg_kinematics(model: &BodyModel, leg: usize, hip: f64, knee: f64) -> LegKinematics {
    let (sx, sy) = LEG_SIGNS[leg];
    let mount = Vector3::new(sx * model.hip_offset.x, sy * model.hip_offset.y, model.hip_offset.z);
    let heading = sy.atan2(sx) + hip;
    let (sh, ch) = heading.sin_cos();
    let radial = Vector3::new(ch, sh, 0.0);
    let tangent = Vector3::new(-sh, ch, 0.0);
    let up = Vector3::z();
    let (sk, ck) = knee.sin_cos();
    let l1 = model.upper_leg_length;
    let l2 = model.lower_leg_length;
    let reach = l1 + l2 * sk;

    LegKinematics {
        knee: mount + radial * l1,
        knee_dh: tangent * l1,
        knee_dhh: -radial * l1,
        foot: mount + radial * reach - up * (l2 * ck),
        foot_dh: tangent * reach,
        foot_dk: radial * (l2 * ck) + up * (l2 * sk),
        foot_dhh: -radial * reach,
        foot_dhk: tangent * (l2 * ck),
        foot_dkk: -radial * (l2 * sk) + up * (l2 * ck),
    }
}

/// Body-frame corners of the torso box.
pub(crate) fn torso_corners(model: &BodyModel) -> [Vector3<f64>; 8] {
    let h = model.torso_half_extents;
    let mut out = [Vector3::zeros(); 8];
    let mut i = 0;
    for sz in [1.0, -1.0] {
        for (sx, sy) in LEG_SIGNS {
            out[i] = Vector3::new(sx * h.x, sy * h.y, sz * h.z);
            i += 1;
        }
    }
    out
}

/// Penalty ground reaction at a world point with world velocity.
pub fn contact_force(model: &BodyModel, position: &Vector3<f64>, velocity: &Vector3<f64>) -> Vector3<f64> {
    if position.z >= 0.0 {
        return Vector3::zeros();
    }
    let c = &model.contact;
    let normal = c.stiffness * (-position.z) - c.damping * velocity.z;
    if normal <= 0.0 {
        return Vector3::zeros();
    }
    let mut fx = -c.slip_damping * velocity.x;
    let mut fy = -c.slip_damping * velocity.y;
    let cap = c.friction_coeff * normal;
    let mag = fx.hypot(fy);
    if mag > cap {
        let s = cap / mag;
        fx *= s;
        fy *= s;
    }
    Vector3::new(fx, fy, normal)
}

/// World positions of every point mass (knee, foot per leg).
pub(crate) fn point_mass_positions(model: &BodyModel, state: &RobotState) -> [(f64, Vector3<f64>); 2 * NUM_LEGS] {
    let r = state.torso_orientation;
    let mut out = [(0.0, Vector3::zeros()); 2 * NUM_LEGS];
    for leg in 0..NUM_LEGS {
        let k = leg_kinematics(model, leg, state.joint_angles[2 * leg], state.joint_angles[2 * leg + 1]);
        out[2 * leg] = (model.upper_link_mass, state.torso_position + r * k.knee);
        out[2 * leg + 1] = (model.lower_link_mass, state.torso_position + r * k.foot);
    }
    out
}

/// World positions of every contact point: torso corners, then knee and foot per leg.
pub fn contact_points(model: &BodyModel, state: &RobotState) -> Vec<Vector3<f64>> {
    let r = state.torso_orientation;
    let mut pts: Vec<Vector3<f64>> = torso_corners(model)
        .iter()
        .map(|c| state.torso_position + r * c)
        .collect();
    pts.extend(point_mass_positions(model, state).iter().map(|(_, p)| *p));
    pts
}

/// Deepest ground penetration over all contact points, m (0 if none).
pub fn max_penetration(model: &BodyModel, state: &RobotState) -> f64 {
    contact_points(model, state)
        .iter()
        .map(|p| (-p.z).max(0.0))
        .fold(0.0, f64::max)
}

fn accumulate_point(
    m_mat: &mut GenMatrix,
    q_vec: &mut GenVector,
    cols: &[Vector3<f64>; 8],
    idx: &[usize; 8],
    n_cols: usize,
    mass: f64,
    force: &Vector3<f64>,
) {
    for a in 0..n_cols {
        q_vec[idx[a]] += cols[a].dot(force);
        if mass != 0.0 {
            for b in 0..n_cols {
                m_mat[(idx[a], idx[b])] += mass * cols[a].dot(&cols[b]);
            }
        }
    }
}

fn accelerations(model: &BodyModel, state: &RobotState, actuation: Actuation<'_>) -> Option<GenVector> {
    let rot: Matrix3<f64> = *state.torso_orientation.to_rotation_matrix().matrix();
    let v = state.torso_linear_velocity;
    let w = state.torso_angular_velocity;
    let g = Vector3::new(0.0, 0.0, -model.gravity);

    let mut m_mat = GenMatrix::zeros();
    let mut q_vec = GenVector::zeros();

    let inertia_world = rot * Matrix3::from_diagonal(&model.torso_inertia()) * rot.transpose();
    for i in 0..3 {
        m_mat[(i, i)] += model.torso_mass;
        q_vec[i] += model.torso_mass * g[i];
        for j in 0..3 {
            m_mat[(3 + i, 3 + j)] += inertia_world[(i, j)];
        }
    }
    let gyro = w.cross(&(inertia_world * w));
    for i in 0..3 {
        q_vec[3 + i] -= gyro[i];
    }

    let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
    let mut cols = [Vector3::zeros(); 8];
    cols[..3].copy_from_slice(&axes);

    for corner in torso_corners(model) {
        let rho = rot * corner;
        let pos = state.torso_position + rho;
        if pos.z >= 0.0 {
            continue;
        }
        let vel = v + w.cross(&rho);
        let force = contact_force(model, &pos, &vel);
        for k in 0..3 {
            cols[3 + k] = axes[k].cross(&rho);
        }
        let idx = [0, 1, 2, 3, 4, 5, 0, 0];
        accumulate_point(&mut m_mat, &mut q_vec, &cols, &idx, 6, 0.0, &force);
    }

    for leg in 0..NUM_LEGS {
        let (jh, jk) = (2 * leg, 2 * leg + 1);
        let (qh, qk) = (state.joint_angles[jh], state.joint_angles[jk]);
        let (dh, dk) = (state.joint_velocities[jh], state.joint_velocities[jk]);
        let kin = leg_kinematics(model, leg, qh, qk);
        let idx = [0, 1, 2, 3, 4, 5, 6 + jh, 6 + jk];

        // (mass, r, dr/dh, dr/dk, quadratic-velocity term in body frame)
        let points = [
            (model.upper_link_mass, kin.knee, kin.knee_dh, Vector3::zeros(), kin.knee_dhh * (dh * dh)),
            (
                model.lower_link_mass,
                kin.foot,
                kin.foot_dh,
                kin.foot_dk,
                kin.foot_dhh * (dh * dh) + kin.foot_dhk * (2.0 * dh * dk) + kin.foot_dkk * (dk * dk),
            ),
        ];
        for (mass, r_body, r_dh, r_dk, r_quad) in points {
            let rho = rot * r_body;
            let col_h = rot * r_dh;
            let col_k = rot * r_dk;
            let rel_vel = col_h * dh + col_k * dk;
            let vel = v + w.cross(&rho) + rel_vel;
            let pos = state.torso_position + rho;
            let bias = w.cross(&w.cross(&rho)) + w.cross(&rel_vel) * 2.0 + rot * r_quad;
            let force = g * mass + contact_force(model, &pos, &vel) - bias * mass;
            for k in 0..3 {
                cols[3 + k] = axes[k].cross(&rho);
            }
            cols[6] = col_h;
            cols[7] = col_k;
            accumulate_point(&mut m_mat, &mut q_vec, &cols, &idx, 8, mass, &force);
        }
    }

    if let Actuation::Servo(cmd) = actuation {
        for j in 0..NUM_JOINTS {
            q_vec[6 + j] += servo_torque(
                cmd.targets[j],
                state.joint_angles[j],
                state.joint_velocities[j],
                model,
            );
        }
    }

    let chol = Cholesky::new(m_mat)?;
    Some(chol.solve(&q_vec))
}

fn kick(state: &mut RobotState, acc: &GenVector, h: f64) {
    for i in 0..3 {
        state.torso_linear_velocity[i] += acc[i] * h;
        state.torso_angular_velocity[i] += acc[3 + i] * h;
    }
    for j in 0..NUM_JOINTS {
        state.joint_velocities[j] += acc[6 + j] * h;
    }
}

/// Generalized mass matrix alone (used by the joint-stop impulses).
fn mass_matrix(model: &BodyModel, state: &RobotState) -> GenMatrix {
    let rot: Matrix3<f64> = *state.torso_orientation.to_rotation_matrix().matrix();
    let mut m_mat = GenMatrix::zeros();
    let inertia_world = rot * Matrix3::from_diagonal(&model.torso_inertia()) * rot.transpose();
    for i in 0..3 {
        m_mat[(i, i)] += model.torso_mass;
        for j in 0..3 {
            m_mat[(3 + i, 3 + j)] += inertia_world[(i, j)];
        }
    }
    let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
    let mut cols = [Vector3::zeros(); 8];
    cols[..3].copy_from_slice(&axes);
    let mut sink = GenVector::zeros();
    for leg in 0..NUM_LEGS {
        let (jh, jk) = (2 * leg, 2 * leg + 1);
        let kin = leg_kinematics(model, leg, state.joint_angles[jh], state.joint_angles[jk]);
        let idx = [0, 1, 2, 3, 4, 5, 6 + jh, 6 + jk];
        for (mass, r, r_dh, r_dk) in [
            (model.upper_link_mass, kin.knee, kin.knee_dh, Vector3::zeros()),
            (model.lower_link_mass, kin.foot, kin.foot_dh, kin.foot_dk),
        ] {
            let rho = rot * r;
            for k in 0..3 {
                cols[3 + k] = axes[k].cross(&rho);
            }
            cols[6] = rot * r_dh;
            cols[7] = rot * r_dk;
            accumulate_point(&mut m_mat, &mut sink, &cols, &idx, 8, mass, &Vector3::zeros());
        }
    }
    m_mat
}

fn velocity_vector(state: &RobotState) -> GenVector {
    let mut u = GenVector::zeros();
    for i in 0..3 {
        u[i] = state.torso_linear_velocity[i];
        u[3 + i] = state.torso_angular_velocity[i];
    }
    for j in 0..NUM_JOINTS {
        u[6 + j] = state.joint_velocities[j];
    }
    u
}

fn set_velocity_vector(state: &mut RobotState, u: &GenVector) {
    for i in 0..3 {
        state.torso_linear_velocity[i] = u[i];
        state.torso_angular_velocity[i] = u[3 + i];
    }
    for j in 0..NUM_JOINTS {
        state.joint_velocities[j] = u[6 + j];
    }
}

/// Hard stops: clamp angles into their interval and cancel outward joint
/// velocity with plastic impulses, so the stop never adds kinetic energy.
fn enforce_limits(model: &BodyModel, state: &mut RobotState) {
    // Outward direction per joint at a stop: -1 at the lower, +1 at the upper.
    let mut stops = [0.0f64; NUM_JOINTS];
    let mut any = false;
    for j in 0..NUM_JOINTS {
        let lim = model.joint_limits(j);
        let q = &mut state.joint_angles[j];
        if *q <= lim.lower {
            *q = lim.lower;
            stops[j] = -1.0;
        } else if *q >= lim.upper {
            *q = lim.upper;
            stops[j] = 1.0;
        }
        any |= stops[j] != 0.0 && stops[j] * state.joint_velocities[j] > 0.0;
    }
    if !any {
        return;
    }
    let Some(chol) = Cholesky::new(mass_matrix(model, state)) else {
        for j in 0..NUM_JOINTS {
            if stops[j] * state.joint_velocities[j] > 0.0 {
                state.joint_velocities[j] = 0.0;
            }
        }
        return;
    };
    let inv = chol.inverse();
    let mut u = velocity_vector(state);
    // Projected Gauss-Seidel on the active stops; each impulse only removes energy.
    let mut impulses = [0.0f64; NUM_JOINTS];
    for _ in 0..20 {
        for j in 0..NUM_JOINTS {
            if stops[j] == 0.0 {
                continue;
            }
            let col = 6 + j;
            let w = inv[(col, col)];
            let delta_raw = -u[col] / w;
            // Impulses may only push inward: λ·stop <= 0 accumulated.
            let total = impulses[j] + delta_raw;
            let total = if stops[j] > 0.0 { total.min(0.0) } else { total.max(0.0) };
            let delta = total - impulses[j];
            impulses[j] = total;
            if delta != 0.0 {
                u += inv.column(col) * delta;
            }
        }
    }
    set_velocity_vector(state, &u);
}

fn drift(model: &BodyModel, state: &mut RobotState, h: f64) {
    state.torso_position += state.torso_linear_velocity * h;
    let spin = UnitQuaternion::from_scaled_axis(state.torso_angular_velocity * h);
    state.torso_orientation = spin * state.torso_orientation;
    state.torso_orientation.renormalize();
    for j in 0..NUM_JOINTS {
        state.joint_angles[j] += state.joint_velocities[j] * h;
    }
    enforce_limits(model, state);
}

fn is_sane(state: &RobotState) -> bool {
    state.is_finite()
        && state.torso_linear_velocity.norm() < DIVERGENCE_SPEED
        && state.torso_angular_velocity.norm() < DIVERGENCE_SPEED
        && state.joint_velocities.iter().all(|v| v.abs() < DIVERGENCE_SPEED)
}

/// Average of two states, exactly commutative in its arguments.
fn midpoint_state(a: &RobotState, b: &RobotState) -> RobotState {
    let mean = |x: f64, y: f64| 0.5 * (x + y);
    let (qa, qb) = (a.torso_orientation.quaternion(), b.torso_orientation.quaternion());
    RobotState {
        torso_position: a.torso_position.zip_map(&b.torso_position, mean),
        torso_orientation: UnitQuaternion::new_normalize(qa.coords.zip_map(&qb.coords, mean).into()),
        torso_linear_velocity: a.torso_linear_velocity.zip_map(&b.torso_linear_velocity, mean),
        torso_angular_velocity: a.torso_angular_velocity.zip_map(&b.torso_angular_velocity, mean),
        joint_angles: std::array::from_fn(|j| mean(a.joint_angles[j], b.joint_angles[j])),
        joint_velocities: std::array::from_fn(|j| mean(a.joint_velocities[j], b.joint_velocities[j])),
        sim_time: a.sim_time,
    }
}

/// Advance `dt_control` seconds with explicit actuation.
///
/// The result is the mean of the integrated step and the mirror image of the
/// step taken from the mirrored state, so mirrored inputs give exactly
/// mirrored outputs at any horizon instead of drifting apart by round-off.
pub fn step_with(
    model: &BodyModel,
    state: &RobotState,
    actuation: Actuation<'_>,
    dt_control: f64,
) -> Result<RobotState, PhysicsError> {
    let direct = integrate(model, state, actuation, dt_control)?;
    let mirrored_cmd;
    let mirrored_actuation = match actuation {
        Actuation::Servo(cmd) => {
            mirrored_cmd = mirror_command(cmd);
            Actuation::Servo(&mirrored_cmd)
        }
        Actuation::Off => Actuation::Off,
    };
    let reflected = integrate(model, &state.mirror(), mirrored_actuation, dt_control).map_err(|e| match e {
        PhysicsError::Diverged { .. } => PhysicsError::Diverged {
            last_valid: Box::new(state.clone()),
        },
        other => other,
    })?;
    Ok(midpoint_state(&direct, &reflected.mirror()))
}

fn integrate(
    model: &BodyModel,
    state: &RobotState,
    actuation: Actuation<'_>,
    dt_control: f64,
) -> Result<RobotState, PhysicsError> {
    let ratio = dt_control / model.substep;
    let substeps = ratio.round();
    if substeps < 1.0 || (ratio - substeps).abs() > 1e-9 {
        return Err(PhysicsError::Timestep {
            dt: dt_control,
            substep: model.substep,
        });
    }
    let clamped;
    let actuation = match actuation {
        Actuation::Servo(cmd) => {
            clamped = cmd.clamped(model);
            Actuation::Servo(&clamped)
        }
        Actuation::Off => Actuation::Off,
    };
    let diverged = || PhysicsError::Diverged {
        last_valid: Box::new(state.clone()),
    };

    let h = model.substep;
    let mut s = state.clone();
    let mut acc = accelerations(model, &s, actuation).ok_or_else(diverged)?;
    for _ in 0..substeps as usize {
        kick(&mut s, &acc, 0.5 * h);
        drift(model, &mut s, h);
        acc = accelerations(model, &s, actuation).ok_or_else(diverged)?;
        kick(&mut s, &acc, 0.5 * h);
        enforce_limits(model, &mut s);
        if !is_sane(&s) {
            return Err(diverged());
        }
    }
    s.sim_time = state.sim_time + dt_control;
    Ok(s)
}

/// Advance one control period toward the commanded set-points.
pub fn step(
    model: &BodyModel,
    state: &RobotState,
    cmd: &ServoCommand,
    dt_control: f64,
) -> Result<RobotState, PhysicsError> {
    step_with(model, state, Actuation::Servo(cmd), dt_control)
}

/// Kinetic plus gravitational potential energy (ground plane at z = 0), J.
pub fn total_energy(model: &BodyModel, state: &RobotState) -> f64 {
    let rot: Matrix3<f64> = *state.torso_orientation.to_rotation_matrix().matrix();
    let inertia_world = rot * Matrix3::from_diagonal(&model.torso_inertia()) * rot.transpose();
    let v = state.torso_linear_velocity;
    let w = state.torso_angular_velocity;
    let mut energy = 0.5 * model.torso_mass * v.norm_squared()
        + 0.5 * w.dot(&(inertia_world * w))
        + model.torso_mass * model.gravity * state.torso_position.z;
    for leg in 0..NUM_LEGS {
        let (jh, jk) = (2 * leg, 2 * leg + 1);
        let kin = leg_kinematics(model, leg, state.joint_angles[jh], state.joint_angles[jk]);
        let (dh, dk) = (state.joint_velocities[jh], state.joint_velocities[jk]);
        for (mass, r, rel) in [
            (model.upper_link_mass, kin.knee, kin.knee_dh * dh),
            (model.lower_link_mass, kin.foot, kin.foot_dh * dh + kin.foot_dk * dk),
        ] {
            let rho = rot * r;
            let vel = v + w.cross(&rho) + rot * rel;
            energy += 0.5 * mass * vel.norm_squared()
                + mass * model.gravity * (state.torso_position.z + rho.z);
        }
    }
    energy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::state::{mirror_command, quaternion_from_euler, reset, InitialPose};

    #[test]
    fn servo_torque_examples() {
        let m = BodyModel::default();
        assert_eq!(servo_torque(0.3, 0.3, 0.0, &m), 0.0);
        assert_eq!(servo_torque(1.0, 0.0, 0.0, &m), 0.75);
        let t = servo_torque(0.0, 0.05, 0.0, &m);
        assert!((t + 0.4).abs() < 1e-12, "{t}");
    }

    #[test]
    fn servo_stops_driving_past_speed_limit() {
        let m = BodyModel::default();
        assert_eq!(servo_torque(1.0, 0.0, 7.0, &m), 0.0);
        // Braking against the motion is still allowed.
        assert!(servo_torque(-1.0, 0.0, 7.0, &m) < 0.0);
    }

    #[test]
    fn kinematic_derivatives_match_finite_differences() {
        let m = BodyModel::default();
        let (h0, k0, e) = (0.3, 0.7, 1e-6);
        let base = leg_kinematics(&m, 2, h0, k0);
        let ph = leg_kinematics(&m, 2, h0 + e, k0);
        let mh = leg_kinematics(&m, 2, h0 - e, k0);
        let pk = leg_kinematics(&m, 2, h0, k0 + e);
        let mk = leg_kinematics(&m, 2, h0, k0 - e);
        assert!(((ph.foot - mh.foot) / (2.0 * e) - base.foot_dh).norm() < 1e-8);
        assert!(((pk.foot - mk.foot) / (2.0 * e) - base.foot_dk).norm() < 1e-8);
        assert!(((ph.knee - mh.knee) / (2.0 * e) - base.knee_dh).norm() < 1e-8);
        assert!(((ph.foot_dh - mh.foot_dh) / (2.0 * e) - base.foot_dhh).norm() < 1e-8);
        assert!(((pk.foot_dh - mk.foot_dh) / (2.0 * e) - base.foot_dhk).norm() < 1e-8);
        assert!(((pk.foot_dk - mk.foot_dk) / (2.0 * e) - base.foot_dkk).norm() < 1e-8);
    }

    #[test]
    fn ballistic_step_from_rest() {
        let m = BodyModel::default();
        let mut s = reset(&m, &InitialPose::Standing).unwrap();
        s.torso_position.z = 1.0;
        let next = step_with(&m, &s, Actuation::Off, 0.05).unwrap();
        assert!((next.torso_linear_velocity.z + 0.4905).abs() < 1e-6);
        assert!((next.sim_time - 0.05).abs() < 1e-15);
    }

    #[test]
    fn rejects_timestep_not_multiple_of_substep() {
        let m = BodyModel::default();
        let s = reset(&m, &InitialPose::Standing).unwrap();
        assert!(matches!(
            step(&m, &s, &ServoCommand::hold(&s), 0.0505),
            Err(PhysicsError::Timestep { .. })
        ));
    }

    #[test]
    fn divergence_reports_last_valid_state() {
        let m = BodyModel::default();
        let mut s = reset(&m, &InitialPose::Standing).unwrap();
        s.torso_linear_velocity.x = f64::NAN;
        match step(&m, &s, &ServoCommand::hold(&s), 0.05) {
            Err(PhysicsError::Diverged { last_valid }) => {
                assert!(last_valid.torso_linear_velocity.x.is_nan())
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn quaternion_stays_normalized_while_tumbling() {
        let m = BodyModel::default();
        let mut s = reset(&m, &InitialPose::Standing).unwrap();
        s.torso_position.z = 5.0;
        s.torso_angular_velocity = Vector3::new(3.0, -2.0, 5.0);
        for _ in 0..10 {
            s = step_with(&m, &s, Actuation::Off, 0.05).unwrap();
            assert!((s.torso_orientation.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn energy_rest_state_is_potential_only() {
        let m = BodyModel::default();
        let s = reset(&m, &InitialPose::Lying).unwrap();
        let pe: f64 = m.torso_mass * m.gravity * s.torso_position.z
            + point_mass_positions(&m, &s)
                .iter()
                .map(|(mass, p)| mass * m.gravity * p.z)
                .sum::<f64>();
        assert!((total_energy(&m, &s) - pe).abs() < 1e-15);
        let mut raised = s.clone();
        raised.torso_position.z += 0.1;
        let de = total_energy(&m, &raised) - total_energy(&m, &s);
        assert!((de - m.total_mass() * m.gravity * 0.1).abs() < 1e-12);
    }

    #[test]
    fn tumbling_free_flight_conserves_energy() {
        let m = BodyModel::default();
        let mut s = reset(&m, &InitialPose::Standing).unwrap();
        s.torso_position.z = 3.0;
        s.torso_orientation = quaternion_from_euler(0.2, -0.1, 0.4);
        s.torso_angular_velocity = Vector3::new(1.0, -0.5, 2.0);
        s.joint_angles = [0.1, 0.6, -0.2, 0.9, 0.3, 1.1, -0.1, 0.4];
        s.joint_velocities = [0.5, -1.0, 0.3, 0.8, -0.6, 0.2, 0.4, -0.3];
        let e0 = total_energy(&m, &s);
        for _ in 0..10 {
            s = step_with(&m, &s, Actuation::Off, 0.05).unwrap();
            let e = total_energy(&m, &s);
            assert!(((e - e0) / e0).abs() < 1e-3, "{e} vs {e0}");
        }
    }

    #[test]
    fn mirrored_command_mirrors_trajectory_briefly() {
        let m = BodyModel::default();
        let s0 = reset(&m, &InitialPose::Standing).unwrap();
        let cmd = ServoCommand {
            targets: [0.3, 0.5, -0.1, 0.9, 0.2, 1.2, 0.4, 0.3],
        };
        let a = step(&m, &s0, &cmd, 0.05).unwrap();
        let b = step(&m, &s0.mirror(), &mirror_command(&cmd), 0.05).unwrap();
        let am = a.mirror();
        assert!((am.torso_position - b.torso_position).amax() < 1e-12);
    }

    #[test]
    fn joint_stop_never_adds_energy() {
        let m = BodyModel::default();
        let mut s = reset(&m, &InitialPose::Standing).unwrap();
        s.torso_position.z = 3.0;
        s.torso_angular_velocity = Vector3::new(1.0, -0.5, 2.0);
        s.joint_angles[3] = m.knee_limits.upper;
        s.joint_velocities = [0.5, -1.0, 0.3, 2.0, -0.6, 0.2, 0.4, -0.3];
        let before = total_energy(&m, &s);
        enforce_limits(&m, &mut s);
        assert!(s.joint_velocities[3].abs() < 1e-12);
        assert!(total_energy(&m, &s) <= before);
    }
}

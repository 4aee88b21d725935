//! Push a known torso motion through the pose-realism pipeline and compare
//! the observed height and forward velocity with the truth.
//!
//! `cargo run --release --example sensor_pipeline -- [latency_steps] [sigma]`

use realant::physics::{reset, BodyModel, InitialPose, CONTROL_DT};
use realant::rng::{rng_for, stream};
use realant::sensors::{Pipeline, RealismConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let latency = args.next().and_then(|a| a.parse().ok()).unwrap_or(2);
    let sigma = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.01);
    let cfg = RealismConfig {
        latency_steps: latency,
        sigma_xyz: sigma,
        sigma_rpy: sigma,
        ..RealismConfig::default()
    };
    let mut pipeline = Pipeline::new(&cfg, rng_for(7, stream::POSE_NOISE, 0));
    let mut state = reset(&BodyModel::default(), &InitialPose::Standing).expect("valid pose");
    println!("{cfg:?}");
    println!("step,true_z,observed_z,true_vx,observed_vx");
    let (mut sq_z, mut sq_v) = (0.0, 0.0);
    let n = 80;
    for t in 0..n {
        // Forward at 0.2 m/s while bobbing 1 cm at 1 Hz.
        let time = t as f64 * CONTROL_DT;
        state.torso_position.x = 0.2 * time;
        state.torso_position.z = 0.1 + 0.01 * (2.0 * std::f64::consts::PI * time).sin();
        state.torso_linear_velocity.x = 0.2;
        let obs = pipeline.process(&state, t as u64 * 50_000).observation;
        let (z, vx) = (obs.torso_z, obs.torso_velocity[0]);
        if t >= 10 {
            sq_z += (z - state.torso_position.z).powi(2);
            sq_v += (vx - 0.2).powi(2);
        }
        if t % 5 == 0 {
            println!("{t},{:.4},{z:.4},0.2000,{vx:.4}", state.torso_position.z);
        }
    }
    let m = (n - 10) as f64;
    println!("rms height error   {:.4} m", (sq_z / m).sqrt());
    println!("rms velocity error {:.4} m/s", (sq_v / m).sqrt());
}

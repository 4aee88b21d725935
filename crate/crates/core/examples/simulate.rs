//! Drive the walk task with an open-loop trotting pattern and dump the
//! trajectory as CSV.
//!
//! `cargo run --release --example simulate -- [out.csv]`

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter};

use realant::physics::BodyModel;
use realant::sensors::RealismConfig;
use realant::tasks::{write_trajectory_csv, Env, TaskId, TaskSpec, TrajectoryRow, EPISODE_STEPS};

/// Diagonal legs in phase, hips and knees a quarter period apart; 1 Hz.
fn trot(step: usize) -> Vec<f64> {
    let phase = 2.0 * PI * step as f64 * 0.05;
    (0..4)
        .flat_map(|leg| {
            let offset = if leg == 0 || leg == 3 { 0.0 } else { PI };
            let sign = if leg % 2 == 0 { 1.0 } else { -1.0 };
            [sign * 0.6 * (phase + offset).sin(), 0.5 * (phase + offset + PI / 2.0).cos()]
        })
        .collect()
}

fn main() -> io::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "trajectory.csv".into());
    let mut env = Env::new(TaskSpec::new(TaskId::Walk), BodyModel::default(), RealismConfig::default());
    let mut obs = env.reset(1).expect("default pose is valid");
    let mut rows = Vec::with_capacity(EPISODE_STEPS);
    let mut ret = 0.0;
    for step in 0..EPISODE_STEPS {
        let action = trot(step);
        let r = env.step(&action).expect("episode still running");
        ret += r.reward;
        rows.push(TrajectoryRow {
            step,
            action,
            observation: obs,
            reward: r.reward,
            done: r.done,
        });
        obs = r.observation;
        if r.done {
            break;
        }
    }
    let s = env.state();
    println!("steps      {}", rows.len());
    println!("return     {ret:.4}");
    println!("torso x    {:.3} m (speed {:.2} cm/s)", s.torso_position.x, 100.0 * s.torso_position.x / s.sim_time);
    println!("euler      {:.3?}", s.euler());
    write_trajectory_csv(BufWriter::new(File::create(&out)?), &rows)?;
    println!("wrote {out}");
    Ok(())
}

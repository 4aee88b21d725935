//! Run the control, pose and rollout-server processes as threads on
//! loopback, train a few episodes through them and compare with the
//! in-process learner.
//!
//! `cargo run --release --example mesh_loopback -- [episodes] [lockstep|realtime:<accel>]`
//!
//! The `realant train --mode mesh` command does the same with real child
//! processes.

use std::thread;
use std::time::Instant;

use realant::mesh::{
    run_control, run_pose, train_client, ClientConfig, Clock, ControlConfig, Publisher, Replier, RolloutServer,
    ServerConfig, Subscriber,
};
use realant::physics::BodyModel;
use realant::rl::{AlgoConfig, TrainConfig, Trainer};
use realant::tasks::TaskId;

fn start_mesh(clock: Clock) -> String {
    let model = BodyModel::default();
    let bind = || Publisher::bind("127.0.0.1:0").expect("loopback bind");
    let (actions, telemetry, truth, poses) = (bind(), bind(), bind(), bind());
    let addr = |p: &Publisher| p.local_addr().to_string();
    let (actions_at, telemetry_at, truth_at, poses_at) = (addr(&actions), addr(&telemetry), addr(&truth), addr(&poses));

    let control = ControlConfig::new(model.clone(), clock);
    thread::spawn(move || run_control(control, &telemetry, &truth, &Subscriber::connect(&actions_at)));
    thread::spawn(move || run_pose(clock, &Subscriber::connect(&truth_at), &poses));

    let replier = Replier::bind("127.0.0.1:0").expect("loopback bind");
    let server_at = replier.local_addr().expect("bound").to_string();
    let mut server = RolloutServer::new(
        ServerConfig::new(model, clock),
        actions,
        Subscriber::connect(&telemetry_at),
        Subscriber::connect(&poses_at),
    );
    thread::spawn(move || server.serve(&replier));
    server_at
}

fn main() {
    let mut args = std::env::args().skip(1);
    let episodes = args.next().and_then(|a| a.parse().ok()).unwrap_or(12);
    let clock: Clock = args.next().map(|a| a.parse().expect("clock")).unwrap_or(Clock::Lockstep);
    let algo = AlgoConfig {
        updates_per_episode: 20,
        ..AlgoConfig::sac()
    };
    let cfg = TrainConfig::new(TaskId::Walk, algo, episodes, 3);

    let server = start_mesh(clock);
    println!("rollout server on {server} ({clock})");
    let t0 = Instant::now();
    let mut remote = Trainer::new(cfg.clone()).expect("valid config");
    train_client(&mut remote, &ClientConfig::new(&server), |_, r| {
        println!("episode {:>3}  return {:>9.4}  updates {}", r.episode, r.episode_return, r.updates)
    })
    .expect("mesh training");
    println!("mesh: {:.1}s", t0.elapsed().as_secs_f64());

    let t0 = Instant::now();
    let mut local = Trainer::new(cfg).expect("valid config");
    local.run_in_process(|_, _| {});
    println!("in-process: {:.1}s", t0.elapsed().as_secs_f64());
    let same = remote.curve.iter().zip(&local.curve).all(|(a, b)| a.key() == b.key());
    println!("curves identical: {same}");
}

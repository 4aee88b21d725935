//! Evaluate one walk policy on five ground friction coefficients, the
//! simulator's stand-in for walking on different surfaces.
//!
//! `cargo run --release --example friction_sweep -- [checkpoint.rant]`
//!
//! Without a checkpoint a policy is trained for 20 episodes first.

use realant::physics::BodyModel;
use realant::rl::{checkpoint, evaluate, train, AlgoConfig, TrainConfig};
use realant::sensors::RealismConfig;
use realant::tasks::TaskId;

const FRICTIONS: [f64; 5] = [0.4, 0.6, 0.8, 1.0, 1.2];

fn main() {
    let policy = match std::env::args().nth(1) {
        Some(path) => checkpoint::load(path.as_ref()).expect("read checkpoint"),
        None => {
            let cfg = TrainConfig::new(TaskId::Walk, AlgoConfig::td3(), 20, 1);
            train(cfg, |_, r| eprintln!("episode {:>3}  return {:>9.4}", r.episode, r.episode_return))
                .expect("valid config")
                .policy()
        }
    };
    println!("friction,mean_return,std_return,mean_speed_cm_s,diverged_episodes");
    for mu in FRICTIONS {
        let mut model = BodyModel::default();
        model.contact.friction_coeff = mu;
        let r = evaluate(&policy, TaskId::Walk, &model, RealismConfig::default(), 5, 1);
        println!(
            "{mu},{:.4},{:.4},{:.2},{}",
            r.mean_return, r.std_return, r.mean_speed_cm_s, r.diverged_episodes
        );
    }
}

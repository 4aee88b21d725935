//! Train a short walk policy, save it, reload it and evaluate the
//! deterministic policy; then show the architecture check rejecting a
//! mismatched expectation.
//!
//! `cargo run --release --example checkpoint_eval -- [episodes] [checkpoint path]`

use realant::physics::{BodyModel, NUM_JOINTS};
use realant::rl::agent::actor_architecture;
use realant::rl::{checkpoint, evaluate, train, AlgoConfig, TrainConfig};
use realant::sensors::RealismConfig;
use realant::tasks::{TaskId, OBS_DIM};

fn main() {
    let mut args = std::env::args().skip(1);
    let episodes = args.next().and_then(|a| a.parse().ok()).unwrap_or(15);
    let path = args.next().unwrap_or_else(|| "walk.rant".into());
    let cfg = TrainConfig::new(TaskId::Walk, AlgoConfig::td3(), episodes, 2);
    let trainer = train(cfg.clone(), |_, r| println!("episode {:>3}  return {:>9.4}", r.episode, r.episode_return))
        .expect("valid config");
    checkpoint::save(&trainer.policy(), path.as_ref()).expect("write checkpoint");
    println!("saved {path}");

    let policy = checkpoint::load(path.as_ref()).expect("read checkpoint");
    assert_eq!(policy, trainer.policy());
    let r = evaluate(&policy, TaskId::Walk, &BodyModel::default(), RealismConfig::default(), 5, 1);
    println!("eval returns {:.3?}", r.returns);
    println!("mean {:.4} ± {:.4}, speed {:.2} cm/s", r.mean_return, r.std_return, r.mean_speed_cm_s);

    let sparse = AlgoConfig {
        dense: false,
        ..cfg.algo
    };
    let expected = actor_architecture(&sparse, OBS_DIM * cfg.realism.stack_k, NUM_JOINTS);
    match checkpoint::check_compatible(&policy, sparse.algorithm, &expected) {
        Ok(()) => println!("unexpectedly compatible"),
        Err(e) => println!("{e}"),
    }
}

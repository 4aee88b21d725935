//! Train TD3 on the sleep task in-process and print the learning curve.
//!
//! `cargo run --release --example train_sleep -- [episodes] [seed]`

use realant::rl::{train, AlgoConfig, TrainConfig};
use realant::sensors::RealismConfig;
use realant::tasks::TaskId;

fn main() {
    let mut args = std::env::args().skip(1);
    let episodes = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let seed = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);
    let cfg = TrainConfig {
        realism: RealismConfig::clean(),
        ..TrainConfig::new(TaskId::Sleep, AlgoConfig::td3(), episodes, seed)
    };
    println!("episode,return,updates,wallclock_s");
    let t = train(cfg, |_, r| {
        println!("{},{:.4},{},{:.1}", r.episode, r.episode_return, r.updates, r.wallclock_s)
    })
    .expect("valid config");
    let n = t.curve.len();
    let mean = |rows: &[realant::rl::CurveRow]| rows.iter().map(|r| r.episode_return).sum::<f64>() / rows.len() as f64;
    let warm = t.cfg.algo.warmup_episodes.min(n);
    println!("random-policy mean {:.4}", mean(&t.curve[..warm]));
    println!("final-10 mean      {:.4}", mean(&t.curve[n.saturating_sub(10)..]));
}

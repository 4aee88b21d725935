//! A small latency ablation on the sleep task: one TD3 run per latency with
//! shared seeds, printing the final-10 mean return of each arm.
//!
//! `cargo run --release --example ablation -- [episodes] [latencies, e.g. 0,2,6,10]`
//!
//! `realant ablate` runs the full grids and writes per-arm directories.

use realant::rl::{train, AlgoConfig, TrainConfig};
use realant::sensors::RealismConfig;
use realant::tasks::TaskId;

fn main() {
    let mut args = std::env::args().skip(1);
    let episodes: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(30);
    let grid = args.next().unwrap_or_else(|| "0,2,10".into());
    println!("latency_steps,final10_mean_return,best_return");
    for latency in grid.split(',').map(|v| v.trim().parse::<usize>().expect("latency")) {
        let cfg = TrainConfig {
            realism: RealismConfig {
                latency_steps: latency,
                ..RealismConfig::clean()
            },
            ..TrainConfig::new(TaskId::Sleep, AlgoConfig::td3(), episodes, 1)
        };
        let t = train(cfg, |_, _| {}).expect("valid config");
        let tail = &t.curve[t.curve.len().saturating_sub(10)..];
        let mean = tail.iter().map(|r| r.episode_return).sum::<f64>() / tail.len() as f64;
        let best = t.curve.iter().map(|r| r.episode_return).fold(f64::NEG_INFINITY, f64::max);
        println!("{latency},{mean:.4},{best:.4}");
    }
}

//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! `cargo test --release --test acceptance` runs everything (about an hour on
//! one core); `cargo test --release --test acceptance -- 2 5` runs a subset.

use std::collections::HashMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::Vector3;
use rand::{Rng as _, RngCore};
use rand_distr::{Distribution, StandardNormal};

use realant::mesh::{decode_exact, encode, ActionMsg, Message, Status, Telemetry};
use realant::physics::{
    max_penetration, mirror_command, quaternion_from_euler, reset, step, step_with, total_energy, Actuation,
    BodyModel, InitialPose, RobotState, ServoCommand, CONTROL_DT,
};
use realant::rl::agent::actor_architecture;
use realant::rl::losses::{
    critic_loss, soft_actor_loss, soft_targets, td3_actor_loss, td3_targets, temperature_loss, CriticAggregate,
};
use realant::rl::{
    evaluate, run_episode, train, ActionMode, AlgoConfig, Algorithm, Architecture, Batch, CurveRow, EpisodeData, Mlp,
    RolloutRequest, StepRecord, TrainConfig, Trainer,
};
use realant::rng::{rng_for, Rng};
use realant::sensors::{holoborodko_coefficients, Differentiator, PoseSample, RealismConfig};
use realant::tasks::{LocalIo, TaskId, OBS_DIM};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- 1

const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-4;

/// Worst relative error between `grad` and central differences of `loss`.
fn fd_error(params: &[f64], grad: &[f64], loss: impl Fn(&[f64]) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut p = params.to_vec();
    for i in 0..params.len() {
        p[i] = params[i] + FD_STEP;
        let up = loss(&p);
        p[i] = params[i] - FD_STEP;
        let down = loss(&p);
        p[i] = params[i];
        let fd = (up - down) / (2.0 * FD_STEP);
        let scale = grad[i].abs().max(fd.abs()).max(1e-6);
        worst = worst.max((grad[i] - fd).abs() / scale);
    }
    worst
}

fn with_params(net: &Mlp<f64>, p: &[f64]) -> Mlp<f64> {
    Mlp {
        arch: net.arch.clone(),
        params: p.to_vec(),
    }
}

struct Toy {
    det_actor: Mlp<f64>,
    sto_actor: Mlp<f64>,
    critics: Vec<Mlp<f64>>,
    batch: Batch<f64>,
    eps: Vec<f64>,
    smoothing: Vec<f64>,
}

const SD: usize = 4;
const AD: usize = 2;
const B: usize = 5;

fn toy(seed: u64) -> Toy {
    let mut rng = rng_for(seed, 100, 0);
    let uniform = |n: usize, rng: &mut Rng| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    let batch = Batch {
        size: B,
        states: uniform(B * SD, &mut rng),
        actions: uniform(B * AD, &mut rng),
        rewards: uniform(B, &mut rng),
        next_states: uniform(B * SD, &mut rng),
        not_done: (0..B).map(|i| if i == 1 { 0.0 } else { 1.0 }).collect(),
    };
    let eps = (0..B * AD).map(|_| StandardNormal.sample(&mut rng)).collect();
    let smoothing = (0..B * AD)
        .map(|_| {
            let n: f64 = StandardNormal.sample(&mut rng);
            (0.2 * n).clamp(-0.5, 0.5)
        })
        .collect();
    let hidden = [8, 8];
    Toy {
        det_actor: Mlp::init(Architecture::new(SD, &hidden, AD, true), 1.0, &mut rng),
        sto_actor: Mlp::init(Architecture::new(SD, &hidden, 2 * AD, true), 1.0, &mut rng),
        critics: (0..10)
            .map(|_| Mlp::init(Architecture::new(SD + AD, &hidden, 1, true), 1.0, &mut rng))
            .collect(),
        batch,
        eps,
        smoothing,
    }
}

fn gradients() -> Outcome {
    let mut worst: Vec<(&str, f64)> = Vec::new();
    let mut record = |name: &'static str, e: f64| match worst.iter_mut().find(|w| w.0 == name) {
        Some(w) => w.1 = w.1.max(e),
        None => worst.push((name, e)),
    };
    for seed in 0..5 {
        let t = toy(seed);
        let largest = [&t.det_actor, &t.sto_actor, &t.critics[0]].iter().map(|n| n.arch.num_params).max().unwrap();
        ensure(largest <= 500, || format!("toy network has {largest} parameters"))?;
        let c = &t.critics[0];
        let alpha = 0.2;

        let y = td3_targets(&t.det_actor, &t.critics[..2], &t.batch, &t.smoothing, 0.99);
        let (_, g) = critic_loss(c, &t.batch, &y, AD);
        record("td3 critic", fd_error(&c.params, &g, |p| critic_loss(&with_params(c, p), &t.batch, &y, AD).0));

        let a = &t.det_actor;
        let (_, g) = td3_actor_loss(a, c, &t.batch.states, B);
        record("td3 actor", fd_error(&a.params, &g, |p| td3_actor_loss(&with_params(a, p), c, &t.batch.states, B).0));

        let y = soft_targets(&t.sto_actor, t.critics[..2].iter(), &t.batch, &t.eps, alpha, 0.99);
        let (_, g) = critic_loss(c, &t.batch, &y, AD);
        record("sac critic", fd_error(&c.params, &g, |p| critic_loss(&with_params(c, p), &t.batch, &y, AD).0));

        let a = &t.sto_actor;
        let sac = |net: &Mlp<f64>| soft_actor_loss(net, &t.critics[..2], CriticAggregate::Min, &t.batch.states, &t.eps, alpha, B);
        let (_, g, log_probs) = sac(a);
        record("sac actor", fd_error(&a.params, &g, |p| sac(&with_params(a, p)).0));

        let log_alpha = alpha.ln();
        let (_, g) = temperature_loss(log_alpha, &log_probs, -(AD as f64));
        record("sac temperature", fd_error(&[log_alpha], &[g], |p| temperature_loss(p[0], &log_probs, -(AD as f64)).0));

        // REDQ: target over a random 2-subset of 10 critics, actor on their mean.
        let mut rng = rng_for(seed, 101, 0);
        let i = rng.random_range(0..10);
        let j = (i + rng.random_range(1..10)) % 10;
        let y = soft_targets(&t.sto_actor, [&t.critics[i], &t.critics[j]].into_iter(), &t.batch, &t.eps, alpha, 0.99);
        let c = &t.critics[seed as usize];
        let (_, g) = critic_loss(c, &t.batch, &y, AD);
        record("redq critic", fd_error(&c.params, &g, |p| critic_loss(&with_params(c, p), &t.batch, &y, AD).0));

        let redq = |net: &Mlp<f64>| soft_actor_loss(net, &t.critics, CriticAggregate::Mean, &t.batch.states, &t.eps, alpha, B);
        let (_, g, _) = redq(a);
        record("redq actor", fd_error(&a.params, &g, |p| redq(&with_params(a, p)).0));
    }
    let detail = worst.iter().map(|(n, e)| format!("{n} {e:.1e}")).collect::<Vec<_>>().join(", ");
    match worst.iter().find(|w| !(w.1 < FD_TOL)) {
        Some((n, e)) => Err(format!("{n}: relative error {e:.2e} >= {FD_TOL:e}; {detail}")),
        None => Ok(format!("max relative error: {detail}")),
    }
}

// ---------------------------------------------------------------- 2

fn differentiator() -> Outcome {
    let h = 0.05;
    let c = holoborodko_coefficients(7);
    ensure(c == [5.0 / 32.0, 4.0 / 32.0, 1.0 / 32.0], || format!("coefficients {c:?}"))?;
    let mut worst: f64 = 0.0;
    for degree in 0..=2i32 {
        for centre in [-1.3, 0.0, 0.4, 2.0] {
            let mut d = Differentiator::new(7, h);
            let mut est = 0.0;
            for k in -3..=3 {
                let t: f64 = centre + k as f64 * h;
                est = d.push(t.powi(degree));
            }
            let exact = if degree == 0 { 0.0 } else { degree as f64 * centre.powi(degree - 1) };
            worst = worst.max((est - exact).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("monomial error {worst:e}"))?;
    // White-noise gain sqrt(Σ w_i²)/h of each stencil, against the
    // maximal-order central difference on the same seven samples.
    let gain = |half: &[f64]| (2.0 * half.iter().map(|w| w * w).sum::<f64>()).sqrt() / h;
    let smooth = gain(&c);
    let central = gain(&[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0]);
    ensure(smooth < central, || format!("noise gain {smooth} >= central {central}"))?;
    Ok(format!("monomial error {worst:.1e}, noise gain {smooth:.3} vs central {central:.3}"))
}

// ---------------------------------------------------------------- 3

fn structure() -> Outcome {
    ensure(OBS_DIM == 29, || format!("observation dim {OBS_DIM}"))?;
    let cfg = TrainConfig::new(TaskId::Walk, AlgoConfig::td3(), 1, 0);
    ensure(cfg.state_dim() == 116, || format!("stacked dim {}", cfg.state_dim()))?;
    for algo in [Algorithm::Td3, Algorithm::Sac, Algorithm::Redq] {
        let a = AlgoConfig::for_algorithm(algo);
        let arch = actor_architecture(&a, cfg.state_dim(), 8);
        ensure(arch.hidden == [256, 256, 256], || format!("{algo} hidden {:?}", arch.hidden))?;
        for l in 1..arch.hidden.len() {
            let w = arch.layers[l].in_dim();
            ensure(w == 256 + 116, || format!("{algo} layer {} input width {w}", l + 1))?;
        }
        let want = if algo == Algorithm::Redq { 2000 } else { 200 };
        ensure(a.updates_per_episode == want, || format!("{algo} updates {}", a.updates_per_episode))?;
        ensure(a.warmup_episodes == 10, || format!("{algo} warmup {}", a.warmup_episodes))?;
    }
    // Warmup as scheduled by the trainer: ten random episodes, then policy.
    let algo = AlgoConfig {
        updates_per_episode: 1,
        hidden: vec![16, 16, 16],
        ..AlgoConfig::td3()
    };
    let mut modes = Vec::new();
    let t = train(TrainConfig::new(TaskId::Sleep, algo, 11, 0), |t: &Trainer, _: &CurveRow| {
        if !t.finished() {
            modes.push(t.rollout_request().mode)
        }
    })
    .map_err(|e| e.to_string())?;
    let random = 1 + modes.iter().take_while(|m| **m == ActionMode::Random).count();
    ensure(random == 10, || format!("{random} random episodes"))?;
    ensure(t.curve[9].updates == 1 && t.curve[8].updates == 0, || "updates do not start after warmup".into())?;
    Ok("29 / 116 / 256+116 / 2000,200,200 / 10".into())
}

// ---------------------------------------------------------------- 4

fn state_error(a: &RobotState, b: &RobotState) -> f64 {
    let mut e = (a.torso_position - b.torso_position).amax();
    e = e.max((a.torso_linear_velocity - b.torso_linear_velocity).amax());
    e = e.max((a.torso_angular_velocity - b.torso_angular_velocity).amax());
    e = e.max((a.euler() - b.euler()).amax());
    for j in 0..8 {
        e = e.max((a.joint_angles[j] - b.joint_angles[j]).abs());
        e = e.max((a.joint_velocities[j] - b.joint_velocities[j]).abs());
    }
    e
}

fn physics() -> Outcome {
    let m = BodyModel::default();

    // Unpowered tumbling free fall, 1 s.
    let mut s = reset(&m, &InitialPose::Standing).map_err(|e| e.to_string())?;
    s.torso_position.z = 8.0;
    s.torso_orientation = quaternion_from_euler(0.3, -0.2, 0.5);
    s.torso_angular_velocity = Vector3::new(1.5, -1.0, 2.5);
    s.joint_angles = [0.1, 0.6, -0.2, 0.9, 0.3, 1.1, -0.1, 0.5];
    s.joint_velocities = [0.4, -0.5, 0.3, 0.6, -0.4, 0.2, 0.3, -0.3];
    let e0 = total_energy(&m, &s);
    let mut drift: f64 = 0.0;
    for _ in 0..20 {
        s = step_with(&m, &s, Actuation::Off, CONTROL_DT).map_err(|e| e.to_string())?;
        drift = drift.max(((total_energy(&m, &s) - e0) / e0).abs() / s.sim_time);
    }
    ensure(drift < 1e-3, || format!("energy drift {:.3}%/s", 100.0 * drift))?;

    // Mirrored commands from a symmetric start, one 10 s episode with ground contact.
    let mut rng = rng_for(4, 102, 0);
    let mut a = reset(&m, &InitialPose::Standing).map_err(|e| e.to_string())?;
    let mut b = a.mirror();
    let mut mirror_err: f64 = 0.0;
    for _ in 0..200 {
        let mut targets = [0.0; 8];
        for (j, t) in targets.iter_mut().enumerate() {
            *t = m.joint_limits(j).clamp(rng.random_range(-1.0..1.6));
        }
        let cmd = ServoCommand { targets };
        a = step(&m, &a, &cmd, CONTROL_DT).map_err(|e| e.to_string())?;
        b = step(&m, &b, &mirror_command(&cmd), CONTROL_DT).map_err(|e| e.to_string())?;
        mirror_err = mirror_err.max(state_error(&a.mirror(), &b));
    }
    ensure(mirror_err <= 1e-9, || format!("mirror error {mirror_err:e}"))?;

    // Resting on the ground for 3 s under a hold command.
    let mut penetration: f64 = 0.0;
    for pose in [InitialPose::Lying, InitialPose::Standing] {
        let mut s = reset(&m, &pose).map_err(|e| e.to_string())?;
        let hold = ServoCommand::hold(&s);
        for t in 0..60 {
            s = step(&m, &s, &hold, CONTROL_DT).map_err(|e| e.to_string())?;
            if t >= 20 {
                penetration = penetration.max(max_penetration(&m, &s));
            }
        }
    }
    ensure(penetration < 5e-3, || format!("resting penetration {:.2} mm", 1e3 * penetration))?;

    // Seeded repeat of a noisy, latent episode.
    let episode = || {
        let req = RolloutRequest {
            task: TaskId::Walk,
            episode_len: 200,
            mode: ActionMode::Random,
            seed: 77,
            episode: 0,
            realism: RealismConfig::default(),
        };
        let policy = Trainer::new(TrainConfig::new(TaskId::Walk, AlgoConfig::td3(), 1, 3)).unwrap().policy();
        let mut io = LocalIo::new(m.clone());
        let d = run_episode(&mut io, &m, &policy, &req).unwrap();
        (encode(&Message::EpisodeData(d)), io.device.state)
    };
    let (x, sx) = episode();
    let (y, sy) = episode();
    ensure(x == y, || "repeat episode differs".into())?;
    let bits = |s: &RobotState| s.torso_position.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    ensure(bits(&sx) == bits(&sy) && sx == sy, || "repeat final state differs".into())?;

    Ok(format!(
        "drift {:.4}%/s, mirror {mirror_err:.1e}, penetration {:.2} mm, repeat bit-exact",
        100.0 * drift,
        1e3 * penetration
    ))
}

// ---------------------------------------------------------------- 5

fn f64s<const N: usize>(rng: &mut Rng) -> [f64; N] {
    std::array::from_fn(|_| rng.random_range(-1e3..1e3))
}

fn text(rng: &mut Rng) -> String {
    let n = rng.random_range(0..40);
    (0..n).map(|_| char::from_u32(rng.random_range(0x20..0x3000)).unwrap_or('?')).collect()
}

fn random_message(rng: &mut Rng) -> Message {
    match rng.random_range(0..8) {
        0 => {
            let mut w = vec![0u8; rng.random_range(0..200)];
            rng.fill_bytes(&mut w);
            Message::Weights(w)
        }
        1 => Message::RolloutRequest(RolloutRequest {
            task: TaskId::ALL[rng.random_range(0..4)],
            episode_len: rng.random_range(1..1000),
            mode: match rng.random_range(0..3) {
                0 => ActionMode::Random,
                1 => ActionMode::Explore {
                    std: rng.random_range(0.0..1.0),
                },
                _ => ActionMode::Exploit,
            },
            seed: rng.next_u64(),
            episode: rng.next_u64(),
            realism: RealismConfig {
                latency_steps: rng.random_range(0..20),
                sigma_xyz: rng.random_range(0.0..0.1),
                sigma_rpy: rng.random_range(0.0..0.1),
                lowpass_alpha: rng.random_range(0.01..1.0),
                diff_window: [3, 5, 7, 9][rng.random_range(0..4)],
                stack_k: rng.random_range(1..8),
            },
        }),
        2 => Message::ServoTelemetry(Telemetry {
            angles: f64s(rng),
            velocities: f64s(rng),
            timestamp_us: rng.next_u64(),
            stale: rng.random(),
            diverged: rng.random(),
        }),
        3 => Message::PoseEstimate(PoseSample {
            position: f64s(rng),
            rpy: f64s(rng),
            timestamp_us: rng.next_u64(),
        }),
        4 => Message::Action(ActionMsg {
            targets: f64s(rng),
            seq: rng.next_u64(),
        }),
        5 => {
            let (sd, ad) = (rng.random_range(1..12), rng.random_range(1..9));
            let n = rng.random_range(0..6);
            let vec = |k: usize, rng: &mut Rng| (0..k).map(|_| rng.random_range(-5.0..5.0)).collect::<Vec<f64>>();
            let transitions = (0..n)
                .map(|_| StepRecord {
                    state: vec(sd, rng),
                    action: vec(ad, rng),
                    reward: rng.random_range(-5.0..5.0),
                    next_state: vec(sd, rng),
                    done: rng.random(),
                    terminal: rng.random(),
                })
                .collect();
            Message::EpisodeData(EpisodeData {
                episode: rng.next_u64(),
                transitions,
                diverged: rng.random(),
                truth_displacement: None,
            })
        }
        6 => Message::Ack(Status {
            code: rng.random(),
            text: text(rng),
        }),
        _ => Message::Error(Status {
            code: rng.random(),
            text: text(rng),
        }),
    }
}

fn wire() -> Outcome {
    const FRAMES: usize = 100_000;
    let mut rng = rng_for(5, 103, 0);
    let (mut round_trips, mut rejected, mut garbage_ok) = (0, 0, 0);
    let result = catch_unwind(AssertUnwindSafe(|| -> Result<(), String> {
        for i in 0..FRAMES {
            let msg = random_message(&mut rng);
            let frame = encode(&msg);
            match decode_exact(&frame) {
                Ok(back) if back == msg => round_trips += 1,
                other => return Err(format!("frame {i}: {msg:?} decoded as {other:?}")),
            }
            // One corruption per frame: flipped bits, truncation, or an appended byte.
            let mut bad = frame.clone();
            match i % 3 {
                0 => {
                    let at = rng.random_range(0..bad.len());
                    bad[at] ^= rng.random_range(1..=255u8);
                }
                1 => bad.truncate(rng.random_range(0..bad.len())),
                _ => bad.push(rng.random()),
            }
            if decode_exact(&bad).is_err() {
                rejected += 1;
            } else {
                return Err(format!("frame {i}: corruption {} accepted", i % 3));
            }
            // Arbitrary bytes must never panic.
            let mut junk = vec![0u8; rng.random_range(0..64)];
            rng.fill_bytes(&mut junk);
            garbage_ok += decode_exact(&junk).is_err() as usize;
        }
        Ok(())
    }));
    match result {
        Err(_) => Err("decoder panicked".into()),
        Ok(Err(e)) => Err(e),
        Ok(Ok(())) => Ok(format!(
            "{round_trips} round trips, {rejected} corrupted frames rejected, {garbage_ok} random buffers rejected"
        )),
    }
}

// ---------------------------------------------------------------- 6

fn mesh_equivalence() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_realant");
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |mode: &str| -> Result<Vec<u8>, String> {
        let out = tmp.path().join(mode);
        let o = Command::new(bin)
            .args(["train", "--task", "walk", "--algo", "sac", "--episodes", "3", "--seed", "7", "--quiet"])
            .args(["--mode", mode, "--out", out.to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), || format!("{mode}: {}", String::from_utf8_lossy(&o.stderr)))?;
        fs::read(out.join("curve.csv")).map_err(|e| e.to_string())
    };
    let local = run("in-process")?;
    let mesh = run("mesh")?;
    ensure(local == mesh, || {
        format!("curves differ:\n{}\n{}", String::from_utf8_lossy(&local), String::from_utf8_lossy(&mesh))
    })?;
    let returns: Vec<&str> = std::str::from_utf8(&mesh)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap_or(""))
        .collect();
    ensure(returns.len() == 3, || format!("{} episodes", returns.len()))?;
    Ok(format!("identical returns {}", returns.join(" ")))
}

// ---------------------------------------------------------------- 7-9

const EPISODES: usize = 100;
const SEED: u64 = 1;

/// Final-10 mean and random-warmup mean of a TD3 sleep run.
#[derive(Debug, Clone, Copy)]
struct Arm {
    final10: f64,
    warmup: f64,
    seconds: f64,
}

#[derive(Default)]
struct Runs(HashMap<(usize, u64), Arm>);

impl Runs {
    fn sleep(&mut self, latency: usize, sigma: f64) -> Result<Arm, String> {
        if let Some(a) = self.0.get(&(latency, sigma.to_bits())) {
            return Ok(*a);
        }
        let cfg = TrainConfig {
            realism: RealismConfig {
                latency_steps: latency,
                sigma_xyz: sigma,
                sigma_rpy: sigma,
                ..RealismConfig::clean()
            },
            ..TrainConfig::new(TaskId::Sleep, AlgoConfig::td3(), EPISODES, SEED)
        };
        let t0 = Instant::now();
        let t = train(cfg, |_, _| {}).map_err(|e| e.to_string())?;
        let mean = |rows: &[CurveRow]| rows.iter().map(|r| r.episode_return).sum::<f64>() / rows.len() as f64;
        let arm = Arm {
            final10: mean(&t.curve[EPISODES - 10..]),
            warmup: mean(&t.curve[..10]),
            seconds: t0.elapsed().as_secs_f64(),
        };
        self.0.insert((latency, sigma.to_bits()), arm);
        Ok(arm)
    }
}

fn learning(runs: &mut Runs) -> Outcome {
    let a = runs.sleep(0, 0.0)?;
    let detail = format!("final-10 {:.4} vs random {:.4}", a.final10, a.warmup);
    ensure(a.final10 < 0.0 && a.warmup < 0.0, || format!("returns not negative: {detail}"))?;
    ensure(a.final10.abs() <= a.warmup.abs() / 3.0, || detail.clone())?;
    Ok(detail)
}

fn within_quarter(arm: f64, base: f64) -> bool {
    (arm - base).abs() <= 0.25 * base.abs()
}

fn ablation(runs: &mut Runs, arms: [(usize, f64); 2], label: &str) -> Outcome {
    let base = runs.sleep(0, 0.0)?;
    let near = runs.sleep(arms[0].0, arms[0].1)?;
    let far = runs.sleep(arms[1].0, arms[1].1)?;
    let detail = format!(
        "base {:.4}, {label}={} {:.4} ({:+.1}%), {label}={} {:.4}",
        base.final10,
        if label == "latency" { arms[0].0 as f64 } else { arms[0].1 },
        near.final10,
        100.0 * (near.final10 - base.final10) / base.final10.abs(),
        if label == "latency" { arms[1].0 as f64 } else { arms[1].1 },
        far.final10,
    );
    ensure(within_quarter(near.final10, base.final10), || format!("near arm outside 25%: {detail}"))?;
    ensure(far.final10 < base.final10, || format!("far arm not worse: {detail}"))?;
    Ok(detail)
}

// ---------------------------------------------------------------- 10

fn friction_sweep() -> Outcome {
    let cfg = TrainConfig::new(TaskId::Walk, AlgoConfig::td3(), 20, SEED);
    let t = train(cfg, |_, _| {}).map_err(|e| e.to_string())?;
    let policy = t.policy();
    let mut rows = Vec::new();
    for mu in [0.4, 0.6, 0.8, 1.0, 1.2] {
        let mut model = BodyModel::default();
        model.contact.friction_coeff = mu;
        let r = evaluate(&policy, TaskId::Walk, &model, RealismConfig::default(), 3, SEED);
        ensure(r.returns.len() == 3, || format!("friction {mu}: {} episodes", r.returns.len()))?;
        ensure(r.mean_speed_cm_s.is_finite() && r.mean_return.is_finite(), || format!("friction {mu}: {r:?}"))?;
        rows.push(format!("{mu}:{:.2}cm/s", r.mean_speed_cm_s));
    }
    Ok(rows.join(" "))
}

// ----------------------------------------------------------------

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Duration,
}

const CRITERIA: [Criterion; 10] = [
    Criterion { id: 1, name: "gradient correctness", limit: Duration::from_secs(60) },
    Criterion { id: 2, name: "differentiator oracle", limit: Duration::from_secs(1) },
    Criterion { id: 3, name: "structural constants", limit: Duration::from_secs(60) },
    Criterion { id: 4, name: "physics sanity", limit: Duration::from_secs(60) },
    Criterion { id: 5, name: "wire protocol", limit: Duration::from_secs(60) },
    Criterion { id: 6, name: "mesh equivalence", limit: Duration::from_secs(300) },
    Criterion { id: 7, name: "learning smoke", limit: Duration::from_secs(1800) },
    Criterion { id: 8, name: "latency ablation", limit: Duration::from_secs(5400) },
    Criterion { id: 9, name: "noise ablation", limit: Duration::from_secs(5400) },
    Criterion { id: 10, name: "friction sweep", limit: Duration::from_secs(600) },
];

fn main() -> ExitCode {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut runs = Runs::default();
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| wanted.is_empty() || wanted.contains(&c.id)) {
        let base_cached = runs.0.get(&(0, 0f64.to_bits())).map_or(0.0, |a| a.seconds);
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| match c.id {
            1 => gradients(),
            2 => differentiator(),
            3 => structure(),
            4 => physics(),
            5 => wire(),
            6 => mesh_equivalence(),
            7 => learning(&mut runs),
            8 => ablation(&mut runs, [(2, 0.0), (10, 0.0)], "latency"),
            9 => ablation(&mut runs, [(0, 0.01), (0, 0.05)], "sigma"),
            _ => friction_sweep(),
        }))
        .unwrap_or_else(|_| Err("panicked".into()));
        // The shared baseline run counts toward every criterion that uses it.
        let reused = if matches!(c.id, 8 | 9) { base_cached } else { 0.0 };
        let elapsed = t0.elapsed() + Duration::from_secs_f64(reused);
        let outcome = outcome.and_then(|d| {
            if elapsed > c.limit {
                Err(format!("took {:.1}s, limit {}s; {d}", elapsed.as_secs_f64(), c.limit.as_secs()))
            } else {
                Ok(d)
            }
        });
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} [{:>2}] {} ({:.1}s): {detail}", c.id, c.name, elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

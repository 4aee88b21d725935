use std::collections::VecDeque;

use rand::Rng as _;

use super::transport::{Publisher, Subscriber};
use super::wire::Message;
use super::{reset_marker, Clock};
use crate::rng::{rng_for, stream, Rng};
use crate::sensors::{PoseChannel, PoseSample, RealismConfig};

/// Real-time pose path: noise at capture, then a per-frame latency of
/// `latency_steps` ± 1 tick, never going back in time.
struct Jittered {
    noise: PoseChannel,
    history: VecDeque<PoseSample>,
    latency: usize,
    rng: Rng,
    received: u64,
    last_sent: u64,
}

impl Jittered {
    fn process(&mut self, truth: PoseSample) -> PoseSample {
        self.history.push_back(self.noise.process(truth));
        if self.history.len() > self.latency + 2 {
            self.history.pop_front();
        }
        let k = self.received;
        self.received += 1;
        let delay = (self.latency as i64 + self.rng.random_range(-1..=1)).max(0) as u64;
        let oldest = k + 1 - self.history.len() as u64;
        let idx = k.saturating_sub(delay).max(oldest).max(self.last_sent);
        self.last_sent = idx;
        self.history[(idx - oldest) as usize]
    }
}

enum Channel {
    Idle,
    Exact(PoseChannel),
    Jittered(Box<Jittered>),
}

/// Pose estimation emulator: turns ground-truth poses into delayed, noisy
/// estimates stamped with their capture time.
pub struct PoseProcess {
    clock: Clock,
    channel: Channel,
}

impl PoseProcess {
    pub fn new(clock: Clock) -> Self {
        Self {
            clock,
            channel: Channel::Idle,
        }
    }

    pub fn handle(&mut self, msg: Message) -> Option<Message> {
        match msg {
            Message::RolloutRequest(r) => {
                let rng = rng_for(r.seed, stream::POSE_NOISE, 0);
                self.channel = match self.clock {
                    Clock::Lockstep => Channel::Exact(PoseChannel::new(&r.realism, rng)),
                    Clock::RealTime { .. } => {
                        let noise_only = RealismConfig {
                            latency_steps: 0,
                            ..r.realism
                        };
                        Channel::Jittered(Box::new(Jittered {
                            noise: PoseChannel::new(&noise_only, rng),
                            history: VecDeque::new(),
                            latency: r.realism.latency_steps,
                            rng: rng_for(r.seed, stream::POSE_JITTER, 0),
                            received: 0,
                            last_sent: 0,
                        }))
                    }
                };
                Some(Message::ack(&reset_marker(&r)))
            }
            Message::PoseEstimate(truth) => match &mut self.channel {
                Channel::Idle => None,
                Channel::Exact(c) => Some(Message::PoseEstimate(c.process(truth))),
                Channel::Jittered(j) => Some(Message::PoseEstimate(j.process(truth))),
            },
            _ => None,
        }
    }
}

/// Pose process event loop; returns when the truth link is gone.
pub fn run_pose(clock: Clock, truth: &Subscriber, poses: &Publisher) {
    let mut p = PoseProcess::new(clock);
    while let Some(m) = truth.recv() {
        if let Some(out) = p.handle(m) {
            poses.publish(&out);
        }
    }
}

use std::thread;
use std::time::{Duration, Instant};

use super::transport::{Publisher, Subscriber};
use super::wire::{ActionMsg, Message, Telemetry};
use super::{code, reset_marker, Clock, STALENESS_US};
use crate::physics::{BodyModel, InitialPose, ServoCommand};
use crate::rl::RolloutRequest;
use crate::tasks::{Device, TaskSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct ControlConfig {
    pub model: BodyModel,
    pub clock: Clock,
    /// Logical age after which the last action counts as stale.
    pub stale_after_us: u64,
}

impl ControlConfig {
    pub fn new(model: BodyModel, clock: Clock) -> Self {
        Self {
            model,
            clock,
            stale_after_us: STALENESS_US,
        }
    }
}

/// Which socket a frame leaves on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Out {
    Telemetry,
    Truth,
}

/// The robot side: a simulated device that applies the newest action each
/// tick and reports servo telemetry and ground-truth pose.
pub struct ControlProcess {
    pub device: Device,
    cfg: ControlConfig,
    last_seq: Option<u64>,
    last_action_at: Instant,
    active: bool,
}

impl ControlProcess {
    pub fn new(cfg: ControlConfig) -> Self {
        Self {
            device: Device::new(cfg.model.clone(), &InitialPose::Lying).expect("default poses are valid"),
            cfg,
            last_seq: None,
            last_action_at: Instant::now(),
            active: false,
        }
    }

    pub fn telemetry(&self, stale: bool) -> Telemetry {
        let j = self.device.telemetry();
        Telemetry {
            angles: j.angles,
            velocities: j.velocities,
            timestamp_us: self.device.timestamp_us(),
            stale,
            diverged: self.device.diverged,
        }
    }

    fn report(&self, stale: bool) -> Vec<(Out, Message)> {
        vec![
            (Out::Truth, Message::PoseEstimate(self.device.truth_pose())),
            (Out::Telemetry, Message::ServoTelemetry(self.telemetry(stale))),
        ]
    }

    /// Reset for a new episode. The request is forwarded on the truth socket
    /// so the pose process can reconfigure before the first pose.
    pub fn on_request(&mut self, req: &RolloutRequest) -> Vec<(Out, Message)> {
        if let Err(e) = self.device.reset(&TaskSpec::new(req.task).initial_pose) {
            return vec![(Out::Telemetry, Message::error(code::DEVICE, &e.to_string()))];
        }
        self.last_seq = None;
        self.last_action_at = Instant::now();
        self.active = true;
        let mut out = vec![
            (Out::Truth, Message::RolloutRequest(req.clone())),
            (Out::Telemetry, Message::ack(&reset_marker(req))),
        ];
        out.extend(self.report(false));
        out
    }

    /// Latest wins: actions with a sequence number at or below the last
    /// applied one are discarded.
    pub fn on_action(&mut self, a: &ActionMsg) -> bool {
        if !self.active || self.last_seq.is_some_and(|s| a.seq <= s) {
            return false;
        }
        self.device.apply(ServoCommand { targets: a.targets });
        self.last_seq = Some(a.seq);
        self.last_action_at = Instant::now();
        true
    }

    /// Advance one control period and report.
    pub fn tick(&mut self) -> Vec<(Out, Message)> {
        let stale = match self.cfg.clock {
            Clock::Lockstep => false,
            clock => self.last_action_at.elapsed() > clock.wall(self.cfg.stale_after_us),
        };
        self.device.advance();
        self.report(stale)
    }
}

fn emit(out: Vec<(Out, Message)>, telemetry: &Publisher, truth: &Publisher) {
    for (dest, m) in out {
        match dest {
            Out::Telemetry => telemetry.publish(&m),
            Out::Truth => truth.publish(&m),
        }
    }
}

/// Control process event loop; returns only when the action link is gone.
pub fn run_control(cfg: ControlConfig, telemetry: &Publisher, truth: &Publisher, actions: &Subscriber) {
    let clock = cfg.clock;
    let mut p = ControlProcess::new(cfg);
    let handle = |p: &mut ControlProcess, m: Message| match m {
        Message::RolloutRequest(r) => {
            truth.wait_for_subscribers(1, Duration::from_secs(5));
            emit(p.on_request(&r), telemetry, truth);
            false
        }
        Message::Action(a) => p.on_action(&a),
        _ => false,
    };
    match clock {
        Clock::Lockstep => {
            while let Some(m) = actions.recv() {
                if handle(&mut p, m) {
                    emit(p.tick(), telemetry, truth);
                }
            }
        }
        Clock::RealTime { .. } => {
            let period = clock.period();
            let mut next = Instant::now();
            loop {
                loop {
                    match actions.try_recv() {
                        Ok(m) => {
                            handle(&mut p, m);
                        }
                        Err(std::sync::mpsc::TryRecvError::Empty) => break,
                        Err(_) => return,
                    }
                }
                if p.active {
                    emit(p.tick(), telemetry, truth);
                }
                next += period;
                let now = Instant::now();
                if next > now {
                    thread::sleep(next - now);
                } else {
                    next = now;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::ActionMode;
    use crate::sensors::RealismConfig;
    use crate::tasks::TaskId;

    fn request() -> RolloutRequest {
        RolloutRequest {
            task: TaskId::Walk,
            episode_len: 200,
            mode: ActionMode::Exploit,
            seed: 1,
            episode: 0,
            realism: RealismConfig::default(),
        }
    }

    fn lockstep() -> ControlProcess {
        ControlProcess::new(ControlConfig::new(BodyModel::default(), Clock::Lockstep))
    }

    #[test]
    fn reset_forwards_the_request_before_the_first_pose() {
        let mut p = lockstep();
        let out = p.on_request(&request());
        let truth: Vec<_> = out.iter().filter(|(d, _)| *d == Out::Truth).map(|(_, m)| m.msg_type()).collect();
        assert_eq!(truth, [super::super::MsgType::RolloutRequest, super::super::MsgType::PoseEstimate]);
        assert!(matches!(&out[1].1, Message::Ack(s) if s.text == "reset 0 1"));
    }

    #[test]
    fn holds_reset_posture_without_actions() {
        let mut p = lockstep();
        p.on_request(&request());
        let start = p.device.state.joint_angles;
        for _ in 0..10 {
            p.tick();
        }
        for (a, b) in p.device.state.joint_angles.iter().zip(start) {
            assert!((a - b).abs() < 0.05);
        }
    }

    #[test]
    fn older_actions_are_discarded() {
        let mut p = lockstep();
        p.on_request(&request());
        let a = |seq, v| ActionMsg { targets: [v; 8], seq };
        assert!(p.on_action(&a(5, 0.3)));
        assert!(!p.on_action(&a(3, 0.1)));
        assert!(!p.on_action(&a(5, 0.1)));
        assert_eq!(p.device.command.targets, [0.3; 8]);
        assert!(p.on_action(&a(6, 0.2)));
    }

    #[test]
    fn actions_before_an_episode_are_ignored() {
        let mut p = lockstep();
        assert!(!p.on_action(&ActionMsg { targets: [0.0; 8], seq: 0 }));
    }

    #[test]
    fn stale_flag_after_timeout() {
        let mut cfg = ControlConfig::new(BodyModel::default(), Clock::RealTime { accel: 1000.0 });
        cfg.stale_after_us = 1000;
        let mut p = ControlProcess::new(cfg);
        p.on_request(&request());
        thread::sleep(Duration::from_millis(5));
        let out = p.tick();
        assert!(matches!(&out[1].1, Message::ServoTelemetry(t) if t.stale));
    }
}

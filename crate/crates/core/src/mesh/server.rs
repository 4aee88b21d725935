use std::sync::mpsc::RecvTimeoutError;
use std::thread;
use std::time::{Duration, Instant};

use super::transport::{Connection, Publisher, Replier, Subscriber};
use super::wire::{ActionMsg, Message, Telemetry};
use super::{code, reset_marker, Clock, MeshError, STALENESS_US};
use crate::physics::{BodyModel, ServoCommand};
use crate::rl::{checkpoint, run_episode, Policy, RolloutRequest};
use crate::sensors::{JointSample, PoseSample};
use crate::tasks::{EpisodeIo, EpisodeSetup, Tick, TICK_US};

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub model: BodyModel,
    pub clock: Clock,
    /// Logical age beyond which cached telemetry or pose aborts the episode.
    pub staleness_us: u64,
    /// Wall-clock limit on any single wait in lockstep mode.
    pub lockstep_timeout: Duration,
}

impl ServerConfig {
    pub fn new(model: BodyModel, clock: Clock) -> Self {
        Self {
            model,
            clock,
            staleness_us: STALENESS_US,
            lockstep_timeout: Duration::from_secs(10),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServerState {
    Idle,
    WeightsLoaded,
    Running,
    Reporting,
}

/// Newest value seen on a subscription and when it arrived.
struct Cache<T> {
    value: Option<(T, Instant)>,
}

impl<T> Cache<T> {
    fn new() -> Self {
        Self { value: None }
    }
}

/// The server's side of the robot link, seen by [`run_episode`] as any
/// other episode transport.
pub struct MeshIo<'a> {
    pub actions: &'a Publisher,
    pub telemetry: &'a Subscriber,
    pub poses: &'a Subscriber,
    pub cfg: &'a ServerConfig,
    request: RolloutRequest,
    joints: Cache<Telemetry>,
    pose: Cache<PoseSample>,
    deadline: Instant,
    pub actions_sent: usize,
}

impl<'a> MeshIo<'a> {
    pub fn new(
        cfg: &'a ServerConfig,
        actions: &'a Publisher,
        telemetry: &'a Subscriber,
        poses: &'a Subscriber,
        request: RolloutRequest,
    ) -> Self {
        Self {
            actions,
            telemetry,
            poses,
            cfg,
            request,
            joints: Cache::new(),
            pose: Cache::new(),
            deadline: Instant::now(),
            actions_sent: 0,
        }
    }

    fn recv(&self, sub: &Subscriber, what: &'static str) -> Result<Message, MeshError> {
        match sub.recv_timeout(self.cfg.lockstep_timeout) {
            Ok(Message::Error(s)) => Err(MeshError::Remote(s)),
            Ok(m) => Ok(m),
            Err(RecvTimeoutError::Timeout) => Err(MeshError::Stale(what)),
            Err(RecvTimeoutError::Disconnected) => Err(MeshError::Protocol(format!("{what} link closed"))),
        }
    }

    /// Discard frames up to and including this episode's reset marker.
    fn await_marker(&self, sub: &Subscriber, what: &'static str) -> Result<(), MeshError> {
        let marker = reset_marker(&self.request);
        let deadline = Instant::now() + self.cfg.lockstep_timeout;
        loop {
            if Instant::now() > deadline {
                return Err(MeshError::Stale(what));
            }
            if let Message::Ack(s) = self.recv(sub, what)? {
                if s.text == marker {
                    return Ok(());
                }
            }
        }
    }

    fn next_telemetry(&self, timestamp_us: Option<u64>) -> Result<Telemetry, MeshError> {
        loop {
            if let Message::ServoTelemetry(t) = self.recv(self.telemetry, "telemetry")? {
                match timestamp_us {
                    Some(ts) if t.timestamp_us < ts => continue,
                    Some(ts) if t.timestamp_us > ts => {
                        return Err(MeshError::Protocol(format!("telemetry at {} while waiting for {ts}", t.timestamp_us)))
                    }
                    _ => return Ok(t),
                }
            }
        }
    }

    fn next_pose(&self) -> Result<PoseSample, MeshError> {
        loop {
            if let Message::PoseEstimate(p) = self.recv(self.poses, "pose")? {
                return Ok(p);
            }
        }
    }

    /// Drain both subscriptions into the latest-value caches without blocking.
    fn refresh(&mut self) -> Result<(), MeshError> {
        while let Ok(m) = self.telemetry.try_recv() {
            match m {
                Message::ServoTelemetry(t) => self.joints.value = Some((t, Instant::now())),
                Message::Error(s) => return Err(MeshError::Remote(s)),
                _ => {}
            }
        }
        while let Ok(m) = self.poses.try_recv() {
            if let Message::PoseEstimate(p) = m {
                self.pose.value = Some((p, Instant::now()));
            }
        }
        Ok(())
    }

    fn cached_tick(&self) -> Result<Tick, MeshError> {
        let limit = self.cfg.clock.wall(self.cfg.staleness_us);
        let (t, t_at) = self.joints.value.ok_or(MeshError::Stale("telemetry"))?;
        let (p, p_at) = self.pose.value.ok_or(MeshError::Stale("pose"))?;
        if t_at.elapsed() > limit {
            return Err(MeshError::Stale("telemetry"));
        }
        if p_at.elapsed() > limit {
            return Err(MeshError::Stale("pose"));
        }
        Ok(tick(t, p))
    }
}

fn tick(t: Telemetry, pose: PoseSample) -> Tick {
    Tick {
        pose,
        joints: JointSample {
            angles: t.angles,
            velocities: t.velocities,
        },
        diverged: t.diverged,
        truth: None,
    }
}

impl EpisodeIo for MeshIo<'_> {
    type Error = MeshError;

    fn reset(&mut self, _setup: &EpisodeSetup) -> Result<Tick, MeshError> {
        let wait = self.cfg.lockstep_timeout;
        if !self.actions.wait_for_subscribers(1, wait) {
            return Err(MeshError::Stale("control process"));
        }
        if !self.telemetry.wait_connected(wait) {
            return Err(MeshError::Stale("telemetry"));
        }
        if !self.poses.wait_connected(wait) {
            return Err(MeshError::Stale("pose"));
        }
        self.actions.publish(&Message::RolloutRequest(self.request.clone()));
        self.await_marker(self.telemetry, "telemetry")?;
        self.await_marker(self.poses, "pose")?;
        let t = self.next_telemetry(Some(0))?;
        let p = self.next_pose()?;
        if let Clock::RealTime { .. } = self.cfg.clock {
            let now = Instant::now();
            self.joints.value = Some((t, now));
            self.pose.value = Some((p, now));
            self.deadline = now;
        }
        Ok(tick(t, p))
    }

    fn step(&mut self, cmd: &ServoCommand, seq: u64) -> Result<Tick, MeshError> {
        self.actions.publish(&Message::Action(ActionMsg {
            targets: cmd.targets,
            seq,
        }));
        self.actions_sent += 1;
        match self.cfg.clock {
            Clock::Lockstep => {
                let t = self.next_telemetry(Some((seq + 1) * TICK_US))?;
                let p = self.next_pose()?;
                Ok(tick(t, p))
            }
            clock => {
                self.deadline += clock.period();
                let now = Instant::now();
                if self.deadline > now {
                    thread::sleep(self.deadline - now);
                }
                self.refresh()?;
                self.cached_tick()
            }
        }
    }
}

/// Rollout server state machine. Owns the links to the control and pose
/// processes and answers one train-client request at a time.
pub struct RolloutServer {
    pub cfg: ServerConfig,
    pub actions: Publisher,
    pub telemetry: Subscriber,
    pub poses: Subscriber,
    state: ServerState,
    policy: Option<Policy>,
}

impl RolloutServer {
    pub fn new(cfg: ServerConfig, actions: Publisher, telemetry: Subscriber, poses: Subscriber) -> Self {
        Self {
            cfg,
            actions,
            telemetry,
            poses,
            state: ServerState::Idle,
            policy: None,
        }
    }

    pub fn state(&self) -> ServerState {
        self.state
    }

    /// Process one request and produce its reply.
    pub fn handle(&mut self, msg: Message) -> Message {
        match msg {
            Message::Weights(bytes) => match checkpoint::decode(&bytes) {
                Ok(p) => {
                    self.policy = Some(p);
                    self.state = ServerState::WeightsLoaded;
                    Message::ack("weights loaded")
                }
                Err(e) => Message::error(code::BAD_WEIGHTS, &e.to_string()),
            },
            Message::RolloutRequest(req) => {
                let Some(policy) = self.policy.take() else {
                    return Message::error(code::NO_POLICY, "no policy loaded");
                };
                if let Err(e) = req.realism.validate() {
                    self.state = ServerState::Idle;
                    return Message::error(code::BAD_REQUEST, &e.to_string());
                }
                if policy.state_dim() != req.realism.stack_k * crate::tasks::OBS_DIM {
                    self.state = ServerState::Idle;
                    return Message::error(code::BAD_REQUEST, "policy input does not match the stacked observation");
                }
                self.state = ServerState::Running;
                let mut io = MeshIo::new(&self.cfg, &self.actions, &self.telemetry, &self.poses, req.clone());
                let result = run_episode(&mut io, &self.cfg.model, &policy, &req);
                let reply = match result {
                    Ok(data) => {
                        self.state = ServerState::Reporting;
                        Message::EpisodeData(data)
                    }
                    Err(e) => Message::error(code::EPISODE_ABORTED, &format!("episode aborted: {e}")),
                };
                self.state = ServerState::Idle;
                reply
            }
            other => Message::error(code::UNEXPECTED, &format!("unexpected {:?} request", other.msg_type())),
        }
    }

    /// Serve requests on one client connection until it closes.
    pub fn serve_connection(&mut self, conn: &mut Connection) {
        while let Ok(m) = conn.recv() {
            let reply = self.handle(m);
            if conn.send(&reply).is_err() {
                break;
            }
        }
    }

    /// Accept clients one after another; returns only on a listener failure.
    pub fn serve(&mut self, replier: &Replier) -> std::io::Result<()> {
        loop {
            let mut conn = replier.accept()?;
            self.serve_connection(&mut conn);
        }
    }
}

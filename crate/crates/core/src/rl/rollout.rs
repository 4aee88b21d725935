use super::{ActionMode, Policy};
use crate::physics::BodyModel;
use crate::rng::{rng_for, stream};
use crate::sensors::RealismConfig;
use crate::tasks::{action_to_targets, EpisodeIo, EpisodeSetup, TaskId, TaskObserver, TaskSpec};

/// Everything needed to collect one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RolloutRequest {
    pub task: TaskId,
    pub episode_len: usize,
    pub mode: ActionMode,
    /// Seed of the episode's random streams (actions, pose noise).
    pub seed: u64,
    pub episode: u64,
    pub realism: RealismConfig,
}

/// One transition as collected, in double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
    /// Bootstrapping stops here (divergence).
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeData {
    pub episode: u64,
    pub transitions: Vec<StepRecord>,
    pub diverged: bool,
    /// Net ground-truth torso displacement, when the transport exposes it.
    pub truth_displacement: Option<[f64; 3]>,
}

impl EpisodeData {
    pub fn episode_return(&self) -> f64 {
        self.transitions.iter().map(|t| t.reward).sum()
    }
}

/// Run one episode against any transport. The in-process and networked
/// paths both go through here, so their transitions agree bit for bit.
pub fn run_episode<Io: EpisodeIo>(
    io: &mut Io,
    model: &BodyModel,
    policy: &Policy,
    req: &RolloutRequest,
) -> Result<EpisodeData, Io::Error> {
    let spec = TaskSpec::new(req.task);
    let setup = EpisodeSetup {
        initial_pose: spec.initial_pose.clone(),
        realism: req.realism,
        seed: req.seed,
    };
    let mut observer = TaskObserver::new(spec, &req.realism);
    let mut rng = rng_for(req.seed, stream::ACTIONS, 0);

    let first = io.reset(&setup)?;
    let start = first.truth.as_ref().map(|s| s.torso_position);
    let mut current = observer.observe(&first);
    let mut end = start;
    let mut transitions = Vec::with_capacity(req.episode_len);
    let mut diverged = false;
    for t in 0..req.episode_len {
        let action = policy.act(&current.stacked, req.mode, &mut rng);
        let cmd = action_to_targets(&action, model);
        let tick = io.step(&cmd, t as u64)?;
        let next = observer.observe(&tick);
        end = tick.truth.as_ref().map(|s| s.torso_position);
        let done = tick.diverged || t + 1 == req.episode_len;
        transitions.push(StepRecord {
            state: std::mem::take(&mut current.stacked),
            action,
            reward: if tick.diverged { 0.0 } else { next.reward },
            next_state: next.stacked.clone(),
            done,
            terminal: tick.diverged,
        });
        current = next;
        if tick.diverged {
            diverged = true;
            break;
        }
    }
    let truth_displacement = match (start, end) {
        (Some(a), Some(b)) => Some([b.x - a.x, b.y - a.y, b.z - a.z]),
        _ => None,
    };
    Ok(EpisodeData {
        episode: req.episode,
        transitions,
        diverged,
        truth_displacement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::{agent::actor_architecture, AlgoConfig, Algorithm, Mlp};
    use crate::tasks::{Env, LocalIo};

    fn policy() -> Policy {
        let cfg = AlgoConfig {
            hidden: vec![16],
            ..AlgoConfig::td3()
        };
        Policy {
            algorithm: Algorithm::Td3,
            actor: Mlp::init(actor_architecture(&cfg, 116, 8), 1.0, &mut rng_for(0, 0, 0)),
        }
    }

    fn request(mode: ActionMode) -> RolloutRequest {
        RolloutRequest {
            task: TaskId::Walk,
            episode_len: 200,
            mode,
            seed: 42,
            episode: 3,
            realism: RealismConfig::default(),
        }
    }

    #[test]
    fn matches_the_gym_environment() {
        let p = policy();
        let req = request(ActionMode::Explore { std: 0.1 });
        let model = BodyModel::default();
        let data = run_episode(&mut LocalIo::new(model.clone()), &model, &p, &req).unwrap();
        assert_eq!(data.transitions.len(), 200);
        let mut env = Env::new(TaskSpec::new(TaskId::Walk), model, req.realism);
        env.reset(req.seed).unwrap();
        for (t, tr) in data.transitions.iter().enumerate() {
            let r = env.step(&tr.action).unwrap();
            assert_eq!(r.reward.to_bits(), tr.reward.to_bits(), "t={t}");
            assert_eq!(r.info.stacked, tr.next_state);
            assert_eq!(r.done, tr.done);
        }
    }

    #[test]
    fn repeat_runs_are_bit_identical() {
        let p = policy();
        let model = BodyModel::default();
        for mode in [ActionMode::Random, ActionMode::Explore { std: 0.1 }, ActionMode::Exploit] {
            let req = request(mode);
            let a = run_episode(&mut LocalIo::new(model.clone()), &model, &p, &req).unwrap();
            let b = run_episode(&mut LocalIo::new(model.clone()), &model, &p, &req).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn transitions_chain() {
        let p = policy();
        let model = BodyModel::default();
        let d = run_episode(&mut LocalIo::new(model.clone()), &model, &p, &request(ActionMode::Random)).unwrap();
        for w in d.transitions.windows(2) {
            assert_eq!(w[0].next_state, w[1].state);
        }
        assert_eq!(d.transitions[0].state.len(), 116);
        assert!(d.transitions.last().unwrap().done);
        assert!(!d.transitions.iter().any(|t| t.terminal));
    }
}

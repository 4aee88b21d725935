use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::losses::{LOG_STD_MAX, LOG_STD_MIN};
use super::{Algorithm, Mlp};
use crate::rng::Rng;

/// How a rollout chooses actions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActionMode {
    /// Uniform in [−1, 1] per component; the policy is not consulted.
    Random,
    /// Gaussian noise around the deterministic action (TD3) or a sample of
    /// the stochastic head (SAC, REDQ).
    Explore { std: f64 },
    /// Deterministic action.
    Exploit,
}

impl ActionMode {
    pub fn code(&self) -> u8 {
        match self {
            ActionMode::Random => 0,
            ActionMode::Explore { .. } => 1,
            ActionMode::Exploit => 2,
        }
    }
}

pub fn random_action(act_dim: usize, rng: &mut Rng) -> Vec<f64> {
    (0..act_dim).map(|_| rng.random_range(-1.0..=1.0)).collect()
}

/// The deployable half of an agent: an actor and how to read its head.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    pub algorithm: Algorithm,
    pub actor: Mlp<f32>,
}

impl Policy {
    pub fn act_dim(&self) -> usize {
        if self.algorithm.is_stochastic() {
            self.actor.arch.output_dim / 2
        } else {
            self.actor.arch.output_dim
        }
    }

    pub fn state_dim(&self) -> usize {
        self.actor.arch.input_dim
    }

    /// Select an action for one (stacked) state.
    pub fn act(&self, state: &[f64], mode: ActionMode, rng: &mut Rng) -> Vec<f64> {
        let n = self.act_dim();
        if mode == ActionMode::Random {
            return random_action(n, rng);
        }
        let x: Vec<f32> = state.iter().map(|v| *v as f32).collect();
        let out = self.actor.predict(&x).expect("policy input width");
        match (mode, self.algorithm.is_stochastic()) {
            (ActionMode::Exploit, _) => out[..n].iter().map(|v| (*v as f64).tanh()).collect(),
            (ActionMode::Explore { std }, false) => out
                .iter()
                .map(|v| {
                    let z: f64 = StandardNormal.sample(rng);
                    ((*v as f64).tanh() + std * z).clamp(-1.0, 1.0)
                })
                .collect(),
            (ActionMode::Explore { .. }, true) => (0..n)
                .map(|j| {
                    let z: f64 = StandardNormal.sample(rng);
                    let ls = (out[n + j] as f64).clamp(LOG_STD_MIN, LOG_STD_MAX);
                    (out[j] as f64 + ls.exp() * z).tanh()
                })
                .collect(),
            (ActionMode::Random, _) => unreachable!(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::{agent::actor_architecture, AlgoConfig};
    use crate::rng::rng_for;

    fn policy(a: Algorithm) -> Policy {
        let cfg = AlgoConfig {
            hidden: vec![8],
            ..AlgoConfig::for_algorithm(a)
        };
        let mut rng = rng_for(0, 0, 0);
        Policy {
            algorithm: a,
            actor: Mlp::init(actor_architecture(&cfg, 6, 8), 1.0, &mut rng),
        }
    }

    #[test]
    fn random_mode_ignores_weights() {
        let p = policy(Algorithm::Td3);
        let mut q = p.clone();
        q.actor.params.iter_mut().for_each(|v| *v = 3.0);
        let s = [0.1; 6];
        let a = p.act(&s, ActionMode::Random, &mut rng_for(1, 0, 0));
        let b = q.act(&s, ActionMode::Random, &mut rng_for(1, 0, 0));
        assert_eq!(a, b);
        assert!(a.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn exploit_is_deterministic() {
        for alg in [Algorithm::Td3, Algorithm::Sac] {
            let p = policy(alg);
            let s = [0.3, -0.2, 0.0, 1.0, 0.5, -1.0];
            let a = p.act(&s, ActionMode::Exploit, &mut rng_for(1, 0, 0));
            let b = p.act(&s, ActionMode::Exploit, &mut rng_for(2, 0, 0));
            assert_eq!(a, b);
            assert_eq!(a.len(), 8);
        }
    }

    #[test]
    fn zero_explore_noise_equals_exploit() {
        let p = policy(Algorithm::Td3);
        let s = [0.3, -0.2, 0.0, 1.0, 0.5, -1.0];
        let a = p.act(&s, ActionMode::Explore { std: 0.0 }, &mut rng_for(1, 0, 0));
        let b = p.act(&s, ActionMode::Exploit, &mut rng_for(1, 0, 0));
        assert_eq!(a, b);
    }
}

use rand::seq::index::sample as sample_indices;
use rand_distr::{Distribution, StandardNormal};

use super::losses::{
    critic_loss, soft_actor_loss, soft_targets, td3_actor_loss, td3_targets, temperature_loss, CriticAggregate,
};
use super::{polyak, Adam, AlgoConfig, Algorithm, Architecture, Batch, Mlp, Scalar};
use crate::rng::{rng_for, stream, Rng};

/// Output-layer scale of a freshly initialized actor.
pub const ACTOR_OUTPUT_SCALE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossRecord {
    pub critic_loss: f64,
    pub actor_loss: Option<f64>,
    pub alpha: f64,
}

/// Actor, critics, their targets and optimizer state for one algorithm.
#[derive(Debug, Clone)]
pub struct Agent<T> {
    pub cfg: AlgoConfig,
    pub state_dim: usize,
    pub act_dim: usize,
    pub actor: Mlp<T>,
    /// TD3 only.
    pub actor_target: Option<Mlp<T>>,
    pub critics: Vec<Mlp<T>>,
    pub critic_targets: Vec<Mlp<T>>,
    pub log_alpha: T,
    actor_opt: Adam<T>,
    critic_opts: Vec<Adam<T>>,
    alpha_opt: Adam<T>,
    pub updates: u64,
    subset_rng: Rng,
}

pub fn actor_architecture(cfg: &AlgoConfig, state_dim: usize, act_dim: usize) -> Architecture {
    let out = if cfg.algorithm.is_stochastic() { 2 * act_dim } else { act_dim };
    Architecture::new(state_dim, &cfg.hidden, out, cfg.dense)
}

pub fn critic_architecture(cfg: &AlgoConfig, state_dim: usize, act_dim: usize) -> Architecture {
    Architecture::new(state_dim + act_dim, &cfg.hidden, 1, cfg.dense)
}

fn normal_draws<T: Scalar>(n: usize, scale: f64, clip: Option<f64>, rng: &mut Rng) -> Vec<T> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            let mut v = z * scale;
            if let Some(c) = clip {
                v = v.clamp(-c, c);
            }
            T::of(v)
        })
        .collect()
}

impl<T: Scalar> Agent<T> {
    /// Initialize every network from the run seed.
    pub fn new(cfg: AlgoConfig, state_dim: usize, act_dim: usize, seed: u64) -> Self {
        let mut init = rng_for(seed, stream::NETWORK_INIT, 0);
        let actor = Mlp::init(actor_architecture(&cfg, state_dim, act_dim), ACTOR_OUTPUT_SCALE, &mut init);
        let critics: Vec<Mlp<T>> = (0..cfg.n_critics)
            .map(|_| Mlp::init(critic_architecture(&cfg, state_dim, act_dim), 1.0, &mut init))
            .collect();
        let actor_target = (cfg.algorithm == Algorithm::Td3).then(|| actor.clone());
        Self {
            state_dim,
            act_dim,
            actor_opt: Adam::new(actor.params.len()),
            critic_opts: critics.iter().map(|c| Adam::new(c.params.len())).collect(),
            alpha_opt: Adam::new(1),
            critic_targets: critics.clone(),
            log_alpha: T::of(cfg.init_alpha.ln()),
            actor_target,
            actor,
            critics,
            updates: 0,
            subset_rng: rng_for(seed, stream::ENSEMBLE_SUBSET, 0),
            cfg,
        }
    }

    pub fn alpha(&self) -> T {
        self.log_alpha.exp()
    }

    /// One gradient update of the configured algorithm.
    pub fn update(&mut self, batch: &Batch<T>, rng: &mut Rng) -> LossRecord {
        match self.cfg.algorithm {
            Algorithm::Td3 => self.td3_update(batch, rng),
            Algorithm::Sac => self.soft_update(batch, rng, CriticAggregate::Min),
            Algorithm::Redq => self.soft_update(batch, rng, CriticAggregate::Mean),
        }
    }

    fn regress_critics(&mut self, batch: &Batch<T>, targets: &[T]) -> f64 {
        let mut total = 0.0;
        for (critic, opt) in self.critics.iter_mut().zip(self.critic_opts.iter_mut()) {
            let (loss, grad) = critic_loss(critic, batch, targets, self.act_dim);
            opt.step(&mut critic.params, &grad, self.cfg.lr);
            total += loss.to_f64().unwrap();
        }
        total / self.critics.len() as f64
    }

    fn td3_update(&mut self, batch: &Batch<T>, rng: &mut Rng) -> LossRecord {
        let n = batch.size * self.act_dim;
        let smoothing = normal_draws(n, self.cfg.target_noise, Some(self.cfg.target_noise_clip), rng);
        let actor_target = self.actor_target.as_ref().expect("TD3 keeps an actor target");
        let targets = td3_targets(actor_target, &self.critic_targets, batch, &smoothing, self.cfg.gamma);
        let critic_loss = self.regress_critics(batch, &targets);
        self.updates += 1;
        let mut actor_loss = None;
        if self.updates % self.cfg.policy_delay as u64 == 0 {
            let (loss, grad) = td3_actor_loss(&self.actor, &self.critics[0], &batch.states, batch.size);
            self.actor_opt.step(&mut self.actor.params, &grad, self.cfg.lr);
            actor_loss = Some(loss.to_f64().unwrap());
            let tau = self.cfg.tau;
            polyak(&mut self.actor_target.as_mut().unwrap().params, &self.actor.params, tau);
            for (t, c) in self.critic_targets.iter_mut().zip(&self.critics) {
                polyak(&mut t.params, &c.params, tau);
            }
        }
        LossRecord {
            critic_loss,
            actor_loss,
            alpha: 0.0,
        }
    }

    fn target_subset(&mut self) -> Vec<usize> {
        let (n, m) = (self.cfg.n_critics, self.cfg.subset_size);
        if m >= n {
            (0..n).collect()
        } else {
            let mut idx = sample_indices(&mut self.subset_rng, n, m).into_vec();
            idx.sort_unstable();
            idx
        }
    }

    fn soft_update(&mut self, batch: &Batch<T>, rng: &mut Rng, aggregate: CriticAggregate) -> LossRecord {
        let n = batch.size * self.act_dim;
        let eps_next = normal_draws(n, 1.0, None, rng);
        let alpha = self.alpha();
        let subset = self.target_subset();
        let targets = soft_targets(
            &self.actor,
            subset.iter().map(|&i| &self.critic_targets[i]),
            batch,
            &eps_next,
            alpha,
            self.cfg.gamma,
        );
        let critic_loss = self.regress_critics(batch, &targets);
        self.updates += 1;
        let mut actor_loss = None;
        if self.updates % self.cfg.policy_delay as u64 == 0 {
            let eps = normal_draws(n, 1.0, None, rng);
            let (loss, grad, log_probs) =
                soft_actor_loss(&self.actor, &self.critics, aggregate, &batch.states, &eps, alpha, batch.size);
            self.actor_opt.step(&mut self.actor.params, &grad, self.cfg.lr);
            actor_loss = Some(loss.to_f64().unwrap());
            let (_, g_alpha) = temperature_loss(self.log_alpha, &log_probs, self.cfg.target_entropy);
            let mut la = [self.log_alpha];
            self.alpha_opt.step(&mut la, &[g_alpha], self.cfg.lr);
            self.log_alpha = la[0];
        }
        for (t, c) in self.critic_targets.iter_mut().zip(&self.critics) {
            polyak(&mut t.params, &c.params, self.cfg.tau);
        }
        LossRecord {
            critic_loss,
            actor_loss,
            alpha: self.alpha().to_f64().unwrap(),
        }
    }
}

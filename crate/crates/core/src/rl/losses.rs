//! Pure loss-and-gradient functions of the three algorithms.
//!
//! Every function takes networks and a minibatch (plus any pre-drawn noise),
//! returns the scalar loss and the exact gradient with respect to the
//! trainable parameters, and mutates nothing.

use super::{Batch, Mlp, Scalar};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

fn ln_2pi<T: Scalar>() -> T {
    T::of((2.0 * std::f64::consts::PI).ln())
}

fn softplus<T: Scalar>(x: T) -> T {
    x.max(T::zero()) + (-x.abs()).exp().ln_1p()
}

/// Row-wise `[s | a]`.
pub fn concat_rows<T: Scalar>(a: &[T], a_dim: usize, b: &[T], b_dim: usize, batch: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(batch * (a_dim + b_dim));
    for i in 0..batch {
        out.extend_from_slice(&a[i * a_dim..(i + 1) * a_dim]);
        out.extend_from_slice(&b[i * b_dim..(i + 1) * b_dim]);
    }
    out
}

fn q_values<T: Scalar>(critic: &Mlp<T>, states: &[T], actions: &[T], state_dim: usize, act_dim: usize, batch: usize) -> Vec<T> {
    let sa = concat_rows(states, state_dim, actions, act_dim, batch);
    critic.forward(&sa, batch).expect("critic input width").output
}

/// `∂(Σ_b w_b · Q(s_b, a_b))/∂a` for one critic.
fn q_action_grad<T: Scalar>(
    critic: &Mlp<T>,
    states: &[T],
    actions: &[T],
    weights: &[T],
    state_dim: usize,
    act_dim: usize,
    batch: usize,
) -> Vec<T> {
    let sa = concat_rows(states, state_dim, actions, act_dim, batch);
    let tape = critic.forward(&sa, batch).expect("critic input width");
    let mut scratch = vec![T::zero(); critic.arch.num_params];
    let mut dsa = vec![T::zero(); sa.len()];
    critic.backward(&tape, &sa, weights, &mut scratch, Some(&mut dsa));
    let d = state_dim + act_dim;
    let mut out = Vec::with_capacity(batch * act_dim);
    for i in 0..batch {
        out.extend_from_slice(&dsa[i * d + state_dim..(i + 1) * d]);
    }
    out
}

/// Deterministic policy head: `tanh` of the actor output.
pub fn deterministic_actions<T: Scalar>(actor: &Mlp<T>, states: &[T], batch: usize) -> Vec<T> {
    let out = actor.forward(states, batch).expect("actor input width").output;
    let a = actor.arch.output_dim;
    if a == 0 {
        return out;
    }
    out.into_iter().map(|v| v.tanh()).collect()
}

/// Mean of `(Q(s, a) − y)²` over the batch and its gradient.
pub fn critic_loss<T: Scalar>(critic: &Mlp<T>, batch: &Batch<T>, targets: &[T], act_dim: usize) -> (T, Vec<T>) {
    let n = batch.size;
    let state_dim = batch.states.len() / n;
    let sa = concat_rows(&batch.states, state_dim, &batch.actions, act_dim, n);
    let tape = critic.forward(&sa, n).expect("critic input width");
    let inv = T::one() / T::of(n as f64);
    let mut loss = T::zero();
    let mut d_out = Vec::with_capacity(n);
    for (q, y) in tape.output.iter().zip(targets) {
        let e = *q - *y;
        loss = loss + e * e * inv;
        d_out.push(T::of(2.0) * e * inv);
    }
    let mut grad = vec![T::zero(); critic.arch.num_params];
    critic.backward(&tape, &sa, &d_out, &mut grad, None);
    (loss, grad)
}

/// TD3 target: `r + γ·(1 − d)·min_i Q'_i(s', clip(π'(s') + ξ, −1, 1))`, with
/// the clipped smoothing noise `ξ` drawn by the caller.
pub fn td3_targets<T: Scalar>(
    actor_target: &Mlp<T>,
    critic_targets: &[Mlp<T>],
    batch: &Batch<T>,
    smoothing: &[T],
    gamma: f64,
) -> Vec<T> {
    let n = batch.size;
    let act_dim = actor_target.arch.output_dim;
    let state_dim = batch.next_states.len() / n;
    let mut next_a = deterministic_actions(actor_target, &batch.next_states, n);
    for (a, e) in next_a.iter_mut().zip(smoothing) {
        *a = (*a + *e).max(-T::one()).min(T::one());
    }
    let qmin = min_over(critic_targets.iter(), &batch.next_states, &next_a, state_dim, act_dim, n);
    let g = T::of(gamma);
    (0..n).map(|i| batch.rewards[i] + g * batch.not_done[i] * qmin[i]).collect()
}

fn min_over<'a, T: Scalar>(
    critics: impl Iterator<Item = &'a Mlp<T>>,
    states: &[T],
    actions: &[T],
    state_dim: usize,
    act_dim: usize,
    batch: usize,
) -> Vec<T> {
    let mut out: Option<Vec<T>> = None;
    for c in critics {
        let q = q_values(c, states, actions, state_dim, act_dim, batch);
        out = Some(match out {
            None => q,
            Some(m) => m.into_iter().zip(q).map(|(a, b)| if b < a { b } else { a }).collect(),
        });
    }
    out.expect("at least one critic")
}

/// TD3 actor objective `−mean Q₁(s, tanh(π(s)))`.
pub fn td3_actor_loss<T: Scalar>(actor: &Mlp<T>, critic: &Mlp<T>, states: &[T], batch: usize) -> (T, Vec<T>) {
    let act_dim = actor.arch.output_dim;
    let state_dim = actor.arch.input_dim;
    let tape = actor.forward(states, batch).expect("actor input width");
    let actions: Vec<T> = tape.output.iter().map(|v| v.tanh()).collect();
    let q = q_values(critic, states, &actions, state_dim, act_dim, batch);
    let inv = T::one() / T::of(batch as f64);
    let loss = -q.iter().fold(T::zero(), |s, v| s + *v) * inv;
    let weights = vec![-inv; batch];
    let da = q_action_grad(critic, states, &actions, &weights, state_dim, act_dim, batch);
    let d_raw: Vec<T> = da.iter().zip(&actions).map(|(g, a)| *g * (T::one() - *a * *a)).collect();
    let mut grad = vec![T::zero(); actor.arch.num_params];
    actor.backward(&tape, states, &d_raw, &mut grad, None);
    (loss, grad)
}

/// Reparameterized sample of the tanh-squashed Gaussian head.
#[derive(Debug, Clone)]
pub struct SquashedSample<T> {
    pub actions: Vec<T>,
    pub log_probs: Vec<T>,
    /// σ·ε per element, 0 where the log-std is clamped.
    pub sigma_eps: Vec<T>,
    /// 1 where the log-std is inside its clamp interval.
    pub log_std_live: Vec<T>,
}

/// `out` rows are `[μ (A) | log σ (A)]`; `eps` rows are standard normal draws.
pub fn squashed_sample<T: Scalar>(out: &[T], eps: &[T], act_dim: usize, batch: usize) -> SquashedSample<T> {
    let (lo, hi) = (T::of(LOG_STD_MIN), T::of(LOG_STD_MAX));
    let half = T::of(0.5);
    let ln2 = T::of(std::f64::consts::LN_2);
    let two = T::of(2.0);
    let mut s = SquashedSample {
        actions: Vec::with_capacity(batch * act_dim),
        log_probs: Vec::with_capacity(batch),
        sigma_eps: Vec::with_capacity(batch * act_dim),
        log_std_live: Vec::with_capacity(batch * act_dim),
    };
    for b in 0..batch {
        let row = &out[b * 2 * act_dim..(b + 1) * 2 * act_dim];
        let mut lp = T::zero();
        for j in 0..act_dim {
            let raw = row[act_dim + j];
            let live = raw > lo && raw < hi;
            let ls = raw.max(lo).min(hi);
            let sigma = ls.exp();
            let e = eps[b * act_dim + j];
            let u = row[j] + sigma * e;
            lp = lp - half * e * e - ls - half * ln_2pi::<T>() - two * (ln2 - u - softplus(-two * u));
            s.actions.push(u.tanh());
            s.sigma_eps.push(if live { sigma * e } else { T::zero() });
            s.log_std_live.push(if live { T::one() } else { T::zero() });
        }
        s.log_probs.push(lp);
    }
    s
}

/// Backpropagate `∂L/∂a` and `∂L/∂log π` of a squashed sample into the
/// actor's raw `[μ | log σ]` outputs.
fn squashed_backward<T: Scalar>(s: &SquashedSample<T>, d_action: &[T], d_logp: &[T], act_dim: usize, batch: usize) -> Vec<T> {
    let two = T::of(2.0);
    let mut d_out = vec![T::zero(); batch * 2 * act_dim];
    for b in 0..batch {
        for j in 0..act_dim {
            let k = b * act_dim + j;
            let a = s.actions[k];
            let du = d_action[k] * (T::one() - a * a) + d_logp[b] * two * a;
            d_out[b * 2 * act_dim + j] = du;
            d_out[b * 2 * act_dim + act_dim + j] = (du * s.sigma_eps[k] - d_logp[b]) * s.log_std_live[k];
        }
    }
    d_out
}

/// Soft Bellman target with the minimum over the given target critics:
/// `r + γ·(1 − d)·(min_i Q'_i(s', a') − α·log π(a'|s'))`, `a' ~ π(·|s')`.
pub fn soft_targets<'a, T: Scalar>(
    actor: &Mlp<T>,
    critic_targets: impl Iterator<Item = &'a Mlp<T>>,
    batch: &Batch<T>,
    eps: &[T],
    alpha: T,
    gamma: f64,
) -> Vec<T> {
    let n = batch.size;
    let act_dim = actor.arch.output_dim / 2;
    let state_dim = actor.arch.input_dim;
    let out = actor.forward(&batch.next_states, n).expect("actor input width").output;
    let s = squashed_sample(&out, eps, act_dim, n);
    let qmin = min_over(critic_targets, &batch.next_states, &s.actions, state_dim, act_dim, n);
    let g = T::of(gamma);
    (0..n)
        .map(|i| batch.rewards[i] + g * batch.not_done[i] * (qmin[i] - alpha * s.log_probs[i]))
        .collect()
}

/// How the actor objective combines several critics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticAggregate {
    Min,
    Mean,
}

/// Soft actor objective `mean(α·log π(ã|s) − Q_agg(s, ã))`. Returns the loss,
/// the actor gradient and the batch log-probabilities (for the temperature).
pub fn soft_actor_loss<T: Scalar>(
    actor: &Mlp<T>,
    critics: &[Mlp<T>],
    aggregate: CriticAggregate,
    states: &[T],
    eps: &[T],
    alpha: T,
    batch: usize,
) -> (T, Vec<T>, Vec<T>) {
    let act_dim = actor.arch.output_dim / 2;
    let state_dim = actor.arch.input_dim;
    let tape = actor.forward(states, batch).expect("actor input width");
    let s = squashed_sample(&tape.output, eps, act_dim, batch);
    let inv = T::one() / T::of(batch as f64);
    let qs: Vec<Vec<T>> = critics
        .iter()
        .map(|c| q_values(c, states, &s.actions, state_dim, act_dim, batch))
        .collect();
    // Per-sample weight of each critic in Q_agg.
    let mut weights = vec![vec![T::zero(); batch]; critics.len()];
    let mut q_agg = vec![T::zero(); batch];
    let n_c = T::of(critics.len() as f64);
    for b in 0..batch {
        match aggregate {
            CriticAggregate::Min => {
                let mut best = 0;
                for i in 1..critics.len() {
                    if qs[i][b] < qs[best][b] {
                        best = i;
                    }
                }
                weights[best][b] = T::one();
                q_agg[b] = qs[best][b];
            }
            CriticAggregate::Mean => {
                let mut sum = T::zero();
                for (i, q) in qs.iter().enumerate() {
                    weights[i][b] = T::one() / n_c;
                    sum = sum + q[b];
                }
                q_agg[b] = sum / n_c;
            }
        }
    }
    let mut loss = T::zero();
    for b in 0..batch {
        loss = loss + (alpha * s.log_probs[b] - q_agg[b]) * inv;
    }
    let mut d_action = vec![T::zero(); batch * act_dim];
    for (i, c) in critics.iter().enumerate() {
        if weights[i].iter().all(|w| *w == T::zero()) {
            continue;
        }
        let w: Vec<T> = weights[i].iter().map(|w| -*w * inv).collect();
        let g = q_action_grad(c, states, &s.actions, &w, state_dim, act_dim, batch);
        for (d, v) in d_action.iter_mut().zip(g) {
            *d = *d + v;
        }
    }
    let d_logp = vec![alpha * inv; batch];
    let d_out = squashed_backward(&s, &d_action, &d_logp, act_dim, batch);
    let mut grad = vec![T::zero(); actor.arch.num_params];
    actor.backward(&tape, states, &d_out, &mut grad, None);
    (loss, grad, s.log_probs)
}

/// Temperature objective `−mean(log α · (log π + H̄))` and its derivative in log α.
pub fn temperature_loss<T: Scalar>(log_alpha: T, log_probs: &[T], target_entropy: f64) -> (T, T) {
    let h = T::of(target_entropy);
    let inv = T::one() / T::of(log_probs.len() as f64);
    let mean = log_probs.iter().fold(T::zero(), |s, lp| s + (*lp + h) * inv);
    (-log_alpha * mean, -mean)
}

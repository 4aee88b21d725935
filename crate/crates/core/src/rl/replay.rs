use std::collections::VecDeque;

use rand::Rng as _;

use crate::rng::Rng;

/// One stored transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f32>,
    pub action: Vec<f32>,
    pub reward: f32,
    pub next_state: Vec<f32>,
    /// True only when bootstrapping must stop (physics divergence).
    pub terminal: bool,
}

/// A sampled minibatch in row-major flat buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch<T> {
    pub size: usize,
    pub states: Vec<T>,
    pub actions: Vec<T>,
    pub rewards: Vec<T>,
    pub next_states: Vec<T>,
    /// 1 − terminal.
    pub not_done: Vec<T>,
}

/// FIFO replay memory with uniform sampling with replacement.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self {
            capacity,
            items: VecDeque::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn get(&self, i: usize) -> Option<&Transition> {
        self.items.get(i)
    }

    pub fn sample(&self, size: usize, rng: &mut Rng) -> Option<Batch<f32>> {
        if self.items.len() < size || size == 0 {
            return None;
        }
        let first = &self.items[0];
        let (sd, ad) = (first.state.len(), first.action.len());
        let mut b = Batch {
            size,
            states: Vec::with_capacity(size * sd),
            actions: Vec::with_capacity(size * ad),
            rewards: Vec::with_capacity(size),
            next_states: Vec::with_capacity(size * sd),
            not_done: Vec::with_capacity(size),
        };
        for _ in 0..size {
            let t = &self.items[rng.random_range(0..self.items.len())];
            b.states.extend_from_slice(&t.state);
            b.actions.extend_from_slice(&t.action);
            b.rewards.push(t.reward);
            b.next_states.extend_from_slice(&t.next_state);
            b.not_done.push(if t.terminal { 0.0 } else { 1.0 });
        }
        Some(b)
    }
}

impl<T: super::Scalar> Batch<T> {
    pub fn cast<U: super::Scalar>(&self) -> Batch<U> {
        let c = |v: &Vec<T>| v.iter().map(|x| U::of(x.to_f64().unwrap())).collect();
        Batch {
            size: self.size,
            states: c(&self.states),
            actions: c(&self.actions),
            rewards: c(&self.rewards),
            next_states: c(&self.next_states),
            not_done: c(&self.not_done),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    fn t(i: usize) -> Transition {
        Transition {
            state: vec![i as f32; 3],
            action: vec![0.0; 2],
            reward: i as f32,
            next_state: vec![i as f32 + 1.0; 3],
            terminal: false,
        }
    }

    #[test]
    fn eviction_drops_only_the_oldest() {
        let mut rb = ReplayBuffer::new(4);
        for i in 0..5 {
            rb.push(t(i));
        }
        assert_eq!(rb.len(), 4);
        for i in 0..4 {
            assert_eq!(rb.get(i).unwrap(), &t(i + 1));
        }
    }

    #[test]
    fn sampling_needs_a_full_batch_and_repeats() {
        let mut rb = ReplayBuffer::new(10);
        for i in 0..3 {
            rb.push(t(i));
        }
        assert!(rb.sample(4, &mut rng_for(0, 0, 0)).is_none());
        let a = rb.sample(3, &mut rng_for(0, 0, 0)).unwrap();
        let b = rb.sample(3, &mut rng_for(0, 0, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.states.len(), 9);
        assert!(a.rewards.iter().all(|r| (0.0..3.0).contains(r)));
    }
}

use std::collections::VecDeque;

/// Concatenates the `k` most recent observations, newest first. Until `k`
/// observations exist the earliest one fills the remaining slots.
#[derive(Debug, Clone)]
pub struct FrameStack {
    k: usize,
    frames: VecDeque<Vec<f64>>,
}

impl FrameStack {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "frame stack needs k >= 1");
        Self {
            k,
            frames: VecDeque::with_capacity(k),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn clear(&mut self) {
        self.frames.clear();
    }

    pub fn push(&mut self, obs: &[f64]) -> Vec<f64> {
        self.frames.push_front(obs.to_vec());
        self.frames.truncate(self.k);
        self.current()
    }

    /// The stacked state after the latest push (empty before any push).
    pub fn current(&self) -> Vec<f64> {
        let Some(oldest) = self.frames.back() else {
            return Vec::new();
        };
        let mut out = Vec::with_capacity(self.k * oldest.len());
        for f in &self.frames {
            out.extend_from_slice(f);
        }
        for _ in self.frames.len()..self.k {
            out.extend_from_slice(oldest);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_by_twenty_nine() {
        let mut fs = FrameStack::new(4);
        let obs = vec![0.5; 29];
        assert_eq!(fs.push(&obs).len(), 116);
    }

    #[test]
    fn first_step_repeats_first_observation() {
        let mut fs = FrameStack::new(4);
        let s = fs.push(&[1.0, 2.0]);
        assert_eq!(s, vec![1.0, 2.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let s = fs.push(&[3.0, 4.0]);
        assert_eq!(s, vec![3.0, 4.0, 1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
    }

    #[test]
    fn newest_first_after_warmup() {
        let mut fs = FrameStack::new(3);
        for i in 0..5 {
            fs.push(&[i as f64]);
        }
        assert_eq!(fs.current(), vec![4.0, 3.0, 2.0]);
    }

    #[test]
    fn k_one_is_identity() {
        let mut fs = FrameStack::new(1);
        fs.push(&[1.0]);
        assert_eq!(fs.push(&[9.0, 8.0]), vec![9.0, 8.0]);
    }
}

use std::collections::VecDeque;

/// Fixed integer-step delay with hold-first warmup: before `delay` samples
/// have been seen, the earliest sample is repeated.
#[derive(Debug, Clone)]
pub struct DelayLine<T> {
    delay: usize,
    queue: VecDeque<T>,
}

impl<T: Clone> DelayLine<T> {
    pub fn new(delay: usize) -> Self {
        Self {
            delay,
            queue: VecDeque::with_capacity(delay + 1),
        }
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    pub fn clear(&mut self) {
        self.queue.clear();
    }

    /// Push the newest sample and return the one `delay` steps old.
    pub fn push_pop(&mut self, sample: T) -> T {
        self.queue.push_back(sample);
        if self.queue.len() > self.delay + 1 {
            self.queue.pop_front();
        }
        self.queue.front().cloned().expect("queue holds at least the pushed sample")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn run(delay: usize, input: &[i32]) -> Vec<i32> {
        let mut line = DelayLine::new(delay);
        input.iter().map(|&x| line.push_pop(x)).collect()
    }

    #[test]
    fn zero_delay_is_identity() {
        assert_eq!(run(0, &[1, 2, 3]), vec![1, 2, 3]);
    }

    #[test]
    fn two_step_delay_holds_first() {
        assert_eq!(run(2, &[10, 11, 12, 13]), vec![10, 10, 10, 11]);
    }

    #[test]
    fn ten_step_delay_shifts_by_ten() {
        let input: Vec<i32> = (0..40).collect();
        let out = run(10, &input);
        for t in 10..40 {
            assert_eq!(out[t], input[t - 10]);
        }
    }

    #[test]
    fn clear_restarts_warmup() {
        let mut line = DelayLine::new(1);
        line.push_pop(1);
        line.push_pop(2);
        line.clear();
        assert_eq!(line.push_pop(7), 7);
    }

    proptest! {
        #[test]
        fn delays_compose(d1 in 0usize..6, d2 in 0usize..6, input in prop::collection::vec(any::<i16>(), 20..40)) {
            let mut a = DelayLine::new(d1);
            let mut b = DelayLine::new(d2);
            let mut both = DelayLine::new(d1 + d2);
            for (t, &x) in input.iter().enumerate() {
                let chained = b.push_pop(a.push_pop(x));
                let direct = both.push_pop(x);
                if t >= d1 + d2 {
                    prop_assert_eq!(chained, direct);
                }
            }
        }
    }
}

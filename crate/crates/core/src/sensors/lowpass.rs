/// First-order exponential smoother `y ← α·x + (1 − α)·y`, seeded with the
/// first sample.
#[derive(Debug, Clone)]
pub struct Lowpass {
    alpha: f64,
    state: Option<f64>,
}

impl Lowpass {
    /// `alpha` must lie in (0, 1].
    pub fn new(alpha: f64) -> Self {
        assert!(alpha > 0.0 && alpha <= 1.0, "lowpass alpha {alpha} outside (0, 1]");
        Self { alpha, state: None }
    }

    pub fn reset(&mut self) {
        self.state = None;
    }

    pub fn filter(&mut self, x: f64) -> f64 {
        let y = match self.state {
            None => x,
            Some(_) if self.alpha == 1.0 => x,
            Some(prev) => self.alpha * x + (1.0 - self.alpha) * prev,
        };
        self.state = Some(y);
        y
    }
}

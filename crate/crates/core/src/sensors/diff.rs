//! Smooth noise-robust differentiation (Holoborodko's centred filters).
//!
//! For an odd window `W = 2M + 1` with `m = (W − 3) / 2` the estimate is
//!
//! ```text
//! f'(t) ≈ (1 / h) · Σ_{k=1..M} c_k · (f_k − f_−k),
//! c_k = [C(2m, m − k + 1) − C(2m, m − k − 1)] / 2^(2m+1)
//! ```
//!
//! which for `W = 7` gives `(5(f₁ − f₋₁) + 4(f₂ − f₋₂) + (f₃ − f₋₃)) / 32h`.
//! The filters are exact on polynomials up to degree 2 and roll off high
//! frequencies instead of amplifying them. The estimate refers to the centre
//! of the window, so a causal stream reads it `(W − 1) / 2` samples late.

use std::collections::VecDeque;

fn binomial(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Coefficients `c_1..c_M` for an odd window length `w >= 3`.
pub fn holoborodko_coefficients(window: usize) -> Vec<f64> {
    assert!(window >= 3 && window % 2 == 1, "window must be odd and >= 3, got {window}");
    let half = (window - 1) / 2;
    let m = (window as i64 - 3) / 2;
    let scale = 2f64.powi(2 * m as i32 + 1);
    (1..=half as i64)
        .map(|k| (binomial(2 * m, m - k + 1) - binomial(2 * m, m - k - 1)) / scale)
        .collect()
}

/// Streaming differentiator over a scalar channel sampled every `h` seconds.
#[derive(Debug, Clone)]
pub struct Differentiator {
    coeffs: Vec<f64>,
    h: f64,
    window: VecDeque<f64>,
}

impl Differentiator {
    pub fn new(window: usize, h: f64) -> Self {
        Self {
            coeffs: holoborodko_coefficients(window),
            h,
            window: VecDeque::with_capacity(window),
        }
    }

    pub fn window_len(&self) -> usize {
        2 * self.coeffs.len() + 1
    }

    pub fn reset(&mut self) {
        self.window.clear();
    }

    /// True once a full window has been seen.
    pub fn is_warm(&self) -> bool {
        self.window.len() == self.window_len()
    }

    /// Push a sample and return the rate estimate, or 0 during warmup.
    pub fn push(&mut self, x: f64) -> f64 {
        if self.window.len() == self.window_len() {
            self.window.pop_front();
        }
        self.window.push_back(x);
        self.estimate()
    }

    /// Rate estimate at the centre of the current window (0 during warmup).
    pub fn estimate(&self) -> f64 {
        if !self.is_warm() {
            return 0.0;
        }
        let centre = self.coeffs.len();
        let acc: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * (self.window[centre + i + 1] - self.window[centre - i - 1]))
            .sum();
        acc / self.h
    }
}

use super::Scalar;

/// Bias-corrected Adam over one flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl<T: Scalar> Adam<T> {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![T::zero(); len],
            v: vec![T::zero(); len],
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn step(&mut self, params: &mut [T], grads: &[T], lr: f64) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grads.len(), self.m.len());
        self.t += 1;
        let (b1, b2) = (T::of(self.beta1), T::of(self.beta2));
        let (one_b1, one_b2) = (T::of(1.0 - self.beta1), T::of(1.0 - self.beta2));
        let c1 = T::of(1.0 - self.beta1.powi(self.t as i32));
        let c2 = T::of(1.0 - self.beta2.powi(self.t as i32));
        let lr = T::of(lr);
        let eps = T::of(self.eps);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = b1 * self.m[i] + one_b1 * g;
            self.v[i] = b2 * self.v[i] + one_b2 * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] = params[i] - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

/// `target ← (1 − τ)·target + τ·online`, evaluated as `t + τ·(o − t)` so
/// equal networks stay bitwise equal.
pub fn polyak<T: Scalar>(target: &mut [T], online: &[T], tau: f64) {
    let mix = T::of(tau);
    for (t, o) in target.iter_mut().zip(online) {
        *t = *t + mix * (*o - *t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = vec![0.3f64, -1.0];
        let mut opt = Adam::new(2);
        opt.step(&mut p, &[0.0, 0.0], 3e-4);
        assert_eq!(p, vec![0.3, -1.0]);
    }

    #[test]
    fn first_step_by_hand() {
        let mut p = vec![1.0f64, 2.0];
        let g = [0.5, -2e-3];
        let mut opt = Adam::new(2);
        opt.step(&mut p, &g, 1e-3);
        for i in 0..2 {
            let m_hat = 0.1 * g[i] / 0.1;
            let v_hat = 0.001 * g[i] * g[i] / (1.0 - 0.999);
            let want = [1.0, 2.0][i] - 1e-3 * m_hat / (v_hat.sqrt() + 1e-8);
            assert!((p[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn split_tensors_match_flat_update() {
        let g = [0.1, -0.2, 0.3, 0.05];
        let mut flat = vec![1.0f64, 2.0, 3.0, 4.0];
        let mut opt = Adam::new(4);
        let (mut a, mut b) = (vec![1.0f64, 2.0], vec![3.0f64, 4.0]);
        let (mut oa, mut ob) = (Adam::new(2), Adam::new(2));
        for _ in 0..3 {
            opt.step(&mut flat, &g, 0.01);
            oa.step(&mut a, &g[..2], 0.01);
            ob.step(&mut b, &g[2..], 0.01);
        }
        assert_eq!(flat, [a, b].concat());
    }

    #[test]
    fn polyak_geometric_decay() {
        let mut target = vec![1.0f64];
        let tau = 0.005;
        for _ in 0..10 {
            polyak(&mut target, &[0.0], tau);
        }
        assert!((target[0] - (1.0 - tau).powi(10)).abs() < 1e-15);
        let mut t2 = vec![0.0f64];
        polyak(&mut t2, &[2.0], tau);
        polyak(&mut t2, &[4.0], tau);
        let want = (1.0 - tau) * tau * 2.0 + tau * 4.0;
        assert!((t2[0] - want).abs() < 1e-15);
    }
}

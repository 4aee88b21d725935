//! Multilayer perceptrons with optional dense connections.
//!
//! With dense connections every hidden layer after the first sees its
//! predecessor's activations concatenated with the raw network input,
//! `[h_{l−1} | x]`; the output layer sees the last hidden layer only. Each
//! layer stores `W` (out × in, row-major) followed by `b` in one flat
//! parameter vector. Activations are row-major `[batch × width]`.

use rand::Rng as _;

use super::Scalar;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layer {
    /// Width of the previous layer's activations feeding this layer (0 for the first).
    pub prev_dim: usize,
    /// Columns taken from the raw network input.
    pub input_cols: usize,
    pub out_dim: usize,
    pub offset: usize,
}

impl Layer {
    pub fn in_dim(&self) -> usize {
        self.prev_dim + self.input_cols
    }
    pub fn weight_len(&self) -> usize {
        self.in_dim() * self.out_dim
    }
    pub fn bias_offset(&self) -> usize {
        self.offset + self.weight_len()
    }
    pub fn len(&self) -> usize {
        self.weight_len() + self.out_dim
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Architecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub dense: bool,
    pub layers: Vec<Layer>,
    pub num_params: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("shape mismatch: expected input width {expected}, got {found}")]
pub struct ShapeError {
    pub expected: usize,
    pub found: usize,
}

impl Architecture {
    pub fn new(input_dim: usize, hidden: &[usize], output_dim: usize, dense: bool) -> Self {
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut offset = 0;
        let mut prev = 0;
        for (l, &width) in hidden.iter().enumerate() {
            let input_cols = if l == 0 || dense { input_dim } else { 0 };
            let layer = Layer {
                prev_dim: prev,
                input_cols,
                out_dim: width,
                offset,
            };
            offset += layer.len();
            layers.push(layer);
            prev = width;
        }
        let (prev_dim, input_cols) = if hidden.is_empty() { (0, input_dim) } else { (prev, 0) };
        let out = Layer {
            prev_dim,
            input_cols,
            out_dim: output_dim,
            offset,
        };
        offset += out.len();
        layers.push(out);
        Self {
            input_dim,
            hidden: hidden.to_vec(),
            output_dim,
            dense,
            layers,
            num_params: offset,
        }
    }
}

/// Cached activations of a batched forward pass.
#[derive(Debug, Clone)]
pub struct Tape<T> {
    pub batch: usize,
    /// Post-ReLU activations of each hidden layer.
    pub hidden: Vec<Vec<T>>,
    pub output: Vec<T>,
}

/// `out[b×o] = beta·out + a[b×k] · Wᵀ` where `w` starts at the block's first
/// element and has row stride `w_ld`.
#[allow(clippy::too_many_arguments)]
fn xwt<T: Scalar>(batch: usize, k: usize, o: usize, a: &[T], a_ld: usize, w: &[T], w_ld: usize, beta: T, out: &mut [T]) {
    if batch == 0 || k == 0 || o == 0 {
        return;
    }
    assert!(a.len() >= (batch - 1) * a_ld + k);
    assert!(w.len() >= (o - 1) * w_ld + k);
    assert!(out.len() >= batch * o);
    unsafe {
        T::gemm(
            batch, k, o, T::one(), a.as_ptr(), a_ld as isize, 1, w.as_ptr(), 1, w_ld as isize, beta,
            out.as_mut_ptr(), o as isize, 1,
        )
    }
}

/// `dw[o×k] += dyᵀ[o×b] · a[b×k]`, `dw` row stride `w_ld`.
#[allow(clippy::too_many_arguments)]
fn dyt_x<T: Scalar>(batch: usize, k: usize, o: usize, dy: &[T], a: &[T], a_ld: usize, dw: &mut [T], w_ld: usize) {
    if batch == 0 || k == 0 || o == 0 {
        return;
    }
    assert!(dy.len() >= batch * o);
    assert!(a.len() >= (batch - 1) * a_ld + k);
    assert!(dw.len() >= (o - 1) * w_ld + k);
    unsafe {
        T::gemm(
            o, batch, k, T::one(), dy.as_ptr(), 1, o as isize, a.as_ptr(), a_ld as isize, 1, T::one(),
            dw.as_mut_ptr(), w_ld as isize, 1,
        )
    }
}

/// `dx[b×k] = beta·dx + dy[b×o] · W[o×k]`.
#[allow(clippy::too_many_arguments)]
fn dy_w<T: Scalar>(batch: usize, k: usize, o: usize, dy: &[T], w: &[T], w_ld: usize, beta: T, dx: &mut [T], dx_ld: usize) {
    if batch == 0 || k == 0 || o == 0 {
        return;
    }
    assert!(dy.len() >= batch * o);
    assert!(w.len() >= (o - 1) * w_ld + k);
    assert!(dx.len() >= (batch - 1) * dx_ld + k);
    unsafe {
        T::gemm(
            batch, o, k, T::one(), dy.as_ptr(), o as isize, 1, w.as_ptr(), w_ld as isize, 1, beta,
            dx.as_mut_ptr(), dx_ld as isize, 1,
        )
    }
}

/// An architecture together with its flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    pub arch: Architecture,
    pub params: Vec<T>,
}

impl<T: Scalar> Mlp<T> {
    pub fn zeros(arch: Architecture) -> Self {
        let params = vec![T::zero(); arch.num_params];
        Self { arch, params }
    }

    /// Fan-in scaled uniform initialization, `U(−1/√fan_in, 1/√fan_in)` for
    /// weights and biases; the output layer is further scaled by `output_scale`.
    pub fn init(arch: Architecture, output_scale: f64, rng: &mut Rng) -> Self {
        let mut net = Self::zeros(arch);
        let last = net.arch.layers.len() - 1;
        for (l, layer) in net.arch.layers.clone().iter().enumerate() {
            let bound = 1.0 / (layer.in_dim() as f64).sqrt();
            let scale = if l == last { output_scale } else { 1.0 };
            for p in &mut net.params[layer.offset..layer.offset + layer.len()] {
                *p = T::of(rng.random_range(-bound..bound) * scale);
            }
        }
        net
    }

    pub fn layer_weights(&self, l: usize) -> &[T] {
        let layer = &self.arch.layers[l];
        &self.params[layer.offset..layer.bias_offset()]
    }

    pub fn forward(&self, x: &[T], batch: usize) -> Result<Tape<T>, ShapeError> {
        let d = self.arch.input_dim;
        if x.len() != batch * d {
            return Err(ShapeError {
                expected: d,
                found: if batch == 0 { x.len() } else { x.len() / batch },
            });
        }
        let n_layers = self.arch.layers.len();
        let mut hidden: Vec<Vec<T>> = Vec::with_capacity(n_layers - 1);
        let mut output = Vec::new();
        for (l, layer) in self.arch.layers.iter().enumerate() {
            let o = layer.out_dim;
            let w_ld = layer.in_dim();
            let w = &self.params[layer.offset..layer.bias_offset()];
            let b = &self.params[layer.bias_offset()..layer.bias_offset() + o];
            let mut out = vec![T::zero(); batch * o];
            for row in out.chunks_exact_mut(o) {
                row.copy_from_slice(b);
            }
            if layer.prev_dim > 0 {
                let prev = &hidden[l - 1];
                xwt(batch, layer.prev_dim, o, prev, layer.prev_dim, w, w_ld, T::one(), &mut out);
            }
            if layer.input_cols > 0 {
                xwt(batch, d, o, x, d, &w[layer.prev_dim..], w_ld, T::one(), &mut out);
            }
            if l + 1 < n_layers {
                for v in &mut out {
                    if *v < T::zero() {
                        *v = T::zero();
                    }
                }
                hidden.push(out);
            } else {
                output = out;
            }
        }
        Ok(Tape { batch, hidden, output })
    }

    /// Single-sample forward, output only.
    pub fn predict(&self, x: &[T]) -> Result<Vec<T>, ShapeError> {
        Ok(self.forward(x, 1)?.output)
    }

    /// Reverse pass. Accumulates `∂L/∂θ` into `grad` and, if given,
    /// overwrites `d_input` with `∂L/∂x`.
    pub fn backward(&self, tape: &Tape<T>, x: &[T], d_out: &[T], grad: &mut [T], mut d_input: Option<&mut [T]>) {
        let batch = tape.batch;
        let d = self.arch.input_dim;
        assert_eq!(grad.len(), self.arch.num_params);
        assert_eq!(d_out.len(), batch * self.arch.output_dim);
        if let Some(dx) = d_input.as_deref_mut() {
            assert_eq!(dx.len(), batch * d);
            dx.iter_mut().for_each(|v| *v = T::zero());
        }
        let mut dy = d_out.to_vec();
        for l in (0..self.arch.layers.len()).rev() {
            let layer = self.arch.layers[l];
            let o = layer.out_dim;
            let w_ld = layer.in_dim();
            {
                let (gw, gb) = grad[layer.offset..layer.bias_offset() + o].split_at_mut(layer.weight_len());
                for row in dy.chunks_exact(o) {
                    for (g, v) in gb.iter_mut().zip(row) {
                        *g = *g + *v;
                    }
                }
                if layer.prev_dim > 0 {
                    dyt_x(batch, layer.prev_dim, o, &dy, &tape.hidden[l - 1], layer.prev_dim, gw, w_ld);
                }
                if layer.input_cols > 0 {
                    dyt_x(batch, d, o, &dy, x, d, &mut gw[layer.prev_dim..], w_ld);
                }
            }
            let w = &self.params[layer.offset..layer.bias_offset()];
            if layer.input_cols > 0 {
                if let Some(dx) = d_input.as_deref_mut() {
                    dy_w(batch, d, o, &dy, &w[layer.prev_dim..], w_ld, T::one(), dx, d);
                }
            }
            if layer.prev_dim > 0 {
                let prev = &tape.hidden[l - 1];
                let mut dprev = vec![T::zero(); batch * layer.prev_dim];
                dy_w(batch, layer.prev_dim, o, &dy, w, w_ld, T::zero(), &mut dprev, layer.prev_dim);
                for (g, a) in dprev.iter_mut().zip(prev) {
                    if *a <= T::zero() {
                        *g = T::zero();
                    }
                }
                dy = dprev;
            }
        }
    }

    pub fn cast<U: Scalar>(&self) -> Mlp<U> {
        Mlp {
            arch: self.arch.clone(),
            params: self.params.iter().map(|p| U::of(p.to_f64().unwrap())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    #[test]
    fn dense_shape_law() {
        let a = Architecture::new(116, &[256, 256, 256], 8, true);
        assert_eq!(a.layers[0].in_dim(), 116);
        assert_eq!(a.layers[1].in_dim(), 256 + 116);
        assert_eq!(a.layers[2].in_dim(), 256 + 116);
        assert_eq!(a.layers[3].in_dim(), 256);
        let plain = Architecture::new(116, &[256, 256, 256], 8, false);
        assert!(plain.layers[1..].iter().all(|l| l.in_dim() == 256));
        assert!(plain.num_params < a.num_params);
    }

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::<f64>::zeros(Architecture::new(4, &[3, 3], 2, true));
        let y = net.predict(&[1.0, -2.0, 0.5, 3.0]).unwrap();
        assert_eq!(y, vec![0.0, 0.0]);
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let net = Mlp::<f64>::zeros(Architecture::new(4, &[3], 2, true));
        assert_eq!(net.predict(&[1.0; 5]).unwrap_err(), ShapeError { expected: 4, found: 5 });
    }

    #[test]
    fn hand_evaluated_toy_net() {
        // x(1) -> h(1) -> [h|x] -> h2(1) -> y(1)
        let arch = Architecture::new(1, &[1, 1], 1, true);
        let mut net = Mlp::<f64>::zeros(arch);
        // layer0: w=2, b=-1 ; layer1: w=[3 (h), -0.5 (x)], b=0.25 ; out: w=1.5, b=0.1
        net.params = vec![2.0, -1.0, 3.0, -0.5, 0.25, 1.5, 0.1];
        let x = 1.5;
        let h1 = f64::max(2.0 * x - 1.0, 0.0);
        let h2 = f64::max(3.0 * h1 - 0.5 * x + 0.25, 0.0);
        let want = 1.5 * h2 + 0.1;
        let got = net.predict(&[x]).unwrap()[0];
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn half_squared_output_gradient_on_one_layer() {
        let arch = Architecture::new(2, &[], 2, false);
        let mut net = Mlp::<f64>::zeros(arch);
        net.params = vec![0.5, -1.0, 2.0, 0.25, 0.1, -0.2];
        let x = [0.3, -0.7];
        let tape = net.forward(&x, 1).unwrap();
        let y = tape.output.clone();
        let mut g = vec![0.0; 6];
        net.backward(&tape, &x, &y, &mut g, None);
        let want = [y[0] * x[0], y[0] * x[1], y[1] * x[0], y[1] * x[1], y[0], y[1]];
        for (a, b) in g.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = rng_for(1, 0, 0);
        for dense in [true, false] {
            let arch = Architecture::new(3, &[5, 4], 2, dense);
            let net = Mlp::<f64>::init(arch, 1.0, &mut rng);
            let batch = 3;
            let x: Vec<f64> = (0..batch * 3).map(|i| (i as f64 * 0.37).sin()).collect();
            let c = [0.7, -1.3];
            let loss = |n: &Mlp<f64>, x: &[f64]| -> f64 {
                let y = n.forward(x, batch).unwrap().output;
                y.chunks(2).map(|r| 0.5 * (r[0] * c[0] + r[1] * c[1]).powi(2)).sum()
            };
            let tape = net.forward(&x, batch).unwrap();
            let d_out: Vec<f64> = tape
                .output
                .chunks(2)
                .flat_map(|r| {
                    let s = r[0] * c[0] + r[1] * c[1];
                    [s * c[0], s * c[1]]
                })
                .collect();
            let mut g = vec![0.0; net.arch.num_params];
            let mut dx = vec![0.0; x.len()];
            net.backward(&tape, &x, &d_out, &mut g, Some(&mut dx));
            let eps = 1e-6;
            for i in 0..net.params.len() {
                let mut p = net.clone();
                p.params[i] += eps;
                let mut m = net.clone();
                m.params[i] -= eps;
                let fd = (loss(&p, &x) - loss(&m, &x)) / (2.0 * eps);
                assert!((fd - g[i]).abs() < 1e-7 * (1.0 + fd.abs()), "param {i}: {fd} vs {}", g[i]);
            }
            for i in 0..x.len() {
                let mut xp = x.clone();
                xp[i] += eps;
                let mut xm = x.clone();
                xm[i] -= eps;
                let fd = (loss(&net, &xp) - loss(&net, &xm)) / (2.0 * eps);
                assert!((fd - dx[i]).abs() < 1e-7 * (1.0 + fd.abs()));
            }
        }
    }

    #[test]
    fn f32_and_f64_agree() {
        let mut rng = rng_for(2, 0, 0);
        let net = Mlp::<f64>::init(Architecture::new(6, &[16, 16], 3, true), 1.0, &mut rng);
        let x: Vec<f64> = (0..12).map(|i| (i as f64).cos()).collect();
        let a = net.forward(&x, 2).unwrap().output;
        let xf: Vec<f32> = x.iter().map(|v| *v as f32).collect();
        let b = net.cast::<f32>().forward(&xf, 2).unwrap().output;
        for (a, b) in a.iter().zip(b) {
            assert!((a - b as f64).abs() < 1e-5);
        }
    }
}

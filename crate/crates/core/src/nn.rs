//! Minimal dense networks: flat-parameter MLPs with tanh hidden layers,
//! reverse-mode gradients, an Adam optimizer, and global gradient clipping.
//!
//! Everything is `f64` internally; checkpoints downcast to `f32` on disk.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Total parameter count for a layer-dimension list.
pub fn param_count(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

/// Rational approximation of tanh, |error| < 3e-7 everywhere.
///
/// An order-13/6 minimax quotient evaluated in the square of the argument;
/// ~5x faster than the libm call, which dominates forward-pass cost on
/// 128-wide hidden layers. The backward pass uses 1 - a^2 as the derivative;
/// the approximation is smooth enough that the mismatch against its own true
/// derivative stays orders of magnitude below gradient-check tolerances.
#[inline]
fn tanh_fast(x: f64) -> f64 {
    const CLAMP: f64 = 7.905_311_107_635_49;
    const A1: f64 = 4.893_524_558_917_86e-3;
    const A3: f64 = 6.372_619_288_754_36e-4;
    const A5: f64 = 1.485_722_357_179_79e-5;
    const A7: f64 = 5.122_297_090_371_14e-8;
    const A9: f64 = -8.604_671_522_137_35e-11;
    const A11: f64 = 2.000_187_904_824_77e-13;
    const A13: f64 = -2.760_768_477_423_55e-16;
    const B0: f64 = 4.893_525_185_543_85e-3;
    const B2: f64 = 2.268_434_632_439e-3;
    const B4: f64 = 1.185_347_056_866_54e-4;
    const B6: f64 = 1.198_258_394_667_02e-6;
    let x = x.clamp(-CLAMP, CLAMP);
    let s = x * x;
    let p = (((((A13 * s + A11) * s + A9) * s + A7) * s + A5) * s + A3) * s + A1;
    let q = ((B6 * s + B4) * s + B2) * s + B0;
    x * p / q
}

/// SIMD kernels for the two hot loops: dot products (forward) and scaled
/// accumulation (backward). Feature-gated intrinsics with a portable
/// fallback; results are deterministic for a fixed build, though summation
/// order differs between feature levels.
mod kernels {
    #[cfg(all(target_arch = "x86_64", target_feature = "avx512f"))]
    pub fn dot(a: &[f64], b: &[f64]) -> f64 {
        use std::arch::x86_64::*;
        let n = a.len().min(b.len());
        // SAFETY: every load stays within the first `n` elements of both
        // slices; avx512f is a compile-time target feature here.
        unsafe {
            let mut acc0 = _mm512_setzero_pd();
            let mut acc1 = _mm512_setzero_pd();
            let mut i = 0;
            while i + 16 <= n {
                acc0 = _mm512_fmadd_pd(
                    _mm512_loadu_pd(a.as_ptr().add(i)),
                    _mm512_loadu_pd(b.as_ptr().add(i)),
                    acc0,
                );
                acc1 = _mm512_fmadd_pd(
                    _mm512_loadu_pd(a.as_ptr().add(i + 8)),
                    _mm512_loadu_pd(b.as_ptr().add(i + 8)),
                    acc1,
                );
                i += 16;
            }
            if i + 8 <= n {
                acc0 = _mm512_fmadd_pd(
                    _mm512_loadu_pd(a.as_ptr().add(i)),
                    _mm512_loadu_pd(b.as_ptr().add(i)),
                    acc0,
                );
                i += 8;
            }
            let mut sum = _mm512_reduce_add_pd(acc0) + _mm512_reduce_add_pd(acc1);
            while i < n {
                sum = a[i].mul_add(b[i], sum);
                i += 1;
            }
            sum
        }
    }

    #[cfg(all(target_arch = "x86_64", target_feature = "avx512f"))]
    pub fn axpy(s: f64, x: &[f64], out: &mut [f64]) {
        use std::arch::x86_64::*;
        let n = x.len().min(out.len());
        // SAFETY: same bounds argument as `dot`; stores mirror the loads.
        unsafe {
            let sv = _mm512_set1_pd(s);
            let mut i = 0;
            while i + 8 <= n {
                let acc = _mm512_fmadd_pd(
                    sv,
                    _mm512_loadu_pd(x.as_ptr().add(i)),
                    _mm512_loadu_pd(out.as_ptr().add(i)),
                );
                _mm512_storeu_pd(out.as_mut_ptr().add(i), acc);
                i += 8;
            }
            while i < n {
                out[i] = s.mul_add(x[i], out[i]);
                i += 1;
            }
        }
    }

    #[cfg(all(
        target_arch = "x86_64",
        target_feature = "avx2",
        target_feature = "fma",
        not(target_feature = "avx512f")
    ))]
    pub fn dot(a: &[f64], b: &[f64]) -> f64 {
        use std::arch::x86_64::*;
        let n = a.len().min(b.len());
        // SAFETY: every load stays within the first `n` elements of both
        // slices; avx2+fma are compile-time target features here.
        unsafe {
            let mut acc0 = _mm256_setzero_pd();
            let mut acc1 = _mm256_setzero_pd();
            let mut i = 0;
            while i + 8 <= n {
                acc0 = _mm256_fmadd_pd(
                    _mm256_loadu_pd(a.as_ptr().add(i)),
                    _mm256_loadu_pd(b.as_ptr().add(i)),
                    acc0,
                );
                acc1 = _mm256_fmadd_pd(
                    _mm256_loadu_pd(a.as_ptr().add(i + 4)),
                    _mm256_loadu_pd(b.as_ptr().add(i + 4)),
                    acc1,
                );
                i += 8;
            }
            if i + 4 <= n {
                acc0 = _mm256_fmadd_pd(
                    _mm256_loadu_pd(a.as_ptr().add(i)),
                    _mm256_loadu_pd(b.as_ptr().add(i)),
                    acc0,
                );
                i += 4;
            }
            let acc = _mm256_add_pd(acc0, acc1);
            let mut lanes = [0.0f64; 4];
            _mm256_storeu_pd(lanes.as_mut_ptr(), acc);
            let mut sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
            while i < n {
                sum = a[i].mul_add(b[i], sum);
                i += 1;
            }
            sum
        }
    }

    #[cfg(all(
        target_arch = "x86_64",
        target_feature = "avx2",
        target_feature = "fma",
        not(target_feature = "avx512f")
    ))]
    pub fn axpy(s: f64, x: &[f64], out: &mut [f64]) {
        use std::arch::x86_64::*;
        let n = x.len().min(out.len());
        // SAFETY: same bounds argument as `dot`; stores mirror the loads.
        unsafe {
            let sv = _mm256_set1_pd(s);
            let mut i = 0;
            while i + 4 <= n {
                let acc = _mm256_fmadd_pd(
                    sv,
                    _mm256_loadu_pd(x.as_ptr().add(i)),
                    _mm256_loadu_pd(out.as_ptr().add(i)),
                );
                _mm256_storeu_pd(out.as_mut_ptr().add(i), acc);
                i += 4;
            }
            while i < n {
                out[i] = s.mul_add(x[i], out[i]);
                i += 1;
            }
        }
    }

    #[cfg(not(all(
        target_arch = "x86_64",
        target_feature = "avx2",
        target_feature = "fma"
    )))]
    pub fn dot(a: &[f64], b: &[f64]) -> f64 {
        let mut acc = [0.0f64; 4];
        let chunks = a.len().min(b.len()) / 4;
        let (a4, a_tail) = a.split_at(chunks * 4);
        let (b4, b_tail) = b.split_at(chunks * 4);
        for (ca, cb) in a4.chunks_exact(4).zip(b4.chunks_exact(4)) {
            acc[0] += ca[0] * cb[0];
            acc[1] += ca[1] * cb[1];
            acc[2] += ca[2] * cb[2];
            acc[3] += ca[3] * cb[3];
        }
        let mut sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
        for (x, y) in a_tail.iter().zip(b_tail) {
            sum += x * y;
        }
        sum
    }

    #[cfg(not(all(
        target_arch = "x86_64",
        target_feature = "avx2",
        target_feature = "fma"
    )))]
    pub fn axpy(s: f64, x: &[f64], out: &mut [f64]) {
        for (o, &xv) in out.iter_mut().zip(x) {
            *o += s * xv;
        }
    }
}

use kernels::{axpy, dot};

/// Scratch buffers reused across forward/backward passes to avoid allocation.
#[derive(Debug, Clone)]
pub struct Workspace {
    /// Post-activation values per layer; `acts[0]` is the input copy.
    acts: Vec<Vec<f64>>,
    dz: Vec<f64>,
    dz_prev: Vec<f64>,
}

impl Workspace {
    pub fn new(net: &Mlp) -> Self {
        let acts = net.dims.iter().map(|&d| vec![0.0; d]).collect();
        let widest = net.dims.iter().copied().max().unwrap_or(0);
        Workspace { acts, dz: vec![0.0; widest], dz_prev: vec![0.0; widest] }
    }

    /// Output of the most recent forward pass.
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("workspace always holds the input layer")
    }
}

/// Fully connected network, tanh on hidden layers, linear output.
///
/// Parameters are one flat vector, layer-major: row-major weight matrix
/// then bias for layer 0, then layer 1, and so on.
#[derive(Debug, Clone)]
pub struct Mlp {
    dims: Vec<usize>,
    pub params: Vec<f64>,
}

impl Mlp {
    /// Xavier-uniform initialization; `final_gain` scales the last layer's
    /// weights (small gains give near-uniform initial policies).
    pub fn new(dims: Vec<usize>, seed: u64, final_gain: f64) -> Self {
        assert!(dims.len() >= 2, "network needs input and output dims");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; param_count(&dims)];
        let mut off = 0;
        let last = dims.len() - 2;
        for (layer, w) in dims.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let limit = (6.0 / (n_in + n_out) as f64).sqrt()
                * if layer == last { final_gain } else { 1.0 };
            for p in &mut params[off..off + n_in * n_out] {
                *p = rng.gen_range(-limit..=limit);
            }
            off += n_in * n_out + n_out; // biases stay zero
        }
        Mlp { dims, params }
    }

    /// Rebuild from a flat parameter vector (checkpoint load).
    pub fn from_params(dims: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        if params.len() != param_count(&dims) {
            return Err(Error::Checkpoint(format!(
                "expected {} parameters for dims {dims:?}, got {}",
                param_count(&dims),
                params.len()
            )));
        }
        if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::Checkpoint(format!("non-finite parameter {bad}")));
        }
        Ok(Mlp { dims, params })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn in_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn out_dim(&self) -> usize {
        *self.dims.last().expect("dims non-empty")
    }

    /// Forward pass; activations are cached in `ws` for a later `backward`.
    pub fn forward<'w>(&self, input: &[f64], ws: &'w mut Workspace) -> &'w [f64] {
        assert_eq!(input.len(), self.in_dim(), "input width mismatch");
        ws.acts[0].copy_from_slice(input);
        let mut off = 0;
        let layers = self.dims.len() - 1;
        for layer in 0..layers {
            let (n_in, n_out) = (self.dims[layer], self.dims[layer + 1]);
            let (prev, rest) = ws.acts.split_at_mut(layer + 1);
            let x = prev[layer].as_slice();
            let out = rest[0].as_mut_slice();
            let weights = &self.params[off..off + n_in * n_out];
            let biases = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            for i in 0..n_out {
                let row = &weights[i * n_in..(i + 1) * n_in];
                let acc = biases[i] + dot(row, x);
                out[i] = if layer + 1 < layers { tanh_fast(acc) } else { acc };
            }
            off += n_in * n_out + n_out;
        }
        ws.output()
    }

    /// Accumulate `dL/dparams` into `grad` given `dL/doutput`.
    ///
    /// Must follow a `forward` on the same workspace and input.
    pub fn backward(&self, ws: &mut Workspace, dl_dout: &[f64], grad: &mut [f64]) {
        assert_eq!(dl_dout.len(), self.out_dim(), "output gradient width mismatch");
        assert_eq!(grad.len(), self.params.len(), "gradient buffer mismatch");
        let layers = self.dims.len() - 1;
        ws.dz[..dl_dout.len()].copy_from_slice(dl_dout);
        let mut off = self.params.len();
        for layer in (0..layers).rev() {
            let (n_in, n_out) = (self.dims[layer], self.dims[layer + 1]);
            off -= n_in * n_out + n_out;
            // Hidden layers apply tanh: fold its derivative into dz.
            if layer + 1 < layers {
                for (d, a) in ws.dz[..n_out].iter_mut().zip(&ws.acts[layer + 1]) {
                    *d *= 1.0 - a * a;
                }
            }
            let x = ws.acts[layer].as_slice();
            let weights = &self.params[off..off + n_in * n_out];
            let (grad_w, grad_b) = grad[off..off + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            ws.dz_prev[..n_in].fill(0.0);
            for i in 0..n_out {
                let d = ws.dz[i];
                grad_b[i] += d;
                let row_w = &weights[i * n_in..(i + 1) * n_in];
                let row_g = &mut grad_w[i * n_in..(i + 1) * n_in];
                axpy(d, x, row_g);
                axpy(d, row_w, &mut ws.dz_prev[..n_in]);
            }
            ws.dz[..n_in].copy_from_slice(&ws.dz_prev[..n_in]);
        }
    }
}

/// Adam first-order optimizer over one flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
    pub lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Adam { m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0, lr, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }

    /// One descent step along `grad`.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.m.len(), "optimizer/parameter mismatch");
        assert_eq!(grad.len(), self.m.len(), "optimizer/gradient mismatch");
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Scale `grad` so its L2 norm is at most `max_norm`; returns the pre-clip norm.
pub fn clip_grad_norm(grad: &mut [f64], max_norm: f64) -> f64 {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for g in grad.iter_mut() {
            *g *= scale;
        }
    }
    norm
}

/// Central-finite-difference derivative of `loss` along parameter `idx`.
pub fn finite_difference<F>(net: &mut Mlp, idx: usize, step: f64, mut loss: F) -> f64
where
    F: FnMut(&Mlp) -> f64,
{
    let orig = net.params[idx];
    net.params[idx] = orig + step;
    let up = loss(net);
    net.params[idx] = orig - step;
    let down = loss(net);
    net.params[idx] = orig;
    (up - down) / (2.0 * step)
}

/// Relative error between analytic and numeric derivatives.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

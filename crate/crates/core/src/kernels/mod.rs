//! Reference semantics for every DSP opcode.
//!
//! Every kernel is a direct transcription of its defining sum or recurrence;
//! DFTs are the quadratic double sums, not an FFT. Reductions accumulate
//! strictly left to right. These functions are the oracle that rewritten and
//! lowered programs are checked against.

mod eval;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{eval_graph, printed_values, EvalError};

/// A one-dimensional signal. `logical_len` is shorter than `data` only for
/// run-length encoded values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub data: Vec<f64>,
    pub logical_len: usize,
}

impl Tensor {
    pub fn new(data: Vec<f64>) -> Self {
        let logical_len = data.len();
        Tensor { data, logical_len }
    }

    pub fn zeros(n: usize) -> Self {
        Tensor::new(vec![0.0; n])
    }

    pub fn scalar(v: f64) -> Self {
        Tensor::new(vec![v])
    }

    /// The logically valid prefix.
    pub fn values(&self) -> &[f64] {
        &self.data[..self.logical_len]
    }

    pub fn len(&self) -> usize {
        self.logical_len
    }

    pub fn is_empty(&self) -> bool {
        self.logical_len == 0
    }
}

impl From<Vec<f64>> for Tensor {
    fn from(v: Vec<f64>) -> Self {
        Tensor::new(v)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("attribute out of range: {0}")]
    AttributeRange(String),
    #[error("division by zero at index {index}")]
    DivisionByZero { index: usize },
    #[error("LMS weights diverged (non-finite weight); step size too large")]
    Diverged,
    #[error("operand lengths {0} and {1} differ")]
    LengthMismatch(usize, usize),
}

/// `sin(z)/z`, with the removable singularity filled in.
pub fn sinc(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        z.sin() / z
    }
}

/// Angle `2*pi*k*n/len`, with `k*n` reduced modulo `len` first so large
/// products keep full precision.
pub fn dft_angle(k: usize, n: usize, len: usize) -> f64 {
    TAU * ((k * n) % len) as f64 / len as f64
}

/// One tap of the ideal low-pass response centred on `(taps-1)/2`.
pub fn lowpass_tap(n: usize, taps: usize, wc: f64) -> f64 {
    if 2 * n + 1 == taps {
        wc / PI
    } else {
        let mid = (taps - 1) as f64 / 2.0;
        (wc / PI) * sinc(wc * (n as f64 - mid))
    }
}

pub fn hamming_tap(n: usize, taps: usize) -> f64 {
    0.54 - 0.46 * (TAU * n as f64 / (taps - 1) as f64).cos()
}

fn at(x: &[f64], idx: isize) -> f64 {
    if idx >= 0 && (idx as usize) < x.len() {
        x[idx as usize]
    } else {
        0.0
    }
}

pub fn k_delay(x: &[f64], k: usize) -> Vec<f64> {
    (0..x.len())
        .map(|n| at(x, n as isize - k as isize))
        .collect()
}

/// `y[n] = sum_i h[i] x[n-i]` for `0 <= n < len(x)`.
pub fn k_fir_response(x: &[f64], h: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|n| {
            let mut acc = 0.0;
            for (i, hi) in h.iter().enumerate() {
                acc += hi * at(x, n as isize - i as isize);
            }
            acc
        })
        .collect()
}

/// Full linear convolution, length `len(x) + len(h) - 1`.
pub fn k_conv1d_full(x: &[f64], h: &[f64]) -> Vec<f64> {
    (0..x.len() + h.len() - 1)
        .map(|n| {
            let mut acc = 0.0;
            for (i, hi) in h.iter().enumerate() {
                acc += hi * at(x, n as isize - i as isize);
            }
            acc
        })
        .collect()
}

pub fn k_sliding_window_avg(x: &[f64], window: usize) -> Vec<f64> {
    (0..x.len())
        .map(|n| {
            let mut acc = 0.0;
            for i in 0..window {
                acc += at(x, n as isize - i as isize);
            }
            acc / window as f64
        })
        .collect()
}

pub fn k_dft_real(x: &[f64]) -> Vec<f64> {
    let len = x.len();
    (0..len)
        .map(|k| {
            let mut acc = 0.0;
            for (n, xn) in x.iter().enumerate() {
                acc += xn * dft_angle(k, n, len).cos();
            }
            acc
        })
        .collect()
}

pub fn k_dft_imag(x: &[f64]) -> Vec<f64> {
    let len = x.len();
    (0..len)
        .map(|k| {
            let mut acc = 0.0;
            for (n, xn) in x.iter().enumerate() {
                acc -= xn * dft_angle(k, n, len).sin();
            }
            acc
        })
        .collect()
}

/// Real part of the inverse transform of `re + j*im`.
pub fn k_idft(re: &[f64], im: &[f64]) -> Result<Vec<f64>, KernelError> {
    if re.len() != im.len() {
        return Err(KernelError::LengthMismatch(re.len(), im.len()));
    }
    let len = re.len();
    Ok((0..len)
        .map(|n| {
            let mut acc = 0.0;
            for k in 0..len {
                let angle = dft_angle(k, n, len);
                acc += re[k] * angle.cos();
                acc -= im[k] * angle.sin();
            }
            acc / len as f64
        })
        .collect())
}

pub fn k_lowpass_fir_coeffs(taps: usize, wc: f64) -> Result<Vec<f64>, KernelError> {
    if !(wc > 0.0 && wc < PI) {
        return Err(KernelError::AttributeRange(format!(
            "wc = {wc} not in (0, pi)"
        )));
    }
    if taps == 0 {
        return Err(KernelError::AttributeRange("L must be at least 1".into()));
    }
    Ok((0..taps).map(|n| lowpass_tap(n, taps, wc)).collect())
}

pub fn k_hamming(taps: usize) -> Result<Vec<f64>, KernelError> {
    if taps < 2 {
        return Err(KernelError::AttributeRange(format!(
            "hamming window length {taps} < 2"
        )));
    }
    Ok((0..taps).map(|n| hamming_tap(n, taps)).collect())
}

#[allow(clippy::needless_range_loop)]
fn lms(x: &[f64], d: &[f64], step_scale: f64, taps: usize) -> Result<Vec<f64>, KernelError> {
    if x.len() != d.len() {
        return Err(KernelError::LengthMismatch(x.len(), d.len()));
    }
    if taps == 0 {
        return Err(KernelError::AttributeRange("LMS needs M >= 1".into()));
    }
    let mut w = vec![0.0; taps];
    for n in 0..x.len() {
        let mut y = 0.0;
        for (i, wi) in w.iter().enumerate() {
            y += wi * at(x, n as isize - i as isize);
        }
        let e = d[n] - y;
        let step = step_scale * e;
        for (i, wi) in w.iter_mut().enumerate() {
            *wi += step * at(x, n as isize - i as isize);
        }
    }
    if w.iter().all(|v| v.is_finite()) {
        Ok(w)
    } else {
        Err(KernelError::Diverged)
    }
}

/// Final LMS weights `w(N)` starting from `w(0) = 0`.
pub fn k_lms_filter(x: &[f64], d: &[f64], mu: f64, taps: usize) -> Result<Vec<f64>, KernelError> {
    if mu <= 0.0 {
        return Err(KernelError::AttributeRange(format!(
            "mu = {mu} must be positive"
        )));
    }
    lms(x, d, mu, taps)
}

/// LMS with the gain folded into the update: `w += mu*G*e(n)*x(n)`.
pub fn k_lms_filter_gain(
    x: &[f64],
    d: &[f64],
    mu: f64,
    taps: usize,
    gain: f64,
) -> Result<Vec<f64>, KernelError> {
    if mu <= 0.0 {
        return Err(KernelError::AttributeRange(format!(
            "mu = {mu} must be positive"
        )));
    }
    lms(x, d, mu * gain, taps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elementwise {
    Add,
    Sub,
    Mul,
    Div,
}

/// Pointwise binary op; a length-1 operand broadcasts.
pub fn k_elementwise(op: Elementwise, a: &[f64], b: &[f64]) -> Result<Vec<f64>, KernelError> {
    let len = if a.len() == b.len() || b.len() == 1 {
        a.len()
    } else if a.len() == 1 {
        b.len()
    } else {
        return Err(KernelError::LengthMismatch(a.len(), b.len()));
    };
    let pick = |v: &[f64], i: usize| if v.len() == 1 { v[0] } else { v[i] };
    (0..len)
        .map(|i| {
            let (x, y) = (pick(a, i), pick(b, i));
            Ok(match op {
                Elementwise::Add => x + y,
                Elementwise::Sub => x - y,
                Elementwise::Mul => x * y,
                Elementwise::Div if y == 0.0 => {
                    return Err(KernelError::DivisionByZero { index: i })
                }
                Elementwise::Div => x / y,
            })
        })
        .collect()
}

pub fn k_gain(x: &[f64], g: f64) -> Vec<f64> {
    x.iter().map(|v| g * v).collect()
}

pub fn k_square(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v * v).collect()
}

pub fn k_reverse(x: &[f64]) -> Vec<f64> {
    x.iter().rev().copied().collect()
}

pub fn k_sum(x: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    for v in x {
        acc += v;
    }
    vec![acc]
}

/// Keeps samples whose magnitude reaches `t`, zeroes the rest.
pub fn k_threshold(x: &[f64], t: f64) -> Vec<f64> {
    x.iter()
        .map(|v| if v.abs() >= t { *v } else { 0.0 })
        .collect()
}

/// Uniform mid-tread quantizer with `levels` levels spanning `[min, max]`.
pub fn k_quantize(x: &[f64], levels: usize, min: f64, max: f64) -> Result<Vec<f64>, KernelError> {
    if min >= max || levels < 2 {
        return Err(KernelError::AttributeRange(format!(
            "quantize needs min < max and levels >= 2 (got {min}, {max}, {levels})"
        )));
    }
    let step = (max - min) / (levels - 1) as f64;
    Ok(x.iter()
        .map(|v| {
            let c = v.max(min).min(max);
            min + ((c - min) / step).round() * step
        })
        .collect())
}

/// Flattened `(value, run)` pairs in a buffer of capacity `2 * len(x)`.
pub fn k_rle(x: &[f64]) -> Tensor {
    let mut data = vec![0.0; 2 * x.len()];
    let mut len = 0;
    let mut i = 0;
    while i < x.len() {
        let mut run = 1;
        while i + run < x.len() && x[i + run] == x[i] {
            run += 1;
        }
        data[len] = x[i];
        data[len + 1] = run as f64;
        len += 2;
        i += run;
    }
    Tensor {
        data,
        logical_len: len,
    }
}

pub fn k_upsample(x: &[f64], k: usize) -> Vec<f64> {
    let mut y = vec![0.0; x.len() * k];
    for (n, v) in x.iter().enumerate() {
        y[n * k] = *v;
    }
    y
}

pub fn k_downsample(x: &[f64], k: usize) -> Vec<f64> {
    x.iter().step_by(k).copied().collect()
}

pub fn k_sin_vec(n: usize, f: f64, fs: f64) -> Vec<f64> {
    (0..n).map(|i| ((TAU * f) * i as f64 / fs).sin()).collect()
}

pub fn k_cos_vec(n: usize, f: f64, fs: f64) -> Vec<f64> {
    (0..n).map(|i| ((TAU * f) * i as f64 / fs).cos()).collect()
}

pub fn k_range_vec(start: f64, step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| start + i as f64 * step).collect()
}

// Semantics of the rewriter-created opcodes. Each computes only the
// independent half of its output and mirrors the rest.

/// Windowed low-pass design `h[n] = lp[n] * ham[n]`, computed for
/// `n < ceil(L/2)` and mirrored.
pub fn k_filter_hamm_opt(taps: usize, wc: f64) -> Result<Vec<f64>, KernelError> {
    if taps < 2 {
        return Err(KernelError::AttributeRange(format!(
            "filter length {taps} < 2"
        )));
    }
    if !(wc > 0.0 && wc < PI) {
        return Err(KernelError::AttributeRange(format!(
            "wc = {wc} not in (0, pi)"
        )));
    }
    let mut h = vec![0.0; taps];
    for n in 0..taps.div_ceil(2) {
        let v = lowpass_tap(n, taps, wc) * hamming_tap(n, taps);
        h[n] = v;
        h[taps - 1 - n] = v;
    }
    Ok(h)
}

/// FIR response with a symmetric `h`: taps `i` and `L-1-i` share one
/// multiply, the centre tap of odd-length filters is added separately.
#[allow(clippy::needless_range_loop)]
pub fn k_fir_symmetric(x: &[f64], h: &[f64]) -> Vec<f64> {
    let taps = h.len();
    (0..x.len())
        .map(|n| {
            let n = n as isize;
            let mut acc = 0.0;
            for i in 0..taps / 2 {
                let pair = at(x, n - i as isize) + at(x, n - (taps - 1 - i) as isize);
                acc += h[i] * pair;
            }
            if taps % 2 == 1 {
                let mid = taps / 2;
                acc += h[mid] * at(x, n - mid as isize);
            }
            acc
        })
        .collect()
}

/// `conv1d_full(x, reverse(x))`, computing the first half and mirroring.
pub fn k_autocorr_symmetric(x: &[f64]) -> Vec<f64> {
    let len = x.len();
    let out_len = 2 * len - 1;
    let mut y = vec![0.0; out_len];
    for n in 0..out_len.div_ceil(2) {
        let mut acc = 0.0;
        for i in 0..len {
            acc += x[len - 1 - i] * at(x, n as isize - i as isize);
        }
        y[n] = acc;
        y[out_len - 1 - n] = acc;
    }
    y
}

/// Real DFT part for bins `0..=N/2`, mirrored with `X[N-k] = X[k]`.
pub fn k_dft_real_symm(x: &[f64]) -> Vec<f64> {
    dft_half(x, false)
}

/// Imaginary DFT part for bins `0..=N/2`, mirrored with `X[N-k] = -X[k]`.
pub fn k_dft_imag_symm(x: &[f64]) -> Vec<f64> {
    dft_half(x, true)
}

fn dft_half(x: &[f64], imag: bool) -> Vec<f64> {
    let len = x.len();
    let mut out = vec![0.0; len];
    for k in 0..=len / 2 {
        let mut acc = 0.0;
        for (n, xn) in x.iter().enumerate() {
            if imag {
                acc -= xn * dft_angle(k, n, len).sin();
            } else {
                acc += xn * dft_angle(k, n, len).cos();
            }
        }
        out[k] = acc;
        if k >= 1 && len - k > k {
            out[len - k] = if imag { -acc } else { acc };
        }
    }
    out
}

/// Both DFT parts from one double loop.
pub fn k_dft_fused(x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let len = x.len();
    let mut re = vec![0.0; len];
    let mut im = vec![0.0; len];
    for k in 0..len {
        let (mut acc_re, mut acc_im) = (0.0, 0.0);
        for (n, xn) in x.iter().enumerate() {
            let angle = dft_angle(k, n, len);
            acc_re += xn * angle.cos();
            acc_im -= xn * angle.sin();
        }
        re[k] = acc_re;
        im[k] = acc_im;
    }
    (re, im)
}

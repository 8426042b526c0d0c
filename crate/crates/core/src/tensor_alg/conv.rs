use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lin_sys::{ImpulseResponse, MatrixKernel, Support};
use crate::linalg::{CMat, C64, ZERO};

use super::ragged::PulseTensor3;

/// How the smooth part of a kernel is convolved with sampled signals.  Both
/// evaluate the same trapezoid sum; they differ only in cost and rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvMethod {
    /// `O(N K)` direct summation.
    Direct,
    /// Zero-padded FFT linear convolution, `O(N log N)`.
    #[default]
    Fft,
}

fn is_zero(x: &[C64]) -> bool {
    x.iter().all(|z| *z == ZERO)
}

/// Trapezoid convolution of one causal kernel with one signal, both starting at
/// the first grid point: `y[n] = dt * sum_{p=0}^{P} w_p h[p] x[n-p]` with
/// `P = min(n, K-1)` and half weights at `p = 0` and `p = P`.
fn direct_causal(h: &[C64], x: &[C64], dt: f64, out: &mut [C64]) {
    let k = h.len();
    for (n, y) in out.iter_mut().enumerate() {
        let p_max = n.min(k.saturating_sub(1));
        if p_max == 0 {
            continue;
        }
        let mut acc = 0.5 * (h[0] * x[n] + h[p_max] * x[n - p_max]);
        for p in 1..p_max {
            acc += h[p] * x[n - p];
        }
        *y += acc * dt;
    }
}

/// Scalar convolution `y(t) = int h(t - s) x(s) ds` on the signal grid.
/// `kernel` holds smooth samples at lag magnitudes `0, dt, ...` on the side
/// given by `support`.
pub fn convolve(kernel: &[C64], signal: &[C64], dt: f64, support: Support, method: ConvMethod) -> Vec<C64> {
    let mk = MatrixKernel::scalar(ZERO, kernel.to_vec(), dt, support);
    let prepared = PreparedKernel::new(&mk, signal.len(), method);
    prepared.apply(&[signal]).pop().unwrap()
}

struct FftPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPlan {
    fn spectrum(&self, x: &[C64]) -> Vec<C64> {
        let mut buf = vec![ZERO; self.len];
        buf[..x.len()].copy_from_slice(x);
        self.forward.process(&mut buf);
        buf
    }
}

/// A matrix kernel readied for repeated application to signals of a fixed
/// length: kernel spectra are computed once.
pub struct PreparedKernel {
    rows: usize,
    cols: usize,
    delta: CMat,
    support: Support,
    dt: f64,
    n_signal: usize,
    samples: Vec<Vec<C64>>,
    nonzero: Vec<bool>,
    plan: Option<FftPlan>,
    spectra: Vec<Vec<C64>>,
}

impl PreparedKernel {
    pub fn new(kernel: &MatrixKernel, n_signal: usize, method: ConvMethod) -> Self {
        let klen = kernel.len().min(n_signal);
        let samples: Vec<Vec<C64>> = kernel.entries().iter().map(|e| e[..klen].to_vec()).collect();
        let nonzero: Vec<bool> = samples.iter().map(|e| klen > 1 && !is_zero(e)).collect();
        let (plan, spectra) = if method == ConvMethod::Fft && nonzero.iter().any(|b| *b) {
            let len = (n_signal + klen).max(2 * n_signal).next_power_of_two();
            let mut planner = FftPlanner::new();
            let plan = FftPlan {
                len,
                forward: planner.plan_fft_forward(len),
                inverse: planner.plan_fft_inverse(len),
            };
            let spectra = samples
                .iter()
                .zip(&nonzero)
                .map(|(h, nz)| if *nz { plan.spectrum(h) } else { Vec::new() })
                .collect();
            (Some(plan), spectra)
        } else {
            (None, Vec::new())
        };
        PreparedKernel {
            rows: kernel.rows(),
            cols: kernel.cols(),
            delta: kernel.delta().clone(),
            support: kernel.support(),
            dt: kernel.dt(),
            n_signal,
            samples,
            nonzero,
            plan,
            spectra,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn has_smooth(&self) -> bool {
        self.nonzero.iter().any(|b| *b)
    }

    /// Smooth-part spacing, or `None` for a pure delta kernel.
    pub fn smooth_dt(&self) -> Option<f64> {
        self.has_smooth().then_some(self.dt)
    }

    /// `y_i = sum_r D_ir x_r + sum_r (K_ir * x_r)` for `cols` input signals.
    pub fn apply(&self, inputs: &[&[C64]]) -> Vec<Vec<C64>> {
        assert_eq!(inputs.len(), self.cols, "kernel column count");
        let n = self.n_signal;
        let mut out = vec![vec![ZERO; n]; self.rows];
        let active: Vec<usize> = (0..self.cols)
            .filter(|&r| {
                assert_eq!(inputs[r].len(), n, "signal length");
                !is_zero(inputs[r])
            })
            .collect();
        if active.is_empty() {
            return out;
        }
        for (i, y) in out.iter_mut().enumerate() {
            for &r in &active {
                let d = self.delta[(i, r)];
                if d != ZERO {
                    for (yv, xv) in y.iter_mut().zip(inputs[r]) {
                        *yv += d * xv;
                    }
                }
            }
        }
        if !self.has_smooth() {
            return out;
        }
        let reversed: Vec<Vec<C64>>;
        let signals: Vec<&[C64]> = match self.support {
            Support::Causal => inputs.to_vec(),
            Support::AntiCausal => {
                reversed = inputs.iter().map(|x| x.iter().rev().copied().collect()).collect();
                reversed.iter().map(|x| x.as_slice()).collect()
            }
        };
        let mut smooth = vec![vec![ZERO; n]; self.rows];
        match &self.plan {
            None => {
                for (i, y) in smooth.iter_mut().enumerate() {
                    for &r in &active {
                        let e = i * self.cols + r;
                        if self.nonzero[e] {
                            direct_causal(&self.samples[e], signals[r], self.dt, y);
                        }
                    }
                }
            }
            Some(plan) => {
                let x_spec: Vec<Option<Vec<C64>>> = (0..self.cols)
                    .map(|r| active.contains(&r).then(|| plan.spectrum(signals[r])))
                    .collect();
                let scale = 1.0 / plan.len as f64;
                for (i, y) in smooth.iter_mut().enumerate() {
                    let mut acc = vec![ZERO; plan.len];
                    let mut any = false;
                    for &r in &active {
                        let e = i * self.cols + r;
                        if !self.nonzero[e] {
                            continue;
                        }
                        any = true;
                        let xs = x_spec[r].as_ref().unwrap();
                        for ((a, h), x) in acc.iter_mut().zip(&self.spectra[e]).zip(xs) {
                            *a += h * x;
                        }
                    }
                    if !any {
                        continue;
                    }
                    plan.inverse.process(&mut acc);
                    for (nn, yv) in y.iter_mut().enumerate() {
                        if nn == 0 {
                            continue;
                        }
                        let mut v = acc[nn] * scale;
                        for &r in &active {
                            let e = i * self.cols + r;
                            if !self.nonzero[e] {
                                continue;
                            }
                            let h = &self.samples[e];
                            let x = signals[r];
                            let p_max = nn.min(h.len() - 1);
                            v -= 0.5 * (h[0] * x[nn] + h[p_max] * x[nn - p_max]);
                            // samples beyond the stored kernel are zero, so the FFT sum
                            // already stops at p_max
                        }
                        *yv = v * self.dt;
                    }
                }
            }
        }
        for (y, s) in out.iter_mut().zip(smooth) {
            let s_iter: Box<dyn Iterator<Item = C64>> = match self.support {
                Support::Causal => Box::new(s.into_iter()),
                Support::AntiCausal => Box::new(s.into_iter().rev()),
            };
            for (yv, sv) in y.iter_mut().zip(s_iter) {
                *yv += sv;
            }
        }
        out
    }
}

pub(crate) fn check_kernel_spacing(prepared: &PreparedKernel, dt: f64) -> Result<()> {
    if let Some(kdt) = prepared.smooth_dt() {
        if (kdt - dt).abs() > 1e-9 * dt.abs() {
            return Err(Error::GridMismatch(format!(
                "kernel spacing {} differs from signal spacing {}",
                kdt, dt
            )));
        }
    }
    Ok(())
}

/// Block-wise mode-1 product `Delta(S, T) x_1 Delta(E, F)` with `(E, F) = (g-, g+)`:
/// returns `(S x_1 E + T^# x_1 F, T x_1 E + S^# x_1 F)`.
pub fn mode1_product(
    s: &PulseTensor3,
    t: &PulseTensor3,
    kernel: &ImpulseResponse,
    method: ConvMethod,
) -> Result<(PulseTensor3, PulseTensor3)> {
    if !s.same_shape(t) {
        return Err(Error::Dimension("mode-1 product blocks must share (m, ells)".into()));
    }
    s.grid().check_same(t.grid())?;
    if kernel.m != s.m() {
        return Err(Error::Dimension(format!(
            "kernel has {} channels, tensor has {}",
            kernel.m,
            s.m()
        )));
    }
    let n = s.grid().len();
    let e = PreparedKernel::new(&kernel.minus, n, method);
    let f = PreparedKernel::new(&kernel.plus, n, method);
    check_kernel_spacing(&e, s.grid().dt())?;
    check_kernel_spacing(&f, s.grid().dt())?;
    let cols = s.columns();
    let results: Vec<(Vec<Vec<C64>>, Vec<Vec<C64>>)> = cols
        .par_iter()
        .map(|&(j, k)| {
            let sf = s.fiber(j, k);
            let tf = t.fiber(j, k);
            let mut a = e.apply(&sf);
            let mut b = e.apply(&tf);
            if f.has_smooth() || f.delta.iter().any(|z| *z != ZERO) {
                let sc: Vec<Vec<C64>> = sf.iter().map(|x| x.iter().map(|z| z.conj()).collect()).collect();
                let tc: Vec<Vec<C64>> = tf.iter().map(|x| x.iter().map(|z| z.conj()).collect()).collect();
                let fa = f.apply(&tc.iter().map(|v| v.as_slice()).collect::<Vec<_>>());
                let fb = f.apply(&sc.iter().map(|v| v.as_slice()).collect::<Vec<_>>());
                for (x, y) in a.iter_mut().zip(fa).chain(b.iter_mut().zip(fb)) {
                    for (xv, yv) in x.iter_mut().zip(y) {
                        *xv += yv;
                    }
                }
            }
            (a, b)
        })
        .collect();
    let mut out_s = PulseTensor3::zeros(*s.grid(), s.ells());
    let mut out_t = PulseTensor3::zeros(*s.grid(), s.ells());
    for (&(j, k), (a, b)) in cols.iter().zip(results) {
        out_s.set_fiber(j, k, a);
        out_t.set_fiber(j, k, b);
    }
    Ok((out_s, out_t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn naive(h: &[C64], x: &[C64], dt: f64, support: Support) -> Vec<C64> {
        // y(t_n) = int h(t_n - s) x(s) ds as an explicit trapezoid over s
        let n = x.len();
        let k = h.len() as i64;
        (0..n as i64)
            .map(|t| {
                let (lo, hi) = match support {
                    Support::Causal => ((t - k + 1).max(0), t),
                    Support::AntiCausal => (t, (t + k - 1).min(n as i64 - 1)),
                };
                if hi <= lo {
                    return ZERO;
                }
                let mut acc = ZERO;
                for s in lo..=hi {
                    let w = if s == lo || s == hi { 0.5 } else { 1.0 };
                    acc += w * h[(t - s).unsigned_abs() as usize] * x[s as usize];
                }
                acc * dt
            })
            .collect()
    }

    #[test]
    fn fft_and_direct_match_naive() {
        let h: Vec<C64> = (0..17).map(|k| c((-0.2 * k as f64).exp(), 0.1 * k as f64)).collect();
        let x: Vec<C64> = (0..40).map(|k| c((k as f64 * 0.3).sin(), (k as f64 * 0.1).cos())).collect();
        for support in [Support::Causal, Support::AntiCausal] {
            let want = naive(&h, &x, 0.1, support);
            for method in [ConvMethod::Direct, ConvMethod::Fft] {
                let got = convolve(&h, &x, 0.1, support, method);
                for (a, b) in got.iter().zip(&want) {
                    assert!((a - b).norm() < 1e-13, "{support:?} {method:?}");
                }
            }
        }
    }

    #[test]
    fn exponential_convolution_is_second_order() {
        // int_0^t e^{-(t-s)} ds = 1 - e^{-t}
        let err = |n: usize| {
            let dt = 5.0 / (n - 1) as f64;
            let h: Vec<C64> = (0..n).map(|k| c((-(k as f64) * dt).exp(), 0.0)).collect();
            let x = vec![c(1.0, 0.0); n];
            let y = convolve(&h, &x, dt, Support::Causal, ConvMethod::Fft);
            (0..n)
                .map(|k| (y[k].re - (1.0 - (-(k as f64) * dt).exp())).abs())
                .fold(0.0, f64::max)
        };
        let ratio = err(201) / err(101);
        assert!((ratio - 0.25).abs() < 0.02, "ratio {ratio}");
    }
}

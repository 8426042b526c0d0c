use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{doubled, expm, eye, max_abs, zeros, CMat, C64, ZERO};

use super::state_space::{require_stable, StateSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    /// Samples live at `t = k dt`, `k >= 0`.
    Causal,
    /// Samples live at `t = -k dt`, `k >= 0`.
    AntiCausal,
}

impl Support {
    pub fn flipped(self) -> Self {
        match self {
            Support::Causal => Support::AntiCausal,
            Support::AntiCausal => Support::Causal,
        }
    }
}

/// Matrix kernel `delta(t) * D + K(t)` with the smooth part `K` sampled at
/// lag magnitudes `0, dt, 2 dt, ...` on one side of the origin.
///
/// Entries are stored as one contiguous sample vector per matrix entry, which is
/// the layout every convolution routine consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixKernel {
    rows: usize,
    cols: usize,
    dt: f64,
    support: Support,
    delta: CMat,
    len: usize,
    entries: Vec<Vec<C64>>,
}

impl MatrixKernel {
    pub fn from_samples(delta: CMat, samples: &[CMat], dt: f64, support: Support) -> Self {
        let (rows, cols) = delta.shape();
        let len = samples.len();
        let mut entries = vec![vec![ZERO; len]; rows * cols];
        for (k, s) in samples.iter().enumerate() {
            assert_eq!(s.shape(), (rows, cols), "kernel sample shape");
            for r in 0..rows {
                for c in 0..cols {
                    entries[r * cols + c][k] = s[(r, c)];
                }
            }
        }
        MatrixKernel {
            rows,
            cols,
            dt,
            support,
            delta,
            len,
            entries,
        }
    }

    /// Build from per-entry sample vectors (row-major entry order).
    pub fn from_entries(delta: CMat, entries: Vec<Vec<C64>>, dt: f64, support: Support) -> Self {
        let (rows, cols) = delta.shape();
        assert_eq!(entries.len(), rows * cols);
        let len = entries.first().map_or(0, |e| e.len());
        assert!(entries.iter().all(|e| e.len() == len));
        MatrixKernel {
            rows,
            cols,
            dt,
            support,
            delta,
            len,
            entries,
        }
    }

    /// Kernel with no smooth part.
    pub fn pure_delta(delta: CMat, dt: f64, support: Support) -> Self {
        MatrixKernel::from_samples(delta, &[], dt, support)
    }

    /// Scalar kernel `d * delta(t) + samples`.
    pub fn scalar(d: C64, samples: Vec<C64>, dt: f64, support: Support) -> Self {
        MatrixKernel::from_entries(CMat::from_element(1, 1, d), vec![samples], dt, support)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn delta(&self) -> &CMat {
        &self.delta
    }

    /// Number of smooth samples (0 for a pure delta kernel).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn entry(&self, r: usize, c: usize) -> &[C64] {
        &self.entries[r * self.cols + c]
    }

    pub fn entries(&self) -> &[Vec<C64>] {
        &self.entries
    }

    /// Smooth sample at lag index `k` (zero beyond the stored window).
    pub fn sample(&self, k: usize) -> CMat {
        CMat::from_fn(self.rows, self.cols, |r, c| {
            self.entry(r, c).get(k).copied().unwrap_or(ZERO)
        })
    }

    pub fn max_smooth_abs(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|e| e.iter())
            .fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn smooth_is_zero(&self, tol: f64) -> bool {
        self.max_smooth_abs() <= tol
    }

    /// Entrywise conjugate of delta part and samples.
    pub fn conj(&self) -> MatrixKernel {
        MatrixKernel {
            delta: self.delta.map(|z| z.conj()),
            entries: self
                .entries
                .iter()
                .map(|e| e.iter().map(|z| z.conj()).collect())
                .collect(),
            ..self.clone()
        }
    }

    /// Drop the smooth part if it is identically zero, leaving a pure delta kernel.
    pub fn compact(mut self, tol: f64) -> MatrixKernel {
        if self.len > 0 && self.smooth_is_zero(tol) {
            self.entries.iter_mut().for_each(|e| e.clear());
            self.len = 0;
        }
        self
    }
}

/// Sampled `g_G = Delta(g-, g+)`: delta parts plus smooth samples on one
/// side of the origin.  `minus.delta()` is `S` and `plus.delta()` is zero for
/// the forward kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse {
    pub m: usize,
    pub minus: MatrixKernel,
    pub plus: MatrixKernel,
    /// `max |e^{A T}|` at the end of the sampled window (0 for static devices).
    pub tail: f64,
}

impl ImpulseResponse {
    pub fn dt(&self) -> f64 {
        self.minus.dt()
    }

    pub fn support(&self) -> Support {
        self.minus.support()
    }

    pub fn len(&self) -> usize {
        self.minus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.minus.is_empty()
    }

    /// `Delta(S, 0)` for the forward kernel.
    pub fn delta_part(&self) -> CMat {
        doubled(self.minus.delta(), self.plus.delta())
    }

    pub fn smooth_minus(&self, k: usize) -> CMat {
        self.minus.sample(k)
    }

    pub fn smooth_plus(&self, k: usize) -> CMat {
        self.plus.sample(k)
    }

    /// Doubled-up smooth sample `Delta(smooth_minus, smooth_plus)` at lag `k`.
    pub fn doubled_sample(&self, k: usize) -> CMat {
        doubled(&self.minus.sample(k), &self.plus.sample(k))
    }

    /// Signed sample times `0, +-dt, ...` matching the stored order.
    pub fn times(&self) -> Vec<f64> {
        let sign = match self.support() {
            Support::Causal => 1.0,
            Support::AntiCausal => -1.0,
        };
        (0..self.len()).map(|k| sign * k as f64 * self.dt()).collect()
    }

    pub fn plus_is_zero(&self, tol: &Tolerances) -> bool {
        max_abs(self.plus.delta()) <= tol.zero && self.plus.smooth_is_zero(tol.zero)
    }
}

fn sample_kernels(ss: &StateSpace, grid: &TimeGrid) -> (Vec<CMat>, Vec<CMat>, f64) {
    let n_pts = grid.len();
    let step = expm(&(&ss.a * C64::new(grid.dt(), 0.0)));
    let mut e = eye(2 * ss.n);
    let mut minus = Vec::with_capacity(n_pts);
    let mut plus = Vec::with_capacity(n_pts);
    for k in 0..n_pts {
        if k > 0 {
            e = &e * &step;
        }
        let (gm, gp) = ss.smooth_blocks(&e);
        minus.push(gm);
        plus.push(gp);
    }
    let tail = max_abs(&expm(&(&ss.a * C64::new(grid.t_max, 0.0))));
    (minus, plus, tail)
}

fn check_lag_grid(grid: &TimeGrid) -> Result<()> {
    grid.validate()?;
    if grid.t_min.abs() > 1e-12 * grid.t_max.abs().max(1.0) {
        return Err(Error::InvalidGrid(format!(
            "impulse responses are sampled on [0, T]; got t_min = {}",
            grid.t_min
        )));
    }
    Ok(())
}

fn build(ss: &StateSpace, grid: &TimeGrid) -> ImpulseResponse {
    let m = ss.m;
    let dt = grid.dt();
    if ss.is_static() {
        return ImpulseResponse {
            m,
            minus: MatrixKernel::pure_delta(ss.params.s.clone(), dt, Support::Causal),
            plus: MatrixKernel::pure_delta(zeros(m, m), dt, Support::Causal),
            tail: 0.0,
        };
    }
    let (minus, plus, tail) = sample_kernels(ss, grid);
    ImpulseResponse {
        m,
        minus: MatrixKernel::from_samples(ss.params.s.clone(), &minus, dt, Support::Causal),
        plus: MatrixKernel::from_samples(zeros(m, m), &plus, dt, Support::Causal),
        tail,
    }
}

/// Sample the impulse response on `grid = [0, T]`, rejecting windows whose
/// tail `max |e^{AT}|` exceeds `tol.decay`.
pub fn impulse_response(ss: &StateSpace, grid: &TimeGrid, tol: &Tolerances) -> Result<ImpulseResponse> {
    require_stable(ss, tol)?;
    check_lag_grid(grid)?;
    let ir = build(ss, grid);
    if ir.tail > tol.decay {
        return Err(Error::GridTooShort {
            tail: ir.tail,
            tol: tol.decay,
        });
    }
    Ok(ir)
}

/// Like [`impulse_response`] but accepts a truncated window; the tail is
/// recorded in the result for the caller to judge.
pub fn impulse_response_window(
    ss: &StateSpace,
    grid: &TimeGrid,
    tol: &Tolerances,
) -> Result<ImpulseResponse> {
    require_stable(ss, tol)?;
    check_lag_grid(grid)?;
    Ok(build(ss, grid))
}

/// Anti-causal inverse `Delta(g-(-t)^dag, -g+(-t)^T)`.  Applying it twice
/// returns the original kernel.
pub fn stable_inverse(ir: &ImpulseResponse) -> ImpulseResponse {
    let dt = ir.dt();
    let support = ir.support().flipped();
    let n = ir.len();
    let minus: Vec<CMat> = (0..n).map(|k| ir.smooth_minus(k).adjoint()).collect();
    let plus: Vec<CMat> = (0..n).map(|k| -ir.smooth_plus(k).transpose()).collect();
    ImpulseResponse {
        m: ir.m,
        minus: MatrixKernel::from_samples(ir.minus.delta().adjoint(), &minus, dt, support),
        plus: MatrixKernel::from_samples(-ir.plus.delta().transpose(), &plus, dt, support),
        tail: ir.tail,
    }
}

/// Square matrix kernel with smooth samples on both sides of the origin.
/// `causal[k]` is the value at `t = k dt` and `anti[k]` at `t = -k dt`; at
/// `k = 0` each holds its own one-sided limit.
#[derive(Debug, Clone)]
pub struct TwoSidedKernel {
    pub dim: usize,
    pub dt: f64,
    pub delta: CMat,
    pub causal: Vec<CMat>,
    pub anti: Vec<CMat>,
}

impl TwoSidedKernel {
    pub fn from_impulse(ir: &ImpulseResponse) -> Self {
        let dim = 2 * ir.m;
        let n = ir.len();
        let full: Vec<CMat> = (0..n).map(|k| ir.doubled_sample(k)).collect();
        let empty = vec![zeros(dim, dim); n];
        let (causal, anti) = match ir.support() {
            Support::Causal => (full, empty),
            Support::AntiCausal => (empty, full),
        };
        TwoSidedKernel {
            dim,
            dt: ir.dt(),
            delta: ir.delta_part(),
            causal,
            anti,
        }
    }

    pub fn len(&self) -> usize {
        self.causal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.causal.is_empty()
    }

    /// Smooth value at signed lag index `n`; the origin takes the mean of the
    /// two one-sided limits.
    pub fn value(&self, n: i64) -> CMat {
        let k = n.unsigned_abs() as usize;
        if k >= self.len() {
            return zeros(self.dim, self.dim);
        }
        match n.cmp(&0) {
            std::cmp::Ordering::Greater => self.causal[k].clone(),
            std::cmp::Ordering::Less => self.anti[k].clone(),
            std::cmp::Ordering::Equal => (&self.causal[0] + &self.anti[0]) * C64::new(0.5, 0.0),
        }
    }

    /// `self * other` restricted to signed lags `|n| < len`.  Each pair of
    /// one-sided pieces is integrated with its own trapezoid rule, so the jumps
    /// at the origin sit on interval endpoints.
    pub fn compose(&self, other: &TwoSidedKernel) -> Result<TwoSidedKernel> {
        if self.dim != other.dim || self.len() != other.len() {
            return Err(Error::Dimension("two-sided kernels must share shape and length".into()));
        }
        if (self.dt - other.dt).abs() > 1e-12 * self.dt {
            return Err(Error::GridMismatch(format!("dt {} vs {}", self.dt, other.dt)));
        }
        let k_len = self.len() as i64;
        let dt = self.dt;
        let dim = self.dim;
        let lags: Vec<i64> = (-(k_len - 1)..k_len).collect();
        let values: Vec<CMat> = lags
            .par_iter()
            .map(|&n| {
                let mut acc = zeros(dim, dim);
                // causal * causal on [0, n], anti * anti on [n, 0]
                if n > 0 {
                    trapz_pair(&mut acc, 0, n, |s| (&self.causal[(n - s) as usize], &other.causal[s as usize]));
                }
                if n < 0 {
                    trapz_pair(&mut acc, n, 0, |s| (&self.anti[(s - n) as usize], &other.anti[(-s) as usize]));
                }
                // anti (self) * causal (other): s >= max(0, n)
                let lo = n.max(0);
                let hi = (k_len - 1).min(n + k_len - 1);
                if hi > lo {
                    trapz_pair(&mut acc, lo, hi, |s| (&self.anti[(s - n) as usize], &other.causal[s as usize]));
                }
                // causal (self) * anti (other): s <= min(0, n)
                let lo = (n - k_len + 1).max(-(k_len - 1));
                let hi = n.min(0);
                if hi > lo {
                    trapz_pair(&mut acc, lo, hi, |s| (&self.causal[(n - s) as usize], &other.anti[(-s) as usize]));
                }
                acc * C64::new(dt, 0.0)
            })
            .collect();
        let mut causal = vec![zeros(dim, dim); k_len as usize];
        let mut anti = vec![zeros(dim, dim); k_len as usize];
        for (&n, v) in lags.iter().zip(values) {
            let k = n.unsigned_abs() as usize;
            let one_sided = |src: &TwoSidedKernel, k: usize, causal_side: bool| {
                if causal_side {
                    src.causal[k].clone()
                } else {
                    src.anti[k].clone()
                }
            };
            let sides: &[bool] = match n.cmp(&0) {
                std::cmp::Ordering::Greater => &[true],
                std::cmp::Ordering::Less => &[false],
                std::cmp::Ordering::Equal => &[true, false],
            };
            for &side in sides {
                let total = &v
                    + &self.delta * one_sided(other, k, side)
                    + one_sided(self, k, side) * &other.delta;
                if side {
                    causal[k] = total;
                } else {
                    anti[k] = total;
                }
            }
        }
        // The convolution integral is continuous at the origin; only the delta
        // cross terms carry a jump, so both one-sided limits share `v` at k = 0.
        Ok(TwoSidedKernel {
            dim,
            dt,
            delta: &self.delta * &other.delta,
            causal,
            anti,
        })
    }

    /// Discrete L2 norm of the smooth part over signed lags, trapezoid weighted.
    pub fn smooth_l2(&self) -> f64 {
        let k_len = self.len() as i64;
        let mut sum = 0.0;
        for n in -(k_len - 1)..k_len {
            let w = if n.abs() == k_len - 1 { 0.5 } else { 1.0 };
            sum += w * self.value(n).norm_squared();
        }
        (sum * self.dt).sqrt()
    }

    pub fn max_smooth_abs(&self) -> f64 {
        self.causal
            .iter()
            .chain(self.anti.iter())
            .map(max_abs)
            .fold(0.0, f64::max)
    }
}

fn trapz_pair<'a, F>(acc: &mut CMat, lo: i64, hi: i64, pair: F)
where
    F: Fn(i64) -> (&'a CMat, &'a CMat),
{
    for s in lo..=hi {
        let (a, b) = pair(s);
        let w = if s == lo || s == hi { 0.5 } else { 1.0 };
        acc.gemm(C64::new(w, 0.0), a, b, C64::new(1.0, 0.0));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InverseResidual {
    /// Discrete L2 norm of the smooth part of `inverse * g - delta I`.
    pub l2: f64,
    /// Largest pointwise smooth residual entry.
    pub max_abs: f64,
    /// `max |D_inv D - I|` for the delta parts.
    pub delta_defect: f64,
}

/// Residual of the stable-inversion identity for a causal impulse response.
pub fn inverse_residual(ir: &ImpulseResponse) -> Result<InverseResidual> {
    let fwd = TwoSidedKernel::from_impulse(ir);
    let inv = TwoSidedKernel::from_impulse(&stable_inverse(ir));
    let prod = inv.compose(&fwd)?;
    let dim = prod.dim;
    Ok(InverseResidual {
        l2: prod.smooth_l2(),
        max_abs: prod.max_smooth_abs(),
        delta_defect: crate::linalg::max_abs_diff(&prod.delta, &eye(dim)),
    })
}

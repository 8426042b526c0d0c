use rayon::prelude::*;

use crate::config::Caps;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::lin_sys::MatrixKernel;
use crate::linalg::{C64, ZERO};

use super::conv::{check_kernel_spacing, ConvMethod, PreparedKernel};

/// Sampled channel wave function `Psi_{j, k_1..k_l}(t_1, .., t_l)`: an `l`-way
/// array over channel indices (each of size `m`) whose entries are `l`-dimensional
/// time grids.
///
/// Storage is row-major with all channel indices before all time indices.
#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketTensor {
    channel: usize,
    order: usize,
    m: usize,
    grid: TimeGrid,
    values: Vec<C64>,
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    (0..exp).try_fold(1usize, |acc, _| acc.checked_mul(base))
}

fn check_caps(order: usize, m: usize, n: usize, caps: &Caps) -> Result<usize> {
    if !caps.wavepacket_shape_allowed(order, n) {
        return Err(Error::CapExceeded(format!(
            "wave packet of order {} on {} grid points is outside the admitted shapes",
            order, n
        )));
    }
    let total = checked_pow(m, order)
        .zip(checked_pow(n, order))
        .and_then(|(a, b)| a.checked_mul(b))
        .filter(|&t| t <= caps.wavepacket_entries)
        .ok_or_else(|| {
            Error::CapExceeded(format!(
                "wave packet with m = {}, order {}, {} points exceeds {} entries",
                m, order, n, caps.wavepacket_entries
            ))
        })?;
    Ok(total)
}

impl WavepacketTensor {
    pub fn new(
        channel: usize,
        m: usize,
        grid: TimeGrid,
        order: usize,
        values: Vec<C64>,
        caps: &Caps,
    ) -> Result<Self> {
        grid.validate()?;
        let total = check_caps(order, m, grid.len(), caps)?;
        if values.len() != total {
            return Err(Error::Dimension(format!(
                "wave packet needs {} samples, got {}",
                total,
                values.len()
            )));
        }
        Ok(WavepacketTensor {
            channel,
            order,
            m,
            grid,
            values,
        })
    }

    pub fn zeros(channel: usize, m: usize, grid: TimeGrid, order: usize, caps: &Caps) -> Result<Self> {
        let total = check_caps(order, m, grid.len(), caps)?;
        WavepacketTensor::new(channel, m, grid, order, vec![ZERO; total], caps)
    }

    /// Embed a scalar wave function `psi(t_1..t_l)` (row-major over the time
    /// grid) at channel indices `(j, .., j)`; every other component is zero.
    pub fn from_diagonal(
        channel: usize,
        m: usize,
        grid: TimeGrid,
        order: usize,
        psi: Vec<C64>,
        caps: &Caps,
    ) -> Result<Self> {
        if channel >= m {
            return Err(Error::Dimension(format!("channel {} out of range for m = {}", channel, m)));
        }
        let mut w = WavepacketTensor::zeros(channel, m, grid, order, caps)?;
        let block = w.block_len();
        if psi.len() != block {
            return Err(Error::Dimension(format!(
                "wave function needs {} samples, got {}",
                block,
                psi.len()
            )));
        }
        let ks = vec![channel; order];
        let start = w.channel_offset(&ks);
        w.values[start..start + block].copy_from_slice(&psi);
        Ok(w)
    }

    /// Tabulate `f(i_1, .., i_l)` over grid indices and embed it on the
    /// diagonal channel component.
    pub fn tabulate_diagonal<F>(channel: usize, m: usize, grid: TimeGrid, order: usize, f: F, caps: &Caps) -> Result<Self>
    where
        F: Fn(&[usize]) -> C64 + Sync,
    {
        let n = grid.len();
        check_caps(order, m, n, caps)?;
        let block = n.pow(order as u32);
        let psi: Vec<C64> = (0..block)
            .into_par_iter()
            .map(|idx| {
                let mut is = vec![0; order];
                let mut rest = idx;
                for a in (0..order).rev() {
                    is[a] = rest % n;
                    rest /= n;
                }
                f(&is)
            })
            .collect();
        WavepacketTensor::from_diagonal(channel, m, grid, order, psi, caps)
    }

    /// Sample `f(t_1, .., t_l)` and embed it on the diagonal channel component.
    pub fn sample_diagonal<F>(channel: usize, m: usize, grid: TimeGrid, order: usize, f: F, caps: &Caps) -> Result<Self>
    where
        F: Fn(&[f64]) -> C64 + Sync,
    {
        let times = grid.times();
        WavepacketTensor::tabulate_diagonal(
            channel,
            m,
            grid,
            order,
            |is| {
                let ts: Vec<f64> = is.iter().map(|&i| times[i]).collect();
                f(&ts)
            },
            caps,
        )
    }

    pub fn channel(&self) -> usize {
        self.channel
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Samples per channel component, `n_points^order`.
    pub fn block_len(&self) -> usize {
        self.grid.len().pow(self.order as u32)
    }

    pub fn n_components(&self) -> usize {
        self.m.pow(self.order as u32)
    }

    fn channel_offset(&self, ks: &[usize]) -> usize {
        assert_eq!(ks.len(), self.order);
        let c = ks.iter().fold(0, |acc, &k| {
            assert!(k < self.m);
            acc * self.m + k
        });
        c * self.block_len()
    }

    /// The time grid array of component `(k_1, .., k_l)`.
    pub fn component(&self, ks: &[usize]) -> &[C64] {
        let start = self.channel_offset(ks);
        &self.values[start..start + self.block_len()]
    }

    pub fn component_mut(&mut self, ks: &[usize]) -> &mut [C64] {
        let start = self.channel_offset(ks);
        let len = self.block_len();
        &mut self.values[start..start + len]
    }

    pub fn get(&self, ks: &[usize], ts: &[usize]) -> C64 {
        let n = self.grid.len();
        let t = ts.iter().fold(0, |acc, &i| acc * n + i);
        self.component(ks)[t]
    }

    /// Product trapezoid weight of time multi-index `idx` within a component.
    pub(crate) fn weight(&self, idx: usize, w1: &[f64]) -> f64 {
        let n = self.grid.len();
        let mut rest = idx;
        let mut w = 1.0;
        for _ in 0..self.order {
            w *= w1[rest % n];
            rest /= n;
        }
        w
    }

    /// `<self, other> = sum_k int conj(self_k) other_k dt` (product trapezoid).
    pub fn inner(&self, other: &WavepacketTensor) -> Result<C64> {
        self.check_compatible(other)?;
        let w1 = self.grid.trapz_weights();
        let block = self.block_len();
        let acc = self
            .values
            .par_chunks(block)
            .zip(other.values.par_chunks(block))
            .map(|(a, b)| {
                let mut s = ZERO;
                for (idx, (x, y)) in a.iter().zip(b).enumerate() {
                    if *x != ZERO && *y != ZERO {
                        s += self.weight(idx, &w1) * x.conj() * y;
                    }
                }
                s
            })
            .reduce(|| ZERO, |a, b| a + b);
        Ok(acc)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self).map(|z| z.re).unwrap_or(0.0)
    }

    pub fn conj(&self) -> WavepacketTensor {
        WavepacketTensor {
            values: self.values.iter().map(|z| z.conj()).collect(),
            ..self.clone()
        }
    }

    pub fn scaled(&self, s: C64) -> WavepacketTensor {
        WavepacketTensor {
            values: self.values.iter().map(|z| z * s).collect(),
            ..self.clone()
        }
    }

    pub fn check_compatible(&self, other: &WavepacketTensor) -> Result<()> {
        if self.order != other.order || self.m != other.m {
            return Err(Error::Dimension(format!(
                "wave packets differ in shape: order {} m {} vs order {} m {}",
                self.order, self.m, other.order, other.m
            )));
        }
        self.grid.check_same(&other.grid)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    pub fn max_abs_diff(&self, other: &WavepacketTensor) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |a, (x, y)| a.max((x - y).norm())))
    }

    /// `||self - other|| / ||other||` in the discrete L2 norm.
    pub fn rel_l2_diff(&self, other: &WavepacketTensor) -> Result<f64> {
        self.check_compatible(other)?;
        let diff = WavepacketTensor {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            ..self.clone()
        };
        let denom = other.norm_sqr().sqrt();
        let num = diff.norm_sqr().sqrt();
        Ok(if denom > 0.0 { num / denom } else { num })
    }

    /// Reorder the time axes so that axis `a` of the result is axis `perm[a]` of
    /// `self`, applied to every channel component with the channel indices
    /// permuted the same way.
    pub fn permute_axes(&self, perm: &[usize]) -> WavepacketTensor {
        assert_eq!(perm.len(), self.order);
        let n = self.grid.len();
        let l = self.order;
        let mut out = vec![ZERO; self.values.len()];
        let block = self.block_len();
        let n_comp = self.n_components();
        let digits = |mut x: usize, base: usize| {
            let mut d = vec![0; l];
            for a in (0..l).rev() {
                d[a] = x % base;
                x /= base;
            }
            d
        };
        let undigits = |d: &[usize], base: usize| d.iter().fold(0, |acc, &v| acc * base + v);
        for c in 0..n_comp {
            let kd = digits(c, self.m);
            let kp: Vec<usize> = perm.iter().map(|&p| kd[p]).collect();
            let c_out = undigits(&kp, self.m);
            for t in 0..block {
                let td = digits(t, n);
                let tp: Vec<usize> = perm.iter().map(|&p| td[p]).collect();
                out[c_out * block + undigits(&tp, n)] = self.values[c * block + t];
            }
        }
        WavepacketTensor {
            values: out,
            ..self.clone()
        }
    }
}

/// Contract mode `axis` with `kernel`: channel index `k_axis` against the
/// kernel's column index, and time axis `t_axis` by convolution.
fn contract_mode(
    psi: &WavepacketTensor,
    axis: usize,
    kernel: &PreparedKernel,
) -> Vec<C64> {
    let (m, l, n) = (psi.m, psi.order, psi.grid.len());
    let block = psi.block_len();
    let c_stride = m.pow((l - 1 - axis) as u32) * block;
    let t_stride = n.pow((l - 1 - axis) as u32);
    let other_c = m.pow((l - 1) as u32);
    let other_t = n.pow((l - 1) as u32);
    let insert = |x: usize, base: usize, stride: usize| (x / stride) * stride * base + x % stride;
    let c_ins = m.pow((l - 1 - axis) as u32);
    let fibers: Vec<(usize, Vec<Vec<C64>>)> = (0..other_c * other_t)
        .into_par_iter()
        .filter_map(|f| {
            let (cf, tf) = (f / other_t, f % other_t);
            let base = insert(cf, m, c_ins) * block + insert(tf, n, t_stride);
            let signals: Vec<Vec<C64>> = (0..m)
                .map(|k| (0..n).map(|t| psi.values[base + k * c_stride + t * t_stride]).collect())
                .collect();
            if signals.iter().all(|s| s.iter().all(|z| *z == ZERO)) {
                return None;
            }
            let refs: Vec<&[C64]> = signals.iter().map(|s| s.as_slice()).collect();
            Some((base, kernel.apply(&refs)))
        })
        .collect();
    let mut out = vec![ZERO; psi.values.len()];
    for (base, outs) in fibers {
        for (r, y) in outs.into_iter().enumerate() {
            for (t, v) in y.into_iter().enumerate() {
                out[base + r * c_stride + t * t_stride] = v;
            }
        }
    }
    out
}

/// Multimode convolution with a possibly different kernel on each mode:
/// `W = V x_1 E_1 x_2 E_2 .. x_l E_l`, evaluated as `l` sequential mode
/// contractions.
pub fn multimode_convolution_modes(
    psi: &WavepacketTensor,
    kernels: &[&MatrixKernel],
    method: ConvMethod,
) -> Result<WavepacketTensor> {
    if kernels.len() != psi.order {
        return Err(Error::Dimension(format!(
            "{} kernels for a wave packet of order {}",
            kernels.len(),
            psi.order
        )));
    }
    let n = psi.grid.len();
    let mut values = psi.values.clone();
    for (axis, kernel) in kernels.iter().enumerate() {
        if kernel.rows() != psi.m || kernel.cols() != psi.m {
            return Err(Error::Dimension(format!(
                "kernel is {}x{}, wave packet has m = {}",
                kernel.rows(),
                kernel.cols(),
                psi.m
            )));
        }
        let prepared = PreparedKernel::new(kernel, n, method);
        check_kernel_spacing(&prepared, psi.grid.dt())?;
        let current = WavepacketTensor {
            values,
            ..psi.clone()
        };
        values = contract_mode(&current, axis, &prepared);
    }
    Ok(WavepacketTensor {
        values,
        ..psi.clone()
    })
}

/// Apply the same `m x m` kernel to every mode.
pub fn multimode_convolution(
    psi: &WavepacketTensor,
    kernel: &MatrixKernel,
    method: ConvMethod,
) -> Result<WavepacketTensor> {
    let ks = vec![kernel; psi.order];
    multimode_convolution_modes(psi, &ks, method)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lin_sys::Support;
    use crate::linalg::{c, eye};

    fn grid() -> TimeGrid {
        TimeGrid::new(-2.0, 2.0, 16).unwrap()
    }

    #[test]
    fn delta_identity_kernel_is_identity() {
        let caps = Caps::default();
        let psi = WavepacketTensor::sample_diagonal(1, 2, grid(), 2, |t| c(t[0], t[1] * t[1]), &caps).unwrap();
        let k = MatrixKernel::pure_delta(eye(2), grid().dt(), Support::Causal);
        let out = multimode_convolution(&psi, &k, ConvMethod::Fft).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn diagonal_embedding() {
        let caps = Caps::default();
        let psi = WavepacketTensor::sample_diagonal(0, 2, grid(), 2, |_| c(1.0, 0.0), &caps).unwrap();
        assert!(psi.component(&[0, 1]).iter().all(|z| *z == ZERO));
        assert!(psi.component(&[0, 0]).iter().all(|z| *z == c(1.0, 0.0)));
    }

    #[test]
    fn caps_reject_large_shapes() {
        let caps = Caps::default();
        let g = TimeGrid::new(0.0, 1.0, 512).unwrap();
        assert!(matches!(
            WavepacketTensor::zeros(0, 1, g, 3, &caps),
            Err(Error::CapExceeded(_))
        ));
        assert!(WavepacketTensor::zeros(0, 1, g, 2, &caps).is_ok());
    }

    #[test]
    fn permute_axes_swaps_times() {
        let caps = Caps::default();
        let psi = WavepacketTensor::sample_diagonal(0, 1, grid(), 2, |t| c(t[0], 2.0 * t[1]), &caps).unwrap();
        let sw = psi.permute_axes(&[1, 0]);
        assert_eq!(sw.get(&[0, 0], &[3, 5]), psi.get(&[0, 0], &[5, 3]));
    }
}

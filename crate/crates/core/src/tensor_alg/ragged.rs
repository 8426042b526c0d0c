use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{CMat, C64, ZERO};

fn offsets_for(ells: &[usize]) -> Vec<usize> {
    let mut off = Vec::with_capacity(ells.len() + 1);
    let mut acc = 0;
    off.push(0);
    for &l in ells {
        acc += l;
        off.push(acc);
    }
    off
}

/// Pulse matrix `xi in C^{m x (l_1, ..., l_m)}`: channel `j` carries `l_j`
/// sampled pulses `xi^{jk}`.  Storage is one flat slab with per-channel offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct RaggedPulseMatrix {
    grid: TimeGrid,
    ells: Vec<usize>,
    offsets: Vec<usize>,
    pulses: Vec<Vec<C64>>,
}

impl RaggedPulseMatrix {
    /// `channels[j][k]` is the sampled pulse `xi^{jk}`.
    pub fn new(grid: TimeGrid, channels: Vec<Vec<Vec<C64>>>) -> Result<Self> {
        grid.validate()?;
        if channels.is_empty() {
            return Err(Error::Dimension("a pulse matrix needs at least one channel".into()));
        }
        let ells: Vec<usize> = channels.iter().map(|c| c.len()).collect();
        let mut pulses = Vec::new();
        for (j, ch) in channels.into_iter().enumerate() {
            for (k, p) in ch.into_iter().enumerate() {
                if p.len() != grid.len() {
                    return Err(Error::GridMismatch(format!(
                        "pulse ({}, {}) has {} samples, grid has {}",
                        j,
                        k,
                        p.len(),
                        grid.len()
                    )));
                }
                if p.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                    return Err(Error::Parse(format!("pulse ({}, {}) has non-finite samples", j, k)));
                }
                pulses.push(p);
            }
        }
        Ok(RaggedPulseMatrix {
            grid,
            offsets: offsets_for(&ells),
            ells,
            pulses,
        })
    }

    /// Sample analytic pulse shapes on a grid.
    pub fn from_fns<F>(grid: TimeGrid, channels: &[Vec<F>]) -> Result<Self>
    where
        F: Fn(f64) -> C64,
    {
        let sampled = channels
            .iter()
            .map(|ch| ch.iter().map(|f| grid.sample(f)).collect())
            .collect();
        RaggedPulseMatrix::new(grid, sampled)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn m(&self) -> usize {
        self.ells.len()
    }

    pub fn ells(&self) -> &[usize] {
        &self.ells
    }

    pub fn total_photons(&self) -> usize {
        self.ells.iter().sum()
    }

    pub fn pulse(&self, j: usize, k: usize) -> &[C64] {
        assert!(k < self.ells[j]);
        &self.pulses[self.offsets[j] + k]
    }

    /// Gram matrix `(G_j)_{ab} = int conj(xi^{ja}) xi^{jb} dt`.
    pub fn gram(&self, j: usize) -> CMat {
        let l = self.ells[j];
        CMat::from_fn(l, l, |a, b| self.grid.inner(self.pulse(j, a), self.pulse(j, b)))
    }
}

/// 3-way tensor in `C^{m x m x (l_1, ..., l_m)}` of sampled functions; the
/// third index of the `(i, j, .)` fibre ranges over `l_j` values.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTensor3 {
    grid: TimeGrid,
    m: usize,
    ells: Vec<usize>,
    offsets: Vec<usize>,
    /// Entry `(i, j, k)` lives at `(offsets[j] + k) * m + i`.
    data: Vec<Vec<C64>>,
}

impl PulseTensor3 {
    pub fn zeros(grid: TimeGrid, ells: &[usize]) -> Self {
        let m = ells.len();
        let offsets = offsets_for(ells);
        let total = offsets[m];
        PulseTensor3 {
            grid,
            m,
            ells: ells.to_vec(),
            offsets,
            data: vec![vec![ZERO; grid.len()]; total * m],
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ells(&self) -> &[usize] {
        &self.ells
    }

    fn index(&self, i: usize, j: usize, k: usize) -> usize {
        assert!(i < self.m && j < self.m && k < self.ells[j], "tensor index out of range");
        (self.offsets[j] + k) * self.m + i
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &[C64] {
        &self.data[self.index(i, j, k)]
    }

    pub fn get_mut(&mut self, i: usize, j: usize, k: usize) -> &mut Vec<C64> {
        let idx = self.index(i, j, k);
        &mut self.data[idx]
    }

    pub fn at(&self, i: usize, j: usize, k: usize, t: usize) -> C64 {
        self.get(i, j, k)[t]
    }

    /// All `(j, k)` column labels in storage order.
    pub fn columns(&self) -> Vec<(usize, usize)> {
        (0..self.m)
            .flat_map(|j| (0..self.ells[j]).map(move |k| (j, k)))
            .collect()
    }

    /// The `m` functions `X_{:jk}` of one mode-1 fibre.
    pub fn fiber(&self, j: usize, k: usize) -> Vec<&[C64]> {
        (0..self.m).map(|i| self.get(i, j, k)).collect()
    }

    pub fn set_fiber(&mut self, j: usize, k: usize, values: Vec<Vec<C64>>) {
        assert_eq!(values.len(), self.m);
        for (i, v) in values.into_iter().enumerate() {
            assert_eq!(v.len(), self.grid.len());
            *self.get_mut(i, j, k) = v;
        }
    }

    /// Entrywise conjugate `X^#`.
    pub fn conj(&self) -> PulseTensor3 {
        PulseTensor3 {
            data: self
                .data
                .iter()
                .map(|v| v.iter().map(|z| z.conj()).collect())
                .collect(),
            ..self.clone()
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0, |acc, z| acc.max(z.norm()))
    }

    pub fn same_shape(&self, other: &PulseTensor3) -> bool {
        self.m == other.m && self.ells == other.ells && self.grid.len() == other.grid.len()
    }

    pub fn max_abs_diff(&self, other: &PulseTensor3) -> f64 {
        assert!(self.same_shape(other), "tensor shapes differ");
        self.data
            .iter()
            .zip(&other.data)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    /// Per-channel Gram matrix of the fibres: `sum_i int conj(X_{ija}) X_{ijb} dt`.
    pub fn gram(&self, j: usize) -> CMat {
        let l = self.ells[j];
        CMat::from_fn(l, l, |a, b| {
            (0..self.m)
                .map(|i| self.grid.inner(self.get(i, j, a), self.get(i, j, b)))
                .sum()
        })
    }
}

/// Horizontal-slice lift: `xi_up_{ijk} = xi^{jk}` when `i = j`, zero otherwise.
pub fn lift(xi: &RaggedPulseMatrix) -> PulseTensor3 {
    let mut out = PulseTensor3::zeros(*xi.grid(), xi.ells());
    for j in 0..xi.m() {
        for k in 0..xi.ells()[j] {
            *out.get_mut(j, j, k) = xi.pulse(j, k).to_vec();
        }
    }
    out
}

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{CMat, C64, ZERO};

/// One rank-one term `left(t) right(r)^dag` of a smooth covariance kernel.
/// Both factors are `2m`-vector functions stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub left: Vec<Vec<C64>>,
    pub right: Vec<Vec<C64>>,
}

/// Stationary smooth kernel `K(t - r)` sampled at lags `k dt >= 0`, with
/// `K(-tau) = K(tau)^dag`.  At lag zero the stored value is the mean of the two
/// one-sided limits.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryKernel {
    pub dt: f64,
    pub samples: Vec<CMat>,
}

impl StationaryKernel {
    /// `K` at signed lag index `n`; zero beyond the sampled window.
    pub fn at(&self, n: i64) -> CMat {
        let k = n.unsigned_abs() as usize;
        let dim = self.samples.first().map_or(0, |s| s.nrows());
        match self.samples.get(k) {
            None => CMat::zeros(dim, dim),
            Some(s) if n >= 0 => s.clone(),
            Some(s) => s.adjoint(),
        }
    }
}

/// Structured covariance kernel `delta(t - r) D + sum_p left_p(t) right_p(r)^dag + K(t - r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceFunction {
    pub m: usize,
    pub grid: TimeGrid,
    pub delta_coeff: CMat,
    pub smooth: Vec<FactorPair>,
    pub stationary: Option<StationaryKernel>,
}

impl CovarianceFunction {
    pub fn rank(&self) -> usize {
        self.smooth.len()
    }

    /// Finite-rank part at grid indices `(ti, ri)`.
    pub fn finite_rank_at(&self, ti: usize, ri: usize) -> CMat {
        let dim = 2 * self.m;
        let mut out = CMat::zeros(dim, dim);
        for p in &self.smooth {
            for a in 0..dim {
                let l = p.left[a][ti];
                if l == ZERO {
                    continue;
                }
                for b in 0..dim {
                    out[(a, b)] += l * p.right[b][ri].conj();
                }
            }
        }
        out
    }

    /// Full smooth kernel (finite-rank plus stationary part) at `(t_i, r_j)`.
    pub fn smooth_at(&self, ti: usize, ri: usize) -> CMat {
        let mut out = self.finite_rank_at(ti, ri);
        if let Some(st) = &self.stationary {
            out += st.at(ti as i64 - ri as i64);
        }
        out
    }

    /// Per-channel intensity read off the `(2,2)` block at `t = r`.
    pub fn intensity(&self) -> Vec<Vec<f64>> {
        let m = self.m;
        let n = self.grid.len();
        let mut out = vec![vec![0.0; n]; m];
        for t in 0..n {
            let k = self.smooth_at(t, t);
            for (j, row) in out.iter_mut().enumerate() {
                row[t] = k[(m + j, m + j)].re;
            }
        }
        out
    }

    /// `max |R(t,r)^dag - R(r,t)|` over the sampled grid pairs given.
    pub fn hermitian_defect(&self, pairs: &[(usize, usize)]) -> f64 {
        pairs
            .iter()
            .map(|&(t, r)| {
                let a = self.smooth_at(t, r).adjoint();
                let b = self.smooth_at(r, t);
                crate::linalg::max_abs_diff(&a, &b)
            })
            .fold(crate::linalg::max_abs_diff(&self.delta_coeff, &self.delta_coeff.adjoint()), f64::max)
    }

    /// `int int f(t)^dag R_11(t, r) f(r) dt dr` for the smooth part of the
    /// `(1,1)` block and an `m`-vector function `f` (component-major).
    pub fn quadratic_form_11(&self, f: &[Vec<C64>]) -> Result<C64> {
        let m = self.m;
        if f.len() != m || f.iter().any(|x| x.len() != self.grid.len()) {
            return Err(Error::Dimension("test function must be an m-vector on the grid".into()));
        }
        let w = self.grid.trapz_weights();
        let n = self.grid.len();
        let mut acc = ZERO;
        for t in 0..n {
            for r in 0..n {
                let k = self.smooth_at(t, r);
                for a in 0..m {
                    for b in 0..m {
                        acc += w[t] * w[r] * f[a][t].conj() * k[(a, b)] * f[b][r];
                    }
                }
            }
        }
        Ok(acc)
    }
}

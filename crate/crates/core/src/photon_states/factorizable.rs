use crate::config::{Caps, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ZERO};
use crate::tensor_alg::{lift, permanent, CoreTensor, PulseTensor3, RaggedPulseMatrix};

use super::covariance::{CovarianceFunction, FactorPair};

/// `m`-channel product state `prod_j N_j^{-1/2} prod_k B_j^*(xi^{jk}) |0>`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorizableState {
    pub pulses: RaggedPulseMatrix,
    /// `N_j = perm(G_j)`; channels without photons carry 1.
    pub norms: Vec<f64>,
    pub core: CoreTensor,
    pub grams: Vec<CMat>,
}

impl FactorizableState {
    pub fn m(&self) -> usize {
        self.pulses.m()
    }

    pub fn ells(&self) -> &[usize] {
        self.pulses.ells()
    }
}

pub fn make_factorizable(pulses: RaggedPulseMatrix, tol: &Tolerances, caps: &Caps) -> Result<FactorizableState> {
    let grams: Vec<CMat> = (0..pulses.m()).map(|j| pulses.gram(j)).collect();
    let mut norms = Vec::with_capacity(grams.len());
    for g in &grams {
        let n = permanent(g, caps)?.re;
        if !(n > tol.norm) {
            return Err(Error::ZeroNorm { value: n, tol: tol.norm });
        }
        norms.push(n);
    }
    let core = CoreTensor::from_grams(&grams, caps)?;
    Ok(FactorizableState {
        pulses,
        norms,
        core,
        grams,
    })
}

/// `max_i |sum_k C_{jik} (G_j)_{ik} - N_j|`: the row-expansion identity of the
/// normalization permanent, used as a self-test.
pub fn lemma_nl_check(state: &FactorizableState, j: usize) -> f64 {
    let c = state.core.slice(j);
    let g = &state.grams[j];
    let l = c.nrows();
    (0..l)
        .map(|i| {
            let s: C64 = (0..l).map(|k| c[(i, k)] * g[(i, k)]).sum();
            (s - state.norms[j]).norm()
        })
        .fold(0.0, f64::max)
}

/// Finite-rank pairs of `Delta(P, 0)`-type photon kernels carried by the
/// columns `(x_b, y_b)` of a pulse tensor: for each channel `j` and pulse `b`,
/// `left = x_b`, `right = sum_a conj(C_{jab}) x_a / N_j`.
pub(crate) fn photon_pairs(
    upper: &PulseTensor3,
    lower: &PulseTensor3,
    core: &CoreTensor,
    norms: &[f64],
    transpose_core: bool,
) -> Vec<FactorPair> {
    let m = upper.m();
    let n = upper.grid().len();
    let column = |j: usize, b: usize| -> Vec<Vec<C64>> {
        let mut v: Vec<Vec<C64>> = upper.fiber(j, b).iter().map(|x| x.to_vec()).collect();
        v.extend(lower.fiber(j, b).iter().map(|x| x.iter().map(|z| z.conj()).collect::<Vec<_>>()));
        v
    };
    let mut pairs = Vec::new();
    for j in 0..m {
        let c = core.slice(j);
        let l = c.nrows();
        let cols: Vec<Vec<Vec<C64>>> = (0..l).map(|b| column(j, b)).collect();
        for b in 0..l {
            let mut right = vec![vec![ZERO; n]; 2 * m];
            for (a, col_a) in cols.iter().enumerate() {
                let coef = if transpose_core { c[(b, a)] } else { c[(a, b)] };
                let w = coef.conj() / norms[j];
                if w == ZERO {
                    continue;
                }
                for (r, comp) in right.iter_mut().enumerate() {
                    for (x, y) in comp.iter_mut().zip(&col_a[r]) {
                        *x += w * y;
                    }
                }
            }
            let left = cols[b].clone();
            let is_zero = |v: &Vec<Vec<C64>>| v.iter().all(|c| c.iter().all(|z| *z == ZERO));
            if is_zero(&left) || is_zero(&right) {
                continue;
            }
            pairs.push(FactorPair { left, right });
        }
    }
    pairs
}

/// Input covariance `delta(t - r) diag(I, 0) + diag(P(t,r), P(t,r)^#)` with
/// `P_ik(t, r) = <b_k^*(r) b_i(t)>`.
pub fn input_covariance(state: &FactorizableState) -> CovarianceFunction {
    let m = state.m();
    let up = lift(&state.pulses);
    let zero = PulseTensor3::zeros(*up.grid(), up.ells());
    let mut smooth = photon_pairs(&up, &zero, &state.core, &state.norms, false);
    smooth.extend(photon_pairs(&zero, &up, &state.core, &state.norms, true));
    let mut delta = CMat::zeros(2 * m, 2 * m);
    for i in 0..m {
        delta[(i, i)] = C64::new(1.0, 0.0);
    }
    CovarianceFunction {
        m,
        grid: *state.pulses.grid(),
        delta_coeff: delta,
        smooth,
        stationary: None,
    }
}

/// `n_j(t) = 1/N_j sum_{ik} C_{jik} conj(xi^{ji}(t)) xi^{jk}(t)`, one row per channel.
pub fn input_intensity(state: &FactorizableState) -> Vec<Vec<f64>> {
    let xi = &state.pulses;
    let n = xi.grid().len();
    (0..xi.m())
        .map(|j| {
            let c = state.core.slice(j);
            let l = c.nrows();
            (0..n)
                .map(|t| {
                    let mut acc = ZERO;
                    for i in 0..l {
                        for k in 0..l {
                            acc += c[(i, k)] * xi.pulse(j, i)[t].conj() * xi.pulse(j, k)[t];
                        }
                    }
                    acc.re / state.norms[j]
                })
                .collect()
        })
        .collect()
}

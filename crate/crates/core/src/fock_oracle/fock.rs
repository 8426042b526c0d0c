use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::linalg::{C64, ZERO};

/// Channel `channel` occupied in dictionary function `label`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModeSymbol {
    pub channel: usize,
    pub label: usize,
}

/// Sparse state over `m` channels times `d` dictionary labels.  Keys are
/// occupation tuples indexed `channel * d + label`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    m: usize,
    d: usize,
    amps: BTreeMap<Vec<usize>, C64>,
}

impl FockVector {
    pub fn vacuum(m: usize, d: usize) -> Self {
        let mut amps = BTreeMap::new();
        amps.insert(vec![0; m * d], C64::new(1.0, 0.0));
        FockVector { m, d, amps }
    }

    pub fn zero(m: usize, d: usize) -> Self {
        FockVector {
            m,
            d,
            amps: BTreeMap::new(),
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn labels(&self) -> usize {
        self.d
    }

    pub fn index(&self, mode: ModeSymbol) -> usize {
        mode.channel * self.d + mode.label
    }

    pub fn amplitudes(&self) -> &BTreeMap<Vec<usize>, C64> {
        &self.amps
    }

    pub fn amplitude(&self, occupation: &[usize]) -> C64 {
        self.amps.get(occupation).copied().unwrap_or(ZERO)
    }

    /// Amplitude of the state with `counts[j]` photons in channel `j`, all in
    /// dictionary function 0.
    pub fn amplitude_single_label(&self, counts: &[usize]) -> C64 {
        let mut occ = vec![0; self.m * self.d];
        for (j, &n) in counts.iter().enumerate() {
            occ[j * self.d] = n;
        }
        self.amplitude(&occ)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// `<self, other>`, conjugating `self`.
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.amps
            .iter()
            .filter_map(|(k, a)| other.amps.get(k).map(|b| a.conj() * b))
            .sum()
    }

    pub fn scaled(mut self, s: C64) -> Self {
        for a in self.amps.values_mut() {
            *a *= s;
        }
        self
    }

    fn add_into(&mut self, key: Vec<usize>, value: C64) {
        *self.amps.entry(key).or_insert(ZERO) += value;
    }

    pub fn add(mut self, other: &FockVector) -> Self {
        for (k, v) in &other.amps {
            self.add_into(k.clone(), *v);
        }
        self
    }

    /// Drop amplitudes with magnitude at most `tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        self.amps.retain(|_, a| a.norm() > tol);
        self
    }

    /// `sum_mu c_mu a_mu^*` applied to the state, modes given as flat indices.
    pub fn apply_linear_creation(&self, coeffs: &[(usize, C64)]) -> FockVector {
        let mut out = FockVector::zero(self.m, self.d);
        for (occ, a) in &self.amps {
            for &(mu, c) in coeffs {
                if c == ZERO {
                    continue;
                }
                let mut key = occ.clone();
                key[mu] += 1;
                let ladder = (key[mu] as f64).sqrt();
                out.add_into(key, a * c * ladder);
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let amps: Vec<Value> = self
            .amps
            .iter()
            .map(|(k, a)| json!({"occupation": k, "re": a.re, "im": a.im}))
            .collect();
        json!({"channels": self.m, "labels": self.d, "amplitudes": amps})
    }
}

/// One linear creation factor `sum_i coeffs[i] b_i^*[label]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub coeffs: Vec<C64>,
    pub label: usize,
}

/// `prod_f (sum_i c_{f,i} b_i^*[label_f]) start`.
pub fn apply_creation_polynomial(factors: &[Factor], start: &FockVector) -> Result<FockVector> {
    let mut state = start.clone();
    for f in factors {
        if f.coeffs.len() != start.m {
            return Err(Error::Dictionary(format!(
                "factor has {} channel coefficients, state has {} channels",
                f.coeffs.len(),
                start.m
            )));
        }
        if f.label >= start.d {
            return Err(Error::Dictionary(format!(
                "label {} outside a dictionary of {} functions",
                f.label, start.d
            )));
        }
        let coeffs: Vec<(usize, C64)> = f
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (start.index(ModeSymbol { channel: i, label: f.label }), c))
            .collect();
        state = state.apply_linear_creation(&coeffs);
    }
    Ok(state)
}

/// Sampled orthonormal pulse family.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    grid: TimeGrid,
    pulses: Vec<Vec<C64>>,
}

impl Dictionary {
    pub const GRAM_TOL: f64 = 1e-10;

    pub fn new(grid: TimeGrid, pulses: Vec<Vec<C64>>) -> Result<Self> {
        if pulses.iter().any(|p| p.len() != grid.len()) {
            return Err(Error::Dictionary("pulse length differs from the grid".into()));
        }
        for (a, pa) in pulses.iter().enumerate() {
            for (b, pb) in pulses.iter().enumerate() {
                let g = grid.inner(pa, pb);
                let want = if a == b { 1.0 } else { 0.0 };
                if (g - want).norm() > Self::GRAM_TOL {
                    return Err(Error::Dictionary(format!(
                        "Gram entry ({a}, {b}) = {g} is not orthonormal"
                    )));
                }
            }
        }
        Ok(Dictionary { grid, pulses })
    }

    pub fn len(&self) -> usize {
        self.pulses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pulses.is_empty()
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Coefficients of `xi` in the dictionary; errors when the residual norm
    /// exceeds `tol`.
    pub fn expand(&self, xi: &[C64], tol: f64) -> Result<Vec<C64>> {
        let x: Vec<C64> = self.pulses.iter().map(|p| self.grid.inner(p, xi)).collect();
        let residual: Vec<C64> = (0..xi.len())
            .map(|t| xi[t] - x.iter().zip(&self.pulses).map(|(c, p)| c * p[t]).sum::<C64>())
            .collect();
        let r = self.grid.inner(&residual, &residual).re.max(0.0).sqrt();
        if r > tol {
            return Err(Error::Dictionary(format!("pulse not expressible in the dictionary (residual {r:.3e})")));
        }
        Ok(x)
    }
}

use rayon::prelude::*;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{C64, ZERO};
use crate::tensor_alg::WavepacketTensor;

/// General multi-photon state: one wave packet tensor per channel, with
/// permutation-sum normalizations.
#[derive(Debug, Clone, PartialEq)]
pub struct UnfactorizableState {
    pub channels: Vec<WavepacketTensor>,
    pub norms: Vec<f64>,
}

impl UnfactorizableState {
    pub fn m(&self) -> usize {
        self.channels.len()
    }

    pub fn ells(&self) -> Vec<usize> {
        self.channels.iter().map(|c| c.order()).collect()
    }
}

/// All permutations of `0..l` in lexicographic order.
pub fn permutations(l: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(l), &mut vec![false; l], &mut out);
    out
}

/// `N = sum_P int Psi(t) conj(Psi(P t)) dt`, the squared norm of the
/// symmetrized wave function.
pub(crate) fn permutation_norm(psi: &WavepacketTensor) -> Result<f64> {
    if psi.order() == 0 {
        return Ok(1.0);
    }
    let terms: Vec<C64> = permutations(psi.order())
        .par_iter()
        .map(|p| psi.permute_axes(p).inner(psi))
        .collect::<Result<Vec<_>>>()?;
    Ok(terms.iter().fold(ZERO, |a, b| a + b).re)
}

pub fn make_unfactorizable(channels: Vec<WavepacketTensor>, tol: &Tolerances) -> Result<UnfactorizableState> {
    let m = channels.len();
    if m == 0 {
        return Err(Error::Dimension("at least one channel is required".into()));
    }
    for (j, c) in channels.iter().enumerate() {
        if c.m() != m || c.channel() != j {
            return Err(Error::Dimension(format!(
                "channel {} wave packet is labelled channel {} with m = {}",
                j,
                c.channel(),
                c.m()
            )));
        }
        c.grid().check_same(channels[0].grid())?;
    }
    let norms = channels
        .iter()
        .map(|c| {
            let n = permutation_norm(c)?;
            if !(n > tol.norm) {
                return Err(Error::ZeroNorm { value: n, tol: tol.norm });
            }
            Ok(n)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UnfactorizableState { channels, norms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Caps;
    use crate::grid::TimeGrid;
    use crate::linalg::c;

    #[test]
    fn permutation_counts() {
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
        assert_eq!(permutations(3).len(), 6);
    }

    #[test]
    fn antisymmetric_wave_function_has_zero_norm() {
        let g = TimeGrid::new(-6.0, 6.0, 97).unwrap();
        let caps = Caps::default();
        let f1 = |t: f64| (-t * t / 2.0).exp();
        let f2 = |t: f64| t * (-t * t / 2.0).exp();
        let psi = WavepacketTensor::sample_diagonal(
            0,
            1,
            g,
            2,
            |t| c(f1(t[0]) * f2(t[1]) - f2(t[0]) * f1(t[1]), 0.0),
            &caps,
        )
        .unwrap();
        let err = make_unfactorizable(vec![psi], &Tolerances::default());
        assert!(matches!(err, Err(Error::ZeroNorm { .. })));
    }
}

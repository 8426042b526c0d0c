use crate::config::Caps;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_defect, CMat, ZERO};

use super::permanent::permanent;
use super::ragged::{PulseTensor3, RaggedPulseMatrix};

/// Partially Hermitian core tensor: one `l_j x l_j` slice per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreTensor {
    pub slices: Vec<CMat>,
}

fn minor(g: &CMat, row: usize, col: usize) -> CMat {
    let l = g.nrows();
    CMat::from_fn(l - 1, l - 1, |a, b| {
        g[(a + (a >= row) as usize, b + (b >= col) as usize)]
    })
}

impl CoreTensor {
    /// Slices of reduced permanents `C_{jik} = perm(G_j without row i, column k)`.
    pub fn from_grams(grams: &[CMat], caps: &Caps) -> Result<CoreTensor> {
        let slices = grams
            .iter()
            .map(|g| {
                let l = g.nrows();
                let mut s = CMat::zeros(l, l);
                for i in 0..l {
                    for k in 0..l {
                        s[(i, k)] = permanent(&minor(g, i, k), caps)?;
                    }
                }
                Ok(s)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CoreTensor { slices })
    }

    pub fn from_pulses(xi: &RaggedPulseMatrix, caps: &Caps) -> Result<CoreTensor> {
        let grams: Vec<CMat> = (0..xi.m()).map(|j| xi.gram(j)).collect();
        CoreTensor::from_grams(&grams, caps)
    }

    pub fn m(&self) -> usize {
        self.slices.len()
    }

    pub fn ells(&self) -> Vec<usize> {
        self.slices.iter().map(|s| s.nrows()).collect()
    }

    pub fn slice(&self, j: usize) -> &CMat {
        &self.slices[j]
    }

    /// Largest `|C_j - C_j^dag|` over all slices.
    pub fn hermitian_defect(&self) -> f64 {
        self.slices.iter().map(hermitian_defect).fold(0.0, f64::max)
    }
}

fn check_pairing(s: &PulseTensor3, t: &PulseTensor3, core: &CoreTensor, norms: &[f64]) -> Result<()> {
    if !s.same_shape(t) || core.ells() != s.ells() || norms.len() != s.m() {
        return Err(Error::Dimension(
            "circledast operands, core tensor and norms must share (m, ells)".into(),
        ));
    }
    if let Some(&n) = norms.iter().find(|n| !(**n > 0.0)) {
        return Err(Error::NonPositiveNorm { value: n });
    }
    Ok(())
}

fn pair_at(
    s: &PulseTensor3,
    ti: usize,
    t: &PulseTensor3,
    ri: usize,
    core: &CoreTensor,
    norms: &[f64],
) -> CMat {
    let m = s.m();
    let mut out = CMat::zeros(m, m);
    for j in 0..m {
        let c = core.slice(j);
        let l = c.nrows();
        if l == 0 {
            continue;
        }
        let inv_n = 1.0 / norms[j];
        for i in 0..m {
            for k in 0..m {
                let mut acc = ZERO;
                for a in 0..l {
                    let sa = s.at(i, j, a, ti);
                    if sa == ZERO {
                        continue;
                    }
                    let mut inner = ZERO;
                    for b in 0..l {
                        inner += c[(a, b)] * t.at(k, j, b, ri);
                    }
                    acc += sa * inner;
                }
                out[(i, k)] += acc * inv_n;
            }
        }
    }
    out
}

/// `(S(t) circledast T(r))_{ik} = sum_j 1/N_j sum_{a,b} C_{jab} S_{ija}(t) T_{kjb}(r)`
/// for grid indices `ti`, `ri`.
pub fn circledast(
    s: &PulseTensor3,
    ti: usize,
    t: &PulseTensor3,
    ri: usize,
    core: &CoreTensor,
    norms: &[f64],
) -> Result<CMat> {
    check_pairing(s, t, core, norms)?;
    if ti >= s.grid().len() || ri >= t.grid().len() {
        return Err(Error::Dimension("grid index out of range".into()));
    }
    Ok(pair_at(s, ti, t, ri, core, norms))
}

/// The pairing at coincident times `t = r` for every grid point.
pub fn circledast_diagonal(
    s: &PulseTensor3,
    t: &PulseTensor3,
    core: &CoreTensor,
    norms: &[f64],
) -> Result<Vec<CMat>> {
    check_pairing(s, t, core, norms)?;
    Ok((0..s.grid().len()).map(|i| pair_at(s, i, t, i, core, norms)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::linalg::{c, eye, max_abs_diff};
    use crate::tensor_alg::lift;

    #[test]
    fn identical_and_orthonormal_slices() {
        let caps = Caps::default();
        let ones = CMat::from_element(2, 2, c(1.0, 0.0));
        let core = CoreTensor::from_grams(&[ones.clone()], &caps).unwrap();
        assert_eq!(core.slice(0), &ones);
        let core = CoreTensor::from_grams(&[eye(2)], &caps).unwrap();
        assert_eq!(core.slice(0), &eye(2));
        let core = CoreTensor::from_grams(&[CMat::from_element(1, 1, c(0.3, 0.0))], &caps).unwrap();
        assert_eq!(core.slice(0)[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn single_photon_pairing() {
        let g = TimeGrid::new(0.0, 1.0, 5).unwrap();
        let xi = RaggedPulseMatrix::new(
            g,
            vec![vec![(0..5).map(|k| c(k as f64, 1.0 - k as f64)).collect()]],
        )
        .unwrap();
        let up = lift(&xi);
        let core = CoreTensor {
            slices: vec![CMat::from_element(1, 1, c(1.0, 0.0))],
        };
        // xi_up(r)^# circledast xi_up(t) = xi(t) conj(xi(r)) for m = l = 1
        let v = circledast(&up.conj(), 3, &up, 1, &core, &[1.0]).unwrap();
        let expect = xi.pulse(0, 0)[1] * xi.pulse(0, 0)[3].conj();
        assert!((v[(0, 0)] - expect).norm() < 1e-15);
        let v = circledast(&up, 1, &up.conj(), 3, &core, &[1.0]).unwrap();
        assert!(max_abs_diff(&v, &CMat::from_element(1, 1, expect)) < 1e-15);
    }

    #[test]
    fn rejects_bad_norm() {
        let g = TimeGrid::new(0.0, 1.0, 3).unwrap();
        let up = PulseTensor3::zeros(g, &[1]);
        let core = CoreTensor {
            slices: vec![CMat::from_element(1, 1, c(1.0, 0.0))],
        };
        assert!(matches!(
            circledast(&up, 0, &up, 0, &core, &[0.0]),
            Err(Error::NonPositiveNorm { .. })
        ));
    }
}

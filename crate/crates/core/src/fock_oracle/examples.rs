use serde::Serialize;

use crate::error::{Error, Result};
use crate::json::serialize_complex;
use crate::linalg::{c, CMat, C64};
use crate::tensor_alg::{CoreTensor, RaggedPulseMatrix};

use super::fock::{Dictionary, FockVector};

/// Pulse shapes of the two-photons-per-channel beamsplitter example, as
/// dictionary coefficients of `xi^{11}, xi^{12}, xi^{21}, xi^{22}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Example1Pulses {
    /// All four pulses equal one normalized function.
    Identical,
    /// `xi^{11} = xi^{21} = phi_0`, `xi^{12} = xi^{22} = phi_1`.
    Orthogonal,
    General { labels: usize, xi: [Vec<C64>; 4] },
}

impl Example1Pulses {
    fn coefficients(&self) -> Result<(usize, [Vec<C64>; 4])> {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        Ok(match self {
            Example1Pulses::Identical => (1, [vec![one], vec![one], vec![one], vec![one]]),
            Example1Pulses::Orthogonal => (
                2,
                [vec![one, zero], vec![zero, one], vec![one, zero], vec![zero, one]],
            ),
            Example1Pulses::General { labels, xi } => {
                if xi.iter().any(|x| x.len() != *labels) {
                    return Err(Error::Dictionary(format!("pulse coefficients must have {labels} entries")));
                }
                (*labels, xi.clone())
            }
        })
    }
}

/// `prod_j prod_k (sum_i S_ij B_i^*(xi^{jk})) |0>` with pulses given by
/// dictionary coefficients, unnormalized.
fn static_output(s: &CMat, d: usize, pulses: &[(usize, Vec<C64>)]) -> FockVector {
    let m = s.nrows();
    let mut state = FockVector::vacuum(m, d);
    for (j, x) in pulses {
        let mut coeffs = Vec::with_capacity(m * d);
        for i in 0..m {
            for (l, &xl) in x.iter().enumerate() {
                coeffs.push((i * d + l, s[(i, *j)] * xl));
            }
        }
        state = state.apply_linear_creation(&coeffs);
    }
    state
}

fn beamsplitter(e: f64) -> CMat {
    let (a, b) = (e.sqrt(), (1.0 - e).sqrt());
    CMat::from_row_slice(2, 2, &[c(a, 0.0), c(b, 0.0), c(-b, 0.0), c(a, 0.0)])
}

/// Output Fock vector of the beamsplitter with transmissivity `eta` and two
/// photons per input channel.
pub fn example1(eta: f64, pulses: &Example1Pulses) -> Result<FockVector> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid("eta", format!("must lie in [0, 1], got {eta}")));
    }
    let (d, xi) = pulses.coefficients()?;
    let list: Vec<(usize, Vec<C64>)> = xi.into_iter().enumerate().map(|(k, x)| (k / 2, x)).collect();
    let n = static_output(&CMat::identity(2, 2), d, &list).norm_sqr();
    if !(n > 0.0) {
        return Err(Error::ZeroNorm { value: n, tol: 0.0 });
    }
    Ok(static_output(&beamsplitter(eta), d, &list)
        .scaled(c(1.0 / n.sqrt(), 0.0))
        .pruned(1e-15))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Example2Result {
    #[serde(serialize_with = "serialize_complex")]
    pub amplitude: C64,
    pub closed_form: f64,
}

/// Amplitude of `|l, 1>` when one photon in channel 1 and `l` photons in
/// channel 2, all in the same pulse, meet on a beamsplitter of reflectivity `r`.
pub fn example2(r: f64, ell: usize) -> Result<Example2Result> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::invalid("R", format!("must lie in [0, 1], got {r}")));
    }
    if ell == 0 || ell > 10 {
        return Err(Error::invalid("ell", format!("must lie in 1..=10, got {ell}")));
    }
    let (sr, st) = (r.sqrt(), (1.0 - r).sqrt());
    let s = CMat::from_row_slice(2, 2, &[c(st, 0.0), c(sr, 0.0), c(sr, 0.0), c(-st, 0.0)]);
    let mut pulses = vec![(0, vec![c(1.0, 0.0)])];
    pulses.extend((0..ell).map(|_| (1, vec![c(1.0, 0.0)])));
    let norm = factorial(ell).sqrt();
    let out = static_output(&s, 1, &pulses).scaled(c(1.0 / norm, 0.0));
    Ok(Example2Result {
        amplitude: out.amplitude(&[ell, 1]),
        closed_form: r.powf((ell as f64 - 1.0) / 2.0) * (r - ell as f64 * (1.0 - r)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Example3Term {
    pub n: usize,
    #[serde(serialize_with = "serialize_complex")]
    pub oracle: C64,
    #[serde(serialize_with = "serialize_complex")]
    pub closed_form: C64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `e^{-|a|^2} sum_{n > n_max} |a|^{2n} / n!`.
fn poisson_tail(alpha: C64, n_max: usize) -> f64 {
    let x = alpha.norm_sqr();
    let mut term = (-x).exp();
    for n in 1..=n_max {
        term *= x / n as f64;
    }
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        term *= x / n as f64;
        tail += term;
        if term < 1e-18 * tail.max(1e-300) || n > n_max + 10_000 {
            break;
        }
        n += 1;
    }
    tail
}

/// Coherent state `|alpha>` in channel 1 and `ell` photons in channel 2 on the
/// beamsplitter `[[T, -R], [R, T]]`; amplitudes of `|n>` in channel 1 jointly
/// with `ell` photons detected in channel 2, for `n = 0..=n_max`.
pub fn example3(r: f64, t: f64, ell: usize, alpha: C64, n_max: usize) -> Result<Vec<Example3Term>> {
    if (r * r + t * t - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("R, T", format!("R^2 + T^2 = {} must equal 1", r * r + t * t)));
    }
    let tail = poisson_tail(alpha, n_max);
    if tail > 1e-12 {
        return Err(Error::Truncation { tail, tol: 1e-12 });
    }
    let s = CMat::from_row_slice(2, 2, &[c(t, 0.0), c(-r, 0.0), c(r, 0.0), c(t, 0.0)]);
    let pre = (-alpha.norm_sqr() / 2.0).exp();
    let one = vec![c(1.0, 0.0)];
    Ok((0..=n_max)
        .map(|n| {
            let coh = pre * alpha.powu(n as u32) / factorial(n).sqrt();
            let mut pulses = vec![(0, one.clone()); n];
            pulses.extend(vec![(1, one.clone()); ell]);
            let out = static_output(&s, 1, &pulses);
            let norm = (factorial(n) * factorial(ell)).sqrt();
            let oracle = coh * out.amplitude(&[n, ell]) / norm;
            let sum: f64 = (0..=n.min(ell))
                .map(|j| {
                    binomial(n, n - j)
                        * binomial(ell, j)
                        * if j % 2 == 0 { 1.0 } else { -1.0 }
                        * t.powi((n + ell - 2 * j) as i32)
                        * r.powi(2 * j as i32)
                })
                .sum();
            Example3Term {
                n,
                oracle,
                closed_form: coh * sum,
            }
        })
        .collect())
}

/// `C_{jik} = <0| prod_{a != i} B(xi^{ja}) prod_{b != k} B^*(xi^{jb}) |0>`,
/// evaluated in the dictionary by ladder algebra.
pub fn oracle_core_tensor(pulses: &RaggedPulseMatrix, dict: &Dictionary, tol: f64) -> Result<CoreTensor> {
    pulses.grid().check_same(dict.grid())?;
    let d = dict.len();
    let mut slices = Vec::with_capacity(pulses.m());
    for j in 0..pulses.m() {
        let l = pulses.ells()[j];
        let xs = (0..l)
            .map(|k| dict.expand(pulses.pulse(j, k), tol))
            .collect::<Result<Vec<_>>>()?;
        let removed: Vec<FockVector> = (0..l)
            .map(|skip| {
                let mut v = FockVector::vacuum(1, d);
                for (k, x) in xs.iter().enumerate() {
                    if k != skip {
                        let coeffs: Vec<(usize, C64)> = x.iter().copied().enumerate().collect();
                        v = v.apply_linear_creation(&coeffs);
                    }
                }
                v
            })
            .collect();
        slices.push(CMat::from_fn(l, l, |i, k| removed[i].inner(&removed[k])));
    }
    Ok(CoreTensor { slices })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;

    #[test]
    fn balanced_identical() {
        let v = example1(0.5, &Example1Pulses::Identical).unwrap();
        let a40 = v.amplitude_single_label(&[4, 0]);
        let a22 = v.amplitude_single_label(&[2, 2]);
        let a04 = v.amplitude_single_label(&[0, 4]);
        let s = (3.0f64 / 8.0).sqrt();
        assert!((a40.re - s).abs() < 1e-14 && (a22.re + 0.5).abs() < 1e-14 && (a04.re - s).abs() < 1e-14);
        assert_eq!(v.amplitudes().len(), 3);
        assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_config_has_no_odd_splits() {
        let v = example1(0.5, &Example1Pulses::Orthogonal).unwrap();
        assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
        for (occ, a) in v.amplitudes() {
            let ch1 = occ[0] + occ[1];
            assert!(ch1 % 2 == 0 || a.norm() < 1e-14, "{occ:?}");
        }
    }

    #[test]
    fn transparent_beamsplitter() {
        let v = example1(1.0, &Example1Pulses::Identical).unwrap();
        assert!((v.amplitude_single_label(&[2, 2]).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn example2_closed_form() {
        for ell in 1..=6 {
            for &r in &[0.1, 0.5, 0.8, ell as f64 / (ell as f64 + 1.0)] {
                let res = example2(r, ell).unwrap();
                assert!((res.amplitude.re - res.closed_form).abs() < 1e-12);
                assert!(res.amplitude.im.abs() < 1e-15);
            }
        }
        assert!(example2(2.0 / 3.0, 2).unwrap().amplitude.norm() < 1e-14);
        assert!((example2(0.5, 2).unwrap().closed_form + 0.5f64.sqrt() * 0.5).abs() < 1e-15);
    }

    #[test]
    fn example3_closed_form_and_limits() {
        let (r, t) = (0.6, 0.8);
        let terms = example3(r, t, 1, c(0.7, 0.2), 30).unwrap();
        for term in &terms {
            assert!((term.oracle - term.closed_form).norm() < 1e-12);
        }
        let vac = example3(r, t, 2, c(0.0, 0.0), 0).unwrap();
        assert!((vac[0].oracle.re - t * t).abs() < 1e-15);
        assert!(matches!(example3(r, t, 1, c(3.0, 0.0), 5), Err(Error::Truncation { .. })));
    }

    #[test]
    fn core_tensor_limits() {
        let g = TimeGrid::new(-8.0, 8.0, 801).unwrap();
        let norm = |f: &dyn Fn(f64) -> f64| {
            let v: Vec<f64> = g.times().iter().map(|&t| f(t) * f(t)).collect();
            g.trapz_real(&v).sqrt()
        };
        let f0 = |t: f64| (-t * t / 2.0).exp();
        let f1 = |t: f64| t * (-t * t / 2.0).exp();
        let (n0, n1) = (norm(&f0), norm(&f1));
        let sample = |f: &dyn Fn(f64) -> f64, n: f64| -> Vec<C64> { g.times().iter().map(|&t| c(f(t) / n, 0.0)).collect() };
        let dict = Dictionary::new(g, vec![sample(&f0, n0), sample(&f1, n1)]).unwrap();
        let same = RaggedPulseMatrix::new(g, vec![vec![sample(&f0, n0), sample(&f0, n0)]]).unwrap();
        let core = oracle_core_tensor(&same, &dict, 1e-8).unwrap();
        assert!((core.slice(0) - CMat::from_element(2, 2, c(1.0, 0.0))).norm() < 1e-10);
        let orth = RaggedPulseMatrix::new(g, vec![vec![sample(&f0, n0), sample(&f1, n1)]]).unwrap();
        let core = oracle_core_tensor(&orth, &dict, 1e-8).unwrap();
        assert!((core.slice(0) - CMat::identity(2, 2)).norm() < 1e-10);
        let bad = RaggedPulseMatrix::new(g, vec![vec![g.times().iter().map(|&t| c(t * t * (-t * t).exp(), 0.0)).collect()]]).unwrap();
        assert!(matches!(oracle_core_tensor(&bad, &dict, 1e-8), Err(Error::Dictionary(_))));
    }
}

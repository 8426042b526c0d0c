use crate::config::{Caps, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{eye, max_abs_diff, CMat, C64};
use crate::tensor_alg::{permanent, RaggedPulseMatrix};

use super::gaussian::GaussianPart;
use super::states::PhotonGaussianState;

/// Overlap of every photon factor `(j, k)` with every basis mode `(a, b)`:
/// rows are factors, columns are modes in basis order.
fn overlaps(state: &PhotonGaussianState, basis: &RaggedPulseMatrix, tol: &Tolerances) -> Result<CMat> {
    if !matches!(state.gaussian_part, GaussianPart::Vacuum) || state.eta_plus.max_abs() > tol.zero {
        return Err(Error::Unsupported("Fock projection of an active-system output".into()));
    }
    if basis.m() != state.m() {
        return Err(Error::Dimension(format!(
            "mode basis has {} channels, state has {}",
            basis.m(),
            state.m()
        )));
    }
    basis.grid().check_same(&state.grid)?;
    let mut worst: f64 = 0.0;
    for a in 0..basis.m() {
        let g = basis.gram(a);
        worst = worst.max(max_abs_diff(&g, &eye(g.nrows())));
    }
    if worst > tol.basis {
        return Err(Error::NonOrthonormalBasis(worst));
    }
    let modes: Vec<(usize, usize)> =
        (0..basis.m()).flat_map(|a| (0..basis.ells()[a]).map(move |b| (a, b))).collect();
    let factors = state.eta_minus.columns();
    let grid = state.grid;
    Ok(CMat::from_fn(factors.len(), modes.len(), |f, mu| {
        let (j, k) = factors[f];
        let (a, b) = modes[mu];
        grid.inner(basis.pulse(a, b), state.eta_minus.get(a, j, k))
    }))
}

fn amplitude(c: &CMat, occupation: &[usize], norm: f64, caps: &Caps) -> Result<C64> {
    let cols: Vec<usize> = occupation
        .iter()
        .enumerate()
        .flat_map(|(mu, &n)| std::iter::repeat_n(mu, n))
        .collect();
    let g = CMat::from_fn(c.nrows(), cols.len(), |f, col| c[(f, cols[col])]);
    let fact: f64 = occupation.iter().map(|&n| (1..=n).map(|x| x as f64).product::<f64>()).product();
    Ok(permanent(&g, caps)? / (fact.sqrt() * norm))
}

fn total_norm(state: &PhotonGaussianState) -> f64 {
    state.norms.iter().map(|n| n.sqrt()).product()
}

/// Amplitude of `occupation` (one entry per basis mode, channels in order) in
/// the output state.
pub fn project_onto_fock(
    state: &PhotonGaussianState,
    occupation: &[usize],
    basis: &RaggedPulseMatrix,
    tol: &Tolerances,
    caps: &Caps,
) -> Result<C64> {
    if occupation.len() != basis.total_photons() {
        return Err(Error::Dimension(format!(
            "occupation has {} entries for {} basis modes",
            occupation.len(),
            basis.total_photons()
        )));
    }
    let expected: usize = state.ells().iter().sum();
    let got: usize = occupation.iter().sum();
    if got != expected {
        return Err(Error::PhotonNumberMismatch { got, expected });
    }
    let c = overlaps(state, basis, tol)?;
    amplitude(&c, occupation, total_norm(state), caps)
}

/// Every occupation of the basis with the state's total photon number and its
/// amplitude, occupations in lexicographic order.
pub fn fock_amplitudes(
    state: &PhotonGaussianState,
    basis: &RaggedPulseMatrix,
    tol: &Tolerances,
    caps: &Caps,
) -> Result<Vec<(Vec<usize>, C64)>> {
    let c = overlaps(state, basis, tol)?;
    let total: usize = state.ells().iter().sum();
    let norm = total_norm(state);
    compositions(total, c.ncols())
        .into_iter()
        .map(|occ| amplitude(&c, &occ, norm, caps).map(|a| (occ, a)))
        .collect()
}

/// All `k`-tuples of non-negative integers summing to `n`, lexicographically
/// descending in the first entry.
pub(crate) fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::lin_sys::{build_state_space, PhysicalParams};
    use crate::linalg::c;
    use crate::photon_states::make_factorizable;
    use crate::response::{output_state_factorizable, ResponseOptions};

    fn gauss(t: f64) -> C64 {
        c((-t * t / 4.0).exp() / (2.0 * std::f64::consts::PI).powf(0.25), 0.0)
    }

    fn setup(ells: [usize; 2]) -> (PhotonGaussianState, RaggedPulseMatrix) {
        let grid = TimeGrid::new(-12.0, 12.0, 1201).unwrap();
        let chans: Vec<Vec<fn(f64) -> C64>> = ells.iter().map(|&l| vec![gauss as fn(f64) -> C64; l]).collect();
        let xi = RaggedPulseMatrix::from_fns(grid, &chans).unwrap();
        let opts = ResponseOptions::default();
        let st = make_factorizable(xi, &opts.tol, &opts.caps).unwrap();
        let ss = build_state_space(&PhysicalParams::beamsplitter(0.5), &opts.tol).unwrap();
        let out = output_state_factorizable(&ss, &st, &opts).unwrap();
        let raw = RaggedPulseMatrix::from_fns(grid, &[vec![gauss], vec![gauss]]).unwrap();
        let s = grid.trapz_real(&raw.pulse(0, 0).iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()).sqrt();
        let unit = move |t: f64| gauss(t) / s;
        let basis = RaggedPulseMatrix::from_fns(grid, &[vec![unit], vec![unit]]).unwrap();
        (out, basis)
    }

    #[test]
    fn hong_ou_mandel_dip() {
        let (out, basis) = setup([1, 1]);
        let (tol, caps) = (Tolerances::default(), Caps::default());
        let a = project_onto_fock(&out, &[1, 1], &basis, &tol, &caps).unwrap();
        assert!(a.norm() < 1e-12);
        let p: f64 = fock_amplitudes(&out, &basis, &tol, &caps).unwrap().iter().map(|(_, a)| a.norm_sqr()).sum();
        assert!((p - 1.0).abs() < 1e-9, "{p}");
    }

    #[test]
    fn wrong_photon_number() {
        let (out, basis) = setup([1, 1]);
        let err = project_onto_fock(&out, &[2, 1], &basis, &Tolerances::default(), &Caps::default());
        assert!(matches!(err, Err(Error::PhotonNumberMismatch { got: 3, expected: 2 })));
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let (out, _) = setup([1, 1]);
        let basis = RaggedPulseMatrix::from_fns(out.grid, &[vec![gauss as fn(f64) -> C64], vec![|t: f64| gauss(t) * 2.0]]).unwrap();
        let err = project_onto_fock(&out, &[1, 1], &basis, &Tolerances::default(), &Caps::default());
        assert!(matches!(err, Err(Error::NonOrthonormalBasis(_))));
    }

    #[test]
    fn composition_count() {
        assert_eq!(compositions(4, 2).len(), 5);
        assert_eq!(compositions(2, 3).len(), 6);
        assert_eq!(compositions(0, 2), vec![vec![0, 0]]);
    }
}

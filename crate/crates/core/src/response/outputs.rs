use crate::error::Result;
use crate::lin_sys::{require_stable, StateSpace};
use crate::photon_states::{photon_pairs, CovarianceFunction, FactorizableState};
use crate::tensor_alg::{circledast_diagonal, lift, mode1_product, PulseTensor3};

use super::gaussian::{vacuum_density, vacuum_intensity, vacuum_kernel};
use super::{kernel_for_grid, ResponseOptions};

/// `(eta-, eta+)` of a factorizable input with the kernel sampled on the
/// input grid.
pub(crate) fn eta_tensors(
    ss: &StateSpace,
    state: &FactorizableState,
    opts: &ResponseOptions,
) -> Result<(PulseTensor3, PulseTensor3, f64)> {
    require_stable(ss, &opts.tol)?;
    let grid = *state.pulses.grid();
    let ir = kernel_for_grid(ss, &grid, &opts.tol)?;
    let up = lift(&state.pulses);
    let zero = PulseTensor3::zeros(grid, up.ells());
    let (minus, plus) = mode1_product(&up, &zero, &ir, opts.method)?;
    Ok((minus, plus, ir.tail))
}

/// Steady-state output covariance: `delta(t-r) diag(I,0)`, the finite-rank
/// photon terms carried by `(eta-, eta+)`, and the stationary vacuum term
/// generated by `g+`.
pub fn output_covariance(ss: &StateSpace, state: &FactorizableState, opts: &ResponseOptions) -> Result<CovarianceFunction> {
    let (minus, plus, _) = eta_tensors(ss, state, opts)?;
    let grid = *state.pulses.grid();
    let mut smooth = photon_pairs(&minus, &plus, &state.core, &state.norms, false);
    smooth.extend(photon_pairs(&plus, &minus, &state.core, &state.norms, true));
    let stationary = vacuum_kernel(ss, grid.dt(), grid.len(), &opts.tol)?;
    Ok(CovarianceFunction {
        m: ss.m,
        grid,
        delta_coeff: vacuum_density(ss.m),
        smooth,
        stationary,
    })
}

/// Output intensity per channel,
/// `int g+^# g+^T + diag[(eta+ circledast eta+^#)^T + eta-^# circledast eta-]` at `t = r`.
pub fn output_intensity(ss: &StateSpace, state: &FactorizableState, opts: &ResponseOptions) -> Result<Vec<Vec<f64>>> {
    let (minus, plus, _) = eta_tensors(ss, state, opts)?;
    let vac = vacuum_intensity(ss)?;
    let from_plus = circledast_diagonal(&plus, &plus.conj(), &state.core, &state.norms)?;
    let from_minus = circledast_diagonal(&minus.conj(), &minus, &state.core, &state.norms)?;
    let n = state.pulses.grid().len();
    Ok((0..ss.m)
        .map(|i| {
            (0..n)
                .map(|t| vac[i] + from_plus[t][(i, i)].re + from_minus[t][(i, i)].re)
                .collect()
        })
        .collect())
}

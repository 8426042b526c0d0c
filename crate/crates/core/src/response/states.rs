use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::lin_sys::{is_passive, require_stable, ImpulseResponse, MatrixKernel, StateSpace};
use crate::photon_states::{make_unfactorizable, FactorizableState, UnfactorizableState};
use crate::tensor_alg::{multimode_convolution, multimode_convolution_modes, CoreTensor, PulseTensor3, WavepacketTensor};

use super::gaussian::{spectral_transfer, vacuum_density, GaussianPart};
use super::outputs::eta_tensors;
use super::{kernel_for_grid, ResponseOptions};

/// Output of a factorizable input: photon part `(eta-, eta+)` with the input
/// normalization constants and core tensor, plus the Gaussian part.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonGaussianState {
    pub grid: TimeGrid,
    pub eta_minus: PulseTensor3,
    pub eta_plus: PulseTensor3,
    /// Input normalization constants `N_j`.
    pub norms: Vec<f64>,
    pub core: CoreTensor,
    pub gaussian_part: GaussianPart,
    /// `|exp(A T)|` at the end of the lag window the kernel was sampled on.
    pub tail: f64,
}

impl PhotonGaussianState {
    pub fn m(&self) -> usize {
        self.eta_minus.m()
    }

    pub fn ells(&self) -> &[usize] {
        self.eta_minus.ells()
    }

    /// `perm` of the output Gram matrices `<eta-_{:jb}, eta-_{:ja}>`; equal to the
    /// input norms for all-pass systems.
    pub fn recomputed_norms(&self, caps: &crate::config::Caps) -> Result<Vec<f64>> {
        (0..self.m())
            .map(|j| crate::tensor_alg::permanent(&self.eta_minus.gram(j), caps).map(|p| p.re))
            .collect()
    }
}

/// One sign pattern of an active-path output channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternTensor {
    /// `f_i = +1` selects `g-` on mode `i`, `f_i = -1` selects `conj(g+)`.
    pub pattern: Vec<i8>,
    /// `(-1)^(number of f_i = +1)`.
    pub sign: i8,
    pub tensor: WavepacketTensor,
}

/// Output of an unfactorizable input through an active system.  The pattern
/// tensors are stored without their signs; multiplying every pattern by
/// `sign` fixes the convention of the creation-operator expansion, and the
/// overall phase `(-1)^l` common to all patterns of a channel is left out.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralPhotonGaussianState {
    pub grid: TimeGrid,
    /// Per channel, every pattern in `{+1, -1}^l` with `+1` varying slowest.
    pub channels: Vec<Vec<PatternTensor>>,
    /// Input normalization constants.
    pub norms: Vec<f64>,
    pub gaussian_part: GaussianPart,
    pub tail: f64,
}

impl GeneralPhotonGaussianState {
    pub fn pattern(&self, channel: usize, f: &[i8]) -> Option<&PatternTensor> {
        self.channels.get(channel)?.iter().find(|p| p.pattern == f)
    }
}

fn gaussian_part(ss: &StateSpace, grid: &TimeGrid, opts: &ResponseOptions) -> Result<GaussianPart> {
    if is_passive(&ss.params, &opts.tol) {
        return Ok(GaussianPart::Vacuum);
    }
    let omegas = opts.frequencies(grid);
    let r_in = vec![vacuum_density(ss.m); omegas.len()];
    let density = spectral_transfer(ss, &omegas, &r_in, &opts.tol)?;
    Ok(GaussianPart::Spectral { omegas, density })
}

pub fn output_state_factorizable(
    ss: &StateSpace,
    state: &FactorizableState,
    opts: &ResponseOptions,
) -> Result<PhotonGaussianState> {
    let (eta_minus, eta_plus, tail) = eta_tensors(ss, state, opts)?;
    let grid = *state.pulses.grid();
    Ok(PhotonGaussianState {
        grid,
        eta_minus,
        eta_plus,
        norms: state.norms.clone(),
        core: state.core.clone(),
        gaussian_part: gaussian_part(ss, &grid, opts)?,
        tail,
    })
}

fn channel_grid(state: &UnfactorizableState) -> TimeGrid {
    *state.channels[0].grid()
}

/// Passive path: every mode of every channel tensor is convolved with `g-`.
/// Norms of the result are recomputed.
pub fn output_state_passive_unfactorizable(
    ss: &StateSpace,
    state: &UnfactorizableState,
    opts: &ResponseOptions,
) -> Result<UnfactorizableState> {
    require_stable(ss, &opts.tol)?;
    if !is_passive(&ss.params, &opts.tol) {
        return Err(Error::NotPassive);
    }
    check_m(ss, state)?;
    let ir = kernel_for_grid(ss, &channel_grid(state), &opts.tol)?;
    let channels = state
        .channels
        .par_iter()
        .map(|psi| multimode_convolution(psi, &ir.minus, opts.method))
        .collect::<Result<Vec<_>>>()?;
    make_unfactorizable(channels, &opts.tol)
}

fn check_m(ss: &StateSpace, state: &UnfactorizableState) -> Result<()> {
    if state.m() != ss.m {
        return Err(Error::Dimension(format!(
            "state has {} channels, system has m = {}",
            state.m(),
            ss.m
        )));
    }
    Ok(())
}

/// All patterns in `{+1, -1}^l`, `+1` first.
pub(crate) fn sign_patterns(l: usize) -> Vec<Vec<i8>> {
    (0..1usize << l)
        .map(|bits| (0..l).map(|i| if bits >> (l - 1 - i) & 1 == 0 { 1 } else { -1 }).collect())
        .collect()
}

fn pattern_sign(f: &[i8]) -> i8 {
    if f.iter().filter(|&&x| x == 1).count() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Active path: for every channel and sign pattern `f`, mode `i` of the input
/// tensor is convolved with `g-` when `f_i = +1` and with `conj(g+)` when
/// `f_i = -1`.
pub fn output_state_active_unfactorizable(
    ss: &StateSpace,
    state: &UnfactorizableState,
    opts: &ResponseOptions,
) -> Result<GeneralPhotonGaussianState> {
    require_stable(ss, &opts.tol)?;
    check_m(ss, state)?;
    for psi in &state.channels {
        let total = (1usize << psi.order().min(63)).saturating_mul(psi.values().len());
        if psi.order() >= 63 || total > opts.caps.pattern_entries {
            return Err(Error::CapExceeded(format!(
                "channel {}: {} sign patterns of {} samples exceed the cap of {}",
                psi.channel(),
                1u128 << psi.order().min(127),
                psi.values().len(),
                opts.caps.pattern_entries
            )));
        }
    }
    let grid = channel_grid(state);
    let ir = kernel_for_grid(ss, &grid, &opts.tol)?;
    let plus_conj = ir.plus.conj();
    let channels = state
        .channels
        .iter()
        .map(|psi| active_channel(psi, &ir, &plus_conj, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneralPhotonGaussianState {
        grid,
        channels,
        norms: state.norms.clone(),
        gaussian_part: gaussian_part(ss, &grid, opts)?,
        tail: ir.tail,
    })
}

fn active_channel(
    psi: &WavepacketTensor,
    ir: &ImpulseResponse,
    plus_conj: &MatrixKernel,
    opts: &ResponseOptions,
) -> Result<Vec<PatternTensor>> {
    sign_patterns(psi.order())
        .into_par_iter()
        .map(|pattern| {
            let kernels: Vec<&MatrixKernel> = pattern
                .iter()
                .map(|&f| if f == 1 { &ir.minus } else { plus_conj })
                .collect();
            let tensor = multimode_convolution_modes(psi, &kernels, opts.method)?;
            Ok(PatternTensor {
                sign: pattern_sign(&pattern),
                pattern,
                tensor,
            })
        })
        .collect()
}

/// Gaussian part of the output for a given Gaussian input.  Only the vacuum
/// input is supported.
pub fn output_gaussian_part(
    ss: &StateSpace,
    input: &GaussianPart,
    grid: &TimeGrid,
    opts: &ResponseOptions,
) -> Result<GaussianPart> {
    match input {
        GaussianPart::Vacuum => gaussian_part(ss, grid, opts),
        GaussianPart::Spectral { .. } => Err(Error::Unsupported(
            "output states for non-vacuum Gaussian inputs".into(),
        )),
    }
}

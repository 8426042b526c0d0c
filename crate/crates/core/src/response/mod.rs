//! Steady-state outputs: Gaussian spectral transfer, output covariance and
//! intensity, and output states for factorizable/unfactorizable inputs through
//! passive/active systems.

mod fock;
mod gaussian;
mod outputs;
pub mod records;
mod states;

pub use fock::{fock_amplitudes, project_onto_fock};
pub use gaussian::{
    default_frequencies, spectral_transfer, vacuum_density, vacuum_intensity, vacuum_kernel, GaussianPart,
};
pub use outputs::{output_covariance, output_intensity};
pub use states::{
    output_state_active_unfactorizable, output_state_factorizable, output_state_passive_unfactorizable,
    output_gaussian_part, GeneralPhotonGaussianState, PatternTensor, PhotonGaussianState,
};

use crate::config::{Caps, Tolerances};
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::lin_sys::{impulse_response_window, ImpulseResponse, StateSpace};
use crate::tensor_alg::ConvMethod;

/// Shared knobs for the response computations.
#[derive(Debug, Clone, Default)]
pub struct ResponseOptions {
    pub tol: Tolerances,
    pub caps: Caps,
    pub method: ConvMethod,
    /// Frequencies for Gaussian parts; defaults to the Nyquist band of the grid.
    pub omegas: Option<Vec<f64>>,
}

impl ResponseOptions {
    pub fn frequencies(&self, grid: &TimeGrid) -> Vec<f64> {
        self.omegas.clone().unwrap_or_else(|| default_frequencies(grid))
    }
}

/// Impulse response on the lag grid matching a signal grid.  Every lag a
/// convolution on that grid can reach is sampled, so no truncation check is
/// needed; the tail is kept as a diagnostic.
pub fn kernel_for_grid(ss: &StateSpace, grid: &TimeGrid, tol: &Tolerances) -> Result<ImpulseResponse> {
    let lags = TimeGrid::lags(grid.dt(), grid.len())?;
    impulse_response_window(ss, &lags, tol)
}

//! Doubled-up linear quantum stochastic systems: construction from `(S, L, H)`
//! parameters, stability and passivity predicates, impulse and frequency
//! responses, and the anti-causal stable inverse.

mod kernel;
mod params;
mod state_space;

pub use kernel::{
    impulse_response, impulse_response_window, inverse_residual, stable_inverse,
    ImpulseResponse, InverseResidual, MatrixKernel, Support, TwoSidedKernel,
};
pub use params::PhysicalParams;
pub use state_space::{build_state_space, frequency_response, is_passive, is_stable, StateSpace};
pub(crate) use state_space::require_stable;

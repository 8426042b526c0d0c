//! Steady-state response of quantum linear systems driven by continuous-mode
//! multi-photon fields.
//!
//! The crate is organised bottom-up:
//!
//! * [`lin_sys`] builds doubled-up state-space models from physical
//!   parameters and samples their impulse responses.
//! * [`tensor_alg`] holds the ragged pulse tensors, the core-tensor pairing,
//!   the mode products and the permanent kernel.
//! * [`photon_states`] describes factorizable and unfactorizable input states.
//! * [`response`] computes output covariances, intensities and output states.
//! * [`fock_oracle`] is an exact ladder-operator evaluator for static devices,
//!   used as ground truth for the interference examples.

pub mod config;
pub mod error;
pub mod fock_oracle;
pub mod grid;
pub mod io;
pub mod json;
pub mod lin_sys;
pub mod linalg;
pub mod photon_states;
pub mod response;
pub mod tensor_alg;

pub use config::{Caps, Tolerances};
pub use error::{Error, Result};
pub use grid::TimeGrid;
pub use linalg::{CMat, C64};

pub use lin_sys::{
    build_state_space, frequency_response, impulse_response, impulse_response_window,
    is_passive, is_stable, stable_inverse, ImpulseResponse, MatrixKernel, PhysicalParams,
    StateSpace, Support,
};
pub use photon_states::{
    input_covariance, input_intensity, lemma_nl_check, make_factorizable, make_unfactorizable,
    CovarianceFunction, FactorizableState, UnfactorizableState,
};
pub use response::{
    output_covariance, output_intensity, output_state_active_unfactorizable,
    output_state_factorizable, output_state_passive_unfactorizable, project_onto_fock,
    spectral_transfer, GaussianPart, GeneralPhotonGaussianState, PhotonGaussianState,
    ResponseOptions,
};
pub use tensor_alg::{
    circledast, lift, mode1_product, multimode_convolution, permanent, ConvMethod, CoreTensor,
    PulseTensor3, RaggedPulseMatrix, WavepacketTensor,
};

//! Multi-photon input states: factorizable pulse products and general
//! (unfactorizable) channel wave functions, with their normalizations,
//! covariance functions and intensities.

mod covariance;
mod factorizable;
pub mod spec;
mod unfactorizable;

pub use covariance::{CovarianceFunction, FactorPair, StationaryKernel};
pub use factorizable::{input_covariance, input_intensity, lemma_nl_check, make_factorizable, FactorizableState};
pub use unfactorizable::{make_unfactorizable, permutations, UnfactorizableState};
pub(crate) use factorizable::photon_pairs;

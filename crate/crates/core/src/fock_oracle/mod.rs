//! Exact Fock-space evaluation of static-device outputs in a finite
//! orthonormal mode dictionary.  Independent of the permanent-based paths and
//! used as their ground truth.

mod examples;
mod fock;

pub use examples::{example1, example2, example3, oracle_core_tensor, Example1Pulses, Example2Result, Example3Term};
pub use fock::{apply_creation_polynomial, Dictionary, Factor, FockVector, ModeSymbol};

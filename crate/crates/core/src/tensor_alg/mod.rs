//! Ragged pulse tensors and the operations that act on them: the lift, the
//! core-tensor pairing, the block-wise mode-1 product, multimode convolution
//! and the permanent.

mod conv;
mod core_tensor;
mod permanent;
mod ragged;
mod wavepacket;

pub use conv::{convolve, mode1_product, ConvMethod, PreparedKernel};
pub use core_tensor::{circledast, circledast_diagonal, CoreTensor};
pub use permanent::{permanent, permanent_unchecked};
pub use ragged::{lift, PulseTensor3, RaggedPulseMatrix};
pub use wavepacket::{multimode_convolution, multimode_convolution_modes, WavepacketTensor};

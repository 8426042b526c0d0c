//! Numerical tolerances and resource caps shared by every module.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Bound on `|S S^dag - I|` for a scattering matrix (and on unitarity checks of
    /// passive frequency responses).
    pub unitary: f64,
    /// Entries below this magnitude count as zero (passivity test).
    pub zero: f64,
    /// `A` is Hurwitz when every eigenvalue has real part below `-hurwitz`.
    pub hurwitz: f64,
    /// Largest admissible `|exp(A T)|` at the end of an impulse-response grid.
    pub decay: f64,
    /// Convolution-inverse residual target at the default grid.
    pub conv: f64,
    /// Hermiticity of core-tensor slices.
    pub herm: f64,
    /// Smallest admissible normalization constant.
    pub norm: f64,
    /// Deviation of a mode basis Gram matrix from the identity.
    pub basis: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unitary: 1e-10,
            zero: 1e-12,
            hurwitz: 1e-10,
            decay: 1e-8,
            conv: 1e-6,
            herm: 1e-10,
            norm: 1e-12,
            basis: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    /// Largest matrix handed to the permanent routine.
    pub permanent_order: usize,
    /// Largest total number of complex samples in one wavepacket tensor.
    pub wavepacket_entries: usize,
    /// Largest total number of samples over all sign-pattern tensors of one
    /// channel on the active path.
    pub pattern_entries: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            permanent_order: 12,
            wavepacket_entries: 1 << 25,
            pattern_entries: 1 << 26,
        }
    }
}

impl Caps {
    /// Order/grid combinations admitted for wavepacket tensors: up to three photons
    /// on grids of at most 256 points, or up to two photons on at most 1024 points.
    pub fn wavepacket_shape_allowed(&self, order: usize, n_points: usize) -> bool {
        order == 0 || (order <= 2 && n_points <= 1024) || (order <= 3 && n_points <= 256)
    }
}

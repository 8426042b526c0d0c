//! JSON summaries of output states.  Sampled tensors travel as separate CSV or
//! binary payloads named in the record.

use serde::Serialize;

use crate::config::Caps;
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::json::{matrix_to_json, JsonMatrix};
use crate::photon_states::UnfactorizableState;

use super::gaussian::GaussianPart;
use super::states::{GeneralPhotonGaussianState, PhotonGaussianState};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct FactorizableOutputRecord {
    pub schema_version: u32,
    pub kind: &'static str,
    pub grid: TimeGrid,
    pub m: usize,
    pub ells: Vec<usize>,
    pub input_norms: Vec<f64>,
    pub recomputed_norms: Vec<f64>,
    pub core: Vec<JsonMatrix>,
    pub eta_plus_max_abs: f64,
    pub kernel_tail: f64,
    pub gaussian_part: GaussianPart,
    pub payloads: Vec<String>,
}

impl FactorizableOutputRecord {
    pub fn new(state: &PhotonGaussianState, caps: &Caps, payloads: Vec<String>) -> Result<Self> {
        Ok(FactorizableOutputRecord {
            schema_version: SCHEMA_VERSION,
            kind: "factorizable",
            grid: state.grid,
            m: state.m(),
            ells: state.ells().to_vec(),
            input_norms: state.norms.clone(),
            recomputed_norms: state.recomputed_norms(caps)?,
            core: state.core.slices.iter().map(matrix_to_json).collect(),
            eta_plus_max_abs: state.eta_plus.max_abs(),
            kernel_tail: state.tail,
            gaussian_part: state.gaussian_part.clone(),
            payloads,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UnfactorizableOutputRecord {
    pub schema_version: u32,
    pub kind: &'static str,
    pub grid: TimeGrid,
    pub m: usize,
    pub ells: Vec<usize>,
    pub input_norms: Vec<f64>,
    pub output_norms: Vec<f64>,
    pub gaussian_part: GaussianPart,
    pub payloads: Vec<String>,
}

impl UnfactorizableOutputRecord {
    pub fn new(input: &UnfactorizableState, output: &UnfactorizableState, payloads: Vec<String>) -> Self {
        UnfactorizableOutputRecord {
            schema_version: SCHEMA_VERSION,
            kind: "unfactorizable_passive",
            grid: *output.channels[0].grid(),
            m: output.m(),
            ells: output.ells(),
            input_norms: input.norms.clone(),
            output_norms: output.norms.clone(),
            gaussian_part: GaussianPart::Vacuum,
            payloads,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternRecord {
    pub channel: usize,
    pub pattern: Vec<i8>,
    pub sign: i8,
    pub norm_sqr: f64,
    pub payload: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ActiveOutputRecord {
    pub schema_version: u32,
    pub kind: &'static str,
    pub grid: TimeGrid,
    pub input_norms: Vec<f64>,
    pub kernel_tail: f64,
    pub patterns: Vec<PatternRecord>,
    pub gaussian_part: GaussianPart,
}

impl ActiveOutputRecord {
    /// `payload(channel, pattern)` names the file the caller writes the tensor to.
    pub fn new<F>(state: &GeneralPhotonGaussianState, payload: F) -> Self
    where
        F: Fn(usize, &[i8]) -> String,
    {
        let patterns = state
            .channels
            .iter()
            .enumerate()
            .flat_map(|(j, ps)| {
                ps.iter().map(move |p| (j, p))
            })
            .map(|(j, p)| PatternRecord {
                channel: j,
                pattern: p.pattern.clone(),
                sign: p.sign,
                norm_sqr: p.tensor.norm_sqr(),
                payload: payload(j, &p.pattern),
            })
            .collect();
        ActiveOutputRecord {
            schema_version: SCHEMA_VERSION,
            kind: "unfactorizable_active",
            grid: state.grid,
            input_norms: state.norms.clone(),
            kernel_tail: state.tail,
            patterns,
            gaussian_part: state.gaussian_part.clone(),
        }
    }
}

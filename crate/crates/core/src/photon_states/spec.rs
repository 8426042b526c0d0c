//! JSON description of input states: analytic pulse presets or sampled files.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Caps, Tolerances};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::io;
use crate::linalg::{c, C64};
use crate::tensor_alg::{RaggedPulseMatrix, WavepacketTensor};

use super::{make_factorizable, make_unfactorizable, FactorizableState, UnfactorizableState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseSpec {
    /// Normalized amplitude whose intensity `|xi|^2` is a normal density with
    /// mean `center` and standard deviation `width`.
    Gaussian {
        center: f64,
        width: f64,
        #[serde(default)]
        frequency: f64,
    },
    /// `sqrt(rate) exp(-rate (t - start) / 2)` for `t >= start`.
    ExpDecay {
        rate: f64,
        #[serde(default)]
        start: f64,
    },
    /// CSV file with columns `t, re, im` on the run grid.
    Csv { path: String },
}

impl PulseSpec {
    pub fn eval(&self, t: f64) -> C64 {
        match *self {
            PulseSpec::Gaussian {
                center,
                width,
                frequency,
            } => {
                let amp = (2.0 * PI * width * width).powf(-0.25) * (-(t - center).powi(2) / (4.0 * width * width)).exp();
                C64::from_polar(amp, -frequency * t)
            }
            PulseSpec::ExpDecay { rate, start } => {
                if t < start {
                    c(0.0, 0.0)
                } else {
                    c(rate.sqrt() * (-rate * (t - start) / 2.0).exp(), 0.0)
                }
            }
            PulseSpec::Csv { .. } => unreachable!("sampled pulses have no closed form"),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PulseSpec::Gaussian { width, .. } if !(width > 0.0) => {
                Err(Error::invalid("width", "gaussian width must be positive"))
            }
            PulseSpec::ExpDecay { rate, .. } if !(rate > 0.0) => {
                Err(Error::invalid("rate", "decay rate must be positive"))
            }
            _ => Ok(()),
        }
    }

    pub fn sample(&self, grid: &TimeGrid, base: &Path) -> Result<Vec<C64>> {
        self.validate()?;
        match self {
            PulseSpec::Csv { path } => io::read_pulse_csv(&base.join(path), grid),
            _ => Ok(grid.sample(|t| self.eval(t))),
        }
    }
}

/// One channel of an unfactorizable state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum WaveSpec {
    /// No photons in this channel.
    Vacuum,
    /// Bivariate normal density with means `center`, deviations `sigma` and
    /// correlation `rho`.
    Gaussian2d {
        center: [f64; 2],
        sigma: [f64; 2],
        rho: f64,
    },
    /// `prod_k xi_k(t_k)`.
    Product { pulses: Vec<PulseSpec> },
    /// Binary wave packet file written by [`crate::io::write_wavepacket`].
    Binary { path: String },
}

/// Two-photon Gaussian amplitude `N(t; center, Sigma)` with
/// `Sigma = [[s1^2, rho s1 s2], [rho s1 s2, s2^2]]`.
pub fn gaussian2d(t1: f64, t2: f64, center: [f64; 2], sigma: [f64; 2], rho: f64) -> f64 {
    let (x, y) = ((t1 - center[0]) / sigma[0], (t2 - center[1]) / sigma[1]);
    let q = (x * x - 2.0 * rho * x * y + y * y) / (1.0 - rho * rho);
    (-0.5 * q).exp() / (2.0 * PI * sigma[0] * sigma[1] * (1.0 - rho * rho).sqrt())
}

impl WaveSpec {
    pub fn order(&self) -> Option<usize> {
        match self {
            WaveSpec::Vacuum => Some(0),
            WaveSpec::Gaussian2d { .. } => Some(2),
            WaveSpec::Product { pulses } => Some(pulses.len()),
            WaveSpec::Binary { .. } => None,
        }
    }

    pub fn build(&self, j: usize, m: usize, grid: &TimeGrid, base: &Path, caps: &Caps) -> Result<WavepacketTensor> {
        match self {
            WaveSpec::Vacuum => WavepacketTensor::from_diagonal(j, m, *grid, 0, vec![c(1.0, 0.0)], caps),
            &WaveSpec::Gaussian2d { center, sigma, rho } => {
                if !(sigma[0] > 0.0 && sigma[1] > 0.0) {
                    return Err(Error::invalid("sigma", "deviations must be positive"));
                }
                if !(rho.abs() < 1.0) {
                    return Err(Error::invalid("rho", "correlation must lie in (-1, 1)"));
                }
                WavepacketTensor::sample_diagonal(j, m, *grid, 2, |t| c(gaussian2d(t[0], t[1], center, sigma, rho), 0.0), caps)
            }
            WaveSpec::Product { pulses } => {
                let sampled: Vec<Vec<C64>> = pulses.iter().map(|p| p.sample(grid, base)).collect::<Result<_>>()?;
                WavepacketTensor::tabulate_diagonal(
                    j,
                    m,
                    *grid,
                    sampled.len(),
                    |is| sampled.iter().zip(is).map(|(s, &i)| s[i]).product(),
                    caps,
                )
            }
            WaveSpec::Binary { path } => {
                let w = io::read_wavepacket(&base.join(path), caps)?;
                if w.channel() != j || w.m() != m {
                    return Err(Error::Dimension(format!(
                        "{}: wave packet is for channel {} of {}, expected channel {} of {}",
                        path,
                        w.channel(),
                        w.m(),
                        j,
                        m
                    )));
                }
                w.grid().check_same(grid)?;
                Ok(w)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Factorizable { channels: Vec<Vec<PulseSpec>> },
    Unfactorizable { channels: Vec<WaveSpec> },
}

#[derive(Debug, Clone)]
pub enum BuiltState {
    Factorizable(FactorizableState),
    Unfactorizable(UnfactorizableState),
}

impl StateSpec {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn m(&self) -> usize {
        match self {
            StateSpec::Factorizable { channels } => channels.len(),
            StateSpec::Unfactorizable { channels } => channels.len(),
        }
    }

    pub fn pulses(&self, grid: &TimeGrid, base: &Path) -> Result<RaggedPulseMatrix> {
        match self {
            StateSpec::Factorizable { channels } => {
                let sampled = channels
                    .iter()
                    .map(|ch| ch.iter().map(|p| p.sample(grid, base)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                RaggedPulseMatrix::new(*grid, sampled)
            }
            StateSpec::Unfactorizable { .. } => Err(Error::Unsupported(
                "an unfactorizable state has no pulse matrix".into(),
            )),
        }
    }

    pub fn build(&self, grid: &TimeGrid, base: &Path, tol: &Tolerances, caps: &Caps) -> Result<BuiltState> {
        match self {
            StateSpec::Factorizable { .. } => Ok(BuiltState::Factorizable(make_factorizable(
                self.pulses(grid, base)?,
                tol,
                caps,
            )?)),
            StateSpec::Unfactorizable { channels } => {
                let m = channels.len();
                let tensors = channels
                    .iter()
                    .enumerate()
                    .map(|(j, w)| w.build(j, m, grid, base, caps))
                    .collect::<Result<Vec<_>>>()?;
                Ok(BuiltState::Unfactorizable(make_unfactorizable(tensors, tol)?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_factorizable_spec() {
        let text = r#"{"type":"factorizable","channels":[[{"shape":"gaussian","center":0,"width":1}],
                       [{"shape":"exp_decay","rate":2.0}]]}"#;
        let spec = StateSpec::from_json_str(text).unwrap();
        let grid = TimeGrid::new(-8.0, 12.0, 2001).unwrap();
        let xi = spec.pulses(&grid, Path::new(".")).unwrap();
        assert_eq!(xi.ells(), &[1, 1]);
        assert!((xi.gram(0)[(0, 0)].re - 1.0).abs() < 1e-12);
        // the jump at t = 0 costs half a sample: dt * rate / 2
        assert!((xi.gram(1)[(0, 0)].re - 1.0 - 0.01).abs() < 1e-4);
    }

    #[test]
    fn unknown_shape_is_a_parse_error() {
        let text = r#"{"type":"factorizable","channels":[[{"shape":"lorentz"}]]}"#;
        assert!(StateSpec::from_json_str(text).is_err());
    }

    #[test]
    fn gaussian2d_reduces_to_product() {
        let one = |t: f64, m: f64| (-(t - m).powi(2) / 2.0).exp() / (2.0 * PI).sqrt();
        let v = gaussian2d(0.3, 1.7, [1.0, 1.0], [1.0, 1.0], 0.0);
        assert!((v - one(0.3, 1.0) * one(1.7, 1.0)).abs() < 1e-15);
    }
}

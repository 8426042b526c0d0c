//! Run configuration: a JSON document naming the system, the input state, the
//! grid and any tolerance or cap overrides.  `system` and `state` may be given
//! inline or as paths relative to the config file.

use std::fs;
use std::path::{Path, PathBuf};

use photonflow_core::photon_states::spec::{PulseSpec, StateSpec};
use photonflow_core::{Caps, ConvMethod, PhysicalParams, StateSpace, TimeGrid, Tolerances};
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const DEFAULT_POINTS: usize = 1024;
const STATIC_HORIZON: f64 = 20.0;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Source {
    Path(String),
    Inline(Value),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencySpec {
    /// Band `[-max, max]`.
    pub max: f64,
    pub n_points: usize,
}

impl FrequencySpec {
    pub fn omegas(&self) -> Vec<f64> {
        let n = self.n_points;
        (0..n)
            .map(|k| -self.max + 2.0 * self.max * k as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    system: Option<Source>,
    state: Option<Source>,
    grid: Option<TimeGrid>,
    frequencies: Option<FrequencySpec>,
    #[serde(default)]
    method: ConvMethod,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    caps: Caps,
    fock_basis: Option<Vec<Vec<PulseSpec>>>,
    /// Second time argument `r` of the exported covariance slice `R(t, r)`.
    reference_time: Option<f64>,
}

/// Hash of one input file.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub system: Option<PhysicalParams>,
    pub state: Option<StateSpec>,
    /// Directory that relative paths inside the state spec resolve against.
    pub state_base: PathBuf,
    pub config_base: PathBuf,
    pub grid: Option<TimeGrid>,
    pub frequencies: Option<FrequencySpec>,
    pub method: ConvMethod,
    pub tol: Tolerances,
    pub caps: Caps,
    pub fock_basis: Option<Vec<Vec<PulseSpec>>>,
    pub reference_time: Option<f64>,
    /// Config with inline copies of every referenced JSON document.
    pub echo: Value,
    pub inputs: Vec<InputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read_input(path: &Path, inputs: &mut Vec<InputDigest>) -> CliResult<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    inputs.push(InputDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    });
    Ok(bytes)
}

fn parse_json(path: &Path, bytes: &[u8]) -> CliResult<Value> {
    serde_json::from_slice(bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Collect every `"path"` string below `v`, in document order.
fn data_paths(v: &Value, out: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match (k.as_str(), x) {
                    ("path", Value::String(s)) => out.push(s.clone()),
                    _ => data_paths(x, out),
                }
            }
        }
        Value::Array(xs) => xs.iter().for_each(|x| data_paths(x, out)),
        _ => {}
    }
}

impl RunConfig {
    /// Empty config, used when no `--config` is given.
    pub fn empty() -> Self {
        RunConfig {
            system: None,
            state: None,
            state_base: PathBuf::from("."),
            config_base: PathBuf::from("."),
            grid: None,
            frequencies: None,
            method: ConvMethod::default(),
            tol: Tolerances::default(),
            caps: Caps::default(),
            fock_basis: None,
            reference_time: None,
            echo: Value::Object(Default::default()),
            inputs: Vec::new(),
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let mut inputs = Vec::new();
        let bytes = read_input(path, &mut inputs)?;
        let mut echo = parse_json(path, &bytes)?;
        let raw: RawConfig =
            serde_json::from_value(echo.clone()).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();

        let mut resolve = |key: &str, src: &Option<Source>| -> CliResult<Option<(Value, PathBuf)>> {
            Ok(match src {
                None => None,
                Some(Source::Inline(v)) => Some((v.clone(), base.clone())),
                Some(Source::Path(p)) => {
                    let file = base.join(p);
                    let bytes = read_input(&file, &mut inputs)?;
                    let v = parse_json(&file, &bytes)?;
                    echo[key] = v.clone();
                    Some((v, file.parent().map(Path::to_path_buf).unwrap_or_default()))
                }
            })
        };
        let system_json = resolve("system", &raw.system)?;
        let state_json = resolve("state", &raw.state)?;

        let system = system_json
            .map(|(v, _)| PhysicalParams::from_json_value(v).map_err(|e| CliError::Config(format!("system: {e}"))))
            .transpose()?;
        let (state, state_base) = match state_json {
            None => (None, base.clone()),
            Some((v, dir)) => {
                let mut paths = Vec::new();
                data_paths(&v, &mut paths);
                for p in paths {
                    read_input(&dir.join(&p), &mut inputs)?;
                }
                let spec: StateSpec = serde_json::from_value(v).map_err(|e| CliError::Config(format!("state: {e}")))?;
                (Some(spec), dir)
            }
        };
        if let Some(basis) = &raw.fock_basis {
            for p in basis.iter().flatten() {
                if let PulseSpec::Csv { path } = p {
                    read_input(&base.join(path), &mut inputs)?;
                }
            }
        }

        let cfg = RunConfig {
            system,
            state,
            state_base,
            config_base: base,
            grid: raw.grid,
            frequencies: raw.frequencies,
            method: raw.method,
            tol: raw.tolerances,
            caps: raw.caps,
            fock_basis: raw.fock_basis,
            reference_time: raw.reference_time,
            echo,
            inputs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> CliResult<()> {
        if let Some(g) = &self.grid {
            g.validate().map_err(|e| CliError::Config(format!("grid: {e}")))?;
        }
        if let Some(f) = &self.frequencies {
            if !(f.max > 0.0 && f.max.is_finite()) || f.n_points < 2 {
                return Err(CliError::Config(
                    "frequencies: need max > 0 and n_points >= 2".into(),
                ));
            }
        }
        if let Some(p) = &self.system {
            p.validate(&self.tol).map_err(|e| CliError::Config(format!("system: {e}")))?;
        }
        if let (Some(p), Some(s)) = (&self.system, &self.state) {
            if s.m() != p.m {
                return Err(CliError::Config(format!(
                    "state has {} channels, system has m = {}",
                    s.m(),
                    p.m
                )));
            }
        }
        Ok(())
    }

    pub fn require_system(&self) -> CliResult<&PhysicalParams> {
        self.system
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a \"system\" entry in --config".into()))
    }

    pub fn require_state(&self) -> CliResult<&StateSpec> {
        self.state
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs a \"state\" entry in --config".into()))
    }

    /// Config grid, or `[0, horizon]` with the default point count, with
    /// command-line overrides applied last.
    pub fn grid(&self, ss: Option<&StateSpace>, overrides: &GridOverrides) -> CliResult<TimeGrid> {
        let mut g = match self.grid {
            Some(g) => g,
            None => {
                let horizon = match ss {
                    Some(ss) => ss.suggested_horizon()?.unwrap_or(STATIC_HORIZON),
                    None => STATIC_HORIZON,
                };
                TimeGrid {
                    t_min: 0.0,
                    t_max: horizon,
                    n_points: DEFAULT_POINTS,
                }
            }
        };
        overrides.apply(&mut g)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GridOverrides {
    pub n_points: Option<usize>,
    pub t_max: Option<f64>,
}

impl GridOverrides {
    pub fn apply(&self, g: &mut TimeGrid) -> CliResult<TimeGrid> {
        if let Some(n) = self.n_points {
            g.n_points = n;
        }
        if let Some(t) = self.t_max {
            g.t_max = t;
        }
        g.validate().map_err(|e| CliError::Config(format!("grid: {e}")))?;
        Ok(*g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collects_nested_paths() {
        let v: Value = serde_json::json!({
            "channels": [[{"shape": "csv", "path": "a.csv"}], [{"shape": "gaussian", "center": 0, "width": 1}]],
            "extra": {"path": "b.bin"}
        });
        let mut out = Vec::new();
        data_paths(&v, &mut out);
        assert_eq!(out, ["a.csv", "b.bin"]);
    }

    #[test]
    fn frequency_band_is_symmetric() {
        let w = FrequencySpec { max: 2.0, n_points: 5 }.omegas();
        assert_eq!(w, [-2.0, -1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}

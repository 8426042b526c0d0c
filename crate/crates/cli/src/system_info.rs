use photonflow_core::json::{matrix_to_json, JsonComplex};
use photonflow_core::{build_state_space, impulse_response_window, is_passive, is_stable, TimeGrid};
use serde_json::{json, Value};

use crate::error::{CliResult, Context};
use crate::run_config::{GridOverrides, RunConfig, DEFAULT_POINTS};

/// Matrices, spectrum, stability/passivity flags and the impulse-response
/// tail on the suggested horizon.
pub fn report(cfg: &RunConfig, overrides: &GridOverrides) -> CliResult<Value> {
    let p = cfg.require_system()?;
    let ss = build_state_space(p, &cfg.tol).context("system")?;
    let mut ev = ss.eigenvalues().context("eigenvalues of A")?;
    ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let stable = is_stable(&ss, &cfg.tol).context("eigenvalues of A")?;
    let horizon = ss.suggested_horizon().context("eigenvalues of A")?;

    let kernel = match (stable, horizon) {
        (true, Some(h)) => {
            let mut g = TimeGrid {
                t_min: 0.0,
                t_max: h,
                n_points: DEFAULT_POINTS,
            };
            let g = overrides.apply(&mut g)?;
            let lags = TimeGrid::lags(g.dt(), g.len()).context("kernel grid")?;
            let ir = impulse_response_window(&ss, &lags, &cfg.tol).context("impulse response")?;
            json!({
                "grid": lags,
                "tail": ir.tail,
                "tail_within_tolerance": ir.tail <= cfg.tol.decay,
                "delta_part": matrix_to_json(&ir.delta_part()),
            })
        }
        _ => Value::Null,
    };

    Ok(json!({
        "m": ss.m,
        "n": ss.n,
        "static": ss.is_static(),
        "stable": stable,
        "passive": is_passive(p, &cfg.tol),
        "spectral_abscissa": ss.spectral_abscissa().context("eigenvalues of A")?,
        "eigenvalues": ev.iter().map(|&z| JsonComplex::from(z)).collect::<Vec<_>>(),
        "suggested_horizon": horizon,
        "matrices": {
            "A": matrix_to_json(&ss.a),
            "B": matrix_to_json(&ss.b),
            "C": matrix_to_json(&ss.c),
            "D": matrix_to_json(&ss.d),
        },
        "params": p.to_json_value(),
        "impulse_response": kernel,
    }))
}

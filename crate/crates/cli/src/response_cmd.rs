use clap::ValueEnum;
use photonflow_core::io::write_wavepacket;
use photonflow_core::json::{matrix_to_json, JsonComplex};
use photonflow_core::photon_states::spec::BuiltState;
use photonflow_core::response::records::{ActiveOutputRecord, FactorizableOutputRecord, UnfactorizableOutputRecord};
use photonflow_core::response::{fock_amplitudes, vacuum_intensity};
use photonflow_core::{
    build_state_space, is_passive, is_stable, output_covariance, output_intensity,
    output_state_active_unfactorizable, output_state_factorizable, output_state_passive_unfactorizable, PulseTensor3,
    RaggedPulseMatrix, ResponseOptions, StateSpace, TimeGrid, WavepacketTensor, C64,
};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult, Context};
use crate::output::OutputDir;
use crate::run_config::{GridOverrides, RunConfig};

pub const DEFAULT_PHOTON_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Covariance,
    Intensity,
    State,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::Covariance => "covariance",
            Quantity::Intensity => "intensity",
            Quantity::State => "state",
        }
    }
}

struct Setup {
    ss: StateSpace,
    grid: TimeGrid,
    opts: ResponseOptions,
    state: BuiltState,
}

fn setup(cfg: &RunConfig, overrides: &GridOverrides) -> CliResult<Setup> {
    let p = cfg.require_system()?;
    let spec = cfg.require_state()?;
    let ss = build_state_space(p, &cfg.tol).context("system")?;
    if !is_stable(&ss, &cfg.tol).context("eigenvalues of A")? {
        let max_re = ss.spectral_abscissa().context("eigenvalues of A")?.unwrap_or(0.0);
        return Err(CliError::Config(format!(
            "system is not asymptotically stable (max Re(eig A) = {max_re:.6e})"
        )));
    }
    let grid = cfg.grid(Some(&ss), overrides)?;
    let opts = ResponseOptions {
        tol: cfg.tol,
        caps: cfg.caps,
        method: cfg.method,
        omegas: cfg.frequencies.map(|f| f.omegas()),
    };
    let state = spec.build(&grid, &cfg.state_base, &cfg.tol, &cfg.caps).context("state")?;
    Ok(Setup { ss, grid, opts, state })
}

fn factorizable<'a>(s: &'a Setup, what: Quantity) -> CliResult<&'a photonflow_core::FactorizableState> {
    match &s.state {
        BuiltState::Factorizable(st) => Ok(st),
        BuiltState::Unfactorizable(_) => Err(CliError::Config(format!(
            "quantity {} needs a factorizable state",
            what.name()
        ))),
    }
}

pub fn run(
    cfg: &RunConfig,
    overrides: &GridOverrides,
    quantity: Quantity,
    tol: Option<f64>,
    out: &mut OutputDir,
) -> CliResult<Value> {
    let s = setup(cfg, overrides)?;
    match quantity {
        Quantity::Intensity => intensity(&s, tol.unwrap_or(DEFAULT_PHOTON_TOL), out),
        Quantity::Covariance => covariance(&s, cfg, out),
        Quantity::State => state(&s, cfg, out),
    }
}

fn intensity(s: &Setup, tol: f64, out: &mut OutputDir) -> CliResult<Value> {
    let st = factorizable(s, Quantity::Intensity)?;
    let n = output_intensity(&s.ss, st, &s.opts).context("output intensity")?;
    let vac = vacuum_intensity(&s.ss).context("vacuum intensity")?;
    let m = n.len();
    let mut header = vec!["t".to_string()];
    header.extend((0..m).map(|i| format!("n_{i}")));
    let rows: Vec<Vec<f64>> = (0..s.grid.len())
        .map(|t| std::iter::once(s.grid.time(t)).chain(n.iter().map(|c| c[t])).collect())
        .collect();
    out.write_csv("intensity.csv", &header, &rows)?;

    let integrals: Vec<f64> = n.iter().map(|c| s.grid.trapz_real(c)).collect();
    let duration = s.grid.t_max - s.grid.t_min;
    let photons: f64 = integrals.iter().zip(&vac).map(|(i, v)| i - v * duration).sum();
    let expected: usize = st.pulses.ells().iter().sum();
    let passive = is_passive(&s.ss.params, &s.opts.tol);
    let deviation = (photons - expected as f64).abs();
    let summary = json!({
        "quantity": "intensity",
        "grid": s.grid,
        "integrals": integrals,
        "vacuum_level": vac,
        "photon_number": photons,
        "input_photons": expected,
        "passive": passive,
        "photon_number_check": if passive {
            json!({"deviation": deviation, "tol": tol, "pass": deviation <= tol})
        } else {
            Value::Null
        },
        "files": ["intensity.csv"],
    });
    out.write_json("summary.json", &summary)?;
    if passive && !(deviation <= tol) {
        return Err(CliError::Tolerance(format!(
            "output photon number {photons:.12} differs from {expected} by {deviation:.3e} > {tol:.1e}"
        )));
    }
    Ok(summary)
}

fn nearest_index(grid: &TimeGrid, t: f64) -> usize {
    let k = ((t - grid.t_min) / grid.dt()).round();
    k.clamp(0.0, (grid.len() - 1) as f64) as usize
}

fn covariance(s: &Setup, cfg: &RunConfig, out: &mut OutputDir) -> CliResult<Value> {
    let st = factorizable(s, Quantity::Covariance)?;
    let cov = output_covariance(&s.ss, st, &s.opts).context("output covariance")?;
    let n = s.grid.len();
    let ri = cfg.reference_time.map_or(n / 2, |t| nearest_index(&s.grid, t));
    let dim = 2 * cov.m;
    let mut header = vec!["t".to_string()];
    for a in 0..dim {
        for b in 0..dim {
            header.push(format!("re_{a}_{b}"));
            header.push(format!("im_{a}_{b}"));
        }
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|ti| {
            let k = cov.smooth_at(ti, ri);
            let mut row = vec![s.grid.time(ti)];
            for a in 0..dim {
                for b in 0..dim {
                    row.push(k[(a, b)].re);
                    row.push(k[(a, b)].im);
                }
            }
            row
        })
        .collect();
    out.write_csv("covariance_slice.csv", &header, &rows)?;

    let diag = cov.intensity();
    let mut dheader = vec!["t".to_string()];
    dheader.extend((0..cov.m).map(|i| format!("n_{i}")));
    let drows: Vec<Vec<f64>> = (0..n)
        .map(|t| std::iter::once(s.grid.time(t)).chain(diag.iter().map(|c| c[t])).collect())
        .collect();
    out.write_csv("covariance_intensity.csv", &dheader, &drows)?;

    let step = (n / 8).max(1);
    let pairs: Vec<(usize, usize)> = (0..n)
        .step_by(step)
        .flat_map(|t| (0..n).step_by(step).map(move |r| (t, r)))
        .collect();
    let summary = json!({
        "quantity": "covariance",
        "grid": s.grid,
        "reference_time": s.grid.time(ri),
        "rank": cov.rank(),
        "delta_coeff": matrix_to_json(&cov.delta_coeff),
        "stationary": cov.stationary.as_ref().map(|k| json!({"dt": k.dt, "n_lags": k.samples.len()})),
        "hermitian_defect": cov.hermitian_defect(&pairs),
        "files": ["covariance_slice.csv", "covariance_intensity.csv"],
    });
    out.write_json("summary.json", &summary)?;
    Ok(summary)
}

fn pulse_tensor_csv(x: &PulseTensor3) -> (Vec<String>, Vec<Vec<f64>>) {
    let grid = x.grid();
    let mut header = vec!["t".to_string()];
    let mut labels = Vec::new();
    for i in 0..x.m() {
        for (j, k) in x.columns() {
            header.push(format!("re_{i}_{j}_{k}"));
            header.push(format!("im_{i}_{j}_{k}"));
            labels.push((i, j, k));
        }
    }
    let rows = (0..grid.len())
        .map(|t| {
            let mut row = vec![grid.time(t)];
            for &(i, j, k) in &labels {
                let z = x.at(i, j, k, t);
                row.push(z.re);
                row.push(z.im);
            }
            row
        })
        .collect();
    (header, rows)
}

/// Basis pulses scaled to unit discrete norm on the run grid.
fn fock_basis(cfg: &RunConfig, grid: &TimeGrid) -> CliResult<Option<RaggedPulseMatrix>> {
    let Some(spec) = &cfg.fock_basis else {
        return Ok(None);
    };
    let channels = spec
        .iter()
        .map(|ch| {
            ch.iter()
                .map(|p| {
                    let v = p.sample(grid, &cfg.config_base)?;
                    let n = grid.inner(&v, &v).re.sqrt();
                    Ok(v.iter().map(|z| z / n).collect::<Vec<C64>>())
                })
                .collect::<photonflow_core::Result<Vec<_>>>()
        })
        .collect::<photonflow_core::Result<Vec<_>>>()
        .context("fock_basis")?;
    Ok(Some(RaggedPulseMatrix::new(*grid, channels).context("fock_basis")?))
}

/// `t1, t2, re, im` table of a two-photon single-channel amplitude.
pub fn surface_rows(w: &WavepacketTensor) -> (Vec<String>, Vec<Vec<f64>>) {
    let g = w.grid();
    let n = g.len();
    let vals = w.component(&[0, 0]);
    let header = ["t1", "t2", "re", "im"].map(String::from).to_vec();
    let rows = (0..n * n)
        .map(|k| {
            let (a, b) = (k / n, k % n);
            vec![g.time(a), g.time(b), vals[k].re, vals[k].im]
        })
        .collect();
    (header, rows)
}

fn state(s: &Setup, cfg: &RunConfig, out: &mut OutputDir) -> CliResult<Value> {
    let passive = is_passive(&s.ss.params, &s.opts.tol);
    match &s.state {
        BuiltState::Factorizable(st) => {
            let os = output_state_factorizable(&s.ss, st, &s.opts).context("output state")?;
            let (h, r) = pulse_tensor_csv(&os.eta_minus);
            out.write_csv("eta_minus.csv", &h, &r)?;
            let (h, r) = pulse_tensor_csv(&os.eta_plus);
            out.write_csv("eta_plus.csv", &h, &r)?;
            let mut files = vec!["eta_minus.csv".to_string(), "eta_plus.csv".to_string()];
            let record = FactorizableOutputRecord::new(&os, &s.opts.caps, files.clone()).context("output record")?;
            out.write_json("state.json", &record)?;
            files.push("state.json".into());

            let mut fock = Value::Null;
            if let Some(basis) = fock_basis(cfg, &s.grid)? {
                let table = fock_amplitudes(&os, &basis, &s.opts.tol, &s.opts.caps).context("fock projection")?;
                let k = basis.total_photons();
                let mut header: Vec<String> = (0..k).map(|i| format!("n_{i}")).collect();
                header.extend(["re", "im", "abs2"].map(String::from));
                let rows: Vec<Vec<f64>> = table
                    .iter()
                    .map(|(occ, a)| {
                        let mut row: Vec<f64> = occ.iter().map(|&x| x as f64).collect();
                        row.extend([a.re, a.im, a.norm_sqr()]);
                        row
                    })
                    .collect();
                out.write_csv("fock.csv", &header, &rows)?;
                files.push("fock.csv".into());
                let captured: f64 = table.iter().map(|(_, a)| a.norm_sqr()).sum();
                fock = json!({
                    "modes": basis.ells(),
                    "captured_probability": captured,
                    "amplitudes": table
                        .iter()
                        .map(|(occ, a)| json!({"occupation": occ, "amplitude": JsonComplex::from(*a)}))
                        .collect::<Vec<_>>(),
                });
            }
            let summary = json!({
                "quantity": "state",
                "kind": "factorizable",
                "grid": s.grid,
                "passive": passive,
                "input_norms": record.input_norms,
                "recomputed_norms": record.recomputed_norms,
                "fock": fock,
                "files": files,
            });
            out.write_json("summary.json", &summary)?;
            Ok(summary)
        }
        BuiltState::Unfactorizable(st) => {
            if cfg.fock_basis.is_some() {
                return Err(CliError::Config("fock_basis applies to factorizable states only".into()));
            }
            if passive {
                let os = output_state_passive_unfactorizable(&s.ss, st, &s.opts).context("output state")?;
                let mut files = Vec::new();
                for (j, w) in os.channels.iter().enumerate() {
                    let name = format!("channel_{j}.bin");
                    write_wavepacket(&out.path().join(&name), w).context("wave packet")?;
                    out.adopt(&name)?;
                    files.push(name);
                    if w.m() == 1 && w.order() == 2 {
                        let name = format!("channel_{j}_surface.csv");
                        let (h, r) = surface_rows(w);
                        out.write_csv(&name, &h, &r)?;
                        files.push(name);
                    }
                }
                let record = UnfactorizableOutputRecord::new(st, &os, files.clone());
                out.write_json("state.json", &record)?;
                files.push("state.json".into());
                let summary = json!({
                    "quantity": "state",
                    "kind": "unfactorizable_passive",
                    "grid": s.grid,
                    "input_norms": record.input_norms,
                    "output_norms": record.output_norms,
                    "files": files,
                });
                out.write_json("summary.json", &summary)?;
                Ok(summary)
            } else {
                let os = output_state_active_unfactorizable(&s.ss, st, &s.opts).context("output state")?;
                let name = |j: usize, f: &[i8]| {
                    let tag: String = f.iter().map(|&x| if x == 1 { 'p' } else { 'm' }).collect();
                    format!("channel_{j}_pattern_{tag}.bin")
                };
                let mut files = Vec::new();
                for (j, ps) in os.channels.iter().enumerate() {
                    for p in ps {
                        let file = name(j, &p.pattern);
                        write_wavepacket(&out.path().join(&file), &p.tensor).context("wave packet")?;
                        out.adopt(&file)?;
                        files.push(file);
                    }
                }
                let record = ActiveOutputRecord::new(&os, name);
                out.write_json("state.json", &record)?;
                files.push("state.json".into());
                let summary = json!({
                    "quantity": "state",
                    "kind": "unfactorizable_active",
                    "grid": s.grid,
                    "input_norms": record.input_norms,
                    "patterns": record.patterns.len(),
                    "kernel_tail": record.kernel_tail,
                    "files": files,
                });
                out.write_json("summary.json", &summary)?;
                Ok(summary)
            }
        }
    }
}

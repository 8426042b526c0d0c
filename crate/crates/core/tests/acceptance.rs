//! Exit criteria.  Each test prints one PASS/FAIL line and asserts the
//! criterion at its stated tolerance and runtime budget.

mod common;

use std::time::{Duration, Instant};

use common::{discrete_dictionary, gaussian, random, random_pulses, unit_samples};
use photonflow_core::fock_oracle::{example1, example2, example3, oracle_core_tensor, Dictionary, Example1Pulses};
use photonflow_core::lin_sys::inverse_residual;
use photonflow_core::photon_states::spec::gaussian2d;
use photonflow_core::response::{fock_amplitudes, vacuum_density};
use photonflow_core::tensor_alg::{convolve, permanent_unchecked};
use photonflow_core::{
    build_state_space, impulse_response, lemma_nl_check, make_factorizable, make_unfactorizable, output_covariance,
    output_intensity, output_state_active_unfactorizable, output_state_factorizable,
    output_state_passive_unfactorizable, project_onto_fock, spectral_transfer, CMat, Caps, ConvMethod, CoreTensor,
    PhysicalParams, RaggedPulseMatrix, ResponseOptions, Support, TimeGrid, Tolerances, WavepacketTensor, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, ok: bool, detail: String, started: Instant, budget_s: f64) {
    let elapsed = started.elapsed();
    let in_time = elapsed <= Duration::from_secs_f64(budget_s);
    let pass = ok && in_time;
    println!(
        "criterion {id:>2} {} {name}: {detail}; {:.2}s of {budget_s}s",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(ok, "criterion {id} ({name}) violated: {detail}");
    assert!(in_time, "criterion {id} ({name}) exceeded its {budget_s}s budget");
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[test]
fn criterion_01_two_by_two_interference() {
    let started = Instant::now();
    let opts = ResponseOptions::default();
    let g = TimeGrid::new(-12.0, 12.0, 961).unwrap();
    let unit = unit_samples(&g, gaussian(0.0, 1.0));
    let xi = RaggedPulseMatrix::new(g, vec![vec![unit.clone(); 2], vec![unit.clone(); 2]]).unwrap();
    let st = make_factorizable(xi, &opts.tol, &opts.caps).unwrap();
    let ss = build_state_space(&PhysicalParams::beamsplitter(0.5), &opts.tol).unwrap();
    let out = output_state_factorizable(&ss, &st, &opts).unwrap();
    let basis = RaggedPulseMatrix::new(g, vec![vec![unit.clone()], vec![unit]]).unwrap();

    let s = (3.0f64 / 8.0).sqrt();
    let expected = |occ: &[usize]| match occ {
        [4, 0] | [0, 4] => s,
        [2, 2] => -0.5,
        _ => 0.0,
    };
    let mut worst: f64 = 0.0;
    for (occ, a) in fock_amplitudes(&out, &basis, &opts.tol, &opts.caps).unwrap() {
        worst = worst.max((a - c(expected(&occ))).norm());
    }
    let a40 = project_onto_fock(&out, &[4, 0], &basis, &opts.tol, &opts.caps).unwrap();
    worst = worst.max((a40 - c(s)).norm());

    let oracle = example1(0.5, &Example1Pulses::Identical).unwrap();
    let mut worst_oracle: f64 = 0.0;
    for i in 0..=4 {
        let occ = [i, 4 - i];
        worst_oracle = worst_oracle.max((oracle.amplitude_single_label(&occ) - c(expected(&occ))).norm());
    }
    let off_support: f64 = oracle
        .amplitudes()
        .iter()
        .filter(|(k, _)| k.iter().sum::<usize>() != 4)
        .map(|(_, a)| a.norm())
        .fold(0.0, f64::max);
    worst_oracle = worst_oracle.max(off_support);
    report(
        1,
        "balanced beamsplitter, two identical photons per port",
        worst <= 1e-9 && worst_oracle <= 1e-9,
        format!("pipeline |d| = {worst:.2e}, oracle |d| = {worst_oracle:.2e} (tol 1e-9)"),
        started,
        1.0,
    );
}

#[test]
fn criterion_02_one_plus_ell_suppression() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_root: f64 = 0.0;
    for ell in 1..=6usize {
        let root = ell as f64 / (ell as f64 + 1.0);
        for r in [0.2, 0.5, root, 0.8] {
            let amp = example2(r, ell).unwrap().amplitude;
            let closed = r.powi(ell as i32 - 1).sqrt() * (r - ell as f64 * (1.0 - r));
            worst = worst.max((amp - c(closed)).norm());
            if r == root {
                worst_root = worst_root.max(amp.norm());
            }
        }
    }
    report(
        2,
        "|l,1> amplitude against the closed form",
        worst <= 1e-9 && worst_root <= 1e-12,
        format!("max |d| = {worst:.2e} (tol 1e-9), root amplitude {worst_root:.2e} (tol 1e-12)"),
        started,
        1.0,
    );
}

fn choose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[test]
fn criterion_03_photon_catalysis() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_tail: f64 = 0.0;
    for (r, t, ell, alpha, n_max) in [(0.6, 0.8, 1usize, 1.0f64, 20usize), (0.6, 0.8, 2, 0.5, 16)] {
        let a2 = alpha * alpha;
        let tail: f64 = (n_max + 1..n_max + 200).map(|n| (-a2).exp() * a2.powi(n as i32) / fact(n)).sum();
        worst_tail = worst_tail.max(tail);
        let terms = example3(r, t, ell, c(alpha), n_max).unwrap();
        assert_eq!(terms.len(), n_max + 1);
        for term in terms {
            let n = term.n;
            let sum: f64 = (0..=n.min(ell))
                .map(|j| {
                    choose(n, n - j) * choose(ell, j) * (-1f64).powi(j as i32) * t.powi((n + ell - 2 * j) as i32) * r.powi(2 * j as i32)
                })
                .sum();
            let closed = (-a2 / 2.0).exp() * alpha.powi(n as i32) / fact(n).sqrt() * sum;
            worst = worst.max((term.oracle - c(closed)).norm());
        }
    }
    report(
        3,
        "coherent-state catalysis coefficients",
        worst <= 1e-10 && worst_tail <= 1e-12,
        format!("max |d| = {worst:.2e} (tol 1e-10), truncation tail {worst_tail:.2e} (tol 1e-12)"),
        started,
        1.0,
    );
}

#[test]
fn criterion_04_vacuum_passthrough() {
    let started = Instant::now();
    let tol = Tolerances::default();
    let omegas: Vec<f64> = (0..512).map(|k| -60.0 + 120.0 * k as f64 / 511.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut systems: Vec<PhysicalParams> = [0.5, 2.0, 8.0].iter().map(|&k| PhysicalParams::cavity(k)).collect();
    systems.push(PhysicalParams::static_device(random::unitary(&mut rng, 3)));
    systems.push(PhysicalParams::beamsplitter(0.3));
    let mut worst: f64 = 0.0;
    for p in &systems {
        let ss = build_state_space(p, &tol).unwrap();
        let vac = vacuum_density(p.m);
        let out = spectral_transfer(&ss, &omegas, &vec![vac.clone(); omegas.len()], &tol).unwrap();
        for r in out {
            worst = worst.max((r - &vac).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }
    report(
        4,
        "vacuum through passive systems",
        worst <= 1e-8,
        format!("max entry deviation {worst:.2e} over 512 frequencies (tol 1e-8)"),
        started,
        1.0,
    );
}

#[test]
fn criterion_05_stable_inversion() {
    let started = Instant::now();
    let tol = Tolerances::default();
    let ss = build_state_space(&PhysicalParams::cavity(1.0), &tol).unwrap();
    let horizon = ss.suggested_horizon().unwrap().unwrap();
    let residual = |n: usize| {
        let grid = TimeGrid::new(0.0, horizon, n).unwrap();
        inverse_residual(&impulse_response(&ss, &grid, &tol).unwrap()).unwrap().l2
    };
    let coarse = residual(1024);
    let fine = residual(2047);
    let ratio = fine / coarse;
    report(
        5,
        "stable inverse composed with the system",
        coarse <= 1e-4 && (0.35..=0.65).contains(&ratio),
        format!("L2 residual {coarse:.3e} at n=1024 (tol 1e-4), ratio {ratio:.3} when dt halves (want 0.5 +- 30%)"),
        started,
        5.0,
    );
}

#[test]
fn criterion_06_photon_number_conservation() {
    let started = Instant::now();
    let opts = ResponseOptions::default();
    let ss = build_state_space(&PhysicalParams::cavity(1.0), &opts.tol).unwrap();
    let horizon = ss.suggested_horizon().unwrap().unwrap();
    let g = TimeGrid::new(0.0, horizon, 4096).unwrap();
    // Orthonormal pulses centred at t = 8: a dictionary built on the grid shifted by 8.
    let dict = discrete_dictionary(&TimeGrid::new(-8.0, horizon - 8.0, 4096).unwrap(), 2);
    let (h0, h1) = (dict[0].clone(), dict[1].clone());
    let cases: Vec<(&str, Vec<Vec<C64>>)> = vec![
        ("single photon", vec![h0.clone()]),
        ("two identical", vec![h0.clone(), h0.clone()]),
        ("two orthonormal", vec![h0, h1]),
    ];
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for (name, ps) in cases {
        let ell = ps.len() as f64;
        let st = make_factorizable(RaggedPulseMatrix::new(g, vec![ps]).unwrap(), &opts.tol, &opts.caps).unwrap();
        let n = output_intensity(&ss, &st, &opts).unwrap();
        let err = (g.trapz_real(&n[0]) - ell).abs();
        lines.push(format!("{name} {err:.1e}"));
        worst = worst.max(err);
    }

    let bs = build_state_space(&PhysicalParams::beamsplitter(0.5), &opts.tol).unwrap();
    let gb = TimeGrid::new(-10.0, 10.0, 801).unwrap();
    let unit = unit_samples(&gb, gaussian(0.0, 1.0));
    let xi = RaggedPulseMatrix::new(gb, vec![vec![unit.clone()], vec![unit.clone()]]).unwrap();
    let out = output_state_factorizable(&bs, &make_factorizable(xi, &opts.tol, &opts.caps).unwrap(), &opts).unwrap();
    let basis = RaggedPulseMatrix::new(gb, vec![vec![unit.clone()], vec![unit]]).unwrap();
    let hom = project_onto_fock(&out, &[1, 1], &basis, &opts.tol, &opts.caps).unwrap().norm();
    report(
        6,
        "photon number through a cavity and two-photon interference dip",
        worst <= 1e-4 && hom <= 1e-12,
        format!("|int n - l|: {} (tol 1e-4); coincidence amplitude {hom:.1e} (tol 1e-12)", lines.join(", ")),
        started,
        5.0,
    );
}

fn naive_permanent(g: &CMat) -> C64 {
    fn rec(g: &CMat, row: usize, used: &mut Vec<bool>) -> C64 {
        let n = g.nrows();
        if row == n {
            return c(1.0);
        }
        let mut acc = c(0.0);
        for col in 0..n {
            if !used[col] {
                used[col] = true;
                acc += g[(row, col)] * rec(g, row + 1, used);
                used[col] = false;
            }
        }
        acc
    }
    rec(g, 0, &mut vec![false; g.nrows()])
}

#[test]
fn criterion_07_permanent_oracles() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_perm: f64 = 0.0;
    for trial in 0..100 {
        let k = 1 + trial % 6;
        let x = random::matrix(&mut rng, k + 1, k, 1.0);
        let g = x.adjoint() * x;
        let (a, b) = (permanent_unchecked(&g), naive_permanent(&g));
        worst_perm = worst_perm.max((a - b).norm() / b.norm());
    }

    let grid = TimeGrid::new(-10.0, 10.0, 801).unwrap();
    let (tol, caps) = (Tolerances::default(), Caps::default());
    let mut worst_row: f64 = 0.0;
    for trial in 0..12 {
        let ells = [1 + trial % 4, 1 + (trial / 4) % 4];
        let st = make_factorizable(random_pulses(&mut rng, grid, &ells), &tol, &caps).unwrap();
        for j in 0..2 {
            worst_row = worst_row.max(lemma_nl_check(&st, j));
        }
    }

    let dict_fns = discrete_dictionary(&grid, 4);
    let dict = Dictionary::new(grid, dict_fns.clone()).unwrap();
    let mut worst_core: f64 = 0.0;
    for _ in 0..6 {
        let pulses: Vec<Vec<C64>> = (0..3)
            .map(|_| {
                let coeffs: Vec<C64> = (0..4).map(|_| random::complex(&mut rng, 1.0)).collect();
                (0..grid.len())
                    .map(|t| coeffs.iter().zip(&dict_fns).map(|(a, f)| a * f[t]).sum())
                    .collect()
            })
            .collect();
        let xi = RaggedPulseMatrix::new(grid, vec![pulses]).unwrap();
        let oracle = oracle_core_tensor(&xi, &dict, 1e-8).unwrap();
        let perm = CoreTensor::from_pulses(&xi, &caps).unwrap();
        let scale = perm.slice(0).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let d = (oracle.slice(0) - perm.slice(0)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        worst_core = worst_core.max(d / scale.max(1.0));
    }
    report(
        7,
        "permanent and core-tensor cross-checks",
        worst_perm <= 1e-12 && worst_row <= 1e-8 && worst_core <= 1e-10,
        format!(
            "Ryser vs naive {worst_perm:.1e} (tol 1e-12), row identity {worst_row:.1e} (tol 1e-8), core tensors {worst_core:.1e} (tol 1e-10)"
        ),
        started,
        10.0,
    );
}

/// `(M psi M^T)` with `M[a][r]` the one-dimensional trapezoid operator of the
/// closed-form cavity kernel, summed directly over both integration variables.
fn direct_two_photon(grid: &TimeGrid, kappa: f64, psi: &[C64]) -> Vec<C64> {
    let n = grid.len();
    let dt = grid.dt();
    let mut m = vec![vec![0.0; n]; n];
    for (a, row) in m.iter_mut().enumerate() {
        row[a] += 1.0;
        if a == 0 {
            continue;
        }
        for (r, v) in row.iter_mut().enumerate().take(a + 1) {
            let w = if r == 0 || r == a { 0.5 } else { 1.0 };
            *v += dt * w * (-kappa * (-kappa * (a - r) as f64 * dt / 2.0).exp());
        }
    }
    let mut out = vec![c(0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            let mut acc = c(0.0);
            for r in 0..=a {
                let mar = m[a][r];
                if mar == 0.0 {
                    continue;
                }
                let mut inner = c(0.0);
                for s in 0..=b {
                    inner += m[b][s] * psi[r * n + s];
                }
                acc += mar * inner;
            }
            out[a * n + b] = acc;
        }
    }
    out
}

fn rel_l2(a: &[C64], b: &[C64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

#[test]
fn criterion_08_two_photon_pulse_shaping() {
    let started = Instant::now();
    let opts = ResponseOptions::default();
    let g = TimeGrid::new(-4.0, 14.0, 128).unwrap();
    let mut worst: f64 = 0.0;
    let mut worst_product: f64 = 0.0;
    for rho in [-0.5, 0.0, 0.5] {
        let psi = WavepacketTensor::sample_diagonal(
            0,
            1,
            g,
            2,
            |t| c(gaussian2d(t[0], t[1], [1.0, 1.0], [1.0, 1.0], rho)),
            &opts.caps,
        )
        .unwrap();
        let st = make_unfactorizable(vec![psi.clone()], &opts.tol).unwrap();
        for kappa in [0.2, 1.0, 5.0] {
            let ss = build_state_space(&PhysicalParams::cavity(kappa), &opts.tol).unwrap();
            let out = output_state_passive_unfactorizable(&ss, &st, &opts).unwrap();
            let fft = out.channels[0].component(&[0, 0]);
            let direct = direct_two_photon(&g, kappa, psi.component(&[0, 0]));
            worst = worst.max(rel_l2(fft, &direct));
            if rho == 0.0 {
                let one_d: Vec<C64> = g
                    .times()
                    .iter()
                    .map(|&t| c((-(t - 1.0).powi(2) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()))
                    .collect();
                let samples: Vec<C64> = (0..g.len())
                    .map(|k| c(-kappa * (-kappa * k as f64 * g.dt() / 2.0).exp()))
                    .collect();
                let smooth = convolve(&samples, &one_d, g.dt(), Support::Causal, ConvMethod::Direct);
                let y: Vec<C64> = one_d.iter().zip(&smooth).map(|(x, s)| x + s).collect();
                let n = g.len();
                for a in 0..n {
                    for b in 0..n {
                        worst_product = worst_product.max((fft[a * n + b] - y[a] * y[b]).norm());
                    }
                }
            }
        }
    }
    report(
        8,
        "two-photon Gaussian through a cavity, FFT vs direct quadrature",
        worst <= 1e-6 && worst_product <= 1e-8,
        format!("relative L2 {worst:.2e} (tol 1e-6), uncorrelated product deviation {worst_product:.2e} (tol 1e-8)"),
        started,
        60.0,
    );
}

#[test]
fn criterion_09_active_path_reductions() {
    let started = Instant::now();
    let opts = ResponseOptions::default();
    let g = TimeGrid::new(-6.0, 18.0, 192).unwrap();

    let zero_gain = build_state_space(&PhysicalParams::amplifier(2.0, 0.0), &opts.tol).unwrap();
    let psi = WavepacketTensor::sample_diagonal(
        0,
        1,
        g,
        2,
        |t| c(gaussian2d(t[0], t[1], [1.0, 1.0], [1.0, 1.0], 0.5)),
        &opts.caps,
    )
    .unwrap();
    let st = make_unfactorizable(vec![psi], &opts.tol).unwrap();
    let passive = output_state_passive_unfactorizable(&zero_gain, &st, &opts).unwrap();
    let active = output_state_active_unfactorizable(&zero_gain, &st, &opts).unwrap();
    let mut worst_zero: f64 = 0.0;
    for p in &active.channels[0] {
        let d = if p.pattern == [1, 1] {
            p.tensor.max_abs_diff(&passive.channels[0]).unwrap()
        } else {
            p.tensor.max_abs()
        };
        worst_zero = worst_zero.max(d);
    }

    let amp = build_state_space(&PhysicalParams::amplifier(2.0, 0.4), &opts.tol).unwrap();
    let (fa, fb) = (common::chirped(0.0, 1.0, 0.5), gaussian(1.5, 0.7));
    let sep = WavepacketTensor::sample_diagonal(0, 1, g, 2, |t| fa(t[0]) * fb(t[1]), &opts.caps).unwrap();
    let out = output_state_active_unfactorizable(&amp, &make_unfactorizable(vec![sep], &opts.tol).unwrap(), &opts).unwrap();
    let sample = |f: &dyn Fn(f64) -> C64| g.times().iter().map(|&t| f(t)).collect::<Vec<_>>();
    let xi = RaggedPulseMatrix::new(g, vec![vec![sample(&fa), sample(&fb)]]).unwrap();
    let fact = output_state_factorizable(&amp, &make_factorizable(xi, &opts.tol, &opts.caps).unwrap(), &opts).unwrap();
    let factor = |f: i8, k: usize| -> Vec<C64> {
        if f == 1 {
            fact.eta_minus.get(0, 0, k).to_vec()
        } else {
            fact.eta_plus.get(0, 0, k).iter().map(|z| z.conj()).collect()
        }
    };
    let n = g.len();
    let mut worst_sep: f64 = 0.0;
    for p in &out.channels[0] {
        let (a, b) = (factor(p.pattern[0], 0), factor(p.pattern[1], 1));
        let t = p.tensor.component(&[0, 0]);
        for i in 0..n {
            for j in 0..n {
                worst_sep = worst_sep.max((t[i * n + j] - a[i] * b[j]).norm());
            }
        }
    }
    report(
        9,
        "active path reduces to passive and product forms",
        worst_zero <= 1e-8 && worst_sep <= 1e-8,
        format!("zero gain vs passive {worst_zero:.1e} (tol 1e-8), separable vs Kronecker {worst_sep:.1e} (tol 1e-8)"),
        started,
        30.0,
    );
}

#[test]
fn criterion_10_intensity_two_routes() {
    let started = Instant::now();
    let opts = ResponseOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let g = TimeGrid::new(-10.0, 30.0, 401).unwrap();
    let mut worst: f64 = 0.0;
    for trial in 0..5 {
        let m = 1 + trial % 2;
        let n = 1 + (trial / 2) % 2;
        let (_, ss) = random::system(&mut rng, m, n, trial == 4);
        let ells: Vec<usize> = (0..m).map(|j| if j == 0 { 1 + trial % 2 } else { rng.gen_range(0..=2) }).collect();
        let st = make_factorizable(random_pulses(&mut rng, g, &ells), &opts.tol, &opts.caps).unwrap();
        let from_cov = output_covariance(&ss, &st, &opts).unwrap().intensity();
        let direct = output_intensity(&ss, &st, &opts).unwrap();
        for (a, b) in from_cov.iter().zip(&direct) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    report(
        10,
        "output intensity from two independent assemblies",
        worst <= 1e-10,
        format!("max pointwise difference {worst:.2e} over 5 random systems and states (tol 1e-10)"),
        started,
        30.0,
    );
}

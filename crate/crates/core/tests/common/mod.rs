#![allow(dead_code)]

use photonflow_core::{RaggedPulseMatrix, TimeGrid, C64};

pub fn gaussian(center: f64, width: f64) -> impl Fn(f64) -> C64 + Copy {
    move |t| {
        let a = (2.0 * std::f64::consts::PI * width * width).powf(-0.25);
        C64::new(a * (-(t - center).powi(2) / (4.0 * width * width)).exp(), 0.0)
    }
}

pub fn chirped(center: f64, width: f64, freq: f64) -> impl Fn(f64) -> C64 + Copy {
    let g = gaussian(center, width);
    move |t| g(t) * C64::from_polar(1.0, freq * (t - center))
}

/// Pulse family with every pulse given by one function.
pub fn pulses<F: Fn(f64) -> C64 + Copy>(grid: TimeGrid, f: F, ells: &[usize]) -> RaggedPulseMatrix {
    let channels: Vec<Vec<F>> = ells.iter().map(|&l| vec![f; l]).collect();
    RaggedPulseMatrix::from_fns(grid, &channels).unwrap()
}

/// Sampled `f`, rescaled to unit discrete norm.
pub fn unit_samples<F: Fn(f64) -> C64>(grid: &TimeGrid, f: F) -> Vec<C64> {
    let v: Vec<C64> = grid.times().iter().map(|&t| f(t)).collect();
    let n = grid.inner(&v, &v).re.sqrt();
    v.iter().map(|z| z / n).collect()
}

pub fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `(g * x)(t_n)` by direct trapezoid sums, `g` given as a causal scalar function
/// with delta weight `d`.
pub fn causal_convolution(grid: &TimeGrid, d: C64, g: impl Fn(f64) -> C64, x: &[C64]) -> Vec<C64> {
    let dt = grid.dt();
    (0..x.len())
        .map(|n| {
            let mut acc = C64::new(0.0, 0.0);
            for p in 0..=n {
                let w = if p == 0 || p == n { 0.5 } else { 1.0 };
                acc += w * g(p as f64 * dt) * x[n - p];
            }
            d * x[n] + if n == 0 { C64::new(0.0, 0.0) } else { acc * dt }
        })
        .collect()
}

/// Hermite-Gauss-like functions `t^k e^{-t^2/2}` orthonormalized in the
/// discrete trapezoid inner product.
pub fn discrete_dictionary(grid: &TimeGrid, size: usize) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = Vec::new();
    for k in 0..size {
        let mut v: Vec<C64> = grid
            .times()
            .iter()
            .map(|&t| C64::new(t.powi(k as i32) * (-t * t / 2.0).exp(), 0.0))
            .collect();
        for _ in 0..2 {
            for u in &out {
                let p = grid.inner(u, &v);
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= p * y;
                }
            }
        }
        let n = grid.inner(&v, &v).re.sqrt();
        out.push(v.iter().map(|z| z / n).collect());
    }
    out
}

pub mod random {
    use photonflow_core::{build_state_space, is_stable, CMat, PhysicalParams, StateSpace, Tolerances, C64};
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    pub fn complex(rng: &mut ChaCha8Rng, scale: f64) -> C64 {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * scale
    }

    pub fn matrix(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> CMat {
        CMat::from_fn(r, c, |_, _| complex(rng, scale))
    }

    pub fn unitary(rng: &mut ChaCha8Rng, m: usize) -> CMat {
        matrix(rng, m, m, 1.0).qr().q()
    }

    /// Random stable system; active unless `passive`.
    pub fn system(rng: &mut ChaCha8Rng, m: usize, n: usize, passive: bool) -> (PhysicalParams, StateSpace) {
        let tol = Tolerances::default();
        loop {
            let h = matrix(rng, n, n, 0.5);
            let w = matrix(rng, n, n, 0.15);
            let p = PhysicalParams {
                m,
                n,
                s: unitary(rng, m),
                c_minus: matrix(rng, m, n, 1.0),
                c_plus: if passive { CMat::zeros(m, n) } else { matrix(rng, m, n, 0.25) },
                omega_minus: (&h + h.adjoint()) * C64::new(0.5, 0.0),
                omega_plus: if passive { CMat::zeros(n, n) } else { (&w + w.transpose()) * C64::new(0.5, 0.0) },
            };
            let ss = build_state_space(&p, &tol).unwrap();
            if is_stable(&ss, &tol).unwrap() && ss.spectral_abscissa().unwrap().unwrap() < -0.1 {
                return (p, ss);
            }
        }
    }

    /// `(center, width, frequency)` triples for chirped Gaussian pulses.
    pub fn pulse_params(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
        (rng.gen_range(-2.0..2.0), rng.gen_range(0.6..1.5), rng.gen_range(-1.0..1.0))
    }
}

/// Pulse family with independently drawn chirped Gaussians.
pub fn random_pulses(rng: &mut rand_chacha::ChaCha8Rng, grid: TimeGrid, ells: &[usize]) -> RaggedPulseMatrix {
    let channels: Vec<Vec<Vec<C64>>> = ells
        .iter()
        .map(|&l| {
            (0..l)
                .map(|_| {
                    let (c, w, f) = random::pulse_params(rng);
                    let p = chirped(c, w, f);
                    grid.times().iter().map(|&t| p(t)).collect()
                })
                .collect()
        })
        .collect();
    RaggedPulseMatrix::new(grid, channels).unwrap()
}

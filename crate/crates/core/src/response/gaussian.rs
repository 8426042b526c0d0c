use std::f64::consts::PI;

use serde::Serialize;

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::json::serialize_matrix;
use crate::lin_sys::{frequency_response, StateSpace};
use crate::linalg::{expm, lyapunov, zeros, CMat, C64};
use crate::photon_states::StationaryKernel;

/// Gaussian factor of an output state.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GaussianPart {
    Vacuum,
    /// Spectral density samples `R_out[i omega]`.
    Spectral {
        omegas: Vec<f64>,
        #[serde(serialize_with = "serialize_matrices")]
        density: Vec<CMat>,
    },
}

fn serialize_matrices<S: serde::Serializer>(xs: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct W<'a>(&'a CMat);
    impl Serialize for W<'_> {
        fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            serialize_matrix(self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&W(x))?;
    }
    seq.end()
}

/// `diag(I_m, 0_m)`.
pub fn vacuum_density(m: usize) -> CMat {
    let mut p = zeros(2 * m, 2 * m);
    for i in 0..m {
        p[(i, i)] = C64::new(1.0, 0.0);
    }
    p
}

/// `n_points` frequencies spanning the Nyquist band `[-pi/dt, pi/dt]`.
pub fn default_frequencies(grid: &TimeGrid) -> Vec<f64> {
    let w = PI / grid.dt();
    let n = grid.len();
    (0..n).map(|k| -w + 2.0 * w * k as f64 / (n - 1) as f64).collect()
}

/// `R_out[i omega] = Xi[i omega] R_in[i omega] Xi[i omega]^dag`.
pub fn spectral_transfer(ss: &StateSpace, omegas: &[f64], r_in: &[CMat], tol: &Tolerances) -> Result<Vec<CMat>> {
    if omegas.len() != r_in.len() {
        return Err(Error::GridMismatch(format!(
            "{} frequencies but {} spectral density samples",
            omegas.len(),
            r_in.len()
        )));
    }
    let dim = 2 * ss.m;
    if let Some(r) = r_in.iter().find(|r| r.shape() != (dim, dim)) {
        return Err(Error::Dimension(format!(
            "spectral density must be {}x{}, got {}x{}",
            dim,
            dim,
            r.nrows(),
            r.ncols()
        )));
    }
    let xi = frequency_response(ss, omegas, tol)?;
    Ok(xi.iter().zip(r_in).map(|(x, r)| x * r * x.adjoint()).collect())
}

/// Stationary smooth output covariance of the vacuum input,
/// `K(tau) = C e^{A tau} (X C^dag + B P D^dag)` for `tau > 0`, where
/// `A X + X A^dag + B P B^dag = 0` and `P = diag(I, 0)`.
pub fn vacuum_kernel(ss: &StateSpace, dt: f64, n_lags: usize, tol: &Tolerances) -> Result<Option<StationaryKernel>> {
    if ss.is_static() {
        return Ok(None);
    }
    let p = vacuum_density(ss.m);
    let x = lyapunov(&ss.a, &(&ss.b * &p * ss.b.adjoint()))?;
    let m0 = &x * ss.c.adjoint() + &ss.b * &p * ss.d.adjoint();
    let step = expm(&(&ss.a * C64::new(dt, 0.0)));
    let mut right = m0.clone();
    let mut samples = Vec::with_capacity(n_lags);
    for k in 0..n_lags {
        if k > 0 {
            right = &step * right;
        }
        samples.push(&ss.c * &right);
    }
    if let Some(first) = samples.first_mut() {
        *first = (&*first + first.adjoint()) * C64::new(0.5, 0.0);
    }
    let peak = samples.iter().map(crate::linalg::max_abs).fold(0.0, f64::max);
    Ok((peak > tol.zero).then_some(StationaryKernel { dt, samples }))
}

/// Vacuum contribution to the output intensity, `diag int g+(t)^# g+(t)^T dt`,
/// from `A Y + Y A^dag + M M^dag = 0` with `M = [-C+^T; C-^T]`.
pub fn vacuum_intensity(ss: &StateSpace) -> Result<Vec<f64>> {
    let (m, n) = (ss.m, ss.n);
    if n == 0 {
        return Ok(vec![0.0; m]);
    }
    let p = &ss.params;
    let mut cm = zeros(m, 2 * n);
    cm.view_mut((0, 0), (m, n)).copy_from(&p.c_minus);
    cm.view_mut((0, n), (m, n)).copy_from(&p.c_plus);
    let mut mm = zeros(2 * n, m);
    mm.view_mut((0, 0), (n, m)).copy_from(&(-p.c_plus.transpose()));
    mm.view_mut((n, 0), (n, m)).copy_from(&p.c_minus.transpose());
    let y = lyapunov(&ss.a, &(&mm * mm.adjoint()))?;
    let v = &cm * y * cm.adjoint();
    Ok((0..m).map(|i| v[(i, i)].re).collect())
}

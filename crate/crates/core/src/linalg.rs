//! Small dense complex linear-algebra helpers for doubled-up models.

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Entrywise complex conjugate (`X^#`).
pub fn conj(x: &CMat) -> CMat {
    x.map(|z| z.conj())
}

/// Largest entry magnitude.
pub fn max_abs(x: &CMat) -> f64 {
    x.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(x: &CMat, y: &CMat) -> f64 {
    assert_eq!(x.shape(), y.shape());
    x.iter()
        .zip(y.iter())
        .fold(0.0_f64, |acc, (a, b)| acc.max((a - b).norm()))
}

/// `Delta(U, V) = [U V; V^# U^#]`.
pub fn doubled(u: &CMat, v: &CMat) -> CMat {
    assert_eq!(u.shape(), v.shape(), "Delta blocks must share a shape");
    let (r, k) = u.shape();
    let mut out = zeros(2 * r, 2 * k);
    out.view_mut((0, 0), (r, k)).copy_from(u);
    out.view_mut((0, k), (r, k)).copy_from(v);
    out.view_mut((r, 0), (r, k)).copy_from(&conj(v));
    out.view_mut((r, k), (r, k)).copy_from(&conj(u));
    out
}

/// Split a `2r x 2k` matrix into its four blocks `(11, 12, 21, 22)`.
pub fn blocks(x: &CMat) -> (CMat, CMat, CMat, CMat) {
    let (r2, k2) = x.shape();
    assert!(r2 % 2 == 0 && k2 % 2 == 0);
    let (r, k) = (r2 / 2, k2 / 2);
    (
        x.view((0, 0), (r, k)).into_owned(),
        x.view((0, k), (r, k)).into_owned(),
        x.view((r, 0), (r, k)).into_owned(),
        x.view((r, k), (r, k)).into_owned(),
    )
}

/// Deviation of `x` from the `Delta(., .)` block pattern.
pub fn doubled_defect(x: &CMat) -> f64 {
    let (a, b, c_, d) = blocks(x);
    max_abs_diff(&c_, &conj(&b)).max(max_abs_diff(&d, &conj(&a)))
}

/// `J_k = diag(I_k, -I_k)`.
pub fn j_mat(k: usize) -> CMat {
    let mut j = eye(2 * k);
    for i in k..2 * k {
        j[(i, i)] = -ONE;
    }
    j
}

/// `Theta_k = [0 I; -I 0]`.
pub fn theta_mat(k: usize) -> CMat {
    let mut t = zeros(2 * k, 2 * k);
    for i in 0..k {
        t[(i, k + i)] = ONE;
        t[(k + i, i)] = -ONE;
    }
    t
}

/// `X^flat = J_k X^dag J_j` for `X` of size `2j x 2k`.
pub fn flat(x: &CMat) -> CMat {
    let (r2, k2) = x.shape();
    j_mat(k2 / 2) * x.adjoint() * j_mat(r2 / 2)
}

pub fn expm(a: &CMat) -> CMat {
    if a.nrows() == 0 {
        return a.clone();
    }
    a.clone().exp()
}

/// Eigenvalues of a general complex square matrix via the Schur form.
pub fn eigenvalues(a: &CMat) -> Result<Vec<C64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = a
        .clone()
        .try_schur(1e-14, 10_000)
        .ok_or(Error::EigenFailure)?;
    let ev = schur.eigenvalues().ok_or(Error::EigenFailure)?;
    Ok(ev.iter().copied().collect())
}

/// Solve `A X + X A^dag + Q = 0` by Kronecker vectorisation.
pub fn lyapunov(a: &CMat, q: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    // vec(A X) = (I kron A) vec X, vec(X A^dag) = (conj(A) kron I) vec X
    let big = eye(n).kronecker(a) + conj(a).kronecker(&eye(n));
    let rhs = -nalgebra::DVector::from_iterator(n * n, q.iter().copied());
    let sol = big
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Dimension("singular Lyapunov operator".into()))?;
    Ok(CMat::from_iterator(n, n, sol.iter().copied()))
}

/// `|U U^dag - I|` measured by the largest entry.
pub fn unitarity_defect(u: &CMat) -> f64 {
    max_abs_diff(&(u * u.adjoint()), &eye(u.nrows()))
}

pub fn hermitian_defect(x: &CMat) -> f64 {
    max_abs_diff(x, &x.adjoint())
}

pub fn symmetric_defect(x: &CMat) -> f64 {
    max_abs_diff(x, &x.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubled_has_block_symmetry() {
        let u = CMat::from_row_slice(1, 2, &[c(1.0, 2.0), c(0.5, -1.0)]);
        let v = CMat::from_row_slice(1, 2, &[c(0.0, 1.0), c(3.0, 0.0)]);
        let d = doubled(&u, &v);
        assert_eq!(d.shape(), (2, 4));
        assert!(doubled_defect(&d) == 0.0);
        assert_eq!(d[(1, 0)], c(0.0, -1.0));
        assert_eq!(d[(1, 3)], c(0.5, 1.0));
    }

    #[test]
    fn flat_of_doubled_identity_is_identity() {
        let x = doubled(&eye(2), &zeros(2, 2));
        assert!(max_abs_diff(&flat(&x), &eye(4)) == 0.0);
    }

    #[test]
    fn lyapunov_scalar() {
        // a x + x a^* + q = 0 with a = -1 + 2i, q = 3 -> x = 3/2
        let a = CMat::from_element(1, 1, c(-1.0, 2.0));
        let q = CMat::from_element(1, 1, c(3.0, 0.0));
        let x = lyapunov(&a, &q).unwrap();
        assert!((x[(0, 0)] - c(1.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn lyapunov_residual_small() {
        let a = CMat::from_row_slice(
            2,
            2,
            &[c(-1.0, 0.3), c(0.2, -0.1), c(0.0, 0.5), c(-2.0, 0.0)],
        );
        let q = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(2.0, 0.0)]);
        let x = lyapunov(&a, &q).unwrap();
        let r = &a * &x + &x * a.adjoint() + &q;
        assert!(max_abs(&r) < 1e-13);
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let a = CMat::from_row_slice(2, 2, &[c(-1.0, 0.0), c(5.0, 0.0), ZERO, c(0.1, 0.0)]);
        let mut ev: Vec<f64> = eigenvalues(&a).unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 0.1).abs() < 1e-12);
    }
}

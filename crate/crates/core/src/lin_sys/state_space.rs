use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::linalg::{c, doubled, eigenvalues, eye, flat, j_mat, zeros, CMat, C64};

use super::params::PhysicalParams;

/// Doubled-up state-space realisation `(A, B, C, D)`.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub m: usize,
    pub n: usize,
    pub a: CMat,
    pub b: CMat,
    pub c: CMat,
    pub d: CMat,
    pub params: PhysicalParams,
}

impl StateSpace {
    pub fn is_static(&self) -> bool {
        self.n == 0
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        eigenvalues(&self.a)
    }

    /// Largest real part of the spectrum of `A`, or `None` for static devices.
    pub fn spectral_abscissa(&self) -> Result<Option<f64>> {
        let ev = self.eigenvalues()?;
        Ok(ev.iter().map(|z| z.re).reduce(f64::max))
    }

    /// Default kernel horizon `20 / |Re lambda_max|`; `None` for static or unstable systems.
    pub fn suggested_horizon(&self) -> Result<Option<f64>> {
        Ok(match self.spectral_abscissa()? {
            Some(x) if x < 0.0 => Some(20.0 / x.abs()),
            _ => None,
        })
    }

    /// `-[C- C+] e^{At} [C-^dag; -C+^dag] S` and `-[C- C+] e^{At} [-C+^T; C-^T] S^#`
    /// evaluated for a given `e^{At}`; the block formulas for the smooth kernels.
    pub fn smooth_blocks(&self, e_at: &CMat) -> (CMat, CMat) {
        let p = &self.params;
        let n = self.n;
        let mut cm = zeros(self.m, 2 * n);
        cm.view_mut((0, 0), (self.m, n)).copy_from(&p.c_minus);
        cm.view_mut((0, n), (self.m, n)).copy_from(&p.c_plus);
        let mut rm = zeros(2 * n, self.m);
        rm.view_mut((0, 0), (n, self.m)).copy_from(&p.c_minus.adjoint());
        rm.view_mut((n, 0), (n, self.m)).copy_from(&(-p.c_plus.adjoint()));
        let mut rp = zeros(2 * n, self.m);
        rp.view_mut((0, 0), (n, self.m)).copy_from(&(-p.c_plus.transpose()));
        rp.view_mut((n, 0), (n, self.m)).copy_from(&p.c_minus.transpose());
        let left = -(&cm * e_at);
        let minus = &left * rm * &p.s;
        let plus = left * rp * p.s.map(|z| z.conj());
        (minus, plus)
    }
}

pub fn build_state_space(p: &PhysicalParams, tol: &Tolerances) -> Result<StateSpace> {
    p.validate(tol)?;
    let (m, n) = (p.m, p.n);
    let d = doubled(&p.s, &zeros(m, m));
    let cc = doubled(&p.c_minus, &p.c_plus);
    let cflat = flat(&cc);
    let b = -(&cflat * &d);
    let omega = doubled(&p.omega_minus, &p.omega_plus);
    let a = &cflat * &cc * c(-0.5, 0.0) - j_mat(n) * omega * c(0.0, 1.0);
    Ok(StateSpace {
        m,
        n,
        a,
        b,
        c: cc,
        d,
        params: p.clone(),
    })
}

/// `max Re(eig A) < -tol_hurwitz`; static devices count as stable.
pub fn is_stable(ss: &StateSpace, tol: &Tolerances) -> Result<bool> {
    Ok(match ss.spectral_abscissa()? {
        None => true,
        Some(x) => x < -tol.hurwitz,
    })
}

pub fn is_passive(p: &PhysicalParams, tol: &Tolerances) -> bool {
    p.is_passive(tol)
}

pub(crate) fn require_stable(ss: &StateSpace, tol: &Tolerances) -> Result<()> {
    if let Some(x) = ss.spectral_abscissa()? {
        if x >= -tol.hurwitz {
            return Err(Error::Unstable { max_re: x });
        }
    }
    Ok(())
}

/// Transfer function `D + C (i omega I - A)^{-1} B` on the imaginary axis.
pub fn frequency_response(ss: &StateSpace, omegas: &[f64], tol: &Tolerances) -> Result<Vec<CMat>> {
    require_stable(ss, tol)?;
    if ss.is_static() {
        return Ok(vec![ss.d.clone(); omegas.len()]);
    }
    let n2 = 2 * ss.n;
    omegas
        .iter()
        .map(|&w| {
            let res = eye(n2) * c(0.0, w) - &ss.a;
            let lu = res.lu();
            let x = lu.solve(&ss.b).ok_or(Error::SingularResolvent { omega: w })?;
            if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::SingularResolvent { omega: w });
            }
            Ok(&ss.d + &ss.c * x)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{doubled_defect, max_abs_diff, unitarity_defect};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn cavity_matrices() {
        let ss = build_state_space(&PhysicalParams::cavity(2.0), &tol()).unwrap();
        let r2 = 2f64.sqrt();
        assert!(max_abs_diff(&ss.a, &(-eye(2))) < 1e-15);
        assert!(max_abs_diff(&ss.b, &(eye(2) * c(-r2, 0.0))) < 1e-15);
        assert!(max_abs_diff(&ss.c, &(eye(2) * c(r2, 0.0))) < 1e-15);
        assert!(max_abs_diff(&ss.d, &eye(2)) < 1e-15);
    }

    #[test]
    fn amplifier_matrix_by_hand() {
        let (kappa, eps) = (1.5, 0.3);
        let ss = build_state_space(&PhysicalParams::amplifier(kappa, eps), &tol()).unwrap();
        let expect = CMat::from_row_slice(
            2,
            2,
            &[c(-kappa / 2.0, 0.0), c(0.0, -eps), c(0.0, eps), c(-kappa / 2.0, 0.0)],
        );
        assert!(max_abs_diff(&ss.a, &expect) < 1e-15);
        let mut ev: Vec<f64> = ss.eigenvalues().unwrap().iter().map(|z| z.re).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] - (-kappa / 2.0 - eps)).abs() < 1e-12);
        assert!((ev[1] - (-kappa / 2.0 + eps)).abs() < 1e-12);
        for x in [&ss.a, &ss.b, &ss.c, &ss.d] {
            assert!(doubled_defect(x) < 1e-15);
        }
    }

    #[test]
    fn stability_flags() {
        let t = tol();
        let cav = build_state_space(&PhysicalParams::cavity(2.0), &t).unwrap();
        assert!(is_stable(&cav, &t).unwrap());
        let bs = build_state_space(&PhysicalParams::beamsplitter(0.5), &t).unwrap();
        assert!(is_stable(&bs, &t).unwrap());
        assert!(bs.a.is_empty() && bs.b.is_empty() && bs.c.is_empty());
        let amp = build_state_space(&PhysicalParams::amplifier(1.0, 0.6), &t).unwrap();
        assert!(!is_stable(&amp, &t).unwrap());
        let mut shifted = cav.clone();
        shifted.a = eye(2) * c(0.1, 0.0);
        assert!(!is_stable(&shifted, &t).unwrap());
    }

    #[test]
    fn cavity_transfer_function() {
        let kappa = 2.0;
        let ss = build_state_space(&PhysicalParams::cavity(kappa), &tol()).unwrap();
        let ws: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.37).collect();
        let xs = frequency_response(&ss, &ws, &tol()).unwrap();
        for (w, x) in ws.iter().zip(&xs) {
            let expect = (c(0.0, *w) - kappa / 2.0) / (c(0.0, *w) + kappa / 2.0);
            assert!((x[(0, 0)] - expect).norm() < 1e-13);
            assert!(unitarity_defect(x) < 1e-12);
        }
        let far = frequency_response(&ss, &[1e9], &tol()).unwrap();
        assert!(max_abs_diff(&far[0], &ss.d) < 1e-8);
    }

    #[test]
    fn static_transfer_is_constant() {
        let ss = build_state_space(&PhysicalParams::beamsplitter(0.3), &tol()).unwrap();
        for x in frequency_response(&ss, &[0.0, 1.0, -5.0], &tol()).unwrap() {
            assert_eq!(x, ss.d);
        }
    }
}

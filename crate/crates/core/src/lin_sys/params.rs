use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::json::{matrix_from_json, matrix_to_json, JsonMatrix};
use crate::linalg::{c, hermitian_defect, max_abs, symmetric_defect, unitarity_defect, zeros, CMat};

/// `(S, C-, C+, Omega-, Omega+)` parameterisation of an `n`-oscillator system
/// coupled to `m` field channels through `L = C- a + C+ a^#` and
/// `H = 1/2 a^dag Delta(Omega-, Omega+) a`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    pub m: usize,
    pub n: usize,
    pub s: CMat,
    pub c_minus: CMat,
    pub c_plus: CMat,
    pub omega_minus: CMat,
    pub omega_plus: CMat,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    m: usize,
    n: usize,
    #[serde(rename = "S")]
    s: JsonMatrix,
    #[serde(rename = "Cminus", default)]
    c_minus: JsonMatrix,
    #[serde(rename = "Cplus", default)]
    c_plus: JsonMatrix,
    #[serde(rename = "OmegaMinus", default)]
    omega_minus: JsonMatrix,
    #[serde(rename = "OmegaPlus", default)]
    omega_plus: JsonMatrix,
}

fn parse_block(field: &str, rows: &JsonMatrix, r: usize, k: usize) -> Result<CMat> {
    if rows.is_empty() && (r == 0 || k == 0) {
        return Ok(zeros(r, k));
    }
    if k == 0 && rows.len() == r && rows.iter().all(|row| row.is_empty()) {
        return Ok(zeros(r, 0));
    }
    let x = matrix_from_json(rows, Some(k)).map_err(|e| Error::invalid(field, e))?;
    if x.shape() != (r, k) {
        return Err(Error::invalid(
            field,
            format!("expected a {}x{} matrix, got {}x{}", r, k, x.nrows(), x.ncols()),
        ));
    }
    Ok(x)
}

impl PhysicalParams {
    pub fn new(
        s: CMat,
        c_minus: CMat,
        c_plus: CMat,
        omega_minus: CMat,
        omega_plus: CMat,
    ) -> Result<Self> {
        let p = PhysicalParams {
            m: s.nrows(),
            n: c_minus.ncols(),
            s,
            c_minus,
            c_plus,
            omega_minus,
            omega_plus,
        };
        p.check_shapes()?;
        Ok(p)
    }

    /// Static scattering device (`n = 0`), e.g. a beamsplitter.
    pub fn static_device(s: CMat) -> Self {
        let m = s.nrows();
        PhysicalParams {
            m,
            n: 0,
            s,
            c_minus: zeros(m, 0),
            c_plus: zeros(m, 0),
            omega_minus: zeros(0, 0),
            omega_plus: zeros(0, 0),
        }
    }

    /// Single-mode optical cavity with decay rate `kappa`.
    pub fn cavity(kappa: f64) -> Self {
        PhysicalParams {
            m: 1,
            n: 1,
            s: CMat::from_element(1, 1, c(1.0, 0.0)),
            c_minus: CMat::from_element(1, 1, c(kappa.sqrt(), 0.0)),
            c_plus: zeros(1, 1),
            omega_minus: zeros(1, 1),
            omega_plus: zeros(1, 1),
        }
    }

    /// Degenerate parametric amplifier: the cavity with squeezing strength `epsilon`
    /// entering through `Omega+`.
    pub fn amplifier(kappa: f64, epsilon: f64) -> Self {
        let mut p = PhysicalParams::cavity(kappa);
        p.omega_plus = CMat::from_element(1, 1, c(epsilon, 0.0));
        p
    }

    /// Two-port beamsplitter `[[sqrt(e), sqrt(1-e)], [-sqrt(1-e), sqrt(e)]]`.
    pub fn beamsplitter(transmissivity: f64) -> Self {
        let t = transmissivity.sqrt();
        let r = (1.0 - transmissivity).sqrt();
        PhysicalParams::static_device(CMat::from_row_slice(
            2,
            2,
            &[c(t, 0.0), c(r, 0.0), c(-r, 0.0), c(t, 0.0)],
        ))
    }

    fn check_shapes(&self) -> Result<()> {
        let (m, n) = (self.m, self.n);
        let expect = |field: &str, x: &CMat, r: usize, k: usize| -> Result<()> {
            if x.shape() != (r, k) {
                return Err(Error::invalid(
                    field,
                    format!("expected {}x{}, got {}x{}", r, k, x.nrows(), x.ncols()),
                ));
            }
            Ok(())
        };
        if m == 0 {
            return Err(Error::invalid("m", "at least one channel is required"));
        }
        expect("S", &self.s, m, m)?;
        expect("Cminus", &self.c_minus, m, n)?;
        expect("Cplus", &self.c_plus, m, n)?;
        expect("OmegaMinus", &self.omega_minus, n, n)?;
        expect("OmegaPlus", &self.omega_plus, n, n)?;
        Ok(())
    }

    /// Full validity check: shapes, unitary `S`, Hermitian `Omega-`, symmetric `Omega+`.
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        self.check_shapes()?;
        let all = [
            ("S", &self.s),
            ("Cminus", &self.c_minus),
            ("Cplus", &self.c_plus),
            ("OmegaMinus", &self.omega_minus),
            ("OmegaPlus", &self.omega_plus),
        ];
        for (name, x) in all {
            if let Some(((i, j), _)) = x
                .iter()
                .enumerate()
                .map(|(k, z)| ((k % x.nrows().max(1), k / x.nrows().max(1)), z))
                .find(|(_, z)| !(z.re.is_finite() && z.im.is_finite()))
            {
                return Err(Error::invalid(format!("{}[{}][{}]", name, i, j), "not finite"));
            }
        }
        let du = unitarity_defect(&self.s);
        if du > tol.unitary {
            return Err(Error::invalid(
                "S",
                format!("not unitary: max|S S^dag - I| = {:.3e} > {:.1e}", du, tol.unitary),
            ));
        }
        let dh = hermitian_defect(&self.omega_minus);
        if dh > tol.unitary {
            return Err(Error::invalid(
                "OmegaMinus",
                format!("not Hermitian: max|W - W^dag| = {:.3e}", dh),
            ));
        }
        let ds = symmetric_defect(&self.omega_plus);
        if ds > tol.unitary {
            return Err(Error::invalid(
                "OmegaPlus",
                format!("not symmetric: max|W - W^T| = {:.3e}", ds),
            ));
        }
        Ok(())
    }

    pub fn is_passive(&self, tol: &Tolerances) -> bool {
        max_abs(&self.c_plus) <= tol.zero && max_abs(&self.omega_plus) <= tol.zero
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: RawParams = serde_json::from_str(text)?;
        Self::from_raw(raw)
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Self> {
        let raw: RawParams = serde_json::from_value(v)?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawParams) -> Result<Self> {
        // Omitted coupling and Hamiltonian blocks are zero.
        let optional = |field: &str, rows: &JsonMatrix, r: usize, k: usize| {
            if rows.is_empty() {
                Ok(zeros(r, k))
            } else {
                parse_block(field, rows, r, k)
            }
        };
        let (m, n) = (raw.m, raw.n);
        if m == 0 {
            return Err(Error::invalid("m", "at least one channel is required"));
        }
        let p = PhysicalParams {
            m,
            n,
            s: parse_block("S", &raw.s, m, m)?,
            c_minus: optional("Cminus", &raw.c_minus, m, n)?,
            c_plus: optional("Cplus", &raw.c_plus, m, n)?,
            omega_minus: optional("OmegaMinus", &raw.omega_minus, n, n)?,
            omega_plus: optional("OmegaPlus", &raw.omega_plus, n, n)?,
        };
        Ok(p)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let raw = RawParams {
            m: self.m,
            n: self.n,
            s: matrix_to_json(&self.s),
            c_minus: matrix_to_json(&self.c_minus),
            c_plus: matrix_to_json(&self.c_plus),
            omega_minus: matrix_to_json(&self.omega_minus),
            omega_plus: matrix_to_json(&self.omega_plus),
        };
        serde_json::to_value(raw).expect("params serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cavity_json_round_trip() {
        let p = PhysicalParams::cavity(2.0);
        let text = p.to_json_value().to_string();
        let q = PhysicalParams::from_json_str(&text).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn static_device_json_may_omit_dynamics() {
        let text = r#"{"m":2,"n":0,"S":[[{"re":1,"im":0},{"re":0,"im":0}],[{"re":0,"im":0},{"re":1,"im":0}]]}"#;
        let p = PhysicalParams::from_json_str(text).unwrap();
        assert_eq!(p.c_minus.shape(), (2, 0));
        p.validate(&Tolerances::default()).unwrap();
    }

    #[test]
    fn non_unitary_s_names_field() {
        let mut p = PhysicalParams::cavity(1.0);
        p.s[(0, 0)] = c(1.1, 0.0);
        let err = p.validate(&Tolerances::default()).unwrap_err().to_string();
        assert!(err.starts_with("S: not unitary"), "{err}");
    }

    #[test]
    fn non_hermitian_omega_rejected() {
        let mut p = PhysicalParams::cavity(1.0);
        p.omega_minus[(0, 0)] = c(0.0, 1.0);
        let err = p.validate(&Tolerances::default()).unwrap_err().to_string();
        assert!(err.starts_with("OmegaMinus"), "{err}");
    }

    #[test]
    fn wrong_shape_reports_field() {
        let text = r#"{"m":1,"n":1,"S":[[{"re":1,"im":0}]],"Cminus":[[{"re":1,"im":0},{"re":1,"im":0}]]}"#;
        let err = PhysicalParams::from_json_str(text).unwrap_err().to_string();
        assert!(err.starts_with("Cminus"), "{err}");
    }

    #[test]
    fn passivity() {
        let tol = Tolerances::default();
        assert!(PhysicalParams::cavity(1.0).is_passive(&tol));
        assert!(!PhysicalParams::amplifier(1.0, 0.2).is_passive(&tol));
        assert!(PhysicalParams::beamsplitter(0.5).is_passive(&tol));
    }
}

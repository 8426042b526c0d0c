//! JSON encoding of complex scalars and matrices as `{"re": .., "im": ..}` objects.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{CMat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for JsonComplex {
    fn from(z: C64) -> Self {
        JsonComplex { re: z.re, im: z.im }
    }
}

impl From<JsonComplex> for C64 {
    fn from(z: JsonComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

/// Row-major nested-array form of a complex matrix.
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn matrix_to_json(x: &CMat) -> JsonMatrix {
    (0..x.nrows())
        .map(|i| (0..x.ncols()).map(|j| x[(i, j)].into()).collect())
        .collect()
}

/// Returns `Err(description)` on ragged rows.
pub fn matrix_from_json(rows: &JsonMatrix, expected_cols: Option<usize>) -> Result<CMat, String> {
    let r = rows.len();
    let k = match (rows.first(), expected_cols) {
        (Some(row), _) => row.len(),
        (None, Some(k)) => k,
        (None, None) => 0,
    };
    for (i, row) in rows.iter().enumerate() {
        if row.len() != k {
            return Err(format!("row {} has {} entries, expected {}", i, row.len(), k));
        }
    }
    Ok(CMat::from_fn(r, k, |i, j| rows[i][j].into()))
}

pub fn serialize_matrix<S: Serializer>(x: &CMat, s: S) -> Result<S::Ok, S::Error> {
    matrix_to_json(x).serialize(s)
}

pub fn deserialize_matrix<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
    let rows = JsonMatrix::deserialize(d)?;
    matrix_from_json(&rows, None).map_err(serde::de::Error::custom)
}

pub fn serialize_complex<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
    JsonComplex::from(*z).serialize(s)
}

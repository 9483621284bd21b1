//! JSON encoding of complex matrices: nested row-major arrays of `[re, im]`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::linalg::{c, CMat, CVec};
use crate::error::{Error, Result};

pub type EncodedMatrix = Vec<Vec<[f64; 2]>>;

pub fn encode_matrix(m: &CMat) -> EncodedMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn decode_matrix(rows: &EncodedMatrix) -> Result<CMat> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    if let Some(bad) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::Encoding(format!(
            "row {bad} has {} entries, expected {ncols}",
            rows[bad].len()
        )));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Encoding("non-finite entry".into()));
    }
    Ok(CMat::from_fn(nrows, ncols, |i, j| {
        c(rows[i][j][0], rows[i][j][1])
    }))
}

pub fn encode_vector(v: &CVec) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn decode_vector(entries: &[[f64; 2]]) -> Result<CVec> {
    if entries.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Encoding("non-finite entry".into()));
    }
    Ok(CVec::from_iterator(
        entries.len(),
        entries.iter().map(|e| c(e[0], e[1])),
    ))
}

/// `#[serde(with = "matrix")]` adapter.
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        encode_matrix(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let rows = EncodedMatrix::deserialize(d)?;
        decode_matrix(&rows).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "matrix_list")]` adapter for `Vec<CMat>`.
pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
        ms.iter().map(encode_matrix).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<CMat>, D::Error> {
        let all = Vec::<EncodedMatrix>::deserialize(d)?;
        all.iter()
            .map(|m| decode_matrix(m).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// `#[serde(with = "vector")]` adapter.
pub mod vector {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVec, s: S) -> std::result::Result<S::Ok, S::Error> {
        encode_vector(v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CVec, D::Error> {
        let e = Vec::<[f64; 2]>::deserialize(d)?;
        decode_vector(&e).map_err(serde::de::Error::custom)
    }
}

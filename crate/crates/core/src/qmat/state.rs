use serde::{Deserialize, Serialize};

use super::json;
use super::linalg::{self, re, CMat, CVec};
use crate::error::{Error, Result};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const NEGATIVE_EIGEN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;

/// Ordered tensor factorization of a Hilbert space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemShape {
    dims: Vec<usize>,
}

impl SubsystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidShape {
                dims,
                dim: 0,
            });
        }
        Ok(Self { dims })
    }

    pub fn bipartite(a: usize, b: usize) -> Self {
        Self::new(vec![a, b]).expect("positive dims")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if self.total() != dim {
            return Err(Error::InvalidShape {
                dims: self.dims.clone(),
                dim,
            });
        }
        Ok(())
    }

    /// Shape of the kept factors, in the order given.
    pub fn select(&self, keep: &[usize]) -> Result<Self> {
        linalg::check_factors(&self.dims, self.total(), keep)?;
        Self::new(keep.iter().map(|&k| self.dims[k]).collect())
    }
}

/// Trace-one positive semidefinite Hermitian matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "json::EncodedMatrix", into = "json::EncodedMatrix")]
pub struct DensityOperator {
    matrix: CMat,
}

impl TryFrom<json::EncodedMatrix> for DensityOperator {
    type Error = Error;
    fn try_from(rows: json::EncodedMatrix) -> Result<Self> {
        Self::new(json::decode_matrix(&rows)?)
    }
}

impl From<DensityOperator> for json::EncodedMatrix {
    fn from(d: DensityOperator) -> Self {
        json::encode_matrix(&d.matrix)
    }
}

impl DensityOperator {
    /// Validate and wrap `matrix`. Eigenvalues in `[-1e-10, 0)` are clipped to
    /// zero and the spectrum renormalized; anything more negative is rejected.
    pub fn new(matrix: CMat) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::NotSquare {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let h = linalg::hermitian_part(&matrix);
        let tr = linalg::trace(&h).re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace(tr));
        }
        let vals = linalg::eigvalsh(&h);
        let min = vals.last().cloned().unwrap_or(0.0);
        if min < -NEGATIVE_EIGEN_TOL {
            return Err(Error::NotPositive(min));
        }
        if min < 0.0 {
            let e = linalg::eigh(&h);
            let total: f64 = e.values.iter().map(|l| l.max(0.0)).sum();
            return Ok(Self {
                matrix: e.map(|l| l.max(0.0) / total),
            });
        }
        Ok(Self { matrix: h })
    }

    /// Normalize a nonzero PSD matrix to unit trace, then validate.
    pub fn from_unnormalized(matrix: CMat) -> Result<Self> {
        let tr = linalg::trace(&matrix).re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::InvalidTrace(tr));
        }
        Self::new(matrix / re(tr))
    }

    /// Wrap a matrix that is a state up to rounding (the output of a
    /// trace-preserving map applied to a valid state). Hermitizes and fixes
    /// the trace; no spectral check.
    pub(crate) fn from_trusted(matrix: CMat) -> Self {
        let h = linalg::hermitian_part(&matrix);
        let tr = linalg::trace(&h).re;
        let h = if tr > 0.0 { h / re(tr) } else { h };
        Self { matrix: h }
    }

    /// Random state of the given rank: a normalized Wishart matrix.
    pub fn random<R: rand::Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Self {
        let m = linalg::random_psd(dim, rank.clamp(1, dim), rng);
        Self::from_trusted(m)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMat::identity(dim, dim) / re(dim as f64),
        }
    }

    /// `|i⟩⟨i|` in the standard basis.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut m = CMat::zeros(dim, dim);
        m[(i, i)] = re(1.0);
        Self { matrix: m }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(CMat::from_diagonal(&CVec::from_iterator(
            probs.len(),
            probs.iter().map(|&p| re(p)),
        )))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn eigen(&self) -> linalg::Eigh {
        linalg::eigh(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_product(&self.matrix, &self.matrix).re
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            matrix: linalg::tensor(&self.matrix, &other.matrix),
        }
    }

    pub fn tensor_power(&self, n: usize) -> Self {
        let mut out = CMat::identity(1, 1);
        for _ in 0..n {
            out = out.kronecker(&self.matrix);
        }
        Self { matrix: out }
    }

    /// `U ρ U†` for a unitary (or isometry) `u`.
    pub fn conjugate(&self, u: &CMat) -> Result<Self> {
        if u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: u.ncols(),
            });
        }
        Ok(Self::from_trusted(u * &self.matrix * u.adjoint()))
    }

    pub fn partial_trace(&self, shape: &SubsystemShape, keep: &[usize]) -> Result<Self> {
        shape.check(self.dim())?;
        let m = linalg::partial_trace(&self.matrix, shape.dims(), keep)?;
        Ok(Self::from_trusted(m))
    }

    /// Convex combination `Σ w_i ρ_i`.
    pub fn mixture(weights: &[f64], states: &[Self]) -> Result<Self> {
        let d = states
            .first()
            .map(|s| s.dim())
            .ok_or_else(|| Error::InvalidDistribution("empty mixture".into()))?;
        let mut m = CMat::zeros(d, d);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: s.dim(),
                });
            }
            m += s.matrix() * re(*w);
        }
        Self::new(m)
    }
}

/// Unit vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct PureState {
    vector: CVec,
}

impl TryFrom<Vec<[f64; 2]>> for PureState {
    type Error = Error;
    fn try_from(e: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(json::decode_vector(&e)?)
    }
}

impl From<PureState> for Vec<[f64; 2]> {
    fn from(p: PureState) -> Self {
        json::encode_vector(&p.vector)
    }
}

impl PureState {
    pub fn new(vector: CVec) -> Result<Self> {
        let norm = vector.norm();
        if vector.is_empty() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidNorm(norm));
        }
        Ok(Self { vector })
    }

    pub fn normalized(vector: CVec) -> Result<Self> {
        let norm = vector.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidNorm(norm));
        }
        Ok(Self {
            vector: vector / re(norm),
        })
    }

    pub(crate) fn from_trusted(vector: CVec) -> Self {
        let norm = vector.norm();
        Self {
            vector: vector / re(norm),
        }
    }

    /// Haar-random unit vector.
    pub fn random<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self::from_trusted(linalg::random_ginibre(dim, 1, rng).column(0).into_owned())
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = CVec::zeros(dim);
        v[i] = re(1.0);
        Self { vector: v }
    }

    /// `|Φ^κ⟩ = κ^{-1/2} Σ_k |k⟩|k⟩`.
    pub fn maximally_entangled(kappa: usize) -> Self {
        let mut v = CVec::zeros(kappa * kappa);
        let a = re(1.0 / (kappa as f64).sqrt());
        for k in 0..kappa {
            v[k * kappa + k] = a;
        }
        Self { vector: v }
    }

    pub fn dim(&self) -> usize {
        self.vector.len()
    }

    pub fn vector(&self) -> &CVec {
        &self.vector
    }

    pub fn into_vector(self) -> CVec {
        self.vector
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            matrix: linalg::projector(&self.vector),
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            vector: linalg::tensor_vec(&self.vector, &other.vector),
        }
    }

    pub fn reduced(&self, shape: &SubsystemShape, keep: &[usize]) -> Result<DensityOperator> {
        shape.check(self.dim())?;
        let m = linalg::reduced_from_vector(&self.vector, shape.dims(), keep)?;
        Ok(DensityOperator::from_trusted(m))
    }

    pub fn overlap(&self, other: &Self) -> num_complex::Complex64 {
        self.vector.dotc(&other.vector)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::linalg::c;

    #[test]
    fn constructor_checks_invariants() {
        let half = CMat::identity(2, 2) * re(0.5);
        assert!(DensityOperator::new(half.clone()).is_ok());
        assert!(matches!(
            DensityOperator::new(half.clone() * re(2.0)),
            Err(Error::InvalidTrace(_))
        ));
        let mut nh = half.clone();
        nh[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(DensityOperator::new(nh), Err(Error::NotHermitian(_))));
        let neg = CMat::from_diagonal(&CVec::from_vec(vec![re(1.1), re(-0.1)]));
        assert!(matches!(DensityOperator::new(neg), Err(Error::NotPositive(_))));
    }

    #[test]
    fn tiny_negative_eigenvalues_are_clipped() {
        let m = CMat::from_diagonal(&CVec::from_vec(vec![re(1.0 + 5e-11), re(-5e-11)]));
        let d = DensityOperator::new(m).unwrap();
        let vals = d.eigenvalues();
        assert!(vals.iter().all(|&v| v >= 0.0));
        assert!((linalg::trace(d.matrix()).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn json_round_trip_validates() {
        let d = DensityOperator::maximally_mixed(2);
        let s = serde_json::to_string(&d).unwrap();
        let back: DensityOperator = serde_json::from_str(&s).unwrap();
        assert_eq!(back.matrix(), d.matrix());
        assert!(serde_json::from_str::<DensityOperator>("[[[1.0,0.0]],[[0.0,0.0]]]").is_err());
    }

    #[test]
    fn pure_state_norm() {
        assert!(PureState::new(CVec::from_vec(vec![re(1.0), re(1e-5)])).is_err());
        let phi = PureState::maximally_entangled(3);
        assert!((phi.vector().norm() - 1.0).abs() < 1e-15);
    }
}

//! Entropies in bits, classical-quantum informations and coherent information.

pub mod inequalities;

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::channel::{CQWiretapChannel, Ensemble, IsometricExtension, QuantumChannel};
use crate::error::{Error, Result};
use crate::qmat::{linalg, re, CMat, DensityOperator, SubsystemShape};

/// Eigenvalues at or below this contribute nothing to an entropy.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// `η(x) = −x log₂ x`, with `η(0) = 0`.
pub fn eta(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    let h: f64 = values
        .iter()
        .filter(|&&l| l > ENTROPY_CUTOFF)
        .map(|&l| eta(l))
        .sum();
    // No −0 in reports.
    h + 0.0
}

pub fn shannon(p: &[f64]) -> f64 {
    entropy_of_spectrum(p)
}

/// `H(ρ) = −Tr ρ log₂ ρ`.
pub fn von_neumann(rho: &DensityOperator) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues())
}

/// Entropy of a positive semidefinite matrix assumed to have unit trace.
pub fn matrix_entropy(m: &CMat) -> f64 {
    entropy_of_spectrum(&linalg::eigvalsh(m))
}

/// `χ = H(Σ p ρ_x) − Σ p H(ρ_x)`.
pub fn holevo_chi(ensemble: &Ensemble) -> f64 {
    let avg = von_neumann(&ensemble.average());
    let inner: f64 = ensemble
        .probs()
        .iter()
        .zip(ensemble.states())
        .map(|(p, s)| if *p > 0.0 { p * von_neumann(s) } else { 0.0 })
        .sum();
    avg - inner
}

/// A density operator on labelled tensor factors.
#[derive(Clone, Debug)]
pub struct LabeledState {
    state: DensityOperator,
    shape: SubsystemShape,
    labels: Vec<String>,
}

impl LabeledState {
    pub fn new(state: DensityOperator, shape: SubsystemShape, labels: Vec<String>) -> Result<Self> {
        shape.check(state.dim())?;
        if labels.len() != shape.len() {
            return Err(Error::InvalidShape {
                dims: shape.dims().to_vec(),
                dim: labels.len(),
            });
        }
        Ok(Self {
            state,
            shape,
            labels,
        })
    }

    pub fn state(&self) -> &DensityOperator {
        &self.state
    }

    pub fn shape(&self) -> &SubsystemShape {
        &self.shape
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    fn indices(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.labels
                    .iter()
                    .position(|l| l == n)
                    .ok_or_else(|| Error::UnknownFactor(n.to_string()))
            })
            .collect::<Result<_>>()?;
        idx.sort_unstable();
        idx.dedup();
        Ok(idx)
    }

    /// `H(names)`; the empty set has entropy 0.
    pub fn entropy(&self, names: &[&str]) -> Result<f64> {
        let idx = self.indices(names)?;
        if idx.is_empty() {
            return Ok(0.0);
        }
        let m = linalg::partial_trace(self.state.matrix(), self.shape.dims(), &idx)?;
        Ok(matrix_entropy(&m))
    }

    fn union<'a>(a: &[&'a str], b: &[&'a str]) -> Vec<&'a str> {
        let mut u = a.to_vec();
        u.extend_from_slice(b);
        u
    }

    /// `H(A|B) = H(AB) − H(B)`.
    pub fn conditional_entropy(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        Ok(self.entropy(&Self::union(a, b))? - self.entropy(b)?)
    }

    /// `I(A;B) = H(A) + H(B) − H(AB)`.
    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        Ok(self.entropy(a)? + self.entropy(b)? - self.entropy(&Self::union(a, b))?)
    }

    /// `I(A;B|C) = H(AC) + H(BC) − H(ABC) − H(C)`.
    pub fn conditional_mutual_information(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
        let ac = Self::union(a, c);
        let bc = Self::union(b, c);
        let abc = Self::union(&ac, b);
        Ok(self.entropy(&ac)? + self.entropy(&bc)? - self.entropy(&abc)? - self.entropy(c)?)
    }

    pub fn query(&self, q: &InfoQuery) -> Result<f64> {
        fn v(s: &[String]) -> Vec<&str> {
            s.iter().map(String::as_str).collect()
        }
        match q {
            InfoQuery::Entropy(a) => self.entropy(&v(a)),
            InfoQuery::Conditional(a, b) => self.conditional_entropy(&v(a), &v(b)),
            InfoQuery::Mutual(a, b) => self.mutual_information(&v(a), &v(b)),
            InfoQuery::ConditionalMutual(a, b, c) => {
                self.conditional_mutual_information(&v(a), &v(b), &v(c))
            }
        }
    }
}

/// Entropic query on a [`LabeledState`], each argument a set of labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InfoQuery {
    Entropy(Vec<String>),
    Conditional(Vec<String>, Vec<String>),
    Mutual(Vec<String>, Vec<String>),
    ConditionalMutual(Vec<String>, Vec<String>, Vec<String>),
}

/// Block-diagonal state `Σ_x p(x)|x⟩⟨x| ⊗ ρ_x` of an ensemble.
#[derive(Clone, Debug)]
pub struct CQState {
    ensemble: Ensemble,
}

fn block_diagonal(weights: &[f64], blocks: &[&CMat]) -> CMat {
    let d = blocks[0].nrows();
    let n = weights.len();
    let mut m = CMat::zeros(n * d, n * d);
    for (x, (w, b)) in weights.iter().zip(blocks).enumerate() {
        m.view_mut((x * d, x * d), (d, d)).copy_from(&(*b * re(*w)));
    }
    m
}

impl CQState {
    pub fn new(ensemble: Ensemble) -> Self {
        Self { ensemble }
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    /// Factors `X, Q`, or `T, X, Q` when the ensemble has a Markov prefix.
    pub fn to_labeled(&self) -> LabeledState {
        let e = &self.ensemble;
        let nx = e.len();
        let d = e.dim();
        let blocks: Vec<&CMat> = e.states().iter().map(|s| s.matrix()).collect();
        match e.prefix() {
            None => {
                let m = block_diagonal(e.probs(), &blocks);
                LabeledState {
                    state: DensityOperator::from_trusted(m),
                    shape: SubsystemShape::bipartite(nx, d),
                    labels: vec!["X".into(), "Q".into()],
                }
            }
            Some(prefix) => {
                let nt = prefix.p_t.len();
                let mut weights = Vec::with_capacity(nt * nx);
                let mut all = Vec::with_capacity(nt * nx);
                for (pt, row) in prefix.p_t.iter().zip(&prefix.transition) {
                    for (x, px) in row.iter().enumerate() {
                        weights.push(pt * px);
                        all.push(blocks[x]);
                    }
                }
                let m = block_diagonal(&weights, &all);
                LabeledState {
                    state: DensityOperator::from_trusted(m),
                    shape: SubsystemShape::new(vec![nt, nx, d]).expect("positive dims"),
                    labels: vec!["T".into(), "X".into(), "Q".into()],
                }
            }
        }
    }
}

/// `Σ_x p(x)|x⟩⟨x| ⊗ ρ_x^{QE}` with factors `X, Q, E`.
pub fn wiretap_ehs(wiretap: &CQWiretapChannel, probs: &[f64]) -> Result<LabeledState> {
    if probs.len() != wiretap.alphabet_size() {
        return Err(Error::DimensionMismatch {
            expected: wiretap.alphabet_size(),
            got: probs.len(),
        });
    }
    let blocks: Vec<&CMat> = wiretap.joint().iter().map(|s| s.matrix()).collect();
    let m = block_diagonal(probs, &blocks);
    LabeledState::new(
        DensityOperator::from_trusted(m),
        SubsystemShape::new(vec![probs.len(), wiretap.dim_q(), wiretap.dim_e()])?,
        vec!["X".into(), "Q".into(), "E".into()],
    )
}

/// `I(X;Q) − I(X;E)` from the marginal Holevo quantities.
pub fn wiretap_rate(wiretap: &CQWiretapChannel, probs: &[f64]) -> Result<f64> {
    let bob = holevo_chi(&wiretap.bob_ensemble(probs)?);
    let eve = holevo_chi(&wiretap.eve_ensemble(probs)?);
    Ok(bob - eve)
}

/// Environment output `[Tr(A_i m A_j†)]_{ij}` of a Kraus family.
pub fn environment_matrix(chan: &QuantumChannel, m: &CMat) -> Result<CMat> {
    if m.nrows() != chan.dim_in() {
        return Err(Error::DimensionMismatch {
            expected: chan.dim_in(),
            got: m.nrows(),
        });
    }
    let k = chan.kraus().len();
    let images: Vec<CMat> = chan.kraus().iter().map(|a| a * m).collect();
    let mut out = CMat::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            // Tr(A_i m A_j†) = Σ_{q,c} (A_i m)[q,c] conj(A_j[q,c])
            let v: num_complex::Complex64 = images[i]
                .iter()
                .zip(chan.kraus()[j].iter())
                .map(|(x, y)| x * y.conj())
                .sum();
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    Ok(out)
}

/// `I_c(ρ, N) = H(ω^Q) − H(σ^E)` through the Kraus dilation.
pub fn coherent_information(rho: &DensityOperator, chan: &QuantumChannel) -> Result<f64> {
    let bob = chan.apply_matrix(rho.matrix())?;
    let eve = environment_matrix(chan, rho.matrix())?;
    Ok(matrix_entropy(&bob) - matrix_entropy(&eve))
}

/// `I_c` through an explicit isometric extension.
pub fn coherent_information_ext(rho: &DensityOperator, ext: &IsometricExtension) -> Result<f64> {
    let joint = ext.joint_state(rho)?;
    let shape = ext.output_shape();
    let bob = linalg::partial_trace(joint.matrix(), shape.dims(), &[0])?;
    let eve = linalg::partial_trace(joint.matrix(), shape.dims(), &[1])?;
    Ok(matrix_entropy(&bob) - matrix_entropy(&eve))
}

/// `ΔH(ρ^{RQ}) = H(ρ^Q) − H(ρ^{RQ})`, with `Q` the second factor.
pub fn delta_h(state: &DensityOperator, shape: &SubsystemShape) -> Result<f64> {
    if shape.len() != 2 {
        return Err(Error::InvalidShape {
            dims: shape.dims().to_vec(),
            dim: state.dim(),
        });
    }
    shape.check(state.dim())?;
    let q = linalg::partial_trace(state.matrix(), shape.dims(), &[1])?;
    Ok(matrix_entropy(&q) - von_neumann(state))
}

/// Named entropic results with digests of the inputs they came from.
#[derive(Clone, Debug, Default, Serialize)]
pub struct EntropicReport {
    pub values: BTreeMap<String, f64>,
    pub inputs: BTreeMap<String, String>,
}

impl EntropicReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(mut self, name: &str, v: f64) -> Result<Self> {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(format!("{name} is not finite")));
        }
        self.values.insert(name.to_string(), v);
        Ok(self)
    }

    /// Record the SHA-256 of the JSON form of an input.
    pub fn input<T: Serialize>(mut self, name: &str, item: &T) -> Self {
        let bytes = serde_json::to_vec(item).unwrap_or_default();
        self.inputs
            .insert(name.to_string(), hex::encode(Sha256::digest(&bytes)));
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{appendix_c, basis_projector};
    use crate::qmat::PureState;

    fn pi(idx: &[usize]) -> DensityOperator {
        DensityOperator::from_unnormalized(basis_projector(4, idx)).unwrap()
    }

    #[test]
    fn entropy_basics() {
        assert!(von_neumann(&DensityOperator::basis(3, 1)).abs() < 1e-12);
        assert!((von_neumann(&DensityOperator::maximally_mixed(8)) - 3.0).abs() < 1e-12);
        let p = [0.5, 0.25, 0.125, 0.125];
        let d = DensityOperator::diagonal(&p).unwrap();
        assert!((von_neumann(&d) - 1.75).abs() < 1e-12);
        assert!((shannon(&p) - 1.75).abs() < 1e-12);
    }

    #[test]
    fn holevo_orthogonal_and_identical() {
        let e = Ensemble::new(
            vec![0.5, 0.5],
            vec![DensityOperator::basis(2, 0), DensityOperator::basis(2, 1)],
        )
        .unwrap();
        assert!((holevo_chi(&e) - 1.0).abs() < 1e-12);
        let s = DensityOperator::maximally_mixed(2);
        let e = Ensemble::new(vec![0.3, 0.7], vec![s.clone(), s]).unwrap();
        assert!(holevo_chi(&e).abs() < 1e-12);
    }

    #[test]
    fn appendix_c_values() {
        let ch = appendix_c();
        assert!((coherent_information(&pi(&[0, 1]), &ch).unwrap() - 1.0).abs() < 1e-9);
        assert!((coherent_information(&pi(&[2, 3]), &ch).unwrap() + 1.0).abs() < 1e-9);
        let ext = ch.isometric_extension();
        assert!((coherent_information_ext(&pi(&[2, 3]), &ext).unwrap() + 1.0).abs() < 1e-9);
    }

    #[test]
    fn identity_channel_ic_is_entropy() {
        let ch = QuantumChannel::identity(3);
        let d = DensityOperator::diagonal(&[0.2, 0.3, 0.5]).unwrap();
        assert!((coherent_information(&d, &ch).unwrap() - von_neumann(&d)).abs() < 1e-10);
    }

    #[test]
    fn delta_h_pure_and_product() {
        let phi = PureState::maximally_entangled(2).density();
        let shape = SubsystemShape::bipartite(2, 2);
        assert!((delta_h(&phi, &shape).unwrap() - 1.0).abs() < 1e-12);
        let r = DensityOperator::diagonal(&[0.25, 0.75]).unwrap();
        let q = DensityOperator::diagonal(&[0.5, 0.5]).unwrap();
        let v = delta_h(&r.tensor(&q), &shape).unwrap();
        assert!((v + von_neumann(&r)).abs() < 1e-12);
    }

    #[test]
    fn unknown_factor_is_an_error() {
        let e = Ensemble::new(vec![1.0], vec![DensityOperator::basis(2, 0)]).unwrap();
        let s = CQState::new(e).to_labeled();
        assert!(matches!(s.entropy(&["B"]), Err(Error::UnknownFactor(_))));
    }
}

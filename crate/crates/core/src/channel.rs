//! Quantum channels as Kraus families, their isometric extensions, and
//! classical-quantum wiretap channels derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guard::{power, Guard};
use crate::qmat::{json, linalg, re, c, CMat, CVec, DensityOperator, PureState, SubsystemShape, RANK_TOL};

/// Completeness residual above which a Kraus family is rejected.
pub const KRAUS_TOL: f64 = 1e-8;
const ISOMETRY_TOL: f64 = 1e-10;
const PROB_TOL: f64 = 1e-12;

/// `N(ρ) = Σ_i A_i ρ A_i†`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ChannelJson", into = "ChannelJson")]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMat>,
}

#[derive(Serialize, Deserialize)]
struct ChannelJson {
    dim_in: usize,
    dim_out: usize,
    #[serde(with = "json::matrix_list")]
    kraus: Vec<CMat>,
}

impl TryFrom<ChannelJson> for QuantumChannel {
    type Error = Error;
    fn try_from(j: ChannelJson) -> Result<Self> {
        let chan = Self::from_kraus(j.kraus)?;
        if chan.dim_in != j.dim_in || chan.dim_out != j.dim_out {
            return Err(Error::Encoding(format!(
                "declared dims {}->{} but Kraus operators are {}x{}",
                j.dim_in, j.dim_out, chan.dim_out, chan.dim_in
            )));
        }
        Ok(chan)
    }
}

impl From<QuantumChannel> for ChannelJson {
    fn from(c: QuantumChannel) -> Self {
        Self {
            dim_in: c.dim_in,
            dim_out: c.dim_out,
            kraus: c.kraus,
        }
    }
}

/// Largest entry of `Σ A†A − I` in Frobenius norm.
pub fn completeness_residual(kraus: &[CMat]) -> f64 {
    let d = kraus[0].ncols();
    let mut acc = -CMat::identity(d, d);
    for a in kraus {
        acc += a.adjoint() * a;
    }
    acc.norm()
}

impl QuantumChannel {
    pub fn from_kraus(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus family".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidParameter("zero-dimensional Kraus operator".into()));
        }
        for a in &kraus {
            if a.shape() != (dim_out, dim_in) {
                return Err(Error::DimensionMismatch {
                    expected: dim_out * dim_in,
                    got: a.nrows() * a.ncols(),
                });
            }
        }
        let residual = completeness_residual(&kraus);
        if residual > KRAUS_TOL {
            return Err(Error::NotTracePreserving(residual));
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
        })
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            dim_in: d,
            dim_out: d,
            kraus: vec![CMat::identity(d, d)],
        }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn residual(&self) -> f64 {
        completeness_residual(&self.kraus)
    }

    fn check_input(&self, d: usize) -> Result<()> {
        if d != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                got: d,
            });
        }
        Ok(())
    }

    /// Action on an arbitrary operator.
    pub fn apply_matrix(&self, m: &CMat) -> Result<CMat> {
        self.check_input(m.nrows())?;
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for a in &self.kraus {
            out += a * m * a.adjoint();
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        Ok(DensityOperator::from_trusted(self.apply_matrix(rho.matrix())?))
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &QuantumChannel) -> Result<QuantumChannel> {
        if after.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch {
                expected: self.dim_out,
                got: after.dim_in,
            });
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * after.kraus.len());
        for b in &after.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        Ok(Self {
            dim_in: self.dim_in,
            dim_out: after.dim_out,
            kraus,
        })
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &QuantumChannel) -> QuantumChannel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(a.kronecker(b));
            }
        }
        Self {
            dim_in: self.dim_in * other.dim_in,
            dim_out: self.dim_out * other.dim_out,
            kraus,
        }
    }

    /// `N^⊗n`. The guard bounds the joint output-times-environment dimension
    /// `(dim_out · kraus)^n` of the resulting dilation.
    pub fn tensor_power(&self, n: usize, guard: &Guard) -> Result<QuantumChannel> {
        if n == 0 {
            return Err(Error::InvalidParameter("tensor power needs n >= 1".into()));
        }
        guard.check_dim("channel input dimension", power(self.dim_in, n))?;
        guard.check_dim(
            "channel dilation dimension",
            power(self.dim_out * self.kraus.len(), n),
        )?;
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self);
        }
        Ok(out)
    }

    /// Random channel with `kraus` operators, cut from a Haar-random isometry.
    pub fn random<R: rand::Rng + ?Sized>(dim_in: usize, dim_out: usize, kraus: usize, rng: &mut R) -> Self {
        let v = linalg::random_isometry(dim_out * kraus, dim_in, rng);
        IsometricExtension {
            dim_in,
            dim_q: dim_out,
            dim_e: kraus,
            isometry: v,
        }
        .to_channel()
        .expect("isometry yields a complete Kraus family")
    }

    pub fn isometric_extension(&self) -> IsometricExtension {
        let k = self.kraus.len();
        let mut v = CMat::zeros(self.dim_out * k, self.dim_in);
        for (i, a) in self.kraus.iter().enumerate() {
            for q in 0..self.dim_out {
                for col in 0..self.dim_in {
                    v[(q * k + i, col)] = a[(q, col)];
                }
            }
        }
        IsometricExtension {
            dim_in: self.dim_in,
            dim_q: self.dim_out,
            dim_e: k,
            isometry: v,
        }
    }
}

/// Stinespring isometry `V: in → Q ⊗ E`, Bob's factor first.
#[derive(Clone, Debug, Serialize)]
pub struct IsometricExtension {
    dim_in: usize,
    dim_q: usize,
    dim_e: usize,
    #[serde(with = "json::matrix")]
    isometry: CMat,
}

impl IsometricExtension {
    pub fn new(isometry: CMat, dim_q: usize, dim_e: usize) -> Result<Self> {
        if isometry.nrows() != dim_q * dim_e {
            return Err(Error::InvalidShape {
                dims: vec![dim_q, dim_e],
                dim: isometry.nrows(),
            });
        }
        let d = isometry.ncols();
        let residual = (isometry.adjoint() * &isometry - CMat::identity(d, d)).norm();
        if residual > ISOMETRY_TOL {
            return Err(Error::NotIsometry(residual));
        }
        Ok(Self {
            dim_in: d,
            dim_q,
            dim_e,
            isometry,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_q(&self) -> usize {
        self.dim_q
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn isometry(&self) -> &CMat {
        &self.isometry
    }

    pub fn output_shape(&self) -> SubsystemShape {
        SubsystemShape::bipartite(self.dim_q, self.dim_e)
    }

    /// `V ρ V†` on `Q ⊗ E`.
    pub fn joint_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                got: rho.dim(),
            });
        }
        rho.conjugate(&self.isometry)
    }

    pub fn bob_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.joint_state(rho)?.partial_trace(&self.output_shape(), &[0])
    }

    pub fn eve_state(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.joint_state(rho)?.partial_trace(&self.output_shape(), &[1])
    }

    /// Another dilation of the same channel: `(I ⊗ W) V` for an isometry `W`
    /// on the environment.
    pub fn with_environment_isometry(&self, w: &CMat) -> Result<IsometricExtension> {
        if w.ncols() != self.dim_e {
            return Err(Error::DimensionMismatch {
                expected: self.dim_e,
                got: w.ncols(),
            });
        }
        let full = CMat::identity(self.dim_q, self.dim_q).kronecker(w);
        Self::new(full * &self.isometry, self.dim_q, w.nrows())
    }

    /// Kraus family `A_i = (I ⊗ ⟨i|) V`.
    pub fn to_channel(&self) -> Result<QuantumChannel> {
        let kraus = (0..self.dim_e)
            .map(|i| {
                CMat::from_fn(self.dim_q, self.dim_in, |q, col| {
                    self.isometry[(q * self.dim_e + i, col)]
                })
            })
            .collect();
        QuantumChannel::from_kraus(kraus)
    }
}

/// Eve's output `σ^E = Tr_Q V ρ V†`.
pub fn complementary_state(
    ext: &IsometricExtension,
    rho: &DensityOperator,
) -> Result<DensityOperator> {
    ext.eve_state(rho)
}

fn pauli(i: usize) -> CMat {
    let (o, z, im) = (re(1.0), re(0.0), c(0.0, 1.0));
    match i {
        0 => CMat::from_row_slice(2, 2, &[o, z, z, o]),
        1 => CMat::from_row_slice(2, 2, &[z, o, o, z]),
        2 => CMat::from_row_slice(2, 2, &[z, -im, im, z]),
        _ => CMat::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// The four-dimensional channel acting as the identity on span{|1⟩,|2⟩}
/// and completely depolarizing span{|3⟩,|4⟩}, with the two blocks
/// decohered from each other.
pub fn appendix_c() -> QuantumChannel {
    let mut kraus = Vec::with_capacity(5);
    let mut p12 = CMat::zeros(4, 4);
    p12[(0, 0)] = re(1.0);
    p12[(1, 1)] = re(1.0);
    kraus.push(p12);
    for i in 0..4 {
        let p = pauli(i) * re(0.5);
        let mut a = CMat::zeros(4, 4);
        a.view_mut((2, 2), (2, 2)).copy_from(&p);
        kraus.push(a);
    }
    QuantumChannel::from_kraus(kraus).expect("complete by construction")
}

/// Completely depolarizing channel `ρ ↦ Tr(ρ) I/d` via the `d²` Weyl operators.
pub fn depolarizing(d: usize) -> QuantumChannel {
    let omega = std::f64::consts::TAU / d as f64;
    let scale = 1.0 / d as f64;
    let mut kraus = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            // X^a Z^b, scaled by 1/d.
            let mut w = CMat::zeros(d, d);
            for j in 0..d {
                let phase = omega * (b * j) as f64;
                w[((j + a) % d, j)] = c(phase.cos(), phase.sin()) * re(scale);
            }
            kraus.push(w);
        }
    }
    QuantumChannel::from_kraus(kraus).expect("complete by construction")
}

/// Parse an example name: `appendix-c`, `depolarizing(d)`, `identity(d)`.
pub fn make_example(name: &str) -> Result<QuantumChannel> {
    let name = name.trim();
    if name.eq_ignore_ascii_case("appendix-c") {
        return Ok(appendix_c());
    }
    let parse = |prefix: &str| -> Option<usize> {
        let rest = name.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
        rest.trim().parse().ok().filter(|&d: &usize| d >= 1)
    };
    if let Some(d) = parse("depolarizing") {
        return Ok(depolarizing(d));
    }
    if let Some(d) = parse("identity") {
        return Ok(QuantumChannel::identity(d));
    }
    Err(Error::UnknownExample(name.to_string()))
}

pub const EXAMPLE_NAMES: &[&str] = &["appendix-c", "depolarizing(d)", "identity(d)"];

fn check_distribution(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("empty".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return Err(Error::InvalidDistribution(format!("entry {p} is not a probability")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidDistribution(format!("sums to {total}")));
    }
    Ok(())
}

pub fn validate_distribution(probs: &[f64]) -> Result<()> {
    check_distribution(probs)
}

/// Classical pre-processing `T → X`: a distribution on `T` and the
/// transition `p(x|t)`, one row per `t`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MarkovPrefix {
    pub p_t: Vec<f64>,
    pub transition: Vec<Vec<f64>>,
}

/// `{p(x), ρ_x}`, optionally preceded by a classical channel `T → X`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Ensemble {
    probs: Vec<f64>,
    states: Vec<DensityOperator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prefix: Option<MarkovPrefix>,
}

impl Ensemble {
    pub fn new(probs: Vec<f64>, states: Vec<DensityOperator>) -> Result<Self> {
        check_distribution(&probs)?;
        if probs.len() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: probs.len(),
                got: states.len(),
            });
        }
        let d = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: s.dim(),
            });
        }
        Ok(Self {
            probs,
            states,
            prefix: None,
        })
    }

    /// Ensemble whose `p(x) = Σ_t p(t) p(x|t)` is induced by a Markov prefix.
    pub fn markov(p_t: Vec<f64>, transition: Vec<Vec<f64>>, states: Vec<DensityOperator>) -> Result<Self> {
        check_distribution(&p_t)?;
        if transition.len() != p_t.len() {
            return Err(Error::DimensionMismatch {
                expected: p_t.len(),
                got: transition.len(),
            });
        }
        for row in &transition {
            if row.len() != states.len() {
                return Err(Error::DimensionMismatch {
                    expected: states.len(),
                    got: row.len(),
                });
            }
            check_distribution(row)?;
        }
        let probs: Vec<f64> = (0..states.len())
            .map(|x| p_t.iter().zip(&transition).map(|(pt, row)| pt * row[x]).sum())
            .collect();
        let mut e = Self::new(probs, states)?;
        e.prefix = Some(MarkovPrefix { p_t, transition });
        Ok(e)
    }

    pub fn pure(probs: Vec<f64>, states: &[PureState]) -> Result<Self> {
        Self::new(probs, states.iter().map(|s| s.density()).collect())
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }

    pub fn prefix(&self) -> Option<&MarkovPrefix> {
        self.prefix.as_ref()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn average(&self) -> DensityOperator {
        let d = self.dim();
        let mut m = CMat::zeros(d, d);
        for (p, s) in self.probs.iter().zip(&self.states) {
            m += s.matrix() * re(*p);
        }
        DensityOperator::from_trusted(m)
    }
}

/// `x ↦ ρ_x^{QE}` with Bob's marginals `ω_x` and Eve's marginals `σ_x`.
#[derive(Clone, Debug, Serialize)]
pub struct CQWiretapChannel {
    dim_q: usize,
    dim_e: usize,
    joint: Vec<DensityOperator>,
    bob: Vec<DensityOperator>,
    eve: Vec<DensityOperator>,
}

impl CQWiretapChannel {
    pub fn from_joint(joint: Vec<DensityOperator>, dim_q: usize, dim_e: usize) -> Result<Self> {
        if joint.is_empty() {
            return Err(Error::InvalidParameter("empty alphabet".into()));
        }
        let shape = SubsystemShape::bipartite(dim_q, dim_e);
        let mut bob = Vec::with_capacity(joint.len());
        let mut eve = Vec::with_capacity(joint.len());
        for j in &joint {
            bob.push(j.partial_trace(&shape, &[0])?);
            eve.push(j.partial_trace(&shape, &[1])?);
        }
        Ok(Self {
            dim_q,
            dim_e,
            joint,
            bob,
            eve,
        })
    }

    /// Wiretap whose joint outputs are the products `ω_x ⊗ σ_x`.
    pub fn product(bob: Vec<DensityOperator>, eve: Vec<DensityOperator>) -> Result<Self> {
        if bob.len() != eve.len() || bob.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: bob.len(),
                got: eve.len(),
            });
        }
        let dim_q = bob[0].dim();
        let dim_e = eve[0].dim();
        if bob.iter().any(|b| b.dim() != dim_q) || eve.iter().any(|e| e.dim() != dim_e) {
            return Err(Error::InvalidParameter("alphabet states differ in dimension".into()));
        }
        let joint = bob.iter().zip(&eve).map(|(b, e)| b.tensor(e)).collect();
        Ok(Self {
            dim_q,
            dim_e,
            joint,
            bob,
            eve,
        })
    }

    pub fn alphabet_size(&self) -> usize {
        self.joint.len()
    }

    pub fn dim_q(&self) -> usize {
        self.dim_q
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn joint(&self) -> &[DensityOperator] {
        &self.joint
    }

    pub fn bob(&self) -> &[DensityOperator] {
        &self.bob
    }

    pub fn eve(&self) -> &[DensityOperator] {
        &self.eve
    }

    /// Bob-side ensemble `{p(x), ω_x}`.
    pub fn bob_ensemble(&self, probs: &[f64]) -> Result<Ensemble> {
        Ensemble::new(probs.to_vec(), self.bob.clone())
    }

    /// Eve-side ensemble `{p(x), σ_x}`.
    pub fn eve_ensemble(&self, probs: &[f64]) -> Result<Ensemble> {
        Ensemble::new(probs.to_vec(), self.eve.clone())
    }

    /// Restrict Bob's and Eve's spaces to the supports of the averaged
    /// marginals over symbols with positive probability. Symbols with zero
    /// probability are kept only if they fit inside those supports.
    ///
    /// The restriction is an isometric change of basis on each side, so every
    /// entropy, fidelity and trace distance computed on the result equals the
    /// one on the original channel.
    pub fn compress(&self, probs: &[f64]) -> Result<CompressedWiretap> {
        check_distribution(probs)?;
        if probs.len() != self.alphabet_size() {
            return Err(Error::DimensionMismatch {
                expected: self.alphabet_size(),
                got: probs.len(),
            });
        }
        let support = |states: &[DensityOperator], d: usize| -> CMat {
            let mut m = CMat::zeros(d, d);
            for (p, s) in probs.iter().zip(states) {
                if *p > 0.0 {
                    m += s.matrix();
                }
            }
            let e = linalg::eigh(&m);
            let r = e.values.iter().filter(|&&l| l > RANK_TOL).count().max(1);
            e.vectors.columns(0, r).into_owned()
        };
        let wq = support(&self.bob, self.dim_q);
        let we = support(&self.eve, self.dim_e);
        let w = wq.kronecker(&we);
        let joint = self
            .joint
            .iter()
            .map(|j| DensityOperator::from_trusted(w.adjoint() * j.matrix() * &w))
            .collect();
        let channel = Self::from_joint(joint, wq.ncols(), we.ncols())?;
        Ok(CompressedWiretap {
            channel,
            bob_isometry: wq,
            eve_isometry: we,
        })
    }
}

/// A wiretap channel restricted to output supports, with the isometries
/// mapping the reduced spaces back into the original ones.
#[derive(Clone, Debug)]
pub struct CompressedWiretap {
    pub channel: CQWiretapChannel,
    pub bob_isometry: CMat,
    pub eve_isometry: CMat,
}

/// Push an input alphabet through a channel dilation:
/// `ρ_x^{QE} = V ρ_x V†`.
pub fn wiretap_from_alphabet(
    ext: &IsometricExtension,
    states: &[DensityOperator],
    probs: &[f64],
) -> Result<(CQWiretapChannel, Ensemble)> {
    let ensemble = Ensemble::new(probs.to_vec(), states.to_vec())?;
    let joint = states
        .iter()
        .map(|s| ext.joint_state(s))
        .collect::<Result<Vec<_>>>()?;
    let wiretap = CQWiretapChannel::from_joint(joint, ext.dim_q(), ext.dim_e())?;
    Ok((wiretap, ensemble))
}

/// Eigen-decomposition `ρ = Σ_x p(x)|φ_x⟩⟨φ_x|` restricted to positive
/// eigenvalues, in the canonical eigenbasis.
pub fn eigen_alphabet(rho: &DensityOperator) -> (Vec<f64>, Vec<PureState>) {
    let e = rho.eigen();
    let mut probs = Vec::new();
    let mut states = Vec::new();
    for (i, &l) in e.values.iter().enumerate() {
        if l > RANK_TOL {
            probs.push(l);
            states.push(PureState::from_trusted(e.vector(i)));
        }
    }
    let total: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= total;
    }
    (probs, states)
}

/// Projector onto span{|i⟩ : i ∈ idx} in dimension `d`.
pub fn basis_projector(d: usize, idx: &[usize]) -> CMat {
    let mut v = CVec::zeros(d);
    for &i in idx {
        v[i] = re(1.0);
    }
    CMat::from_diagonal(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{trace_norm, DensityOperator};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pi(idx: &[usize]) -> DensityOperator {
        DensityOperator::from_unnormalized(basis_projector(4, idx)).unwrap()
    }

    #[test]
    fn rejects_incomplete_kraus() {
        let half = CMat::identity(2, 2) * re(0.5);
        assert!(matches!(
            QuantumChannel::from_kraus(vec![half]),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn appendix_c_action() {
        let ch = appendix_c();
        assert!(ch.residual() <= 1e-12);
        let out = ch.apply(&pi(&[0, 1])).unwrap();
        assert!(trace_norm(&(out.matrix() - pi(&[0, 1]).matrix())) < 1e-12);
        let out = ch.apply(&DensityOperator::basis(4, 2)).unwrap();
        assert!(trace_norm(&(out.matrix() - pi(&[2, 3]).matrix())) < 1e-12);
    }

    #[test]
    fn depolarizing_outputs_maximally_mixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in [2, 3] {
            let ch = depolarizing(d);
            let rho = DensityOperator::from_unnormalized(linalg::random_psd(d, d, &mut rng)).unwrap();
            let out = ch.apply(&rho).unwrap();
            assert!((out.matrix() - DensityOperator::maximally_mixed(d).matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn extension_reproduces_channel() {
        let ch = appendix_c();
        let ext = ch.isometric_extension();
        assert_eq!(ext.dim_e(), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = DensityOperator::from_unnormalized(linalg::random_psd(4, 4, &mut rng)).unwrap();
        let a = ext.bob_state(&rho).unwrap();
        let b = ch.apply(&rho).unwrap();
        assert!(trace_norm(&(a.matrix() - b.matrix())) < 1e-10);
        let back = ext.to_channel().unwrap();
        assert!(trace_norm(&(back.apply(&rho).unwrap().matrix() - b.matrix())) < 1e-10);
    }

    #[test]
    fn identity_extension_is_trivial() {
        let ext = QuantumChannel::identity(3).isometric_extension();
        assert_eq!(ext.dim_e(), 1);
        assert_eq!(ext.isometry(), &CMat::identity(3, 3));
    }

    #[test]
    fn example_names() {
        assert_eq!(make_example("identity(2)").unwrap().kraus().len(), 1);
        assert_eq!(make_example("depolarizing(3)").unwrap().kraus().len(), 9);
        assert!(matches!(make_example("amplitude(2)"), Err(Error::UnknownExample(_))));
        assert!(make_example("identity(0)").is_err());
    }

    #[test]
    fn tensor_power_guard() {
        let g = Guard::default();
        let ch = appendix_c();
        assert_eq!(ch.tensor_power(2, &g).unwrap().kraus().len(), 25);
        assert!(matches!(ch.tensor_power(3, &g), Err(Error::GuardExceeded { .. })));
    }

    #[test]
    fn json_round_trip() {
        let ch = appendix_c();
        let s = serde_json::to_string(&ch).unwrap();
        let back = QuantumChannel::from_json(&s).unwrap();
        assert_eq!(back.kraus(), ch.kraus());
        assert!(QuantumChannel::from_json(&s[..s.len() / 2]).is_err());
    }

    #[test]
    fn compression_keeps_marginal_spectra() {
        let ch = appendix_c();
        let ext = ch.isometric_extension();
        let states = vec![DensityOperator::basis(4, 0), DensityOperator::basis(4, 2)];
        let (w, _) = wiretap_from_alphabet(&ext, &states, &[0.5, 0.5]).unwrap();
        let cw = w.compress(&[0.5, 0.5]).unwrap();
        assert_eq!(cw.channel.dim_q(), 3);
        assert_eq!(cw.channel.dim_e(), 3);
        for x in 0..2 {
            let a = w.eve()[x].eigenvalues();
            let b = cw.channel.eve()[x].eigenvalues();
            for (u, v) in a.iter().zip(&b) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }
}

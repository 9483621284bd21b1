//! Entanglement generation from a private code: coherent superpositions of
//! the codewords in each row, Bob's measurement run as an isometry, and
//! Uhlmann unitaries that decouple Eve.
//!
//! The protocol is simulated with pure vectors on Bob's and Eve's restricted
//! n-fold spaces. Factor orders: `[Q, E]` for channel outputs and
//! `[B, Q, B′, E]` after the measurement isometry, where `B` holds the row
//! index k and `B′` the column index m.

use serde::Serialize;

use super::{PackingSetup, PrivateCode};
use crate::channel::{eigen_alphabet, QuantumChannel};
use crate::error::{Error, Result};
use crate::guard::{power, Guard};
use crate::qmat::{
    c, linalg, re, uhlmann_unitary, CMat, CVec, DensityOperator, PureState, SubsystemShape, C64,
    RANK_TOL,
};
use crate::typicality::Sequence;

#[derive(Clone, Debug, Serialize)]
pub struct EntGenCode {
    pub n: usize,
    pub kappa: usize,
    pub mu: usize,
    pub grid: Vec<Vec<Sequence>>,
    /// Chosen Fourier index `s ∈ {1, …, μ}` per row.
    pub fourier_index: Vec<usize>,
    /// `|⟨χ̂_s|ζ̂_s⟩|` at the chosen index, per row.
    pub fourier_overlap: Vec<f64>,
    /// `γ_km = 2π (m+1) s_k / μ`.
    pub phases: Vec<Vec<f64>>,
    /// `δ_km = γ_km + θ_{s_k}`.
    pub decoder_phases: Vec<Vec<f64>>,
    /// Input dimension of one channel use.
    pub dim_in: usize,
    /// Restricted n-fold dimensions of Bob's and Eve's outputs.
    pub dim_q: usize,
    pub dim_e: usize,
    #[serde(skip)]
    codewords: Vec<CVec>,
    #[serde(skip)]
    product_codewords: Vec<Vec<CVec>>,
    #[serde(skip)]
    isometry: CMat,
    /// `a[j][k] = (⟨j|_B V ⊗ I_E) |φ′_k⟩` on `[QB′, E]`.
    #[serde(skip)]
    blocks: Vec<Vec<CVec>>,
    #[serde(skip)]
    theta: CMat,
    #[serde(skip)]
    bob_isometry: CMat,
}

impl EntGenCode {
    /// Quantum codewords `|φ_k⟩ = μ^{-1/2} Σ_m e^{iγ_km} |φ_{u_km}⟩` on the
    /// n-fold input space.
    pub fn codewords(&self) -> &[CVec] {
        &self.codewords
    }

    /// `|Υ⟩ = κ^{-1/2} Σ_k |k⟩_A |φ_k⟩`.
    pub fn upsilon(&self) -> PureState {
        let d = self.codewords[0].len();
        let mut v = CVec::zeros(self.kappa * d);
        let a = re(1.0 / (self.kappa as f64).sqrt());
        for (k, w) in self.codewords.iter().enumerate() {
            v.rows_mut(k * d, d).copy_from(&(w * a));
        }
        PureState::from_trusted(v)
    }

    /// Measurement isometry `V = Σ_{k,m} |k⟩_B ⊗ √Y_km ⊗ |m⟩_{B′}`.
    pub fn isometry(&self) -> &CMat {
        &self.isometry
    }

    /// `Wq^{⊗n}`: Bob's restricted n-fold space inside the full output.
    pub fn bob_isometry(&self) -> &CMat {
        &self.bob_isometry
    }

    /// `(1/κ) Σ_k |φ_k⟩⟨φ_k|`.
    pub fn density(&self) -> CMat {
        let d = self.codewords[0].len();
        let mut m = CMat::zeros(d, d);
        for w in &self.codewords {
            m += linalg::outer(w, w);
        }
        m / re(self.kappa as f64)
    }

    /// The code density averaged over all Fourier indices of every row,
    /// `(1/κμ) Σ_{k,m} |φ_{u_km}⟩⟨φ_{u_km}|`.
    pub fn phase_averaged_density(&self) -> CMat {
        let d = self.codewords[0].len();
        let mut m = CMat::zeros(d, d);
        for row in &self.product_codewords {
            for w in row {
                m += linalg::outer(w, w);
            }
        }
        m / re((self.kappa * self.mu) as f64)
    }
}

/// `⊗_i v[x_i]`.
fn product_vector(single: &[CVec], seq: &[u32]) -> CVec {
    linalg::tensor_vec_all(seq.iter().map(|&x| &single[x as usize]))
}

/// Quantum code over the eigen-alphabet of `rho`, with phases chosen by the
/// Fourier argument: for each row the index `s` maximizing `|⟨χ̂_s|ζ̂_s⟩|`
/// (smallest `s` among ties), where `χ_m` is the measured codeword state and
/// `ζ_m` its closest state carrying the correct measurement outcome.
pub fn entgen_build(
    chan: &QuantumChannel,
    rho: &DensityOperator,
    private: &PrivateCode,
    guard: &Guard,
) -> Result<EntGenCode> {
    let (probs, states) = eigen_alphabet(rho);
    if probs.len() != private.probs.len()
        || probs.iter().zip(&private.probs).any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(Error::InvalidCode(
            "private code was not built over the eigen-decomposition of this state".into(),
        ));
    }
    let n = private.n;
    let (kappa, mu) = (private.kappa, private.mu);
    let cw = &private.compressed;
    let (dq1, de1) = (cw.channel.dim_q(), cw.channel.dim_e());
    guard.check_dim("codeword space", power(chan.dim_in(), n))?;
    guard.check_dim("Bob's n-fold space with registers", power(dq1, n) * (kappa * mu) as u128)?;
    guard.check_dim("Eve's n-fold space", power(de1, n))?;

    // Per-symbol joint outputs in restricted coordinates.
    let ext = chan.isometric_extension();
    let w = cw.bob_isometry.kronecker(&cw.eve_isometry);
    let mut joint = Vec::with_capacity(states.len());
    for (x, s) in states.iter().enumerate() {
        let v = w.adjoint() * (ext.isometry() * s.vector());
        let expected = cw.channel.joint()[x].matrix();
        if (v.norm() - 1.0).abs() > 1e-8 || linalg::max_abs(&(linalg::outer(&v, &v) - expected)) > 1e-8 {
            return Err(Error::InvalidCode(
                "private code was built over a different channel or alphabet".into(),
            ));
        }
        joint.push(v);
    }
    let inputs: Vec<CVec> = states.iter().map(|s| s.vector().clone()).collect();
    let dq = dq1.pow(n as u32);
    let de = de1.pow(n as u32);
    let interleaved: Vec<usize> = (0..n).flat_map(|_| [dq1, de1]).collect();
    let order: Vec<usize> = (0..n).map(|i| 2 * i).chain((0..n).map(|i| 2 * i + 1)).collect();
    let output = |seq: &[u32]| -> Result<CVec> {
        linalg::permute_vector(&product_vector(&joint, seq), &interleaved, &order)
    };

    // Square-root decoder on the retained codewords; the null outcome is
    // merged into the first one so the measurement is complete.
    let packing = PackingSetup::on(&cw.channel, &private.probs, n, private.delta, guard)?;
    let flat: Vec<Sequence> = private.grid.iter().flatten().cloned().collect();
    let decoded = packing.decode(&flat)?;
    let mut povm = decoded.povm;
    povm[0] += &decoded.null;
    let width = dq * mu;
    let mut isometry = CMat::zeros(kappa * width, dq);
    for k in 0..kappa {
        for m in 0..mu {
            let root = linalg::sqrtm_psd(&povm[k * mu + m]);
            for q in 0..dq {
                for col in 0..dq {
                    isometry[(k * width + q * mu + m, col)] = root[(q, col)];
                }
            }
        }
    }

    let mut fourier_index = Vec::with_capacity(kappa);
    let mut fourier_overlap = Vec::with_capacity(kappa);
    let mut phases = Vec::with_capacity(kappa);
    let mut decoder_phases = Vec::with_capacity(kappa);
    let mut outputs: Vec<CVec> = Vec::with_capacity(kappa);
    for k in 0..kappa {
        let measured: Vec<CVec> = private.grid[k]
            .iter()
            .map(|seq| {
                let v = output(seq)?;
                linalg::apply_on_factor(&v, &[dq, de], 0, &isometry)
            })
            .collect::<Result<_>>()?;
        // Closest state with outcome (k, m): the normalized (k, m) block.
        let block = |v: &CVec, m: usize| -> CVec {
            CVec::from_fn(dq * de, |i, _| {
                let (q, e) = (i / de, i % de);
                v[((k * dq + q) * mu + m) * de + e]
            })
        };
        let zetas: Vec<CVec> = (0..mu)
            .map(|m| {
                let b = block(&measured[m], m);
                let norm = b.norm();
                if norm > 1e-300 {
                    b / re(norm)
                } else {
                    let mut e0 = CVec::zeros(dq * de);
                    e0[0] = re(1.0);
                    e0
                }
            })
            .collect();
        let overlaps = CMat::from_fn(mu, mu, |j, jp| block(&measured[j], jp).dotc(&zetas[jp]));
        let mut best = (0usize, C64::new(0.0, 0.0));
        for s in 1..=mu {
            let gamma = |j: usize| 2.0 * std::f64::consts::PI * ((j + 1) * s) as f64 / mu as f64;
            let mut o = C64::new(0.0, 0.0);
            for j in 0..mu {
                for jp in 0..mu {
                    o += C64::from_polar(1.0, gamma(jp) - gamma(j)) * overlaps[(j, jp)];
                }
            }
            o /= re(mu as f64);
            if best.0 == 0 || o.norm() > best.1.norm() * (1.0 + 1e-12) + 1e-15 {
                best = (s, o);
            }
        }
        let (s, o) = best;
        let gamma: Vec<f64> = (0..mu)
            .map(|m| 2.0 * std::f64::consts::PI * ((m + 1) * s) as f64 / mu as f64)
            .collect();
        let theta_s = -o.arg();
        decoder_phases.push(gamma.iter().map(|g| g + theta_s).collect());
        let mut superposed = CVec::zeros(dq * de);
        for (m, seq) in private.grid[k].iter().enumerate() {
            superposed += output(seq)? * C64::from_polar(1.0, gamma[m]);
        }
        outputs.push(superposed / re((mu as f64).sqrt()));
        fourier_index.push(s);
        fourier_overlap.push(o.norm());
        phases.push(gamma);
    }

    let product_codewords: Vec<Vec<CVec>> = private
        .grid
        .iter()
        .map(|row| row.iter().map(|seq| product_vector(&inputs, seq)).collect())
        .collect();
    let codewords = product_codewords
        .iter()
        .zip(&phases)
        .map(|(row, gamma)| {
            let mut v = CVec::zeros(row[0].len());
            for (w, g) in row.iter().zip(gamma) {
                v += w * C64::from_polar(1.0, *g);
            }
            v / re((mu as f64).sqrt())
        })
        .collect();

    // a[j][k]: the B = j block of V applied to the superposed output of row k.
    let blocks = (0..kappa)
        .map(|j| {
            let vj = isometry.rows(j * width, width).into_owned();
            outputs
                .iter()
                .map(|o| linalg::apply_on_factor(o, &[dq, de], 0, &vj))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let bob_isometry = linalg::tensor_all(std::iter::repeat_n(&cw.bob_isometry, n));
    Ok(EntGenCode {
        n,
        kappa,
        mu,
        grid: private.grid.clone(),
        fourier_index,
        fourier_overlap,
        phases,
        decoder_phases,
        dim_in: chan.dim_in(),
        dim_q: dq,
        dim_e: de,
        codewords,
        product_codewords,
        isometry,
        blocks,
        theta: private.theta.clone(),
        bob_isometry,
    })
}

/// Bob's decoder: the measurement isometry followed by the controlled
/// unitary `Σ_k |k⟩⟨k|_B ⊗ U_k`, keeping `B`.
#[derive(Clone, Debug, Serialize)]
pub struct Decoder {
    pub kappa: usize,
    /// Dimension of the register `QB′` the unitaries act on.
    pub width: usize,
    /// `|⟨Φ_θ|(U_k ⊗ I)|a_k⟩|²` for the normalized row states.
    pub uhlmann_fidelities: Vec<f64>,
    /// Whether `θ` had to be truncated to fit its purification into `QB′`.
    pub truncated: bool,
    #[serde(skip)]
    unitaries: Vec<CMat>,
    #[serde(skip)]
    isometry: CMat,
}

impl Decoder {
    pub fn unitaries(&self) -> &[CMat] {
        &self.unitaries
    }

    pub fn isometry(&self) -> &CMat {
        &self.isometry
    }

    /// `Σ_k |k⟩⟨k| ⊗ U_k` on `B ⊗ QB′`.
    pub fn controlled_unitary(&self) -> CMat {
        let w = self.width;
        let mut u = CMat::zeros(self.kappa * w, self.kappa * w);
        for (k, uk) in self.unitaries.iter().enumerate() {
            u.view_mut((k * w, k * w), (w, w)).copy_from(uk);
        }
        u
    }

    /// The decoding map on Bob's restricted n-fold space, as a channel to
    /// `B`: Kraus operators `(⟨a|_{QB′} ⊗ I_B) U V`.
    pub fn channel(&self) -> Result<QuantumChannel> {
        let uv = self.controlled_unitary() * &self.isometry;
        let w = self.width;
        let kraus = (0..w)
            .map(|a| CMat::from_fn(self.kappa, uv.ncols(), |k, q| uv[(k * w + a, q)]))
            .collect();
        QuantumChannel::from_kraus(kraus)
    }
}

/// Uhlmann unitaries against the canonical purification of `θ` on
/// `QB′ ⊗ E`. When `rank θ > dim QB′` the purification keeps the largest
/// eigenvalues that fit, renormalized.
pub fn decoder_build(code: &EntGenCode) -> Result<Decoder> {
    let width = code.dim_q * code.mu;
    let de = code.dim_e;
    let tr = linalg::trace(&code.theta).re;
    if !(tr > 0.0) {
        return Err(Error::InvalidCode("flattening target has zero trace".into()));
    }
    let e = linalg::eigh(&(&code.theta / re(tr)));
    let rank = e.values.iter().filter(|&&l| l > RANK_TOL).count().max(1);
    let kept = rank.min(width);
    let mass: f64 = e.values[..kept].iter().map(|l| l.max(0.0)).sum();
    let mut target = CVec::zeros(width * de);
    for i in 0..kept {
        let a = (e.values[i].max(0.0) / mass).sqrt();
        for x in 0..de {
            target[i * de + x] = e.vectors[(x, i)] * re(a);
        }
    }
    let target = PureState::from_trusted(target);
    let shape = SubsystemShape::new(vec![width, de])?;
    let mut unitaries = Vec::with_capacity(code.kappa);
    let mut uhlmann_fidelities = Vec::with_capacity(code.kappa);
    for k in 0..code.kappa {
        let a = &code.blocks[k][k];
        let norm = a.norm();
        if norm < 1e-300 {
            unitaries.push(CMat::identity(width, width));
            uhlmann_fidelities.push(0.0);
            continue;
        }
        let phi = PureState::from_trusted(a / re(norm));
        let u = uhlmann_unitary(&phi, &target, &shape, 0)?;
        uhlmann_fidelities.push(u.fidelity());
        unitaries.push(u.unitary);
    }
    Ok(Decoder {
        kappa: code.kappa,
        width,
        uhlmann_fidelities,
        truncated: kept < rank,
        unitaries,
        isometry: code.isometry.clone(),
    })
}

/// Input to the end-to-end protocol.
#[derive(Clone, Debug)]
pub enum ProtocolInput {
    /// Entanglement generation: Alice prepares `|Υ⟩`; the figure of merit
    /// is `F(Ω^{AB}, Φ^κ)`.
    MaximallyEntangled,
    /// Entanglement transmission of `|Ψ⟩^{RA}` (A of dimension κ, last
    /// factor) through the encoding `|k⟩ ↦ |φ_k⟩`.
    State(PureState),
}

#[derive(Clone, Debug, Serialize)]
pub struct FidelityReport {
    pub fidelity: f64,
    pub kappa: usize,
    pub mu: usize,
    pub n: usize,
}

/// Exact fidelity of the simulated protocol.
///
/// For `|Ψ⟩ = Σ c_{rk} |r⟩|k⟩` the overlap of the output with `|Ψ⟩` is the
/// squared norm of `Σ_{j,k} G_{jk} (U_j ⊗ I) a_{jk}` with `G = C†C`; the
/// maximally entangled input has `G = I/κ`.
pub fn protocol_fidelity(
    code: &EntGenCode,
    decoder: &Decoder,
    input: &ProtocolInput,
) -> Result<FidelityReport> {
    let kappa = code.kappa;
    let gram = match input {
        ProtocolInput::MaximallyEntangled => CMat::identity(kappa, kappa) / re(kappa as f64),
        ProtocolInput::State(psi) => {
            if psi.dim() % kappa != 0 {
                return Err(Error::DimensionMismatch {
                    expected: kappa,
                    got: psi.dim(),
                });
            }
            let r = psi.dim() / kappa;
            let coeffs = CMat::from_fn(r, kappa, |i, k| psi.vector()[i * kappa + k]);
            coeffs.adjoint() * coeffs
        }
    };
    let mut acc = CVec::zeros(decoder.width * code.dim_e);
    for j in 0..kappa {
        let mut inner = CVec::zeros(acc.len());
        for k in 0..kappa {
            let g = gram[(j, k)];
            if g != c(0.0, 0.0) {
                inner += &code.blocks[j][k] * g;
            }
        }
        acc += linalg::apply_on_factor(&inner, &[decoder.width, code.dim_e], 0, &decoder.unitaries[j])?;
    }
    Ok(FidelityReport {
        fidelity: acc.norm_squared().clamp(0.0, 1.0),
        kappa,
        mu: code.mu,
        n: code.n,
    })
}

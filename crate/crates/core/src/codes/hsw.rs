//! Packing codes for the Bob side with the square-root decoder.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{draw_codewords, matrices, pinv_tol, product_operator, CodeParams, TAG_PACKING};
use crate::channel::CQWiretapChannel;
use crate::error::{Error, Result};
use crate::guard::{power, Guard};
use crate::qmat::{linalg, CMat, DensityOperator};
use crate::typicality::{
    conditionally_typical_projector, pruned_distribution, typical_projector, PrunedDistribution,
    Sequence,
};

/// Everything about Bob's side of a blocklength-n packing code that does not
/// depend on the codewords.
#[derive(Clone, Debug)]
pub struct PackingSetup {
    pub n: usize,
    pub delta: f64,
    pub probs: Vec<f64>,
    bob_states: Vec<DensityOperator>,
    bob: Vec<CMat>,
    /// `Π^n_{Q,δ(|X|+1)}` as a dense matrix.
    out_proj: CMat,
    pub pruned: PrunedDistribution,
    guard: Guard,
}

/// Decoder for a list of codewords.
#[derive(Clone, Debug)]
pub(crate) struct Packing {
    pub lambdas: Vec<CMat>,
    pub povm: Vec<CMat>,
    pub null: CMat,
    pub outputs: Vec<CMat>,
    pub errors: Vec<f64>,
}

impl PackingSetup {
    /// `wiretap` must already be restricted to its output supports, or be
    /// small enough that the full n-fold Bob space fits the guard.
    pub fn new(
        wiretap: &CQWiretapChannel,
        probs: &[f64],
        n: usize,
        delta: f64,
        guard: &Guard,
    ) -> Result<Self> {
        let compressed = wiretap.compress(probs)?;
        Self::on(&compressed.channel, probs, n, delta, guard)
    }

    pub(crate) fn on(
        wiretap: &CQWiretapChannel,
        probs: &[f64],
        n: usize,
        delta: f64,
        guard: &Guard,
    ) -> Result<Self> {
        guard.check_dim("Bob's n-fold space", power(wiretap.dim_q(), n))?;
        let support = probs.iter().filter(|&&p| p > 0.0).count();
        let avg = DensityOperator::mixture(probs, wiretap.bob())?;
        let out_proj = typical_projector(&avg, n, delta * (support as f64 + 1.0), guard)?.matrix();
        Ok(Self {
            n,
            delta,
            probs: probs.to_vec(),
            bob_states: wiretap.bob().to_vec(),
            bob: matrices(wiretap.bob()),
            out_proj,
            pruned: pruned_distribution(probs, n, delta, guard)?,
            guard: *guard,
        })
    }

    pub fn dim(&self) -> usize {
        self.out_proj.nrows()
    }

    /// `Λ_{xⁿ} = Π_Q Π_{Q|X}(xⁿ) Π_Q`.
    pub fn lambda(&self, seq: &[u32]) -> Result<CMat> {
        let u: Vec<usize> = seq.iter().map(|&x| x as usize).collect();
        let cond = conditionally_typical_projector(&self.bob_states, &u, self.delta, &self.guard)?;
        let pb = &self.out_proj * &cond.basis;
        Ok(&pb * pb.adjoint())
    }

    /// `ω_{xⁿ} = ⊗_i ω_{x_i}`.
    pub fn output(&self, seq: &[u32]) -> CMat {
        product_operator(&self.bob, seq)
    }

    /// Square-root decoder `Y_s = S^{-1/2} Λ_s S^{-1/2}` with `S = Σ_t Λ_t`,
    /// the inverse taken on the support of `S`; `Y_null = I − Σ_s Y_s`.
    pub(crate) fn decode(&self, codewords: &[Sequence]) -> Result<Packing> {
        let mut cache: BTreeMap<&Sequence, CMat> = BTreeMap::new();
        for w in codewords {
            if !cache.contains_key(w) {
                cache.insert(w, self.lambda(w)?);
            }
        }
        let lambdas: Vec<CMat> = codewords.iter().map(|w| cache[w].clone()).collect();
        let d = self.dim();
        let mut sum = CMat::zeros(d, d);
        for l in &lambdas {
            sum += l;
        }
        let inv = linalg::pinv_sqrt(&sum, pinv_tol(&sum));
        let povm: Vec<CMat> = lambdas.iter().map(|l| &inv * l * &inv).collect();
        let mut null = CMat::identity(d, d);
        for y in &povm {
            null -= y;
        }
        let floor = linalg::min_eigenvalue(&null);
        if floor < -1e-9 {
            return Err(Error::InvalidCode(format!(
                "decoder completion is not positive (min eigenvalue {floor:e})"
            )));
        }
        let outputs: Vec<CMat> = codewords.iter().map(|w| self.output(w)).collect();
        let errors = outputs
            .iter()
            .zip(&povm)
            .map(|(w, y)| (1.0 - linalg::trace_product(w, y).re).clamp(0.0, 1.0))
            .collect();
        Ok(Packing {
            lambdas,
            povm,
            null,
            outputs,
            errors,
        })
    }

    pub fn build(&self, nu: usize, seed: u64, distinct: bool) -> Result<HSWCode> {
        if nu == 0 {
            return Err(Error::InvalidParameter("a code needs at least one codeword".into()));
        }
        let codewords = draw_codewords(&self.pruned, nu, seed, TAG_PACKING, distinct)?;
        let packing = self.decode(&codewords)?;
        let p_e = packing.errors.iter().sum::<f64>() / nu as f64;
        Ok(HSWCode {
            n: self.n,
            delta: self.delta,
            seed,
            codewords,
            errors: packing.errors.clone(),
            p_e,
            packing,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HSWCode {
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    pub codewords: Vec<Sequence>,
    /// `1 − Tr ω_{u_s} Y_s` for each codeword.
    pub errors: Vec<f64>,
    pub p_e: f64,
    #[serde(skip)]
    packing: Packing,
}

impl HSWCode {
    pub fn nu(&self) -> usize {
        self.codewords.len()
    }

    pub fn povm(&self) -> &[CMat] {
        &self.packing.povm
    }

    pub fn null_outcome(&self) -> &CMat {
        &self.packing.null
    }

    pub fn lambdas(&self) -> &[CMat] {
        &self.packing.lambdas
    }

    /// `ω_{u_s}` for each codeword.
    pub fn outputs(&self) -> &[CMat] {
        &self.packing.outputs
    }
}

/// Bob-side packing code with `nu` codewords drawn from the pruned input
/// distribution.
pub fn hsw_build(
    wiretap: &CQWiretapChannel,
    probs: &[f64],
    nu: usize,
    params: &CodeParams,
    guard: &Guard,
) -> Result<HSWCode> {
    PackingSetup::new(wiretap, probs, params.n, params.delta, guard)?.build(
        nu,
        params.seed,
        params.distinct,
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct HSWErrorReport {
    pub mean: f64,
    pub max: f64,
    pub per_codeword: Vec<f64>,
    /// `1 − Tr ω_s Λ_s`
    pub miss: Vec<f64>,
    /// `Σ_{t≠s} Tr ω_s Λ_t`
    pub cross: Vec<f64>,
    /// Mean over codewords of `2·miss + 4·cross`.
    pub bound: f64,
}

impl HSWErrorReport {
    pub fn within_bound(&self) -> bool {
        self.mean <= self.bound + 1e-10
    }
}

pub fn hsw_error(code: &HSWCode) -> HSWErrorReport {
    let p = &code.packing;
    let nu = code.nu();
    let mut miss = Vec::with_capacity(nu);
    let mut cross = Vec::with_capacity(nu);
    for s in 0..nu {
        let mut c = 0.0;
        for t in 0..nu {
            let v = linalg::trace_product(&p.outputs[s], &p.lambdas[t]).re;
            if t == s {
                miss.push(1.0 - v);
            } else {
                c += v;
            }
        }
        cross.push(c);
    }
    let bound = miss
        .iter()
        .zip(&cross)
        .map(|(m, c)| 2.0 * m + 4.0 * c)
        .sum::<f64>()
        / nu as f64;
    let per_codeword = p.errors.clone();
    HSWErrorReport {
        mean: per_codeword.iter().sum::<f64>() / nu as f64,
        max: per_codeword.iter().cloned().fold(0.0, f64::max),
        per_codeword,
        miss,
        cross,
        bound,
    }
}

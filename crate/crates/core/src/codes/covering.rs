//! Covering codes: a few codewords whose averaged Eve outputs approximate
//! the flattened target `θ`.

use serde::Serialize;

use super::{draw_codewords, matrices, product_operator, CodeParams, TAG_COVERING};
use crate::channel::CQWiretapChannel;
use crate::error::{Error, Result};
use crate::guard::{power, Guard};
use crate::qmat::{linalg, re, trace_norm, CMat, DensityOperator};
use crate::typicality::{
    conditionally_typical_projector, pruned_distribution, typical_projector, PrunedDistribution,
    Sequence, TypicalityParams,
};

/// Eve-side objects shared by every covering code at a given `(n, δ)`:
///
/// - `ξ″_{xⁿ} = Π_{E|X,δ}(xⁿ) σ_{xⁿ} Π_{E|X,δ}(xⁿ)`
/// - `ξ′_{xⁿ} = Π_{E,δ(|X|+1)} ξ″_{xⁿ} Π_{E,δ(|X|+1)}`
/// - `θ′ = Σ p′(xⁿ) ξ′_{xⁿ}`, `Π` its eigenspace for eigenvalues `≥ εα`
/// - `θ = Π θ′ Π` and `ξ_{xⁿ} = Π ξ′_{xⁿ} Π`
#[derive(Clone, Debug)]
pub struct CoveringSetup {
    pub n: usize,
    pub delta: f64,
    pub params: TypicalityParams,
    eve_states: Vec<DensityOperator>,
    eve: Vec<CMat>,
    out_proj: CMat,
    cut: CMat,
    pub theta: CMat,
    /// `εα`, the eigenvalue cut defining `Π`.
    pub threshold: f64,
    pub pruned: PrunedDistribution,
    guard: Guard,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IntervalCheck {
    /// Smallest eigenvalue of `X − (1−ε)θ`.
    pub lower_margin: f64,
    /// Smallest eigenvalue of `(1+ε)θ − X`.
    pub upper_margin: f64,
    pub epsilon: f64,
    pub holds: bool,
}

impl CoveringSetup {
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
        guard.check_dim("Eve's n-fold space", power(wiretap.dim_e(), n))?;
        let params = TypicalityParams::new(wiretap, probs, n, delta, None, None)?;
        let support = probs.iter().filter(|&&p| p > 0.0).count();
        let avg = DensityOperator::mixture(probs, wiretap.eve())?;
        let out_proj = typical_projector(&avg, n, delta * (support as f64 + 1.0), guard)?.matrix();
        let pruned = pruned_distribution(probs, n, delta, guard)?;
        let mut setup = Self {
            n,
            delta,
            threshold: params.epsilon * params.alpha,
            params,
            eve_states: wiretap.eve().to_vec(),
            eve: matrices(wiretap.eve()),
            cut: CMat::zeros(0, 0),
            theta: CMat::zeros(0, 0),
            out_proj,
            pruned,
            guard: *guard,
        };
        let d = setup.dim();
        let mut inner = CMat::zeros(d, d);
        for (seq, w) in setup.pruned.set.sequences.iter().zip(&setup.pruned.weights) {
            inner += setup.xi_double_prime(seq)? * re(*w);
        }
        let theta_prime = &setup.out_proj * inner * &setup.out_proj;
        let threshold = setup.threshold;
        let cut = linalg::eigh(&theta_prime).map(|l| if l >= threshold { 1.0 } else { 0.0 });
        setup.theta = &cut * theta_prime * &cut;
        setup.cut = cut;
        Ok(setup)
    }

    pub fn dim(&self) -> usize {
        self.out_proj.nrows()
    }

    pub fn theta_trace(&self) -> f64 {
        linalg::trace(&self.theta).re
    }

    fn xi_double_prime(&self, seq: &[u32]) -> Result<CMat> {
        let u: Vec<usize> = seq.iter().map(|&x| x as usize).collect();
        let cond = conditionally_typical_projector(&self.eve_states, &u, self.delta, &self.guard)?;
        let mut scaled = cond.basis.clone();
        for (j, &l) in cond.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(l);
        }
        Ok(scaled * cond.basis.adjoint())
    }

    /// `ξ_{xⁿ} = Π Π_E ξ″_{xⁿ} Π_E Π`.
    pub fn xi(&self, seq: &[u32]) -> Result<CMat> {
        let pp = &self.cut * &self.out_proj;
        Ok(&pp * self.xi_double_prime(seq)? * pp.adjoint())
    }

    /// `σ_{xⁿ} = ⊗_i σ_{x_i}`.
    pub fn sigma(&self, seq: &[u32]) -> CMat {
        product_operator(&self.eve, seq)
    }

    fn mean<F: Fn(&Sequence) -> Result<CMat>>(&self, words: &[Sequence], f: F) -> Result<CMat> {
        if words.is_empty() {
            return Err(Error::InvalidParameter("no codewords".into()));
        }
        let d = self.dim();
        let mut acc = CMat::zeros(d, d);
        for w in words {
            acc += f(w)?;
        }
        Ok(acc / re(words.len() as f64))
    }

    /// `(1/μ) Σ_m σ_{u_m}`.
    pub fn average_output(&self, words: &[Sequence]) -> Result<CMat> {
        self.mean(words, |w| Ok(self.sigma(w)))
    }

    /// `‖(1/μ) Σ_m σ_{u_m} − θ‖₁`.
    pub fn flatness(&self, words: &[Sequence]) -> Result<f64> {
        Ok(trace_norm(&(self.average_output(words)? - &self.theta)))
    }

    /// Whether `(1/μ) Σ_m ξ_{u_m} ∈ [(1−ε)θ, (1+ε)θ]`.
    pub fn interval(&self, words: &[Sequence]) -> Result<IntervalCheck> {
        let x = self.mean(words, |w| self.xi(w))?;
        let eps = self.params.epsilon;
        let lower_margin = linalg::min_eigenvalue(&(&x - &self.theta * re(1.0 - eps)));
        let upper_margin = linalg::min_eigenvalue(&(&self.theta * re(1.0 + eps) - &x));
        Ok(IntervalCheck {
            lower_margin,
            upper_margin,
            epsilon: eps,
            holds: lower_margin >= -1e-10 && upper_margin >= -1e-10,
        })
    }

    pub fn build(&self, mu: usize, seed: u64, distinct: bool) -> Result<CoveringCode> {
        if mu == 0 {
            return Err(Error::InvalidParameter("a code needs at least one codeword".into()));
        }
        let codewords = draw_codewords(&self.pruned, mu, seed, TAG_COVERING, distinct)?;
        Ok(CoveringCode {
            n: self.n,
            delta: self.delta,
            seed,
            flatness_distance: self.flatness(&codewords)?,
            interval: self.interval(&codewords)?,
            theta_trace: self.theta_trace(),
            codewords,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoveringCode {
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    pub codewords: Vec<Sequence>,
    pub flatness_distance: f64,
    pub interval: IntervalCheck,
    pub theta_trace: f64,
}

/// Eve-side covering code with `mu` codewords.
pub fn covering_build(
    wiretap: &CQWiretapChannel,
    probs: &[f64],
    mu: usize,
    params: &CodeParams,
    guard: &Guard,
) -> Result<CoveringCode> {
    CoveringSetup::new(wiretap, probs, params.n, params.delta, guard)?.build(
        mu,
        params.seed,
        params.distinct,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_pure_eve_is_flat() {
        let bob = vec![DensityOperator::basis(2, 0), DensityOperator::basis(2, 1)];
        let eve = vec![DensityOperator::basis(3, 2); 2];
        let w = CQWiretapChannel::product(bob, eve).unwrap();
        let code = covering_build(&w, &[0.5, 0.5], 1, &CodeParams::new(3, 0.3, 1), &Guard::default())
            .unwrap();
        assert!(code.flatness_distance < 1e-9);
        assert!(code.interval.holds);
    }

    #[test]
    fn theta_is_below_the_average_output() {
        let bob = vec![DensityOperator::basis(2, 0), DensityOperator::basis(2, 1)];
        let eve = vec![
            DensityOperator::diagonal(&[0.8, 0.2]).unwrap(),
            DensityOperator::diagonal(&[0.3, 0.7]).unwrap(),
        ];
        let w = CQWiretapChannel::product(bob, eve).unwrap();
        let s = CoveringSetup::new(&w, &[0.5, 0.5], 4, 0.25, &Guard::default()).unwrap();
        assert!(s.theta_trace() <= 1.0 + 1e-12);
        assert!(linalg::min_eigenvalue(&s.theta) > -1e-12);
        for seed in 0..4 {
            let c = s.build(4, seed, false).unwrap();
            assert!(c.flatness_distance <= 2.0 + 1e-12);
        }
    }
}

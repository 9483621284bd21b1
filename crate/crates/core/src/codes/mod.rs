//! Random codes at exact small blocklength: packing codes with square-root
//! decoding, covering codes, private grid codes with expurgation,
//! entanglement-generation codes with their decoder, twirling, and trial
//! harnesses for the operator inequalities behind them.
//!
//! All wiretap channels are first restricted to the supports of their
//! averaged outputs (an exact isometric change of coordinates), and every
//! n-fold operator lives on the restricted spaces.

mod covering;
mod density;
mod entgen;
mod hsw;
mod lemmas;
mod private;
mod simulate;
mod twirl;

pub use covering::{covering_build, CoveringCode, CoveringSetup, IntervalCheck};
pub use density::{
    average_code_density_distance, codeword_density, pruned_code_density, random_code_densities,
};
pub use entgen::{
    decoder_build, entgen_build, protocol_fidelity, Decoder, EntGenCode, FidelityReport,
    ProtocolInput,
};
pub use hsw::{hsw_build, hsw_error, HSWCode, HSWErrorReport, PackingSetup};
pub use lemmas::{gentle_sides, hn_margin_for, lemma_trial, LemmaKind, LemmaParams, LemmaReport};
pub use private::{eve_leakage, private_build, Expurgation, PrivateCode, PrivateSetup};
pub use simulate::{simulate, SimulationKind, SimulationRow, SimulationSource, SimulationSpec};
pub use twirl::{twirl, WernerReport};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::{linalg, CMat, DensityOperator};
use crate::rng;
use crate::typicality::{PrunedDistribution, Sequence};

/// Redraws allowed per codeword when distinct codewords are required.
pub const DISTINCT_ATTEMPTS: usize = 1000;

/// Stream tags separating the random draws of the different constructions.
pub(crate) const TAG_PACKING: u64 = 1;
pub(crate) const TAG_COVERING: u64 = 2;
pub(crate) const TAG_PRIVATE: u64 = 3;
pub(crate) const TAG_LEMMA: u64 = 4;
pub(crate) const TAG_DENSITY: u64 = 5;

/// Blocklength, typicality slack and randomness of one code construction.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CodeParams {
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    /// Reject repeated codewords instead of drawing i.i.d.
    pub distinct: bool,
}

impl CodeParams {
    pub fn new(n: usize, delta: f64, seed: u64) -> Self {
        Self {
            n,
            delta,
            seed,
            distinct: false,
        }
    }

    pub fn distinct(mut self, distinct: bool) -> Self {
        self.distinct = distinct;
        self
    }
}

/// Codeword `i` comes from its own stream `(seed, tag, i)`.
pub(crate) fn draw_codewords(
    pruned: &PrunedDistribution,
    count: usize,
    seed: u64,
    tag: u64,
    distinct: bool,
) -> Result<Vec<Sequence>> {
    if distinct && count > pruned.set.len() {
        return Err(Error::DistinctnessFailed {
            needed: count,
            attempts: 0,
        });
    }
    let sampler = pruned.sampler();
    let mut out: Vec<Sequence> = Vec::with_capacity(count);
    let mut used = std::collections::BTreeSet::new();
    for i in 0..count {
        let mut r = rng::stream(seed, &[tag, i as u64]);
        let mut attempts = 0;
        loop {
            let idx = rand::distr::Distribution::sample(&sampler, &mut r);
            attempts += 1;
            if !distinct || used.insert(idx) {
                out.push(pruned.set.sequences[idx].clone());
                break;
            }
            if attempts >= DISTINCT_ATTEMPTS {
                return Err(Error::DistinctnessFailed {
                    needed: count,
                    attempts,
                });
            }
        }
    }
    Ok(out)
}

/// `⊗_i m[x_i]`.
pub(crate) fn product_operator(single: &[CMat], seq: &[u32]) -> CMat {
    linalg::tensor_all(seq.iter().map(|&x| &single[x as usize]))
}

pub(crate) fn matrices(states: &[DensityOperator]) -> Vec<CMat> {
    states.iter().map(|s| s.matrix().clone()).collect()
}

/// Pseudo-inverse threshold relative to the largest eigenvalue.
pub(crate) fn pinv_tol(a: &CMat) -> f64 {
    1e-12 * linalg::max_eigenvalue(a).max(1.0)
}

/// Median, averaging the two middle values for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let k = v.len();
    if k == 0 {
        return f64::NAN;
    }
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::guard::Guard;
    use crate::typicality::pruned_distribution;

    #[test]
    fn distinct_draws_cover_small_sets() {
        let pd = pruned_distribution(&[0.5, 0.5], 3, 0.5, &Guard::default()).unwrap();
        let words = draw_codewords(&pd, 8, 7, TAG_PACKING, true).unwrap();
        let set: std::collections::BTreeSet<_> = words.iter().collect();
        assert_eq!(set.len(), 8);
        let err = draw_codewords(&pd, 9, 7, TAG_PACKING, true).unwrap_err();
        assert!(matches!(err, Error::DistinctnessFailed { .. }));
    }

    #[test]
    fn draws_are_reproducible() {
        let pd = pruned_distribution(&[0.3, 0.7], 6, 0.3, &Guard::default()).unwrap();
        let a = draw_codewords(&pd, 5, 11, TAG_PACKING, false).unwrap();
        let b = draw_codewords(&pd, 5, 11, TAG_PACKING, false).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}

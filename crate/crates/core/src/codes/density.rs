//! Code density operators over the eigen-alphabet of a source state and
//! their distance from the i.i.d. state.

use rand::Rng;
use rayon::prelude::*;

use super::{draw_codewords, TAG_DENSITY};
use crate::channel::eigen_alphabet;
use crate::error::{Error, Result};
use crate::guard::{power, Guard};
use crate::qmat::{linalg, re, trace_norm, CMat, CVec, DensityOperator};
use crate::rng;
use crate::typicality::{pruned_distribution, Sequence};

fn eigenvectors(rho: &DensityOperator) -> Vec<CVec> {
    eigen_alphabet(rho).1.into_iter().map(|s| s.into_vector()).collect()
}

fn check(rho: &DensityOperator, n: usize, guard: &Guard) -> Result<()> {
    guard.check_dim("code density dimension", power(rho.dim(), n))
}

fn product_projector(vecs: &[CVec], seq: &[u32]) -> CMat {
    let v = linalg::tensor_vec_all(seq.iter().map(|&x| &vecs[x as usize]));
    linalg::projector(&v)
}

/// `Σ_x p′(x) |φ_x⟩⟨φ_x|` over the typical eigen-sequences of `rho`.
pub fn pruned_code_density(rho: &DensityOperator, n: usize, delta: f64, guard: &Guard) -> Result<CMat> {
    check(rho, n, guard)?;
    let (probs, states) = eigen_alphabet(rho);
    let vecs: Vec<CVec> = states.into_iter().map(|s| s.into_vector()).collect();
    let pruned = pruned_distribution(&probs, n, delta, guard)?;
    let d = rho.dim().pow(n as u32);
    let mut m = CMat::zeros(d, d);
    for (seq, &w) in pruned.set.sequences.iter().zip(&pruned.weights) {
        m += product_projector(&vecs, seq) * re(w);
    }
    Ok(m)
}

/// `(1/κ) Σ_k |φ_{x_k}⟩⟨φ_{x_k}|` for eigen-sequences `x_k` of `rho`.
pub fn codeword_density(rho: &DensityOperator, words: &[Sequence]) -> Result<CMat> {
    let n = words.first().map(|w| w.len()).ok_or_else(|| Error::InvalidCode("no codewords".into()))?;
    let vecs = eigenvectors(rho);
    let d = rho.dim().pow(n as u32);
    let mut m = CMat::zeros(d, d);
    for w in words {
        if w.len() != n || w.iter().any(|&x| x as usize >= vecs.len()) {
            return Err(Error::InvalidCode("codeword outside the eigen-alphabet".into()));
        }
        m += product_projector(&vecs, w);
    }
    Ok(m / re(words.len() as f64))
}

/// Code densities of `pool` independent random codes with `kappa` codewords
/// drawn from `p′`; code `r` derives its seed from the stream `(seed, r)`.
pub fn random_code_densities(
    rho: &DensityOperator,
    n: usize,
    delta: f64,
    kappa: usize,
    pool: usize,
    seed: u64,
    guard: &Guard,
) -> Result<Vec<CMat>> {
    check(rho, n, guard)?;
    if kappa == 0 {
        return Err(Error::InvalidParameter("kappa must be positive".into()));
    }
    let (probs, _) = eigen_alphabet(rho);
    let pruned = pruned_distribution(&probs, n, delta, guard)?;
    (0..pool)
        .into_par_iter()
        .map(|r| {
            let code_seed: u64 = rng::stream(seed, &[TAG_DENSITY, r as u64]).random();
            let words = draw_codewords(&pruned, kappa, code_seed, TAG_DENSITY, false)?;
            codeword_density(rho, &words)
        })
        .collect()
}

/// `‖(1/R) Σ_r ρ(S_r) − ρ^{⊗n}‖₁`.
pub fn average_code_density_distance(
    densities: &[CMat],
    rho: &DensityOperator,
    n: usize,
    guard: &Guard,
) -> Result<f64> {
    check(rho, n, guard)?;
    let d = rho.dim().pow(n as u32);
    if densities.is_empty() {
        return Err(Error::InvalidParameter("no code densities".into()));
    }
    let mut avg = CMat::zeros(d, d);
    for m in densities {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: m.nrows() });
        }
        avg += m;
    }
    avg /= re(densities.len() as f64);
    Ok(trace_norm(&(avg - rho.tensor_power(n).into_matrix())))
}

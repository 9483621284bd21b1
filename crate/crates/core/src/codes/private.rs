//! Private codes on a κ′×μ′ grid of codewords: row k carries message k,
//! the μ′ codewords in a row randomize Eve's view. Expurgation keeps the
//! best rows and the best codewords in each row.

use serde::Serialize;

use super::{draw_codewords, CodeParams, CoveringSetup, PackingSetup, TAG_PRIVATE};
use crate::channel::{CQWiretapChannel, CompressedWiretap};
use crate::entropy::matrix_entropy;
use crate::error::{Error, Result};
use crate::guard::Guard;
use crate::qmat::{re, trace_norm, CMat};
use crate::typicality::Sequence;

/// How the expurgation threshold is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", content = "epsilon", rename_all = "kebab-case")]
pub enum Expurgation {
    /// `ε = p_e^{4/3}` from the measured average error, so the event
    /// `p_e ≤ ε^{3/4}` holds by construction and the threshold is
    /// `τ = ε^{1/4} = p_e^{1/3}`.
    Measured,
    /// Caller-supplied `ε`; threshold `τ = ε^{1/4}`.
    Fixed(f64),
    /// Keep the whole grid.
    Off,
}

/// Wiretap-dependent parts shared by every private code at `(n, δ)`.
#[derive(Clone, Debug)]
pub struct PrivateSetup {
    pub n: usize,
    pub delta: f64,
    pub probs: Vec<f64>,
    pub compressed: CompressedWiretap,
    pub packing: PackingSetup,
    pub covering: CoveringSetup,
}

impl PrivateSetup {
    pub fn new(
        wiretap: &CQWiretapChannel,
        probs: &[f64],
        n: usize,
        delta: f64,
        guard: &Guard,
    ) -> Result<Self> {
        let compressed = wiretap.compress(probs)?;
        let packing = PackingSetup::on(&compressed.channel, probs, n, delta, guard)?;
        let covering = CoveringSetup::on(&compressed.channel, probs, n, delta, guard)?;
        Ok(Self {
            n,
            delta,
            probs: probs.to_vec(),
            compressed,
            packing,
            covering,
        })
    }

    pub fn build(
        &self,
        kappa_p: usize,
        mu_p: usize,
        seed: u64,
        rule: Expurgation,
        distinct: bool,
    ) -> Result<PrivateCode> {
        if kappa_p == 0 || mu_p == 0 {
            return Err(Error::InvalidParameter("grid sizes must be positive".into()));
        }
        if let Expurgation::Fixed(e) = rule {
            if !(e > 0.0 && e < 1.0) {
                return Err(Error::InvalidParameter(format!("expurgation epsilon must lie in (0, 1), got {e}")));
            }
        }
        let flat = draw_codewords(
            &self.packing.pruned,
            kappa_p * mu_p,
            seed,
            TAG_PRIVATE,
            distinct,
        )?;
        let packing = self.packing.decode(&flat)?;
        let p_e_full = packing.errors.iter().sum::<f64>() / flat.len() as f64;
        let full_grid: Vec<Vec<Sequence>> = flat.chunks(mu_p).map(|c| c.to_vec()).collect();
        let full_errors: Vec<Vec<f64>> = packing.errors.chunks(mu_p).map(|c| c.to_vec()).collect();

        let (epsilon, threshold, iota0) = match rule {
            Expurgation::Measured => {
                let eps = p_e_full.powf(4.0 / 3.0);
                (Some(eps), Some(p_e_full.cbrt()), Some(true))
            }
            Expurgation::Fixed(eps) => (
                Some(eps),
                Some(eps.powf(0.25)),
                Some(p_e_full <= eps.powf(0.75)),
            ),
            Expurgation::Off => (None, None, None),
        };
        let (rows, columns) = match threshold {
            Some(tau) => expurgate(&full_errors, tau),
            None => ((0..kappa_p).collect(), vec![(0..mu_p).collect(); kappa_p]),
        };

        let grid: Vec<Vec<Sequence>> = rows
            .iter()
            .zip(&columns)
            .map(|(&k, cols)| cols.iter().map(|&m| full_grid[k][m].clone()).collect())
            .collect();
        let errors: Vec<Vec<f64>> = rows
            .iter()
            .zip(&columns)
            .map(|(&k, cols)| cols.iter().map(|&m| full_errors[k][m]).collect())
            .collect();
        let retained: Vec<f64> = errors.iter().flatten().cloned().collect();
        let eve_states = grid
            .iter()
            .map(|row| self.covering.average_output(row))
            .collect::<Result<Vec<_>>>()?;
        let flatness = eve_states
            .iter()
            .map(|s| trace_norm(&(s - &self.covering.theta)))
            .collect();

        Ok(PrivateCode {
            n: self.n,
            delta: self.delta,
            seed,
            kappa_p,
            mu_p,
            kappa: grid.len(),
            mu: grid[0].len(),
            rule,
            epsilon,
            threshold,
            iota0,
            p_e_full,
            p_e: retained.iter().sum::<f64>() / retained.len() as f64,
            p_e_max: retained.iter().cloned().fold(0.0, f64::max),
            rows,
            columns,
            grid,
            errors,
            full_grid,
            full_errors,
            flatness,
            eve_states,
            theta: self.covering.theta.clone(),
            compressed: self.compressed.clone(),
            probs: self.probs.clone(),
        })
    }
}

/// Rows ranked by how many of their codewords have error above `tau` (ties
/// by index), the best `max(1, ⌊(1−τ)κ′⌋)` kept; in each kept row the
/// `max(1, ⌊(1−τ)μ′⌋)` lowest-error codewords. Indices come back sorted.
fn expurgate(errors: &[Vec<f64>], tau: f64) -> (Vec<usize>, Vec<Vec<usize>>) {
    let kappa_p = errors.len();
    let mu_p = errors[0].len();
    let keep = |total: usize| (((1.0 - tau) * total as f64 + 1e-12).floor() as usize).clamp(1, total);
    let bad = |k: usize| errors[k].iter().filter(|&&e| e > tau).count();
    let mut order: Vec<usize> = (0..kappa_p).collect();
    order.sort_by_key(|&k| (bad(k), k));
    let mut rows: Vec<usize> = order[..keep(kappa_p)].to_vec();
    rows.sort_unstable();
    let columns = rows
        .iter()
        .map(|&k| {
            let mut cols: Vec<usize> = (0..mu_p).collect();
            cols.sort_by(|&a, &b| errors[k][a].total_cmp(&errors[k][b]).then(a.cmp(&b)));
            let mut kept = cols[..keep(mu_p)].to_vec();
            kept.sort_unstable();
            kept
        })
        .collect();
    (rows, columns)
}

#[derive(Clone, Debug, Serialize)]
pub struct PrivateCode {
    pub n: usize,
    pub delta: f64,
    pub seed: u64,
    pub kappa_p: usize,
    pub mu_p: usize,
    pub kappa: usize,
    pub mu: usize,
    pub rule: Expurgation,
    pub epsilon: Option<f64>,
    /// Per-codeword error threshold `τ = ε^{1/4}`.
    pub threshold: Option<f64>,
    /// Whether the measured average error meets `ε^{3/4}`.
    pub iota0: Option<bool>,
    /// Average error of the full grid under its square-root decoder.
    pub p_e_full: f64,
    /// Mean and max over retained codewords (full-grid decoder).
    pub p_e: f64,
    pub p_e_max: f64,
    pub rows: Vec<usize>,
    pub columns: Vec<Vec<usize>>,
    pub grid: Vec<Vec<Sequence>>,
    pub errors: Vec<Vec<f64>>,
    pub full_grid: Vec<Vec<Sequence>>,
    pub full_errors: Vec<Vec<f64>>,
    /// `‖σ_k − θ‖₁` for each retained row.
    pub flatness: Vec<f64>,
    #[serde(skip)]
    pub(crate) eve_states: Vec<CMat>,
    #[serde(skip)]
    pub(crate) theta: CMat,
    #[serde(skip)]
    pub(crate) compressed: CompressedWiretap,
    #[serde(skip)]
    pub(crate) probs: Vec<f64>,
}

impl PrivateCode {
    /// `σ_k = (1/μ) Σ_m σ_{u_km}` on Eve's restricted n-fold space.
    pub fn eve_states(&self) -> &[CMat] {
        &self.eve_states
    }

    pub fn theta(&self) -> &CMat {
        &self.theta
    }

    pub fn mean_flatness(&self) -> f64 {
        self.flatness.iter().sum::<f64>() / self.flatness.len() as f64
    }

    /// Whether every retained codeword meets the expurgation threshold.
    pub fn meets_threshold(&self) -> Option<bool> {
        self.threshold
            .map(|t| self.errors.iter().flatten().all(|&e| e <= t + 1e-12))
    }
}

pub fn private_build(
    wiretap: &CQWiretapChannel,
    probs: &[f64],
    kappa_p: usize,
    mu_p: usize,
    rule: Expurgation,
    params: &CodeParams,
    guard: &Guard,
) -> Result<PrivateCode> {
    PrivateSetup::new(wiretap, probs, params.n, params.delta, guard)?.build(
        kappa_p,
        mu_p,
        params.seed,
        rule,
        params.distinct,
    )
}

/// Holevo information of `{1/κ, σ_k}`: `H(σ̄) − (1/κ) Σ_k H(σ_k)`.
pub fn eve_leakage(code: &PrivateCode) -> f64 {
    let k = code.eve_states.len();
    if k <= 1 {
        return 0.0;
    }
    let mut avg = code.eve_states[0].clone();
    for s in &code.eve_states[1..] {
        avg += s;
    }
    avg /= re(k as f64);
    let inner: f64 = code.eve_states.iter().map(matrix_entropy).sum::<f64>() / k as f64;
    (matrix_entropy(&avg) - inner).max(0.0)
}

//! Exact evaluation of the nine typicality bounds for a cq wiretap channel.
//!
//! All quantities are invariant under permuting positions, so they depend on
//! a typical `xⁿ` only through its type, and on eigen-sequences only through
//! their count vectors. Everything below is a sum over count vectors with
//! multinomial multiplicities; no operator on the n-fold space is formed.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{clipped_spectrum, count_window, COUNT_TOL};
use crate::channel::{validate_distribution, CQWiretapChannel};
use crate::entropy::von_neumann;
use crate::error::{Error, Result};
use crate::guard::Guard;
use crate::qmat::{DensityOperator, RANK_TOL};

/// Constants and exponents of the typicality bounds at a given `(n, δ)`.
#[derive(Clone, Debug, Serialize)]
pub struct TypicalityParams {
    pub n: usize,
    pub delta: f64,
    pub c: f64,
    pub c_prime: f64,
    /// `2^{−n c′ δ²}`, the target for the probability-mass properties.
    pub epsilon: f64,
    pub h_e: f64,
    pub h_e_given_x: f64,
    pub h_q: f64,
    pub h_q_given_x: f64,
    /// `2^{−n[H(E)+cδ]}`
    pub alpha: f64,
    /// `2^{−n[H(E|X)−cδ]}`
    pub beta: f64,
    /// `2^{−n[H(Q)−cδ]}`
    pub alpha_tilde: f64,
    /// `2^{−n[H(Q|X)+cδ]}`
    pub beta_tilde: f64,
}

/// `Σ_{λ>0} |log₂ λ|`.
fn log_spread(rho: &DensityOperator) -> f64 {
    rho.eigenvalues()
        .iter()
        .filter(|&&l| l > RANK_TOL)
        .map(|l| l.log2().abs())
        .sum()
}

fn average(states: &[DensityOperator], probs: &[f64]) -> Result<DensityOperator> {
    DensityOperator::mixture(probs, states)
}

impl TypicalityParams {
    /// `c = (|X|+1) · max Σ_{λ>0} |log₂ λ|` over the averaged and per-symbol
    /// outputs on both sides. With this constant the four exponent bounds
    /// hold for every typical sequence at every `(n, δ)`.
    pub fn default_c(wiretap: &CQWiretapChannel, probs: &[f64]) -> Result<f64> {
        let mut spread: f64 = 0.0;
        for side in [wiretap.eve(), wiretap.bob()] {
            spread = spread.max(log_spread(&average(side, probs)?));
            for (s, p) in side.iter().zip(probs) {
                if *p > 0.0 {
                    spread = spread.max(log_spread(s));
                }
            }
        }
        let support = probs.iter().filter(|&&p| p > 0.0).count();
        Ok((support as f64 + 1.0) * spread)
    }

    pub fn new(
        wiretap: &CQWiretapChannel,
        probs: &[f64],
        n: usize,
        delta: f64,
        c: Option<f64>,
        c_prime: Option<f64>,
    ) -> Result<Self> {
        validate_distribution(probs)?;
        if probs.len() != wiretap.alphabet_size() {
            return Err(Error::DimensionMismatch {
                expected: wiretap.alphabet_size(),
                got: probs.len(),
            });
        }
        if n == 0 {
            return Err(Error::InvalidParameter("blocklength must be at least 1".into()));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        let c = match c {
            Some(c) if c >= 0.0 && c.is_finite() => c,
            Some(c) => return Err(Error::InvalidParameter(format!("c must be nonnegative, got {c}"))),
            None => Self::default_c(wiretap, probs)?,
        };
        let c_prime = c_prime.unwrap_or(1.0);
        let cond = |side: &[DensityOperator]| -> f64 {
            side.iter()
                .zip(probs)
                .filter(|(_, p)| **p > 0.0)
                .map(|(s, p)| p * von_neumann(s))
                .sum()
        };
        let h_e = von_neumann(&average(wiretap.eve(), probs)?);
        let h_q = von_neumann(&average(wiretap.bob(), probs)?);
        let h_e_given_x = cond(wiretap.eve());
        let h_q_given_x = cond(wiretap.bob());
        let nf = n as f64;
        Ok(Self {
            n,
            delta,
            c,
            c_prime,
            epsilon: (-nf * c_prime * delta * delta).exp2(),
            h_e,
            h_e_given_x,
            h_q,
            h_q_given_x,
            alpha: (-nf * (h_e + c * delta)).exp2(),
            beta: (-nf * (h_e_given_x - c * delta)).exp2(),
            alpha_tilde: (-nf * (h_q - c * delta)).exp2(),
            beta_tilde: (-nf * (h_q_given_x + c * delta)).exp2(),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyMargin {
    pub property: String,
    pub value: f64,
    pub bound: f64,
    /// Signed distance to the bound; nonnegative when the property holds.
    pub margin: f64,
    pub holds: bool,
}

impl PropertyMargin {
    fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self::make(name, value, bound, value - bound)
    }

    fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self::make(name, value, bound, bound - value)
    }

    fn make(name: &str, value: f64, bound: f64, margin: f64) -> Self {
        let holds = margin >= -1e-12 * bound.abs().max(1.0);
        Self {
            property: name.to_string(),
            value,
            bound,
            margin,
            holds,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub params: TypicalityParams,
    pub properties: Vec<PropertyMargin>,
    /// Largest `1 − (mass)` over the five probability-mass properties.
    pub epsilon_achieved: f64,
    /// Smallest `c ≥ 0` for which the four exponent bounds hold here.
    pub c_required: f64,
    pub typical_types: usize,
}

impl PropertyReport {
    pub fn all_hold(&self) -> bool {
        self.properties.iter().all(|p| p.holds)
    }
}

/// `ln k!` for `k ≤ n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut t = vec![0.0; n + 1];
    for k in 1..=n {
        t[k] = t[k - 1] + (k as f64).ln();
    }
    t
}

fn ln_multinomial(lf: &[f64], counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    lf[total] - counts.iter().map(|&c| lf[c]).sum::<f64>()
}

/// All count vectors with `parts` entries summing to `total`, in
/// lexicographic order.
fn compositions(parts: usize, total: usize) -> Vec<Vec<usize>> {
    fn rec(parts: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == parts {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(parts, left - c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(parts, total, &mut Vec::with_capacity(parts), &mut out);
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n.saturating_sub(k));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn check_compositions(guard: &Guard, parts: usize, total: usize) -> Result<()> {
    let count = if parts == 0 {
        1
    } else {
        binomial((total + parts - 1) as u128, (parts - 1) as u128)
    };
    guard.check_sequences("type enumeration", count)
}

/// Positive part of a spectrum, which is all that can appear in a typical
/// eigen-sequence.
fn support(values: &[f64]) -> Vec<f64> {
    clipped_spectrum(values)
        .into_iter()
        .filter(|&l| l > 0.0)
        .collect()
}

fn is_typical(counts: &[usize], probs: &[f64], slack: f64) -> bool {
    let n: usize = counts.iter().sum();
    counts.iter().zip(probs).all(|(&c, &p)| {
        let (lo, hi) = count_window(p, n, slack);
        (c as i64) >= lo && (c as i64) <= hi
    })
}

/// Size, probability and extreme sequence weight of a typical set, from
/// count vectors.
#[derive(Clone, Copy, Debug)]
struct SetStats {
    size: f64,
    mass: f64,
    max_weight: f64,
}

fn set_stats(lambda: &[f64], n: usize, slack: f64, lf: &[f64], guard: &Guard) -> Result<SetStats> {
    check_compositions(guard, lambda.len(), n)?;
    let mut stats = SetStats {
        size: 0.0,
        mass: 0.0,
        max_weight: 0.0,
    };
    for counts in compositions(lambda.len(), n) {
        if !is_typical(&counts, lambda, slack) {
            continue;
        }
        let ln_mult = ln_multinomial(lf, &counts);
        let ln_w: f64 = counts
            .iter()
            .zip(lambda)
            .map(|(&c, &l)| c as f64 * l.ln())
            .sum();
        stats.size += ln_mult.exp();
        stats.mass += (ln_mult + ln_w).exp();
        stats.max_weight = stats.max_weight.max(ln_w.exp());
    }
    Ok(stats)
}

/// One side (Eve or Bob) of the wiretap, in the eigenbasis of its average.
struct Side {
    avg_spectrum: Vec<f64>,
    /// `diag[x][k] = ⟨e_k|ρ_x|e_k⟩` over the positive eigenvectors of the average.
    diag: Vec<Vec<f64>>,
    spectra: Vec<Vec<f64>>,
}

impl Side {
    fn new(states: &[DensityOperator], probs: &[f64]) -> Result<Self> {
        let avg = average(states, probs)?;
        let e = avg.eigen();
        let clipped = clipped_spectrum(&e.values);
        let keep: Vec<usize> = (0..clipped.len()).filter(|&k| clipped[k] > 0.0).collect();
        let diag = states
            .iter()
            .map(|s| {
                keep.iter()
                    .map(|&k| {
                        let v = e.vector(k);
                        v.dotc(&(s.matrix() * &v)).re.max(0.0)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            avg_spectrum: keep.iter().map(|&k| clipped[k]).collect(),
            diag,
            spectra: states.iter().map(|s| support(&s.eigenvalues())).collect(),
        })
    }

    /// `Tr ρ_{xⁿ} Π_{avg, slack}` for any `xⁿ` of the given type.
    fn output_mass(&self, ty: &[usize], slack: f64, lf: &[f64], guard: &Guard) -> Result<f64> {
        let d = self.avg_spectrum.len();
        let n: usize = ty.iter().sum();
        check_compositions(guard, d, n)?;
        let mut dp: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        dp.insert(vec![0; d], 1.0);
        for (x, &nx) in ty.iter().enumerate() {
            if nx == 0 {
                continue;
            }
            let terms: Vec<(Vec<usize>, f64)> = compositions(d, nx)
                .into_iter()
                .filter_map(|c| {
                    let mut ln_w = ln_multinomial(lf, &c);
                    for (&ck, &dk) in c.iter().zip(&self.diag[x]) {
                        if ck > 0 {
                            if dk <= 0.0 {
                                return None;
                            }
                            ln_w += ck as f64 * dk.ln();
                        }
                    }
                    Some((c, ln_w.exp()))
                })
                .collect();
            let mut next: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
            for (base, w) in &dp {
                for (c, t) in &terms {
                    let key: Vec<usize> = base.iter().zip(c).map(|(a, b)| a + b).collect();
                    *next.entry(key).or_insert(0.0) += w * t;
                }
            }
            dp = next;
        }
        Ok(dp
            .iter()
            .filter(|(c, _)| is_typical(c, &self.avg_spectrum, slack))
            .map(|(_, w)| w)
            .sum())
    }

    /// Per-class typical statistics combined over the classes of a type.
    fn conditional(&self, ty: &[usize], delta: f64, lf: &[f64], guard: &Guard) -> Result<SetStats> {
        let mut acc = SetStats {
            size: 1.0,
            mass: 1.0,
            max_weight: 1.0,
        };
        for (x, &nx) in ty.iter().enumerate() {
            if nx == 0 {
                continue;
            }
            let s = set_stats(&self.spectra[x], nx, nx as f64 * delta, lf, guard)?;
            acc.size *= s.size;
            acc.mass *= s.mass;
            acc.max_weight *= s.max_weight;
        }
        Ok(acc)
    }
}

/// Exact values of the nine typicality bounds, worst case over typical
/// input sequences:
///
/// 1. `s = Pr{Xⁿ ∈ T_{X,δ}} ≥ 1 − ε`
/// 2. `Tr σ_{xⁿ} Π_{E|X,δ}(xⁿ) ≥ 1 − ε`
/// 3. `Tr σ_{xⁿ} Π_{E,δ(|X|+1)} ≥ 1 − ε`
/// 4. `Tr ω_{xⁿ} Π_{Q|X,δ}(xⁿ) ≥ 1 − ε`
/// 5. `Tr ω_{xⁿ} Π_{Q,δ(|X|+1)} ≥ 1 − ε`
/// 6. `Tr Π_{E,δ(|X|+1)} ≤ α⁻¹`
/// 7. `Π_{E|X} σ_{xⁿ} Π_{E|X} ≤ β Π_{E|X}`
/// 8. `Tr Π_{Q|X,δ}(xⁿ) ≤ β̃⁻¹`
/// 9. `Π_Q ω^{⊗n} Π_Q ≤ α̃ Π_Q`
///
/// `|X|` counts the symbols of positive probability.
pub fn verify_properties(
    wiretap: &CQWiretapChannel,
    probs: &[f64],
    n: usize,
    delta: f64,
    c: Option<f64>,
    c_prime: Option<f64>,
    guard: &Guard,
) -> Result<PropertyReport> {
    let params = TypicalityParams::new(wiretap, probs, n, delta, c, c_prime)?;
    let lf = ln_factorials(n);
    let nf = n as f64;
    let support_size = probs.iter().filter(|&&p| p > 0.0).count();
    let wide = delta * (support_size as f64 + 1.0);
    let eve = Side::new(wiretap.eve(), probs)?;
    let bob = Side::new(wiretap.bob(), probs)?;

    check_compositions(guard, probs.len(), n)?;
    let types: Vec<Vec<usize>> = compositions(probs.len(), n)
        .into_iter()
        .filter(|t| is_typical(t, probs, nf * delta))
        .collect();
    if types.is_empty() {
        return Err(Error::EmptyTypicalSet { n, delta });
    }
    let input = set_stats(
        &probs.iter().cloned().filter(|&p| p > 0.0).collect::<Vec<_>>(),
        n,
        nf * delta,
        &lf,
        guard,
    )?;

    let mut worst = [f64::INFINITY; 4];
    let mut eve_op: f64 = 0.0;
    let mut bob_rank: f64 = 0.0;
    for ty in &types {
        let ec = eve.conditional(ty, delta, &lf, guard)?;
        let bc = bob.conditional(ty, delta, &lf, guard)?;
        worst[0] = worst[0].min(ec.mass);
        worst[1] = worst[1].min(eve.output_mass(ty, nf * wide, &lf, guard)?);
        worst[2] = worst[2].min(bc.mass);
        worst[3] = worst[3].min(bob.output_mass(ty, nf * wide, &lf, guard)?);
        eve_op = eve_op.max(ec.max_weight);
        bob_rank = bob_rank.max(bc.size);
    }
    let eve_out = set_stats(&eve.avg_spectrum, n, nf * wide, &lf, guard)?;
    let bob_out = set_stats(&bob.avg_spectrum, n, nf * wide, &lf, guard)?;

    let floor = 1.0 - params.epsilon;
    let properties = vec![
        PropertyMargin::at_least("typical_mass", input.mass, floor),
        PropertyMargin::at_least("eve_conditional_mass", worst[0], floor),
        PropertyMargin::at_least("eve_output_mass", worst[1], floor),
        PropertyMargin::at_least("bob_conditional_mass", worst[2], floor),
        PropertyMargin::at_least("bob_output_mass", worst[3], floor),
        PropertyMargin::at_most("eve_output_rank", eve_out.size, 1.0 / params.alpha),
        PropertyMargin::at_most("eve_conditional_operator", eve_op, params.beta),
        PropertyMargin::at_most("bob_conditional_rank", bob_rank, 1.0 / params.beta_tilde),
        PropertyMargin::at_most("bob_output_operator", bob_out.max_weight, params.alpha_tilde),
    ];
    let epsilon_achieved = properties[..5]
        .iter()
        .map(|p| 1.0 - p.value)
        .fold(0.0f64, f64::max);

    let per_letter = |x: f64| x.log2() / nf;
    let c_required = [
        (per_letter(eve_out.size) - params.h_e) / delta,
        (per_letter(eve_op) + params.h_e_given_x) / delta,
        (per_letter(bob_rank) - params.h_q_given_x) / delta,
        (per_letter(bob_out.max_weight) + params.h_q) / delta,
    ]
    .iter()
    .fold(0.0f64, |m, &v| m.max(v + COUNT_TOL));

    Ok(PropertyReport {
        params,
        properties,
        epsilon_achieved: epsilon_achieved.max(0.0),
        c_required,
        typical_types: types.len(),
    })
}

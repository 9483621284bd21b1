//! Typical and conditionally typical sequences and projectors, pruned
//! distributions, and exact checks of the typicality bounds used by the
//! wiretap codes.
//!
//! A sequence `xⁿ` is typical for `p` with slack `δ` when every symbol count
//! satisfies `|N(x|xⁿ) − n p(x)| ≤ nδ` and symbols with `p(x) = 0` do not
//! occur at all.

mod properties;

pub use properties::{verify_properties, PropertyMargin, PropertyReport, TypicalityParams};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use serde::Serialize;

use crate::channel::validate_distribution;
use crate::error::{Error, Result};
use crate::guard::{power, Guard};
use crate::qmat::{json, linalg, CMat, CVec, DensityOperator, RANK_TOL};

/// Absolute slack added to counting bounds so that `n p(x) ± nδ` landing on
/// an integer is not lost to rounding.
pub const COUNT_TOL: f64 = 1e-9;

/// Sequences as symbol lists, in lexicographic order.
pub type Sequence = Vec<u32>;

#[derive(Clone, Debug, Serialize)]
pub struct TypicalSet {
    pub n: usize,
    pub delta: f64,
    pub sequences: Vec<Sequence>,
    /// Probability of the set under the generating distribution.
    pub mass: f64,
}

impl TypicalSet {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn contains(&self, seq: &[u32]) -> bool {
        self.sequences
            .binary_search_by(|s| s.as_slice().cmp(seq))
            .is_ok()
    }
}

/// Inclusive count window `[lo, hi]` for `expected ± slack`; empty when the
/// probability is zero and the symbol must not occur.
fn count_window(prob: f64, total: usize, slack: f64) -> (i64, i64) {
    if prob <= 0.0 {
        return (0, 0);
    }
    let mean = prob * total as f64;
    let lo = (mean - slack - COUNT_TOL).ceil().max(0.0) as i64;
    let hi = (mean + slack + COUNT_TOL).floor().min(total as i64 as f64) as i64;
    (lo, hi)
}

/// Depth-first enumeration of sequences whose per-(class, symbol) counts lie
/// in the given windows. `weights[class][symbol]` multiplies into the mass.
struct Enumerator<'a> {
    classes: &'a [usize],
    windows: Vec<Vec<(i64, i64)>>,
    weights: &'a [Vec<f64>],
    counts: Vec<Vec<i64>>,
    remaining: Vec<i64>,
    current: Sequence,
    out: Vec<Sequence>,
    mass: f64,
}

impl Enumerator<'_> {
    fn deficit(&self, class: usize) -> i64 {
        self.windows[class]
            .iter()
            .zip(&self.counts[class])
            .map(|(w, c)| (w.0 - c).max(0))
            .sum()
    }

    fn run(&mut self, pos: usize, weight: f64) {
        if pos == self.classes.len() {
            self.out.push(self.current.clone());
            self.mass += weight;
            return;
        }
        let u = self.classes[pos];
        self.remaining[u] -= 1;
        for x in 0..self.windows[u].len() {
            if self.counts[u][x] + 1 > self.windows[u][x].1 {
                continue;
            }
            self.counts[u][x] += 1;
            if self.deficit(u) <= self.remaining[u] {
                self.current.push(x as u32);
                self.run(pos + 1, weight * self.weights[u][x]);
                self.current.pop();
            }
            self.counts[u][x] -= 1;
        }
        self.remaining[u] += 1;
    }
}

fn enumerate(
    classes: &[usize],
    windows: Vec<Vec<(i64, i64)>>,
    weights: &[Vec<f64>],
) -> (Vec<Sequence>, f64) {
    let k = windows.len();
    let mut remaining = vec![0i64; k];
    for &u in classes {
        remaining[u] += 1;
    }
    let mut e = Enumerator {
        classes,
        counts: windows.iter().map(|w| vec![0; w.len()]).collect(),
        windows,
        weights,
        remaining,
        current: Vec::with_capacity(classes.len()),
        out: Vec::new(),
        mass: 0.0,
    };
    if (0..k).all(|u| e.deficit(u) <= e.remaining[u]) {
        e.run(0, 1.0);
    }
    (e.out, e.mass)
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta must be nonnegative, got {delta}")));
    }
    Ok(())
}

/// `T^n_{p,δ}` by exhaustive enumeration.
pub fn typical_set(p: &[f64], n: usize, delta: f64, guard: &Guard) -> Result<TypicalSet> {
    validate_distribution(p)?;
    check_delta(delta)?;
    guard.check_sequences("typical set enumeration", power(p.len(), n))?;
    let slack = n as f64 * delta;
    let windows = vec![p.iter().map(|&q| count_window(q, n, slack)).collect()];
    let (sequences, mass) = enumerate(&vec![0; n], windows, &[p.to_vec()]);
    Ok(TypicalSet {
        n,
        delta,
        sequences,
        mass,
    })
}

/// Sequences `xⁿ` conditionally typical given `uⁿ` for the stochastic map
/// `transition[u][x] = P(x|u)`:
/// `|N((u,x)|(uⁿ,xⁿ)) − P(x|u) N(u|uⁿ)| ≤ nδ`, with `N((u,x)) = 0` whenever
/// `P(x|u) = 0`.
pub fn conditionally_typical_set(
    transition: &[Vec<f64>],
    u_n: &[usize],
    delta: f64,
    guard: &Guard,
) -> Result<TypicalSet> {
    check_delta(delta)?;
    let width = transition.first().map_or(0, |r| r.len());
    for row in transition {
        validate_distribution(row)?;
        if row.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                got: row.len(),
            });
        }
    }
    if let Some(&u) = u_n.iter().find(|&&u| u >= transition.len()) {
        return Err(Error::InvalidParameter(format!("input symbol {u} outside the map's domain")));
    }
    let n = u_n.len();
    guard.check_sequences("conditional typical set enumeration", power(width, n))?;
    let slack = n as f64 * delta;
    let mut occurrences = vec![0usize; transition.len()];
    for &u in u_n {
        occurrences[u] += 1;
    }
    let windows = transition
        .iter()
        .zip(&occurrences)
        .map(|(row, &nu)| row.iter().map(|&q| count_window(q, nu, slack)).collect())
        .collect();
    let (sequences, mass) = enumerate(u_n, windows, transition);
    Ok(TypicalSet {
        n,
        delta,
        sequences,
        mass,
    })
}

/// Spectrum of a state with eigenvalues at or below `RANK_TOL` set to zero.
fn clipped_spectrum(values: &[f64]) -> Vec<f64> {
    let v: Vec<f64> = values
        .iter()
        .map(|&l| if l > RANK_TOL { l } else { 0.0 })
        .collect();
    let total: f64 = v.iter().sum();
    v.iter().map(|l| l / total).collect()
}

/// Projector onto the span of eigen-sequences `|k₁⟩⊗…⊗|kₙ⟩`, stored as an
/// orthonormal column basis.
#[derive(Clone, Debug, Serialize)]
pub struct TypicalProjector {
    pub n: usize,
    pub delta: f64,
    /// Local dimension of each tensor factor.
    pub dims: Vec<usize>,
    /// Eigen-index sequence of each basis column.
    pub labels: Vec<Sequence>,
    /// Product eigenvalue `Π_i λ(k_i)` of each column.
    pub eigenvalues: Vec<f64>,
    #[serde(with = "json::matrix")]
    pub basis: CMat,
}

impl TypicalProjector {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// The projector `B B†` as a dense matrix.
    pub fn matrix(&self) -> CMat {
        &self.basis * self.basis.adjoint()
    }

    /// `Tr(Π A)`.
    pub fn trace_with(&self, a: &CMat) -> f64 {
        (self.basis.adjoint() * a * &self.basis).trace().re
    }
}

/// One eigen-decomposition per tensor position, shared by positions in the
/// same class.
fn build_projector(
    n: usize,
    delta: f64,
    eigs: &[linalg::Eigh],
    classes: &[usize],
    labels: Vec<Sequence>,
    spectra: &[Vec<f64>],
) -> TypicalProjector {
    let dims: Vec<usize> = classes.iter().map(|&u| eigs[u].dim()).collect();
    let total: usize = dims.iter().product();
    let mut basis = CMat::zeros(total, labels.len());
    let mut eigenvalues = Vec::with_capacity(labels.len());
    for (col, seq) in labels.iter().enumerate() {
        let vecs: Vec<CVec> = seq
            .iter()
            .zip(classes)
            .map(|(&k, &u)| eigs[u].vector(k as usize))
            .collect();
        basis
            .column_mut(col)
            .copy_from(&linalg::tensor_vec_all(vecs.iter()));
        eigenvalues.push(
            seq.iter()
                .zip(classes)
                .map(|(&k, &u)| spectra[u][k as usize])
                .product(),
        );
    }
    TypicalProjector {
        n,
        delta,
        dims,
        labels,
        eigenvalues,
        basis,
    }
}

/// `Π^n_{ρ,δ} = Σ_{kⁿ ∈ T^n_{λ,δ}} |kⁿ⟩⟨kⁿ|` in the canonical eigenbasis of `ρ`.
pub fn typical_projector(
    rho: &DensityOperator,
    n: usize,
    delta: f64,
    guard: &Guard,
) -> Result<TypicalProjector> {
    guard.check_dim("typical projector", power(rho.dim(), n))?;
    let e = rho.eigen();
    let spectrum = clipped_spectrum(&e.values);
    let set = typical_set(&spectrum, n, delta, guard)?;
    Ok(build_projector(
        n,
        delta,
        &[e],
        &vec![0; n],
        set.sequences,
        &[spectrum],
    ))
}

/// `Π^n_{{ρ_u},δ}(uⁿ) = ⊗_u Π^{I_u}_{ρ_u,δ}` where `I_u` are the positions
/// carrying `u`; each factor is the typical projector of `ρ_u` at blocklength
/// `|I_u|`.
pub fn conditionally_typical_projector(
    states: &[DensityOperator],
    u_n: &[usize],
    delta: f64,
    guard: &Guard,
) -> Result<TypicalProjector> {
    check_delta(delta)?;
    if let Some(&u) = u_n.iter().find(|&&u| u >= states.len()) {
        return Err(Error::InvalidParameter(format!("symbol {u} has no state")));
    }
    let total = u_n
        .iter()
        .fold(1u128, |acc, &u| acc.saturating_mul(states[u].dim() as u128));
    guard.check_dim("conditionally typical projector", total)?;
    let n = u_n.len();
    let eigs: Vec<linalg::Eigh> = states.iter().map(|s| s.eigen()).collect();
    let spectra: Vec<Vec<f64>> = eigs.iter().map(|e| clipped_spectrum(&e.values)).collect();

    // Per-class typical sets, then their Cartesian product placed back into
    // the class positions.
    let mut labels: Vec<Sequence> = vec![vec![0; n]];
    for (u, spectrum) in spectra.iter().enumerate() {
        let positions: Vec<usize> = (0..n).filter(|&i| u_n[i] == u).collect();
        if positions.is_empty() {
            continue;
        }
        let set = typical_set(spectrum, positions.len(), delta, guard)?;
        let mut next = Vec::with_capacity(labels.len() * set.len());
        for base in &labels {
            for seq in &set.sequences {
                let mut l = base.clone();
                for (&pos, &k) in positions.iter().zip(seq) {
                    l[pos] = k;
                }
                next.push(l);
            }
        }
        labels = next;
    }
    labels.sort();
    Ok(build_projector(n, delta, &eigs, u_n, labels, &spectra))
}

/// `p′(xⁿ) = p^{⊗n}(xⁿ)/s` on the typical set, `s = Pr{Xⁿ ∈ T}`.
#[derive(Clone, Debug, Serialize)]
pub struct PrunedDistribution {
    pub set: TypicalSet,
    /// `p′` aligned with `set.sequences`.
    pub weights: Vec<f64>,
    pub s: f64,
}

impl PrunedDistribution {
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> &[u32] {
        let dist = WeightedIndex::new(&self.weights).expect("nonempty positive weights");
        &self.set.sequences[dist.sample(rng)]
    }

    /// Sampler reusable across many draws.
    pub fn sampler(&self) -> WeightedIndex<f64> {
        WeightedIndex::new(&self.weights).expect("nonempty positive weights")
    }

    pub fn probability(&self, seq: &[u32]) -> f64 {
        match self
            .set
            .sequences
            .binary_search_by(|s| s.as_slice().cmp(seq))
        {
            Ok(i) => self.weights[i],
            Err(_) => 0.0,
        }
    }
}

pub fn sequence_probability(p: &[f64], seq: &[u32]) -> f64 {
    seq.iter().map(|&x| p[x as usize]).product()
}

pub fn pruned_distribution(
    p: &[f64],
    n: usize,
    delta: f64,
    guard: &Guard,
) -> Result<PrunedDistribution> {
    let set = typical_set(p, n, delta, guard)?;
    if set.is_empty() || set.mass <= 0.0 {
        return Err(Error::EmptyTypicalSet { n, delta });
    }
    let raw: Vec<f64> = set
        .sequences
        .iter()
        .map(|s| sequence_probability(p, s))
        .collect();
    let s: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / s).collect();
    Ok(PrunedDistribution { set, weights, s })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{linalg::max_abs, re};

    fn g() -> Guard {
        Guard::default()
    }

    /// Brute-force counting check, independent of the pruned enumeration.
    fn brute_force(p: &[f64], n: usize, delta: f64) -> (usize, f64) {
        let d = p.len();
        let mut count = 0;
        let mut mass = 0.0;
        for idx in 0..d.pow(n as u32) {
            let mut seq = Vec::new();
            let mut r = idx;
            for _ in 0..n {
                seq.push(r % d);
                r /= d;
            }
            let ok = (0..d).all(|x| {
                let c = seq.iter().filter(|&&s| s == x).count() as f64;
                if p[x] == 0.0 {
                    c == 0.0
                } else {
                    (c - n as f64 * p[x]).abs() <= n as f64 * delta + 1e-9
                }
            });
            if ok {
                count += 1;
                mass += seq.iter().map(|&x| p[x]).product::<f64>();
            }
        }
        (count, mass)
    }

    #[test]
    fn balanced_bits() {
        let t = typical_set(&[0.5, 0.5], 4, 0.0, &g()).unwrap();
        assert_eq!(t.len(), 6);
        assert!(t.sequences.iter().all(|s| s.iter().sum::<u32>() == 2));
        assert!((t.mass - 6.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn deterministic_distribution() {
        let t = typical_set(&[0.0, 1.0, 0.0], 5, 0.3, &g()).unwrap();
        assert_eq!(t.sequences, vec![vec![1; 5]]);
        assert!((t.mass - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matches_brute_force() {
        for (p, n, delta) in [
            (vec![0.5, 0.5], 10, 0.2),
            (vec![0.7, 0.2, 0.1], 6, 0.15),
            (vec![0.9, 0.1], 9, 0.05),
        ] {
            let t = typical_set(&p, n, delta, &g()).unwrap();
            let (count, mass) = brute_force(&p, n, delta);
            assert_eq!(t.len(), count);
            assert!((t.mass - mass).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_bits_mass_matches_binomial_tail() {
        // n=10, δ=0.2: counts of ones in [3, 7].
        let t = typical_set(&[0.5, 0.5], 10, 0.2, &g()).unwrap();
        let binom = [1.0, 10.0, 45.0, 120.0, 210.0, 252.0, 210.0, 120.0, 45.0, 10.0, 1.0];
        let expected: f64 = binom[3..=7].iter().sum::<f64>() / 1024.0;
        assert!((t.mass - expected).abs() < 1e-14);
    }

    #[test]
    fn guard_is_enforced() {
        let err = typical_set(&[0.5, 0.5], 21, 0.1, &g()).unwrap_err();
        assert!(matches!(err, Error::GuardExceeded { .. }));
    }

    #[test]
    fn conditional_collapses_for_constant_input() {
        let p = vec![vec![0.8, 0.2], vec![0.3, 0.7]];
        let c = conditionally_typical_set(&p, &[1; 6], 0.2, &g()).unwrap();
        let t = typical_set(&p[1], 6, 0.2, &g()).unwrap();
        assert_eq!(c.sequences, t.sequences);
        assert!((c.mass - t.mass).abs() < 1e-14);
    }

    #[test]
    fn conditional_identity_map() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let u = [0, 1, 1, 0, 1];
        let c = conditionally_typical_set(&id, &u, 0.2, &g()).unwrap();
        assert_eq!(c.sequences, vec![vec![0, 1, 1, 0, 1]]);
    }

    #[test]
    fn conditional_matches_brute_force() {
        let p = vec![vec![0.75, 0.25], vec![0.4, 0.6]];
        let u = [0, 1, 0, 0, 1, 1, 0, 1];
        let delta = 0.25;
        let c = conditionally_typical_set(&p, &u, delta, &g()).unwrap();
        let mut count = 0;
        let mut mass = 0.0;
        for idx in 0..256usize {
            let x: Vec<usize> = (0..8).map(|i| (idx >> i) & 1).collect();
            let ok = (0..2).all(|a| {
                let nu = u.iter().filter(|&&v| v == a).count() as f64;
                (0..2).all(|b| {
                    let nab = (0..8).filter(|&i| u[i] == a && x[i] == b).count() as f64;
                    (nab - p[a][b] * nu).abs() <= 8.0 * delta + 1e-9
                })
            });
            if ok {
                count += 1;
                mass += (0..8).map(|i| p[u[i]][x[i]]).product::<f64>();
            }
        }
        assert_eq!(c.len(), count);
        assert!((c.mass - mass).abs() < 1e-12);
    }

    #[test]
    fn projector_of_pure_state_is_rank_one() {
        let psi = crate::qmat::PureState::normalized(CVec::from_vec(vec![re(1.0), re(1.0)]))
            .unwrap()
            .density();
        let pi = typical_projector(&psi, 5, 0.2, &g()).unwrap();
        assert_eq!(pi.rank(), 1);
        let target = psi.tensor_power(5);
        assert!(max_abs(&(pi.matrix() - target.matrix())) < 1e-12);
    }

    #[test]
    fn projector_rank_and_idempotence() {
        let rho = DensityOperator::diagonal(&[0.6, 0.3, 0.1]).unwrap();
        let pi = typical_projector(&rho, 4, 0.2, &g()).unwrap();
        let set = typical_set(&[0.6, 0.3, 0.1], 4, 0.2, &g()).unwrap();
        assert_eq!(pi.rank(), set.len());
        let m = pi.matrix();
        assert!(max_abs(&(&m * &m - &m)) < 1e-10);
        assert!((pi.trace_with(rho.tensor_power(4).matrix()) - set.mass).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_qubit_with_half_slack_is_identity() {
        let rho = DensityOperator::maximally_mixed(2);
        let pi = typical_projector(&rho, 4, 0.5, &g()).unwrap();
        assert_eq!(pi.rank(), 16);
        assert!(max_abs(&(pi.matrix() - CMat::identity(16, 16))) < 1e-12);
    }

    #[test]
    fn conditional_projector_commutes_with_product_state() {
        let a = DensityOperator::diagonal(&[0.7, 0.3]).unwrap();
        let u = crate::qmat::linalg::random_unitary(2, &mut crate::rng::stream(3, &[]));
        let b = DensityOperator::diagonal(&[0.6, 0.4]).unwrap().conjugate(&u).unwrap();
        let states = vec![a, b];
        let u_n = [0, 1, 1, 0];
        let pi = conditionally_typical_projector(&states, &u_n, 0.25, &g()).unwrap();
        let prod = linalg::tensor_all(u_n.iter().map(|&x| states[x].matrix()));
        let m = pi.matrix();
        assert!(max_abs(&(&m * &prod - &prod * &m)) < 1e-12);
        let e = linalg::eigh(&m);
        assert!(e.values.iter().all(|l| l.abs() < 1e-10 || (l - 1.0).abs() < 1e-10));
    }

    #[test]
    fn pruned_distribution_normalizes() {
        let pd = pruned_distribution(&[0.7, 0.3], 8, 0.1, &g()).unwrap();
        assert!((pd.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((pd.s - pd.set.mass).abs() < 1e-14);
        let wide = pruned_distribution(&[0.7, 0.3], 6, 1.0, &g()).unwrap();
        assert_eq!(wide.set.len(), 64);
        for (seq, w) in wide.set.sequences.iter().zip(&wide.weights) {
            assert!((w - sequence_probability(&[0.7, 0.3], seq)).abs() < 1e-14);
        }
    }

    #[test]
    fn empty_typical_set_is_an_error() {
        // n p = 0.5 for each symbol with zero slack: no integer count fits.
        let err = pruned_distribution(&[0.5, 0.5], 1, 0.0, &g()).unwrap_err();
        assert!(matches!(err, Error::EmptyTypicalSet { .. }));
    }
}

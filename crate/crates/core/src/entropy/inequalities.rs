//! Checkers for the entropic and fidelity inequalities, and seeded random
//! trial suites over them.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{coherent_information, delta_h, eta, von_neumann};
use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::qmat::{self, fidelity, linalg, trace_norm, DensityOperator, PureState, SubsystemShape};
use crate::rng;

/// A check passes when `rhs − lhs ≥ −PASS_SLACK`.
pub const PASS_SLACK: f64 = 1e-8;

/// Purity above which a state is treated as pure.
const PURE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            margin,
            pass: margin >= -PASS_SLACK,
        }
    }

    /// Equality check: `margin = −|lhs − rhs|`.
    pub fn equality(name: &str, lhs: f64, rhs: f64) -> Self {
        let margin = -(lhs - rhs).abs();
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            margin,
            pass: margin >= -PASS_SLACK,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InequalityKind {
    FuchsVanDeGraaf,
    Fannes,
    DeltaH,
    DataProcessing,
    FidelityMonotonicity,
    Triangle,
}

impl InequalityKind {
    pub const ALL: [InequalityKind; 6] = [
        Self::FuchsVanDeGraaf,
        Self::Fannes,
        Self::DeltaH,
        Self::DataProcessing,
        Self::FidelityMonotonicity,
        Self::Triangle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::FuchsVanDeGraaf => "fuchs-van-de-graaf",
            Self::Fannes => "fannes",
            Self::DeltaH => "delta-h",
            Self::DataProcessing => "data-processing",
            Self::FidelityMonotonicity => "fidelity-monotonicity",
            Self::Triangle => "triangle",
        }
    }

    fn stream_id(&self) -> u64 {
        Self::ALL.iter().position(|k| k == self).unwrap() as u64 + 1
    }
}

impl fmt::Display for InequalityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InequalityKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

/// `1 − √F ≤ ½‖ρ−σ‖₁ ≤ √(1−F)`; equality on the right for pure pairs.
pub fn fuchs_van_de_graaf(rho: &DensityOperator, sigma: &DensityOperator) -> Result<Vec<Check>> {
    let f = fidelity(rho, sigma)?;
    let t = qmat::trace_distance(rho, sigma)?;
    let upper = (1.0 - f).max(0.0).sqrt();
    let mut out = vec![
        Check::new("fvdg-lower", 1.0 - f.sqrt(), t),
        Check::new("fvdg-upper", t, upper),
    ];
    if rho.purity() > 1.0 - PURE_TOL && sigma.purity() > 1.0 - PURE_TOL {
        out.push(Check::equality("fvdg-pure-equality", t, upper));
    }
    Ok(out)
}

/// `|H(ρ) − H(σ)| ≤ T log₂ d + η(T)` with `T = ‖ρ − σ‖₁`; for `T > 1/e` the
/// `η` term is replaced by its maximum.
pub fn fannes(rho: &DensityOperator, sigma: &DensityOperator) -> Result<Check> {
    let t = trace_norm(&(rho.matrix() - sigma.matrix()));
    let d = rho.dim() as f64;
    let e_inv = (-1.0f64).exp();
    let rhs = t * d.log2() + eta(t.min(e_inv));
    Ok(Check::new("fannes", (von_neumann(rho) - von_neumann(sigma)).abs(), rhs))
}

/// `|ΔH(ρ) − ΔH(σ)| ≤ 2/e + 4 log₂ d √(1 − f)`, `d` the joint dimension.
pub fn delta_h_continuity(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    shape: &SubsystemShape,
) -> Result<Check> {
    let f = fidelity(rho, sigma)?;
    let lhs = (delta_h(rho, shape)? - delta_h(sigma, shape)?).abs();
    let d = rho.dim() as f64;
    let rhs = 2.0 / std::f64::consts::E + 4.0 * d.log2() * (1.0 - f).max(0.0).sqrt();
    Ok(Check::new("delta-h-continuity", lhs, rhs))
}

/// `I_c(ρ, D∘N) ≤ I_c(ρ, N)`.
pub fn data_processing(
    rho: &DensityOperator,
    chan: &QuantumChannel,
    post: &QuantumChannel,
) -> Result<Check> {
    let composed = chan.then(post)?;
    Ok(Check::new(
        "data-processing",
        coherent_information(rho, &composed)?,
        coherent_information(rho, chan)?,
    ))
}

/// `F(ρ^{RQ}, σ^{RQ}) ≤ F(ρ^Q, σ^Q)` with `Q` the second factor.
pub fn fidelity_monotonicity(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    shape: &SubsystemShape,
) -> Result<Check> {
    let joint = fidelity(rho, sigma)?;
    let a = rho.partial_trace(shape, &[1])?;
    let b = sigma.partial_trace(shape, &[1])?;
    Ok(Check::new("fidelity-monotonicity", joint, fidelity(&a, &b)?))
}

/// `‖A − C‖₁ ≤ ‖A − B‖₁ + ‖B − C‖₁`.
pub fn triangle(a: &qmat::CMat, b: &qmat::CMat, c: &qmat::CMat) -> Check {
    Check::new(
        "triangle",
        trace_norm(&(a - c)),
        trace_norm(&(a - b)) + trace_norm(&(b - c)),
    )
}

/// Random state with a random rank, pure with probability 1/4.
pub fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityOperator {
    if rng.random_bool(0.25) {
        PureState::random(d, rng).density()
    } else {
        let rank = rng.random_range(1..=d);
        DensityOperator::random(d, rank, rng)
    }
}

/// `σ` near `ρ`: a convex mixture with a small random weight on another state.
fn nearby_state<R: Rng + ?Sized>(rho: &DensityOperator, rng: &mut R) -> DensityOperator {
    let t: f64 = rng.random_range(0.0..0.2);
    let other = random_state(rho.dim(), rng);
    DensityOperator::from_trusted(rho.matrix() * qmat::re(1.0 - t) + other.matrix() * qmat::re(t))
}

fn pair<R: Rng + ?Sized>(d: usize, rng: &mut R) -> (DensityOperator, DensityOperator) {
    let rho = random_state(d, rng);
    let sigma = match rng.random_range(0..3) {
        0 => random_state(d, rng),
        1 => nearby_state(&rho, rng),
        _ => PureState::random(d, rng).density(),
    };
    (rho, sigma)
}

/// Dimension for trial `i`: cycles through 2..=8.
pub fn trial_dim(i: usize) -> usize {
    2 + i % 7
}

/// One random instance of `kind` at dimension `d`.
pub fn random_trial<R: Rng + ?Sized>(kind: InequalityKind, d: usize, rng: &mut R) -> Result<Vec<Check>> {
    match kind {
        InequalityKind::FuchsVanDeGraaf => {
            let (rho, sigma) = if rng.random_bool(0.5) {
                (PureState::random(d, rng).density(), PureState::random(d, rng).density())
            } else {
                pair(d, rng)
            };
            fuchs_van_de_graaf(&rho, &sigma)
        }
        InequalityKind::Fannes => {
            let (rho, sigma) = pair(d, rng);
            Ok(vec![fannes(&rho, &sigma)?])
        }
        InequalityKind::DeltaH => {
            let r = rng.random_range(2..=3);
            let shape = SubsystemShape::bipartite(r, d);
            let (rho, sigma) = pair(r * d, rng);
            Ok(vec![delta_h_continuity(&rho, &sigma, &shape)?])
        }
        InequalityKind::DataProcessing => {
            let k1 = rng.random_range(1..=3);
            let k2 = rng.random_range(1..=3);
            let chan = QuantumChannel::random(d, d, k1, rng);
            let post = QuantumChannel::random(d, d, k2, rng);
            let rho = random_state(d, rng);
            Ok(vec![data_processing(&rho, &chan, &post)?])
        }
        InequalityKind::FidelityMonotonicity => {
            let r = rng.random_range(2..=3);
            let shape = SubsystemShape::bipartite(r, d);
            let (rho, sigma) = pair(r * d, rng);
            Ok(vec![fidelity_monotonicity(&rho, &sigma, &shape)?])
        }
        InequalityKind::Triangle => {
            let a = linalg::random_ginibre(d, d, rng);
            let b = linalg::random_ginibre(d, d, rng);
            let c = linalg::random_ginibre(d, d, rng);
            Ok(vec![triangle(&a, &b, &c)])
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub kind: String,
    pub trials: usize,
    pub checks: usize,
    pub violations: usize,
    pub worst_margin: f64,
    /// Trial indices with a violated check.
    pub failed_trials: Vec<usize>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    /// Fold per-trial check lists, in trial order.
    pub fn from_trials(kind: &str, results: &[Vec<Check>]) -> Self {
        let mut report = Self {
            kind: kind.to_string(),
            trials: results.len(),
            checks: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            failed_trials: Vec::new(),
        };
        for (i, checks) in results.iter().enumerate() {
            report.checks += checks.len();
            let bad = checks.iter().filter(|c| !c.pass).count();
            if bad > 0 {
                report.violations += bad;
                report.failed_trials.push(i);
            }
            for c in checks {
                report.worst_margin = report.worst_margin.min(c.margin);
            }
        }
        report
    }
}

/// `trials` seeded random instances of `kind`, dimensions cycling 2..=8.
/// Trial `i` draws from its own stream, so the result is independent of
/// thread count.
pub fn run_suite(kind: InequalityKind, trials: usize, seed: u64) -> Result<SuiteReport> {
    let results: Vec<Vec<Check>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, &[kind.stream_id(), i as u64]);
            random_trial(kind, trial_dim(i), &mut r)
        })
        .collect::<Result<_>>()?;
    Ok(SuiteReport::from_trials(kind.name(), &results))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_states_saturate_fvdg_and_fannes() {
        let r = DensityOperator::diagonal(&[0.3, 0.7]).unwrap();
        for c in fuchs_van_de_graaf(&r, &r).unwrap() {
            assert!(c.lhs.abs() < 1e-7 && c.pass);
        }
        let f = fannes(&r, &r).unwrap();
        assert!(f.lhs.abs() < 1e-12 && f.rhs.abs() < 1e-12);
    }

    #[test]
    fn kinds_parse() {
        for k in InequalityKind::ALL {
            assert_eq!(k.name().parse::<InequalityKind>().unwrap(), k);
        }
        assert!(matches!("bogus".parse::<InequalityKind>(), Err(Error::UnknownKind(_))));
    }

    #[test]
    fn small_suites_pass() {
        for k in InequalityKind::ALL {
            let rep = run_suite(k, 28, 1).unwrap();
            assert!(rep.passed(), "{k}: {rep:?}");
        }
    }
}

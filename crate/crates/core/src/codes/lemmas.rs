//! Random trials of the operator inequalities used by the codes: the gentle
//! measurement bound, the Hayashi–Nagaoka inequality, and the operator
//! Chernoff bound.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::TAG_LEMMA;
use crate::error::{Error, Result};
use crate::qmat::{linalg, re, trace_norm, CMat, CVec, DensityOperator, PureState};
use crate::rng;

/// Per-trial margins below this count as violations.
pub const LEMMA_SLACK: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaKind {
    /// `Tr ρΛ ≥ 1 − λ ⇒ ‖ρ − √Λ ρ √Λ‖₁ ≤ √(8λ)`.
    Gentle,
    /// `I − (S+T)^{-1/2} S (S+T)^{-1/2} ≤ 2(I − S) + 4T` for `0 ≤ S ≤ I`, `T ≥ 0`.
    HayashiNagaoka,
    /// `Pr{(1/μ) Σ ξ_m ∉ [(1±η)θ]} ≤ 2 d exp(−μη²t / (2 ln 2))`.
    Chernoff,
}

impl LemmaKind {
    pub const ALL: [LemmaKind; 3] = [LemmaKind::Gentle, LemmaKind::HayashiNagaoka, LemmaKind::Chernoff];

    pub fn name(self) -> &'static str {
        match self {
            LemmaKind::Gentle => "gentle",
            LemmaKind::HayashiNagaoka => "hn",
            LemmaKind::Chernoff => "chernoff",
        }
    }

    fn id(self) -> u64 {
        match self {
            LemmaKind::Gentle => 0,
            LemmaKind::HayashiNagaoka => 1,
            LemmaKind::Chernoff => 2,
        }
    }
}

impl fmt::Display for LemmaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LemmaKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LemmaParams {
    /// Samples averaged per Chernoff trial.
    pub mu: usize,
    /// Relative interval half-width for Chernoff.
    pub eta: f64,
}

impl Default for LemmaParams {
    fn default() -> Self {
        Self { mu: 50, eta: 0.3 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub kind: LemmaKind,
    pub trials: usize,
    /// Trials with margin below `−LEMMA_SLACK` (gentle, hn) or outside the
    /// interval (chernoff).
    pub violations: usize,
    pub worst_margin: f64,
    pub failure_frequency: Option<f64>,
    /// Largest `t` with `θ ≥ tI` (chernoff).
    pub t: Option<f64>,
    pub bound: Option<f64>,
    pub passed: bool,
}

/// Dimension of trial `i`: cycles through 2..=8.
fn trial_dim(i: usize) -> usize {
    2 + i % 7
}

fn gentle_margin(rng: &mut rng::Rng, d: usize) -> f64 {
    let rank = rng.random_range(1..=d);
    let rho = DensityOperator::random(d, rank, rng);
    // Mostly near-identity effects so that λ is small and the bound is tight.
    let lambda_op = if rng.random_bool(0.75) {
        let scale: f64 = rng.random::<f64>() * 0.2;
        CMat::identity(d, d) - linalg::random_effect(d, rng) * re(scale)
    } else {
        linalg::random_effect(d, rng)
    };
    let (lhs, rhs) = gentle_sides(rho.matrix(), &lambda_op);
    rhs - lhs
}

/// `(‖ρ − √Λ ρ √Λ‖₁, √(8λ))` with `λ = 1 − Tr ρΛ`.
pub fn gentle_sides(rho: &CMat, effect: &CMat) -> (f64, f64) {
    let lambda = (1.0 - linalg::trace_product(rho, effect).re).max(0.0);
    let root = linalg::sqrtm_psd(effect);
    let lhs = trace_norm(&(rho - &root * rho * &root));
    (lhs, (8.0 * lambda).sqrt())
}

fn hn_margin(rng: &mut rng::Rng, d: usize) -> f64 {
    let s = linalg::random_effect(d, rng);
    let rank = rng.random_range(1..=d);
    let t_raw = linalg::random_psd(d, rank, rng);
    let scale = rng.random::<f64>() / linalg::trace(&t_raw).re.max(1e-300);
    let t = t_raw * re(scale);
    hn_margin_for(&s, &t)
}

/// Smallest eigenvalue of `2(I−S) + 4T − (I − (S+T)^{-1/2} S (S+T)^{-1/2})`,
/// the inverse taken on the support of `S + T`.
pub fn hn_margin_for(s: &CMat, t: &CMat) -> f64 {
    let d = s.nrows();
    let sum = s + t;
    let inv = linalg::pinv_sqrt(&sum, 1e-12 * linalg::max_eigenvalue(&sum).max(1.0));
    let id = CMat::identity(d, d);
    let lhs = &id - &inv * s * &inv;
    let rhs = (&id - s) * re(2.0) + t * re(4.0);
    linalg::min_eigenvalue(&(rhs - lhs))
}

/// Equiprobable `{|0⟩, |1⟩, |+⟩, |−⟩}`: average `I/2`, so `t = 1/2`.
fn chernoff_ensemble() -> Vec<CMat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [
        [re(1.0), re(0.0)],
        [re(0.0), re(1.0)],
        [re(s), re(s)],
        [re(s), re(-s)],
    ]
    .iter()
    .map(|v| PureState::from_trusted(CVec::from_row_slice(v)).density().into_matrix())
    .collect()
}

/// Smallest of the two interval margins (negative when outside).
fn chernoff_margin(rng: &mut rng::Rng, ensemble: &[CMat], theta: &CMat, params: &LemmaParams) -> f64 {
    let d = theta.nrows();
    let mut avg = CMat::zeros(d, d);
    for _ in 0..params.mu {
        avg += &ensemble[rng.random_range(0..ensemble.len())];
    }
    avg /= re(params.mu as f64);
    let lower = linalg::min_eigenvalue(&(&avg - theta * re(1.0 - params.eta)));
    let upper = linalg::min_eigenvalue(&(theta * re(1.0 + params.eta) - &avg));
    lower.min(upper)
}

pub fn lemma_trial(kind: LemmaKind, params: &LemmaParams, trials: usize, seed: u64) -> Result<LemmaReport> {
    if kind == LemmaKind::Chernoff && (params.mu == 0 || !(params.eta > 0.0)) {
        return Err(Error::InvalidParameter("chernoff needs mu ≥ 1 and eta > 0".into()));
    }
    let ensemble = chernoff_ensemble();
    let theta = CMat::identity(2, 2) * re(0.5);
    let margins: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, &[TAG_LEMMA, kind.id(), i as u64]);
            match kind {
                LemmaKind::Gentle => gentle_margin(&mut r, trial_dim(i)),
                LemmaKind::HayashiNagaoka => hn_margin(&mut r, trial_dim(i)),
                LemmaKind::Chernoff => chernoff_margin(&mut r, &ensemble, &theta, params),
            }
        })
        .collect();
    let worst_margin = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(match kind {
        LemmaKind::Chernoff => {
            let failures = margins.iter().filter(|&&m| m < 0.0).count();
            let freq = failures as f64 / trials.max(1) as f64;
            let t = linalg::min_eigenvalue(&theta);
            let bound = 2.0
                * 2.0
                * (-(params.mu as f64) * params.eta * params.eta * t / (2.0 * std::f64::consts::LN_2)).exp();
            LemmaReport {
                kind,
                trials,
                violations: failures,
                worst_margin,
                failure_frequency: Some(freq),
                t: Some(t),
                bound: Some(bound),
                passed: bound > 1.0 || freq <= bound,
            }
        }
        _ => {
            let violations = margins.iter().filter(|&&m| m < -LEMMA_SLACK).count();
            LemmaReport {
                kind,
                trials,
                violations,
                worst_margin,
                failure_frequency: None,
                t: None,
                bound: None,
                passed: violations == 0,
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gentle_with_identity_is_tight() {
        let rho = DensityOperator::random(3, 2, &mut rng::stream(0, &[]));
        let (lhs, rhs) = gentle_sides(rho.matrix(), &CMat::identity(3, 3));
        assert!(lhs < 1e-12 && rhs < 1e-6);
    }

    #[test]
    fn hn_with_identity_and_zero() {
        let m = hn_margin_for(&CMat::identity(3, 3), &CMat::zeros(3, 3));
        assert!(m.abs() < 1e-12);
    }

    #[test]
    fn suites_pass() {
        for kind in [LemmaKind::Gentle, LemmaKind::HayashiNagaoka] {
            let r = lemma_trial(kind, &LemmaParams::default(), 200, 42).unwrap();
            assert!(r.passed, "{kind}: worst margin {}", r.worst_margin);
        }
        let r = lemma_trial(LemmaKind::Chernoff, &LemmaParams::default(), 500, 42).unwrap();
        assert!(r.bound.unwrap() <= 1.0);
        assert!(r.passed);
    }

    #[test]
    fn kind_names_round_trip() {
        for k in LemmaKind::ALL {
            assert_eq!(k.name().parse::<LemmaKind>().unwrap(), k);
        }
        assert!("nope".parse::<LemmaKind>().is_err());
    }
}

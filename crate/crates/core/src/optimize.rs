//! Multi-start searches for the maximal coherent information of a channel
//! and for the decomposition term of the private information.
//!
//! Every reported optimum is a feasible point whose value is recomputed from
//! the returned argument. Maxima are therefore lower bounds, and the inner
//! minimum of the private information is an upper bound.
//!
//! Both searches use the map `g(A) = H(N(A)) − H(N^c(A))` on unnormalized
//! positive operators. It is homogeneous of degree one (the two outputs have
//! equal trace), so `g(p ρ) = p I_c(ρ)` and its gradient
//! `−N†(log₂ N(A)) + N^c†(log₂ N^c(A))` does not depend on the scale.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::QuantumChannel;
use crate::entropy::{coherent_information, environment_matrix, matrix_entropy};
use crate::error::{Error, Result};
use crate::guard::Guard;
use crate::qmat::{linalg, re, CMat, DensityOperator};
use crate::rng;

/// Eigenvalue floor inside the logarithms of the gradient.
const LOG_FLOOR: f64 = 1e-13;
/// Decomposition elements lighter than this are dropped from the report.
const WEIGHT_CUTOFF: f64 = 1e-13;
/// Most eigenvalue clusters for which all split patterns are tried.
const MAX_PATTERN_CLUSTERS: usize = 8;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OptimizeParams {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Converged once the best value moves less than this over `patience`
    /// iterations.
    pub tolerance: f64,
    pub patience: usize,
    /// Random feasible points evaluated for the certificate.
    pub samples: usize,
    /// Decomposition size; `d²` when unset.
    pub elements: Option<usize>,
}

impl Default for OptimizeParams {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iterations: 2000,
            tolerance: 1e-7,
            patience: 50,
            samples: 64,
            elements: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Maximize => a > b,
            Sense::Minimize => a < b,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizationResult<T> {
    pub sense: Sense,
    pub argument: T,
    pub value: f64,
    /// Best value after each iteration of the winning start.
    pub trace: Vec<f64>,
    /// Best value among `samples` random feasible points.
    pub certificate: f64,
    /// Final value of every start, structured starts first.
    pub start_values: Vec<f64>,
    /// Running best over `start_values`.
    pub best_so_far: Vec<f64>,
    pub best_start: usize,
    /// Iterations taken by every start.
    pub iterations: Vec<usize>,
    pub structured_starts: usize,
}

/// `ρ = Σ_x p(x) ρ_x`.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub weights: Vec<f64>,
    pub states: Vec<DensityOperator>,
    pub average: DensityOperator,
}

impl Decomposition {
    fn from_parts(parts: &[CMat]) -> Result<Self> {
        let d = parts[0].nrows();
        let mut weights = Vec::new();
        let mut states = Vec::new();
        let mut avg = CMat::zeros(d, d);
        for a in parts {
            let p = linalg::trace(a).re;
            if p > WEIGHT_CUTOFF {
                weights.push(p);
                states.push(DensityOperator::from_unnormalized(linalg::hermitian_part(a))?);
                avg += a;
            }
        }
        Ok(Self {
            weights,
            states,
            average: DensityOperator::from_trusted(avg),
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Largest entry of `Σ p ρ_x − ρ`.
    pub fn residual(&self, rho: &DensityOperator) -> f64 {
        let d = rho.dim();
        let mut m = -rho.matrix().clone();
        for (p, s) in self.weights.iter().zip(&self.states) {
            m += s.matrix() * re(*p);
        }
        if m.nrows() != d {
            return f64::INFINITY;
        }
        linalg::max_abs(&m)
    }

    /// `Σ p(x) I_c(ρ_x, N)`.
    pub fn coherent_average(&self, chan: &QuantumChannel) -> Result<f64> {
        let mut total = 0.0;
        for (p, s) in self.weights.iter().zip(&self.states) {
            total += p * coherent_information(s, chan)?;
        }
        Ok(total)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PrivateInformation {
    pub coherent_information: f64,
    /// Lower bound `I_c − min(best decomposition value, 0)`.
    pub private_information: f64,
    /// Minimization over decompositions; its value is the best
    /// `Σ p I_c(ρ_x)` found.
    pub decomposition: OptimizationResult<Decomposition>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Coherent,
    Private,
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Coherent => "coherent",
            Objective::Private => "private",
        })
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coherent" => Ok(Objective::Coherent),
            "private" => Ok(Objective::Private),
            _ => Err(Error::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityBound {
    pub objective: Objective,
    pub l: usize,
    /// Best objective value found for `N^⊗l`.
    pub total: f64,
    /// `total / l`: a lower bound on the regularized quantity, not the
    /// capacity itself.
    pub per_use: f64,
    pub state: DensityOperator,
}

/// Channel data reused by every evaluation.
struct Evaluator {
    kraus: Vec<CMat>,
    /// `A_j† A_i` at index `j·k + i`.
    products: Vec<CMat>,
    chan: QuantumChannel,
}

impl Evaluator {
    fn new(chan: &QuantumChannel) -> Self {
        let kraus = chan.kraus().to_vec();
        let k = kraus.len();
        let mut products = Vec::with_capacity(k * k);
        for j in 0..k {
            for i in 0..k {
                products.push(kraus[j].adjoint() * &kraus[i]);
            }
        }
        Self {
            kraus,
            products,
            chan: chan.clone(),
        }
    }

    fn dim(&self) -> usize {
        self.chan.dim_in()
    }

    fn outputs(&self, a: &CMat) -> (CMat, CMat) {
        let bob = self.chan.apply_matrix(a).expect("input dimension checked");
        let eve = environment_matrix(&self.chan, a).expect("input dimension checked");
        (bob, eve)
    }

    /// `g(A) = p I_c(A/p)` with `p = Tr A`.
    fn value(&self, a: &CMat) -> f64 {
        let p = linalg::trace(a).re;
        if p <= 0.0 {
            return 0.0;
        }
        let (bob, eve) = self.outputs(a);
        let s = re(1.0 / p);
        p * (matrix_entropy(&(bob * s)) - matrix_entropy(&(eve * s)))
    }

    fn gradient(&self, a: &CMat) -> CMat {
        let d = self.dim();
        let p = linalg::trace(a).re;
        if p <= 0.0 {
            return CMat::zeros(d, d);
        }
        let (bob, eve) = self.outputs(a);
        let log = |m: CMat| linalg::eigh(&(m / re(p))).map(|l| l.max(LOG_FLOOR).log2());
        let lb = log(bob);
        let le = log(eve);
        let mut g = CMat::zeros(d, d);
        for a in &self.kraus {
            g -= a.adjoint() * &lb * a;
        }
        let k = self.kraus.len();
        for j in 0..k {
            for i in 0..k {
                let y = le[(j, i)];
                if y.norm() > 0.0 {
                    g += &self.products[j * k + i] * y;
                }
            }
        }
        linalg::hermitian_part(&g)
    }
}

fn normalized(m: CMat) -> CMat {
    let n = m.norm();
    m / re(n)
}

/// One gradient run with adaptive step and backtracking. `value` and
/// `direction` work on the flattened parameter list; `retract` maps a
/// trial point back to the feasible set.
fn climb<P: Clone>(
    start: P,
    sense: Sense,
    params: &OptimizeParams,
    value: impl Fn(&P) -> f64,
    direction: impl Fn(&P, f64) -> Option<P>,
    step_to: impl Fn(&P, &P, f64) -> P,
) -> (P, f64, Vec<f64>) {
    let mut x = start;
    let mut v = value(&x);
    let mut trace = vec![v];
    let mut step = 0.25;
    for _ in 0..params.max_iterations {
        let Some(dir) = direction(&x, v) else { break };
        let mut accepted = false;
        while step > 1e-12 {
            let cand = step_to(&x, &dir, step);
            let cv = value(&cand);
            if sense.better(cv, v) {
                x = cand;
                v = cv;
                step = (step * 1.5).min(1.0);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        trace.push(v);
        if !accepted {
            break;
        }
        let t = trace.len();
        if t > params.patience && (v - trace[t - 1 - params.patience]).abs() < params.tolerance {
            break;
        }
    }
    (x, v, trace)
}

fn summarize<T>(
    sense: Sense,
    runs: Vec<(T, f64, Vec<f64>)>,
    structured_starts: usize,
    certificate: f64,
) -> OptimizationResult<T> {
    let start_values: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let iterations: Vec<usize> = runs.iter().map(|r| r.2.len() - 1).collect();
    let mut best_so_far = Vec::with_capacity(runs.len());
    let mut best_start = 0;
    for (i, &v) in start_values.iter().enumerate() {
        if sense.better(v, start_values[best_start]) {
            best_start = i;
        }
        best_so_far.push(start_values[best_start]);
    }
    let (argument, value, trace) = runs.into_iter().nth(best_start).expect("at least one start");
    OptimizationResult {
        sense,
        argument,
        value,
        trace,
        certificate,
        start_values,
        best_so_far,
        best_start,
        iterations,
        structured_starts,
    }
}

fn check_params(params: &OptimizeParams) -> Result<()> {
    if params.max_iterations == 0 || params.patience == 0 {
        return Err(Error::InvalidParameter("iterations and patience must be positive".into()));
    }
    Ok(())
}

/// Best `I_c(ρ, N^⊗l)` over inputs `ρ = MM†/Tr MM†`, by gradient ascent in
/// `M` from the maximally mixed state, every basis state, and
/// `params.restarts` random starts.
pub fn max_coherent_information(
    chan: &QuantumChannel,
    l: usize,
    params: &OptimizeParams,
    seed: u64,
    guard: &Guard,
) -> Result<OptimizationResult<DensityOperator>> {
    let power = chan.tensor_power(l, guard)?;
    let d = power.dim_in();
    let mut starts = vec![CMat::identity(d, d)];
    for i in 0..d {
        let mut m = CMat::zeros(d, d);
        m[(i, i)] = re(1.0);
        starts.push(m);
    }
    maximize_from(&power, starts, params, seed)
}

fn maximize_from(
    chan: &QuantumChannel,
    structured: Vec<CMat>,
    params: &OptimizeParams,
    seed: u64,
) -> Result<OptimizationResult<DensityOperator>> {
    check_params(params)?;
    let eval = Evaluator::new(chan);
    let d = eval.dim();
    let n_structured = structured.len();
    let mut starts = structured;
    for r in 0..params.restarts {
        let mut g = rng::stream(seed, &[0, r as u64]);
        starts.push(linalg::random_ginibre(d, d, &mut g));
    }
    let state_value = |m: &CMat| eval.value(&(m * m.adjoint()));
    let runs: Vec<(CMat, f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|m0| {
            climb(
                normalized(m0),
                Sense::Maximize,
                params,
                state_value,
                |m, v| {
                    let rho = m * m.adjoint();
                    let g = eval.gradient(&rho) - CMat::identity(d, d) * re(v);
                    let z = g * m;
                    let n = z.norm();
                    (n > 1e-14).then(|| z / re(n))
                },
                |m, dir, s| normalized(m + dir * re(s)),
            )
        })
        .collect();
    let certificate = (0..params.samples)
        .into_par_iter()
        .map(|i| {
            let mut g = rng::stream(seed, &[1, i as u64]);
            let rank = g.random_range(1..=d);
            let rho = linalg::random_psd(d, rank, &mut g);
            eval.value(&(&rho / linalg::trace(&rho)))
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let runs = runs
        .into_iter()
        .map(|(m, _, trace)| {
            let rho = DensityOperator::from_trusted(&m * m.adjoint());
            let v = coherent_information(&rho, chan)?;
            Ok((rho, v, trace))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(Sense::Maximize, runs, n_structured, certificate))
}

/// Positive operators `G_x` renormalized so that `Σ G_x G_x† = I` on the
/// support of their sum.
fn complete(gs: Vec<CMat>) -> Vec<CMat> {
    let d = gs[0].nrows();
    let mut s = CMat::zeros(d, d);
    for g in &gs {
        s += g * g.adjoint();
    }
    let t = linalg::pinv_sqrt(&s, 1e-12 * linalg::max_eigenvalue(&s).max(1.0));
    gs.into_iter().map(|g| &t * g).collect()
}

/// Eigen-clusters of `rho` (relative gap 1e-9), as projectors.
fn clusters(rho: &DensityOperator) -> Vec<(Vec<usize>, CMat)> {
    let e = rho.eigen();
    let mut out: Vec<(Vec<usize>, CMat)> = Vec::new();
    for (i, &l) in e.values.iter().enumerate() {
        if l <= crate::qmat::RANK_TOL {
            continue;
        }
        let v = e.vector(i);
        let p = linalg::projector(&v);
        match out.last_mut() {
            Some((idx, proj)) if (e.values[idx[0]] - l).abs() <= 1e-9 * l.max(1e-300) => {
                idx.push(i);
                *proj += p;
            }
            _ => out.push((vec![i], p)),
        }
    }
    out
}

/// POVM starts from the eigendecomposition: each cluster is either kept as
/// one element or split into its eigenvectors. All patterns are tried for up
/// to `MAX_PATTERN_CLUSTERS` clusters; beyond that only all-split and
/// all-kept.
fn pattern_starts(rho: &DensityOperator, elements: usize) -> Vec<Vec<CMat>> {
    let d = rho.dim();
    let e = rho.eigen();
    let cl = clusters(rho);
    let c = cl.len();
    let patterns: Vec<u64> = if c <= MAX_PATTERN_CLUSTERS {
        (0..1u64 << c).collect()
    } else {
        vec![0, (1u64 << c.min(63)) - 1]
    };
    let mut out = Vec::new();
    for pat in patterns {
        let mut gs = Vec::new();
        for (b, (idx, proj)) in cl.iter().enumerate() {
            if pat >> b & 1 == 1 {
                gs.push(proj.clone());
            } else {
                for &i in idx {
                    gs.push(linalg::projector(&e.vector(i)));
                }
            }
        }
        if gs.len() > elements {
            continue;
        }
        // The kernel of ρ goes to the first element so the POVM is complete.
        let mut support = CMat::zeros(d, d);
        for g in &gs {
            support += g;
        }
        gs[0] += CMat::identity(d, d) - support;
        gs.resize(elements, CMat::zeros(d, d));
        out.push(gs);
    }
    out
}

/// `min Σ_x p(x) I_c(ρ_x, N)` over decompositions `p(x)ρ_x = √ρ M_x √ρ`
/// with `{M_x}` a POVM of `params.elements` (default `d²`) elements,
/// `M_x = G_x G_x†`. Starts: eigen-cluster patterns and random POVMs.
pub fn private_information(
    rho: &DensityOperator,
    chan: &QuantumChannel,
    params: &OptimizeParams,
    seed: u64,
    guard: &Guard,
) -> Result<PrivateInformation> {
    check_params(params)?;
    let d = rho.dim();
    if d != chan.dim_in() {
        return Err(Error::DimensionMismatch {
            expected: chan.dim_in(),
            got: d,
        });
    }
    guard.check_dim("decomposition elements", (d * d) as u128)?;
    let elements = params.elements.unwrap_or(d * d).max(1);
    let eval = Evaluator::new(chan);
    let root = linalg::sqrtm_psd(rho.matrix());
    let parts = |gs: &[CMat]| -> Vec<CMat> { gs.iter().map(|g| &root * g * g.adjoint() * &root).collect() };
    let total = |gs: &Vec<CMat>| -> f64 { parts(gs).iter().map(|a| eval.value(a)).sum() };

    let mut starts = pattern_starts(rho, elements);
    let n_structured = starts.len();
    for r in 0..params.restarts {
        let mut g = rng::stream(seed, &[2, r as u64]);
        starts.push(complete((0..elements).map(|_| linalg::random_ginibre(d, d, &mut g)).collect()));
    }
    let runs: Vec<(Vec<CMat>, f64, Vec<f64>)> = starts
        .into_par_iter()
        .map(|gs| {
            climb(
                gs,
                Sense::Minimize,
                params,
                total,
                |gs, _| {
                    let ms: Vec<CMat> = gs.iter().map(|g| g * g.adjoint()).collect();
                    let ds: Vec<CMat> = parts(gs).iter().map(|a| &root * eval.gradient(a) * &root).collect();
                    let mut c = CMat::zeros(d, d);
                    for (dx, mx) in ds.iter().zip(&ms) {
                        c += dx * mx + mx * dx;
                    }
                    c *= re(0.5);
                    let zs: Vec<CMat> = ds.iter().zip(gs).map(|(dx, g)| -((dx - &c) * g)).collect();
                    let n: f64 = zs.iter().map(|z| z.norm_squared()).sum::<f64>().sqrt();
                    (n > 1e-14).then(|| zs.into_iter().map(|z| z / re(n)).collect())
                },
                |gs, dir, s| complete(gs.iter().zip(dir).map(|(g, z)| g + z * re(s)).collect()),
            )
        })
        .collect();
    let certificate = (0..params.samples)
        .into_par_iter()
        .map(|i| {
            let mut g = rng::stream(seed, &[3, i as u64]);
            let gs = complete((0..elements).map(|_| linalg::random_ginibre(d, d, &mut g)).collect());
            total(&gs)
        })
        .reduce(|| f64::INFINITY, f64::min);
    let runs = runs
        .into_iter()
        .map(|(gs, _, trace)| {
            let dec = Decomposition::from_parts(&parts(&gs))?;
            let v = dec.coherent_average(chan)?;
            Ok((dec, v, trace))
        })
        .collect::<Result<Vec<_>>>()?;
    let decomposition = summarize(Sense::Minimize, runs, n_structured, certificate);
    let ic = coherent_information(rho, chan)?;
    Ok(PrivateInformation {
        coherent_information: ic,
        private_information: ic - decomposition.value.min(0.0),
        decomposition,
    })
}

/// `(1/l) max_ρ f(ρ, N^⊗l)` for the chosen objective. For `l > 1` the
/// tensor power of the `l = 1` optimum is among the starts, so the bound
/// never drops below the single-letter one. The private objective evaluates
/// the private information at the coherent-information optimum.
pub fn capacity_lower_bound(
    chan: &QuantumChannel,
    l: usize,
    objective: Objective,
    params: &OptimizeParams,
    seed: u64,
    guard: &Guard,
) -> Result<CapacityBound> {
    let power = chan.tensor_power(l, guard)?;
    let d = power.dim_in();
    let mut structured = vec![CMat::identity(d, d)];
    if l > 1 {
        let single = max_coherent_information(chan, 1, params, seed, guard)?;
        let root = linalg::sqrtm_psd(single.argument.matrix());
        structured.push(linalg::tensor_all(std::iter::repeat_n(&root, l)));
    }
    for i in 0..d {
        let mut m = CMat::zeros(d, d);
        m[(i, i)] = re(1.0);
        structured.push(m);
    }
    let best = maximize_from(&power, structured, params, seed)?;
    let (total, state) = match objective {
        Objective::Coherent => (best.value, best.argument),
        Objective::Private => {
            let p = private_information(&best.argument, &power, params, seed, guard)?;
            (p.private_information, best.argument)
        }
    };
    Ok(CapacityBound {
        objective,
        l,
        total,
        per_use: total / l as f64,
        state,
    })
}

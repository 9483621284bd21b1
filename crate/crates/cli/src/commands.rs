use cohq::channel::{appendix_c, basis_projector, QuantumChannel};
use cohq::codes::{
    lemma_trial, median, simulate, LemmaKind, LemmaParams, LemmaReport, SimulationKind, SimulationRow,
    SimulationSpec,
};
use cohq::entropy::inequalities::{run_suite, InequalityKind, SuiteReport};
use cohq::entropy::{
    coherent_information, environment_matrix, holevo_chi, matrix_entropy, von_neumann, EntropicReport,
    LabeledState,
};
use cohq::guard::Guard;
use cohq::optimize::{capacity_lower_bound, private_information, Objective, OptimizeParams};
use cohq::qmat::{DensityOperator, SubsystemShape};
use cohq::typicality::{verify_properties, PropertyReport, TypicalityParams};
use serde::Serialize;

use crate::args::*;
use crate::error::CliError;
use crate::input;
use crate::output::{json_only, Artifact};

/// An artifact and whether every checked property held.
pub struct Outcome {
    pub artifact: Artifact,
    pub holds: bool,
}

impl Outcome {
    fn ok(artifact: Artifact) -> Self {
        Self { artifact, holds: true }
    }
}

pub fn run(cli: &Cli, guard: &Guard) -> Result<Outcome, CliError> {
    let (format, seed) = (cli.format, cli.seed);
    match &cli.command {
        Command::Entropy(a) => {
            json_only(format, "entropy")?;
            entropy(a).map(Outcome::ok)
        }
        Command::CoherentInfo(a) => {
            json_only(format, "coherent-info")?;
            coherent(a).map(Outcome::ok)
        }
        Command::PrivateInfo(a) => {
            json_only(format, "private-info")?;
            private(a, seed, guard).map(Outcome::ok)
        }
        Command::Capacity(a) => {
            json_only(format, "capacity")?;
            capacity(a, seed, guard).map(Outcome::ok)
        }
        Command::Typicality {
            action: TypicalityCommand::Verify(a),
        } => typicality(a, format, guard),
        Command::VerifyLemmas(a) => lemmas(a, format, seed),
        Command::Simulate { kind } => {
            let (kind, a) = match kind {
                SimulateCommand::Hsw(a) => (SimulationKind::Hsw, a),
                SimulateCommand::Covering(a) => (SimulationKind::Covering, a),
                SimulateCommand::Private(a) => (SimulationKind::Private, a),
                SimulateCommand::Entgen(a) => (SimulationKind::Entgen, a),
            };
            sweep(kind, a, format, seed, guard).map(Outcome::ok)
        }
        Command::Example {
            which: ExampleCommand::AppendixC(a),
        } => {
            json_only(format, "example appendix-c")?;
            appendix(a, seed, guard)
        }
    }
}

fn search_params(s: &SearchArgs, elements: Option<usize>) -> Result<OptimizeParams, CliError> {
    if s.restarts == 0 || s.max_iterations == 0 {
        return Err(CliError::Input("--restarts and --max-iterations must be positive".into()));
    }
    Ok(OptimizeParams {
        restarts: s.restarts,
        max_iterations: s.max_iterations,
        elements,
        ..OptimizeParams::default()
    })
}

fn entropy(a: &EntropyArgs) -> Result<Artifact, CliError> {
    let rho = input::state(&a.state)?;
    let mut report = EntropicReport::new().input("state", &rho).value("H", von_neumann(&rho))?;
    if let Some(dims) = &a.dims {
        let labels: Vec<String> = match &a.labels {
            Some(l) => l.clone(),
            None => (0..dims.len()).map(|i| char::from(b'A' + (i % 26) as u8).to_string()).collect(),
        };
        let shape = SubsystemShape::new(dims.clone())?;
        let st = LabeledState::new(rho, shape, labels.clone())?;
        for l in &labels {
            report = report.value(&format!("H({l})"), st.entropy(&[l])?)?;
        }
        for (i, x) in labels.iter().enumerate() {
            for y in &labels[i + 1..] {
                report = report
                    .value(&format!("H({x}|{y})"), st.conditional_entropy(&[x], &[y])?)?
                    .value(&format!("H({y}|{x})"), st.conditional_entropy(&[y], &[x])?)?
                    .value(&format!("I({x};{y})"), st.mutual_information(&[x], &[y])?)?;
            }
        }
    } else if a.labels.is_some() {
        return Err(CliError::Input("--labels needs --dims".into()));
    }
    Artifact::json(&report)
}

fn channel_and_state(a: &ChannelStateArgs) -> Result<(QuantumChannel, DensityOperator), CliError> {
    let chan = input::channel(&a.channel.channel)?;
    let rho = input::state(&a.state)?;
    if rho.dim() != chan.dim_in() {
        return Err(CliError::Input(format!(
            "state has dimension {}, channel input is {}",
            rho.dim(),
            chan.dim_in()
        )));
    }
    Ok((chan, rho))
}

fn coherent(a: &ChannelStateArgs) -> Result<Artifact, CliError> {
    let (chan, rho) = channel_and_state(a)?;
    let bob = chan.apply(&rho)?;
    let eve = environment_matrix(&chan, rho.matrix())?;
    let report = EntropicReport::new()
        .input("channel", &chan)
        .input("state", &rho)
        .value("H(rho)", von_neumann(&rho))?
        .value("H(B)", von_neumann(&bob))?
        .value("H(E)", matrix_entropy(&eve))?
        .value("I_c", coherent_information(&rho, &chan)?)?;
    Artifact::json(&report)
}

fn private(a: &PrivateArgs, seed: u64, guard: &Guard) -> Result<Artifact, CliError> {
    let (chan, rho) = channel_and_state(&a.input)?;
    let params = search_params(&a.search, a.elements)?;
    let p = private_information(&rho, &chan, &params, seed, guard)?;
    Artifact::json(&p)
}

#[derive(Serialize)]
struct CapacityOut {
    #[serde(flatten)]
    bound: cohq::optimize::CapacityBound,
    /// Always true: the regularized limit is not computed.
    lower_bound_only: bool,
    params: OptimizeParams,
    seed: u64,
}

fn capacity(a: &CapacityArgs, seed: u64, guard: &Guard) -> Result<Artifact, CliError> {
    if a.l == 0 {
        return Err(CliError::Input("--l must be at least 1".into()));
    }
    let chan = input::channel(&a.channel.channel)?;
    let params = search_params(&a.search, None)?;
    let objective = match a.objective {
        ObjectiveArg::Coherent => Objective::Coherent,
        ObjectiveArg::Private => Objective::Private,
    };
    let bound = capacity_lower_bound(&chan, a.l, objective, &params, seed, guard)?;
    Artifact::json(&CapacityOut {
        bound,
        lower_bound_only: true,
        params,
        seed,
    })
}

#[derive(Serialize)]
struct MarginRow<'a> {
    n: usize,
    delta: f64,
    property: &'a str,
    value: f64,
    bound: f64,
    margin: f64,
    holds: bool,
}

fn typicality(a: &TypicalityArgs, format: Format, guard: &Guard) -> Result<Outcome, CliError> {
    let src = input::source(&a.source.wiretap, &a.source.channel, &a.source.state)?;
    let (w, probs) = input::resolve(&src)?;
    let reports: Vec<PropertyReport> = a
        .n
        .iter()
        .map(|&n| verify_properties(&w, &probs, n, a.delta, a.c, a.c_prime, guard))
        .collect::<Result<_, _>>()?;
    let holds = reports.iter().all(PropertyReport::all_hold);
    let rows: Vec<MarginRow> = reports
        .iter()
        .flat_map(|r| {
            r.properties.iter().map(|p| MarginRow {
                n: r.params.n,
                delta: r.params.delta,
                property: &p.property,
                value: p.value,
                bound: p.bound,
                margin: p.margin,
                holds: p.holds,
            })
        })
        .collect();
    Ok(Outcome {
        artifact: Artifact::either(format, &reports, &rows)?,
        holds,
    })
}

#[derive(Serialize)]
struct LemmaOut {
    seed: u64,
    suites: Vec<SuiteReport>,
    lemmas: Vec<LemmaReport>,
    passed: bool,
}

#[derive(Serialize)]
struct LemmaRow<'a> {
    suite: &'a str,
    trials: usize,
    violations: usize,
    worst_margin: f64,
    failure_frequency: Option<f64>,
    t: Option<f64>,
    bound: Option<f64>,
    passed: bool,
}

fn lemmas(a: &LemmaArgs, format: Format, seed: u64) -> Result<Outcome, CliError> {
    if a.trials == 0 || a.chernoff_trials == 0 || a.mu == 0 {
        return Err(CliError::Input("--trials, --chernoff-trials and --mu must be positive".into()));
    }
    if !(a.eta > 0.0 && a.eta < 1.0) {
        return Err(CliError::Input("--eta must lie in (0, 1)".into()));
    }
    let suites = InequalityKind::ALL
        .iter()
        .map(|&k| run_suite(k, a.trials, seed))
        .collect::<Result<Vec<_>, _>>()?;
    let params = LemmaParams { mu: a.mu, eta: a.eta };
    let lemmas = LemmaKind::ALL
        .iter()
        .map(|&k| {
            let trials = if k == LemmaKind::Chernoff { a.chernoff_trials } else { a.trials };
            lemma_trial(k, &params, trials, seed)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let passed = suites.iter().all(SuiteReport::passed) && lemmas.iter().all(|l| l.passed);
    let mut rows: Vec<LemmaRow> = suites
        .iter()
        .map(|s| LemmaRow {
            suite: &s.kind,
            trials: s.trials,
            violations: s.violations,
            worst_margin: s.worst_margin,
            failure_frequency: None,
            t: None,
            bound: None,
            passed: s.passed(),
        })
        .collect();
    rows.extend(lemmas.iter().map(|l| LemmaRow {
        suite: l.kind.name(),
        trials: l.trials,
        violations: l.violations,
        worst_margin: l.worst_margin,
        failure_frequency: l.failure_frequency,
        t: l.t,
        bound: l.bound,
        passed: l.passed,
    }));
    let artifact = match format {
        Format::Csv => Artifact::csv(&rows)?,
        Format::Json => Artifact::json(&LemmaOut {
            seed,
            suites: suites.clone(),
            lemmas: lemmas.clone(),
            passed,
        })?,
    };
    Ok(Outcome {
        artifact,
        holds: passed,
    })
}

/// Code sizes from the asymptotic construction at this `(n, δ)`, as log₂.
/// Negative or tiny values mean the blocklength is too short for them.
#[derive(Serialize)]
struct RecommendedSizes {
    chi_bob: f64,
    chi_eve: f64,
    c: f64,
    c_prime: f64,
    /// `n[χ_B − 2(c+c′δ)δ]`
    log2_nu: f64,
    /// `n[χ_E + 3(c+c′δ)δ]`
    log2_mu: f64,
    /// `n[χ_B − χ_E − 5(c+c′δ)δ]`
    log2_kappa: f64,
}

#[derive(Serialize)]
struct Medians {
    p_e_mean: Option<f64>,
    p_e_max: Option<f64>,
    leakage_bits: Option<f64>,
    flatness_distance: Option<f64>,
    fidelity: Option<f64>,
}

impl Medians {
    fn of(rows: &[SimulationRow]) -> Self {
        let m = |f: fn(&SimulationRow) -> Option<f64>| {
            let v: Vec<f64> = rows.iter().filter_map(f).collect();
            (!v.is_empty()).then(|| median(&v))
        };
        Self {
            p_e_mean: m(|r| r.p_e_mean),
            p_e_max: m(|r| r.p_e_max),
            leakage_bits: m(|r| r.leakage_bits),
            flatness_distance: m(|r| r.flatness_distance),
            fidelity: m(|r| r.fidelity),
        }
    }
}

#[derive(Serialize)]
struct SweepOut {
    spec: SimulationSpec,
    requested_log2: RequestedSizes,
    recommended: RecommendedSizes,
    medians: Medians,
    rows: Vec<SimulationRow>,
}

#[derive(Serialize)]
struct RequestedSizes {
    nu: f64,
    mu: f64,
    kappa: f64,
}

fn sweep(kind: SimulationKind, a: &SimArgs, format: Format, seed: u64, guard: &Guard) -> Result<Artifact, CliError> {
    if a.n == 0 || a.seeds == 0 || a.kappa == 0 || a.mu == 0 || a.nu == 0 {
        return Err(CliError::Input("--n, --seeds, --kappa, --mu and --nu must be positive".into()));
    }
    if !(a.delta > 0.0) {
        return Err(CliError::Input("--delta must be positive".into()));
    }
    let src = input::source(&a.source.wiretap, &a.source.channel, &a.source.state)?;
    let spec = SimulationSpec {
        kind,
        n: a.n,
        delta: a.delta,
        kappa: a.kappa,
        mu: a.mu,
        nu: a.nu,
        seeds: (0..a.seeds).map(|i| seed.wrapping_add(i)).collect(),
        distinct: a.distinct,
        expurgation: input::expurgation(&a.expurgation)?,
    };
    let rows = simulate(&src, &spec, guard)?;
    if format == Format::Csv {
        return Artifact::csv(&rows);
    }
    let (w, probs) = input::resolve(&src)?;
    let params = TypicalityParams::new(&w, &probs, a.n, a.delta, None, None)?;
    let chi_bob = holevo_chi(&w.bob_ensemble(&probs)?);
    let chi_eve = holevo_chi(&w.eve_ensemble(&probs)?);
    let s = (params.c + params.c_prime * a.delta) * a.delta;
    let nf = a.n as f64;
    let recommended = RecommendedSizes {
        chi_bob,
        chi_eve,
        c: params.c,
        c_prime: params.c_prime,
        log2_nu: nf * (chi_bob - 2.0 * s),
        log2_mu: nf * (chi_eve + 3.0 * s),
        log2_kappa: nf * (chi_bob - chi_eve - 5.0 * s),
    };
    let requested_log2 = RequestedSizes {
        nu: (a.nu as f64).log2(),
        mu: (a.mu as f64).log2(),
        kappa: (a.kappa as f64).log2(),
    };
    Artifact::json(&SweepOut {
        spec,
        requested_log2,
        recommended,
        medians: Medians::of(&rows),
        rows,
    })
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    value: f64,
    expected: String,
    holds: bool,
}

#[derive(Serialize)]
struct ExplicitDecomposition {
    weights: Vec<f64>,
    /// π′₃₄ followed by the four basis states.
    components: Vec<&'static str>,
    /// `Σ p I_c(ρ_x)`.
    value: f64,
    /// `I_c(π′₁₂) − value`, a lower bound on the private information.
    private_lower_bound: f64,
}

#[derive(Serialize)]
struct SearchOut {
    coherent_information: f64,
    private_information: f64,
    gap: f64,
    decomposition_value: f64,
    decomposition_elements: usize,
    restarts: usize,
}

#[derive(Serialize)]
struct AppendixOut {
    epsilon: f64,
    ic_pi12: f64,
    ic_pi34: f64,
    ic_pi_prime_12: f64,
    ic_pi_prime_34: f64,
    explicit: ExplicitDecomposition,
    search: Option<SearchOut>,
    checks: Vec<Check>,
}

fn appendix(a: &AppendixArgs, seed: u64, guard: &Guard) -> Result<Outcome, CliError> {
    let eps = a.epsilon;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(CliError::Input("--epsilon must lie in (0, 1/2)".into()));
    }
    let chan = appendix_c();
    let pi12 = DensityOperator::from_unnormalized(basis_projector(4, &[0, 1]))?;
    let pi34 = DensityOperator::from_unnormalized(basis_projector(4, &[2, 3]))?;
    let (hi, lo) = ((1.0 - eps) / 2.0, eps / 2.0);
    let pp12 = DensityOperator::diagonal(&[hi, hi, lo, lo])?;
    let pp34 = DensityOperator::diagonal(&[lo, lo, hi, hi])?;

    let ic_pi12 = coherent_information(&pi12, &chan)?;
    let ic_pi34 = coherent_information(&pi34, &chan)?;
    let ic_pp12 = coherent_information(&pp12, &chan)?;
    let ic_pp34 = coherent_information(&pp34, &chan)?;

    let w = (1.0 - eps - eps * eps) / 2.0;
    let weights = vec![eps, w, w, eps * eps / 2.0, eps * eps / 2.0];
    let mut states = vec![pp34.clone()];
    states.extend((0..4).map(|i| DensityOperator::basis(4, i)));
    let value = weights
        .iter()
        .zip(&states)
        .map(|(p, s)| Ok(p * coherent_information(s, &chan)?))
        .sum::<Result<f64, CliError>>()?;
    let explicit_gap = -value;

    let mut checks = vec![
        Check {
            name: "ic_pi12",
            value: ic_pi12,
            expected: "1 ± 1e-9".into(),
            holds: (ic_pi12 - 1.0).abs() <= 1e-9,
        },
        Check {
            name: "ic_pi34",
            value: ic_pi34,
            expected: "-1 ± 1e-9".into(),
            holds: (ic_pi34 + 1.0).abs() <= 1e-9,
        },
    ];

    let search = if a.private {
        let params = search_params(&a.search, None)?;
        let p = private_information(&pp12, &chan, &params, seed, guard)?;
        let gap = p.private_information - p.coherent_information;
        checks.push(Check {
            name: "ic_pi_prime_12_positive",
            value: p.coherent_information,
            expected: "> 0".into(),
            holds: p.coherent_information > 0.0,
        });
        checks.push(Check {
            name: "private_exceeds_coherent",
            value: gap,
            expected: "> 0".into(),
            holds: gap > 0.0,
        });
        checks.push(Check {
            name: "gap_vs_explicit",
            value: gap - explicit_gap,
            expected: ">= -1e-6".into(),
            holds: gap >= explicit_gap - 1e-6,
        });
        Some(SearchOut {
            coherent_information: p.coherent_information,
            private_information: p.private_information,
            gap,
            decomposition_value: p.decomposition.value,
            decomposition_elements: p.decomposition.argument.len(),
            restarts: params.restarts,
        })
    } else {
        None
    };

    let holds = checks.iter().all(|c| c.holds);
    let out = AppendixOut {
        epsilon: eps,
        ic_pi12,
        ic_pi34,
        ic_pi_prime_12: ic_pp12,
        ic_pi_prime_34: ic_pp34,
        explicit: ExplicitDecomposition {
            weights,
            components: vec!["pi_prime_34", "|1>", "|2>", "|3>", "|4>"],
            value,
            private_lower_bound: ic_pp12 + explicit_gap,
        },
        search,
        checks,
    };
    Ok(Outcome {
        artifact: Artifact::json(&out)?,
        holds,
    })
}

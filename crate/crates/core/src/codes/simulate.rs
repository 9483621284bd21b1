//! Seed sweeps over the code constructions.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    decoder_build, entgen_build, eve_leakage, hsw_error, protocol_fidelity, CoveringSetup,
    Expurgation, PackingSetup, PrivateSetup, ProtocolInput,
};
use crate::channel::{eigen_alphabet, wiretap_from_alphabet, CQWiretapChannel, QuantumChannel};
use crate::error::{Error, Result};
use crate::guard::Guard;
use crate::qmat::DensityOperator;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimulationKind {
    Hsw,
    Covering,
    Private,
    Entgen,
}

impl SimulationKind {
    pub const ALL: [SimulationKind; 4] = [
        SimulationKind::Hsw,
        SimulationKind::Covering,
        SimulationKind::Private,
        SimulationKind::Entgen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SimulationKind::Hsw => "hsw",
            SimulationKind::Covering => "covering",
            SimulationKind::Private => "private",
            SimulationKind::Entgen => "entgen",
        }
    }
}

impl fmt::Display for SimulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimulationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SimulationKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownKind(s.to_string()))
    }
}

/// What the codes are built over. A channel with an input state is turned
/// into the wiretap of its eigen-alphabet.
#[derive(Clone, Debug)]
pub enum SimulationSource {
    Wiretap {
        wiretap: CQWiretapChannel,
        probs: Vec<f64>,
    },
    Channel {
        channel: QuantumChannel,
        rho: DensityOperator,
    },
}

impl SimulationSource {
    fn wiretap(&self) -> Result<(CQWiretapChannel, Vec<f64>)> {
        match self {
            SimulationSource::Wiretap { wiretap, probs } => Ok((wiretap.clone(), probs.clone())),
            SimulationSource::Channel { channel, rho } => {
                let (probs, states) = eigen_alphabet(rho);
                let dms: Vec<DensityOperator> = states.iter().map(|s| s.density()).collect();
                let (w, _) = wiretap_from_alphabet(&channel.isometric_extension(), &dms, &probs)?;
                Ok((w, probs))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationSpec {
    pub kind: SimulationKind,
    pub n: usize,
    pub delta: f64,
    /// Rows `κ′` of the private grid.
    pub kappa: usize,
    /// Columns `μ′` of the private grid, or the covering code size.
    pub mu: usize,
    /// Packing code size.
    pub nu: usize,
    pub seeds: Vec<u64>,
    pub distinct: bool,
    pub expurgation: Expurgation,
}

/// One CSV row; empty cells for quantities the construction does not have.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationRow {
    pub seed: u64,
    pub n: usize,
    pub kappa: Option<usize>,
    pub mu: Option<usize>,
    pub p_e_mean: Option<f64>,
    pub p_e_max: Option<f64>,
    pub leakage_bits: Option<f64>,
    pub flatness_distance: Option<f64>,
    pub fidelity: Option<f64>,
}

impl SimulationRow {
    fn empty(seed: u64, n: usize) -> Self {
        Self {
            seed,
            n,
            kappa: None,
            mu: None,
            p_e_mean: None,
            p_e_max: None,
            leakage_bits: None,
            flatness_distance: None,
            fidelity: None,
        }
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max)
}

/// One row per seed, in the order of `spec.seeds`.
pub fn simulate(source: &SimulationSource, spec: &SimulationSpec, guard: &Guard) -> Result<Vec<SimulationRow>> {
    let (wiretap, probs) = source.wiretap()?;
    let (n, delta) = (spec.n, spec.delta);
    match spec.kind {
        SimulationKind::Hsw => {
            let setup = PackingSetup::new(&wiretap, &probs, n, delta, guard)?;
            spec.seeds
                .par_iter()
                .map(|&seed| {
                    let code = setup.build(spec.nu, seed, spec.distinct)?;
                    let report = hsw_error(&code);
                    Ok(SimulationRow {
                        kappa: Some(spec.nu),
                        p_e_mean: Some(report.mean),
                        p_e_max: Some(report.max),
                        ..SimulationRow::empty(seed, n)
                    })
                })
                .collect()
        }
        SimulationKind::Covering => {
            let setup = CoveringSetup::new(&wiretap, &probs, n, delta, guard)?;
            spec.seeds
                .par_iter()
                .map(|&seed| {
                    let code = setup.build(spec.mu, seed, spec.distinct)?;
                    Ok(SimulationRow {
                        mu: Some(spec.mu),
                        flatness_distance: Some(code.flatness_distance),
                        ..SimulationRow::empty(seed, n)
                    })
                })
                .collect()
        }
        SimulationKind::Private | SimulationKind::Entgen => {
            let chan = match (spec.kind, source) {
                (SimulationKind::Entgen, SimulationSource::Channel { channel, rho }) => Some((channel, rho)),
                (SimulationKind::Entgen, _) => {
                    return Err(Error::InvalidParameter(
                        "entanglement generation needs a channel and an input state".into(),
                    ))
                }
                _ => None,
            };
            let setup = PrivateSetup::new(&wiretap, &probs, n, delta, guard)?;
            spec.seeds
                .par_iter()
                .map(|&seed| {
                    let code = setup.build(spec.kappa, spec.mu, seed, spec.expurgation, spec.distinct)?;
                    let fidelity = match chan {
                        Some((channel, rho)) => {
                            let eg = entgen_build(channel, rho, &code, guard)?;
                            let dec = decoder_build(&eg)?;
                            Some(protocol_fidelity(&eg, &dec, &ProtocolInput::MaximallyEntangled)?.fidelity)
                        }
                        None => None,
                    };
                    Ok(SimulationRow {
                        kappa: Some(code.kappa),
                        mu: Some(code.mu),
                        p_e_mean: Some(code.p_e),
                        p_e_max: Some(max_of(&code.errors.iter().flatten().cloned().collect::<Vec<_>>())),
                        leakage_bits: Some(eve_leakage(&code)),
                        flatness_distance: Some(code.mean_flatness()),
                        fidelity,
                        ..SimulationRow::empty(seed, n)
                    })
                })
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::basis_projector;
    use crate::qmat::PureState;

    fn noiseless() -> SimulationSource {
        let bob = vec![DensityOperator::basis(2, 0), DensityOperator::basis(2, 1)];
        let eve = vec![PureState::basis(1, 0).density(); 2];
        SimulationSource::Wiretap {
            wiretap: CQWiretapChannel::product(bob, eve).unwrap(),
            probs: vec![0.5, 0.5],
        }
    }

    fn spec(kind: SimulationKind) -> SimulationSpec {
        SimulationSpec {
            kind,
            n: 3,
            delta: 0.5,
            kappa: 2,
            mu: 2,
            nu: 4,
            seeds: (0..6).collect(),
            distinct: true,
            expurgation: Expurgation::Off,
        }
    }

    #[test]
    fn noiseless_sweeps() {
        let g = Guard::default();
        for row in simulate(&noiseless(), &spec(SimulationKind::Hsw), &g).unwrap() {
            assert!(row.p_e_mean.unwrap() < 1e-12);
            assert_eq!(row.kappa, Some(4));
        }
        for row in simulate(&noiseless(), &spec(SimulationKind::Private), &g).unwrap() {
            assert!(row.leakage_bits.unwrap().abs() < 1e-10);
            assert!(row.fidelity.is_none());
        }
    }

    #[test]
    fn rows_follow_seed_order_and_repeat() {
        let g = Guard::default();
        let mut s = spec(SimulationKind::Covering);
        s.seeds = vec![5, 1, 3];
        let a = simulate(&noiseless(), &s, &g).unwrap();
        let b = simulate(&noiseless(), &s, &g).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![5, 1, 3]);
    }

    #[test]
    fn entgen_needs_a_channel() {
        let g = Guard::default();
        assert!(simulate(&noiseless(), &spec(SimulationKind::Entgen), &g).is_err());
        let source = SimulationSource::Channel {
            channel: crate::channel::appendix_c(),
            rho: DensityOperator::from_unnormalized(basis_projector(4, &[0, 1])).unwrap(),
        };
        let mut s = spec(SimulationKind::Entgen);
        s.n = 2;
        s.kappa = 4;
        s.mu = 1;
        s.seeds = vec![42];
        let rows = simulate(&source, &s, &g).unwrap();
        assert!(rows[0].fidelity.unwrap() >= 0.999);
    }
}

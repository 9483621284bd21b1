//! Channels, states and wiretaps from files or short names.

use std::path::Path;

use cohq::channel::{
    eigen_alphabet, make_example, validate_distribution, wiretap_from_alphabet, CQWiretapChannel,
    QuantumChannel, EXAMPLE_NAMES,
};
use cohq::codes::{Expurgation, SimulationSource};
use cohq::qmat::DensityOperator;
use serde::Deserialize;

use crate::error::CliError;

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed JSON in {}: {e}", path.display())))
}

pub fn channel(src: &str) -> Result<QuantumChannel, CliError> {
    let path = Path::new(src);
    if path.is_file() {
        return read_json(path);
    }
    make_example(src).map_err(|_| {
        CliError::Input(format!(
            "`{src}` is neither a file nor an example channel ({})",
            EXAMPLE_NAMES.join(", ")
        ))
    })
}

fn call<'a>(src: &'a str, name: &str) -> Option<&'a str> {
    src.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')')
}

fn numbers<T: std::str::FromStr>(list: &str, what: &str) -> Result<Vec<T>, CliError> {
    list.split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Input(format!("bad {what} `{s}`"))))
        .collect()
}

pub fn state(src: &str) -> Result<DensityOperator, CliError> {
    let path = Path::new(src);
    if path.is_file() {
        return read_json(path);
    }
    let src = src.trim();
    if let Some(d) = call(src, "mixed") {
        let d: usize = d.trim().parse().map_err(|_| CliError::Input(format!("bad dimension in `{src}`")))?;
        if d == 0 {
            return Err(CliError::Input("dimension must be positive".into()));
        }
        return Ok(DensityOperator::maximally_mixed(d));
    }
    if let Some(list) = call(src, "diag") {
        return Ok(DensityOperator::diagonal(&numbers::<f64>(list, "probability")?)?);
    }
    if let Some(body) = call(src, "uniform") {
        let (d, idx) = body
            .split_once(';')
            .ok_or_else(|| CliError::Input(format!("expected uniform(d;i,j,...), got `{src}`")))?;
        let d: usize = d.trim().parse().map_err(|_| CliError::Input(format!("bad dimension in `{src}`")))?;
        let idx = numbers::<usize>(idx, "basis index")?;
        if idx.is_empty() || idx.iter().any(|&i| i >= d) {
            return Err(CliError::Input(format!("basis indices out of range in `{src}`")));
        }
        return Ok(DensityOperator::from_unnormalized(cohq::channel::basis_projector(d, &idx))?);
    }
    Err(CliError::Input(format!(
        "`{src}` is neither a file nor a state (mixed(d), diag(p,...), uniform(d;i,...))"
    )))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum WiretapFile {
    Product {
        bob: Vec<DensityOperator>,
        eve: Vec<DensityOperator>,
        probs: Vec<f64>,
    },
    Joint {
        dim_q: usize,
        dim_e: usize,
        joint: Vec<DensityOperator>,
        probs: Vec<f64>,
    },
}

pub fn wiretap_file(src: &str) -> Result<(CQWiretapChannel, Vec<f64>), CliError> {
    let file: WiretapFile = read_json(Path::new(src))?;
    let (w, probs) = match file {
        WiretapFile::Product { bob, eve, probs } => (CQWiretapChannel::product(bob, eve)?, probs),
        WiretapFile::Joint { dim_q, dim_e, joint, probs } => (CQWiretapChannel::from_joint(joint, dim_q, dim_e)?, probs),
    };
    validate_distribution(&probs)?;
    if probs.len() != w.alphabet_size() {
        return Err(CliError::Input(format!(
            "{} probabilities for {} letters",
            probs.len(),
            w.alphabet_size()
        )));
    }
    Ok((w, probs))
}

/// Wiretap of the eigen-alphabet of `rho` through `chan`.
pub fn eigen_wiretap(chan: &QuantumChannel, rho: &DensityOperator) -> Result<(CQWiretapChannel, Vec<f64>), CliError> {
    if rho.dim() != chan.dim_in() {
        return Err(CliError::Input(format!(
            "state has dimension {}, channel input is {}",
            rho.dim(),
            chan.dim_in()
        )));
    }
    let (probs, states) = eigen_alphabet(rho);
    let dms: Vec<DensityOperator> = states.iter().map(|s| s.density()).collect();
    let (w, _) = wiretap_from_alphabet(&chan.isometric_extension(), &dms, &probs)?;
    Ok((w, probs))
}

pub fn source(
    wiretap: &Option<String>,
    channel_src: &Option<String>,
    state_src: &Option<String>,
) -> Result<SimulationSource, CliError> {
    match (wiretap, channel_src, state_src) {
        (Some(w), _, _) => {
            let (wiretap, probs) = wiretap_file(w)?;
            Ok(SimulationSource::Wiretap { wiretap, probs })
        }
        (None, Some(c), Some(s)) => {
            let channel = channel(c)?;
            let rho = state(s)?;
            if rho.dim() != channel.dim_in() {
                return Err(CliError::Input(format!(
                    "state has dimension {}, channel input is {}",
                    rho.dim(),
                    channel.dim_in()
                )));
            }
            Ok(SimulationSource::Channel { channel, rho })
        }
        _ => Err(CliError::Input("give --wiretap, or --channel with --state".into())),
    }
}

pub fn resolve(source: &SimulationSource) -> Result<(CQWiretapChannel, Vec<f64>), CliError> {
    match source {
        SimulationSource::Wiretap { wiretap, probs } => Ok((wiretap.clone(), probs.clone())),
        SimulationSource::Channel { channel, rho } => eigen_wiretap(channel, rho),
    }
}

pub fn expurgation(src: &str) -> Result<Expurgation, CliError> {
    match src.trim() {
        "measured" => Ok(Expurgation::Measured),
        "off" => Ok(Expurgation::Off),
        other => {
            let eps = other
                .strip_prefix("fixed=")
                .and_then(|e| e.parse::<f64>().ok())
                .ok_or_else(|| CliError::Input(format!("expurgation must be measured, off or fixed=EPS, got `{other}`")))?;
            if !(eps > 0.0 && eps < 1.0) {
                return Err(CliError::Input("fixed expurgation needs 0 < EPS < 1".into()));
            }
            Ok(Expurgation::Fixed(eps))
        }
    }
}


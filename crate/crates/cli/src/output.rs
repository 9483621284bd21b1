use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::args::Format;
use crate::error::CliError;

/// Serialized result of one command.
pub struct Artifact(Vec<u8>);

impl Artifact {
    pub fn json<T: Serialize>(value: &T) -> Result<Self, CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(Self(bytes))
    }

    pub fn csv<T: Serialize>(rows: &[T]) -> Result<Self, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Encode(e.to_string()))?;
        Ok(Self(bytes))
    }

    /// JSON of `value`, or CSV of `rows` when asked for.
    pub fn either<T: Serialize, R: Serialize>(format: Format, value: &T, rows: &[R]) -> Result<Self, CliError> {
        match format {
            Format::Json => Self::json(value),
            Format::Csv => Self::csv(rows),
        }
    }

    pub fn write(&self, path: Option<&Path>) -> Result<(), CliError> {
        match path {
            Some(p) => std::fs::write(p, &self.0)?,
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(&self.0)?;
                out.flush()?;
            }
        }
        Ok(())
    }
}

/// Commands whose result is a single report reject `--format csv`.
pub fn json_only(format: Format, command: &str) -> Result<(), CliError> {
    if format == Format::Csv {
        return Err(CliError::Input(format!(
            "`{command}` emits a single report; --format csv is for sweeps (simulate, typicality verify, verify-lemmas)"
        )));
    }
    Ok(())
}

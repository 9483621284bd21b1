//! Size limits for dense objects and exhaustive enumerations.

use crate::error::{Error, Result};

pub const DEFAULT_MAX_DIM: usize = 4096;
pub const DEFAULT_MAX_SEQUENCES: u128 = 1 << 20;
pub const GUARD_ENV: &str = "COHQ_GUARD_DIM";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Guard {
    /// Largest dense Hilbert-space dimension (and joint Kraus-product size).
    pub max_dim: usize,
    /// Largest number of sequences enumerated exhaustively.
    pub max_sequences: u128,
}

impl Default for Guard {
    fn default() -> Self {
        Self {
            max_dim: DEFAULT_MAX_DIM,
            max_sequences: DEFAULT_MAX_SEQUENCES,
        }
    }
}

impl Guard {
    /// Default guard with `max_dim` overridden by `COHQ_GUARD_DIM` when set.
    pub fn from_env() -> Result<Self> {
        let mut g = Self::default();
        if let Ok(v) = std::env::var(GUARD_ENV) {
            g.max_dim = v.trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("{GUARD_ENV} must be a positive integer, got `{v}`"))
            })?;
            if g.max_dim == 0 {
                return Err(Error::InvalidParameter(format!("{GUARD_ENV} must be positive")));
            }
        }
        Ok(g)
    }

    pub fn check_dim(&self, what: &str, required: u128) -> Result<()> {
        if required > self.max_dim as u128 {
            return Err(Error::GuardExceeded {
                what: what.to_string(),
                required,
                limit: self.max_dim as u128,
            });
        }
        Ok(())
    }

    pub fn check_sequences(&self, what: &str, required: u128) -> Result<()> {
        if required > self.max_sequences {
            return Err(Error::GuardExceeded {
                what: what.to_string(),
                required,
                limit: self.max_sequences,
            });
        }
        Ok(())
    }
}

/// `base^n` without overflow (saturates at `u128::MAX`).
pub fn power(base: usize, n: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..n {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

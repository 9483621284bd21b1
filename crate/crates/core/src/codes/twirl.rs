//! Bilateral `U ⊗ U*` twirl of a bipartite state onto the isotropic
//! (Werner) family.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qmat::{re, CMat, DensityOperator, PureState};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WernerReport {
    pub kappa: usize,
    /// `f = ⟨Φ^κ|Ω|Φ^κ⟩`.
    pub f: f64,
}

impl WernerReport {
    /// Weight of each direction orthogonal to `Φ^κ`: `(1−f)/(κ²−1)`.
    pub fn noise_weight(&self) -> f64 {
        let k2 = (self.kappa * self.kappa) as f64;
        if self.kappa <= 1 {
            0.0
        } else {
            (1.0 - self.f) / (k2 - 1.0)
        }
    }

    /// `f Φ + (1−f)/(κ²−1) (I − Φ)`.
    pub fn state(&self) -> DensityOperator {
        let d = self.kappa * self.kappa;
        let phi = PureState::maximally_entangled(self.kappa).density().into_matrix();
        let rest = CMat::identity(d, d) - &phi;
        DensityOperator::from_trusted(phi * re(self.f) + rest * re(self.noise_weight()))
    }
}

/// The twirled state is determined by `f` alone, so no group average is
/// computed.
pub fn twirl(omega: &DensityOperator, kappa: usize) -> Result<WernerReport> {
    if kappa == 0 || omega.dim() != kappa * kappa {
        return Err(Error::DimensionMismatch {
            expected: kappa * kappa,
            got: omega.dim(),
        });
    }
    let phi = PureState::maximally_entangled(kappa);
    let v = phi.vector();
    let f = v.dotc(&(omega.matrix() * v)).re.clamp(0.0, 1.0);
    Ok(WernerReport { kappa, f })
}

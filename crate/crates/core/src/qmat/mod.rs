//! Matrices, states and the basic quantum-information primitives.

pub mod json;
pub mod linalg;
mod state;

pub use linalg::{c, re, CMat, CVec, Eigh, C64};
pub use state::{
    DensityOperator, PureState, SubsystemShape, HERMITIAN_TOL, NEGATIVE_EIGEN_TOL, NORM_TOL,
    TRACE_TOL,
};

use serde::Serialize;

use crate::error::{Error, Result};

/// Eigenvalues below this are treated as zero when computing ranks.
pub const RANK_TOL: f64 = 1e-13;

pub fn tensor(a: &CMat, b: &CMat) -> CMat {
    linalg::tensor(a, b)
}

pub fn partial_trace(
    state: &DensityOperator,
    shape: &SubsystemShape,
    keep: &[usize],
) -> Result<DensityOperator> {
    state.partial_trace(shape, keep)
}

pub fn trace_norm(a: &CMat) -> f64 {
    linalg::trace_norm(a)
}

/// `½‖ρ − σ‖₁`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_dim(rho.dim(), sigma.dim())?;
    Ok(0.5 * trace_norm(&(rho.matrix() - sigma.matrix())))
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            got: b,
        });
    }
    Ok(())
}

/// Eigenvalues of a unit-trace operator below this are rounding noise;
/// their square roots (~1e-8) would otherwise dominate the fidelity error.
const FIDELITY_ROOT_TOL: f64 = 1e-14;

/// `F(ρ, σ) = ‖√ρ √σ‖₁²`, from the singular values of `√ρ √σ`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64> {
    same_dim(rho.dim(), sigma.dim())?;
    let root = |m: &CMat| {
        let tol = FIDELITY_ROOT_TOL * m.nrows() as f64;
        linalg::eigh(m).map(|l| if l > tol { l.sqrt() } else { 0.0 })
    };
    let prod = root(rho.matrix()) * root(sigma.matrix());
    let s: f64 = linalg::singular_values(&prod).iter().sum();
    Ok((s * s).clamp(0.0, 1.0))
}

/// `F(|ψ⟩⟨ψ|, ρ) = ⟨ψ|ρ|ψ⟩`.
pub fn fidelity_pure(psi: &PureState, rho: &DensityOperator) -> Result<f64> {
    same_dim(psi.dim(), rho.dim())?;
    let v = psi.vector();
    Ok(v.dotc(&(rho.matrix() * v)).re.clamp(0.0, 1.0))
}

/// Purification on `reference ⊗ system` with reference dimension = rank.
#[derive(Clone, Debug, Serialize)]
pub struct Purification {
    pub state: PureState,
    pub shape: SubsystemShape,
}

/// `|Φ⟩ = Σ_i √λ_i |i⟩_R |v_i⟩` over the canonical eigenbasis of `rho`.
pub fn purify(rho: &DensityOperator) -> Purification {
    let e = rho.eigen();
    let d = rho.dim();
    let rank = e.values.iter().filter(|&&l| l > RANK_TOL).count().max(1);
    let mut v = CVec::zeros(rank * d);
    for i in 0..rank {
        let a = re(e.values[i].max(0.0).sqrt());
        for j in 0..d {
            v[i * d + j] = a * e.vectors[(j, i)];
        }
    }
    Purification {
        state: PureState::from_trusted(v),
        shape: SubsystemShape::bipartite(rank, d),
    }
}

#[derive(Clone, Debug)]
pub struct Uhlmann {
    /// Unitary on the reference factor.
    pub unitary: CMat,
    /// `⟨ψ|(U ⊗ I)|φ⟩`, real and nonnegative by construction.
    pub overlap: C64,
}

impl Uhlmann {
    pub fn fidelity(&self) -> f64 {
        self.overlap.norm_sqr()
    }
}

/// Reference-side unitary `U` maximizing `|⟨ψ|(U ⊗ I)|φ⟩|`.
///
/// With `Φ`, `Ψ` the reference × rest reshapes, the overlap is `Tr(U ΦΨ†)`.
/// For `ΦΨ† = X Σ Y†` the choice `U = Y X†` makes it `Tr Σ`, real and maximal.
pub fn uhlmann_unitary(
    phi: &PureState,
    psi: &PureState,
    shape: &SubsystemShape,
    reference: usize,
) -> Result<Uhlmann> {
    shape.check(phi.dim())?;
    shape.check(psi.dim())?;
    if reference >= shape.len() {
        return Err(Error::InvalidSubsystem {
            index: reference,
            factors: shape.len(),
        });
    }
    let pm = linalg::vector_as_matrix(phi.vector(), shape.dims(), &[reference])?;
    let qm = linalg::vector_as_matrix(psi.vector(), shape.dims(), &[reference])?;
    let cross = &pm * qm.adjoint();
    let svd = cross.svd(true, true);
    let x = svd.u.expect("left singular vectors");
    let y = svd.v_t.expect("right singular vectors").adjoint();
    let unitary = &y * x.adjoint();
    let overlap = re(svd.singular_values.iter().sum());
    Ok(Uhlmann { unitary, overlap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::linalg::random_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_state(d: usize, rng: &mut ChaCha8Rng) -> DensityOperator {
        DensityOperator::from_unnormalized(linalg::random_psd(d, d, rng)).unwrap()
    }

    #[test]
    fn tensor_of_basis_projectors() {
        let a = DensityOperator::basis(2, 0);
        let b = DensityOperator::basis(2, 1);
        assert_eq!(tensor(a.matrix(), b.matrix()), DensityOperator::basis(4, 1).into_matrix());
        assert_eq!(tensor(&CMat::identity(2, 2), &CMat::identity(2, 2)), CMat::identity(4, 4));
        assert_eq!(tensor(&CMat::zeros(2, 2), &CMat::zeros(3, 3)).nrows(), 6);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let phi = PureState::maximally_entangled(2);
        let r = phi.reduced(&SubsystemShape::bipartite(2, 2), &[0]).unwrap();
        assert!((r.matrix() - DensityOperator::maximally_mixed(2).matrix()).norm() < 1e-15);
    }

    #[test]
    fn orthogonal_pure_states_trace_norm() {
        let d = DensityOperator::basis(2, 0).into_matrix() - DensityOperator::basis(2, 1).into_matrix();
        assert!((trace_norm(&d) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn fidelity_plus_zero() {
        let plus = PureState::normalized(CVec::from_vec(vec![re(1.0), re(1.0)])).unwrap();
        let f = fidelity(&DensityOperator::basis(2, 0), &plus.density()).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = random_state(3, &mut rng);
        assert!((fidelity(&r, &r).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fidelity_of_pure_pairs_is_the_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 2..=8 {
            let a = PureState::random(d, &mut rng);
            let b = PureState::random(d, &mut rng);
            let f = fidelity(&a.density(), &b.density()).unwrap();
            assert!((f - a.overlap(&b).norm_sqr()).abs() < 1e-13, "d = {d}");
            let mixed = DensityOperator::random(d, d, &mut rng);
            let fp = fidelity(&a.density(), &mixed).unwrap();
            assert!((fp - fidelity_pure(&a, &mixed).unwrap()).abs() < 1e-13, "d = {d}");
        }
    }

    #[test]
    fn purify_rank_and_round_trip() {
        let p = purify(&DensityOperator::basis(3, 2));
        assert_eq!(p.shape.dims(), &[1, 3]);
        let m = purify(&DensityOperator::maximally_mixed(2));
        assert_eq!(m.shape.dims(), &[2, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = random_state(4, &mut rng);
        let pr = purify(&r);
        let back = pr.state.reduced(&pr.shape, &[1]).unwrap();
        assert!(trace_norm(&(back.matrix() - r.matrix())) < 1e-12);
    }

    #[test]
    fn uhlmann_attains_fidelity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let a = random_state(3, &mut rng);
        let b = random_state(3, &mut rng);
        let pa = purify(&a);
        let pb = purify(&b);
        // Rotate one purification so the reference frames disagree.
        let u = random_unitary(3, &mut rng);
        let rotated = linalg::apply_on_factor(pb.state.vector(), &[3, 3], 0, &u).unwrap();
        let pb = PureState::new(rotated).unwrap();
        let uh = uhlmann_unitary(&pa.state, &pb, &pa.shape, 0).unwrap();
        let f = fidelity(&a, &b).unwrap();
        assert!((uh.fidelity() - f).abs() < 1e-8);
        let moved = linalg::apply_on_factor(pa.state.vector(), &[3, 3], 0, &uh.unitary).unwrap();
        assert!((pb.vector().dotc(&moved) - uh.overlap).norm() < 1e-10);
    }

    #[test]
    fn uhlmann_identical_and_orthogonal() {
        let phi = PureState::maximally_entangled(2);
        let shape = SubsystemShape::bipartite(2, 2);
        let same = uhlmann_unitary(&phi, &phi, &shape, 0).unwrap();
        assert!((same.fidelity() - 1.0).abs() < 1e-12);
        let a = PureState::basis(4, 0);
        let b = PureState::basis(4, 3);
        let orth = uhlmann_unitary(&a, &b, &shape, 0).unwrap();
        assert!(orth.fidelity() < 1e-20);
    }
}

use cohq::channel::{eigen_alphabet, CQWiretapChannel, QuantumChannel};
use cohq::codes::{hsw_build, hsw_error, twirl, CodeParams};
use cohq::entropy::{coherent_information, von_neumann};
use cohq::guard::Guard;
use cohq::optimize::{private_information, OptimizeParams};
use cohq::qmat::{fidelity, linalg, trace_distance, CMat, DensityOperator, SubsystemShape};
use cohq::rng;
use cohq::typicality::{typical_projector, typical_set};
use proptest::prelude::*;

fn state(seed: u64, d: usize) -> DensityOperator {
    let mut r = rng::stream(seed, &[]);
    let rank = 1 + (seed as usize) % d;
    DensityOperator::random(d, rank, &mut r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn distances_and_fidelity_are_bounded(seed in any::<u64>(), d in 2usize..6) {
        let a = state(seed, d);
        let b = state(seed.wrapping_add(1), d);
        let t = trace_distance(&a, &b).unwrap();
        let f = fidelity(&a, &b).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&t));
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        prop_assert!(1.0 - f.sqrt() <= t + 1e-9);
        prop_assert!(t <= (1.0 - f).max(0.0).sqrt() + 1e-9);
    }

    #[test]
    fn partial_trace_keeps_a_state(seed in any::<u64>(), a in 2usize..4, b in 2usize..4) {
        let rho = state(seed, a * b);
        let shape = SubsystemShape::bipartite(a, b);
        for keep in [[0usize], [1]] {
            let r = rho.partial_trace(&shape, &keep).unwrap();
            prop_assert!((linalg::trace(r.matrix()).re - 1.0).abs() < 1e-12);
            prop_assert!(linalg::min_eigenvalue(r.matrix()) > -1e-12);
        }
    }

    #[test]
    fn coherent_information_is_bounded(seed in any::<u64>(), d in 2usize..5, k in 1usize..4) {
        let mut r = rng::stream(seed, &[1]);
        let chan = QuantumChannel::random(d, d, k, &mut r);
        let rho = state(seed, d);
        let ic = coherent_information(&rho, &chan).unwrap();
        let h = von_neumann(&rho);
        prop_assert!(ic <= h + 1e-9);
        prop_assert!(ic >= -h - 1e-9);
        let out = chan.apply(&rho).unwrap();
        prop_assert!((linalg::trace(out.matrix()).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn typical_projector_commutes_and_matches_mass(seed in any::<u64>(), n in 2usize..5, delta in 0.05f64..0.6) {
        let rho = state(seed, 2);
        let g = Guard::default();
        let proj = typical_projector(&rho, n, delta, &g).unwrap();
        let p = proj.matrix();
        let big = rho.tensor_power(n).into_matrix();
        prop_assert!(linalg::max_abs(&(&p * &big - &big * &p)) < 1e-10);
        prop_assert!(linalg::max_abs(&(&p * &p - &p)) < 1e-10);
        let set = typical_set(&eigen_alphabet(&rho).0, n, delta, &g).unwrap();
        prop_assert!((proj.trace_with(&big) - set.mass).abs() < 1e-9);
    }

    #[test]
    fn twirl_keeps_the_overlap(seed in any::<u64>(), kappa in 2usize..4) {
        let omega = state(seed, kappa * kappa);
        let w = twirl(&omega, kappa).unwrap();
        let again = twirl(&w.state(), kappa).unwrap();
        prop_assert!((again.f - w.f).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn decoder_is_complete_and_within_bound(seed in any::<u64>(), nu in 1usize..6) {
        let mut r = rng::stream(seed, &[2]);
        let bob: Vec<DensityOperator> = (0..2).map(|_| DensityOperator::random(2, 1, &mut r)).collect();
        let eve = vec![DensityOperator::basis(1, 0); 2];
        let w = CQWiretapChannel::product(bob, eve).unwrap();
        let code = hsw_build(&w, &[0.5, 0.5], nu, &CodeParams::new(3, 0.4, seed), &Guard::default()).unwrap();
        let d = code.null_outcome().nrows();
        let mut sum = code.null_outcome().clone();
        for y in code.povm() {
            sum += y;
        }
        prop_assert!(linalg::max_abs(&(sum - CMat::identity(d, d))) < 1e-9);
        prop_assert!(linalg::min_eigenvalue(code.null_outcome()) > -1e-9);
        prop_assert!(hsw_error(&code).within_bound());
    }

    #[test]
    fn private_information_dominates_coherent(seed in any::<u64>()) {
        let mut r = rng::stream(seed, &[3]);
        let chan = QuantumChannel::random(2, 2, 2, &mut r);
        let rho = state(seed, 2);
        let params = OptimizeParams { restarts: 1, samples: 4, max_iterations: 200, ..OptimizeParams::default() };
        let p = private_information(&rho, &chan, &params, seed, &Guard::default()).unwrap();
        prop_assert!(p.private_information >= p.coherent_information - 1e-8);
        prop_assert!(p.decomposition.argument.residual(&rho) < 1e-9);
    }
}

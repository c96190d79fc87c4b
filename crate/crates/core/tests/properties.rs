use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rowball_core::charfun::charfun_degree;
use rowball_core::contraction::{hc_subspace, nilpotent_order, poisson_kernel};
use rowball_core::invariants::gamma;
use rowball_core::mobius::{aut_apply, invert};
use rowball_core::numerics::{identity, max_abs};
use rowball_core::{sample, AutElement, NatInf};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // block sizes are known, so q and the nilpotent order come for free
    #[test]
    fn nilpotent_plus_coisometry(seed in any::<u64>(), n in 1usize..3, dn in 1usize..4, dc in 1usize..3) {
        let mut r = rng(seed);
        let order = 1 + (seed as usize) % dn;
        let nil = sample::random_nilpotent(n, dn, order, &mut r);
        let co = sample::random_coisometry(n, dc, &mut r);
        let t = nil.direct_sum(&co).unwrap();
        let t = t.conjugated_by(&sample::random_unitary(t.dim(), &mut r)).unwrap();
        let g = gamma(&t, None).unwrap();
        prop_assert_eq!(g.q, NatInf::Finite(dc));
        prop_assert_eq!(hc_subspace(&t).unwrap().dim(), dc);
        prop_assert_eq!(nilpotent_order(&nil), Some(order));
    }

    #[test]
    fn gamma_is_a_unitary_invariant(seed in any::<u64>(), n in 1usize..3, d in 1usize..5) {
        let mut r = rng(seed);
        let t = sample::random_row_contraction(n, d, 0.9, &mut r);
        let u = sample::random_unitary(d, &mut r);
        prop_assert_eq!(gamma(&t, None).unwrap(), gamma(&t.conjugated_by(&u).unwrap(), None).unwrap());
    }

    #[test]
    fn degree_chain_is_decreasing(seed in any::<u64>(), n in 1usize..3, d in 1usize..6) {
        let t = sample::random_nilpotent(n, d, 1 + (seed as usize) % d, &mut rng(seed));
        let rep = charfun_degree(&t, None).unwrap();
        prop_assert!(rep.chain.windows(2).all(|w| w[1] < w[0]));
        prop_assert_eq!(rep.chain.last().copied(), Some(0));
    }

    #[test]
    fn poisson_kernel_telescopes(seed in any::<u64>(), n in 1usize..3, d in 1usize..5, depth in 0usize..5) {
        let t = sample::random_row_contraction(n, d, 0.95, &mut rng(seed));
        let k = poisson_kernel(&t, depth).unwrap();
        let lhs = k.matrix.adjoint() * &k.matrix + t.phi_power_identity(depth + 1);
        prop_assert!(max_abs(&(lhs - identity(d))) < 1e-10);
    }

    #[test]
    fn automorphism_inverse_undoes_it(seed in any::<u64>(), n in 1usize..4, k in 1usize..4) {
        let mut r = rng(seed);
        let phi = AutElement::new(sample::random_unitary(n, &mut r), sample::ball_point_within(n, 0.7, &mut r)).unwrap();
        let x = sample::ball_tuple(n, k, 0.6, &mut r);
        let back = aut_apply(&invert(&phi).unwrap(), &aut_apply(&phi, &x).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&x) {
            prop_assert!(max_abs(&(a - b)) < 1e-9);
        }
    }
}

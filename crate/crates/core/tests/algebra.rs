mod common;

use common::{max_abs_diff, random_hermitian, random_matrix};
use nanosps_core::hilbert::number;
use nanosps_core::{
    annihilation, embed, emitter_flip, expectation, DensityMatrix, Level, OperatorMatrix, Slot, SpaceConfig, C64,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn slot_dim(slot: Slot, cfg: &SpaceConfig) -> usize {
    match slot {
        Slot::Emitter => 3,
        Slot::Mode1 => cfg.n_max1 + 1,
        Slot::Mode2 => cfg.n_max2 + 1,
    }
}

#[test]
fn basis_ordering_places_mode_two_fastest() {
    let cfg = SpaceConfig::new(10, 5);
    assert_eq!(cfg.index(Level::One, 0, 1), 1);
    assert_eq!(cfg.index(Level::One, 1, 0), 6);
    assert_eq!(cfg.index(Level::Two, 0, 0), 66);
    assert_eq!(cfg.index(Level::Excited, 10, 5), 197);
    for i in 0..cfg.dim() {
        let (l, n1, n2) = cfg.decode(i);
        assert_eq!(cfg.index(l, n1, n2), i);
    }
}

#[test]
fn full_space_operators_act_on_the_right_factors() {
    let cfg = SpaceConfig::new(4, 3);
    let a1 = embed(&annihilation(4), Slot::Mode1, &cfg).unwrap();
    let a2 = embed(&annihilation(3), Slot::Mode2, &cfg).unwrap();
    let s_e1 = embed(&emitter_flip(Level::Excited, Level::One), Slot::Emitter, &cfg).unwrap();
    // a₁ lowers only n₁, σ_e1 raises only the emitter
    assert_eq!(a1[(cfg.index(Level::Two, 2, 1), cfg.index(Level::Two, 3, 1))], C64::new(3f64.sqrt(), 0.0));
    assert_eq!(a2[(cfg.index(Level::One, 4, 0), cfg.index(Level::One, 4, 1))], C64::new(1.0, 0.0));
    assert_eq!(s_e1[(cfg.index(Level::Excited, 1, 2), cfg.index(Level::One, 1, 2))], C64::new(1.0, 0.0));
    assert_eq!(s_e1.nonzeros().count(), 5 * 4);

    let n = |slot, op| {
        let rho = DensityMatrix::basis(cfg.dim(), cfg.index(Level::Excited, 3, 2));
        expectation(&rho, &embed(&op, slot, &cfg).unwrap()).unwrap()
    };
    assert_eq!(n(Slot::Mode1, number(4)), C64::new(3.0, 0.0));
    assert_eq!(n(Slot::Mode2, number(3)), C64::new(2.0, 0.0));
}

#[test]
fn hermitian_expectations_are_real() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for dim in [3, 12, 24] {
        let h = random_hermitian(&mut rng, dim);
        let b = random_matrix(&mut rng, dim);
        // ρ = BB†/Tr(BB†)
        let bb = b.try_mul(&b.dagger()).unwrap();
        let rho = DensityMatrix::from_matrix(bb.scale(C64::new(1.0 / bb.trace().re, 0.0))).unwrap();
        let e = expectation(&rho, &h).unwrap();
        assert!(e.im.abs() <= 1e-10 * e.norm().max(1e-300));
        assert!(rho.min_eigenvalue().unwrap() > -1e-12);
    }
}

proptest! {
    #[test]
    fn embedding_preserves_spectrum(seed in any::<u64>(), n1 in 0usize..3, n2 in 0usize..3, which in 0usize..3) {
        let cfg = SpaceConfig::new(n1, n2);
        let slot = [Slot::Emitter, Slot::Mode1, Slot::Mode2][which];
        let local = slot_dim(slot, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let op = random_hermitian(&mut rng, local);
        let big = embed(&op, slot, &cfg).unwrap();
        let expected = sorted(
            op.hermitian_eigenvalues().unwrap().into_iter().flat_map(|e| std::iter::repeat_n(e, cfg.dim() / local)).collect(),
        );
        let got = sorted(big.hermitian_eigenvalues().unwrap());
        for (a, b) in got.iter().zip(&expected) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn embedded_operators_on_distinct_factors_commute(seed in any::<u64>(), n1 in 0usize..3, n2 in 0usize..3) {
        let cfg = SpaceConfig::new(n1, n2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let slots = [Slot::Emitter, Slot::Mode1, Slot::Mode2];
        let ops: Vec<OperatorMatrix> = slots
            .iter()
            .map(|&s| embed(&random_matrix(&mut rng, slot_dim(s, &cfg)), s, &cfg).unwrap())
            .collect();
        for i in 0..3 {
            for j in i + 1..3 {
                prop_assert!(ops[i].commutator(&ops[j]).unwrap().max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dagger_is_an_involution_that_reverses_products(seed in any::<u64>(), dim in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, dim);
        let b = random_matrix(&mut rng, dim);
        prop_assert_eq!(a.dagger().dagger(), a.clone());
        let lhs = a.try_mul(&b).unwrap().dagger();
        let rhs = b.dagger().try_mul(&a.dagger()).unwrap();
        prop_assert!(max_abs_diff(&lhs, &rhs) < 1e-14);
    }

    #[test]
    fn truncated_commutator_is_identity_below_ceiling(n_max in 1usize..12) {
        let a = annihilation(n_max);
        let c = a.commutator(&a.dagger()).unwrap();
        for i in 0..=n_max {
            for j in 0..=n_max {
                let expected = match (i == j, i == n_max) {
                    (true, false) => 1.0,
                    (true, true) => -(n_max as f64),
                    _ => 0.0,
                };
                prop_assert!((c[(i, j)] - C64::new(expected, 0.0)).norm() < 1e-12);
            }
        }
    }
}

mod common;

use hexpack::lattice::{augment, complexify, root_lattice_a, IntegerLattice, DEFAULT_ENUMERATION_CAP};
use proptest::prelude::*;

#[test]
fn fifty_seeded_complexifications() {
    for seed in 0..50 {
        common::complexify_instance(seed).unwrap();
    }
}

#[test]
fn fifty_seeded_augmentations() {
    for seed in 0..50 {
        common::augment_instance(seed).unwrap();
    }
}

#[test]
fn augmented_root_lattices() {
    for n in 2..=6 {
        let a = root_lattice_a(n).unwrap();
        for chi in [1, 2, n as i64, -3] {
            let aug = augment(&a, chi).unwrap();
            // det²(A_{n-1}) = n
            assert_eq!(aug.gram_det_squared().unwrap(), (chi * chi) as i128);
        }
    }
}

fn bases(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-4i64..=4, n), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn complexify_keeps_distance_and_squares_det(basis in (1usize..=3).prop_flat_map(bases)) {
        let Ok(base) = IntegerLattice::new(basis) else { return Ok(()) };
        prop_assume!(base.is_full_rank());
        let packing = complexify(&base).unwrap();
        let d = packing.min_distance_certified(DEFAULT_ENUMERATION_CAP).unwrap();
        prop_assert_eq!(d.squared, base.shortest_vector().unwrap().squared);
        let n = base.ambient_dim() as i32;
        let det2 = base.gram_det_squared().unwrap() as f64;
        let expected = (3f64.sqrt() / 2.0).powi(n) * det2;
        prop_assert!((packing.exact_period_det().unwrap() - expected).abs() <= 1e-9 * expected);
    }
}

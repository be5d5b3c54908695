use grassgeo::oracle;
use grassgeo::sampling::SampleStream;
use grassgeo::topology::{self, energy, energy_critical_check, energy_gradient_norm, seven_numbers, EnergyWeights};
use grassgeo::{GeoError, Plane, Shape};
use proptest::prelude::*;

#[test]
fn counting_routes_agree_with_brute_force() {
    for total in 2..=12 {
        for n in 1..total {
            let shape = Shape::new(n, total - n).unwrap();
            let expected = oracle::pascal(total, n);
            assert_eq!(topology::euler_characteristic(shape).unwrap(), expected);
            assert_eq!(topology::cell_count(shape).unwrap(), expected);
            assert_eq!(oracle::partitions_in_box(n, total - n), expected);
            assert_eq!(topology::borel_weil_dim(shape).unwrap(), expected);
            assert_eq!(topology::kodaira_dimension(shape).unwrap(), expected);
            assert_eq!(topology::orthogonal_coherent_count(shape).unwrap(), expected);
        }
    }
}

#[test]
fn counts_are_symmetric_under_duality() {
    for n in 1..=6 {
        for m in 1..=6 {
            let a = Shape::new(n, m).unwrap();
            let b = Shape::new(m, n).unwrap();
            assert_eq!(topology::cell_count(a).unwrap(), topology::cell_count(b).unwrap());
            assert_eq!(topology::borel_weil_dim(a).unwrap(), topology::borel_weil_dim(b).unwrap());
        }
    }
}

#[test]
fn seven_numbers_agree_on_small_shapes() {
    for (n, m, expected) in [(1, 1, 2), (1, 2, 3), (2, 2, 6), (2, 3, 10), (3, 3, 20)] {
        let shape = Shape::new(n, m).unwrap();
        let report = seven_numbers(shape, &EnergyWeights::sequential(n + m), 7).unwrap();
        assert!(report.all_equal, "{report:?}");
        assert!(report.critical_certified);
        assert_eq!(report.values(), [expected; 7]);
    }
}

#[test]
fn random_weights_certify_coordinate_planes() {
    let shape = Shape::new(2, 3).unwrap();
    for draw in 0..5 {
        let mut rng = SampleStream::new(draw, 9);
        let w = EnergyWeights::new((0..5).map(|_| rng.uniform_in(-3.0, 3.0)).collect()).unwrap();
        let check = energy_critical_check(shape, &w, draw).unwrap();
        assert_eq!(check.count, 10);
        assert!(check.certified, "{check:?}");
        assert!(check.max_critical_gradient < 1e-7);
        assert!(check.min_random_gradient > 1e-3);
    }
}

#[test]
fn energy_of_coordinate_plane_is_sum_of_its_weights() {
    let shape = Shape::new(2, 2).unwrap();
    let w = EnergyWeights::new(vec![0.5, 1.5, 4.0, -2.0]).unwrap();
    let p = Plane::coordinate(shape, &[1, 3]).unwrap();
    assert!((energy(&p, &w) - (1.5 - 2.0)).abs() < 1e-14);
    assert!(energy_gradient_norm(&p, &w).unwrap() < 1e-10);
}

#[test]
fn coincident_weights_are_rejected() {
    assert!(matches!(
        EnergyWeights::new(vec![1.0, 2.0, 1.0]),
        Err(GeoError::DegenerateWeights { .. })
    ));
}

#[test]
fn large_totals_are_refused() {
    let huge = Shape::new(40, 40).unwrap();
    assert!(topology::euler_characteristic(huge).is_err());
    assert!(topology::orthogonal_coherent_count(Shape::new(11, 11).unwrap()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn energy_is_trace_of_weighted_projector(seed in any::<u64>()) {
        let shape = Shape::new(2, 3).unwrap();
        let mut rng = SampleStream::new(seed, 0);
        let p = Plane::random(shape, &mut rng);
        let w = EnergyWeights::sequential(5);
        let proj = p.projector();
        let trace: f64 = (0..5).map(|i| w.values()[i] * proj[(i, i)].re).sum();
        prop_assert!((energy(&p, &w) - trace).abs() < 1e-12);
        // Energy is bounded by the n smallest and n largest weights.
        prop_assert!(energy(&p, &w) >= 1.0 + 2.0 - 1e-12);
        prop_assert!(energy(&p, &w) <= 4.0 + 5.0 + 1e-12);
    }
}

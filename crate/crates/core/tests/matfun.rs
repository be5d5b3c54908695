use grassgeo::matfun::{self, ScalarKernel, SpectralFactorization};
use grassgeo::oracle;
use grassgeo::sampling::SampleStream;
use grassgeo::{CMat, Complex64};
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Chart coordinate of a dense frame, computed without the library:
/// `Z = -(bottom · top⁻¹)†`.
fn chart_of_frame(frame: &CMat, n: usize) -> CMat {
    let top = frame.rows(0, n).into_owned();
    let bottom = frame.rows(n, frame.nrows() - n).into_owned();
    let inv = top.try_inverse().expect("top block invertible");
    -(bottom * inv).adjoint()
}

#[test]
fn tanc_row_vector_matches_dense_exponential() {
    let b = CMat::from_row_slice(1, 2, &[c(std::f64::consts::FRAC_PI_3), c(0.0)]);
    let frame = oracle::geodesic_frame_dense(&b, 1.0);
    let expected = chart_of_frame(&frame, 1);
    assert!((expected[(0, 0)].re - 3f64.sqrt()).abs() < 1e-12);
    let got = matfun::apply_odd_kernel(&b, ScalarKernel::Tanc).unwrap();
    assert!((got - expected).norm() < 1e-12);
}

#[test]
fn tanc_matches_dense_exponential_for_random_blocks() {
    for seed in 0..20 {
        let mut rng = SampleStream::new(seed, 0);
        let b = rng.bounded_matrix(2, 3, 1.4);
        let expected = chart_of_frame(&oracle::geodesic_frame_dense(&b, 1.0), 2);
        let got = matfun::apply_odd_kernel(&b, ScalarKernel::Tanc).unwrap();
        assert!((got - &expected).norm() < 1e-9 * expected.norm().max(1.0));
    }
}

#[test]
fn sin_kernel_is_the_dense_off_diagonal_block() {
    // Bottom block of the geodesic frame is -V sin Σ U† = -(B sinc(√B†B))†.
    let mut rng = SampleStream::new(3, 1);
    let b = rng.complex_matrix(3, 2);
    let frame = oracle::geodesic_frame_dense(&b, 1.0);
    let bottom = frame.rows(3, 2).into_owned();
    let via_kernel = -matfun::apply_odd_kernel(&b, ScalarKernel::Sinc).unwrap().adjoint();
    assert!((bottom - via_kernel).norm() < 1e-10);
}

#[test]
fn random_linear_map_has_full_rank() {
    for (dom, cod) in [(3, 5), (6, 4), (4, 4)] {
        let mut rng = SampleStream::new(17, dom as u64 * 10 + cod as u64);
        let a: Vec<f64> = rng.real_normals(dom * cod);
        let map = |x: &[f64]| -> grassgeo::Result<Vec<f64>> {
            Ok((0..cod).map(|i| (0..dom).map(|j| a[i * dom + j] * x[j]).sum()).collect())
        };
        let point = rng.real_normals(dom);
        let report = matfun::differential_rank(map, &point, None, 1e-6).unwrap();
        assert_eq!(report.rank, dom.min(cod));
    }
}

#[test]
fn angles_agree_with_eigenvalue_oracle() {
    for seed in 0..30 {
        let mut rng = SampleStream::new(seed, 2);
        let p = rng.complex_matrix(5, 2).qr().q();
        let q = rng.complex_matrix(5, 2).qr().q();
        let got = matfun::principal_angles(&p, &q).unwrap();
        let expected = oracle::principal_angles_eig(&p, &q);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-7, "{got:?} vs {expected:?}");
        }
    }
}

fn matrix_strategy(rows: usize, cols: usize, scale: f64) -> impl Strategy<Value = CMat> {
    prop::collection::vec(-scale..scale, 2 * rows * cols)
        .prop_map(move |v| matfun::complexify(&v, rows, cols).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_unitarily_equivariant(
        b in matrix_strategy(2, 3, 0.6),
        seed in any::<u64>(),
    ) {
        let mut rng = SampleStream::new(seed, 0);
        let u = rng.unitary(2);
        let v = rng.unitary(3);
        let lhs = matfun::apply_odd_kernel(&(&u * &b * v.adjoint()), ScalarKernel::Tanc).unwrap();
        let rhs = &u * matfun::apply_odd_kernel(&b, ScalarKernel::Tanc).unwrap() * v.adjoint();
        prop_assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn arctanc_inverts_tanc_below_pole(b in matrix_strategy(3, 2, 0.7)) {
        prop_assume!(SpectralFactorization::of(&b).largest() < std::f64::consts::FRAC_PI_2 - 1e-3);
        let z = matfun::apply_odd_kernel(&b, ScalarKernel::Tanc).unwrap();
        let back = matfun::apply_odd_kernel(&z, ScalarKernel::Arctanc).unwrap();
        prop_assert!((back - b).norm() < 1e-9);
    }

    #[test]
    fn principal_angles_are_symmetric(seed in any::<u64>()) {
        let mut rng = SampleStream::new(seed, 1);
        let p = rng.complex_matrix(4, 2).qr().q();
        let q = rng.complex_matrix(4, 2).qr().q();
        let pq = matfun::principal_angles(&p, &q).unwrap();
        let qp = matfun::principal_angles(&q, &p).unwrap();
        prop_assert_eq!(pq.len(), 2);
        prop_assert!(pq.windows(2).all(|w| w[0] <= w[1]));
        for (a, b) in pq.iter().zip(&qp) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        // Re-framing by a right unitary does not move the plane.
        let w = rng.unitary(2);
        let reframed = matfun::principal_angles(&(&p * w), &q).unwrap();
        for (a, b) in pq.iter().zip(&reframed) {
            prop_assert!((a - b).abs() <= 1e-7);
        }
    }

    #[test]
    fn factorization_reconstructs(b in matrix_strategy(3, 4, 5.0)) {
        let svd = SpectralFactorization::of(&b);
        prop_assert!((svd.reconstruct() - &b).norm() <= 1e-12 * b.norm().max(1.0));
        prop_assert!(svd.singulars.windows(2).all(|w| w[0] >= w[1]));
    }
}

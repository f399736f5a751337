use corrmap::linalg::{hermitian_eigen, kron, partial_trace, partial_transpose, CMatrix, Subsystem, C64};
use corrmap::mapping::{corollary1_partner, corollary3_partner, map_m, map_n};
use corrmap::measurements::{qubit_measurement, qudit_measurement, random_basis, ProjMeasurement};
use corrmap::models::{born_joint, model_from_separable, model_joint, Setting};
use corrmap::states::{bloch_from_qubit, random_separable, DensityMatrix};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn int_matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-4i32..=4, -4i32..=4), rows * cols).prop_map(move |v| {
        let data = v.into_iter().map(|(re, im)| C64::new(re as f64, im as f64)).collect();
        CMatrix::from_vec(rows, cols, data).unwrap()
    })
}

fn hermitian(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
        let m = CMatrix::from_vec(n, n, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap();
        (&m + &m.adjoint()).scale(0.5)
    })
}

proptest! {
    #[test]
    fn kron_is_associative_on_integer_matrices(
        a in int_matrix(2, 2), b in int_matrix(2, 3), c in int_matrix(3, 2)
    ) {
        prop_assert_eq!(kron(&kron(&a, &b), &c), kron(&a, &kron(&b, &c)));
    }

    #[test]
    fn partial_trace_factorizes_exactly(a in int_matrix(3, 3), b in int_matrix(2, 2)) {
        let ab = kron(&a, &b);
        prop_assert_eq!(partial_trace(&ab, 3, 2, Subsystem::B).unwrap(), b.scale_complex(a.trace()));
    }

    #[test]
    fn partial_transpose_preserves_trace(m in hermitian(6)) {
        for on in [Subsystem::A, Subsystem::B] {
            let pt = partial_transpose(&m, 2, 3, on).unwrap();
            prop_assert!((pt.trace() - m.trace()).norm() <= 1e-12);
            let sum: f64 = hermitian_eigen(&pt).unwrap().values.iter().sum();
            prop_assert!((sum - m.trace().re).abs() <= 1e-12);
        }
    }

    #[test]
    fn bloch_decomposition_round_trips(m in hermitian(2)) {
        let (t, r) = bloch_from_qubit(&m).unwrap();
        let back = &CMatrix::identity(2).scale(t) + &r.sigma_dot();
        prop_assert!(back.max_abs_diff(&m) <= 1e-14);
    }

    #[test]
    fn qubit_measurements_are_valid(theta in 0.0f64..std::f64::consts::PI, phi in 0.0f64..6.3) {
        let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let m = qubit_measurement(n).unwrap();
        prop_assert!(ProjMeasurement::new(m.projectors().to_vec()).is_ok());
    }
}

#[test]
fn eigen_reconstruction_on_random_hermitian_matrices() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    for n in [2usize, 3, 4, 6] {
        for _ in 0..25 {
            let m = hermitian(n).new_tree(&mut runner).unwrap().current();
            let e = hermitian_eigen(&m).unwrap();
            assert!(e.reconstruct().max_abs_diff(&m) <= 1e-9);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            for (k, &lambda) in e.values.iter().enumerate() {
                let v = e.vectors.column(k);
                let mv = m.mat_vec(&v).unwrap();
                let res = mv.iter().zip(&v).map(|(x, y)| (x - y * lambda).norm()).fold(0.0, f64::max);
                assert!(res <= 1e-10, "n={n} residual {res}");
            }
        }
    }
}

#[test]
fn random_bases_give_valid_measurements() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for d in [2, 3, 4] {
        for _ in 0..100 {
            assert!(qudit_measurement(&random_basis(d, &mut rng)).is_ok());
        }
    }
}

#[test]
fn separable_models_reproduce_born_probabilities() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let (rho, ens) = random_separable(3, 2, 4, 46).unwrap();
    let model = model_from_separable(&ens).unwrap();
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let sa = Setting::new("A", qudit_measurement(&random_basis(3, &mut rng)).unwrap());
        let sb = Setting::new("B", qudit_measurement(&random_basis(2, &mut rng)).unwrap());
        for a in 0..3 {
            for b in 0..2 {
                let q = born_joint(&rho, &sa.measurement, &sb.measurement, a, b).unwrap();
                let m = model_joint(&model, &sa, &sb, a, b).unwrap();
                worst = worst.max((q - m).abs());
            }
        }
    }
    assert!(worst <= 1e-12, "{worst}");
}

#[test]
fn mapped_states_stay_valid() {
    for seed in 0..30 {
        let (tau, _) = random_separable(3, 2, 3, seed).unwrap();
        let (rho, _) = random_separable(2, 3, 3, seed + 100).unwrap();
        for (mu, c) in [(0.0, 0.0), (0.3, 0.9), (0.57, 0.01), (1.0, 1.0)] {
            let m: DensityMatrix = map_m(&tau, &corollary1_partner(&tau, c).unwrap(), mu).unwrap();
            assert_eq!(m.dims(), (3, 2));
            let n = map_n(&rho, &corollary3_partner(&rho, c).unwrap(), mu).unwrap();
            assert_eq!(n.dims(), (2, 3));
        }
    }
}

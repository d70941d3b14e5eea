use num_complex::Complex64;
use proptest::prelude::*;

use tori::numerics::{det, eigenvalues, multiset_distance, newton_solve, NewtonOptions};
use tori::{Error, Mat, Vector};

fn square(max: usize) -> impl Strategy<Value = Mat> {
    (1usize..=max).prop_flat_map(|n| {
        prop::collection::vec(-2.0..2.0f64, n * n).prop_map(move |v| Mat::from_vec(n, n, v))
    })
}

proptest! {
    #[test]
    fn eigenvalues_match_nalgebra(m in square(8)) {
        let ours = eigenvalues(&m).unwrap();
        let reference: Vec<Complex64> = m.clone().complex_eigenvalues().iter().copied().collect();
        let scale = 1.0 + m.amax();
        prop_assert!(multiset_distance(&ours.values, &reference) < 1e-6 * scale);
    }

    #[test]
    fn eigenvalues_sum_to_trace(m in square(8)) {
        let sum = eigenvalues(&m).unwrap().sum();
        prop_assert!((sum.re - m.trace()).abs() < 1e-9 * (1.0 + m.amax()) * m.nrows() as f64);
        prop_assert!(sum.im.abs() < 1e-9 * (1.0 + m.amax()) * m.nrows() as f64);
    }

    #[test]
    fn transpose_has_the_same_spectrum(m in square(6)) {
        let a = eigenvalues(&m).unwrap();
        let b = eigenvalues(&m.transpose()).unwrap();
        prop_assert!(a.distance(&b) < 1e-6 * (1.0 + m.amax()));
    }

    #[test]
    fn determinant_is_multiplicative(a in square(5), seed in prop::collection::vec(-2.0..2.0f64, 25)) {
        let n = a.nrows();
        let b = Mat::from_fn(n, n, |i, j| seed[i * 5 + j]);
        let lhs = det(&(&a * &b)).unwrap();
        let rhs = det(&a).unwrap() * det(&b).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
    }
}

#[test]
fn rotation_spectrum() {
    let t: f64 = 0.7;
    let m = Mat::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
    let spec = eigenvalues(&m).unwrap();
    let expected = [
        Complex64::from_polar(1.0, t),
        Complex64::from_polar(1.0, -t),
    ];
    assert!(multiset_distance(&spec.values, &expected) < 1e-14);
}

#[test]
fn identity_spectrum_has_full_multiplicity() {
    let spec = eigenvalues(&Mat::identity(6, 6)).unwrap();
    assert_eq!(spec.count_near(Complex64::new(1.0, 0.0), 1e-12), 6);
}

#[test]
fn non_square_input_is_a_dimension_error() {
    let err = eigenvalues(&Mat::zeros(2, 3)).unwrap_err();
    assert!(matches!(err, Error::Dimension(_)));
}

#[test]
fn newton_on_a_linear_system_takes_one_step() {
    let a = Mat::from_row_slice(2, 2, &[3.0, 1.0, 1.0, 2.0]);
    let b = Vector::from_vec(vec![1.0, -1.0]);
    let sol = newton_solve(
        |y: &Vector| Ok(&a * y - &b),
        &Vector::zeros(2),
        &NewtonOptions::default(),
    )
    .unwrap();
    assert!(sol.iterations <= 2, "{} iterations", sol.iterations);
    assert!((&a * &sol.root - &b).amax() < 1e-10);
}

#[test]
fn newton_finds_the_square_root() {
    let sol = newton_solve(
        |y: &Vector| Ok(Vector::from_vec(vec![y[0] * y[0] - 2.0])),
        &Vector::from_vec(vec![1.0]),
        &NewtonOptions::default(),
    )
    .unwrap();
    assert!((sol.root[0] - 2f64.sqrt()).abs() < 1e-10);
}

#[test]
fn newton_refuses_a_rank_deficient_jacobian() {
    let err = newton_solve(
        |y: &Vector| {
            Ok(Vector::from_vec(vec![
                y[0] + y[1] - 1.0,
                2.0 * (y[0] + y[1]) - 2.0,
            ]))
        },
        &Vector::zeros(2),
        &NewtonOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::Nondegeneracy(_)), "{err:?}");
}

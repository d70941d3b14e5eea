use std::f64::consts::PI;

use approx::assert_abs_diff_eq;

use tori::hamiltonian::{sample_neighbourhood, SamplingConfig};
use tori::models::{make_system, oracle, ModelSpec, OracleQuery, OracleValue};
use tori::reducible::lyapunov_specialization;
use tori::{Flow, Vector};

fn all_models() -> Vec<ModelSpec> {
    vec![
        ModelSpec::system_a(),
        ModelSpec::system_b(),
        ModelSpec::system_c(),
    ]
}

#[test]
fn hypotheses_hold_for_every_model() {
    for spec in all_models() {
        let m = make_system(&spec).unwrap();
        let samples = sample_neighbourhood(
            std::slice::from_ref(&m.seed.base),
            &SamplingConfig {
                count: 50,
                ..Default::default()
            },
        );
        for eps in [0.0, 0.05, 0.1] {
            let rep = m.system.check_hypotheses(&samples, eps, 1e-9).unwrap();
            assert!(rep.pass, "{} at eps = {eps}: {rep:?}", spec.name());
        }
    }
}

#[test]
fn brackets_vanish_near_the_seed() {
    for spec in all_models() {
        let m = make_system(&spec).unwrap();
        let samples = sample_neighbourhood(
            std::slice::from_ref(&m.seed.base),
            &SamplingConfig {
                seed: 7,
                ..Default::default()
            },
        );
        let s = m.system.s();
        for x in &samples {
            for i in 0..s {
                for j in 0..s {
                    assert!(m.system.poisson_bracket(i, j, x, 0.1).unwrap().abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn frequency_data_matches_the_period_lattice() {
    for spec in all_models() {
        let m = make_system(&spec).unwrap();
        let flow = Flow::new(&m.system, 0.0);
        let lattice = flow
            .period_lattice(&m.seed.base, &m.seed.lattice_guess)
            .unwrap();
        let a = lattice.frequency_matrix().unwrap();
        assert!((a - &m.frequencies.a).amax() < 1e-7, "{}", spec.name());
    }
}

#[test]
fn isotropic_period_from_hand_guess() {
    let m = make_system(&ModelSpec::system_c()).unwrap();
    let flow = Flow::new(&m.system, 0.0);
    let pv = flow
        .find_period_vector(&m.seed.base, &[1, 0], &Vector::from_vec(vec![PI, -PI]))
        .unwrap();
    assert_abs_diff_eq!(pv.c, Vector::from_vec(vec![PI, -PI]), epsilon = 1e-8);
}

#[test]
fn lyapunov_example_is_nonresonant() {
    let spec = ModelSpec::Lyapunov {
        omega1: 2.0,
        nu: 3.0,
        action: 1.0,
    };
    let m = make_system(&spec).unwrap();
    let (w, nu) = (m.frequencies.a[(0, 0)], m.frequencies.b[(0, 0)]);
    assert_eq!((w, nu), (2.0, 3.0));
    assert!(lyapunov_specialization(w, &[nu], 1e-8).unwrap());
}

#[test]
fn seed_levels() {
    let a = make_system(&ModelSpec::system_a()).unwrap();
    assert_abs_diff_eq!(
        a.seed.beta0,
        Vector::from_vec(vec![1.0 + 2f64.sqrt(), 1.0]),
        epsilon = 1e-14
    );
    let c = make_system(&ModelSpec::system_c()).unwrap();
    // F_2 = q1 p2 - q2 p1 vanishes at zero angles.
    assert_abs_diff_eq!(
        c.seed.beta0,
        Vector::from_vec(vec![1.5, 0.0]),
        epsilon = 1e-14
    );
}

#[test]
fn rho_oracle_for_action_oscillators() {
    let spec = ModelSpec::system_a();
    let beta = Vector::from_vec(vec![2.5, 0.9]);
    for eps in [0.0, 0.1] {
        match oracle(&spec, OracleQuery::Rho, &beta, eps, &[1, 0]).unwrap() {
            OracleValue::Vector(v) => assert_eq!(v, Vector::zeros(2)),
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn twist_oracle_for_action_oscillators() {
    let spec = ModelSpec::system_a();
    let beta = Vector::from_vec(vec![2.5, 0.9]);
    match oracle(&spec, OracleQuery::TwistDet, &beta, 0.1, &[1, 0]).unwrap() {
        OracleValue::Scalar(d) => assert_abs_diff_eq!(d, 0.04, epsilon = 1e-15),
        other => panic!("unexpected {other:?}"),
    }
}

//! Built-in systems with closed-form tori, frequencies and multipliers.
//!
//! Throughout `I_j = (q_j^2 + p_j^2) / 2`, and base points sit at angle zero:
//! `q_j = sqrt(2 I_j)`, `p_j = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{HamiltonianSystem, System};
use crate::numerics::{self, serde_mat, ComplexSpectrum, Mat, Vector};
use crate::reducible::{compute_q, FrequencyData};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum ModelSpec {
    /// `F_1 = sum_j omega_j I_j + eps sum_j a_j I_j^2`, `F_i = I_i` for
    /// `2 <= i <= s`; seed torus `I_j = 1` for `j <= s`, `I_j = 0` otherwise.
    ActionOscillators {
        omega: Vec<f64>,
        a: Vec<f64>,
        s: usize,
    },
    /// `n = 2`, `s = 1`: `F = omega_1 I_1 + nu I_2 + eps q_1^2 q_2`; seed
    /// `I_1 = action`, `I_2 = 0`.
    Lyapunov { omega1: f64, nu: f64, action: f64 },
    /// `n = 3`, `s = 2`: `F_1 = omega (I_1 + I_2) + nu I_3 + eps (q_1^2 + q_2^2) q_3`
    /// and `F_2 = q_1 p_2 - q_2 p_1`; seed `I_1 = a`, `I_2 = b`, `I_3 = 0`.
    IsotropicMomentum { omega: f64, nu: f64, a: f64, b: f64 },
}

impl ModelSpec {
    /// Three oscillators, two integrals, `omega = (1, sqrt 2, sqrt 3)`, `a = (1, 1, 1)`.
    pub fn system_a() -> Self {
        ModelSpec::ActionOscillators {
            omega: vec![1.0, 2f64.sqrt(), 3f64.sqrt()],
            a: vec![1.0; 3],
            s: 2,
        }
    }

    pub fn system_b() -> Self {
        ModelSpec::Lyapunov {
            omega1: 1.0,
            nu: 2f64.sqrt(),
            action: 1.0,
        }
    }

    pub fn system_c() -> Self {
        ModelSpec::IsotropicMomentum {
            omega: 1.0,
            nu: 2f64.sqrt(),
            a: 1.0,
            b: 0.5,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::ActionOscillators { .. } => "action_oscillators",
            ModelSpec::Lyapunov { .. } => "lyapunov",
            ModelSpec::IsotropicMomentum { .. } => "isotropic_momentum",
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ModelSpec::ActionOscillators { omega, .. } => omega.len(),
            ModelSpec::Lyapunov { .. } => 2,
            ModelSpec::IsotropicMomentum { .. } => 3,
        }
    }

    pub fn s(&self) -> usize {
        match self {
            ModelSpec::ActionOscillators { s, .. } => *s,
            ModelSpec::Lyapunov { .. } => 1,
            ModelSpec::IsotropicMomentum { .. } => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Spec(format!("{name} must be finite, got {v}")))
            }
        };
        match self {
            ModelSpec::ActionOscillators { omega, a, s } => {
                if omega.is_empty() {
                    return Err(Error::Spec("omega must not be empty".into()));
                }
                if a.len() != omega.len() {
                    return Err(Error::Spec(format!(
                        "a has {} entries, omega has {}",
                        a.len(),
                        omega.len()
                    )));
                }
                if *s == 0 || *s > omega.len() {
                    return Err(Error::Spec(format!(
                        "need 1 <= s <= n = {}, got s = {s}",
                        omega.len()
                    )));
                }
                for (j, (&w, &aj)) in omega.iter().zip(a).enumerate() {
                    finite("omega", w)?;
                    finite("a", aj)?;
                    if w == 0.0 {
                        return Err(Error::Spec(format!("omega_{} must be nonzero", j + 1)));
                    }
                }
            }
            ModelSpec::Lyapunov { omega1, nu, action } => {
                finite("omega1", *omega1)?;
                finite("nu", *nu)?;
                if *omega1 == 0.0 {
                    return Err(Error::Spec("omega1 must be nonzero".into()));
                }
                if !(*action > 0.0) || !action.is_finite() {
                    return Err(Error::Spec(format!(
                        "action must be positive, got {action}"
                    )));
                }
            }
            ModelSpec::IsotropicMomentum { omega, nu, a, b } => {
                finite("omega", *omega)?;
                finite("nu", *nu)?;
                if *omega == 0.0 {
                    return Err(Error::Spec("omega must be nonzero".into()));
                }
                if !(*a > 0.0 && *b > 0.0) || !a.is_finite() || !b.is_finite() {
                    return Err(Error::Spec(format!(
                        "seed actions must be positive, got a = {a}, b = {b}"
                    )));
                }
                if a == b {
                    return Err(Error::Spec("seed actions must differ (a != b)".into()));
                }
            }
        }
        Ok(())
    }

    /// Seed actions `I_1..I_n`.
    fn seed_actions(&self) -> Vec<f64> {
        match self {
            ModelSpec::ActionOscillators { omega, s, .. } => (0..omega.len())
                .map(|j| if j < *s { 1.0 } else { 0.0 })
                .collect(),
            ModelSpec::Lyapunov { action, .. } => vec![*action, 0.0],
            ModelSpec::IsotropicMomentum { a, b, .. } => vec![*a, *b, 0.0],
        }
    }

    /// Exact `A`, `B` on the torus at level `beta` with zero transverse
    /// actions. Only available where the flow is linear in the angles.
    pub fn frequency_data_at(&self, beta: &Vector, eps: f64) -> Result<FrequencyData> {
        match self {
            ModelSpec::ActionOscillators { omega, a, s } => {
                let actions = action_oscillator_actions(omega, a, *s, beta, eps)?;
                let n = omega.len();
                let mut am = Mat::zeros(*s, *s);
                for j in 0..*s {
                    am[(0, j)] = omega[j] + 2.0 * eps * a[j] * actions[j];
                }
                for i in 1..*s {
                    am[(i, i)] = 1.0;
                }
                let mut bm = Mat::zeros(*s, n - s);
                for j in *s..n {
                    bm[(0, j - s)] = omega[j];
                }
                FrequencyData::new(am, bm)
            }
            ModelSpec::Lyapunov { omega1, nu, .. } if eps == 0.0 => FrequencyData::new(
                Mat::from_element(1, 1, *omega1),
                Mat::from_element(1, 1, *nu),
            ),
            ModelSpec::IsotropicMomentum { omega, nu, .. } if eps == 0.0 => FrequencyData::new(
                Mat::from_row_slice(2, 2, &[*omega, *omega, -1.0, 1.0]),
                Mat::from_row_slice(2, 1, &[*nu, 0.0]),
            ),
            _ => Err(Error::UnsupportedOracle(format!(
                "no closed-form frequencies for {} at eps = {eps}",
                self.name()
            ))),
        }
    }
}

/// Actions `I_1..I_s` on the torus at level `beta`: `I_i = beta_i` for
/// `i >= 2` and `I_1` the root of the quadratic continuing `eps = 0`.
fn action_oscillator_actions(
    omega: &[f64],
    a: &[f64],
    s: usize,
    beta: &Vector,
    eps: f64,
) -> Result<Vec<f64>> {
    if beta.len() != s {
        return Err(Error::Dimension(format!(
            "level of length {} for s = {s}",
            beta.len()
        )));
    }
    let mut actions = vec![0.0; s];
    let mut rest = 0.0;
    for j in 1..s {
        actions[j] = beta[j];
        rest += omega[j] * beta[j] + eps * a[j] * beta[j] * beta[j];
    }
    let r = beta[0] - rest;
    let k = eps * a[0];
    let w = omega[0];
    let disc = w * w + 4.0 * k * r;
    if disc < 0.0 {
        return Err(Error::Geometry(format!("level {beta} is not attained")));
    }
    actions[0] = 2.0 * r / (w + w.signum() * disc.sqrt());
    Ok(actions)
}

/// Base point, level and cycle data of the distinguished torus.
#[derive(Debug, Clone, Serialize)]
pub struct TorusSeed {
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub base: Vector,
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub beta0: Vector,
    /// Column `j` is a period-vector guess for the cycle `e_j`.
    #[serde(serialize_with = "serde_mat::serialize")]
    pub lattice_guess: Mat,
}

impl TorusSeed {
    /// Guess for the period vector of `alpha`.
    pub fn period_guess(&self, alpha: &[i64]) -> Vector {
        let a = Vector::from_iterator(alpha.len(), alpha.iter().map(|&k| k as f64));
        &self.lattice_guess * a
    }
}

#[derive(Debug, Clone)]
pub struct Model {
    pub spec: ModelSpec,
    pub system: System,
    pub seed: TorusSeed,
    pub frequencies: FrequencyData,
}

pub fn make_system(spec: &ModelSpec) -> Result<Model> {
    spec.validate()?;
    let n = spec.n();
    let actions = spec.seed_actions();
    let mut base = Vector::zeros(2 * n);
    for (j, &i) in actions.iter().enumerate() {
        base[j] = (2.0 * i).sqrt();
    }
    let mut probe = base.clone();
    for (k, v) in probe.iter_mut().enumerate() {
        *v += 0.1 + 0.05 * k as f64;
    }
    let probes = [base.clone(), probe];
    let eps_probe = [0.0, 0.1];
    let system = match spec {
        ModelSpec::ActionOscillators { omega, a, s } => System::register(
            ActionOscillators {
                omega: omega.clone(),
                a: a.clone(),
                s: *s,
            },
            &probes,
            &eps_probe,
        )?,
        ModelSpec::Lyapunov { omega1, nu, .. } => System::register(
            Lyapunov {
                omega1: *omega1,
                nu: *nu,
            },
            &probes,
            &eps_probe,
        )?,
        ModelSpec::IsotropicMomentum { omega, nu, .. } => System::register(
            IsotropicMomentum {
                omega: *omega,
                nu: *nu,
            },
            &probes,
            &eps_probe,
        )?,
    };
    let beta0 = system.values(&base, 0.0);
    let frequencies = spec.frequency_data_at(&beta0, 0.0)?;
    let lattice_guess = numerics::inverse(&frequencies.a.transpose())? * (2.0 * PI);
    Ok(Model {
        spec: spec.clone(),
        system,
        seed: TorusSeed {
            base,
            beta0,
            lattice_guess,
        },
        frequencies,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleQuery {
    Rho,
    Multipliers,
    Frequencies,
    TwistDet,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleValue {
    Vector(Vector),
    Spectrum(ComplexSpectrum),
    Scalar(f64),
}

/// Closed-form values at the torus of level `beta`.
///
/// `Rho` is the transverse fixed point in chart coordinates, `Frequencies`
/// the frequencies of `X_1`, `Multipliers` the spectrum of `dg^c` for the
/// cycle `alpha`, `TwistDet` the determinant of the action Hessian of `F_1`.
pub fn oracle(
    spec: &ModelSpec,
    query: OracleQuery,
    beta: &Vector,
    eps: f64,
    alpha: &[i64],
) -> Result<OracleValue> {
    spec.validate()?;
    let (n, s) = (spec.n(), spec.s());
    let action_only = matches!(spec, ModelSpec::ActionOscillators { .. });
    match query {
        OracleQuery::Rho if action_only || eps == 0.0 => {
            Ok(OracleValue::Vector(Vector::zeros(2 * (n - s))))
        }
        OracleQuery::Frequencies => {
            let fd = spec.frequency_data_at(beta, eps)?;
            Ok(OracleValue::Vector(fd.a.row(0).transpose()))
        }
        OracleQuery::Multipliers => {
            let fd = spec.frequency_data_at(beta, eps)?;
            let q = compute_q(&fd, alpha)?;
            let mut values = vec![Complex64::new(1.0, 0.0); 2 * s];
            for &qj in q.iter() {
                let z = Complex64::from_polar(1.0, 2.0 * PI * qj);
                values.push(z);
                values.push(z.conj());
            }
            Ok(OracleValue::Spectrum(ComplexSpectrum::new(values)))
        }
        OracleQuery::TwistDet => match spec {
            ModelSpec::ActionOscillators { a, s, .. } => Ok(OracleValue::Scalar(
                (2.0 * eps).powi(*s as i32) * a[..*s].iter().product::<f64>(),
            )),
            _ => Err(Error::UnsupportedOracle(format!(
                "no twist oracle for {}",
                spec.name()
            ))),
        },
        OracleQuery::Rho => Err(Error::UnsupportedOracle(format!(
            "no closed-form transverse fixed point for {} at eps = {eps}",
            spec.name()
        ))),
    }
}

fn action(x: &Vector, n: usize, j: usize) -> f64 {
    0.5 * (x[j] * x[j] + x[n + j] * x[n + j])
}

struct ActionOscillators {
    omega: Vec<f64>,
    a: Vec<f64>,
    s: usize,
}

impl HamiltonianSystem for ActionOscillators {
    fn dof(&self) -> usize {
        self.omega.len()
    }

    fn integral_count(&self) -> usize {
        self.s
    }

    fn value(&self, i: usize, x: &Vector, eps: f64) -> f64 {
        let n = self.dof();
        if i > 0 {
            return action(x, n, i);
        }
        (0..n)
            .map(|j| {
                let ij = action(x, n, j);
                self.omega[j] * ij + eps * self.a[j] * ij * ij
            })
            .sum()
    }

    fn gradient(&self, i: usize, x: &Vector, eps: f64) -> Vector {
        let n = self.dof();
        let mut g = Vector::zeros(2 * n);
        for j in 0..n {
            let w = if i > 0 {
                if j == i {
                    1.0
                } else {
                    0.0
                }
            } else {
                self.omega[j] + 2.0 * eps * self.a[j] * action(x, n, j)
            };
            g[j] = w * x[j];
            g[n + j] = w * x[n + j];
        }
        g
    }

    fn hessian(&self, i: usize, x: &Vector, eps: f64) -> Option<Mat> {
        let n = self.dof();
        let mut h = Mat::zeros(2 * n, 2 * n);
        if i > 0 {
            h[(i, i)] = 1.0;
            h[(n + i, n + i)] = 1.0;
            return Some(h);
        }
        for j in 0..n {
            let w = self.omega[j] + 2.0 * eps * self.a[j] * action(x, n, j);
            let c = 2.0 * eps * self.a[j];
            let (q, p) = (x[j], x[n + j]);
            h[(j, j)] = w + c * q * q;
            h[(n + j, n + j)] = w + c * p * p;
            h[(j, n + j)] = c * q * p;
            h[(n + j, j)] = c * q * p;
        }
        Some(h)
    }
}

struct Lyapunov {
    omega1: f64,
    nu: f64,
}

impl HamiltonianSystem for Lyapunov {
    fn dof(&self) -> usize {
        2
    }

    fn integral_count(&self) -> usize {
        1
    }

    fn value(&self, _i: usize, x: &Vector, eps: f64) -> f64 {
        self.omega1 * action(x, 2, 0) + self.nu * action(x, 2, 1) + eps * x[0] * x[0] * x[1]
    }

    fn gradient(&self, _i: usize, x: &Vector, eps: f64) -> Vector {
        Vector::from_vec(vec![
            self.omega1 * x[0] + 2.0 * eps * x[0] * x[1],
            self.nu * x[1] + eps * x[0] * x[0],
            self.omega1 * x[2],
            self.nu * x[3],
        ])
    }

    fn hessian(&self, _i: usize, x: &Vector, eps: f64) -> Option<Mat> {
        let mut h = Mat::zeros(4, 4);
        h[(0, 0)] = self.omega1 + 2.0 * eps * x[1];
        h[(0, 1)] = 2.0 * eps * x[0];
        h[(1, 0)] = 2.0 * eps * x[0];
        h[(1, 1)] = self.nu;
        h[(2, 2)] = self.omega1;
        h[(3, 3)] = self.nu;
        Some(h)
    }
}

struct IsotropicMomentum {
    omega: f64,
    nu: f64,
}

impl HamiltonianSystem for IsotropicMomentum {
    fn dof(&self) -> usize {
        3
    }

    fn integral_count(&self) -> usize {
        2
    }

    fn value(&self, i: usize, x: &Vector, eps: f64) -> f64 {
        if i == 1 {
            return x[0] * x[4] - x[1] * x[3];
        }
        self.omega * (action(x, 3, 0) + action(x, 3, 1))
            + self.nu * action(x, 3, 2)
            + eps * (x[0] * x[0] + x[1] * x[1]) * x[2]
    }

    fn gradient(&self, i: usize, x: &Vector, eps: f64) -> Vector {
        if i == 1 {
            return Vector::from_vec(vec![x[4], -x[3], 0.0, -x[1], x[0], 0.0]);
        }
        Vector::from_vec(vec![
            self.omega * x[0] + 2.0 * eps * x[0] * x[2],
            self.omega * x[1] + 2.0 * eps * x[1] * x[2],
            self.nu * x[2] + eps * (x[0] * x[0] + x[1] * x[1]),
            self.omega * x[3],
            self.omega * x[4],
            self.nu * x[5],
        ])
    }

    fn hessian(&self, i: usize, x: &Vector, eps: f64) -> Option<Mat> {
        let mut h = Mat::zeros(6, 6);
        if i == 1 {
            h[(0, 4)] = 1.0;
            h[(4, 0)] = 1.0;
            h[(1, 3)] = -1.0;
            h[(3, 1)] = -1.0;
            return Some(h);
        }
        h[(0, 0)] = self.omega + 2.0 * eps * x[2];
        h[(1, 1)] = self.omega + 2.0 * eps * x[2];
        h[(0, 2)] = 2.0 * eps * x[0];
        h[(2, 0)] = 2.0 * eps * x[0];
        h[(1, 2)] = 2.0 * eps * x[1];
        h[(2, 1)] = 2.0 * eps * x[1];
        h[(2, 2)] = self.nu;
        h[(3, 3)] = self.omega;
        h[(4, 4)] = self.omega;
        h[(5, 5)] = self.nu;
        Some(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn system_a_data() {
        let m = make_system(&ModelSpec::system_a()).unwrap();
        assert_abs_diff_eq!(m.seed.beta0[0], 1.0 + 2f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(m.seed.beta0[1], 1.0, epsilon = 1e-14);
        assert_eq!(
            m.frequencies.b,
            Mat::from_row_slice(2, 1, &[3f64.sqrt(), 0.0])
        );
        let q = compute_q(&m.frequencies, &[1, 0]).unwrap();
        assert_abs_diff_eq!(q[0], 3f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn system_c_lattice_guess() {
        let m = make_system(&ModelSpec::system_c()).unwrap();
        let c = m.seed.period_guess(&[1, 0]);
        assert_abs_diff_eq!(c[0], PI, epsilon = 1e-14);
        assert_abs_diff_eq!(c[1], -PI, epsilon = 1e-14);
    }

    #[test]
    fn invalid_specs() {
        let bad = [
            ModelSpec::IsotropicMomentum {
                omega: 1.0,
                nu: 1.0,
                a: 0.5,
                b: 0.5,
            },
            ModelSpec::IsotropicMomentum {
                omega: 0.0,
                nu: 1.0,
                a: 1.0,
                b: 0.5,
            },
            ModelSpec::Lyapunov {
                omega1: 0.0,
                nu: 1.0,
                action: 1.0,
            },
            ModelSpec::ActionOscillators {
                omega: vec![1.0, 2.0],
                a: vec![1.0],
                s: 1,
            },
            ModelSpec::ActionOscillators {
                omega: vec![1.0, 2.0],
                a: vec![1.0, 1.0],
                s: 3,
            },
        ];
        for spec in bad {
            assert!(
                matches!(make_system(&spec), Err(Error::Spec(_))),
                "{spec:?}"
            );
        }
    }

    #[test]
    fn frequency_oracle() {
        let spec = ModelSpec::ActionOscillators {
            omega: vec![1.0, 2f64.sqrt()],
            a: vec![1.0, 1.0],
            s: 2,
        };
        let beta = Vector::from_vec(vec![1.0 + 0.1 + 2f64.sqrt() + 0.1, 1.0]);
        let OracleValue::Vector(f) =
            oracle(&spec, OracleQuery::Frequencies, &beta, 0.1, &[1, 0]).unwrap()
        else {
            panic!("expected a vector");
        };
        assert_abs_diff_eq!(f[0], 1.2, epsilon = 1e-12);
        assert_abs_diff_eq!(f[1], 2f64.sqrt() + 0.2, epsilon = 1e-12);
    }

    #[test]
    fn unsupported_oracles() {
        let beta = Vector::from_vec(vec![1.0]);
        let spec = ModelSpec::system_b();
        assert!(matches!(
            oracle(&spec, OracleQuery::Multipliers, &beta, 0.05, &[1]),
            Err(Error::UnsupportedOracle(_))
        ));
        assert!(matches!(
            oracle(&spec, OracleQuery::Rho, &beta, 0.05, &[1]),
            Err(Error::UnsupportedOracle(_))
        ));
        assert!(matches!(
            oracle(&spec, OracleQuery::TwistDet, &beta, 0.0, &[1]),
            Err(Error::UnsupportedOracle(_))
        ));
        assert_eq!(
            oracle(&spec, OracleQuery::Rho, &beta, 0.0, &[1]).unwrap(),
            OracleValue::Vector(Vector::zeros(2))
        );
    }
}

//! Flows of the integrals, their compositions and period vectors.

mod dop853;
mod period;

pub use dop853::{integrate, Integration, OdeTolerances};
pub use period::{PeriodLattice, PeriodOptions, PeriodVector};

use crate::error::{Error, Result};
use crate::hamiltonian::{apply_j_mat, System};
use crate::numerics::{max_abs, Mat, Vector};

#[derive(Debug, Clone)]
pub struct FlowResult {
    pub endpoint: Vector,
    /// Derivative of the time-`t` map at the initial point, when requested.
    pub jacobian: Option<Mat>,
    pub steps: usize,
    /// Largest change of any integral between the initial and final point.
    pub max_energy_drift: f64,
}

/// The commuting flows `g_i^t` of a system at a fixed parameter value.
#[derive(Debug, Clone)]
pub struct Flow<'a> {
    system: &'a System,
    eps: f64,
    tol: OdeTolerances,
    period: PeriodOptions,
}

impl<'a> Flow<'a> {
    pub fn new(system: &'a System, eps: f64) -> Self {
        Self {
            system,
            eps,
            tol: OdeTolerances::default(),
            period: PeriodOptions::default(),
        }
    }

    pub fn with_tolerances(mut self, tol: OdeTolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_period_options(mut self, period: PeriodOptions) -> Self {
        self.period = period;
        self
    }

    pub fn system(&self) -> &'a System {
        self.system
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn tolerances(&self) -> &OdeTolerances {
        &self.tol
    }

    pub fn period_options(&self) -> &PeriodOptions {
        &self.period
    }

    /// `g_i^t(x0)`, optionally with its derivative from the variational
    /// equations `V' = J Hess F_i V`, `V(0) = I`.
    pub fn evolve(&self, i: usize, x0: &Vector, t: f64, variational: bool) -> Result<FlowResult> {
        self.system.check_dim(x0)?;
        if i >= self.system.s() {
            return Err(Error::IndexOutOfRange {
                index: i,
                count: self.system.s(),
            });
        }
        let (endpoint, jacobian, steps) = self.evolve_raw(i, x0, t, variational)?;
        let drift = self.drift(x0, &endpoint);
        Ok(FlowResult {
            endpoint,
            jacobian,
            steps,
            max_energy_drift: drift,
        })
    }

    fn evolve_raw(
        &self,
        i: usize,
        x0: &Vector,
        t: f64,
        variational: bool,
    ) -> Result<(Vector, Option<Mat>, usize)> {
        let d = x0.len();
        let sys = self.system;
        let eps = self.eps;
        if !variational {
            let out = integrate(|x| sys.field_unchecked(i, x, eps), x0, t, &self.tol)?;
            return Ok((out.y, None, out.steps));
        }
        let mut y0 = Vector::zeros(d + d * d);
        y0.rows_mut(0, d).copy_from(x0);
        for k in 0..d {
            y0[d + k * d + k] = 1.0;
        }
        let rhs = |y: &Vector| {
            let x = y.rows(0, d).into_owned();
            let v = Mat::from_column_slice(d, d, &y.as_slice()[d..]);
            let jh = apply_j_mat(&sys.hessian_unchecked(i, &x, eps));
            let mut out = Vector::zeros(d + d * d);
            out.rows_mut(0, d)
                .copy_from(&sys.field_unchecked(i, &x, eps));
            out.rows_mut(d, d * d).copy_from_slice((jh * v).as_slice());
            out
        };
        let out = integrate(rhs, &y0, t, &self.tol)?;
        let x = out.y.rows(0, d).into_owned();
        let v = Mat::from_column_slice(d, d, &out.y.as_slice()[d..]);
        Ok((x, Some(v), out.steps))
    }

    /// `g^tau = g_1^{tau_1} o ... o g_s^{tau_s}`; the flows commute, the
    /// rightmost factor is applied first.
    pub fn composed(&self, x0: &Vector, tau: &Vector, variational: bool) -> Result<FlowResult> {
        self.system.check_dim(x0)?;
        if tau.len() != self.system.s() {
            return Err(Error::Dimension(format!(
                "time vector of length {} for {} integrals",
                tau.len(),
                self.system.s()
            )));
        }
        let d = x0.len();
        let mut x = x0.clone();
        let mut jac = variational.then(|| Mat::identity(d, d));
        let mut steps = 0;
        for i in (0..tau.len()).rev() {
            if tau[i] == 0.0 {
                continue;
            }
            let (xe, ve, st) = self.evolve_raw(i, &x, tau[i], variational)?;
            x = xe;
            steps += st;
            if let (Some(total), Some(v)) = (jac.as_mut(), ve) {
                *total = v * &*total;
            }
        }
        let drift = self.drift(x0, &x);
        Ok(FlowResult {
            endpoint: x,
            jacobian: jac,
            steps,
            max_energy_drift: drift,
        })
    }

    fn drift(&self, a: &Vector, b: &Vector) -> f64 {
        max_abs(&(self.system.values(b, self.eps) - self.system.values(a, self.eps)))
    }
}

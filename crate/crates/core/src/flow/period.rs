use std::f64::consts::PI;

use serde::Serialize;

use super::Flow;
use crate::error::{Error, Result};
use crate::numerics::{self, max_abs, serde_mat, Mat, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodOptions {
    /// Sup-norm tolerance on `g^c(m) - m`.
    pub tol: f64,
    pub max_iter: usize,
    /// Fields at the base point with smallest singular value below
    /// `rank_tol * largest` are treated as dependent.
    pub rank_tol: f64,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 50,
            rank_tol: 1e-10,
        }
    }
}

/// A time vector `c` with `g^c(m) = m` representing the cycle `alpha`.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodVector {
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub c: Vector,
    pub alpha: Vec<i64>,
    pub residual: f64,
    pub iterations: usize,
}

impl Flow<'_> {
    /// Refines `guess` to a period vector through `m` by Gauss-Newton on
    /// `g^c(m) - m`, whose Jacobian in `c` is `[X_1 .. X_s]` at `g^c(m)`.
    pub fn find_period_vector(
        &self,
        m: &Vector,
        alpha: &[i64],
        guess: &Vector,
    ) -> Result<PeriodVector> {
        let sys = self.system();
        sys.check_dim(m)?;
        let s = sys.s();
        if alpha.len() != s || guess.len() != s {
            return Err(Error::Dimension(format!(
                "cycle of length {} and guess of length {} for {s} integrals",
                alpha.len(),
                guess.len()
            )));
        }
        self.check_rank(m)?;
        let opts = *self.period_options();

        let residual_at = |c: &Vector| -> Result<(Vector, Vector)> {
            let end = self.composed(m, c, false)?.endpoint;
            let r = &end - m;
            Ok((end, r))
        };
        let mut c = guess.clone();
        let (mut end, mut r) = residual_at(&c)?;
        let mut norm = max_abs(&r);
        for iteration in 0..=opts.max_iter {
            if norm < opts.tol {
                // One extra step, kept only if it lowers the residual.
                if let Ok(step) = self.gauss_newton_step(&end, &r) {
                    let c2 = &c - step;
                    if let Ok((_, r2)) = residual_at(&c2) {
                        let n2 = max_abs(&r2);
                        if n2 < norm {
                            c = c2;
                            norm = n2;
                        }
                    }
                }
                return Ok(PeriodVector {
                    c,
                    alpha: alpha.to_vec(),
                    residual: norm,
                    iterations: iteration,
                });
            }
            if iteration == opts.max_iter {
                break;
            }
            let step = self.gauss_newton_step(&end, &r)?;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..12 {
                let trial = &c - &step * lambda;
                if let Ok((e2, r2)) = residual_at(&trial) {
                    let n2 = max_abs(&r2);
                    if n2 < norm {
                        c = trial;
                        end = e2;
                        r = r2;
                        norm = n2;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Err(Error::NoConvergence {
            iterations: opts.max_iter,
            residual: norm,
        })
    }

    fn check_rank(&self, m: &Vector) -> Result<()> {
        let fields = self.system().vector_fields(m, self.eps());
        let sv = numerics::singular_values(&fields);
        let largest = sv.first().copied().unwrap_or(0.0);
        let smallest = sv.last().copied().unwrap_or(0.0);
        if !(largest > 0.0) || smallest <= self.period_options().rank_tol * largest {
            return Err(Error::DegenerateTorus(format!(
                "vector fields at the base point have singular values {sv:?}"
            )));
        }
        Ok(())
    }

    fn gauss_newton_step(&self, end: &Vector, r: &Vector) -> Result<Vector> {
        let jac = self.system().vector_fields(end, self.eps());
        let svd = jac.svd(true, true);
        let largest = svd.singular_values.max();
        let smallest = svd.singular_values.min();
        if !(largest > 0.0) || smallest <= self.period_options().rank_tol * largest {
            return Err(Error::DegenerateTorus(
                "vector fields became dependent along the orbit".into(),
            ));
        }
        svd.solve(r, 0.0)
            .map_err(|e| Error::NumericFailure(e.to_string()))
    }

    /// Period vectors for the basis cycles `e_1 .. e_s`, refined from the
    /// columns of `guess`.
    pub fn period_lattice(&self, m: &Vector, guess: &Mat) -> Result<PeriodLattice> {
        let s = self.system().s();
        if guess.shape() != (s, s) {
            return Err(Error::Dimension(format!(
                "lattice guess has shape {:?}",
                guess.shape()
            )));
        }
        let mut basis = Mat::zeros(s, s);
        let mut residual = 0.0_f64;
        for j in 0..s {
            let mut alpha = vec![0; s];
            alpha[j] = 1;
            let pv = self.find_period_vector(m, &alpha, &guess.column(j).into_owned())?;
            residual = residual.max(pv.residual);
            basis.set_column(j, &pv.c);
        }
        let det = numerics::det(&basis)?;
        if !(det.abs() > 1e-12 * (1.0 + basis.amax()).powi(s as i32)) {
            return Err(Error::DegenerateTorus(format!(
                "period vectors are dependent (det {det:e})"
            )));
        }
        Ok(PeriodLattice { basis, residual })
    }
}

/// Basis of the period lattice of a torus: column `j` closes the cycle `e_j`.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodLattice {
    #[serde(serialize_with = "serde_mat::serialize")]
    pub basis: Mat,
    pub residual: f64,
}

impl PeriodLattice {
    /// Period vector of the cycle `alpha`: `L alpha`.
    pub fn period(&self, alpha: &[i64]) -> Vector {
        let a = Vector::from_iterator(alpha.len(), alpha.iter().map(|&k| k as f64));
        &self.basis * a
    }

    /// `A = 2 pi L^{-T}`: row `kappa` holds the frequencies of `X_kappa`
    /// on the torus.
    pub fn frequency_matrix(&self) -> Result<Mat> {
        Ok(numerics::inverse(&self.basis.transpose())? * (2.0 * PI))
    }

    pub fn frequencies(&self, kappa: usize) -> Result<Vector> {
        let a = self.frequency_matrix()?;
        if kappa >= a.nrows() {
            return Err(Error::IndexOutOfRange {
                index: kappa,
                count: a.nrows(),
            });
        }
        Ok(a.row(kappa).transpose())
    }
}

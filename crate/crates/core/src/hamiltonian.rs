//! System interface and the involution/independence hypotheses.
//!
//! Coordinates are always ordered `x = (q_1..q_n, p_1..p_n)` and the
//! symplectic matrix is `J = [[0, I], [-I, 0]]`, so that the Hamiltonian
//! vector field of `F` is `X_F = J grad F`, i.e. `dq/dt = dF/dp` and
//! `dp/dt = -dF/dq`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{self, Mat, Vector};

/// `s` smooth functions on a domain of `R^{2n}`, depending on a parameter `eps`.
///
/// Integral indices are zero based. Implementations only need values and
/// gradients; Hessians are taken by central differences of the gradient
/// unless [`HamiltonianSystem::hessian`] returns `Some`.
pub trait HamiltonianSystem: Send + Sync {
    /// Degrees of freedom `n`.
    fn dof(&self) -> usize;
    /// Number of integrals `s`, `1 <= s <= n`.
    fn integral_count(&self) -> usize;
    fn value(&self, i: usize, x: &Vector, eps: f64) -> f64;
    fn gradient(&self, i: usize, x: &Vector, eps: f64) -> Vector;
    fn hessian(&self, _i: usize, _x: &Vector, _eps: f64) -> Option<Mat> {
        None
    }
}

/// `J = [[0, I], [-I, 0]]` in dimension `2n`.
pub fn symplectic_j(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = 1.0;
        j[(n + k, k)] = -1.0;
    }
    j
}

/// `J v` without forming `J`.
pub fn apply_j(v: &Vector) -> Vector {
    let n = v.len() / 2;
    Vector::from_fn(2 * n, |r, _| if r < n { v[n + r] } else { -v[r - n] })
}

/// `J m` without forming `J`.
pub fn apply_j_mat(m: &Mat) -> Mat {
    let n = m.nrows() / 2;
    Mat::from_fn(m.nrows(), m.ncols(), |r, c| {
        if r < n {
            m[(n + r, c)]
        } else {
            -m[(r - n, c)]
        }
    })
}

/// Symplectic pairing `u^T J v`.
pub fn symplectic_form(u: &Vector, v: &Vector) -> f64 {
    let n = u.len() / 2;
    (0..n).map(|k| u[k] * v[n + k] - u[n + k] * v[k]).sum()
}

/// A registered, self-tested system. Cheap to clone and safe to share.
#[derive(Clone)]
pub struct System {
    inner: Arc<dyn HamiltonianSystem>,
    n: usize,
    s: usize,
}

impl std::fmt::Debug for System {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("System")
            .field("n", &self.n)
            .field("s", &self.s)
            .finish()
    }
}

impl System {
    /// Validates the dimensions and runs the gradient self-test at every
    /// probe point and parameter value.
    pub fn register<S: HamiltonianSystem + 'static>(
        system: S,
        probes: &[Vector],
        eps_values: &[f64],
    ) -> Result<Self> {
        let n = system.dof();
        let s = system.integral_count();
        if n == 0 || s == 0 || s > n {
            return Err(Error::Spec(format!(
                "need 1 <= s <= n, got n = {n}, s = {s}"
            )));
        }
        let sys = System {
            inner: Arc::new(system),
            n,
            s,
        };
        for x in probes {
            sys.check_dim(x)?;
            for &eps in eps_values {
                sys.self_test_at(x, eps)?;
            }
        }
        Ok(sys)
    }

    fn self_test_at(&self, x: &Vector, eps: f64) -> Result<()> {
        for i in 0..self.s {
            let g = self.inner.gradient(i, x, eps);
            if g.len() != self.dim() {
                return Err(Error::SelfTest(format!(
                    "gradient {i} has length {}",
                    g.len()
                )));
            }
            let mut fd = Vector::zeros(self.dim());
            for k in 0..self.dim() {
                let h = 1e-6 * (1.0 + x[k].abs());
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += h;
                xm[k] -= h;
                fd[k] = (self.inner.value(i, &xp, eps) - self.inner.value(i, &xm, eps))
                    / (xp[k] - xm[k]);
            }
            let scale = 1.0 + numerics::max_abs(&g);
            let err = numerics::max_abs(&(&fd - &g));
            if !(err <= 1e-6 * scale) {
                return Err(Error::SelfTest(format!(
                    "gradient of integral {i} disagrees with finite differences by {err:e}"
                )));
            }
            if let Some(h) = self.inner.hessian(i, x, eps) {
                if h.shape() != (self.dim(), self.dim()) {
                    return Err(Error::SelfTest(format!(
                        "Hessian {i} has shape {:?}",
                        h.shape()
                    )));
                }
                let asym = (&h - h.transpose()).amax();
                if !(asym <= 1e-8 * (1.0 + h.amax())) {
                    return Err(Error::SelfTest(format!(
                        "Hessian {i} is not symmetric ({asym:e})"
                    )));
                }
                let fd = self.fd_hessian(i, x, eps);
                let err = (&fd - &h).amax();
                if !(err <= 1e-5 * (1.0 + h.amax())) {
                    return Err(Error::SelfTest(format!(
                        "Hessian of integral {i} disagrees with finite differences by {err:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    /// Phase-space dimension `2n`.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.s {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                count: self.s,
            })
        }
    }

    pub(crate) fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "point of length {} in phase space of dimension {}",
                x.len(),
                self.dim()
            )))
        }
    }

    pub fn value(&self, i: usize, x: &Vector, eps: f64) -> Result<f64> {
        self.check_index(i)?;
        self.check_dim(x)?;
        Ok(self.inner.value(i, x, eps))
    }

    pub fn gradient(&self, i: usize, x: &Vector, eps: f64) -> Result<Vector> {
        self.check_index(i)?;
        self.check_dim(x)?;
        Ok(self.inner.gradient(i, x, eps))
    }

    pub fn hessian(&self, i: usize, x: &Vector, eps: f64) -> Result<Mat> {
        self.check_index(i)?;
        self.check_dim(x)?;
        Ok(self.hessian_unchecked(i, x, eps))
    }

    /// All integrals at `x`.
    pub fn values(&self, x: &Vector, eps: f64) -> Vector {
        Vector::from_fn(self.s, |i, _| self.inner.value(i, x, eps))
    }

    /// `2n x s` matrix whose columns are the gradients.
    pub fn gradients(&self, x: &Vector, eps: f64) -> Mat {
        let mut g = Mat::zeros(self.dim(), self.s);
        for i in 0..self.s {
            g.set_column(i, &self.inner.gradient(i, x, eps));
        }
        g
    }

    /// `2n x s` matrix whose columns are the Hamiltonian vector fields.
    pub fn vector_fields(&self, x: &Vector, eps: f64) -> Mat {
        apply_j_mat(&self.gradients(x, eps))
    }

    /// `X_i = J grad F_i`.
    pub fn vector_field(&self, i: usize, x: &Vector, eps: f64) -> Result<Vector> {
        Ok(apply_j(&self.gradient(i, x, eps)?))
    }

    pub(crate) fn field_unchecked(&self, i: usize, x: &Vector, eps: f64) -> Vector {
        apply_j(&self.inner.gradient(i, x, eps))
    }

    pub(crate) fn hessian_unchecked(&self, i: usize, x: &Vector, eps: f64) -> Mat {
        self.inner
            .hessian(i, x, eps)
            .unwrap_or_else(|| self.fd_hessian(i, x, eps))
    }

    fn fd_hessian(&self, i: usize, x: &Vector, eps: f64) -> Mat {
        let d = self.dim();
        let mut h = Mat::zeros(d, d);
        for k in 0..d {
            let step = 1e-5 * (1.0 + x[k].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += step;
            xm[k] -= step;
            let col = (self.inner.gradient(i, &xp, eps) - self.inner.gradient(i, &xm, eps))
                / (xp[k] - xm[k]);
            h.set_column(k, &col);
        }
        (&h + h.transpose()) * 0.5
    }

    /// `{F_i, F_j} = grad F_i^T J grad F_j`.
    pub fn poisson_bracket(&self, i: usize, j: usize, x: &Vector, eps: f64) -> Result<f64> {
        let gi = self.gradient(i, x, eps)?;
        let gj = self.gradient(j, x, eps)?;
        Ok(symplectic_form(&gi, &gj))
    }

    /// Sampling-based test of involution and independence.
    pub fn check_hypotheses(
        &self,
        samples: &[Vector],
        eps: f64,
        tol: f64,
    ) -> Result<HypothesisReport> {
        if samples.is_empty() {
            return Err(Error::Dimension("no sample points".into()));
        }
        let mut max_bracket = 0.0_f64;
        let mut worst_pair = None;
        let mut min_sv = f64::INFINITY;
        for x in samples {
            self.check_dim(x)?;
            let g = self.gradients(x, eps);
            for i in 0..self.s {
                for j in i + 1..self.s {
                    let b =
                        symplectic_form(&g.column(i).into_owned(), &g.column(j).into_owned()).abs();
                    if b > max_bracket || worst_pair.is_none() {
                        max_bracket = max_bracket.max(b);
                        worst_pair = Some((i, j));
                    }
                }
            }
            let sv = numerics::singular_values(&g);
            min_sv = min_sv.min(sv.last().copied().unwrap_or(0.0));
        }
        let involution = max_bracket < tol;
        let independence = min_sv > tol;
        Ok(HypothesisReport {
            samples: samples.len(),
            eps,
            tol,
            max_bracket,
            worst_pair,
            min_singular_value: min_sv,
            involution,
            independence,
            pass: involution && independence,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub samples: usize,
    pub eps: f64,
    pub tol: f64,
    /// Largest `|{F_i, F_j}|` over samples and pairs.
    pub max_bracket: f64,
    pub worst_pair: Option<(usize, usize)>,
    /// Smallest singular value of the `2n x s` gradient matrix over samples.
    pub min_singular_value: f64,
    pub involution: bool,
    pub independence: bool,
    pub pass: bool,
}

/// Neighbourhood sampling parameters; the neighbourhood of the torus is
/// never quantified, so radius and count are knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingConfig {
    pub count: usize,
    pub radius: f64,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        Self {
            count: 100,
            radius: 0.1,
            seed: 0,
        }
    }
}

/// `count` points, each a center (taken round robin) plus a uniform offset in
/// the sup-norm ball of the configured radius.
pub fn sample_neighbourhood(centers: &[Vector], cfg: &SamplingConfig) -> Vec<Vector> {
    if centers.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.count)
        .map(|k| {
            let c = &centers[k % centers.len()];
            Vector::from_fn(c.len(), |r, _| {
                c[r] + cfg.radius * rng.random_range(-1.0..=1.0)
            })
        })
        .collect()
}

//! Nondegeneracy criteria for reducible tori.
//!
//! Row convention: `A[(i, j)]` is the frequency of the angle `j` under the
//! flow of the integral `i`, and `B[(i, j)]` the frequency of the transverse
//! oscillator `j` under the same flow. With `P = (A^T)^{-1}` the transverse
//! rotation numbers of the cycle `alpha` are `Q(alpha) = B^T P alpha`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{self, serde_mat, Mat, Vector};

pub const DEFAULT_TOL_INT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyData {
    #[serde(serialize_with = "serde_mat::serialize")]
    pub a: Mat,
    #[serde(serialize_with = "serde_mat::serialize")]
    pub b: Mat,
}

impl FrequencyData {
    pub fn new(a: Mat, b: Mat) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "A must be square and nonempty, got {:?}",
                a.shape()
            )));
        }
        if b.nrows() != a.nrows() {
            return Err(Error::Dimension(format!(
                "B has {} rows, A has {}",
                b.nrows(),
                a.nrows()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn s(&self) -> usize {
        self.a.nrows()
    }

    /// Number of transverse oscillators `r = n - s`.
    pub fn r(&self) -> usize {
        self.b.ncols()
    }

    fn det_a(&self) -> Result<f64> {
        let det = numerics::det(&self.a)?;
        let norm = self.a.norm();
        if !(det.abs() > 1e-12 * norm) {
            return Err(Error::SingularFrequencyMatrix { det });
        }
        Ok(det)
    }

    /// `Omega(k; j)`: `A` with its column `k` replaced by column `j` of `B`.
    pub fn omega(&self, k: usize, j: usize) -> Mat {
        let mut m = self.a.clone();
        m.set_column(k, &self.b.column(j));
        m
    }

    fn check_alpha(&self, alpha: &[i64]) -> Result<Vector> {
        if alpha.len() != self.s() {
            return Err(Error::Dimension(format!(
                "cycle of length {} for s = {}",
                alpha.len(),
                self.s()
            )));
        }
        Ok(Vector::from_iterator(
            alpha.len(),
            alpha.iter().map(|&k| k as f64),
        ))
    }
}

/// Distance from `x` to the nearest integer.
pub fn integer_distance(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// `Q(alpha) = B^T (A^T)^{-1} alpha`.
pub fn compute_q(fd: &FrequencyData, alpha: &[i64]) -> Result<Vector> {
    let a = fd.check_alpha(alpha)?;
    fd.det_a()?;
    let p_alpha = numerics::solve(&fd.a.transpose(), &a)?;
    Ok(fd.b.transpose() * p_alpha)
}

/// Nondegeneracy read off `Q` directly: every `Q_j` farther than `tol_int`
/// from the integers.
pub fn q_criterion(fd: &FrequencyData, alpha: &[i64], tol_int: f64) -> Result<bool> {
    Ok(compute_q(fd, alpha)?
        .iter()
        .all(|&q| integer_distance(q) > tol_int))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub alpha: Vec<i64>,
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub q: Vector,
    /// `omega_dets[(j, k)] = |Omega(k; j)|`, one row per transverse oscillator.
    #[serde(serialize_with = "serde_mat::serialize")]
    pub omega_dets: Mat,
    /// `S_j = sum_k alpha_k |Omega(k; j)|`.
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub s_values: Vector,
    pub det_a: f64,
    pub tol_int: f64,
    pub nondegenerate: bool,
    /// `min_j` distance from `S_j / |A|` to the integers.
    pub margin: f64,
}

/// Tests `sum_k alpha_k |Omega(k; j)| != m |A|` for all integers `m` and all
/// `j`, and checks the result against `Q(alpha)` through the cofactor
/// identity `S_j = Q_j |A|`.
pub fn determinant_criterion(
    fd: &FrequencyData,
    alpha: &[i64],
    tol_int: f64,
) -> Result<CriterionResult> {
    let av = fd.check_alpha(alpha)?;
    let det_a = fd.det_a()?;
    let q = compute_q(fd, alpha)?;
    let (s, r) = (fd.s(), fd.r());
    let mut omega_dets = Mat::zeros(r, s);
    for j in 0..r {
        for k in 0..s {
            omega_dets[(j, k)] = numerics::det(&fd.omega(k, j))?;
        }
    }
    let s_values = &omega_dets * &av;
    let mut margin = f64::INFINITY;
    for j in 0..r {
        let scale = 1.0
            + q[j].abs() * det_a.abs()
            + (0..s)
                .map(|k| (av[k] * omega_dets[(j, k)]).abs())
                .sum::<f64>();
        let defect = (s_values[j] - q[j] * det_a).abs();
        if !(defect <= 1e-9 * scale) {
            return Err(Error::NumericFailure(format!(
                "cofactor identity violated for j = {j}: |S_j - Q_j |A|| = {defect:e}"
            )));
        }
        margin = margin.min(integer_distance(s_values[j] / det_a));
    }
    Ok(CriterionResult {
        alpha: alpha.to_vec(),
        q,
        omega_dets,
        s_values,
        det_a,
        tol_int,
        nondegenerate: margin > tol_int,
        margin,
    })
}

/// Cycles with `1 <= |alpha|_inf <= max_norm` in search order: by sup norm,
/// then by `l1` norm, then lexicographically descending, so that positive
/// unit cycles come first.
pub fn alpha_candidates(s: usize, max_norm: u32) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let k = max_norm as i64;
    for shell in 1..=k {
        let mut shell_list = Vec::new();
        let mut cur = vec![-shell; s];
        loop {
            if cur.iter().map(|v| v.abs()).max() == Some(shell) {
                shell_list.push(cur.clone());
            }
            let mut pos = 0;
            loop {
                if pos == s {
                    break;
                }
                if cur[pos] < shell {
                    cur[pos] += 1;
                    break;
                }
                cur[pos] = -shell;
                pos += 1;
            }
            if pos == s {
                break;
            }
        }
        shell_list.sort_by(|a, b| {
            let la: i64 = a.iter().map(|v| v.abs()).sum();
            let lb: i64 = b.iter().map(|v| v.abs()).sum();
            la.cmp(&lb).then_with(|| b.cmp(a))
        });
        out.extend(shell_list);
    }
    out
}

/// First nondegenerate cycle in the order of [`alpha_candidates`].
pub fn search_alpha(
    fd: &FrequencyData,
    max_norm: u32,
    tol_int: f64,
) -> Result<Option<CriterionResult>> {
    fd.det_a()?;
    for alpha in alpha_candidates(fd.s(), max_norm) {
        let res = determinant_criterion(fd, &alpha, tol_int)?;
        if res.nondegenerate {
            return Ok(Some(res));
        }
    }
    Ok(None)
}

/// For `s = 1` some multiple of the single cycle is nondegenerate iff no
/// ratio `nu_k / omega_1` is an integer.
pub fn lyapunov_specialization(omega1: f64, nus: &[f64], tol_int: f64) -> Result<bool> {
    if omega1 == 0.0 || !omega1.is_finite() {
        return Err(Error::Spec(format!(
            "omega_1 must be nonzero and finite, got {omega1}"
        )));
    }
    Ok(nus.iter().all(|nu| integer_distance(nu / omega1) > tol_int))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn fd(a: &[f64], s: usize, b: &[f64], r: usize) -> FrequencyData {
        FrequencyData::new(Mat::from_row_slice(s, s, a), Mat::from_row_slice(s, r, b)).unwrap()
    }

    fn system_c() -> FrequencyData {
        fd(&[1.0, 1.0, -1.0, 1.0], 2, &[2f64.sqrt(), 0.0], 1)
    }

    #[test]
    fn q_scalar() {
        let q = compute_q(&fd(&[2.0], 1, &[3.0], 1), &[1]).unwrap();
        assert_abs_diff_eq!(q[0], 1.5, epsilon = 1e-15);
    }

    #[test]
    fn q_identity_a() {
        let d = fd(&[1.0, 0.0, 0.0, 1.0], 2, &[0.3, 0.7, -0.2, 0.5], 2);
        let q = compute_q(&d, &[2, -3]).unwrap();
        assert_abs_diff_eq!(q[0], 2.0 * 0.3 - 3.0 * -0.2, epsilon = 1e-14);
        assert_abs_diff_eq!(q[1], 2.0 * 0.7 - 3.0 * 0.5, epsilon = 1e-14);
    }

    #[test]
    fn q_system_c() {
        let q = compute_q(&system_c(), &[1, 0]).unwrap();
        assert_abs_diff_eq!(q[0], 2f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn singular_a_is_rejected() {
        let d = fd(&[1.0, 2.0, 2.0, 4.0], 2, &[1.0, 1.0], 1);
        assert!(matches!(
            compute_q(&d, &[1, 0]),
            Err(Error::SingularFrequencyMatrix { .. })
        ));
        assert!(matches!(
            search_alpha(&d, 2, 1e-8),
            Err(Error::SingularFrequencyMatrix { .. })
        ));
    }

    #[test]
    fn determinant_criterion_system_c() {
        let r = determinant_criterion(&system_c(), &[1, 0], 1e-8).unwrap();
        let nu = 2f64.sqrt();
        assert_abs_diff_eq!(r.det_a, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.omega_dets[(0, 0)], nu, epsilon = 1e-15);
        assert_abs_diff_eq!(r.omega_dets[(0, 1)], nu, epsilon = 1e-15);
        assert_abs_diff_eq!(r.s_values[0], nu, epsilon = 1e-15);
        assert!(r.nondegenerate);
        assert_abs_diff_eq!(r.margin, 1.0 - nu / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_cycle_is_degenerate() {
        let r = determinant_criterion(&system_c(), &[0, 0], 1e-8).unwrap();
        assert!(!r.nondegenerate);
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn no_transverse_directions() {
        let d = FrequencyData::new(Mat::identity(2, 2), Mat::zeros(2, 0)).unwrap();
        let r = determinant_criterion(&d, &[1, 0], 1e-8).unwrap();
        assert!(r.nondegenerate && r.q.is_empty());
    }

    #[test]
    fn search_order() {
        let c = alpha_candidates(2, 1);
        assert_eq!(c.len(), 8);
        assert_eq!(c[0], vec![1, 0]);
        assert_eq!(c[1], vec![0, 1]);
        assert_eq!(
            alpha_candidates(1, 2),
            vec![vec![1], vec![-1], vec![2], vec![-2]]
        );
        assert_eq!(alpha_candidates(3, 2).len(), 5usize.pow(3) - 1);
    }

    #[test]
    fn search_examples() {
        let irr = fd(&[1.0], 1, &[2f64.sqrt()], 1);
        assert_eq!(search_alpha(&irr, 3, 1e-8).unwrap().unwrap().alpha, vec![1]);
        let res = fd(&[1.0], 1, &[2.0], 1);
        assert!(search_alpha(&res, 5, 1e-8).unwrap().is_none());
        let c = search_alpha(&system_c(), 2, 1e-8).unwrap().unwrap();
        assert_eq!(c.alpha, vec![1, 0]);
        assert_abs_diff_eq!(c.margin, 1.0 - 2f64.sqrt() / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn lyapunov_examples() {
        assert!(lyapunov_specialization(1.0, &[2f64.sqrt()], 1e-8).unwrap());
        assert!(!lyapunov_specialization(1.0, &[3.0], 1e-8).unwrap());
        assert!(lyapunov_specialization(2.0, &[3.0], 1e-8).unwrap());
        assert!(matches!(
            lyapunov_specialization(0.0, &[1.0], 1e-8),
            Err(Error::Spec(_))
        ));
    }
}

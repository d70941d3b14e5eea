//! Small dense linear algebra and root finding.
//!
//! Every matrix handled by this crate is at most `2n x 2n` with `n` around
//! ten, so the routines here favour simplicity over asymptotic speed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Largest condition number accepted for a Newton Jacobian.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Sweep limit per eigenvalue in the shifted QR iteration.
const QR_MAX_SWEEPS: usize = 60;

/// Determinant. Closed form for 1x1 and 2x2, LU with partial pivoting above.
pub fn det(m: &Mat) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "determinant of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(match m.nrows() {
        0 => 1.0,
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        _ => m.clone().lu().determinant(),
    })
}

/// Solves `m x = b` by LU; errors when `m` is singular.
pub fn solve(m: &Mat, b: &Vector) -> Result<Vector> {
    if !m.is_square() || m.nrows() != b.len() {
        return Err(Error::Dimension(format!(
            "solve with {}x{} matrix and rhs of length {}",
            m.nrows(),
            m.ncols(),
            b.len()
        )));
    }
    m.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Nondegeneracy("singular linear system".into()))
}

/// Solves `m X = b` for a matrix right-hand side.
pub fn solve_mat(m: &Mat, b: &Mat) -> Result<Mat> {
    if !m.is_square() || m.nrows() != b.nrows() {
        return Err(Error::Dimension(format!(
            "solve with {}x{} matrix and {}x{} rhs",
            m.nrows(),
            m.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    m.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Nondegeneracy("singular linear system".into()))
}

pub fn inverse(m: &Mat) -> Result<Mat> {
    if !m.is_square() {
        return Err(Error::Dimension("inverse of a non-square matrix".into()));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Nondegeneracy("matrix is not invertible".into()))
}

/// One-norm condition number `|m|_1 |m^-1|_1`, infinite when singular.
pub fn condition_estimate(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let norm1 = |a: &Mat| {
        a.column_iter()
            .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    match m.clone().try_inverse() {
        Some(inv) => {
            let c = norm1(m) * norm1(&inv);
            if c.is_finite() {
                c
            } else {
                f64::INFINITY
            }
        }
        None => f64::INFINITY,
    }
}

/// Singular values in decreasing order.
pub fn singular_values(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn max_abs(v: &Vector) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Eigenvalues of a real matrix with multiplicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexSpectrum {
    pub values: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Complex64> {
        self.values.iter()
    }

    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// Number of values inside the open disk of radius `tol` around `z`.
    pub fn count_near(&self, z: Complex64, tol: f64) -> usize {
        self.values.iter().filter(|v| (*v - z).norm() < tol).count()
    }

    /// Multiset distance under greedy minimal-distance pairing: repeatedly
    /// match the closest remaining pair and report the largest matched gap.
    /// Spectra of different sizes are infinitely far apart.
    pub fn distance(&self, other: &ComplexSpectrum) -> f64 {
        multiset_distance(&self.values, &other.values)
    }

    /// Concatenation, used to rebuild a full spectrum from its blocks.
    pub fn union(&self, other: &ComplexSpectrum) -> ComplexSpectrum {
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        ComplexSpectrum { values }
    }
}

pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut left: Vec<Complex64> = a.to_vec();
    let mut right: Vec<Complex64> = b.to_vec();
    let mut worst = 0.0_f64;
    while !left.is_empty() {
        let mut best = (0, 0, f64::INFINITY);
        for (i, x) in left.iter().enumerate() {
            for (j, y) in right.iter().enumerate() {
                let d = (x - y).norm();
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        worst = worst.max(best.2);
        left.swap_remove(best.0);
        right.swap_remove(best.1);
    }
    worst
}

/// All eigenvalues of a real square matrix: Householder reduction to upper
/// Hessenberg form followed by the Francis double-shift QR iteration.
pub fn eigenvalues(m: &Mat) -> Result<ComplexSpectrum> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "eigenvalues of a {}x{} matrix",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericFailure("non-finite matrix entry".into()));
    }
    let n = m.nrows();
    let mut h = m.clone();
    hessenberg_in_place(&mut h);
    let values = hessenberg_qr(&mut h)?;
    debug_assert_eq!(values.len(), n);
    Ok(ComplexSpectrum { values })
}

fn hessenberg_in_place(a: &mut Mat) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let alpha_sq: f64 = (k + 1..n).map(|i| a[(i, k)] * a[(i, k)]).sum();
        let alpha = alpha_sq.sqrt();
        if alpha == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let alpha = if x0 > 0.0 { -alpha } else { alpha };
        let mut v: Vec<f64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm_sq: f64 = v.iter().map(|x| x * x).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        // A <- H A
        for j in 0..n {
            let dot: f64 = (k + 1..n).map(|i| v[i - k - 1] * a[(i, j)]).sum();
            let f = 2.0 * dot / vnorm_sq;
            for i in k + 1..n {
                a[(i, j)] -= f * v[i - k - 1];
            }
        }
        // A <- A H
        for i in 0..n {
            let dot: f64 = (k + 1..n).map(|j| a[(i, j)] * v[j - k - 1]).sum();
            let f = 2.0 * dot / vnorm_sq;
            for j in k + 1..n {
                a[(i, j)] -= f * v[j - k - 1];
            }
        }
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

/// Eigenvalues of an upper Hessenberg matrix (destroyed in the process).
fn hessenberg_qr(h: &mut Mat) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += h[(i, j)].abs();
        }
    }
    // Active block is rows/cols l..=nn (0-based).
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nnu = nn as usize;
            // Look for a single small subdiagonal element.
            let mut l = nnu;
            while l >= 1 {
                let mut s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if h[(l, l - 1)].abs() + s == s {
                    h[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = h[(nnu, nnu)];
            if l == nnu {
                wr[nnu] = x + t;
                wi[nnu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = h[(nnu - 1, nnu - 1)];
            let mut w = h[(nnu, nnu - 1)] * h[(nnu - 1, nnu)];
            if l == nnu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nnu - 1] = x + z;
                    wr[nnu] = x + z;
                    if z != 0.0 {
                        wr[nnu] = x - w / z;
                    }
                    wi[nnu - 1] = 0.0;
                    wi[nnu] = 0.0;
                } else {
                    wr[nnu - 1] = x + p;
                    wr[nnu] = x + p;
                    wi[nnu - 1] = -z;
                    wi[nnu] = z;
                }
                nn -= 2;
                break;
            }
            if its == QR_MAX_SWEEPS {
                return Err(Error::NumericFailure(format!(
                    "QR iteration did not converge after {QR_MAX_SWEEPS} sweeps"
                )));
            }
            if its > 0 && its % 10 == 0 {
                // Exceptional shift.
                t += x;
                for i in 0..=nnu {
                    h[(i, i)] -= x;
                }
                let s = h[(nnu, nnu - 1)].abs() + h[(nnu - 1, nnu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            // Look for two consecutive small subdiagonal elements.
            let mut m = nnu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = h[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / h[(m + 1, m)] + h[(m, m + 1)];
                q = h[(m + 1, m + 1)] - z - rr - ss;
                r = h[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = h[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (h[(m - 1, m - 1)].abs() + z.abs() + h[(m + 1, m + 1)].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nnu {
                h[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    h[(i, i - 3)] = 0.0;
                }
            }
            // Double QR step on rows l..nn and columns m..nn.
            let mut k = m;
            while k < nnu {
                if k != m {
                    p = h[(k, k - 1)];
                    q = h[(k + 1, k - 1)];
                    r = if k != nnu - 1 { h[(k + 2, k - 1)] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            h[(k, k - 1)] = -h[(k, k - 1)];
                        }
                    } else {
                        h[(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nnu {
                        let mut pp = h[(k, j)] + q * h[(k + 1, j)];
                        if k != nnu - 1 {
                            pp += r * h[(k + 2, j)];
                            h[(k + 2, j)] -= pp * z;
                        }
                        h[(k + 1, j)] -= pp * y;
                        h[(k, j)] -= pp * x;
                    }
                    let mmin = if nnu < k + 3 { nnu } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = x * h[(i, k)] + y * h[(i, k + 1)];
                        if k != nnu - 1 {
                            pp += z * h[(i, k + 2)];
                            h[(i, k + 2)] -= pp * r;
                        }
                        h[(i, k + 1)] -= pp * q;
                        h[(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

/// Orthonormal basis of the orthogonal complement of the span of `columns`.
///
/// The inputs are orthonormalised first; the complement is then grown from
/// the standard basis, always taking the coordinate axis with the largest
/// component outside the current span. Gram-Schmidt is applied twice per
/// vector.
pub fn orthonormal_complement(columns: &Mat) -> Result<Mat> {
    let dim = columns.nrows();
    let k = columns.ncols();
    if k > dim {
        return Err(Error::Dimension(format!("{k} columns in dimension {dim}")));
    }
    if k > 0 {
        let sv = singular_values(columns);
        let largest = sv[0];
        let smallest = sv[sv.len() - 1];
        if largest == 0.0 || !(smallest > 1e-10 * largest) {
            return Err(Error::DegenerateFrame(format!(
                "columns are rank deficient (singular values {smallest:e} / {largest:e})"
            )));
        }
    }
    let mut basis: Vec<Vector> = Vec::with_capacity(dim);
    for c in columns.column_iter() {
        let mut v: Vector = c.into_owned();
        reorthogonalize(&mut v, &basis);
        let norm = v.norm();
        v /= norm;
        basis.push(v);
    }
    let mut out = Mat::zeros(dim, dim - k);
    for col in 0..dim - k {
        let mut best: Option<(Vector, f64)> = None;
        for axis in 0..dim {
            let mut v = Vector::zeros(dim);
            v[axis] = 1.0;
            reorthogonalize(&mut v, &basis);
            let norm = v.norm();
            if best.as_ref().is_none_or(|(_, bn)| norm > *bn) {
                best = Some((v, norm));
            }
        }
        let (mut v, norm) = best.expect("dimension is positive");
        v /= norm;
        reorthogonalize(&mut v, &basis);
        v.normalize_mut();
        out.set_column(col, &v);
        basis.push(v);
    }
    Ok(out)
}

fn reorthogonalize(v: &mut Vector, basis: &[Vector]) {
    for _ in 0..2 {
        for b in basis {
            let d = b.dot(v);
            v.axpy(-d, b, 1.0);
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Convergence threshold on the sup-norm of the residual.
    pub tol: f64,
    pub max_iter: usize,
    /// After convergence take one more step from the final Jacobian.
    pub polish: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 50,
            polish: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NewtonSolution {
    pub root: Vector,
    pub residual: Vector,
    /// Jacobian at the returned root.
    pub jacobian: Mat,
    pub iterations: usize,
}

impl NewtonSolution {
    pub fn residual_norm(&self) -> f64 {
        max_abs(&self.residual)
    }
}

/// Forward-difference Jacobian with step `1e-6 (1 + |y_j|)`.
pub fn fd_jacobian<F>(f: &mut F, y: &Vector, f0: &Vector) -> Result<Mat>
where
    F: FnMut(&Vector) -> Result<Vector>,
{
    let d = y.len();
    let mut jac = Mat::zeros(f0.len(), d);
    for j in 0..d {
        let h = 1e-6 * (1.0 + y[j].abs());
        let mut yp = y.clone();
        yp[j] += h;
        let h = yp[j] - y[j];
        let fp = f(&yp)?;
        if fp.len() != f0.len() {
            return Err(Error::Dimension("residual changed length".into()));
        }
        jac.set_column(j, &((fp - f0) / h));
    }
    Ok(jac)
}

/// Newton iteration for a square system with a forward-difference Jacobian.
///
/// The Jacobian at the returned root is checked as well: a root where the
/// Jacobian is singular (condition estimate above [`CONDITION_LIMIT`]) is
/// reported as a nondegeneracy failure, since it cannot be continued.
pub fn newton_solve<F>(
    mut residual: F,
    guess: &Vector,
    opts: &NewtonOptions,
) -> Result<NewtonSolution>
where
    F: FnMut(&Vector) -> Result<Vector>,
{
    newton_solve_with_jacobian(
        |y: &Vector| {
            let r = residual(y)?;
            let j = fd_jacobian(&mut residual, y, &r)?;
            Ok((r, j))
        },
        guess,
        opts,
    )
}

/// Newton iteration where the caller supplies residual and Jacobian together.
pub fn newton_solve_with_jacobian<F>(
    mut eval: F,
    guess: &Vector,
    opts: &NewtonOptions,
) -> Result<NewtonSolution>
where
    F: FnMut(&Vector) -> Result<(Vector, Mat)>,
{
    let mut y = guess.clone();
    let mut polished = false;
    for iteration in 0..=opts.max_iter {
        let (r, jac) = eval(&y)?;
        if r.len() != y.len() || jac.nrows() != r.len() || jac.ncols() != y.len() {
            return Err(Error::Dimension(format!(
                "Newton system with {} unknowns, {} residuals, {}x{} Jacobian",
                y.len(),
                r.len(),
                jac.nrows(),
                jac.ncols()
            )));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericFailure("non-finite Newton residual".into()));
        }
        let cond = condition_estimate(&jac);
        if !(cond <= CONDITION_LIMIT) {
            return Err(Error::Nondegeneracy(format!(
                "Jacobian condition estimate {cond:e} exceeds {CONDITION_LIMIT:e}"
            )));
        }
        let converged = max_abs(&r) < opts.tol;
        if converged && (!opts.polish || polished) {
            return Ok(NewtonSolution {
                root: y,
                residual: r,
                jacobian: jac,
                iterations: iteration,
            });
        }
        if iteration == opts.max_iter {
            return Err(Error::NoConvergence {
                iterations: iteration,
                residual: max_abs(&r),
            });
        }
        let step = solve(&jac, &r)?;
        y -= step;
        if converged {
            polished = true;
        }
    }
    unreachable!("loop returns on its last iteration")
}

/// Serde helpers rendering matrices as arrays of rows.
pub mod serde_mat {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> Result<S::Ok, S::Error> {
        rows(m).serialize(s)
    }

    pub fn serialize_opt<S: Serializer>(m: &Option<Mat>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(rows).serialize(s)
    }

    pub fn serialize_vec<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn serialize_vecs<S: Serializer>(v: &[Vector], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|x| x.as_slice().to_vec())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    fn rows(m: &Mat) -> Vec<Vec<f64>> {
        m.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn det_small_cases() {
        assert_eq!(det(&Mat::identity(3, 3)).unwrap(), 1.0);
        assert_eq!(
            det(&Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0])).unwrap(),
            -2.0
        );
        let m = Mat::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 0.5, 7.0, -1.0]);
        assert_abs_diff_eq!(det(&m).unwrap(), 0.0, epsilon = 1e-14);
        assert!(matches!(det(&Mat::zeros(2, 3)), Err(Error::Dimension(_))));
    }

    #[test]
    fn eigenvalues_of_simple_matrices() {
        let d = Mat::from_diagonal(&Vector::from_vec(vec![2.0, 3.0]));
        let ev = sorted(eigenvalues(&d).unwrap().values);
        assert_abs_diff_eq!(ev[0].re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1].re, 3.0, epsilon = 1e-14);

        let th = PI / 3.0;
        let rot = Mat::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        let spec = eigenvalues(&rot).unwrap();
        let expected = ComplexSpectrum::new(vec![
            Complex64::from_polar(1.0, th),
            Complex64::from_polar(1.0, -th),
        ]);
        assert!(spec.distance(&expected) < 1e-14);

        let id = eigenvalues(&Mat::identity(4, 4)).unwrap();
        assert_eq!(id.count_near(Complex64::new(1.0, 0.0), 1e-14), 4);
    }

    #[test]
    fn eigenvalues_of_companion_matrix() {
        // (x-1)(x-2)(x-3)(x^2+1)
        let coeffs = [-6.0, 11.0, -12.0, 12.0, -6.0]; // c0..c4 of monic degree-5 poly
        let mut c = Mat::zeros(5, 5);
        for i in 1..5 {
            c[(i, i - 1)] = 1.0;
        }
        for i in 0..5 {
            c[(i, 4)] = -coeffs[i];
        }
        let spec = eigenvalues(&c).unwrap();
        let expected = ComplexSpectrum::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ]);
        assert!(spec.distance(&expected) < 1e-9, "{:?}", spec);
    }

    #[test]
    fn eigenvalues_reject_non_square() {
        assert!(matches!(
            eigenvalues(&Mat::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
        assert!(eigenvalues(&Mat::zeros(0, 0)).unwrap().is_empty());
    }

    #[test]
    fn complement_of_coordinate_axes() {
        let mut cols = Mat::zeros(6, 2);
        cols[(0, 0)] = 1.0;
        cols[(1, 1)] = 1.0;
        let comp = orthonormal_complement(&cols).unwrap();
        assert_eq!(comp.ncols(), 4);
        assert_abs_diff_eq!(comp.rows(0, 2).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            (comp.transpose() * &comp - Mat::identity(4, 4)).norm(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn complement_of_full_span_is_empty() {
        let comp = orthonormal_complement(&Mat::identity(4, 4)).unwrap();
        assert_eq!(comp.shape(), (4, 0));
    }

    #[test]
    fn complement_rejects_rank_deficiency() {
        let cols = Mat::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 0.0, 0.0]);
        assert!(matches!(
            orthonormal_complement(&cols),
            Err(Error::DegenerateFrame(_))
        ));
    }

    #[test]
    fn newton_identity_and_sqrt2() {
        let opts = NewtonOptions {
            tol: 1e-12,
            ..Default::default()
        };
        let sol = newton_solve(
            |y: &Vector| Ok(y.clone()),
            &Vector::from_vec(vec![0.3]),
            &opts,
        )
        .unwrap();
        assert_abs_diff_eq!(sol.root[0], 0.0, epsilon = 1e-12);

        let sol = newton_solve(
            |y: &Vector| Ok(Vector::from_vec(vec![y[0] * y[0] - 2.0])),
            &Vector::from_vec(vec![1.0]),
            &opts,
        )
        .unwrap();
        assert_abs_diff_eq!(sol.root[0], 2f64.sqrt(), epsilon = 1e-12);
        assert!(sol.residual_norm() < 1e-12);
        assert_abs_diff_eq!(sol.jacobian[(0, 0)], 2.0 * 2f64.sqrt(), epsilon = 1e-5);
    }

    #[test]
    fn newton_flat_residual_is_degenerate() {
        let r = newton_solve(
            |_: &Vector| Ok(Vector::zeros(1)),
            &Vector::from_vec(vec![0.5]),
            &NewtonOptions::default(),
        );
        assert!(matches!(r, Err(Error::Nondegeneracy(_))));
    }

    #[test]
    fn newton_reports_no_convergence() {
        // x^2 + 1 has no real root.
        let r = newton_solve(
            |y: &Vector| Ok(Vector::from_vec(vec![y[0] * y[0] + 1.0])),
            &Vector::from_vec(vec![0.7]),
            &NewtonOptions {
                tol: 1e-12,
                max_iter: 20,
                polish: false,
            },
        );
        assert!(matches!(
            r,
            Err(Error::NoConvergence { .. }) | Err(Error::Nondegeneracy(_))
        ));
    }

    #[test]
    fn multiset_distance_handles_sizes() {
        let a = [Complex64::new(1.0, 0.0)];
        let b = [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)];
        assert!(multiset_distance(&a, &b).is_infinite());
        assert_eq!(multiset_distance(&b, &b), 0.0);
    }
}

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::Flow;
use crate::hamiltonian::System;
use crate::numerics::{self, max_abs, serde_mat, Mat, NewtonOptions, Vector};

/// Adapted frame at a base point `m` of the torus.
///
/// The section is the affine space `m + span(G, E)`; `W` spans the normals
/// of the section, so `W^T (p - m) = 0` is section membership.
#[derive(Debug, Clone, Serialize)]
pub struct AdaptedChart {
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub base: Vector,
    /// Columns `X_i(m)`.
    #[serde(serialize_with = "serde_mat::serialize")]
    pub t: Mat,
    /// Columns `grad F_i(m)`.
    #[serde(serialize_with = "serde_mat::serialize")]
    pub g: Mat,
    /// Orthonormal basis of `span(T, G)^perp`, `2n x 2(n - s)`.
    #[serde(serialize_with = "serde_mat::serialize")]
    pub e: Mat,
    /// Orthonormal basis of `span(G, E)^perp`, `2n x s`.
    #[serde(serialize_with = "serde_mat::serialize")]
    pub w: Mat,
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub beta0: Vector,
    pub eps: f64,
}

impl AdaptedChart {
    pub fn transverse_dim(&self) -> usize {
        self.e.ncols()
    }

    /// `m + G a + E y`.
    pub fn point(&self, a: &Vector, y: &Vector) -> Vector {
        &self.base + &self.g * a + &self.e * y
    }

    /// Transverse coordinates `E^T (p - m)`.
    pub fn transverse(&self, p: &Vector) -> Vector {
        self.e.transpose() * (p - &self.base)
    }
}

pub fn build_chart(sys: &System, m: &Vector, eps: f64) -> Result<AdaptedChart> {
    sys.check_dim(m)?;
    let s = sys.s();
    let t = sys.vector_fields(m, eps);
    let g = sys.gradients(m, eps);
    let mut tg = Mat::zeros(sys.dim(), 2 * s);
    tg.columns_mut(0, s).copy_from(&t);
    tg.columns_mut(s, s).copy_from(&g);
    let sv = numerics::singular_values(&tg);
    let largest = sv.first().copied().unwrap_or(0.0);
    let smallest = sv.last().copied().unwrap_or(0.0);
    if !(smallest > 1e-8 * largest.max(1.0)) {
        return Err(Error::DegeneratePoint(format!(
            "fields and gradients at the base point are dependent (singular values {sv:?})"
        )));
    }
    let e = numerics::orthonormal_complement(&tg)?;
    let mut ge = Mat::zeros(sys.dim(), s + e.ncols());
    ge.columns_mut(0, s).copy_from(&g);
    ge.columns_mut(s, e.ncols()).copy_from(&e);
    let w = numerics::orthonormal_complement(&ge)?;
    if w.ncols() != s {
        return Err(Error::DegeneratePoint(
            "section normals have the wrong dimension".into(),
        ));
    }
    Ok(AdaptedChart {
        base: m.clone(),
        t,
        g,
        e,
        w,
        beta0: sys.values(m, eps),
        eps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    /// Chain rule through the variational equations of the flows.
    Variational,
    /// Forward differences of the return map, step `1e-6 (1 + |y_j|)`.
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnMapOptions {
    /// Tolerance of the lift and projection solves.
    pub inner_tol: f64,
    /// Section points farther than `max_offset (1 + |m|)` from `m` (sup
    /// norm) are outside the chart.
    pub max_offset: f64,
    pub jacobian: JacobianMode,
}

impl Default for ReturnMapOptions {
    fn default() -> Self {
        Self {
            inner_tol: 1e-11,
            max_offset: 0.5,
            jacobian: JacobianMode::Variational,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReturnMapEval {
    pub y_hat: Vector,
    /// Chart offset `a` of the lift.
    pub lift: Vector,
    /// `m + G a + E y`, on the level set `F = beta`.
    pub section_point: Vector,
    /// `g^c` of the section point.
    pub image: Vector,
    /// Group time removed by the projection.
    pub theta: Vector,
    /// `g^{-theta}` of the image, back on the section.
    pub landing: Vector,
    /// `d y_hat / d y`, when requested.
    pub jacobian: Option<Mat>,
}

fn overflow(stage: &str, e: Error) -> Error {
    match e {
        Error::BlowUp { .. } | Error::Stiffness { .. } => e,
        other => Error::ChartOverflow(format!("{stage} failed: {other}")),
    }
}

/// `(beta, y) -> y_hat`: lift to the level set along `G`, flow by `c`, and
/// slide back to the section along the group orbit.
pub fn return_map(
    flow: &Flow,
    chart: &AdaptedChart,
    c: &Vector,
    beta: &Vector,
    y: &Vector,
    opts: &ReturnMapOptions,
    want_jacobian: bool,
) -> Result<ReturnMapEval> {
    let sys = flow.system();
    let eps = flow.eps();
    let s = sys.s();
    if beta.len() != s || c.len() != s {
        return Err(Error::Dimension(format!(
            "level of length {} and period of length {} for {s} integrals",
            beta.len(),
            c.len()
        )));
    }
    if y.len() != chart.transverse_dim() {
        return Err(Error::Dimension(format!(
            "transverse point of length {}, chart has {} transverse directions",
            y.len(),
            chart.transverse_dim()
        )));
    }
    let newton = NewtonOptions {
        tol: opts.inner_tol,
        max_iter: 30,
        polish: true,
    };
    let radius = opts.max_offset * (1.0 + max_abs(&chart.base));

    let ey = &chart.e * y;
    let lift = numerics::newton_solve_with_jacobian(
        |a: &Vector| {
            let p = &chart.base + &chart.g * a + &ey;
            if max_abs(&(&p - &chart.base)) > 2.0 * radius {
                return Err(Error::ChartOverflow("lift left the chart".into()));
            }
            let r = sys.values(&p, eps) - beta;
            let jac = sys.gradients(&p, eps).transpose() * &chart.g;
            Ok((r, jac))
        },
        &Vector::zeros(s),
        &newton,
    )
    .map_err(|e| overflow("lift", e))?;
    let a = lift.root;
    let p = chart.point(&a, y);
    if max_abs(&(&p - &chart.base)) > radius {
        return Err(Error::ChartOverflow(format!(
            "section point at distance {:e} from the base point",
            max_abs(&(&p - &chart.base))
        )));
    }

    let variational = want_jacobian && opts.jacobian == JacobianMode::Variational;
    let mapped = flow.composed(&p, c, variational)?;
    let image = mapped.endpoint;

    let wt = chart.w.transpose();
    let proj = numerics::newton_solve_with_jacobian(
        |theta: &Vector| {
            let q = flow.composed(&image, &(-theta), false)?.endpoint;
            let r = &wt * (&q - &chart.base);
            let jac = -(&wt * sys.vector_fields(&q, eps));
            Ok((r, jac))
        },
        &Vector::zeros(s),
        &newton,
    )
    .map_err(|e| overflow("projection", e))?;
    let theta = proj.root;
    let back = flow.composed(&image, &(-&theta), variational)?;
    let landing = back.endpoint;
    if max_abs(&(&landing - &chart.base)) > radius {
        return Err(Error::ChartOverflow(
            "return landed outside the chart".into(),
        ));
    }
    let y_hat = chart.transverse(&landing);

    let jacobian = if !want_jacobian {
        None
    } else if variational {
        let grads = sys.gradients(&p, eps);
        let gt_g = grads.transpose() * &chart.g;
        let dp = &chart.e - &chart.g * numerics::solve_mat(&gt_g, &(grads.transpose() * &chart.e))?;
        let m = back.jacobian.expect("variational") * mapped.jacobian.expect("variational");
        let xq = sys.vector_fields(&landing, eps);
        let wx = &wt * &xq;
        let dq = &m * dp;
        let dtheta = numerics::solve_mat(&wx, &(&wt * &dq))?;
        Some(chart.e.transpose() * (dq - xq * dtheta))
    } else {
        let fd_opts = ReturnMapOptions {
            jacobian: JacobianMode::FiniteDifference,
            ..*opts
        };
        let mut f =
            |yy: &Vector| return_map(flow, chart, c, beta, yy, &fd_opts, false).map(|r| r.y_hat);
        Some(numerics::fd_jacobian(&mut f, y, &y_hat)?)
    };

    Ok(ReturnMapEval {
        y_hat,
        lift: a,
        section_point: p,
        image,
        theta,
        landing,
        jacobian,
    })
}

use serde::Serialize;

use super::family::TorusFamily;
use super::torus::TorusRecord;
use crate::error::{Error, Result};
use crate::numerics::{self, serde_mat, Mat, Vector};

/// Determinants at or below this magnitude count as degenerate twist.
pub const DEFAULT_TWIST_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct TwistEntry {
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub beta: Vector,
    pub eps: f64,
    /// `d omega / d beta` by central differences.
    #[serde(serialize_with = "serde_mat::serialize")]
    pub d_beta: Mat,
    /// `d omega / d I = (d omega / d beta) A`, the action Hessian of `F_kappa`.
    #[serde(serialize_with = "serde_mat::serialize")]
    pub hessian: Mat,
    pub det_d_beta: f64,
    pub det: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwistReport {
    pub kappa: usize,
    pub entries: Vec<TwistEntry>,
    pub twist_tol: f64,
    /// Some entry has `|det| <= twist_tol`.
    pub degenerate: bool,
    /// All determinants share one strict sign.
    pub sign_stable: bool,
    pub min_abs_det: f64,
    pub max_abs_det: f64,
}

fn find<'a>(family: &'a TorusFamily, beta: &Vector, eps: f64) -> Option<&'a TorusRecord> {
    let scale = 1.0 + beta.amax();
    family
        .records()
        .find(|r| r.eps == eps && (&r.beta - beta).amax() <= 1e-12 * scale)
}

/// Frequency derivatives at every record whose `2s` axis neighbours at
/// spacing `step` (same `eps`) are also in the family.
///
/// The frequencies of `X_kappa` are differentiated in `beta` and converted
/// to action derivatives with the torus frequency matrix, since
/// `d beta / d I = A`.
pub fn frequency_twist(
    family: &TorusFamily,
    kappa: usize,
    step: &Vector,
    twist_tol: f64,
) -> Result<TwistReport> {
    let mut entries = Vec::new();
    for rec in family.records() {
        let s = rec.beta.len();
        if kappa >= s {
            return Err(Error::IndexOutOfRange {
                index: kappa,
                count: s,
            });
        }
        if step.len() != s || step.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::Geometry(format!(
                "difference steps {step} do not fit s = {s}"
            )));
        }
        let mut d_beta = Mat::zeros(s, s);
        let mut complete = true;
        for k in 0..s {
            let mut up = rec.beta.clone();
            let mut down = rec.beta.clone();
            up[k] += step[k];
            down[k] -= step[k];
            match (find(family, &up, rec.eps), find(family, &down, rec.eps)) {
                (Some(a), Some(b)) => {
                    let fa = a.frequency_matrix.row(kappa).transpose();
                    let fb = b.frequency_matrix.row(kappa).transpose();
                    d_beta.set_column(k, &((fa - fb) / (a.beta[k] - b.beta[k])));
                }
                _ => {
                    complete = false;
                    break;
                }
            }
        }
        if !complete {
            continue;
        }
        let hessian = &d_beta * &rec.frequency_matrix;
        entries.push(TwistEntry {
            beta: rec.beta.clone(),
            eps: rec.eps,
            det_d_beta: numerics::det(&d_beta)?,
            det: numerics::det(&hessian)?,
            d_beta,
            hessian,
        });
    }
    if entries.is_empty() {
        return Err(Error::Geometry(
            "no record has converged neighbours on both sides along every axis".into(),
        ));
    }
    let dets: Vec<f64> = entries.iter().map(|e| e.det).collect();
    let min_abs_det = dets.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min);
    let max_abs_det = dets.iter().map(|d| d.abs()).fold(0.0, f64::max);
    let sign_stable = dets.iter().all(|d| *d > 0.0) || dets.iter().all(|d| *d < 0.0);
    Ok(TwistReport {
        kappa,
        degenerate: min_abs_det <= twist_tol,
        sign_stable,
        min_abs_det,
        max_abs_det,
        twist_tol,
        entries,
    })
}

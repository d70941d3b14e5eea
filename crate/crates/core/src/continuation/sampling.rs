use serde::Serialize;

use super::torus::TorusRecord;
use crate::error::{Error, Result};
use crate::flow::Flow;
use crate::hamiltonian::symplectic_form;
use crate::numerics::{max_abs, serde_mat, Mat, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOptions {
    pub grid_per_cycle: usize,
    /// Time for which each flow `g_i` moves the samples in the invariance test.
    pub flow_time: f64,
    /// Lattice step of the central differences giving tangent vectors.
    pub tangent_step: f64,
    /// Tolerance of the nearest-point refinement on the torus.
    pub refine_tol: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            grid_per_cycle: 32,
            flow_time: 0.1,
            tangent_step: 1e-4,
            refine_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TorusSamples {
    /// Lattice coordinates in `[0, 1)^s`, one per sample.
    #[serde(serialize_with = "serde_mat::serialize_vecs")]
    pub theta: Vec<Vector>,
    #[serde(serialize_with = "serde_mat::serialize_vecs")]
    pub points: Vec<Vector>,
    /// `max_i |F_i - beta_i|` per sample.
    pub f_dev: Vec<f64>,
    pub max_f_dev: f64,
    /// Largest distance from `g^c(x)` to the nearest sample.
    pub period_return_distance: f64,
    /// Largest distance from `g_i^t(x)` to the torus, over samples and `i`.
    pub flow_invariance_distance: f64,
    /// Largest `|u^T J v|` over samples and pairs of lattice tangents.
    pub isotropy_defect: f64,
}

/// Samples `g^{L theta}(p)` on a uniform grid of the lattice coordinates
/// and checks level pinning, invariance and isotropy.
pub fn sample_torus(
    flow: &Flow,
    record: &TorusRecord,
    opts: &SampleOptions,
) -> Result<TorusSamples> {
    let s = flow.system().s();
    let k = opts.grid_per_cycle;
    if k == 0 {
        return Err(Error::Spec("grid_per_cycle must be positive".into()));
    }
    let count = k
        .checked_pow(s as u32)
        .ok_or_else(|| Error::Spec("sample grid too large".into()))?;
    let l = &record.lattice.basis;
    let base = &record.section_point;
    let eps = flow.eps();

    let mut theta = Vec::with_capacity(count);
    let mut points = Vec::with_capacity(count);
    for idx in 0..count {
        let mut rest = idx;
        let th = Vector::from_fn(s, |_, _| {
            let v = (rest % k) as f64 / k as f64;
            rest /= k;
            v
        });
        let x = flow.composed(base, &(l * &th), false)?.endpoint;
        theta.push(th);
        points.push(x);
    }
    let f_dev: Vec<f64> = points
        .iter()
        .map(|x| max_abs(&(flow.system().values(x, eps) - &record.beta)))
        .collect();
    let max_f_dev = f_dev.iter().copied().fold(0.0, f64::max);

    let nearest = |z: &Vector| -> (usize, f64) {
        points
            .iter()
            .enumerate()
            .map(|(i, x)| (i, (x - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("samples are nonempty")
    };

    let mut period_return_distance = 0.0_f64;
    let mut flow_invariance_distance = 0.0_f64;
    let mut isotropy_defect = 0.0_f64;
    let h = opts.tangent_step;
    for x in &points {
        let back = flow.composed(x, &record.period, false)?.endpoint;
        period_return_distance = period_return_distance.max(nearest(&back).1);

        for i in 0..s {
            let z = flow.evolve(i, x, opts.flow_time, false)?.endpoint;
            let (j, _) = nearest(&z);
            let d = distance_to_torus(flow, l, &points[j], &z, opts.refine_tol)?;
            flow_invariance_distance = flow_invariance_distance.max(d);
        }

        let tangents = (0..s)
            .map(|a| {
                let step = l.column(a) * h;
                let plus = flow.composed(x, &step, false)?.endpoint;
                let minus = flow.composed(x, &(-step), false)?.endpoint;
                Ok((plus - minus) / (2.0 * h))
            })
            .collect::<Result<Vec<Vector>>>()?;
        for a in 0..s {
            for b in a + 1..s {
                isotropy_defect =
                    isotropy_defect.max(symplectic_form(&tangents[a], &tangents[b]).abs());
            }
        }
    }

    Ok(TorusSamples {
        theta,
        points,
        f_dev,
        max_f_dev,
        period_return_distance,
        flow_invariance_distance,
        isotropy_defect,
    })
}

/// Distance from `z` to the torus through `x`, by Gauss-Newton on
/// `delta -> |g^{L delta}(x) - z|`.
fn distance_to_torus(flow: &Flow, l: &Mat, x: &Vector, z: &Vector, tol: f64) -> Result<f64> {
    let sys = flow.system();
    let mut delta = Vector::zeros(l.ncols());
    let mut point = x.clone();
    let mut dist = (&point - z).norm();
    for _ in 0..20 {
        let jac = sys.vector_fields(&point, flow.eps()) * l;
        let step = jac
            .svd(true, true)
            .solve(&(z - &point), 1e-14)
            .map_err(|e| Error::NumericFailure(e.to_string()))?;
        let trial = &delta + &step;
        let trial_point = flow.composed(x, &(l * &trial), false)?.endpoint;
        let trial_dist = (&trial_point - z).norm();
        if !(trial_dist < dist) {
            break;
        }
        let gain = dist - trial_dist;
        delta = trial;
        point = trial_point;
        dist = trial_dist;
        if gain < tol {
            break;
        }
    }
    Ok(dist)
}

//! Monodromy matrices of the periodic orbits `t -> g^{tc}(m)` and their
//! Floquet multipliers.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{Flow, OdeTolerances, PeriodVector};
use crate::numerics::{self, serde_mat, ComplexSpectrum, Mat, Vector};

pub const DEFAULT_TOL_UNIT: f64 = 1e-6;

/// Largest residual of a period vector accepted as a closed orbit.
pub const CLOSING_TOL: f64 = 1e-8;

/// Integration tolerances used for monodromy matrices unless the flow's own
/// are tighter. The unit multiplier sits in Jordan blocks once the
/// frequencies depend on the actions, and a block perturbed by `d` splits
/// by about `sqrt(d)`, so the multiplicity count needs a small `d`. The
/// period vector is refined at the same tolerances before use.
pub const MONODROMY_ODE: OdeTolerances = OdeTolerances {
    rel: 1e-13,
    abs: 1e-15,
    max_steps: 1_000_000,
};

#[derive(Debug, Clone, Serialize)]
pub struct MonodromyReport {
    #[serde(serialize_with = "serde_mat::serialize")]
    pub monodromy: Mat,
    pub multipliers: ComplexSpectrum,
    pub unit_multiplicity: usize,
    pub tol_unit: f64,
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub base_point: Vector,
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub period: Vector,
    pub det: f64,
    /// Largest `min_mu |lambda mu - 1|` over multipliers `lambda`.
    pub symplectic_defect: f64,
    pub warnings: Vec<String>,
}

/// `dg^c(m)` and its spectrum.
pub fn monodromy(
    flow: &Flow,
    m: &Vector,
    pv: &PeriodVector,
    tol_unit: f64,
) -> Result<MonodromyReport> {
    if !(tol_unit > 0.0) {
        return Err(Error::Spec(format!(
            "tol_unit must be positive, got {tol_unit}"
        )));
    }
    if !(pv.residual < CLOSING_TOL) {
        return Err(Error::NumericFailure(format!(
            "period vector residual {:e} does not close the orbit",
            pv.residual
        )));
    }
    let own = flow.tolerances();
    let tight = OdeTolerances {
        rel: own.rel.min(MONODROMY_ODE.rel),
        abs: own.abs.min(MONODROMY_ODE.abs),
        max_steps: own.max_steps.max(MONODROMY_ODE.max_steps),
    };
    let tight_flow = flow.clone().with_tolerances(tight);
    let c = tight_flow.find_period_vector(m, &pv.alpha, &pv.c)?.c;
    let out = tight_flow.composed(m, &c, true)?;
    let mono = out.jacobian.expect("variational flow returns a Jacobian");
    let multipliers = numerics::eigenvalues(&mono)?;
    let unit_multiplicity = multipliers.count_near(Complex64::new(1.0, 0.0), tol_unit);
    let det = numerics::det(&mono)?;
    let symplectic_defect = multipliers
        .iter()
        .map(|l| {
            multipliers
                .iter()
                .map(|mu| (l * mu - 1.0).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);

    let s = flow.system().s();
    let mut warnings = Vec::new();
    if unit_multiplicity < 2 * s {
        warnings.push(format!(
            "multiplier 1 counted {unit_multiplicity} times, fewer than 2s = {}; numerical error suspected",
            2 * s
        ));
    }
    if symplectic_defect > 1e-6 {
        warnings.push(format!(
            "multipliers fail the lambda <-> 1/lambda pairing by {symplectic_defect:e}"
        ));
    }
    if (det - 1.0).abs() > 1e-6 {
        warnings.push(format!("monodromy determinant {det} differs from 1"));
    }
    Ok(MonodromyReport {
        monodromy: mono,
        multipliers,
        unit_multiplicity,
        tol_unit,
        base_point: m.clone(),
        period: c,
        det,
        symplectic_defect,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisIii {
    pub pass: bool,
    pub unit_multiplicity: usize,
    pub expected: usize,
    /// Set when fewer than `2s` unit multipliers were found, which cannot
    /// happen in exact arithmetic.
    pub numerical_warning: bool,
    /// Multipliers nearest to 1 with their distances, when the test fails.
    pub offending: Vec<(Complex64, f64)>,
}

/// Passes iff the multiplier 1 has multiplicity exactly `2s`.
pub fn check_hypothesis_iii(report: &MonodromyReport, s: usize) -> HypothesisIii {
    let expected = 2 * s;
    let count = report.unit_multiplicity;
    let pass = count == expected;
    let offending = if pass {
        Vec::new()
    } else {
        let one = Complex64::new(1.0, 0.0);
        let mut near: Vec<(Complex64, f64)> = report
            .multipliers
            .iter()
            .map(|&l| (l, (l - one).norm()))
            .collect();
        near.sort_by(|a, b| a.1.total_cmp(&b.1));
        near.truncate(count.max(expected).min(near.len()));
        near
    };
    HypothesisIii {
        pass,
        unit_multiplicity: count,
        expected,
        numerical_warning: count < expected,
        offending,
    }
}

/// Largest multiset distance between the spectra of `dg^c` at the given
/// points, which must lie on one torus so that `pv` closes at each.
pub fn basepoint_invariance(flow: &Flow, points: &[Vector], pv: &PeriodVector) -> Result<f64> {
    let spectra = points
        .iter()
        .map(|m| monodromy(flow, m, pv, DEFAULT_TOL_UNIT).map(|r| r.multipliers))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0_f64;
    for (i, a) in spectra.iter().enumerate() {
        for b in &spectra[i + 1..] {
            worst = worst.max(a.distance(b));
        }
    }
    Ok(worst)
}

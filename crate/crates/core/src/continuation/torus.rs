use num_complex::Complex64;
use serde::Serialize;

use super::chart::{return_map, AdaptedChart, ReturnMapOptions};
use crate::error::{Error, Result};
use crate::floquet;
use crate::flow::{Flow, PeriodLattice};
use crate::numerics::{self, max_abs, serde_mat, ComplexSpectrum, Mat, NewtonOptions, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusOptions {
    /// Sup-norm tolerance of `y_hat(y) - y`.
    pub fixed_point: f64,
    /// Eigenvalues of the return Jacobian closer than this to 1 at the
    /// initial guess abort the solve.
    pub nondegeneracy_margin: f64,
    pub tol_unit: f64,
    /// Integral whose frequencies are recorded.
    pub kappa: usize,
    pub max_iter: usize,
    pub return_map: ReturnMapOptions,
}

impl Default for TorusOptions {
    fn default() -> Self {
        Self {
            fixed_point: 1e-9,
            nondegeneracy_margin: 1e-6,
            tol_unit: floquet::DEFAULT_TOL_UNIT,
            kappa: 0,
            max_iter: 30,
            return_map: ReturnMapOptions::default(),
        }
    }
}

/// A torus of the family: transverse fixed point of the return map on the
/// level `beta` at parameter `eps`, with its period lattice and spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct TorusRecord {
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub beta: Vector,
    pub eps: f64,
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub y_star: Vector,
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub section_point: Vector,
    /// `|y_hat(y*) - y*|_inf`.
    pub residual: f64,
    pub iterations: usize,
    #[serde(serialize_with = "serde_mat::serialize")]
    pub return_jacobian: Mat,
    pub return_spectrum: ComplexSpectrum,
    pub alpha: Vec<i64>,
    /// Period vector of `alpha` on this torus.
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub period: Vector,
    pub lattice: PeriodLattice,
    /// Row `i` holds the frequencies of `X_i` on the torus.
    #[serde(serialize_with = "serde_mat::serialize")]
    pub frequency_matrix: Mat,
    pub kappa: usize,
    /// Frequencies of `X_kappa`.
    #[serde(serialize_with = "serde_mat::serialize_vec")]
    pub frequencies: Vector,
    pub multipliers: ComplexSpectrum,
    pub unit_multiplicity: usize,
}

fn unit_distance(spec: &ComplexSpectrum) -> f64 {
    spec.iter()
        .map(|l| (l - Complex64::new(1.0, 0.0)).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Solves `y_hat(beta, y) = y` by Newton from `y_guess`, then re-solves the
/// period lattice on the new torus from `lattice_guess`.
#[allow(clippy::too_many_arguments)]
pub fn solve_torus(
    flow: &Flow,
    chart: &AdaptedChart,
    alpha: &[i64],
    lattice_guess: &Mat,
    beta: &Vector,
    y_guess: &Vector,
    opts: &TorusOptions,
) -> Result<TorusRecord> {
    let s = flow.system().s();
    if alpha.len() != s {
        return Err(Error::Dimension(format!(
            "cycle of length {} for {s} integrals",
            alpha.len()
        )));
    }
    if opts.kappa >= s {
        return Err(Error::IndexOutOfRange {
            index: opts.kappa,
            count: s,
        });
    }
    let alpha_v = Vector::from_iterator(s, alpha.iter().map(|&k| k as f64));
    let c = lattice_guess * &alpha_v;
    let rm = &opts.return_map;
    let d = chart.transverse_dim();

    let at_guess = return_map(flow, chart, &c, beta, y_guess, rm, true)?;
    let j0 = at_guess.jacobian.clone().expect("jacobian requested");
    let spec0 = numerics::eigenvalues(&j0)?;
    if d > 0 && unit_distance(&spec0) < opts.nondegeneracy_margin {
        return Err(Error::Nondegeneracy(format!(
            "return Jacobian has an eigenvalue within {:e} of 1 at the initial guess",
            unit_distance(&spec0)
        )));
    }

    let newton = NewtonOptions {
        tol: opts.fixed_point,
        max_iter: opts.max_iter,
        polish: true,
    };
    let sol = numerics::newton_solve_with_jacobian(
        |y: &Vector| {
            let ev = return_map(flow, chart, &c, beta, y, rm, true)?;
            let jac = ev.jacobian.expect("jacobian requested") - Mat::identity(d, d);
            Ok((ev.y_hat - y, jac))
        },
        y_guess,
        &newton,
    )?;
    let y_star = sol.root;
    let ev = return_map(flow, chart, &c, beta, &y_star, rm, true)?;
    let residual = max_abs(&(&ev.y_hat - &y_star));
    if !(residual < opts.fixed_point) {
        return Err(Error::NoConvergence {
            iterations: sol.iterations,
            residual,
        });
    }
    let return_jacobian = ev.jacobian.expect("jacobian requested");
    let return_spectrum = numerics::eigenvalues(&return_jacobian)?;

    let section_point = ev.section_point;
    let lattice = flow.period_lattice(&section_point, lattice_guess)?;
    let frequency_matrix = lattice.frequency_matrix()?;
    let frequencies = frequency_matrix.row(opts.kappa).transpose();
    let period = &lattice.basis * &alpha_v;
    let pv = crate::flow::PeriodVector {
        c: period.clone(),
        alpha: alpha.to_vec(),
        residual: lattice.residual,
        iterations: 0,
    };
    let mono = floquet::monodromy(flow, &section_point, &pv, opts.tol_unit)?;

    Ok(TorusRecord {
        beta: beta.clone(),
        eps: flow.eps(),
        y_star,
        section_point,
        residual,
        iterations: sol.iterations,
        return_jacobian,
        return_spectrum,
        alpha: alpha.to_vec(),
        period,
        lattice,
        frequency_matrix,
        kappa: opts.kappa,
        frequencies,
        multipliers: mono.multipliers,
        unit_multiplicity: mono.unit_multiplicity,
    })
}

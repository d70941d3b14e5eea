use serde::Serialize;

use super::chart::{build_chart, AdaptedChart};
use super::torus::{solve_torus, TorusOptions, TorusRecord};
use crate::error::{Error, Result};
use crate::flow::{Flow, OdeTolerances, PeriodOptions};
use crate::hamiltonian::System;
use crate::models::TorusSeed;
use crate::numerics::{Mat, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FamilyOptions {
    pub torus: TorusOptions,
    pub ode: OdeTolerances,
    pub period: PeriodOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum NodeStatus {
    Converged,
    Failed(String),
    /// Not attempted: the nearest processed node failed.
    Skipped(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyNode {
    #[serde(serialize_with = "crate::numerics::serde_mat::serialize_vec")]
    pub beta: Vector,
    pub eps: f64,
    pub status: NodeStatus,
    pub record: Option<TorusRecord>,
    /// Index of the node whose solution served as predictor; `None` for the seed.
    pub predictor: Option<usize>,
}

impl FamilyNode {
    pub fn converged(&self) -> bool {
        self.status == NodeStatus::Converged
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TorusFamily {
    pub chart: AdaptedChart,
    pub alpha: Vec<i64>,
    /// Nodes in grid order: `eps` outer, `beta` inner.
    pub nodes: Vec<FamilyNode>,
    /// Order in which the nodes were processed.
    pub visit_order: Vec<usize>,
}

impl TorusFamily {
    pub fn records(&self) -> impl Iterator<Item = &TorusRecord> {
        self.nodes.iter().filter_map(|n| n.record.as_ref())
    }

    pub fn converged_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.converged()).count()
    }

    pub fn all_converged(&self) -> bool {
        self.nodes.iter().all(FamilyNode::converged)
    }
}

struct Solved {
    beta: Vector,
    eps: f64,
    y: Vector,
    lattice: Mat,
    ok: bool,
}

fn distance(b1: &Vector, e1: f64, b2: &Vector, e2: f64) -> f64 {
    ((b1 - b2).norm_squared() + (e1 - e2).powi(2)).sqrt()
}

/// Solves the torus at every `(beta, eps)` node, walking outward from the
/// seed level at `eps = 0` with the nearest processed node as predictor.
/// Nodes whose nearest processed node failed are skipped.
pub fn continue_family(
    system: &System,
    seed: &TorusSeed,
    alpha: &[i64],
    beta_grid: &[Vector],
    eps_grid: &[f64],
    opts: &FamilyOptions,
) -> Result<TorusFamily> {
    if beta_grid.is_empty() || eps_grid.is_empty() {
        return Err(Error::Spec("continuation grid is empty".into()));
    }
    let s = system.s();
    if let Some(b) = beta_grid.iter().find(|b| b.len() != s) {
        return Err(Error::Dimension(format!(
            "grid level of length {} for {s} integrals",
            b.len()
        )));
    }
    let mut nodes = Vec::new();
    for &eps in eps_grid {
        for beta in beta_grid {
            if nodes
                .iter()
                .any(|n: &FamilyNode| n.eps == eps && n.beta == *beta)
            {
                return Err(Error::Spec(format!(
                    "duplicate grid node beta = {beta}, eps = {eps}"
                )));
            }
            nodes.push(FamilyNode {
                beta: beta.clone(),
                eps,
                status: NodeStatus::Skipped("not visited".into()),
                record: None,
                predictor: None,
            });
        }
    }

    let chart = build_chart(system, &seed.base, 0.0)?;
    let seed_flow = Flow::new(system, 0.0)
        .with_tolerances(opts.ode)
        .with_period_options(opts.period);
    let seed_lattice = seed_flow.period_lattice(&seed.base, &seed.lattice_guess)?;
    let origin = Solved {
        beta: chart.beta0.clone(),
        eps: 0.0,
        y: Vector::zeros(chart.transverse_dim()),
        lattice: seed_lattice.basis,
        ok: true,
    };

    let mut order: Vec<usize> = (0..nodes.len()).collect();
    let key = |i: &usize| distance(&nodes[*i].beta, nodes[*i].eps, &origin.beta, 0.0);
    order.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));

    let mut solved: Vec<(usize, Solved)> = Vec::new();
    for &idx in &order {
        let (beta, eps) = (nodes[idx].beta.clone(), nodes[idx].eps);
        let mut best: (Option<usize>, &Solved, f64) =
            (None, &origin, distance(&beta, eps, &origin.beta, 0.0));
        for (j, st) in &solved {
            let d = distance(&beta, eps, &st.beta, st.eps);
            if d < best.2 || (d == best.2 && st.ok && (best.0.is_none() || !best.1.ok)) {
                best = (Some(*j), st, d);
            }
        }
        let (pred_idx, pred) = (best.0, best.1);
        nodes[idx].predictor = pred_idx;
        if !pred.ok {
            nodes[idx].status = NodeStatus::Skipped(format!(
                "nearest processed node {} did not converge",
                pred_idx.map_or_else(|| "seed".to_string(), |j| j.to_string())
            ));
            let st = Solved {
                beta,
                eps,
                y: pred.y.clone(),
                lattice: pred.lattice.clone(),
                ok: false,
            };
            solved.push((idx, st));
            continue;
        }
        let flow = Flow::new(system, eps)
            .with_tolerances(opts.ode)
            .with_period_options(opts.period);
        let result = solve_torus(
            &flow,
            &chart,
            alpha,
            &pred.lattice,
            &beta,
            &pred.y,
            &opts.torus,
        );
        let st = match result {
            Ok(rec) => {
                log::debug!("node {idx} converged: |y*| = {:e}", rec.y_star.amax());
                let st = Solved {
                    beta,
                    eps,
                    y: rec.y_star.clone(),
                    lattice: rec.lattice.basis.clone(),
                    ok: true,
                };
                nodes[idx].status = NodeStatus::Converged;
                nodes[idx].record = Some(rec);
                st
            }
            Err(e) => {
                log::debug!("node {idx} failed: {e}");
                nodes[idx].status = NodeStatus::Failed(e.to_string());
                Solved {
                    beta,
                    eps,
                    y: pred.y.clone(),
                    lattice: pred.lattice.clone(),
                    ok: false,
                }
            }
        };
        solved.push((idx, st));
    }

    Ok(TorusFamily {
        chart,
        alpha: alpha.to_vec(),
        nodes,
        visit_order: order,
    })
}

//! Numerical toolkit for invariant isotropic tori of partially integrable
//! Hamiltonian systems: hypothesis checks, Floquet multipliers of the
//! composed flows, the reducibility criterion and continuation of tori in
//! the actions and a perturbation parameter.

// `!(x < tol)` is used on purpose so that NaN fails every test.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod continuation;
pub mod error;
pub mod floquet;
pub mod flow;
pub mod hamiltonian;
pub mod models;
pub mod numerics;
pub mod reducible;

pub use error::{Error, Result};
pub use flow::{Flow, FlowResult, OdeTolerances, PeriodLattice, PeriodVector};
pub use hamiltonian::{HamiltonianSystem, System};
pub use numerics::{Mat, Vector};

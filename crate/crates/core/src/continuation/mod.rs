//! Adapted charts, return maps and continuation of torus families.

mod chart;
mod family;
mod sampling;
mod torus;
mod twist;

pub use chart::{
    build_chart, return_map, AdaptedChart, JacobianMode, ReturnMapEval, ReturnMapOptions,
};
pub use family::{continue_family, FamilyNode, FamilyOptions, NodeStatus, TorusFamily};
pub use sampling::{sample_torus, SampleOptions, TorusSamples};
pub use torus::{solve_torus, TorusOptions, TorusRecord};
pub use twist::{frequency_twist, TwistEntry, TwistReport, DEFAULT_TWIST_TOL};

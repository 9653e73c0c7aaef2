//! Risk sharing among a measure space of agents on a finite probability
//! space.
//!
//! Each agent carries a convex risk measure given in dual form
//! `ρ(x) = sup_q E^q[x] − c·KL(q)` over a polyhedral set of densities. The
//! crate evaluates the minimal aggregate risk of a total loss `x` split among
//! the agents, produces optimal allocations where they are known in closed
//! form, and checks and improves allocations for Pareto efficiency.

// `!(v > 0.0)` style guards are kept so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod agents;
pub mod convolution;
pub mod error;
pub mod exec;
pub mod opt;
pub mod oracle;
pub mod pareto;
pub mod prob;
pub mod risk;

pub use agents::{AgentSpace, Allocation, Atom, FamilyProfile, RiskFamily};
pub use convolution::{
    acceptance_member, aggregate_conjugate, aumann_acceptance_sample, nonattainment_experiment,
    optimal_allocation_dilated, optimal_allocation_inflated, value, Attainment, FamilyKind, Market,
    NonattainmentReport, RefinementRow, ShareResult,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use pareto::{pareto_check, pareto_improve, Improvement, ParetoVerdict, PARETO_TOL};
pub use prob::{Density, ProbSpace, Rv};
pub use risk::{left_continuity_sweep, DualForm, Penalty, RiskSpec};

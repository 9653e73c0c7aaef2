//! Small dense optimization routines: a simplex LP solver and dual searches
//! over probability densities.

pub mod density;
pub mod lp;

pub use density::{
    entropic_capped_optimizer, hull_violation, maximize_over_densities, DensityConstraints,
    DensityOptimum, DualScore, Hull, HullKind,
};
pub use lp::{lp_solve, LpProblem, LpSolution, LpStatus};

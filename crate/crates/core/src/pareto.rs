//! Pareto efficiency of allocations and the uniform improvement construction.
//!
//! A feasible allocation is efficient exactly when its total risk equals the
//! value function. Given any allocation with strictly smaller total risk, cash
//! transfers turn it into one that lowers every atom's risk by the same
//! amount `R > 0`.

use crate::agents::{Allocation, FEASIBILITY_TOL};
use crate::convolution::{value, FamilyKind, Market};
use crate::error::{Error, Result};
use crate::prob::Rv;

pub const PARETO_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoVerdict {
    pub efficient: bool,
    /// An allocation improving every atom, when one could be constructed.
    pub witness: Option<Allocation>,
    /// `total_risk(alloc) − value`, floored at zero.
    pub excess: f64,
    pub total_risk: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Improvement {
    pub allocation: Allocation,
    /// The risk reduction every atom receives.
    pub gain: f64,
}

fn require_feasible(market: &Market, alloc: &Allocation, x: &Rv, what: &str) -> Result<()> {
    if !market.is_feasible(alloc, x, FEASIBILITY_TOL)? {
        return Err(Error::Precondition(format!(
            "{what} allocation does not integrate to the loss"
        )));
    }
    Ok(())
}

/// Compares the total risk of `alloc` with the value function at `x`.
///
/// For dilation and inflation profiles an inefficient verdict carries a
/// witness built from the optimal allocation.
pub fn pareto_check(
    market: &Market,
    x: &Rv,
    alloc: &Allocation,
    tol: f64,
) -> Result<ParetoVerdict> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol} is negative"
        )));
    }
    require_feasible(market, alloc, x, "checked")?;
    let share = value(market, x)?;
    if !share.value.is_finite() {
        return Err(Error::IllPosed);
    }
    let total = market.total_risk(alloc)?;
    let excess = (total - share.value).max(0.0);
    let efficient = excess <= tol;
    let witness = match (&share.allocation, efficient) {
        (Some(best), false) if !matches!(market.kind(), FamilyKind::General) => {
            pareto_improve(market, x, alloc, best)
                .ok()
                .map(|imp| imp.allocation)
        }
        _ => None,
    };
    Ok(ParetoVerdict {
        efficient,
        witness,
        excess,
        total_risk: total,
        value: share.value,
    })
}

/// `Z_a = Y_a + ρ_a(X_a) − ρ_a(Y_a) − R` with
/// `R = (1/μ(A)) Σ_a w_a (ρ_a(X_a) − ρ_a(Y_a))`, where `X = alloc` and
/// `Y = better`.
pub fn pareto_improve(
    market: &Market,
    x: &Rv,
    alloc: &Allocation,
    better: &Allocation,
) -> Result<Improvement> {
    require_feasible(market, alloc, x, "current")?;
    require_feasible(market, better, x, "improving")?;
    let current = market.atom_risks(alloc)?;
    let improved = market.atom_risks(better)?;
    let agents = market.agents();
    let r = agents
        .weights()
        .zip(current.iter().zip(&improved))
        .map(|(w, (c, i))| w * (c - i))
        .sum::<f64>()
        / agents.total_mass();
    if !(r > 0.0) {
        return Err(Error::Precondition(format!(
            "improving allocation does not lower total risk (per-unit gain {r})"
        )));
    }
    let cash: Vec<f64> = current
        .iter()
        .zip(&improved)
        .map(|(c, i)| c - i - r)
        .collect();
    Ok(Improvement {
        allocation: better.shift_rows(&cash),
        gain: r,
    })
}

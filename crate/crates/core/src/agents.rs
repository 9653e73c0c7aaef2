//! Atomic agent spaces, per-agent risk families and allocations.
//!
//! A continuum of agents is represented by quadrature atoms; the Gelfand
//! integral of an allocation is then the weighted sum of its rows.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::exec::{collect_ordered, map_auto};
use crate::prob::{ProbSpace, Rv};
use crate::risk::RiskSpec;

pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub label: String,
    pub weight: f64,
    /// Position in the parameter interval for quadrature-built spaces.
    pub position: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpace {
    atoms: Vec<Atom>,
}

impl AgentSpace {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidAgents("no atoms".into()));
        }
        let mut seen = HashSet::new();
        for a in &atoms {
            if !(a.weight.is_finite() && a.weight > 0.0) {
                return Err(Error::InvalidAgents(format!(
                    "atom '{}' has non-positive weight {}",
                    a.label, a.weight
                )));
            }
            if !seen.insert(a.label.as_str()) {
                return Err(Error::InvalidAgents(format!(
                    "duplicate label '{}'",
                    a.label
                )));
            }
        }
        Ok(Self { atoms })
    }

    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        Self::new(
            weights
                .iter()
                .enumerate()
                .map(|(i, &w)| Atom {
                    label: format!("a{}", i + 1),
                    weight: w,
                    position: None,
                })
                .collect(),
        )
    }

    /// `n` agents of unit mass.
    pub fn finite(n: usize) -> Result<Self> {
        Self::from_weights(&vec![1.0; n])
    }

    /// Lebesgue measure on `[0, 1]` by the `n`-point midpoint rule.
    pub fn aumann(n: usize) -> Result<Self> {
        Self::new(midpoints(n))
    }

    /// Lebesgue measure on `[0, 1]` plus unit point masses at 0 and 1.
    pub fn shapley(n: usize) -> Result<Self> {
        let mut atoms = midpoints(n);
        atoms.insert(
            0,
            Atom {
                label: "d0".into(),
                weight: 1.0,
                position: Some(0.0),
            },
        );
        atoms.push(Atom {
            label: "d1".into(),
            weight: 1.0,
            position: Some(1.0),
        });
        Self::new(atoms)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.weight)
    }

    pub fn total_mass(&self) -> f64 {
        self.weights().sum()
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found,
            });
        }
        Ok(())
    }

    /// State-wise `Σ_a w_a X_a`.
    pub fn gelfand_integral(&self, alloc: &Allocation) -> Result<Rv> {
        self.check_dim(alloc.num_atoms())?;
        let mut out = vec![0.0; alloc.num_states()];
        for (w, row) in self.weights().zip(alloc.rows()) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += w * v;
            }
        }
        Rv::from_values(out)
    }

    /// Whether the allocation integrates to `x` in sup-norm within `tol`.
    pub fn is_feasible(&self, alloc: &Allocation, x: &Rv, tol: f64) -> Result<bool> {
        if !(tol >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tolerance {tol} is negative"
            )));
        }
        if alloc.num_states() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: alloc.num_states(),
            });
        }
        Ok(self.gelfand_integral(alloc)?.sup_distance(x) <= tol)
    }

    /// `Σ_a w_a ρ_a(X_a)`, reduced in ascending atom order.
    pub fn total_risk(
        &self,
        family: &RiskFamily,
        space: &ProbSpace,
        alloc: &Allocation,
    ) -> Result<f64> {
        Ok(self
            .atom_risks(family, space, alloc)?
            .iter()
            .zip(self.weights())
            .map(|(r, w)| w * r)
            .sum())
    }

    /// `ρ_a(X_a)` for each atom.
    pub fn atom_risks(
        &self,
        family: &RiskFamily,
        space: &ProbSpace,
        alloc: &Allocation,
    ) -> Result<Vec<f64>> {
        self.check_dim(family.len())?;
        self.check_dim(alloc.num_atoms())?;
        space.check_dim(alloc.num_states())?;
        let risks = map_auto(self.len(), |a| {
            family.specs()[a].rho(space, &alloc.row_rv(a))
        });
        collect_ordered(risks)
    }
}

fn midpoints(n: usize) -> Vec<Atom> {
    (0..n)
        .map(|k| Atom {
            label: format!("t{}", k + 1),
            weight: 1.0 / n as f64,
            position: Some((k as f64 + 0.5) / n as f64),
        })
        .collect()
}

/// How a [`RiskFamily`] was generated.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyProfile {
    /// `ρ_a = base^{γ_a}`.
    Dilation {
        base: RiskSpec,
        gammas: Vec<f64>,
    },
    /// `ρ_a = base~_{γ_a}`.
    Inflation {
        base: RiskSpec,
        gammas: Vec<f64>,
    },
    General,
}

/// One risk measure per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskFamily {
    specs: Vec<RiskSpec>,
    profile: FamilyProfile,
}

impl RiskFamily {
    pub fn general(specs: Vec<RiskSpec>) -> Result<Self> {
        for s in &specs {
            s.validate()?;
        }
        Ok(Self {
            specs,
            profile: FamilyProfile::General,
        })
    }

    pub fn dilation_profile(base: RiskSpec, gammas: Vec<f64>) -> Result<Self> {
        base.validate()?;
        let specs = gammas
            .iter()
            .map(|&g| dilation_of(&base, g))
            .collect::<Result<_>>()?;
        Ok(Self {
            specs,
            profile: FamilyProfile::Dilation { base, gammas },
        })
    }

    pub fn inflation_profile(base: RiskSpec, gammas: Vec<f64>) -> Result<Self> {
        base.validate()?;
        let specs = gammas
            .iter()
            .map(|&g| base.clone().inflate(g))
            .collect::<Result<_>>()?;
        Ok(Self {
            specs,
            profile: FamilyProfile::Inflation { base, gammas },
        })
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }

    pub fn specs(&self) -> &[RiskSpec] {
        &self.specs
    }

    pub fn profile(&self) -> &FamilyProfile {
        &self.profile
    }
}

/// The dilation kept structurally even for coherent bases, so the stored
/// family records its parameter per atom.
fn dilation_of(base: &RiskSpec, gamma: f64) -> Result<RiskSpec> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "dilation gamma must be positive, got {gamma}"
        )));
    }
    Ok(RiskSpec::Dilation {
        base: Box::new(base.clone()),
        gamma,
    })
}

/// Agent-by-state matrix of loss shares.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    rows: Vec<Vec<f64>>,
}

impl Allocation {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidAgents("allocation has no rows".into()));
        };
        let n = first.len();
        for (a, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("allocation row {a}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn zeros(atoms: usize, states: usize) -> Self {
        Self {
            rows: vec![vec![0.0; states]; atoms],
        }
    }

    /// `x / μ(A)` for every atom.
    pub fn proportional(agents: &AgentSpace, x: &Rv) -> Self {
        let m = agents.total_mass();
        Self {
            rows: vec![x.values().iter().map(|v| v / m).collect(); agents.len()],
        }
    }

    pub fn num_atoms(&self) -> usize {
        self.rows.len()
    }

    pub fn num_states(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.rows[a]
    }

    pub fn row_rv(&self, a: usize) -> Rv {
        Rv::from_values(self.rows[a].clone()).expect("allocation entries are finite")
    }

    pub fn into_rows(self) -> Vec<Vec<f64>> {
        self.rows
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Allocation, s: f64) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a.iter().zip(b).map(|(a, b)| a + s * b).collect())
                .collect(),
        }
    }

    /// Adds the cash amount `cash[a]` to every state of row `a`.
    pub fn shift_rows(&self, cash: &[f64]) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .zip(cash)
                .map(|(r, c)| r.iter().map(|v| v + c).collect())
                .collect(),
        }
    }
}

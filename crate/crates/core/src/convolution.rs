//! The value function `inf { Σ_a w_a ρ_a(X_a) : Σ_a w_a X_a = x }` of a
//! market, its conjugate, optimal allocations and acceptance sets.
//!
//! Dilation and inflation profiles have closed forms and explicit optimal
//! allocations. Any other family is solved through the dual problem
//! `sup_q E^q[x] − Σ_a w_a ρ_a*(q)`; there the value is exact up to solver
//! tolerance but no primal allocation is produced.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agents::{AgentSpace, Allocation, FamilyProfile, RiskFamily};
use crate::error::{Error, Result};
use crate::exec::{collect_ordered, map_auto, map_indexed, Execution};
use crate::opt::{maximize_over_densities, DensityConstraints, DualScore};
use crate::prob::{Density, ProbSpace, Rv};
use crate::risk::{Penalty, RiskSpec};

/// Negative duality gaps above this are reported as zero.
pub const GAP_CLIP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// `ρ_a = base^{γ_a}` with `total = Σ w_a γ_a`.
    DilationProfile {
        base: RiskSpec,
        gammas: Vec<f64>,
        total: f64,
    },
    /// `ρ_a = base~_{γ_a}` with `minimum = min_a γ_a`. `target` optionally
    /// carries the essential infimum of the continuum profile the atoms
    /// discretize.
    InflationProfile {
        base: RiskSpec,
        gammas: Vec<f64>,
        minimum: f64,
        target: Option<f64>,
    },
    General,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::DilationProfile { .. } => "dilation",
            FamilyKind::InflationProfile { .. } => "inflation",
            FamilyKind::General => "general",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Market {
    space: ProbSpace,
    agents: AgentSpace,
    family: RiskFamily,
    kind: FamilyKind,
}

impl Market {
    pub fn new(space: ProbSpace, agents: AgentSpace, family: RiskFamily) -> Result<Self> {
        agents.check_dim(family.len())?;
        for spec in family.specs() {
            spec.dual_form(&space)?;
        }
        let kind = match family.profile() {
            FamilyProfile::Dilation { base, gammas } => {
                let total: f64 = agents.weights().zip(gammas).map(|(w, g)| w * g).sum();
                if !(total.is_finite() && total > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "aggregate risk tolerance {total} must be positive and finite"
                    )));
                }
                FamilyKind::DilationProfile {
                    base: base.clone(),
                    gammas: gammas.clone(),
                    total,
                }
            }
            FamilyProfile::Inflation { base, gammas } => FamilyKind::InflationProfile {
                base: base.clone(),
                gammas: gammas.clone(),
                minimum: gammas.iter().copied().fold(f64::INFINITY, f64::min),
                target: None,
            },
            FamilyProfile::General => FamilyKind::General,
        };
        Ok(Self {
            space,
            agents,
            family,
            kind,
        })
    }

    /// Records the continuum essential infimum an inflation profile
    /// approximates.
    pub fn with_target_gamma(mut self, gamma: f64) -> Result<Self> {
        match &mut self.kind {
            FamilyKind::InflationProfile { target, .. } => {
                *target = Some(gamma);
                Ok(self)
            }
            _ => Err(Error::WrongFamily {
                expected: "inflation-profile",
            }),
        }
    }

    pub fn space(&self) -> &ProbSpace {
        &self.space
    }

    pub fn agents(&self) -> &AgentSpace {
        &self.agents
    }

    pub fn family(&self) -> &RiskFamily {
        &self.family
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn total_risk(&self, alloc: &Allocation) -> Result<f64> {
        self.agents.total_risk(&self.family, &self.space, alloc)
    }

    pub fn atom_risks(&self, alloc: &Allocation) -> Result<Vec<f64>> {
        self.agents.atom_risks(&self.family, &self.space, alloc)
    }

    pub fn is_feasible(&self, alloc: &Allocation, x: &Rv, tol: f64) -> Result<bool> {
        self.agents.is_feasible(alloc, x, tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attainment {
    Attained,
    NotAttained,
    Unknown,
}

impl Attainment {
    pub fn as_str(self) -> &'static str {
        match self {
            Attainment::Attained => "attained",
            Attainment::NotAttained => "not_attained",
            Attainment::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShareResult {
    pub value: f64,
    pub allocation: Option<Allocation>,
    pub attained: Attainment,
    pub dual_optimizer: Option<Density>,
    pub duality_gap: f64,
}

/// `Σ_a w_a ρ_a*(q)`, infinite as soon as one atom's penalty is.
pub fn aggregate_conjugate(market: &Market, q: &Density) -> Result<Penalty> {
    let specs = market.family.specs();
    let terms = map_auto(specs.len(), |a| specs[a].conjugate(&market.space, q));
    let mut total = Penalty::Finite(0.0);
    for (t, w) in collect_ordered(terms)?
        .into_iter()
        .zip(market.agents.weights())
    {
        total = total + t.scale(w);
    }
    Ok(total)
}

fn gap_at(market: &Market, x: &Rv, value: f64, q: &Density) -> Result<f64> {
    let dual = match aggregate_conjugate(market, q)? {
        Penalty::Finite(c) => market.space.expect_under(q, x)? - c,
        Penalty::Infinite => f64::NEG_INFINITY,
    };
    let gap = value - dual;
    Ok(if (-GAP_CLIP..0.0).contains(&gap) {
        0.0
    } else {
        gap
    })
}

/// The value function at `x`, with an optimal allocation when one is known.
pub fn value(market: &Market, x: &Rv) -> Result<ShareResult> {
    market.space.check_dim(x.len())?;
    match &market.kind {
        FamilyKind::DilationProfile { base, total, .. } => {
            let aggregate = RiskSpec::Dilation {
                base: Box::new(base.clone()),
                gamma: *total,
            };
            let (v, q) = aggregate.rho_with_optimizer(&market.space, x)?;
            let allocation = optimal_allocation_dilated(market, x)?;
            let duality_gap = gap_at(market, x, v, &q)?;
            Ok(ShareResult {
                value: v,
                allocation: Some(allocation),
                attained: Attainment::Attained,
                dual_optimizer: Some(q),
                duality_gap,
            })
        }
        FamilyKind::InflationProfile { base, minimum, .. } => {
            let aggregate = base.clone().inflate(*minimum)?;
            let (v, q) = aggregate.rho_with_optimizer(&market.space, x)?;
            let allocation = optimal_allocation_inflated(market, x)?;
            let duality_gap = gap_at(market, x, v, &q)?;
            Ok(ShareResult {
                value: v,
                allocation: Some(allocation),
                attained: Attainment::Attained,
                dual_optimizer: Some(q),
                duality_gap,
            })
        }
        FamilyKind::General => {
            let (v, q) = dual_value(market, x)?;
            let duality_gap = gap_at(market, x, v, &q)?;
            Ok(ShareResult {
                value: v,
                allocation: None,
                attained: Attainment::Unknown,
                dual_optimizer: Some(q),
                duality_gap,
            })
        }
    }
}

/// The dual route for any family: maximize `E^q[x] − Σ w_a ρ_a*(q)`.
///
/// Each penalty is `c_a·KL(q)` on a polyhedral set, so the aggregate is
/// `(Σ w_a c_a)·KL(q)` on the intersection of the sets.
pub fn dual_value(market: &Market, x: &Rv) -> Result<(f64, Density)> {
    let mut entropic = 0.0;
    let mut constraints = DensityConstraints::default();
    for (spec, w) in market.family.specs().iter().zip(market.agents.weights()) {
        let form = spec.dual_form(&market.space)?;
        entropic += w * form.entropic;
        constraints.merge(form.constraints);
    }
    let score = if entropic > 0.0 {
        DualScore::EntropicPenalized { x, coef: entropic }
    } else {
        DualScore::Linear(x)
    };
    let opt = maximize_over_densities(&market.space, score, &constraints)?;
    Ok((opt.score, opt.density))
}

/// `γ_a x / Γ` for each atom of a dilation profile.
pub fn optimal_allocation_dilated(market: &Market, x: &Rv) -> Result<Allocation> {
    let FamilyKind::DilationProfile { gammas, total, .. } = &market.kind else {
        return Err(Error::WrongFamily {
            expected: "dilation-profile",
        });
    };
    market.space.check_dim(x.len())?;
    Allocation::new(
        gammas
            .iter()
            .map(|g| x.values().iter().map(|v| g * v / total).collect())
            .collect(),
    )
}

/// `x / m` on the atoms of minimal `γ` (of total weight `m`), zero elsewhere.
pub fn optimal_allocation_inflated(market: &Market, x: &Rv) -> Result<Allocation> {
    let FamilyKind::InflationProfile {
        gammas, minimum, ..
    } = &market.kind
    else {
        return Err(Error::WrongFamily {
            expected: "inflation-profile",
        });
    };
    market.space.check_dim(x.len())?;
    let argmin: Vec<bool> = gammas.iter().map(|g| g == minimum).collect();
    let m: f64 = market
        .agents
        .weights()
        .zip(&argmin)
        .filter(|(_, &hit)| hit)
        .map(|(w, _)| w)
        .sum();
    Allocation::new(
        argmin
            .iter()
            .map(|&hit| {
                if hit {
                    x.values().iter().map(|v| v / m).collect()
                } else {
                    vec![0.0; x.len()]
                }
            })
            .collect(),
    )
}

/// Whether `x` lies in the aggregate acceptance set `{value ≤ tol}`.
pub fn acceptance_member(market: &Market, x: &Rv, tol: f64) -> Result<bool> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol} is negative"
        )));
    }
    Ok(value(market, x)?.value <= tol)
}

/// Draws random per-atom losses, moves each into its atom's acceptance set
/// by subtracting its risk, and returns the Gelfand integrals.
///
/// Draws are uniform on `[−scale, scale]` per state with `scale = 1`, seeded
/// per sample so results do not depend on thread scheduling.
pub fn aumann_acceptance_sample(market: &Market, n_samples: usize, seed: u64) -> Result<Vec<Rv>> {
    aumann_acceptance_sample_with(market, n_samples, seed, Execution::Parallel)
}

pub fn aumann_acceptance_sample_with(
    market: &Market,
    n_samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<Rv>> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter(
            "at least one sample is required".into(),
        ));
    }
    let n = market.space.len();
    let atoms = market.agents.len();
    let samples = map_indexed(exec, n_samples, |k| -> Result<Rv> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let rows: Vec<Vec<f64>> = (0..atoms)
            .map(|_| (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
            .collect();
        project_to_acceptance(market, &Allocation::new(rows)?)
    });
    collect_ordered(samples)
}

/// `Σ_a w_a (X_a − ρ_a(X_a))`.
pub fn project_to_acceptance(market: &Market, draws: &Allocation) -> Result<Rv> {
    let risks = market.atom_risks(draws)?;
    let shifted = draws.shift_rows(&risks.iter().map(|r| -r).collect::<Vec<_>>());
    market.agents.gelfand_integral(&shifted)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementRow {
    pub atoms: usize,
    pub value: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonattainmentReport {
    pub rows: Vec<RefinementRow>,
    /// `ρ̃_Γ(x)` at the continuum essential infimum.
    pub limit: f64,
    /// `γ ↦ ρ̃_γ(x)` is constant on `[Γ, ∞)`, so the experiment shows nothing.
    pub vacuous: bool,
}

impl NonattainmentReport {
    /// Every gap positive and strictly decreasing along the refinements.
    pub fn trend_holds(&self) -> bool {
        self.rows.iter().all(|r| r.gap > 0.0) && self.rows.windows(2).all(|w| w[1].gap < w[0].gap)
    }
}

/// Discretizes the profile `t ↦ γ(t)` on `(0, 1]` with the midpoint rule for
/// each refinement and compares the discrete value with the continuum limit
/// `ρ̃_Γ(x)`. The profile must stay strictly above `Γ` on every atom.
pub fn nonattainment_experiment(
    base: &RiskSpec,
    profile: &(dyn Fn(f64) -> f64 + Sync),
    continuum_inf: f64,
    space: &ProbSpace,
    x: &Rv,
    refinements: &[usize],
) -> Result<NonattainmentReport> {
    space.check_dim(x.len())?;
    if refinements.contains(&0) {
        return Err(Error::InvalidParameter("refinement with zero atoms".into()));
    }
    let limit = base.clone().inflate(continuum_inf)?.rho(space, x)?;
    let beyond = base.clone().inflate(continuum_inf + 1.0)?.rho(space, x)?;
    // One probe suffices: once ρ̃ agrees at two levels it is constant beyond.
    let vacuous = (beyond - limit).abs() <= 1e-12 * (1.0 + limit.abs());

    let rows = map_indexed(
        Execution::Parallel,
        refinements.len(),
        |k| -> Result<RefinementRow> {
            let n = refinements[k];
            let agents = AgentSpace::aumann(n)?;
            let gammas: Vec<f64> = agents
                .atoms()
                .iter()
                .map(|a| profile(a.position.expect("quadrature atoms carry positions")))
                .collect();
            if let Some(g) = gammas.iter().find(|&&g| !(g > continuum_inf)) {
                return Err(Error::Precondition(format!(
                    "profile value {g} does not exceed the essential infimum {continuum_inf}"
                )));
            }
            let family = RiskFamily::inflation_profile(base.clone(), gammas)?;
            let market =
                Market::new(space.clone(), agents, family)?.with_target_gamma(continuum_inf)?;
            let v = value(&market, x)?.value;
            Ok(RefinementRow {
                atoms: n,
                value: v,
                gap: v - limit,
            })
        },
    );
    Ok(NonattainmentReport {
        rows: collect_ordered(rows)?,
        limit,
        vacuous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::FEASIBILITY_TOL;

    fn space(p: &[f64]) -> ProbSpace {
        ProbSpace::new(p.to_vec()).unwrap()
    }

    fn general(space: &ProbSpace, weights: &[f64], specs: Vec<RiskSpec>) -> Market {
        Market::new(
            space.clone(),
            AgentSpace::from_weights(weights).unwrap(),
            RiskFamily::general(specs).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn identical_entropic_agents_aggregate_tolerance() {
        let s = space(&[0.2, 0.3, 0.5]);
        let x = Rv::new(&s, vec![1.0, -0.5, 2.0]).unwrap();
        let gamma = 0.6;
        let n = 4;
        let market = Market::new(
            s.clone(),
            AgentSpace::finite(n).unwrap(),
            RiskFamily::dilation_profile(RiskSpec::entropic(1.0).unwrap(), vec![gamma; n]).unwrap(),
        )
        .unwrap();
        let r = value(&market, &x).unwrap();
        let want = RiskSpec::entropic(n as f64 * gamma)
            .unwrap()
            .rho(&s, &x)
            .unwrap();
        assert!((r.value - want).abs() < 1e-12);
        assert!(r.duality_gap.abs() < 1e-10);

        // the same agents as a general family go through the dual solver
        let g = general(
            &s,
            &vec![1.0; n],
            vec![RiskSpec::entropic(gamma).unwrap(); n],
        );
        let r = value(&g, &x).unwrap();
        assert!((r.value - want).abs() < 1e-9);
        assert_eq!(r.attained, Attainment::Unknown);
        assert!(r.allocation.is_none());
    }

    #[test]
    fn constant_loss_value_is_the_constant() {
        let s = space(&[0.5, 0.25, 0.25]);
        let x = Rv::constant(&s, 1.75);
        let g = general(
            &s,
            &[1.0, 2.0],
            vec![
                RiskSpec::entropic(0.5).unwrap(),
                RiskSpec::expected_shortfall(0.3).unwrap(),
            ],
        );
        assert!((value(&g, &x).unwrap().value - 1.75).abs() < 1e-9);
    }

    #[test]
    fn two_expected_shortfall_agents() {
        let s = space(&[0.2, 0.3, 0.5]);
        let x = Rv::new(&s, vec![3.0, 1.0, -1.0]).unwrap();
        let (a1, a2) = (0.4, 0.7);
        let g = general(
            &s,
            &[1.0, 1.0],
            vec![
                RiskSpec::expected_shortfall(a1).unwrap(),
                RiskSpec::expected_shortfall(a2).unwrap(),
            ],
        );
        let want = RiskSpec::expected_shortfall(a2)
            .unwrap()
            .rho(&s, &x)
            .unwrap();
        assert!((value(&g, &x).unwrap().value - want).abs() < 1e-12);

        let infl = Market::new(
            s.clone(),
            AgentSpace::finite(2).unwrap(),
            RiskFamily::inflation_profile(RiskSpec::expectation(), vec![1.0 / a1, 1.0 / a2])
                .unwrap(),
        )
        .unwrap();
        let r = value(&infl, &x).unwrap();
        assert!((r.value - want).abs() < 1e-12);
        let alloc = r.allocation.unwrap();
        assert_eq!(alloc.row(0), &[0.0, 0.0, 0.0]);
        assert_eq!(alloc.row(1), x.values());
    }

    #[test]
    fn aggregate_conjugate_examples() {
        let s = space(&[0.5, 0.5]);
        let q = Density::new(&s, vec![0.5, 1.5]).unwrap();
        let gammas = vec![0.5, 2.0, 1.25];
        let weights = [1.0, 0.5, 2.0];
        let market = Market::new(
            s.clone(),
            AgentSpace::from_weights(&weights).unwrap(),
            RiskFamily::dilation_profile(RiskSpec::entropic(1.0).unwrap(), gammas.clone()).unwrap(),
        )
        .unwrap();
        let total: f64 = weights.iter().zip(&gammas).map(|(w, g)| w * g).sum();
        let kl = s.kl_divergence(&q).unwrap();
        let got = aggregate_conjugate(&market, &q).unwrap().value();
        assert!((got - total * kl).abs() < 1e-14);

        let coherent = general(
            &s,
            &[1.0, 1.0],
            vec![
                RiskSpec::expectation(),
                RiskSpec::expected_shortfall(0.5).unwrap(),
            ],
        );
        assert_eq!(
            aggregate_conjugate(&coherent, &s.base_density()).unwrap(),
            Penalty::Finite(0.0)
        );
        assert_eq!(
            aggregate_conjugate(&coherent, &q).unwrap(),
            Penalty::Infinite
        );
    }

    #[test]
    fn dilated_allocation_examples() {
        let s = space(&[0.5, 0.5]);
        let x = Rv::new(&s, vec![4.0, -8.0]).unwrap();
        let market = Market::new(
            s.clone(),
            AgentSpace::finite(2).unwrap(),
            RiskFamily::dilation_profile(RiskSpec::entropic(1.0).unwrap(), vec![1.0, 3.0]).unwrap(),
        )
        .unwrap();
        let alloc = optimal_allocation_dilated(&market, &x).unwrap();
        assert_eq!(alloc.row(0), &[1.0, -2.0]);
        assert_eq!(alloc.row(1), &[3.0, -6.0]);
        let v = value(&market, &x).unwrap().value;
        assert!((market.total_risk(&alloc).unwrap() - v).abs() < 1e-12);
        assert!(matches!(
            optimal_allocation_inflated(&market, &x),
            Err(Error::WrongFamily { .. })
        ));
    }

    #[test]
    fn inflated_allocation_with_weighted_argmin() {
        let s = space(&[0.4, 0.6]);
        let x = Rv::new(&s, vec![3.0, 0.0]).unwrap();
        let market = Market::new(
            s.clone(),
            AgentSpace::from_weights(&[1.0, 2.0, 1.0]).unwrap(),
            RiskFamily::inflation_profile(RiskSpec::expectation(), vec![2.0, 2.0, 5.0]).unwrap(),
        )
        .unwrap();
        let alloc = optimal_allocation_inflated(&market, &x).unwrap();
        assert_eq!(alloc.row(0), &[1.0, 0.0]);
        assert_eq!(alloc.row(1), &[1.0, 0.0]);
        assert_eq!(alloc.row(2), &[0.0, 0.0]);
        assert!(market.is_feasible(&alloc, &x, FEASIBILITY_TOL).unwrap());
        let es = RiskSpec::expected_shortfall(0.5)
            .unwrap()
            .rho(&s, &x)
            .unwrap();
        let r = value(&market, &x).unwrap();
        assert!((r.value - es).abs() < 1e-12);
        assert!((market.total_risk(&alloc).unwrap() - es).abs() < 1e-12);
    }

    #[test]
    fn acceptance_membership() {
        let s = space(&[0.5, 0.5]);
        let g = general(
            &s,
            &[1.0, 1.0],
            vec![
                RiskSpec::entropic(1.0).unwrap(),
                RiskSpec::expected_shortfall(0.5).unwrap(),
            ],
        );
        assert!(acceptance_member(&g, &Rv::zeros(2), 1e-9).unwrap());
        let x = Rv::new(&s, vec![2.0, -1.0]).unwrap();
        let v = value(&g, &x).unwrap().value;
        assert!(acceptance_member(&g, &x.shift(-v), 1e-9).unwrap());
        assert!(!acceptance_member(&g, &Rv::constant(&s, 10.0), 1e-9).unwrap());
    }

    #[test]
    fn aumann_samples_are_acceptable_and_deterministic() {
        let s = space(&[0.3, 0.7]);
        let g = general(
            &s,
            &[1.0, 0.5],
            vec![
                RiskSpec::entropic(0.8).unwrap(),
                RiskSpec::expected_shortfall(0.25).unwrap(),
            ],
        );
        let a = aumann_acceptance_sample(&g, 20, 7).unwrap();
        let b = aumann_acceptance_sample_with(&g, 20, 7, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        for y in &a {
            assert!(acceptance_member(&g, y, 1e-7).unwrap());
        }
        let zero = project_to_acceptance(&g, &Allocation::zeros(2, 2)).unwrap();
        assert!(zero.values().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn ill_posed_market() {
        let s = space(&[0.5, 0.5]);
        let d1 = Density::new(&s, vec![2.0, 0.0]).unwrap();
        let d2 = Density::new(&s, vec![0.0, 2.0]).unwrap();
        let g = general(
            &s,
            &[1.0, 1.0],
            vec![
                RiskSpec::scenario_set(vec![d1]).unwrap(),
                RiskSpec::scenario_set(vec![d2]).unwrap(),
            ],
        );
        let x = Rv::new(&s, vec![1.0, 0.0]).unwrap();
        assert_eq!(value(&g, &x), Err(Error::IllPosed));
    }

    #[test]
    fn nonattainment_examples() {
        let s = space(&[0.8, 0.2]);
        let x = Rv::new(&s, vec![0.0, 1.0]).unwrap();
        let profile = |t: f64| 2.0 + t;
        let r = nonattainment_experiment(
            &RiskSpec::expectation(),
            &profile,
            2.0,
            &s,
            &x,
            &[10, 100, 1000],
        )
        .unwrap();
        assert!(!r.vacuous);
        assert!(r.trend_holds());
        for row in &r.rows {
            // ES at α = 1/(2 + 1/(2N)) on a two-point loss is 0.2/α
            let want = 0.2 * (2.0 + 0.5 / row.atoms as f64) - 0.4;
            assert!((row.gap - want).abs() < 1e-12, "{row:?}");
        }

        let flat = nonattainment_experiment(
            &RiskSpec::expectation(),
            &profile,
            2.0,
            &s,
            &Rv::constant(&s, 1.0),
            &[10, 100],
        )
        .unwrap();
        assert!(flat.vacuous);
        assert!(flat.rows.iter().all(|r| r.gap.abs() < 1e-12));

        let touching = |t: f64| 2.0 + t - t;
        assert!(matches!(
            nonattainment_experiment(&RiskSpec::expectation(), &touching, 2.0, &s, &x, &[10]),
            Err(Error::Precondition(_))
        ));
    }
}

//! Convex risk measures on a finite space and their penalty functions.
//!
//! Every supported measure has a dual form
//! `ρ(x) = sup_q { E^q[x] − c·KL(q) : q ∈ C }` with a nonnegative entropic
//! coefficient `c` and a polyhedral set `C` of densities; see
//! [`RiskSpec::dual_form`]. Coherent variants have `c = 0`.

use std::fmt;

use crate::error::{Error, Result};
use crate::exec::{collect_ordered, map_auto};
use crate::opt::{
    entropic_capped_optimizer, hull_violation, lp_solve, DensityConstraints, Hull, HullKind,
    LpStatus,
};
use crate::prob::{Density, ProbSpace, Rv};

/// Cutoff between a zero and an infinite penalty for membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum RiskSpec {
    /// `γ log E[e^{x/γ}]`.
    Entropic { gamma: f64 },
    /// Average of the worst `α` probability mass of `x`.
    ExpectedShortfall { alpha: f64 },
    /// `max_{q ∈ D} E^q[x]` over a finite scenario set.
    ScenarioSet { densities: Vec<Density> },
    /// `γ·ρ(x/γ)`.
    Dilation { base: Box<RiskSpec>, gamma: f64 },
    /// Supremum of `E^q[x]` over densities dominated by `γ` times a density
    /// of the base scenario set.
    Inflation { base: Box<RiskSpec>, gamma: f64 },
}

/// A penalty value in `[0, ∞]` (or bounded below by `−ρ(0)` in general).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty {
    Finite(f64),
    Infinite,
}

impl Penalty {
    pub fn is_finite(self) -> bool {
        matches!(self, Penalty::Finite(_))
    }

    /// The value as an extended real.
    pub fn value(self) -> f64 {
        match self {
            Penalty::Finite(v) => v,
            Penalty::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Penalty::Finite(v) => Some(v),
            Penalty::Infinite => None,
        }
    }

    pub fn scale(self, w: f64) -> Penalty {
        match self {
            Penalty::Finite(v) => Penalty::Finite(w * v),
            Penalty::Infinite => Penalty::Infinite,
        }
    }
}

impl std::ops::Add for Penalty {
    type Output = Penalty;
    fn add(self, rhs: Penalty) -> Penalty {
        match (self, rhs) {
            (Penalty::Finite(a), Penalty::Finite(b)) => Penalty::Finite(a + b),
            _ => Penalty::Infinite,
        }
    }
}

impl fmt::Display for Penalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Penalty::Finite(v) => write!(f, "{v}"),
            Penalty::Infinite => f.write_str("inf"),
        }
    }
}

/// `ρ(x) = sup_{q ∈ constraints} E^q[x] − entropic·KL(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualForm {
    pub entropic: f64,
    pub constraints: DensityConstraints,
}

impl DualForm {
    pub fn is_coherent(&self) -> bool {
        self.entropic == 0.0
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

impl RiskSpec {
    pub fn entropic(gamma: f64) -> Result<Self> {
        check_positive("entropic gamma", gamma)?;
        Ok(RiskSpec::Entropic { gamma })
    }

    pub fn expected_shortfall(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "expected shortfall level must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(RiskSpec::ExpectedShortfall { alpha })
    }

    /// `E^P`, written as expected shortfall at level one.
    pub fn expectation() -> Self {
        RiskSpec::ExpectedShortfall { alpha: 1.0 }
    }

    pub fn scenario_set(densities: Vec<Density>) -> Result<Self> {
        let Some(first) = densities.first() else {
            return Err(Error::InvalidParameter("scenario set is empty".into()));
        };
        let n = first.len();
        if let Some(d) = densities.iter().find(|d| d.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: d.len(),
            });
        }
        Ok(RiskSpec::ScenarioSet { densities })
    }

    /// The `γ`-dilation `γ·ρ(x/γ)`. Positively homogeneous measures are
    /// returned unchanged.
    pub fn dilate(self, gamma: f64) -> Result<Self> {
        check_positive("dilation gamma", gamma)?;
        if self.is_coherent() {
            return Ok(self);
        }
        Ok(match self {
            RiskSpec::Dilation { base, gamma: g } => RiskSpec::Dilation {
                base,
                gamma: g * gamma,
            },
            other => RiskSpec::Dilation {
                base: Box::new(other),
                gamma,
            },
        })
    }

    /// The `γ`-inflation. The base must be a supremum of expectations over a
    /// scenario set (expected shortfall, a scenario set, or a dilation or
    /// inflation of one).
    pub fn inflate(self, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "inflation gamma must be at least 1, got {gamma}"
            )));
        }
        if !self.is_coherent() {
            return Err(Error::NotInflatable(self.kind_name().into()));
        }
        Ok(match self {
            // The inflation of an inflation multiplies the factors.
            RiskSpec::Inflation { base, gamma: g } => RiskSpec::Inflation {
                base,
                gamma: g * gamma,
            },
            RiskSpec::Dilation { base, .. } => RiskSpec::Inflation { base, gamma },
            other => RiskSpec::Inflation {
                base: Box::new(other),
                gamma,
            },
        })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            RiskSpec::Entropic { .. } => "entropic",
            RiskSpec::ExpectedShortfall { .. } => "expected shortfall",
            RiskSpec::ScenarioSet { .. } => "scenario set",
            RiskSpec::Dilation { .. } => "dilation",
            RiskSpec::Inflation { .. } => "inflation",
        }
    }

    /// Whether the penalty only takes the values 0 and ∞.
    pub fn is_coherent(&self) -> bool {
        match self {
            RiskSpec::Entropic { .. } => false,
            RiskSpec::ExpectedShortfall { .. } | RiskSpec::ScenarioSet { .. } => true,
            RiskSpec::Dilation { base, .. } | RiskSpec::Inflation { base, .. } => {
                base.is_coherent()
            }
        }
    }

    /// Structural validation of parameters, independent of any space.
    pub fn validate(&self) -> Result<()> {
        match self {
            RiskSpec::Entropic { gamma } => check_positive("entropic gamma", *gamma),
            RiskSpec::ExpectedShortfall { alpha } => {
                RiskSpec::expected_shortfall(*alpha).map(|_| ())
            }
            RiskSpec::ScenarioSet { densities } => {
                RiskSpec::scenario_set(densities.clone()).map(|_| ())
            }
            RiskSpec::Dilation { base, gamma } => {
                check_positive("dilation gamma", *gamma)?;
                base.validate()
            }
            RiskSpec::Inflation { base, gamma } => {
                if !(gamma.is_finite() && *gamma >= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "inflation gamma must be at least 1, got {gamma}"
                    )));
                }
                if !base.is_coherent() {
                    return Err(Error::NotInflatable(base.kind_name().into()));
                }
                base.validate()
            }
        }
    }

    fn check_space(&self, space: &ProbSpace) -> Result<()> {
        match self {
            RiskSpec::ScenarioSet { densities } => space.check_dim(densities[0].len()),
            RiskSpec::Dilation { base, .. } | RiskSpec::Inflation { base, .. } => {
                base.check_space(space)
            }
            _ => Ok(()),
        }
    }

    /// The dual representation of this measure on `space`.
    pub fn dual_form(&self, space: &ProbSpace) -> Result<DualForm> {
        self.validate()?;
        self.check_space(space)?;
        let n = space.len();
        Ok(match self {
            RiskSpec::Entropic { gamma } => DualForm {
                entropic: *gamma,
                constraints: DensityConstraints::default(),
            },
            RiskSpec::ExpectedShortfall { alpha } => {
                let mut c = DensityConstraints::default();
                if *alpha < 1.0 {
                    c.cap(&vec![1.0 / alpha; n]);
                } else {
                    c.cap(&vec![1.0; n]);
                }
                DualForm {
                    entropic: 0.0,
                    constraints: c,
                }
            }
            RiskSpec::ScenarioSet { densities } => {
                let mut c = DensityConstraints::default();
                if densities.len() == 1 {
                    // a single density: equality, i.e. q ≤ d with unit mass
                    c.cap(densities[0].values());
                } else {
                    c.push_hull(Hull {
                        scenarios: densities.iter().map(|d| d.values().to_vec()).collect(),
                        kind: HullKind::Member,
                    });
                }
                DualForm {
                    entropic: 0.0,
                    constraints: c,
                }
            }
            RiskSpec::Dilation { base, gamma } => {
                let mut f = base.dual_form(space)?;
                f.entropic *= gamma;
                f
            }
            RiskSpec::Inflation { base, gamma } => DualForm {
                entropic: 0.0,
                constraints: base.inflated_set(space, *gamma)?,
            },
        })
    }

    /// `γ·Q̃(self) ∩ M`: densities bounded by `γ` times some density of the
    /// scenario set.
    fn inflated_set(&self, space: &ProbSpace, gamma: f64) -> Result<DensityConstraints> {
        let n = space.len();
        match self {
            RiskSpec::ExpectedShortfall { alpha } => {
                let mut c = DensityConstraints::default();
                c.cap(&vec![gamma / alpha; n]);
                Ok(c)
            }
            RiskSpec::ScenarioSet { densities } => {
                let scenarios: Vec<Vec<f64>> =
                    densities.iter().map(|d| d.values().to_vec()).collect();
                let member = Hull {
                    scenarios: scenarios.clone(),
                    kind: HullKind::Member,
                };
                let ones = vec![1.0; n];
                if hull_violation(space, &member, &ones)? > MEMBERSHIP_TOL {
                    return Err(Error::NotInflatable(
                        "scenario set whose hull excludes the reference measure".into(),
                    ));
                }
                let mut c = DensityConstraints::default();
                c.push_hull(Hull {
                    scenarios,
                    kind: HullKind::Dominated { scale: gamma },
                });
                Ok(c)
            }
            RiskSpec::Dilation { base, .. } => base.inflated_set(space, gamma),
            RiskSpec::Inflation { base, gamma: g } => base.inflated_set(space, gamma * g),
            RiskSpec::Entropic { .. } => Err(Error::NotInflatable("entropic".into())),
        }
    }

    /// Evaluates `ρ(x)`.
    pub fn rho(&self, space: &ProbSpace, x: &Rv) -> Result<f64> {
        space.check_dim(x.len())?;
        self.validate()?;
        self.check_space(space)?;
        match self {
            RiskSpec::Entropic { gamma } => Ok(entropic_value(space, x, *gamma)),
            RiskSpec::ExpectedShortfall { alpha } => Ok(es_sorted(space, x, *alpha).0),
            RiskSpec::ScenarioSet { densities } => {
                let mut best = f64::NEG_INFINITY;
                for d in densities {
                    best = best.max(space.expect_under(d, x)?);
                }
                Ok(best)
            }
            RiskSpec::Dilation { base, gamma } => {
                Ok(gamma * base.rho(space, &x.scale(1.0 / gamma))?)
            }
            RiskSpec::Inflation { .. } => Ok(self.inflation_solve(space, x)?.0),
        }
    }

    /// Evaluates `ρ(x)` together with a density attaining the supremum in
    /// the dual representation.
    pub fn rho_with_optimizer(&self, space: &ProbSpace, x: &Rv) -> Result<(f64, Density)> {
        space.check_dim(x.len())?;
        self.validate()?;
        self.check_space(space)?;
        match self {
            RiskSpec::Entropic { gamma } => {
                let q = entropic_capped_optimizer(space, x, *gamma, None)?;
                Ok((entropic_value(space, x, *gamma), q))
            }
            RiskSpec::ExpectedShortfall { alpha } => {
                let (v, q) = es_sorted(space, x, *alpha);
                Ok((v, Density::normalized(space, q)?))
            }
            RiskSpec::ScenarioSet { densities } => {
                let mut best = (f64::NEG_INFINITY, 0);
                for (j, d) in densities.iter().enumerate() {
                    let v = space.expect_under(d, x)?;
                    if v > best.0 {
                        best = (v, j);
                    }
                }
                Ok((best.0, densities[best.1].clone()))
            }
            RiskSpec::Dilation { base, gamma } => {
                let (v, q) = base.rho_with_optimizer(space, &x.scale(1.0 / gamma))?;
                Ok((gamma * v, q))
            }
            RiskSpec::Inflation { .. } => self.inflation_solve(space, x),
        }
    }

    fn inflation_solve(&self, space: &ProbSpace, x: &Rv) -> Result<(f64, Density)> {
        let form = self.dual_form(space)?;
        let lp = form.constraints.lp(space, x.values());
        let sol = lp_solve(&lp)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::LpStatus(match sol.status {
                LpStatus::Infeasible => "infeasible",
                _ => "unbounded",
            }));
        }
        let q = Density::normalized(space, sol.point[..space.len()].to_vec())?;
        Ok((sol.value, q))
    }

    /// The convex conjugate `ρ*(q) = sup_x E^q[x] − ρ(x)`.
    pub fn conjugate(&self, space: &ProbSpace, q: &Density) -> Result<Penalty> {
        space.check_dim(q.len())?;
        let form = self.dual_form(space)?;
        if !in_constraints(space, &form.constraints, q)? {
            return Ok(Penalty::Infinite);
        }
        if form.entropic > 0.0 {
            Ok(Penalty::Finite(form.entropic * space.kl_divergence(q)?))
        } else {
            Ok(Penalty::Finite(0.0))
        }
    }
}

/// Membership of `q` in a constraint set at [`MEMBERSHIP_TOL`].
pub fn in_constraints(space: &ProbSpace, c: &DensityConstraints, q: &Density) -> Result<bool> {
    if let Some(u) = &c.upper {
        if q.values()
            .iter()
            .zip(u)
            .any(|(q, u)| q - u > MEMBERSHIP_TOL)
        {
            return Ok(false);
        }
    }
    for h in &c.hulls {
        if hull_violation(space, h, q.values())? > MEMBERSHIP_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `γ log Σ p_i e^{x_i/γ}` with max-shift stabilization.
fn entropic_value(space: &ProbSpace, x: &Rv, gamma: f64) -> f64 {
    let m = x.essup() / gamma;
    let s: f64 = space
        .probs()
        .iter()
        .zip(x.values())
        .map(|(p, v)| p * (v / gamma - m).exp())
        .sum();
    gamma * (m + s.ln())
}

/// Expected shortfall by the sorting rule: states by loss descending (ties by
/// index), full weight `1/α` until mass `α` is used up, fractional weight on
/// the boundary state. Returns the value and the extreme-point optimizer.
fn es_sorted(space: &ProbSpace, x: &Rv, alpha: f64) -> (f64, Vec<f64>) {
    let p = space.probs();
    let v = x.values();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    let mut q = vec![0.0; p.len()];
    let mut left = alpha;
    let mut acc = 0.0;
    for i in order {
        if left <= 0.0 {
            break;
        }
        let m = p[i].min(left);
        acc += m * v[i];
        q[i] = m / (alpha * p[i]);
        left -= m;
    }
    // Rounding can leave a sliver of mass unassigned at α = 1.
    (acc / (alpha - left), q)
}

/// Evaluates `ρ̃_γ(x)` of `spec` for each `γ` in an ascending grid.
pub fn left_continuity_sweep(
    spec: &RiskSpec,
    space: &ProbSpace,
    x: &Rv,
    gammas: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if let Some(g) = gammas.iter().find(|g| !(g.is_finite() && **g >= 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "sweep grid value {g} is below 1"
        )));
    }
    if gammas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "sweep grid must be ascending".into(),
        ));
    }
    let rows = map_auto(gammas.len(), |k| {
        let g = gammas[k];
        spec.clone().inflate(g)?.rho(space, x).map(|v| (g, v))
    });
    collect_ordered(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(p: &[f64]) -> ProbSpace {
        ProbSpace::new(p.to_vec()).unwrap()
    }

    fn rv(s: &ProbSpace, v: &[f64]) -> Rv {
        Rv::new(s, v.to_vec()).unwrap()
    }

    #[test]
    fn entropic_constant_and_closed_form() {
        let s = space(&[0.5, 0.5]);
        let e = RiskSpec::entropic(1.7).unwrap();
        assert!((e.rho(&s, &Rv::constant(&s, 2.5)).unwrap() - 2.5).abs() < 1e-14);
        let x = rv(&s, &[0.0, 1.0]);
        let e1 = RiskSpec::entropic(1.0).unwrap();
        // direct evaluation of the defining sum as cross-check
        let direct = (0.5 * 0f64.exp() + 0.5 * 1f64.exp()).ln();
        let expected = ((1.0 + std::f64::consts::E) / 2.0).ln();
        let got = e1.rho(&s, &x).unwrap();
        assert!((got - expected).abs() < 1e-15);
        assert!((got - direct).abs() < 1e-15);
    }

    #[test]
    fn entropic_is_stable_for_small_gamma() {
        let s = space(&[0.5, 0.5]);
        let x = rv(&s, &[0.0, 1000.0]);
        let v = RiskSpec::entropic(1e-3).unwrap().rho(&s, &x).unwrap();
        assert!((v - (1000.0 + 1e-3 * 0.5f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn expected_shortfall_examples() {
        let s = space(&[0.5, 0.5]);
        let x = rv(&s, &[0.0, 1.0]);
        assert_eq!(
            RiskSpec::expected_shortfall(0.5)
                .unwrap()
                .rho(&s, &x)
                .unwrap(),
            1.0
        );
        let s3 = space(&[0.2, 0.3, 0.5]);
        let y = rv(&s3, &[1.0, 5.0, -2.0]);
        assert!(
            (RiskSpec::expectation().rho(&s3, &y).unwrap() - s3.expect(&y).unwrap()).abs() < 1e-15
        );
        // ES(0.4): all of state 1 (0.3) and 0.1 of state 0
        let v = RiskSpec::expected_shortfall(0.4)
            .unwrap()
            .rho(&s3, &y)
            .unwrap();
        assert!((v - (0.3 * 5.0 + 0.1 * 1.0) / 0.4).abs() < 1e-14);
        assert!(RiskSpec::expected_shortfall(0.0).is_err());
        assert!(RiskSpec::expected_shortfall(1.5).is_err());
    }

    #[test]
    fn es_optimizer_is_an_extreme_point() {
        let s = space(&[0.25, 0.25, 0.25, 0.25]);
        let x = rv(&s, &[1.0, 1.0, 0.0, 2.0]);
        let (v, q) = RiskSpec::expected_shortfall(0.6)
            .unwrap()
            .rho_with_optimizer(&s, &x)
            .unwrap();
        // ties broken by index: state 0 full, state 1 fractional
        let cap = 1.0 / 0.6;
        assert!((q.values()[3] - cap).abs() < 1e-12);
        assert!((q.values()[0] - cap).abs() < 1e-12);
        assert!((q.values()[1] - 0.1 / (0.6 * 0.25)).abs() < 1e-12);
        assert_eq!(q.values()[2], 0.0);
        assert!((s.expect_under(&q, &x).unwrap() - v).abs() < 1e-14);
    }

    #[test]
    fn conjugate_examples() {
        let s = space(&[0.5, 0.5]);
        let q = Density::new(&s, vec![0.0, 2.0]).unwrap();
        let e = RiskSpec::entropic(2.0).unwrap();
        assert!((e.conjugate(&s, &q).unwrap().value() - 2.0 * 2f64.ln()).abs() < 1e-15);
        let es = RiskSpec::expected_shortfall(0.5).unwrap();
        assert_eq!(es.conjugate(&s, &q).unwrap(), Penalty::Finite(0.0));
        assert_eq!(
            es.conjugate(&s, &s.base_density()).unwrap(),
            Penalty::Finite(0.0)
        );
        let s3 = space(&[0.2, 0.3, 0.5]);
        let q3 = Density::new(&s3, vec![3.0, 1.0, 0.2]).unwrap();
        let es = RiskSpec::expected_shortfall(0.5).unwrap();
        assert_eq!(es.conjugate(&s3, &q3).unwrap(), Penalty::Infinite);
    }

    #[test]
    fn scenario_set_membership_penalty() {
        let s = space(&[0.5, 0.5]);
        let d1 = Density::new(&s, vec![1.5, 0.5]).unwrap();
        let set = RiskSpec::scenario_set(vec![s.base_density(), d1]).unwrap();
        let inside = Density::new(&s, vec![1.25, 0.75]).unwrap();
        let outside = Density::new(&s, vec![0.5, 1.5]).unwrap();
        assert_eq!(set.conjugate(&s, &inside).unwrap(), Penalty::Finite(0.0));
        assert_eq!(set.conjugate(&s, &outside).unwrap(), Penalty::Infinite);
        let x = rv(&s, &[2.0, 0.0]);
        assert!((set.rho(&s, &x).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn dilation_examples() {
        let s = space(&[0.2, 0.3, 0.5]);
        let x = rv(&s, &[1.0, -0.5, 3.0]);
        let dilated = RiskSpec::entropic(1.0).unwrap().dilate(2.5).unwrap();
        let direct = RiskSpec::entropic(2.5).unwrap();
        assert!((dilated.rho(&s, &x).unwrap() - direct.rho(&s, &x).unwrap()).abs() < 1e-14);

        let set = RiskSpec::scenario_set(vec![s.base_density()]).unwrap();
        assert_eq!(set.clone().dilate(5.0).unwrap(), set);

        let e = RiskSpec::entropic(0.7).unwrap();
        let once = e.clone().dilate(1.0).unwrap();
        assert!((once.rho(&s, &x).unwrap() - e.rho(&s, &x).unwrap()).abs() < 1e-15);
        assert!(e.dilate(0.0).is_err());
    }

    #[test]
    fn inflation_of_expectation_is_expected_shortfall() {
        let s = space(&[0.1, 0.2, 0.3, 0.4]);
        let x = rv(&s, &[4.0, -1.0, 2.0, 0.5]);
        for g in [1.0, 1.5, 2.0, 3.0, 7.0, 12.0] {
            let base = RiskSpec::scenario_set(vec![s.base_density()]).unwrap();
            let infl = base.inflate(g).unwrap().rho(&s, &x).unwrap();
            let es = RiskSpec::expected_shortfall(1.0 / g)
                .unwrap()
                .rho(&s, &x)
                .unwrap();
            assert!((infl - es).abs() < 1e-12, "γ={g}: {infl} vs {es}");
            let infl_es = RiskSpec::expectation()
                .inflate(g)
                .unwrap()
                .rho(&s, &x)
                .unwrap();
            assert!((infl_es - es).abs() < 1e-12);
        }
    }

    #[test]
    fn inflation_rejects_entropic_and_small_gamma() {
        assert!(matches!(
            RiskSpec::entropic(1.0).unwrap().inflate(2.0),
            Err(Error::NotInflatable(_))
        ));
        assert!(matches!(
            RiskSpec::entropic(1.0)
                .unwrap()
                .dilate(2.0)
                .unwrap()
                .inflate(2.0),
            Err(Error::NotInflatable(_))
        ));
        assert!(RiskSpec::expectation().inflate(0.5).is_err());
    }

    #[test]
    fn inflation_conjugate_membership() {
        let s = space(&[0.5, 0.5]);
        let infl = RiskSpec::expectation().inflate(2.0).unwrap();
        let q = Density::new(&s, vec![0.0, 2.0]).unwrap();
        assert_eq!(infl.conjugate(&s, &q).unwrap(), Penalty::Finite(0.0));
        let s3 = space(&[0.2, 0.3, 0.5]);
        let q3 = Density::new(&s3, vec![3.0, 1.0, 0.2]).unwrap();
        assert_eq!(
            RiskSpec::expectation()
                .inflate(2.0)
                .unwrap()
                .conjugate(&s3, &q3)
                .unwrap(),
            Penalty::Infinite
        );
        assert_eq!(
            RiskSpec::expectation()
                .inflate(3.0)
                .unwrap()
                .conjugate(&s3, &q3)
                .unwrap(),
            Penalty::Finite(0.0)
        );
    }

    #[test]
    fn inflation_of_scenario_set_without_reference_measure_is_rejected() {
        let s = space(&[0.5, 0.5]);
        let d = Density::new(&s, vec![2.0, 0.0]).unwrap();
        let spec = RiskSpec::scenario_set(vec![d])
            .unwrap()
            .inflate(2.0)
            .unwrap();
        assert!(matches!(
            spec.rho(&s, &rv(&s, &[0.0, 1.0])),
            Err(Error::NotInflatable(_))
        ));
    }

    #[test]
    fn sweep_reproduces_es_curve_and_saturates() {
        let s = space(&[0.6, 0.3, 0.1]);
        let x = rv(&s, &[0.0, 1.0, 3.0]);
        let grid: Vec<f64> = (0..=40).map(|k| 1.0 + 0.25 * k as f64).collect();
        let sweep = left_continuity_sweep(&RiskSpec::expectation(), &s, &x, &grid).unwrap();
        let mut saturated = false;
        for w in sweep.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12);
        }
        for &(g, v) in &sweep {
            let es = RiskSpec::expected_shortfall(1.0 / g)
                .unwrap()
                .rho(&s, &x)
                .unwrap();
            assert!((v - es).abs() < 1e-12);
            if saturated {
                assert!((v - x.essup()).abs() < 1e-12);
            }
            saturated |= (v - x.essup()).abs() < 1e-12;
        }
        assert!(saturated);
        let flat =
            left_continuity_sweep(&RiskSpec::expectation(), &s, &Rv::constant(&s, 1.5), &grid)
                .unwrap();
        assert!(flat.iter().all(|(_, v)| (v - 1.5).abs() < 1e-12));
        assert!(left_continuity_sweep(&RiskSpec::expectation(), &s, &x, &[0.5]).is_err());
    }

    #[test]
    fn dimension_checks() {
        let s = space(&[0.5, 0.5]);
        let x = Rv::from_values(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            RiskSpec::entropic(1.0).unwrap().rho(&s, &x),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}

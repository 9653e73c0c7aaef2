//! Market specification files (TOML). The schema is documented in
//! `docs/spec-format.md`.

use serde::Deserialize;

use riskshare::{AgentSpace, Atom, Density, Market, ProbSpace, RiskFamily, RiskSpec, Rv};

/// A validation failure pointing at the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl std::error::Error for SpecError {}

fn err(field: impl Into<String>, message: impl std::fmt::Display) -> SpecError {
    SpecError {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub probs: Vec<f64>,
    pub loss: Vec<f64>,
    #[serde(default)]
    pub agents: Vec<AgentEntry>,
    pub profile: Option<ProfileEntry>,
    /// Risk measure swept by the `sweep` command when no profile is given.
    pub base: Option<RiskEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub label: Option<String>,
    pub weight: f64,
    pub risk: RiskEntry,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RiskEntry {
    Entropic { gamma: f64 },
    Es { alpha: f64 },
    Expectation,
    ScenarioSet { densities: Vec<Vec<f64>> },
    Dilation { gamma: f64, base: Box<RiskEntry> },
    Inflation { gamma: f64, base: Box<RiskEntry> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Dilation,
    Inflation,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileEntry {
    pub kind: ProfileKind,
    pub base: RiskEntry,
    pub target_gamma: Option<f64>,
    #[serde(default)]
    pub agents: Vec<ProfileAgent>,
    pub generator: Option<Generator>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileAgent {
    pub label: Option<String>,
    pub weight: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorSpace {
    Finite,
    Aumann,
    Shapley,
}

/// Agents at positions `t ∈ [0, 1]` with `γ(t) = gamma_offset + gamma_slope·t`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub space: GeneratorSpace,
    pub n: usize,
    pub gamma_offset: f64,
    #[serde(default)]
    pub gamma_slope: f64,
}

impl Generator {
    pub fn gamma_at(&self, t: f64) -> f64 {
        self.gamma_offset + self.gamma_slope * t
    }
}

/// A parsed and validated specification.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub file: SpecFile,
    pub space: ProbSpace,
    pub loss: Rv,
    pub market: Option<Market>,
}

pub fn parse(text: &str) -> Result<SpecFile, SpecError> {
    toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let field = match e.span() {
            Some(span) => format!("line {}", text[..span.start].lines().count().max(1)),
            None => "spec".to_string(),
        };
        err(field, message)
    })
}

pub fn load(text: &str) -> Result<Loaded, SpecError> {
    let file = parse(text)?;
    let space = ProbSpace::new(file.probs.clone()).map_err(|e| err("probs", e))?;
    let loss = Rv::new(&space, file.loss.clone()).map_err(|e| err("loss", e))?;
    let market = match (&file.profile, file.agents.is_empty()) {
        (Some(_), false) => {
            return Err(err(
                "agents",
                "give either [[agents]] or [profile], not both",
            ))
        }
        (Some(p), true) => Some(profile_market(&space, p)?),
        (None, false) => Some(agents_market(&space, &file.agents)?),
        (None, true) => None,
    };
    if let Some(base) = &file.base {
        risk(&space, base, "base")?;
    }
    Ok(Loaded {
        file,
        space,
        loss,
        market,
    })
}

fn label_of(label: &Option<String>, i: usize) -> String {
    label.clone().unwrap_or_else(|| format!("a{}", i + 1))
}

fn check_weight(w: f64, field: &str) -> Result<(), SpecError> {
    if w.is_finite() && w > 0.0 {
        Ok(())
    } else {
        Err(err(
            field,
            format!("weight must be positive and finite, got {w}"),
        ))
    }
}

pub fn risk(space: &ProbSpace, entry: &RiskEntry, field: &str) -> Result<RiskSpec, SpecError> {
    let spec = match entry {
        RiskEntry::Entropic { gamma } => RiskSpec::entropic(*gamma),
        RiskEntry::Es { alpha } => RiskSpec::expected_shortfall(*alpha),
        RiskEntry::Expectation => Ok(RiskSpec::expectation()),
        RiskEntry::ScenarioSet { densities } => {
            let ds = densities
                .iter()
                .enumerate()
                .map(|(k, d)| {
                    Density::new(space, d.clone())
                        .map_err(|e| err(format!("{field}.densities[{k}]"), e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            RiskSpec::scenario_set(ds)
        }
        RiskEntry::Dilation { gamma, base } => {
            let b = risk(space, base, &format!("{field}.base"))?;
            RiskSpec::dilate(b, *gamma)
        }
        RiskEntry::Inflation { gamma, base } => {
            let b = risk(space, base, &format!("{field}.base"))?;
            RiskSpec::inflate(b, *gamma)
        }
    }
    .map_err(|e| err(field, e))?;
    spec.dual_form(space).map_err(|e| err(field, e))?;
    Ok(spec)
}

fn agents_market(space: &ProbSpace, agents: &[AgentEntry]) -> Result<Market, SpecError> {
    let mut atoms = Vec::with_capacity(agents.len());
    let mut specs = Vec::with_capacity(agents.len());
    for (i, a) in agents.iter().enumerate() {
        let label = label_of(&a.label, i);
        let field = format!("agents[{i}] ({label})");
        check_weight(a.weight, &format!("{field}.weight"))?;
        specs.push(risk(space, &a.risk, &format!("{field}.risk"))?);
        atoms.push(Atom {
            label,
            weight: a.weight,
            position: None,
        });
    }
    let agents = AgentSpace::new(atoms).map_err(|e| err("agents", e))?;
    let family = RiskFamily::general(specs).map_err(|e| err("agents", e))?;
    Market::new(space.clone(), agents, family).map_err(|e| err("agents", e))
}

fn profile_market(space: &ProbSpace, p: &ProfileEntry) -> Result<Market, SpecError> {
    let base = risk(space, &p.base, "profile.base")?;
    let (agents, gammas) = match (&p.generator, p.agents.is_empty()) {
        (Some(_), false) => {
            return Err(err(
                "profile",
                "give either [[profile.agents]] or [profile.generator], not both",
            ))
        }
        (None, true) => {
            return Err(err(
                "profile",
                "no agents: add [[profile.agents]] or [profile.generator]",
            ))
        }
        (None, false) => {
            let mut atoms = Vec::new();
            let mut gammas = Vec::new();
            for (i, a) in p.agents.iter().enumerate() {
                let label = label_of(&a.label, i);
                check_weight(a.weight, &format!("profile.agents[{i}] ({label}).weight"))?;
                gammas.push(a.gamma);
                atoms.push(Atom {
                    label,
                    weight: a.weight,
                    position: None,
                });
            }
            (
                AgentSpace::new(atoms).map_err(|e| err("profile.agents", e))?,
                gammas,
            )
        }
        (Some(g), true) => generated(g)?,
    };
    for (a, g) in agents.atoms().iter().zip(&gammas) {
        let bad = match p.kind {
            ProfileKind::Dilation => !(g.is_finite() && *g > 0.0),
            ProfileKind::Inflation => !(g.is_finite() && *g >= 1.0),
        };
        if bad {
            return Err(err(
                format!("profile agent {}", a.label),
                format!("gamma {g} out of range for a {:?} profile", p.kind).to_lowercase(),
            ));
        }
    }
    let family = match p.kind {
        ProfileKind::Dilation => RiskFamily::dilation_profile(base, gammas),
        ProfileKind::Inflation => RiskFamily::inflation_profile(base, gammas),
    }
    .map_err(|e| err("profile", e))?;
    let market = Market::new(space.clone(), agents, family).map_err(|e| err("profile", e))?;
    match (p.kind, p.target_gamma) {
        (ProfileKind::Inflation, Some(t)) => {
            if !(t.is_finite() && t >= 1.0) {
                return Err(err(
                    "profile.target_gamma",
                    format!("must be at least 1, got {t}"),
                ));
            }
            market
                .with_target_gamma(t)
                .map_err(|e| err("profile.target_gamma", e))
        }
        (ProfileKind::Dilation, Some(_)) => Err(err(
            "profile.target_gamma",
            "only inflation profiles take a target",
        )),
        (_, None) => Ok(market),
    }
}

fn generated(g: &Generator) -> Result<(AgentSpace, Vec<f64>), SpecError> {
    if g.n == 0 {
        return Err(err("profile.generator.n", "must be at least 1"));
    }
    let agents = match g.space {
        GeneratorSpace::Finite => AgentSpace::finite(g.n),
        GeneratorSpace::Aumann => AgentSpace::aumann(g.n),
        GeneratorSpace::Shapley => AgentSpace::shapley(g.n),
    }
    .map_err(|e| err("profile.generator", e))?;
    let n = g.n as f64;
    let gammas = agents
        .atoms()
        .iter()
        .enumerate()
        .map(|(k, a)| g.gamma_at(a.position.unwrap_or((k + 1) as f64 / n)))
        .collect();
    Ok((agents, gammas))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_weight_names_the_atom() {
        let text = r#"
probs = [0.5, 0.5]
loss = [1.0, 0.0]
[[agents]]
label = "alice"
weight = 1.0
risk = { type = "entropic", gamma = 1.0 }
[[agents]]
label = "bob"
weight = -2.0
risk = { type = "es", alpha = 0.5 }
"#;
        let e = load(text).unwrap_err();
        assert_eq!(e.field, "agents[1] (bob).weight");
    }

    #[test]
    fn generator_profile() {
        let text = r#"
probs = [0.8, 0.2]
loss = [0.0, 1.0]
[profile]
kind = "inflation"
base = { type = "expectation" }
target_gamma = 2.0
[profile.generator]
space = "aumann"
n = 4
gamma_offset = 2.0
gamma_slope = 1.0
"#;
        let l = load(text).unwrap();
        let m = l.market.unwrap();
        assert_eq!(m.agents().len(), 4);
        assert_eq!(m.kind().name(), "inflation");
    }

    #[test]
    fn nested_risk_entries() {
        let text = r#"
probs = [0.5, 0.5]
loss = [1.0, 0.0]
[[agents]]
weight = 1.0
risk = { type = "inflation", gamma = 2.0, base = { type = "scenario_set", densities = [[1.0, 1.0], [1.5, 0.5]] } }
[[agents]]
weight = 1.0
risk = { type = "dilation", gamma = 3.0, base = { type = "entropic", gamma = 1.0 } }
"#;
        assert!(load(text).unwrap().market.is_some());
        assert!(parse("probs = [1.0]\nloss = [1.0]\nbogus = 1\n").is_err());
    }
}

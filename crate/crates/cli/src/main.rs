#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod spec;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use riskshare::convolution::{aumann_acceptance_sample, FamilyKind};
use riskshare::{
    left_continuity_sweep, nonattainment_experiment, pareto_check, value, Allocation, Error,
    Market, PARETO_TOL,
};

use spec::{Loaded, ProfileKind, SpecError};

#[derive(Parser)]
#[command(
    name = "riskshare",
    version,
    about = "Optimal risk sharing among a space of agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal aggregate risk of the loss, with allocation when known.
    Value {
        #[command(flatten)]
        common: Common,
        /// Draw this many acceptance-set samples and report their worst value.
        #[arg(long, default_value_t = 0)]
        samples: usize,
    },
    /// Optimal allocation for dilation and inflation profiles.
    Allocate {
        #[command(flatten)]
        common: Common,
    },
    /// Pareto verdict for a given allocation.
    Pareto {
        #[command(flatten)]
        common: Common,
        /// JSON file with an `allocation` matrix (atoms × states) or a bare matrix.
        #[arg(long)]
        alloc: PathBuf,
        #[arg(long, default_value_t = PARETO_TOL)]
        tol: f64,
    },
    /// Inflated risk over a grid of inflation levels (CSV).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        gamma_grid: Vec<f64>,
    },
    /// Discrete values against the continuum limit under refinement (CSV).
    Nonattain {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_values_t = [10usize, 100, 1000])]
        refinements: Vec<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML problem file (see docs/spec-format.md)
    #[arg(long)]
    spec: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for sampled acceptance checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock time in the output (makes it non-reproducible).
    #[arg(long)]
    timing: bool,
}

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NONCONVERGENCE: u8 = 3;
const EXIT_ILL_POSED: u8 = 4;
const EXIT_UNSUPPORTED: u8 = 5;

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        Failure {
            code: EXIT_VALIDATION,
            message: e.to_string(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonConvergence { .. } | Error::IterationCap(_) | Error::LpStatus(_) => {
                EXIT_NONCONVERGENCE
            }
            Error::IllPosed => EXIT_ILL_POSED,
            _ => EXIT_VALIDATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_IO,
        message: format!("{}: {e}", path.display()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Certificate {
    total_risk: f64,
    value: f64,
    gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Verdict {
    verdict: String,
    excess: f64,
    total_risk: f64,
    tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    witness: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct AcceptanceCheck {
    samples: usize,
    seed: u64,
    max_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ResultRecord {
    command: String,
    input_digest: String,
    family: String,
    value: f64,
    attainment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    duality_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    allocation: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dual_optimizer: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    certificate: Option<Certificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pareto: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    acceptance: Option<AcceptanceCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timing_ms: Option<f64>,
}

fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            h.update([0u8]);
        }
        h.update(p);
    }
    hex::encode(h.finalize())
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| io_failure(path, e))
}

fn load(bytes: &[u8], path: &Path) -> Result<Loaded, Failure> {
    let text = std::str::from_utf8(bytes).map_err(|e| io_failure(path, e))?;
    Ok(spec::load(text)?)
}

fn market(loaded: &Loaded) -> Result<&Market, Failure> {
    loaded.market.as_ref().ok_or_else(|| {
        Failure::from(SpecError {
            field: "agents".into(),
            message: "the command needs [[agents]] or [profile]".into(),
        })
    })
}

fn emit(out: &Option<PathBuf>, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| io_failure(path, e)),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn emit_record(common: &Common, mut record: ResultRecord, started: Instant) -> Result<(), Failure> {
    if common.timing {
        record.timing_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    let mut body = serde_json::to_string_pretty(&record).expect("records serialize");
    body.push('\n');
    emit(&common.out, &body)
}

/// 17 significant digits, enough to round-trip any f64.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

fn labels(m: &Market) -> Vec<String> {
    m.agents().atoms().iter().map(|a| a.label.clone()).collect()
}

fn cmd_value(common: &Common, samples: usize) -> Result<(), Failure> {
    let started = Instant::now();
    let bytes = read(&common.spec)?;
    let loaded = load(&bytes, &common.spec)?;
    let m = market(&loaded)?;
    let r = value(m, &loaded.loss)?;
    let acceptance = if samples > 0 {
        let ys = aumann_acceptance_sample(m, samples, common.seed)?;
        let mut worst = f64::NEG_INFINITY;
        for y in &ys {
            worst = worst.max(value(m, y)?.value);
        }
        Some(AcceptanceCheck {
            samples,
            seed: common.seed,
            max_value: worst,
        })
    } else {
        None
    };
    let record = ResultRecord {
        command: "value".into(),
        input_digest: digest(&[&bytes]),
        family: m.kind().name().into(),
        value: r.value,
        attainment: r.attained.as_str().into(),
        duality_gap: finite(r.duality_gap),
        labels: r.allocation.as_ref().map(|_| labels(m)),
        allocation: r.allocation.map(Allocation::into_rows),
        dual_optimizer: r.dual_optimizer.map(|q| q.values().to_vec()),
        certificate: None,
        pareto: None,
        acceptance,
        timing_ms: None,
    };
    emit_record(common, record, started)
}

fn cmd_allocate(common: &Common) -> Result<(), Failure> {
    let started = Instant::now();
    let bytes = read(&common.spec)?;
    let loaded = load(&bytes, &common.spec)?;
    let m = market(&loaded)?;
    if matches!(m.kind(), FamilyKind::General) {
        return Err(Failure {
            code: EXIT_UNSUPPORTED,
            message: "optimal allocations are only available for dilation and inflation profiles"
                .into(),
        });
    }
    let r = value(m, &loaded.loss)?;
    let alloc = r.allocation.expect("profile families return an allocation");
    let total = m.total_risk(&alloc)?;
    let record = ResultRecord {
        command: "allocate".into(),
        input_digest: digest(&[&bytes]),
        family: m.kind().name().into(),
        value: r.value,
        attainment: r.attained.as_str().into(),
        duality_gap: finite(r.duality_gap),
        labels: Some(labels(m)),
        allocation: Some(alloc.into_rows()),
        dual_optimizer: None,
        certificate: Some(Certificate {
            total_risk: total,
            value: r.value,
            gap: total - r.value,
        }),
        pareto: None,
        acceptance: None,
        timing_ms: None,
    };
    emit_record(common, record, started)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AllocFile {
    Record { allocation: Vec<Vec<f64>> },
    Bare(Vec<Vec<f64>>),
}

fn cmd_pareto(common: &Common, alloc_path: &Path, tol: f64) -> Result<(), Failure> {
    let started = Instant::now();
    let bytes = read(&common.spec)?;
    let alloc_bytes = read(alloc_path)?;
    let loaded = load(&bytes, &common.spec)?;
    let m = market(&loaded)?;
    let rows = match serde_json::from_slice::<AllocFile>(&alloc_bytes) {
        Ok(AllocFile::Record { allocation } | AllocFile::Bare(allocation)) => allocation,
        Err(e) => {
            return Err(Failure {
                code: EXIT_VALIDATION,
                message: format!("{}: {e}", alloc_path.display()),
            })
        }
    };
    let alloc = Allocation::new(rows)?;
    let v = pareto_check(m, &loaded.loss, &alloc, tol)?;
    let record = ResultRecord {
        command: "pareto".into(),
        input_digest: digest(&[&bytes, &alloc_bytes]),
        family: m.kind().name().into(),
        value: v.value,
        attainment: "n/a".into(),
        duality_gap: None,
        labels: Some(labels(m)),
        allocation: Some(alloc.into_rows()),
        dual_optimizer: None,
        certificate: None,
        pareto: Some(Verdict {
            verdict: if v.efficient {
                "efficient"
            } else {
                "inefficient"
            }
            .into(),
            excess: v.excess,
            total_risk: v.total_risk,
            tolerance: tol,
            witness: v.witness.map(Allocation::into_rows),
        }),
        acceptance: None,
        timing_ms: None,
    };
    emit_record(common, record, started)
}

fn csv(rows: impl IntoIterator<Item = (String, f64, f64)>) -> String {
    let mut out = String::from("parameter,value,gap\n");
    for (p, v, g) in rows {
        out.push_str(&format!("{p},{},{}\n", num(v), num(g)));
    }
    out
}

fn cmd_sweep(common: &Common, grid: &[f64]) -> Result<(), Failure> {
    let bytes = read(&common.spec)?;
    let loaded = load(&bytes, &common.spec)?;
    let entry = match (&loaded.file.profile, &loaded.file.base) {
        (_, Some(b)) => (b, "base"),
        (Some(p), None) => (&p.base, "profile.base"),
        (None, None) => {
            return Err(SpecError {
                field: "base".into(),
                message: "sweep needs a top-level `base` or a [profile]".into(),
            }
            .into())
        }
    };
    let base = spec::risk(&loaded.space, entry.0, entry.1)?;
    let values = left_continuity_sweep(&base, &loaded.space, &loaded.loss, grid)?;
    let mut prev = None;
    let rows = values.into_iter().map(|(g, v)| {
        let step = prev.map_or(0.0, |p| v - p);
        prev = Some(v);
        (num(g), v, step)
    });
    emit(&common.out, &csv(rows.collect::<Vec<_>>()))
}

fn cmd_nonattain(common: &Common, refinements: &[usize]) -> Result<(), Failure> {
    let bytes = read(&common.spec)?;
    let loaded = load(&bytes, &common.spec)?;
    let precondition = |message: &str| -> Failure {
        SpecError {
            field: "profile".into(),
            message: message.into(),
        }
        .into()
    };
    let profile = loaded
        .file
        .profile
        .as_ref()
        .filter(|p| p.kind == ProfileKind::Inflation)
        .ok_or_else(|| precondition("nonattain needs an inflation [profile]"))?;
    let generator = profile
        .generator
        .as_ref()
        .ok_or_else(|| precondition("nonattain needs a [profile.generator]"))?;
    if !(generator.gamma_slope > 0.0) {
        return Err(precondition(
            "the generator slope must be positive so the infimum is not attained",
        ));
    }
    let gamma_inf = profile.target_gamma.unwrap_or(generator.gamma_offset);
    let base = spec::risk(&loaded.space, &profile.base, "profile.base")?;
    let gamma = |t: f64| generator.gamma_at(t);
    let report = nonattainment_experiment(
        &base,
        &gamma,
        gamma_inf,
        &loaded.space,
        &loaded.loss,
        refinements,
    )?;
    if report.vacuous {
        eprintln!("note: the inflated risk of the loss is constant beyond {gamma_inf}; the experiment is vacuous");
    }
    let rows = report
        .rows
        .iter()
        .map(|r| (r.atoms.to_string(), r.value, r.gap));
    emit(&common.out, &csv(rows.collect::<Vec<_>>()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Value { common, samples } => cmd_value(common, *samples),
        Command::Allocate { common } => cmd_allocate(common),
        Command::Pareto { common, alloc, tol } => cmd_pareto(common, alloc, *tol),
        Command::Sweep { common, gamma_grid } => cmd_sweep(common, gamma_grid),
        Command::Nonattain {
            common,
            refinements,
        } => cmd_nonattain(common, refinements),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

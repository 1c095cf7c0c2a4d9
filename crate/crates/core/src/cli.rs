//! Command-line front end: builds the requested objects, runs their checks
//! and renders a [`RunReport`].
//!
//! The mathematical payload (outputs and checks) is deterministic; timing is
//! reported separately and excluded from the payload digest.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::compose::{
    arrangement_pullback, compose, normal_crossing_adjoint, spec_source, target_ring, ComposeError, ComposeSpec,
    TargetPair,
};
use crate::derivations::{verify_saito, Derivation, FreenessCertificate, SaitoError, SaitoMatrix};
use crate::discriminant::{self as disc, DiscError};
use crate::format::{matrix_from_text, matrix_to_text, poly_from_text, poly_to_text, FormatError, MatrixRecord, PolyRecord};
use crate::parse::parse_polynomial;
use crate::polyring::{Coeff, Polynomial};
use crate::report::CheckReport;
use crate::stablemap::{self as stable, StableError};

pub const DEFAULT_SEED: u64 = 1;

/// Largest `k` for which `stable --emit certify` also certifies a random
/// generic adjoint.
const GENERIC_ADJOINT_MAX_K: usize = 3;

#[derive(Debug, Parser)]
#[command(name = "freediv", version, about = "Construct free divisors and certify them by Saito's criterion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Highest field weight searched when solving for logarithmic fields.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub max_weight: Option<i64>,
    /// Seed for generic-adjoint constants and basis search.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Image of the corank-1 stable germ of multiplicity k.
    Stable {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        k: u64,
        #[arg(long, value_enum)]
        emit: StableEmit,
    },
    /// Discriminant of the versal deformation of x^(mu+1).
    Disc {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        mu: u64,
        #[arg(long, value_enum)]
        emit: DiscEmit,
    },
    /// Composite divisor described by a TOML spec.
    Compose { spec: PathBuf },
    /// Checks Saito's criterion for an equation and a matrix whose columns are fields.
    Verify { equation: PathBuf, fields: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StableEmit {
    Germ,
    Lambda,
    Equation,
    Minors,
    Adjoint,
    Hl,
    Checks,
    Certify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DiscEmit {
    Unfolding,
    Lambda,
    Discriminant,
    Adjoint,
    Lemma5,
    D0,
    Certify,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error("{path}: {source}")]
    Spec { path: String, source: toml::de::Error },
    #[error(transparent)]
    Stable(#[from] StableError),
    #[error(transparent)]
    Disc(#[from] DiscError),
    #[error(transparent)]
    Compose(#[from] ComposeError),
    #[error(transparent)]
    Saito(#[from] SaitoError),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// One emitted object, as canonical text and as a structured record.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Artifact {
    pub name: String,
    pub text: String,
    pub record: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    /// SHA-256 of the command echo followed by the contents of input files.
    pub input_digest: String,
    pub outputs: Vec<Artifact>,
    pub checks: CheckReport,
    /// SHA-256 of the outputs and checks.
    pub payload_digest: String,
    pub elapsed_ms: u64,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.all_passed()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Structured => serde_json::to_string_pretty(self).expect("serializable") + "\n",
            Format::Text => {
                let mut s = String::new();
                let _ = writeln!(s, "# command: {}", self.command);
                let _ = writeln!(s, "# input: sha256:{}", self.input_digest);
                for a in &self.outputs {
                    let _ = writeln!(s, "## {}", a.name);
                    s.push_str(&a.text);
                    if !a.text.ends_with('\n') {
                        s.push('\n');
                    }
                }
                if !self.checks.checks.is_empty() {
                    s.push_str("## checks\n");
                    s.push_str(&self.checks.render());
                }
                let _ = writeln!(s, "# payload: sha256:{}", self.payload_digest);
                let _ = writeln!(s, "# elapsed: {} ms", self.elapsed_ms);
                s
            }
        }
    }
}

#[derive(Default)]
struct Payload {
    outputs: Vec<Artifact>,
    checks: CheckReport,
}

impl Payload {
    fn push(&mut self, name: impl Into<String>, text: String, record: serde_json::Value) {
        self.outputs.push(Artifact { name: name.into(), text, record });
    }

    fn poly(&mut self, name: impl Into<String>, p: &Polynomial) {
        self.push(name, poly_to_text(p), json(&PolyRecord::from_poly(p)));
    }

    fn matrix(&mut self, name: impl Into<String>, m: &crate::polylinalg::PolyMatrix) {
        self.push(name, matrix_to_text(m), json(&MatrixRecord::from_matrix(m)));
    }

    fn fields(&mut self, name: impl Into<String>, fields: &[(String, Derivation)]) {
        let text = fields.iter().map(|(n, f)| format!("{n} = {f}\n")).collect();
        let record = fields
            .iter()
            .map(|(n, f)| {
                let coeffs: Vec<_> = f.coeffs().iter().map(PolyRecord::from_poly).collect();
                serde_json::json!({ "name": n, "coefficients": coeffs })
            })
            .collect();
        self.push(name, text, serde_json::Value::Array(record));
    }

    fn certificate(&mut self, name: impl Into<String>, cert: &FreenessCertificate) {
        self.push(name, certificate_text(cert), json(&cert.to_record()));
    }

    fn constants(&mut self, name: impl Into<String>, rows: &[Vec<Coeff>]) {
        let text = rows
            .iter()
            .map(|r| r.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ") + "\n")
            .collect();
        let record = rows.iter().map(|r| r.iter().map(|c| c.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>();
        self.push(name, text, json(&record));
    }
}

fn json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable")
}

fn certificate_text(cert: &FreenessCertificate) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "equation {}", cert.equation);
    for (i, (f, w)) in cert.basis.fields().iter().zip(cert.field_weights()).enumerate() {
        let w = w.map_or("-".to_string(), |w| w.to_string());
        let _ = writeln!(s, "field {} weight {w}: {f}", i + 1);
    }
    for (i, q) in cert.witnesses.iter().enumerate() {
        let _ = writeln!(s, "witness {}: {q}", i + 1);
    }
    let _ = writeln!(s, "det / h = {}", cert.det_quotient);
    let _ = writeln!(s, "squarefree {}", cert.squarefree);
    let _ = writeln!(s, "scope {:?}", cert.scope);
    s
}

fn reverify_check(checks: &mut CheckReport, name: &str, cert: &FreenessCertificate) {
    match cert.reverify() {
        Ok(()) => checks.push(name, true, format!("det / h = {}", cert.det_quotient)),
        Err(e) => checks.push(name, false, e.to_string()),
    }
}

/// Canonical echo of the parsed command line, independent of flag order.
pub fn command_echo(cli: &Cli) -> String {
    let mut s = String::from("freediv");
    match &cli.command {
        Command::Stable { k, emit } => {
            let _ = write!(s, " stable --k {k} --emit {}", value_name(*emit));
        }
        Command::Disc { mu, emit } => {
            let _ = write!(s, " disc --mu {mu} --emit {}", value_name(*emit));
        }
        Command::Compose { spec } => {
            let _ = write!(s, " compose {}", spec.display());
        }
        Command::Verify { equation, fields } => {
            let _ = write!(s, " verify {} {}", equation.display(), fields.display());
        }
    }
    if let Some(w) = cli.max_weight {
        let _ = write!(s, " --max-weight {w}");
    }
    let _ = write!(s, " --seed {}", cli.seed);
    s
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}

/// Runs one command.
pub fn run(cli: &Cli) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let command = command_echo(cli);
    let mut inputs: Vec<String> = vec![command.clone()];
    let payload = match &cli.command {
        Command::Stable { k, emit } => cmd_stable(*k as usize, *emit, cli.max_weight, cli.seed)?,
        Command::Disc { mu, emit } => cmd_disc(*mu as usize, *emit, cli.max_weight)?,
        Command::Compose { spec } => {
            let text = read(spec)?;
            let parsed: ComposeSpec = toml::from_str(&text)
                .map_err(|source| CliError::Spec { path: spec.display().to_string(), source })?;
            inputs.push(text);
            cmd_compose(&parsed, cli.max_weight)?
        }
        Command::Verify { equation, fields } => {
            let eq = read(equation)?;
            let fs = read(fields)?;
            let p = cmd_verify(&eq, &fs).map_err(|e| match e {
                VerifyInputError::Equation(source) => CliError::Format { path: equation.display().to_string(), source },
                VerifyInputError::Fields(source) => CliError::Format { path: fields.display().to_string(), source },
            })?;
            inputs.push(eq);
            inputs.push(fs);
            p
        }
    };
    let input_refs: Vec<&[u8]> = inputs.iter().map(|s| s.as_bytes()).collect();
    let body = serde_json::to_string(&(&payload.outputs, &payload.checks)).expect("serializable");
    Ok(RunReport {
        command,
        input_digest: sha256_hex(&input_refs),
        payload_digest: sha256_hex(&[body.as_bytes()]),
        outputs: payload.outputs,
        checks: payload.checks,
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

fn cmd_stable(k: usize, emit: StableEmit, max_weight: Option<i64>, seed: u64) -> Result<Payload, CliError> {
    let mut out = Payload::default();
    match emit {
        StableEmit::Germ => {
            let g = stable::build_germ(k)?;
            let names = stable::target_names(k);
            let text = names.iter().zip(&g.components).map(|(n, c)| format!("{n} = {c}\n")).collect();
            let record = names
                .iter()
                .zip(&g.components)
                .map(|(n, c)| serde_json::json!({ "target": n, "component": PolyRecord::from_poly(c) }))
                .collect();
            out.push("germ", text, serde_json::Value::Array(record));
        }
        StableEmit::Lambda => out.matrix("lambda", &stable::build_lambda(k)?.lambda),
        StableEmit::Equation => out.poly("equation", &stable::build_lambda(k)?.h),
        StableEmit::Minors => {
            let p = stable::build_lambda(k)?;
            for j in 1..=k {
                out.poly(format!("m{k}{j}"), p.minor(j));
            }
        }
        StableEmit::Adjoint => out.poly("adjoint", &stable::build_lambda(k)?.adjoint),
        StableEmit::Hl => {
            let p = stable::build_lambda(k)?;
            let fields = stable::hl_linear_parts(k)?;
            out.fields("linear parts", &fields);
            out.checks.extend(stable::first_order_tangency(&p, &fields)?);
        }
        StableEmit::Checks => {
            let p = stable::build_lambda(k)?;
            out.checks.extend(stable::distinguished_monomial_checks(&p));
            out.checks.extend(stable::structure_checks(&p)?);
            out.checks.extend(stable::first_order_tangency(&p, &stable::hl_linear_parts(k)?)?);
        }
        StableEmit::Certify => {
            let r = stable::certify_theorem59(k, max_weight)?;
            out.certificate("certificate", &r.certificate);
            out.constants("constant multipliers", &r.constant_matrix);
            out.checks.extend(r.checks);
            if k <= GENERIC_ADJOINT_MAX_K {
                let constants = stable::random_adjoint_constants(k, seed);
                let g = stable::certify_generic_adjoint(k, &constants, seed)?;
                out.constants("generic adjoint constants", std::slice::from_ref(&g.constants));
                out.poly("generic adjoint", &g.adjoint);
                out.certificate("generic adjoint certificate", &g.certificate);
                reverify_check(&mut out.checks, "generic adjoint certificate re-verifies", &g.certificate);
            }
        }
    }
    Ok(out)
}

fn cmd_disc(mu: usize, emit: DiscEmit, max_weight: Option<i64>) -> Result<Payload, CliError> {
    let mut out = Payload::default();
    match emit {
        DiscEmit::Unfolding => {
            let m = disc::build_milnor(mu)?;
            let text = format!("F = {}\n", m.unfolding);
            out.push("unfolding", text.clone(), serde_json::Value::String(text.trim_end().to_string()));
            let dual: String = (1..=mu).map(|i| format!("dual {i} = {}\n", m.dual(i))).collect();
            out.push("dual basis", dual.clone(), serde_json::Value::String(dual));
            out.checks.extend(disc::milnor_checks(&m));
            out.checks.extend(disc::check_hypothesis(&m));
        }
        DiscEmit::Lambda => out.matrix("lambda", &disc::build_discriminant(mu)?.lambda),
        DiscEmit::Discriminant => out.poly("discriminant", &disc::build_discriminant(mu)?.h),
        DiscEmit::Adjoint => out.poly("adjoint", &disc::build_discriminant(mu)?.adjoint),
        DiscEmit::Lemma5 => {
            let dd = disc::build_discriminant(mu)?;
            let consts = disc::lemma5b_constants(&dd)?;
            let text = consts
                .iter()
                .map(|(i, c)| {
                    let c = c.as_ref().map_or("none".to_string(), |c| c.to_string());
                    format!("i={i} observed {c} stated {}\n", disc::lemma5b_stated(&dd.milnor, *i))
                })
                .collect();
            let record = consts
                .iter()
                .map(|(i, c)| serde_json::json!({ "i": i, "observed": c.as_ref().map(|c| c.to_string()) }))
                .collect();
            out.push("lemma 5(b) constants", text, serde_json::Value::Array(record));
            out.checks.extend(disc::structure_checks(&dd)?);
            out.checks.extend(disc::linear_shape_checks(&dd)?);
            out.checks.extend(disc::lemma5_checks(&dd)?);
        }
        DiscEmit::D0 => {
            let d = disc::build_d0(mu, max_weight)?;
            for (i, p) in d.parametrization.iter().enumerate() {
                out.poly(format!("pi u{}", i + 1), p);
            }
            out.poly("hessian", &d.hessian);
            out.poly("equation", &d.equation);
            out.certificate("certificate", &d.certificate);
            out.checks.extend(d.checks);
        }
        DiscEmit::Certify => {
            if mu < 2 {
                return Err(CliError::Usage("disc --emit certify needs --mu >= 2".into()));
            }
            let r = disc::certify_theorem60(mu, max_weight)?;
            out.certificate("certificate", &r.certificate);
            out.constants("C(0)", &r.c0);
            out.checks.extend(r.checks);
        }
    }
    Ok(out)
}

/// Builds the composite, or the bare target pair, described by a spec.
fn cmd_compose(spec: &ComposeSpec, max_weight: Option<i64>) -> Result<Payload, CliError> {
    if *spec == ComposeSpec::default() {
        return Err(CliError::Usage("compose spec is empty".into()));
    }
    let mut out = Payload::default();
    let adjoint = spec.adjoint.unwrap_or(false);
    if spec.source.is_none() && spec.groups.is_none() {
        let k = match (adjoint, spec.k) {
            (true, Some(k)) => k,
            _ => return Err(CliError::Usage("spec needs `groups` or `source`, or `adjoint = true` with `k`".into())),
        };
        let (pair, checks) = normal_crossing_adjoint(k)?;
        out.matrix("matrix", &pair.a);
        out.poly("equation", &pair.h_e);
        out.certificate("certificate", &pair.certificate);
        reverify_check(&mut out.checks, "certificate re-verifies", &pair.certificate);
        out.checks.extend(checks);
        return Ok(out);
    }
    let d = spec_source(spec)?;
    let composite = if adjoint {
        let (pair, checks) = normal_crossing_adjoint(d.k())?;
        out.checks.extend(checks);
        compose(&d, &pair)?
    } else if let Some(forms) = &spec.forms {
        let y = target_ring(d.k(), None)?;
        let forms = forms
            .iter()
            .map(|f| parse_polynomial(&y, f).map_err(ComposeError::from))
            .collect::<Result<Vec<_>, _>>()?;
        arrangement_pullback(&d, &forms, max_weight.or(spec.max_weight))?
    } else if let Some(target) = &spec.target {
        let y = target_ring(d.k(), spec.target_weights.as_deref())?;
        let h_e = parse_polynomial(&y, target).map_err(ComposeError::from)?;
        compose(&d, &TargetPair::solve(&h_e, max_weight.or(spec.max_weight))?)?
    } else {
        return Err(CliError::Usage("spec needs `target`, `forms` or `adjoint = true`".into()));
    };
    out.poly("equation", &composite.equation);
    out.certificate("certificate", &composite.certificate);
    reverify_check(&mut out.checks, "certificate re-verifies", &composite.certificate);
    out.checks.extend(composite.checks);
    Ok(out)
}

enum VerifyInputError {
    Equation(FormatError),
    Fields(FormatError),
}

fn cmd_verify(equation: &str, fields: &str) -> Result<Payload, VerifyInputError> {
    let h = poly_from_text(equation).map_err(VerifyInputError::Equation)?;
    let m = matrix_from_text(fields).map_err(VerifyInputError::Fields)?;
    let mut out = Payload::default();
    let m = match m.try_map_into(h.ring(), |p| p.embed(h.ring())) {
        Ok(m) => m,
        Err(e) => {
            out.checks.push("saito criterion", false, format!("fields are not over the equation's ring: {e}"));
            return Ok(out);
        }
    };
    let result = SaitoMatrix::from_matrix(&m).and_then(|b| verify_saito(&h, b.fields()));
    match result {
        Ok(cert) => {
            out.certificate("certificate", &cert);
            out.checks.push("saito criterion", true, format!("det / h = {}", cert.det_quotient));
        }
        Err(e) => out.checks.push("saito criterion", false, e.to_string()),
    }
    Ok(out)
}

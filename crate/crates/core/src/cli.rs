//! Command-line front end. Every command prints one JSON report
//! `{"command", "status", "payload", "elapsed_us"}` except `tightness-scan`
//! with `--out csv`, which prints the table itself.
//!
//! Exit codes: 0 success, 1 invalid input, 2 computation error or a failed
//! verification claim.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::Path;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::arith::{parse_rat, Int, IntVec, Rat};
use crate::bounds::{
    delta, example_family_with, tightness_csv, tightness_scan, verify_adjunction_theorem,
    verify_fano_contraction_theorem, verify_lc_complement_theorem, FamilyReading, Outcome,
    VerificationReport,
};
use crate::divisor::{is_ample_over, rel_trivial_witness, ToricDivisor};
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::fibration::{
    discriminant_divisor, lc_threshold_over, pullback_multiplicities, relative_mld,
    validate_morphism, ToricMorphism,
};
use crate::json::{
    fan_value, matrix_value, morphism_value, parse_input, rat_value, rats_value,
    to_value, vec_value, Document,
};
use crate::mfs::factor_mfs;
use crate::singularity::{global_mld, is_eps_lc, mld_at_cone, MldReport};

#[derive(Parser, Debug)]
#[command(name = "toric-mld", version, about = "Exact singularity invariants of toric pairs and fibrations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Input document path, `-` for standard input.
    #[arg(long, default_value = "-")]
    pub input: String,
}

#[derive(Args, Debug, Clone)]
pub struct DivisorArgs {
    /// `zero`, `boundary`, a divisor document path, or comma-separated rationals.
    #[arg(long)]
    pub divisor: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate a fan, morphism or divisor document.
    Validate(InputArgs),
    /// Global minimal log discrepancy.
    Mld {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        divisor: DivisorArgs,
    },
    /// Minimal log discrepancy at the orbit of a cone.
    MldAt {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        divisor: DivisorArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        cone: Vec<usize>,
    },
    /// Whether the pair is eps-log canonical.
    EpsLc {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        divisor: DivisorArgs,
        #[arg(long)]
        eps: String,
    },
    /// Relative ampleness of a divisor (default: the anticanonical divisor).
    Ample {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        divisor: DivisorArgs,
    },
    /// Whether K_X + B is trivial over the base.
    RelTrivial {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        divisor: DivisorArgs,
    },
    /// Components of the pullback of a base divisor.
    Pullback {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        ray: usize,
    },
    /// lc threshold of the pullback of a base divisor.
    Lct {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        divisor: DivisorArgs,
        #[arg(long)]
        ray: usize,
    },
    /// Discriminant divisor on the base.
    Discriminant {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        divisor: DivisorArgs,
    },
    /// Minimal log discrepancy over the orbit of a base cone.
    RelMld {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        divisor: DivisorArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        cone: Vec<usize>,
    },
    /// Factor a toric Mori fiber space through a star subdivision.
    FactorMfs(InputArgs),
    /// The bound delta(r, eps).
    Delta {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        eps: String,
    },
    /// Member (r, q) of the extremal family over A¹, as a morphism document.
    ExampleFamily {
        #[arg(long)]
        r: u32,
        #[arg(long)]
        q: u64,
        /// Place every fiber ray along the first coordinate (valid only for r = 1).
        #[arg(long)]
        first_coordinate: bool,
    },
    /// Check fiber multiplicities and base singularities against delta.
    VerifyFano {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        divisor: DivisorArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        cone: Vec<usize>,
        #[arg(long)]
        eps: String,
    },
    /// Check the singularities of the base pair given by adjunction.
    VerifyAdjunction {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        divisor: DivisorArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        cone: Vec<usize>,
        #[arg(long)]
        eps: String,
        /// Primitive base vector of an exceptional valuation, e.g. `1,1`. Repeatable.
        #[arg(long)]
        probe: Vec<String>,
    },
    /// Check log canonicity of B + delta times the fiber over a base divisor.
    VerifyLc {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        divisor: DivisorArgs,
        /// The larger boundary that is trivial over the base.
        #[arg(long)]
        plus: String,
        #[arg(long, value_delimiter = ',', required = true)]
        cone: Vec<usize>,
        #[arg(long)]
        eps: String,
    },
    /// Fiber multiplicity against 1/delta(r, 1/q) along the extremal family.
    TightnessScan {
        #[arg(long)]
        r: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        out: OutFormat,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Mld { .. } => "mld",
            Command::MldAt { .. } => "mld-at",
            Command::EpsLc { .. } => "eps-lc",
            Command::Ample { .. } => "ample",
            Command::RelTrivial { .. } => "rel-trivial",
            Command::Pullback { .. } => "pullback",
            Command::Lct { .. } => "lct",
            Command::Discriminant { .. } => "discriminant",
            Command::RelMld { .. } => "rel-mld",
            Command::FactorMfs(_) => "factor-mfs",
            Command::Delta { .. } => "delta",
            Command::ExampleFamily { .. } => "example-family",
            Command::VerifyFano { .. } => "verify-fano",
            Command::VerifyAdjunction { .. } => "verify-adjunction",
            Command::VerifyLc { .. } => "verify-lc",
            Command::TightnessScan { .. } => "tightness-scan",
        }
    }
}

/// What a command produced.
enum Output {
    Json { status: &'static str, payload: Value, code: i32 },
    Text(String),
}

fn ok(payload: Value) -> Output {
    Output::Json {
        status: "ok",
        payload,
        code: 0,
    }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
}

impl Io<'_> {
    fn read(&mut self, path: &str) -> Result<String> {
        let mut text = String::new();
        if path == "-" {
            self.stdin.read_to_string(&mut text).map_err(io_error)?;
        } else {
            text = std::fs::read_to_string(path).map_err(io_error)?;
        }
        Ok(text)
    }

    fn document(&mut self, input: &InputArgs) -> Result<Document> {
        parse_input(&self.read(&input.input)?)
    }

    /// A fan, taking the source of a morphism document.
    fn fan(&mut self, input: &InputArgs) -> Result<Fan> {
        match self.document(input)? {
            Document::Fan(f) => Ok(f),
            Document::Morphism(m) => Ok(m.source().clone()),
            Document::Divisor(_) => Err(input_error("expected a fan or morphism document")),
        }
    }

    fn morphism(&mut self, input: &InputArgs) -> Result<ToricMorphism> {
        match self.document(input)? {
            Document::Morphism(m) => Ok(m),
            _ => Err(input_error("expected a morphism document")),
        }
    }
}

fn io_error(e: std::io::Error) -> Error {
    input_error(&e.to_string())
}

fn input_error(msg: &str) -> Error {
    Error::Parse {
        line: 0,
        column: 0,
        message: msg.into(),
    }
}

/// Resolves a divisor specification against `fan`.
pub fn resolve_divisor(arg: Option<&str>, default: &str, fan: &Fan) -> Result<ToricDivisor> {
    let arg = arg.unwrap_or(default).trim();
    let d = match arg {
        "zero" => ToricDivisor::zero(fan),
        "boundary" => ToricDivisor::boundary(fan),
        path if Path::new(path).is_file() => {
            let text = std::fs::read_to_string(path).map_err(io_error)?;
            match parse_input(&text)? {
                Document::Divisor(d) => d,
                _ => return Err(input_error("expected a divisor document")),
            }
        }
        "" => ToricDivisor::new(Vec::new()),
        list => ToricDivisor::new(list.split(',').map(parse_rat).collect::<Result<Vec<_>>>()?),
    };
    d.check(fan)?;
    Ok(d)
}

fn parse_probe(s: &str) -> Result<IntVec> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<Int>()
                .map_err(|_| Error::DomainError(format!("bad probe coordinate {x:?}")))
        })
        .collect()
}

fn mld_payload(r: &MldReport) -> Value {
    json!({
        "mld": r.value.to_string(),
        "witness": r.witness.as_deref().map(vec_value),
        "enumerated": r.enumerated,
    })
}

fn verification(rep: VerificationReport) -> Output {
    let (status, code) = match rep.outcome {
        Outcome::Pass => ("pass", 0),
        Outcome::HypothesisFailed => ("hypothesis-failed", 0),
        Outcome::Fail => ("fail", 2),
    };
    Output::Json {
        status,
        payload: to_value(&rep),
        code,
    }
}

fn execute(cmd: &Command, io: &mut Io) -> Result<Output> {
    Ok(match cmd {
        Command::Validate(input) => match io.document(input)? {
            Document::Fan(f) => ok(json!({
                "kind": "fan",
                "violations": [],
                "rays": f.rays().len(),
                "max_cones": f.max_cones().len(),
                "simplicial": f.is_simplicial(),
                "complete": f.is_complete()?,
            })),
            Document::Morphism(m) => ok(json!({
                "kind": "morphism",
                "diagnostics": to_value(&validate_morphism(&m)?),
            })),
            Document::Divisor(d) => ok(json!({ "kind": "divisor", "coefficients": d.len() })),
        },
        Command::Mld { input, divisor } => {
            let fan = io.fan(input)?;
            let b = resolve_divisor(divisor.divisor.as_deref(), "zero", &fan)?;
            ok(mld_payload(&global_mld(&fan, &b)?))
        }
        Command::MldAt { input, divisor, cone } => {
            let fan = io.fan(input)?;
            let b = resolve_divisor(divisor.divisor.as_deref(), "zero", &fan)?;
            let mut p = mld_payload(&mld_at_cone(&fan, &b, cone)?);
            p["cone"] = json!(cone);
            ok(p)
        }
        Command::EpsLc { input, divisor, eps } => {
            let fan = io.fan(input)?;
            let b = resolve_divisor(divisor.divisor.as_deref(), "zero", &fan)?;
            let eps = parse_rat(eps)?;
            ok(json!({ "eps_lc": is_eps_lc(&fan, &b, &eps)?, "eps": rat_value(&eps) }))
        }
        Command::Ample { input, divisor } => {
            let f = io.morphism(input)?;
            let d = resolve_divisor(divisor.divisor.as_deref(), "boundary", f.source())?;
            ok(json!({ "ample": is_ample_over(&f, &d)? }))
        }
        Command::RelTrivial { input, divisor } => {
            let f = io.morphism(input)?;
            let b = resolve_divisor(divisor.divisor.as_deref(), "zero", f.source())?;
            match rel_trivial_witness(&f, &b)? {
                Some(w) => ok(json!({
                    "rel_trivial": true,
                    "m": rats_value(&w.m),
                    "ell": w.ell.iter().map(|l| rats_value(l)).collect::<Vec<_>>(),
                })),
                None => ok(json!({ "rel_trivial": false })),
            }
        }
        Command::Pullback { input, ray } => {
            let f = io.morphism(input)?;
            let comps: Vec<Value> = pullback_multiplicities(&f, *ray)?
                .into_iter()
                .map(|(i, c)| {
                    json!({
                        "ray": i,
                        "vector": vec_value(f.source().ray(i)),
                        "multiplicity": crate::json::int_value(&c),
                    })
                })
                .collect();
            ok(json!({ "components": comps }))
        }
        Command::Lct { input, divisor, ray } => {
            let f = io.morphism(input)?;
            let b = resolve_divisor(divisor.divisor.as_deref(), "zero", f.source())?;
            ok(json!({ "lct": rat_value(&lc_threshold_over(&f, &b, *ray)?) }))
        }
        Command::Discriminant { input, divisor } => {
            let f = io.morphism(input)?;
            let b = resolve_divisor(divisor.divisor.as_deref(), "boundary", f.source())?;
            let d = discriminant_divisor(&f, &b)?;
            ok(json!({
                "coeffs": rats_value(d.divisor.coeffs()),
                "thresholds": rats_value(&d.thresholds),
                "moduli_is_zero": d.moduli_is_zero,
            }))
        }
        Command::RelMld { input, divisor, cone } => {
            let f = io.morphism(input)?;
            let b = resolve_divisor(divisor.divisor.as_deref(), "zero", f.source())?;
            let r = relative_mld(&f, &b, cone)?;
            ok(json!({
                "relative_mld": r.value.to_string(),
                "witness": r.witness.as_deref().map(vec_value),
                "enumerated": r.enumerated,
            }))
        }
        Command::FactorMfs(input) => {
            let f = io.morphism(input)?;
            let res = factor_mfs(&f)?;
            ok(json!({
                "e": res.e,
                "q": to_value(&res.q)["q"],
                "e_ray": vec_value(&res.e_ray),
                "a_e": rat_value(&res.a_e),
                "w": fan_value(&res.w),
                "y": fan_value(&res.y),
                "pi": matrix_value(res.pi.matrix()),
                "g": matrix_value(res.g.matrix()),
                "h": matrix_value(res.h.matrix()),
            }))
        }
        Command::Delta { r, eps } => {
            let eps: Rat = parse_rat(eps)?;
            ok(json!({ "delta": rat_value(&delta(*r, &eps)?) }))
        }
        Command::ExampleFamily { r, q, first_coordinate } => {
            let reading = if *first_coordinate {
                FamilyReading::FirstCoordinate
            } else {
                FamilyReading::PerCoordinate
            };
            let inst = example_family_with(*r, *q, reading)?;
            let mut p = morphism_value(&inst.f);
            p["r"] = json!(inst.r);
            p["q"] = json!(inst.q);
            p["distinguished_ray"] = json!(inst.distinguished);
            ok(p)
        }
        Command::VerifyFano { input, divisor, cone, eps } => {
            let f = io.morphism(input)?;
            let b = resolve_divisor(divisor.divisor.as_deref(), "zero", f.source())?;
            verification(verify_fano_contraction_theorem(&f, &b, cone, &parse_rat(eps)?)?)
        }
        Command::VerifyAdjunction { input, divisor, cone, eps, probe } => {
            let f = io.morphism(input)?;
            let b = resolve_divisor(divisor.divisor.as_deref(), "zero", f.source())?;
            let probes = probe.iter().map(|p| parse_probe(p)).collect::<Result<Vec<_>>>()?;
            verification(verify_adjunction_theorem(&f, &b, cone, &parse_rat(eps)?, &probes)?)
        }
        Command::VerifyLc { input, divisor, plus, cone, eps } => {
            let f = io.morphism(input)?;
            let b = resolve_divisor(divisor.divisor.as_deref(), "zero", f.source())?;
            let bp = resolve_divisor(Some(plus), "boundary", f.source())?;
            verification(verify_lc_complement_theorem(&f, &b, &bp, cone, &parse_rat(eps)?)?)
        }
        Command::TightnessScan { r, q, out } => {
            let rows = tightness_scan(*r, q)?;
            match out {
                OutFormat::Csv => Output::Text(tightness_csv(&rows)),
                OutFormat::Json => ok(json!({ "rows": to_value(&rows) })),
            }
        }
    })
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let start = Instant::now();
    let mut io = Io { stdin };
    let result = execute(&cli.command, &mut io);
    let elapsed_us = start.elapsed().as_micros() as u64;
    let (report, code) = match result {
        Ok(Output::Text(text)) => {
            let _ = write!(stdout, "{text}");
            return 0;
        }
        Ok(Output::Json { status, payload, code }) => (
            json!({ "command": cli.command.name(), "status": status, "payload": payload, "elapsed_us": elapsed_us }),
            code,
        ),
        Err(e) => {
            let validation = e.is_validation();
            let payload = json!({
                "error": e.to_string(),
                "kind": if validation { "validation" } else { "computation" },
            });
            (
                json!({ "command": cli.command.name(), "status": "error", "payload": payload, "elapsed_us": elapsed_us }),
                if validation { 1 } else { 2 },
            )
        }
    };
    let _ = writeln!(stdout, "{report}");
    code
}

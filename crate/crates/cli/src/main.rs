//! `mmot`: solve, check, certify, and audit discrete multi-marginal
//! transport problems from the command line.
//!
//! Exit codes: 0 success or positive verdict, 2 input error, 3 refuted
//! (not monotone), 4 inconclusive, 5 audit failure.

mod suite;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::Value;

use mmot_core::json;
use mmot_core::{
    audit_certificate, certify_plan, check_monotone_bruteforce, check_monotone_exact,
    extend_by_inf_convolution, gen_instance, normalize_at_base, solve_primal,
    splitting_for_finite, support_of, ArithmeticMode, BruteForceOutcome, Certificate,
    CertificateVerdict, Instance, Limits, MonotonicityResult, Rational, Scalar, SplittingError,
    SupportSet, TransportPlan,
};

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 2;
const EXIT_REFUTED: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;
const EXIT_AUDIT: u8 = 5;

#[derive(Parser)]
#[command(
    name = "mmot",
    version,
    about = "Discrete multi-marginal optimal transport: exact solving, monotonicity checks, and verifiable optimality certificates"
)]
struct Cli {
    /// Arithmetic backend; overrides MMOT_MODE and the instance's own
    /// `arithmetic` field.
    #[arg(long, global = true, value_parser = ["rational", "float"])]
    mode: Option<String>,

    /// Seed for `gen` and `suite`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Largest admissible product-grid size.
    #[arg(long, global = true, value_name = "N")]
    grid_cap: Option<usize>,

    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the transport problem of an instance.
    Solve {
        instance: PathBuf,
        /// Write the optimal plan to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check cyclical monotonicity of a plan's support.
    Check {
        instance: PathBuf,
        plan: PathBuf,
        /// exact: LP feasibility (certifies or refutes);
        /// brute: short-rearrangement search (refutes only).
        #[arg(long, default_value = "exact", value_parser = ["exact", "brute"])]
        method: String,
        /// Rearrangement size bound for the brute-force method.
        #[arg(long, default_value_t = 3)]
        nmax: usize,
    },
    /// Build ambient potentials for a monotone support set.
    Tuple {
        instance: PathBuf,
        /// Plan file or support file ({"points": [[...], ...]}).
        #[arg(long)]
        support: PathBuf,
        /// Base point for normalization, e.g. `0,1,0`; defaults to the
        /// lexicographically smallest support point.
        #[arg(long)]
        base: Option<String>,
    },
    /// Certify optimality of a plan or refute its support.
    Certify {
        instance: PathBuf,
        plan: PathBuf,
        /// Write the certificate to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify a certificate offline.
    Audit {
        instance: PathBuf,
        plan: PathBuf,
        certificate: PathBuf,
    },
    /// Generate a seeded random instance.
    Gen {
        /// Space sizes, e.g. `2,3,2`.
        #[arg(long, value_name = "n1,n2,...")]
        sizes: String,
        /// One of: random, pairwise_quadratic, coulomb, product.
        #[arg(long, default_value = "random")]
        cost: String,
        /// Write the instance to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate, solve, certify, perturb, and refute a batch of instances.
    Suite {
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("mmot: error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn limits_of(cli: &Cli) -> Limits {
    let mut limits = Limits::default();
    if let Some(cap) = cli.grid_cap {
        limits.grid_cap = cap;
    }
    limits
}

/// Mode precedence: --mode, then MMOT_MODE, then the document, then rational.
fn resolve_mode(cli: &Cli, document: Option<ArithmeticMode>) -> Result<ArithmeticMode> {
    if let Some(m) = &cli.mode {
        return ArithmeticMode::from_str(m).map_err(|e| anyhow!(e));
    }
    if let Ok(env) = std::env::var("MMOT_MODE") {
        if !env.is_empty() {
            return ArithmeticMode::from_str(&env)
                .map_err(|e| anyhow!("MMOT_MODE: {e}"));
        }
    }
    Ok(document.unwrap_or(ArithmeticMode::Rational))
}

fn read_value(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_pretty(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_value(value: &Value) {
    println!("{value}");
}

fn run(cli: &Cli) -> Result<u8> {
    let limits = limits_of(cli);
    match &cli.command {
        Command::Solve { instance, out } => {
            let doc = read_value(instance)?;
            match resolve_mode(cli, json::document_mode(&doc)?)? {
                ArithmeticMode::Rational => cmd_solve::<Rational>(cli, &doc, out.as_deref(), &limits),
                ArithmeticMode::Float => cmd_solve::<f64>(cli, &doc, out.as_deref(), &limits),
            }
        }
        Command::Check {
            instance,
            plan,
            method,
            nmax,
        } => {
            let doc = read_value(instance)?;
            let plan_doc = read_value(plan)?;
            match resolve_mode(cli, json::document_mode(&doc)?)? {
                ArithmeticMode::Rational => {
                    cmd_check::<Rational>(cli, &doc, &plan_doc, method, *nmax, &limits)
                }
                ArithmeticMode::Float => {
                    cmd_check::<f64>(cli, &doc, &plan_doc, method, *nmax, &limits)
                }
            }
        }
        Command::Tuple {
            instance,
            support,
            base,
        } => {
            let doc = read_value(instance)?;
            let support_doc = read_value(support)?;
            match resolve_mode(cli, json::document_mode(&doc)?)? {
                ArithmeticMode::Rational => {
                    cmd_tuple::<Rational>(cli, &doc, &support_doc, base.as_deref(), &limits)
                }
                ArithmeticMode::Float => {
                    cmd_tuple::<f64>(cli, &doc, &support_doc, base.as_deref(), &limits)
                }
            }
        }
        Command::Certify { instance, plan, out } => {
            let doc = read_value(instance)?;
            let plan_doc = read_value(plan)?;
            match resolve_mode(cli, json::document_mode(&doc)?)? {
                ArithmeticMode::Rational => {
                    cmd_certify::<Rational>(cli, &doc, &plan_doc, out.as_deref(), &limits)
                }
                ArithmeticMode::Float => {
                    cmd_certify::<f64>(cli, &doc, &plan_doc, out.as_deref(), &limits)
                }
            }
        }
        Command::Audit {
            instance,
            plan,
            certificate,
        } => {
            let doc = read_value(instance)?;
            let plan_doc = read_value(plan)?;
            let cert_doc = read_value(certificate)?;
            match resolve_mode(cli, json::document_mode(&doc)?)? {
                ArithmeticMode::Rational => {
                    cmd_audit::<Rational>(cli, &doc, &plan_doc, &cert_doc)
                }
                ArithmeticMode::Float => cmd_audit::<f64>(cli, &doc, &plan_doc, &cert_doc),
            }
        }
        Command::Gen { sizes, cost, out } => cmd_gen(cli, sizes, cost, out.as_deref()),
        Command::Suite { count } => {
            match resolve_mode(cli, None)? {
                ArithmeticMode::Rational => suite::run_suite::<Rational>(cli.seed, *count, cli.json, &limits),
                ArithmeticMode::Float => suite::run_suite::<f64>(cli.seed, *count, cli.json, &limits),
            }
        }
    }
}

fn parse_instance<S: Scalar>(doc: &Value) -> Result<Instance<S>> {
    let instance: Instance<S> = json::instance_from_value(doc).map_err(|e| anyhow!("{e}"))?;
    let issues = instance.validate();
    if !issues.is_empty() {
        let lines: Vec<String> = issues.iter().map(|i| i.to_string()).collect();
        return Err(anyhow!("invalid instance: {}", lines.join("; ")));
    }
    Ok(instance)
}

fn parse_plan<S: Scalar>(doc: &Value) -> Result<TransportPlan<S>> {
    json::plan_from_value(doc).map_err(|e| anyhow!("{e}"))
}

fn cmd_solve<S: Scalar>(
    cli: &Cli,
    doc: &Value,
    out: Option<&Path>,
    limits: &Limits,
) -> Result<u8> {
    let instance: Instance<S> = parse_instance(doc)?;
    let result = solve_primal(&instance, limits).map_err(|e| anyhow!("{e}"))?;
    if let Some(path) = out {
        write_pretty(path, &json::plan_to_value(&result.optimal_plan))?;
    }
    if cli.json {
        print_value(&json::solve_result_to_value(&result));
    } else {
        println!(
            "optimal value {} (gap {}), plan has {} atoms",
            result.optimal_value,
            result.gap,
            result.optimal_plan.len()
        );
    }
    Ok(EXIT_OK)
}

fn cmd_check<S: Scalar>(
    cli: &Cli,
    doc: &Value,
    plan_doc: &Value,
    method: &str,
    nmax: usize,
    limits: &Limits,
) -> Result<u8> {
    let instance: Instance<S> = parse_instance(doc)?;
    let plan: TransportPlan<S> = parse_plan(plan_doc)?;
    let gamma = support_of(&plan);
    match method {
        "exact" => {
            let verdict =
                check_monotone_exact(&gamma, &instance, limits).map_err(|e| anyhow!("{e}"))?;
            if cli.json {
                print_value(&json::verdict_to_value(&verdict));
            }
            match &verdict.result {
                MonotonicityResult::Monotone(_) => {
                    if !cli.json {
                        println!("monotone (exact)");
                    }
                    Ok(EXIT_OK)
                }
                MonotonicityResult::Violated(witness) => {
                    if !cli.json {
                        println!(
                            "violated: rearranging {} points lowers cost {} -> {}",
                            witness.n(),
                            witness.cost_before,
                            witness.cost_after
                        );
                    }
                    Ok(EXIT_REFUTED)
                }
            }
        }
        "brute" => {
            let outcome = check_monotone_bruteforce(&gamma, &instance, nmax, limits)
                .map_err(|e| anyhow!("{e}"))?;
            if cli.json {
                print_value(&json::brute_force_outcome_to_value(&outcome, nmax));
            }
            match outcome {
                BruteForceOutcome::Violated(witness) => {
                    if !cli.json {
                        println!(
                            "violated: rearranging {} points lowers cost {} -> {}",
                            witness.n(),
                            witness.cost_before,
                            witness.cost_after
                        );
                    }
                    Ok(EXIT_REFUTED)
                }
                BruteForceOutcome::Inconclusive => {
                    if !cli.json {
                        println!("inconclusive up to n_max = {nmax} (brute force cannot certify)");
                    }
                    Ok(EXIT_INCONCLUSIVE)
                }
            }
        }
        other => Err(anyhow!("unknown method `{other}`")),
    }
}

fn parse_support<S: Scalar>(doc: &Value) -> Result<SupportSet> {
    if doc.get("entries").is_some() {
        let plan: TransportPlan<S> = json::plan_from_value(doc).map_err(|e| anyhow!("{e}"))?;
        Ok(support_of(&plan))
    } else {
        json::support_from_value(doc).map_err(|e| anyhow!("{e}"))
    }
}

fn parse_base(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("bad base component `{s}`"))
        })
        .collect()
}

fn cmd_tuple<S: Scalar>(
    cli: &Cli,
    doc: &Value,
    support_doc: &Value,
    base: Option<&str>,
    limits: &Limits,
) -> Result<u8> {
    let instance: Instance<S> = parse_instance(doc)?;
    let gamma = parse_support::<S>(support_doc)?;
    let base = match base {
        Some(text) => parse_base(text)?,
        None => gamma
            .lex_min()
            .ok_or_else(|| anyhow!("support set is empty"))?
            .clone(),
    };
    let tuple = match splitting_for_finite(&gamma, &instance, limits) {
        Ok(tuple) => tuple,
        Err(SplittingError::NotMonotone(witness)) => {
            if cli.json {
                print_value(&serde_json::json!({
                    "error": "not_monotone",
                    "witness": json::witness_to_value(&witness),
                }));
            } else {
                println!(
                    "support is not monotone: rearranging {} points lowers cost {} -> {}",
                    witness.n(),
                    witness.cost_before,
                    witness.cost_after
                );
            }
            return Ok(EXIT_REFUTED);
        }
        Err(e) => return Err(anyhow!("{e}")),
    };
    let extended =
        extend_by_inf_convolution(&tuple, &gamma, &instance, limits).map_err(|e| anyhow!("{e}"))?;
    let normalized = normalize_at_base(&extended, &base, &instance).map_err(|e| anyhow!("{e}"))?;
    print_value(&json::tuple_to_value(&normalized, Some(&base)));
    Ok(EXIT_OK)
}

fn cmd_certify<S: Scalar>(
    cli: &Cli,
    doc: &Value,
    plan_doc: &Value,
    out: Option<&Path>,
    limits: &Limits,
) -> Result<u8> {
    let instance: Instance<S> = parse_instance(doc)?;
    let plan: TransportPlan<S> = parse_plan(plan_doc)?;
    let certificate = certify_plan(&instance, &plan, limits).map_err(|e| anyhow!("{e}"))?;
    if let Some(path) = out {
        write_pretty(path, &json::certificate_to_value(&certificate))?;
    }
    if cli.json {
        print_value(&json::certificate_to_value(&certificate));
    }
    match &certificate.verdict {
        CertificateVerdict::Optimal { .. } => {
            if !cli.json {
                println!("optimal: certified value {}", certificate.plan_cost);
            }
            Ok(EXIT_OK)
        }
        CertificateVerdict::NotMonotone(witness) => {
            if !cli.json {
                println!(
                    "not monotone: rearranging {} points lowers cost {} -> {}",
                    witness.n(),
                    witness.cost_before,
                    witness.cost_after
                );
            }
            Ok(EXIT_REFUTED)
        }
    }
}

fn cmd_audit<S: Scalar>(cli: &Cli, doc: &Value, plan_doc: &Value, cert_doc: &Value) -> Result<u8> {
    let instance: Instance<S> = parse_instance(doc)?;
    let plan: TransportPlan<S> = parse_plan(plan_doc)?;
    let certificate: Certificate<S> =
        json::certificate_from_value(cert_doc).map_err(|e| anyhow!("{e}"))?;
    let report = audit_certificate(&instance, &plan, &certificate);
    if cli.json {
        let failures: Vec<String> = report.failures.iter().map(|f| f.to_string()).collect();
        print_value(&serde_json::json!({ "ok": report.is_ok(), "failures": failures }));
    } else if report.is_ok() {
        println!("audit: ok ({})", if certificate.is_optimal() { "optimal" } else { "not monotone" });
    } else {
        println!("audit: FAILED");
        for failure in &report.failures {
            println!("  - {failure}");
        }
    }
    Ok(if report.is_ok() { EXIT_OK } else { EXIT_AUDIT })
}

fn cmd_gen(cli: &Cli, sizes: &str, cost: &str, out: Option<&Path>) -> Result<u8> {
    let sizes: Vec<usize> = sizes
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("bad size `{s}`"))
        })
        .collect::<Result<_>>()?;
    let instance = gen_instance(&sizes, cost, cli.seed).map_err(|e| anyhow!("{e}"))?;
    let text = match resolve_mode(cli, None)? {
        ArithmeticMode::Rational => json::instance_to_string(&instance),
        ArithmeticMode::Float => json::instance_to_string(&instance.to_mode::<f64>()),
    };
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

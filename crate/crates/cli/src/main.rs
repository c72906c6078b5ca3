//! `tautres` — exact tautological-integral calculator.
//!
//! Subcommands: `integrate`, `series`, `oracle`, `residue`, `positivity`,
//! `selftest`. Input is JSON (file or stdin), output is byte-stable JSON
//! with sorted keys. Exit codes: 0 success, 2 spec/validation error,
//! 3 internal consistency failure.

mod input;

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use tautres_core::chern::parse_phi;
use tautres_core::genfun::{series_coefficients, MultiplicativeClass, MultiplicativeClassSpec};
use tautres_core::jsonio::{
    self, poly_to_json, rational_function_to_json, rational_term_from_json, rational_to_string,
    to_stable_string, universal_integral_to_json,
};
use tautres_core::oracle::{ab_integrate, ToricSurfaceChart};
use tautres_core::registry::VarRegistry;
use tautres_core::residue::iterated_residue_report;
use tautres_core::selftest::run_selftest;
use tautres_core::tautint::positivity::{chern_monomials, positivity_scan, PositivityReport};
use tautres_core::tautint::{
    closed::{closed_form_k2, closed_form_k3},
    integrate_equivariant, integrate_ghilb, IntegrateOptions, Mode, ProblemSpec, QTable, TautError,
};

#[derive(Parser)]
#[command(
    name = "tautres",
    about = "Exact tautological integrals over Hilbert schemes of points",
    version
)]
struct Cli {
    /// Worker-pool width (overridden by TAUTRES_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write output JSON here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a tautological integral from a JSON problem spec.
    Integrate(IntegrateArgs),
    /// Multiplicative-class series, computed two ways and compared.
    Series(SeriesArgs),
    /// Fixed-point localization oracle on a toric surface.
    Oracle(OracleArgs),
    /// Evaluate a single iterated residue (debug interface).
    Residue(ResidueArgs),
    /// Scan universal-integral coefficients in the (c(V), s(X)) basis.
    Positivity(PositivityArgs),
    /// Run the acceptance suite and report per-criterion results.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct IntegrateArgs {
    /// Problem spec JSON: a path, or `-` for stdin.
    #[arg(long, default_value = "-")]
    spec: String,
    /// Disable the vanishing precheck (results are identical either way).
    #[arg(long)]
    no_prune: bool,
    /// Extra Q polynomial, e.g. `6=z1+2*z2` (repeatable).
    #[arg(long = "q-poly")]
    q_poly: Vec<String>,
    /// Also run the closed k=2/k=3 formula and cross-check.
    #[arg(long)]
    cross_check: bool,
    /// Append decimal approximations of rational outputs.
    #[arg(long)]
    decimal: bool,
}

#[derive(Args)]
struct SeriesArgs {
    /// Multiplicative class: `segre`, `chern`, or a JSON file with
    /// `{"coefficients": ["1", "1/2", ...]}`.
    #[arg(long, default_value = "segre")]
    class: String,
    #[arg(long)]
    kmax: u32,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 1)]
    rank: usize,
    /// Intersection table JSON file (enables contracted totals).
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Surface: p2, p1xp1 or affine.
    #[arg(long)]
    surface: String,
    #[arg(long)]
    k: u32,
    /// Bundle JSON: `{"rank":1,"line_degree":2}` for p2,
    /// `{"rank":1,"line_degree":[a,b]}` for p1xp1,
    /// `{"rank":r,"weights":[...]}` for affine.
    #[arg(long)]
    bundle: String,
    /// Integrand, e.g. `c1^4`.
    #[arg(long)]
    phi: String,
    /// Include per-fixed-point contributions in the output.
    #[arg(long)]
    per_point: bool,
}

#[derive(Args)]
struct ResidueArgs {
    /// Term JSON: a path, or `-` for stdin.
    #[arg(long, default_value = "-")]
    term: String,
}

#[derive(Args)]
struct PositivityArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 1)]
    rank: usize,
    /// Explicit integrands; defaults to all Chern monomials of degree nk.
    #[arg(long = "phi")]
    phis: Vec<String>,
    /// Cap on the number of enumerated monomials.
    #[arg(long, default_value_t = 10)]
    max_phis: usize,
}

#[derive(Args)]
struct SelftestArgs {
    /// Run a single criterion (1..=10).
    #[arg(long)]
    criterion: Option<u32>,
}

fn read_input(path: &str) -> Result<Value> {
    let text = if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .context("reading stdin")?;
        buf
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?
    };
    serde_json::from_str(&text).context("input is not valid JSON")
}

fn emit(out: &Option<PathBuf>, value: &Value) -> Result<()> {
    let text = to_stable_string(value);
    match out {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_integrate(args: &IntegrateArgs, out: &Option<PathBuf>) -> Result<()> {
    let doc = read_input(&args.spec)?;
    let mut q_table = QTable::new();
    for spec in &args.q_poly {
        let (j, expr) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("--q-poly expects j=expression, got `{spec}`"))?;
        let j: u32 = j.trim().parse().context("--q-poly index")?;
        q_table
            .register_override(j, expr.trim())
            .map_err(|e| anyhow!("{e}"))?;
    }
    let parsed = input::parse_integrate_input(&doc, &mut q_table)?;
    let opts = IntegrateOptions {
        prune: !args.no_prune,
        q_table,
    };
    let q_overrides: serde_json::Map<String, Value> = opts
        .q_table
        .override_sources()
        .map(|(j, s)| (j.to_string(), json!(s)))
        .collect();

    let mut output = match parsed.spec.mode {
        Mode::Manifold => {
            let ui = integrate_ghilb(&parsed.spec, parsed.table.as_ref(), &opts)?;
            if args.cross_check {
                let other = match parsed.spec.k {
                    2 => Some(closed_form_k2(&parsed.spec, parsed.table.as_ref(), &opts)?),
                    3 => Some(closed_form_k3(&parsed.spec, parsed.table.as_ref(), &opts)?),
                    _ => None,
                };
                if let Some(other) = other {
                    if !ui.same_class_data(&other) || ui.total != other.total {
                        return Err(TautError::InternalConsistency(
                            "closed-form cross-check disagrees with the partition sum".into(),
                        )
                        .into());
                    }
                }
            }
            let mut v = universal_integral_to_json(&ui);
            if args.decimal {
                if let Some(total) = &ui.total {
                    v["total_decimal"] = json!(input::decimal_string(total));
                }
            }
            v
        }
        Mode::Equivariant => {
            let result = integrate_equivariant(&parsed.spec, &opts)?;
            let per: Vec<Value> = result
                .per_partition
                .iter()
                .map(|(p, value)| {
                    json!({
                        "partition": jsonio::partition_to_json(p),
                        "residue_value": poly_to_json(value),
                    })
                })
                .collect();
            json!({
                "schema_version": 1,
                "n": parsed.spec.n,
                "k": parsed.spec.k,
                "normalization": rational_to_string(&result.normalization),
                "per_partition": per,
                "value": rational_function_to_json(&parsed.registry, &result.value),
            })
        }
    };
    output["mode"] = json!(match parsed.spec.mode {
        Mode::Manifold => "manifold",
        Mode::Equivariant => "equivariant",
    });
    output["phi"] = json!(parsed.phi_source);
    if !q_overrides.is_empty() {
        output["q_overrides"] = Value::Object(q_overrides);
    }
    emit(out, &output)
}

fn cmd_series(args: &SeriesArgs, out: &Option<PathBuf>) -> Result<()> {
    let class = match args.class.as_str() {
        "segre" => MultiplicativeClass::Segre,
        "chern" => MultiplicativeClass::Chern,
        path => {
            let doc = read_input(path)?;
            let coeffs = doc
                .get("coefficients")
                .and_then(|c| c.as_array())
                .ok_or_else(|| {
                    anyhow!("custom class file needs a `coefficients` array of rationals")
                })?
                .iter()
                .map(|c| {
                    c.as_str()
                        .ok_or_else(|| anyhow!("coefficients must be strings"))
                        .and_then(|s| jsonio::rational_from_str(s).map_err(|e| anyhow!("{e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            MultiplicativeClass::Custom(coeffs)
        }
    };
    let table = match &args.table {
        Some(path) => Some(
            jsonio::table_from_json(&read_input(path.to_str().unwrap_or_default())?)
                .map_err(|e| anyhow!("table: {e}"))?,
        ),
        None => None,
    };
    let spec = MultiplicativeClassSpec::new(class, args.n, args.kmax);
    let report = series_coefficients(
        &spec,
        args.n,
        args.rank,
        args.kmax,
        &IntegrateOptions::default(),
        table.as_ref(),
    )?;
    let coefficients: Vec<Value> = report
        .coefficients
        .iter()
        .map(|c| {
            json!({
                "k": c.k,
                "agree": c.agree,
                "direct": universal_integral_to_json(&c.direct),
                "direct_total": c.direct_total.as_ref().map(rational_to_string),
                "connected_total": c.connected_total.as_ref().map(rational_to_string),
            })
        })
        .collect();
    let output = json!({
        "schema_version": 1,
        "class": report.class_name,
        "n": report.n,
        "rank": report.rank,
        "all_agree": report.all_agree,
        "normalization": "direct sum carries 1/k!; exponential side uses q^k/k! connected terms",
        "coefficients": coefficients,
        "q_series": report.q_series.as_ref().map(poly_to_json),
    });
    emit(out, &output)
}

fn cmd_oracle(args: &OracleArgs, out: &Option<PathBuf>) -> Result<()> {
    let bundle: Value =
        serde_json::from_str(&args.bundle).context("--bundle must be inline JSON")?;
    let phi = parse_phi(&args.phi).map_err(|e| anyhow!("phi: {e}"))?;
    let rank = bundle.get("rank").and_then(|r| r.as_u64()).unwrap_or(1) as usize;
    let surface = match args.surface.as_str() {
        "p2" => {
            let d = bundle
                .get("line_degree")
                .and_then(|d| d.as_i64())
                .ok_or_else(|| anyhow!("p2 bundle needs an integer `line_degree`"))?;
            if rank != 1 {
                bail!("p2 oracle supports rank-1 line bundles");
            }
            ToricSurfaceChart::p2(d)
        }
        "p1xp1" => {
            let pair = bundle
                .get("line_degree")
                .and_then(|d| d.as_array())
                .ok_or_else(|| anyhow!("p1xp1 bundle needs `line_degree`: [a, b]"))?;
            let a = pair
                .first()
                .and_then(|v| v.as_i64())
                .ok_or_else(|| anyhow!("bad bidegree"))?;
            let b = pair
                .get(1)
                .and_then(|v| v.as_i64())
                .ok_or_else(|| anyhow!("bad bidegree"))?;
            if rank != 1 {
                bail!("p1xp1 oracle supports rank-1 line bundles");
            }
            ToricSurfaceChart::p1xp1(a, b)
        }
        "affine" => {
            let registry = Arc::new(VarRegistry::new());
            let weights = bundle
                .get("weights")
                .and_then(|w| w.as_array())
                .ok_or_else(|| anyhow!("affine bundle needs a `weights` array"))?
                .iter()
                .map(|w| {
                    let s = w
                        .as_str()
                        .ok_or_else(|| anyhow!("weights must be strings"))?;
                    input::parse_weight(&registry, s)
                })
                .collect::<Result<Vec<_>>>()?;
            if weights.len() != rank {
                bail!("rank {rank} does not match {} weights", weights.len());
            }
            ToricSurfaceChart::affine(&registry, weights)
        }
        other => bail!("unknown surface `{other}` (expected p2, p1xp1 or affine)"),
    };
    let result = ab_integrate(&surface, args.k, &phi)?;
    let value = match result.as_rational() {
        Some(r) => json!(rational_to_string(&r)),
        None => rational_function_to_json(&surface.registry, &result.value),
    };
    let mut output = json!({
        "schema_version": 1,
        "surface": args.surface,
        "k": args.k,
        "phi": args.phi,
        "value": value,
        "fixed_point_count": result.fixed_point_count,
    });
    if args.per_point {
        output["per_point_contributions"] = Value::Array(
            result
                .per_point
                .iter()
                .map(|rf| rational_function_to_json(&surface.registry, rf))
                .collect(),
        );
    }
    emit(out, &output)
}

fn cmd_residue(args: &ResidueArgs, out: &Option<PathBuf>) -> Result<()> {
    let doc = read_input(&args.term)?;
    input::check_schema_version(&doc)?;
    let registry = Arc::new(VarRegistry::new());
    let term = rational_term_from_json(&registry, &doc)?;
    let report = iterated_residue_report(&term)?;
    let bounds: serde_json::Map<String, Value> = report
        .truncation_orders
        .iter()
        .map(|(v, j)| (registry.display_name(*v), json!(j)))
        .collect();
    let output = json!({
        "schema_version": 1,
        "residue": poly_to_json(&report.value),
        "truncation_orders": Value::Object(bounds),
    });
    emit(out, &output)
}

fn cmd_positivity(args: &PositivityArgs, out: &Option<PathBuf>) -> Result<()> {
    let degree = args.n * args.k;
    let max_index = (args.rank as u32) * args.k;
    let phis: Vec<(tautres_core::chern::ChernExpr, String)> = if args.phis.is_empty() {
        chern_monomials(degree, max_index)
            .into_iter()
            .take(args.max_phis)
            .collect()
    } else {
        args.phis
            .iter()
            .map(|s| {
                parse_phi(s)
                    .map(|e| (e, s.clone()))
                    .map_err(|e| anyhow!("phi `{s}`: {e}"))
            })
            .collect::<Result<Vec<_>>>()?
    };
    let specs: Vec<(ProblemSpec, String)> = phis
        .into_iter()
        .map(|(phi, source)| {
            (
                ProblemSpec::manifold(args.n, args.k, args.rank, phi),
                source,
            )
        })
        .collect();
    let report: PositivityReport = positivity_scan(&specs, &IntegrateOptions::default())?;
    let output = json!({
        "schema_version": 1,
        "basis": "c(V), s(X)",
        "negative_count": report.negative_count,
        "rows": serde_json::to_value(&report.rows)?,
    });
    emit(out, &output)
}

fn cmd_selftest(args: &SelftestArgs, out: &Option<PathBuf>) -> Result<bool> {
    let results = run_selftest(args.criterion);
    if results.is_empty() {
        bail!("no such criterion (valid: 1..=10)");
    }
    let mut all_passed = true;
    for r in &results {
        println!(
            "criterion {:>2} [{}] {:.2}s: {} — {}",
            r.id,
            if r.passed { "PASS" } else { "FAIL" },
            r.seconds,
            r.name,
            r.detail
        );
        all_passed &= r.passed;
    }
    let output = json!({
        "schema_version": 1,
        "all_passed": all_passed,
        "criteria": results
            .iter()
            .map(|r| {
                json!({
                    "id": r.id,
                    "name": r.name,
                    "passed": r.passed,
                    "detail": r.detail,
                    "seconds": r.seconds,
                })
            })
            .collect::<Vec<_>>(),
    });
    if out.is_some() {
        emit(out, &output)?;
    }
    Ok(all_passed)
}

/// Exit code classification: internal consistency failures are 3,
/// everything else user-facing is 2.
fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(t) = cause.downcast_ref::<TautError>() {
            match t {
                TautError::InternalConsistency(_) => return 3,
                TautError::Residue(tautres_core::residue::ResidueError::TruncationExceeded(_)) => {
                    return 3
                }
                _ => return 2,
            }
        }
        if let Some(r) = cause.downcast_ref::<tautres_core::residue::ResidueError>() {
            return match r {
                tautres_core::residue::ResidueError::TruncationExceeded(_) => 3,
                _ => 2,
            };
        }
        if cause
            .downcast_ref::<tautres_core::oracle::OracleError>()
            .is_some()
        {
            return 2;
        }
        if cause
            .downcast_ref::<tautres_core::genfun::GenFunError>()
            .is_some()
        {
            return 2;
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var("TAUTRES_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .or(cli.threads);
    if let Some(threads) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("warning: could not size the worker pool: {e}");
        }
    }
    let result = match &cli.command {
        Command::Integrate(args) => cmd_integrate(args, &cli.out),
        Command::Series(args) => cmd_series(args, &cli.out),
        Command::Oracle(args) => cmd_oracle(args, &cli.out),
        Command::Residue(args) => cmd_residue(args, &cli.out),
        Command::Positivity(args) => cmd_positivity(args, &cli.out),
        Command::Selftest(args) => {
            return match cmd_selftest(args, &cli.out) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(3),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = classify(&e);
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

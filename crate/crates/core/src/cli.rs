//! The `ryflow` command line.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::flow::run;
use crate::io::{evaluate_monitors, records_to_csv, svg, ConfigError, RunConfig, RunSummary};
use crate::oracles::{
    blow_up_bound, einstein_scale, product_extinction_time, product_metric_rates, product_metric_solution,
    scalar_min_comparison, EinsteinFamily,
};
use crate::params::FlowParams;
use crate::symbol::{build_symbol_matrix, is_strongly_elliptic, predicted_eigenvalues, symbol_spectrum};
use crate::verify::{run_scenario, SCENARIOS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_SINGULAR: i32 = 2;
pub const EXIT_FAILED: i32 = 3;
pub const EXIT_INVALID: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "ryflow",
    version,
    about = "Simulate and verify the (alpha, beta) Ricci-Yamabe flow on symmetric model geometries",
    after_help = "Exit codes: 0 ok, 2 blow-up or degenerate metric, 3 monitor or criterion failure, \
                  4 invalid configuration or arguments.\n\
                  The RYFLOW_SEED environment variable is reserved and currently ignored; every \
                  sampled check uses a fixed seed."
)]
pub struct Cli {
    /// Configuration file (simulate).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, value_name = "PATH")]
    pub out_dir: Option<PathBuf>,
    /// Evaluate everything on one thread.
    #[arg(long, global = true)]
    pub serial: bool,
    /// Accept flow coefficients outside the parabolic regime.
    #[arg(long, global = true)]
    pub allow_degenerate: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the flow described by --config and write CSV, JSON and optional SVG output.
    Simulate,
    /// Principal-symbol spectrum and ellipticity verdict, or a regime map over a lattice.
    AnalyzeSymbol(SymbolArgs),
    /// Run a built-in verification scenario and print a JSON verdict.
    Verify(VerifyArgs),
    /// Print closed-form reference values as JSON.
    Exact {
        #[command(subcommand)]
        family: ExactCommand,
    },
}

#[derive(Debug, Args)]
pub struct SymbolArgs {
    /// A value, or `lo:hi:count` for a sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: String,
    /// A value, or `lo:hi:count` for a sweep.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: String,
    /// Dimension, 2..=16.
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Scenario name, or `all`.
    pub scenario: Option<String>,
    /// List the scenarios and exit.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub beta: f64,
    /// Query time.
    #[arg(long, default_value_t = 0.0)]
    pub t: f64,
}

#[derive(Debug, Subcommand)]
pub enum ExactCommand {
    /// Einstein metric `c(t) g0` with `Ric(g0) = lambda g0`.
    Einstein {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        c0: f64,
    },
    /// Round cylinder `phi0^2 ds^2 + r0^2 g_sphere`.
    Product {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, default_value_t = 1.0)]
        r0: f64,
        #[arg(long, default_value_t = 1.0)]
        phi0: f64,
    },
    /// Lifetime bound and scalar-minimum comparison for `R >= a`.
    Bound {
        #[command(flatten)]
        flow: FlowArgs,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
    },
}

/// Parses `args` (including the program name) and runs the command. Returns the exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INVALID,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INTERNAL,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self::invalid(e.to_string())
    }
}

fn execute(cli: &Cli) -> Result<i32, Failure> {
    match &cli.command {
        Command::Simulate => simulate(cli),
        Command::AnalyzeSymbol(a) => analyze_symbol(cli, a),
        Command::Verify(v) => verify(cli, v),
        Command::Exact { family } => exact(cli, family),
    }
}

fn out_dir(cli: &Cli) -> Result<PathBuf, Failure> {
    let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| Failure::invalid(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::invalid(format!("cannot write {}: {e}", path.display())))
}

fn simulate(cli: &Cli) -> Result<i32, Failure> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Failure::invalid("simulate needs --config PATH"))?;
    let mut config = RunConfig::load(path, cli.allow_degenerate)?;
    config.integrator.parallel = !cli.serial;
    let state = config.initial_state()?;
    let dir = out_dir(cli)?;

    let outcome = run(&state, &config.params, &config.integrator).map_err(|e| Failure::invalid(e.to_string()))?;
    let monitors = evaluate_monitors(&outcome, &config.params, &config.monitors, config.c_disc);
    // Parallelism never changes results; keep the recorded config independent of --serial.
    config.integrator.parallel = false;
    let summary = RunSummary::new(&outcome, monitors, &config);

    write_file(&dir.join(&config.outputs.csv), &records_to_csv(&outcome.records))?;
    write_file(&dir.join(&config.outputs.json), &summary.to_json())?;
    if config.outputs.svg {
        let t: Vec<f64> = outcome.records.iter().map(|r| r.t).collect();
        let series: [(&str, Vec<f64>); 3] = [
            ("R_min", outcome.records.iter().map(|r| r.r_min).collect()),
            ("volume", outcome.records.iter().map(|r| r.volume).collect()),
            ("f_max", outcome.records.iter().map(|r| r.f_max).collect()),
        ];
        for (name, ys) in series {
            write_file(&dir.join(format!("{name}.svg")), &svg::line_plot(name, "t", &t, &ys))?;
        }
    }

    println!(
        "status {} at t = {} after {} steps; monitors {}",
        outcome.status,
        outcome.t_final,
        outcome.steps,
        if summary.monitors_passed { "passed" } else { "FAILED" }
    );
    for m in summary.monitors.iter().filter(|m| !m.passed) {
        eprintln!("monitor `{}` failed: {}", m.name, m.detail);
    }
    if !outcome.message.is_empty() {
        println!("{}", outcome.message);
    }
    Ok(summary.exit_code)
}

/// `x` or `lo:hi:count`.
fn parse_axis(name: &str, text: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::invalid(format!("--{name}: expected a number or lo:hi:count, got `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![v.trim().parse().map_err(|_| bad())?]),
        [lo, hi, count] => {
            let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
            let count: usize = count.trim().parse().map_err(|_| bad())?;
            if count < 2 || !lo.is_finite() || !hi.is_finite() {
                return Err(bad());
            }
            Ok((0..count)
                .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .collect())
        }
        _ => Err(bad()),
    }
}

fn analyze_symbol(cli: &Cli, a: &SymbolArgs) -> Result<i32, Failure> {
    if !(2..=16).contains(&a.n) {
        return Err(Failure::invalid(format!("--n must lie in 2..=16, got {}", a.n)));
    }
    let alphas = parse_axis("alpha", &a.alpha)?;
    let betas = parse_axis("beta", &a.beta)?;
    let params_for =
        |alpha: f64, beta: f64| FlowParams::degenerate(alpha, beta, a.n).map_err(|e| Failure::invalid(e.to_string()));

    if alphas.len() == 1 && betas.len() == 1 {
        let params = params_for(alphas[0], betas[0])?;
        let m = build_symbol_matrix(&params).map_err(|e| Failure::invalid(e.to_string()))?;
        let spectrum = symbol_spectrum(&m).map_err(|e| Failure::internal(e.to_string()))?;
        let verdict = is_strongly_elliptic(&params);
        let modes = n_modes(a.n);
        println!("n = {}, alpha = {}, beta = {}", a.n, params.alpha, params.beta);
        println!("  traceless modes: {} x{}", params.alpha, modes - 1);
        println!("  trace mode:      {} x1", params.trace_diffusivity());
        let clusters: Vec<String> = spectrum
            .iter()
            .map(|e| format!("{} x{}", e.value, e.multiplicity))
            .collect();
        println!("  computed:        {}", clusters.join(", "));
        println!(
            "verdict: {} (min eigenvalue {})",
            verdict.verdict, verdict.min_eigenvalue
        );
        debug_assert_eq!(predicted_eigenvalues(&params).len(), modes);
        return Ok(EXIT_OK);
    }

    let mut csv = String::from("alpha,beta,n,min_eigenvalue,verdict\n");
    for &alpha in &alphas {
        for &beta in &betas {
            let v = is_strongly_elliptic(&params_for(alpha, beta)?);
            let _ = writeln!(csv, "{alpha},{beta},{},{},{}", a.n, v.min_eigenvalue, v.verdict);
        }
    }
    match &cli.out_dir {
        Some(_) => {
            let path = out_dir(cli)?.join("symbol_sweep.csv");
            write_file(&path, &csv)?;
            println!("wrote {} rows to {}", alphas.len() * betas.len(), path.display());
        }
        None => print!("{csv}"),
    }
    Ok(EXIT_OK)
}

fn n_modes(n: usize) -> usize {
    n * (n + 1) / 2
}

fn verify(cli: &Cli, v: &VerifyArgs) -> Result<i32, Failure> {
    if v.list {
        for s in SCENARIOS {
            println!("{s}");
        }
        return Ok(EXIT_OK);
    }
    let name = v
        .scenario
        .as_deref()
        .ok_or_else(|| Failure::invalid("verify needs a scenario name (see --list)"))?;
    let names: Vec<&str> = if name == "all" { SCENARIOS.to_vec() } else { vec![name] };
    let mut reports = Vec::new();
    for n in names {
        let report = run_scenario(n)
            .ok_or_else(|| Failure::invalid(format!("unknown scenario `{n}` (see --list)")))?
            .map_err(|e| Failure::internal(e.to_string()))?;
        for c in report.criteria.iter().filter(|c| !c.passed) {
            eprintln!(
                "{n}: criterion `{}` failed (value {}, threshold {})",
                c.name, c.value, c.threshold
            );
        }
        reports.push(report);
    }
    let passed = reports.iter().all(|r| r.passed);
    let text = if reports.len() == 1 {
        serde_json::to_string_pretty(&reports[0])
    } else {
        serde_json::to_string_pretty(&reports)
    }
    .map_err(|e| Failure::internal(e.to_string()))?;
    println!("{text}");
    if cli.out_dir.is_some() {
        write_file(&out_dir(cli)?.join(format!("verify_{name}.json")), &text)?;
    }
    Ok(if passed { EXIT_OK } else { EXIT_FAILED })
}

fn flow_params(cli: &Cli, f: &FlowArgs) -> Result<FlowParams, Failure> {
    let p = if cli.allow_degenerate {
        FlowParams::degenerate(f.alpha, f.beta, f.n)
    } else {
        FlowParams::new(f.alpha, f.beta, f.n)
    };
    p.map_err(|e| Failure::invalid(e.to_string()))
}

fn exact(cli: &Cli, family: &ExactCommand) -> Result<i32, Failure> {
    let invalid = |e: crate::Error| Failure::invalid(e.to_string());
    let value = match family {
        ExactCommand::Einstein { flow, lambda, c0 } => {
            let params = flow_params(cli, flow)?;
            let fam = EinsteinFamily::new(*lambda, *c0, flow.n).map_err(invalid)?;
            let c = einstein_scale(&fam, &params, flow.t).map_err(invalid)?;
            json!({
                "family": "einstein",
                "t": flow.t,
                "scale": c.value,
                "scalar": if c.past_extinction { f64::NAN } else { fam.scalar_at_scale(c.value) },
                "initial_scalar": fam.initial_scalar(),
                "extinction_time": fam.extinction_time(&params),
                "blow_up_bound": finite_or_null(blow_up_bound(fam.initial_scalar(), &params)),
                "past_extinction": c.past_extinction,
            })
        }
        ExactCommand::Product { flow, r0, phi0 } => {
            let params = flow_params(cli, flow)?;
            let sol = product_metric_solution(*r0, *phi0, &params, flow.t).map_err(invalid)?;
            let rates = product_metric_rates(*r0, *phi0, &params, flow.t).map_err(invalid)?;
            json!({
                "family": "product",
                "t": flow.t,
                "phi": sol.value.phi,
                "psi": sol.value.psi,
                "phi_t": rates.value.phi,
                "psi_t": rates.value.psi,
                "extinction_time": product_extinction_time(*r0, &params),
                "past_extinction": sol.past_extinction,
            })
        }
        ExactCommand::Bound { flow, a } => {
            let params = flow_params(cli, flow)?;
            let comparison = scalar_min_comparison(*a, &params, flow.t).ok();
            json!({
                "family": "bound",
                "t": flow.t,
                "a": a,
                "blow_up_bound": finite_or_null(blow_up_bound(*a, &params)),
                "comparison": comparison.map(|c| finite_or_null(c.value)),
                "past_extinction": comparison.is_some_and(|c| c.past_extinction),
            })
        }
    };
    println!(
        "{}",
        serde_json::to_string_pretty(&value).map_err(|e| Failure::internal(e.to_string()))?
    );
    Ok(EXIT_OK)
}

fn finite_or_null(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

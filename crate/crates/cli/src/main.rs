//! Command-line front end: `fit`, `predict`, `simulate`, and `scan`.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mable_aft::csv_io;
use mable_aft::report::FitReport;
use mable_aft::runner;
use mable_aft_core::simulation::{SimDesign, CASE1_EXAM_MAX};
use mable_aft_core::{
    calibrate_right_censoring, mable_aft, predict_density, predict_survival, CensoringScheme,
    FitConfig, VarianceConvention,
};
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mable-aft",
    version,
    about = "Accelerated failure time regression for interval-censored data \
             with a Bernstein polynomial baseline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the model to a CSV dataset and write a JSON fit report.
    Fit(FitArgs),
    /// Evaluate fitted density and survival curves on a time grid.
    Predict(PredictArgs),
    /// Run a Monte Carlo design and print rMSE/rMISE score tables.
    Simulate(SimulateArgs),
    /// Fit every degree on the grid and print the selection trace.
    Scan(FitArgs),
}

#[derive(Args, Clone)]
struct FitArgs {
    /// Input CSV (columns y1, y2, optional delta, covariates).
    #[arg(long)]
    input: PathBuf,
    /// Covariate columns to use (comma separated); default: every column
    /// other than y1, y2, delta.
    #[arg(long, value_delimiter = ',')]
    covariates: Option<Vec<String>>,
    /// Truncation time; must exceed the largest finite endpoint.
    /// Default: 1.05 times that endpoint.
    #[arg(long)]
    tau: Option<f64>,
    /// Smallest degree on the selection grid.
    #[arg(long, default_value_t = 3)]
    degree_min: usize,
    /// Largest degree on the selection grid.
    #[arg(long, default_value_t = 25)]
    degree_max: usize,
    /// Starting coefficients (comma separated); default: zeros.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gamma_init: Option<Vec<f64>>,
    /// Iteration cap of the weight fixed-point stages.
    #[arg(long, default_value_t = 5000)]
    fp_maxit: usize,
    /// Restart weight stages from the previous weights instead of uniform.
    #[arg(long)]
    warm_start: bool,
    /// Covariance convention for the reported sigma matrix.
    #[arg(long, value_enum, default_value_t = VarianceArg::ScaledByN)]
    variance: VarianceArg,
    /// Output path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VarianceArg {
    /// Sigma = -n H^{-1} (asymptotic covariance of sqrt(n) gamma-hat).
    ScaledByN,
    /// Sigma = -H^{-1} (observed information).
    Observed,
}

impl From<VarianceArg> for VarianceConvention {
    fn from(v: VarianceArg) -> Self {
        match v {
            VarianceArg::ScaledByN => VarianceConvention::ScaledByN,
            VarianceArg::Observed => VarianceConvention::ObservedInformation,
        }
    }
}

#[derive(Args)]
struct PredictArgs {
    /// Fit report JSON produced by `fit`.
    #[arg(long)]
    fit: PathBuf,
    /// Covariate point: either `name=value,...` (unassigned names are 0)
    /// or bare values `v1,v2,...` in report order.
    #[arg(long, default_value = "", allow_hyphen_values = true)]
    at: String,
    /// Time grid: `start:end:count` or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    times: String,
    /// Output path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Censoring design: case0, case1, case2, case5, or right.
    #[arg(long)]
    scheme: String,
    /// Sample size per replication.
    #[arg(long)]
    n: usize,
    /// Number of replications.
    #[arg(long)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Target censoring rate for the `right` scheme.
    #[arg(long, default_value_t = 0.3)]
    cen_rate: f64,
    /// Add a comparator fit per replication (`parametric` = Weibull MLE).
    #[arg(long)]
    compare: Option<String>,
    /// Worker threads; 0 = available parallelism, 1 = fully serial.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output format.
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// Smallest degree on the selection grid.
    #[arg(long, default_value_t = 3)]
    degree_min: usize,
    /// Largest degree on the selection grid.
    #[arg(long, default_value_t = 25)]
    degree_max: usize,
    /// Nominal truncation time of the design.
    #[arg(long, default_value_t = 12.0)]
    tau: f64,
    /// Restart weight stages from the previous weights instead of uniform
    /// (same limit, fewer iterations).
    #[arg(long)]
    warm_start: bool,
    /// Output path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(args, false),
        Command::Scan(args) => cmd_fit(args, true),
        Command::Predict(args) => cmd_predict(args),
        Command::Simulate(args) => cmd_simulate(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn fit_config(args: &FitArgs) -> FitConfig {
    FitConfig {
        degree_min: args.degree_min,
        degree_max: args.degree_max,
        gamma_init: args.gamma_init.clone(),
        fp_maxit: args.fp_maxit,
        tau: args.tau,
        warm_start_weights: args.warm_start,
        variance: args.variance.into(),
        ..FitConfig::default()
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_fit(args: FitArgs, scan: bool) -> Result<ExitCode> {
    let named = csv_io::parse_csv_file(&args.input, args.covariates.as_deref())?;
    let config = fit_config(&args);
    let fit = mable_aft(&named.dataset, &config).map_err(|e| anyhow!("{e}"))?;
    let report = FitReport::from_fit(&fit, named.covariates);

    let text = if scan {
        let mut out = String::new();
        writeln!(out, "{:>7} {:>16} {:>14} {:>10}", "degree", "loglik", "R", "converged")?;
        for row in &report.degree_trace {
            let ll = row.loglik.map_or("failed".to_string(), |v| format!("{v:.6}"));
            let r = row.r_statistic.map_or("-".to_string(), |v| format!("{v:.6}"));
            let mark = if row.degree == report.degree { " <- selected" } else { "" };
            writeln!(out, "{:>7} {:>16} {:>14} {:>10}{}", row.degree, ll, r, row.converged, mark)?;
        }
        writeln!(out, "selected degree: {}", report.degree)?;
        writeln!(out, "tau: {}", report.tau)?;
        for (name, (g, se)) in report
            .covariates
            .iter()
            .zip(report.gamma.iter().zip(&report.standard_errors))
        {
            let se = se.map_or("n/a".to_string(), |v| format!("{v:.6}"));
            writeln!(out, "{name}: {g:.6} (se {se})")?;
        }
        out
    } else {
        format!("{}\n", report.to_json()?)
    };
    write_output(args.output.as_ref(), &text)?;

    if report.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(2))
    }
}

/// Parse `--times`: `start:end:count` or a comma-separated list.
fn parse_times(spec: &str) -> Result<Vec<f64>> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            bail!("time grid must be start:end:count, got {spec:?}");
        }
        let start: f64 = parts[0].parse().context("bad grid start")?;
        let end: f64 = parts[1].parse().context("bad grid end")?;
        let count: usize = parts[2].parse().context("bad grid count")?;
        if count < 2 || !(end > start) {
            bail!("time grid needs end > start and count >= 2");
        }
        Ok((0..count)
            .map(|i| start + (end - start) * i as f64 / (count - 1) as f64)
            .collect())
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| anyhow!("bad time value {s:?}")))
            .collect()
    }
}

/// Parse `--at` against the report's covariate names.
fn parse_at(spec: &str, names: &[String]) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Ok(vec![0.0; names.len()]);
    }
    if spec.contains('=') {
        let mut x = vec![0.0; names.len()];
        for pair in spec.split(',') {
            let (name, value) = pair
                .split_once('=')
                .ok_or_else(|| anyhow!("bad covariate assignment {pair:?}"))?;
            let idx = names
                .iter()
                .position(|n| n == name.trim())
                .ok_or_else(|| anyhow!("unknown covariate {:?}", name.trim()))?;
            x[idx] = value.trim().parse().map_err(|_| anyhow!("bad value in {pair:?}"))?;
        }
        Ok(x)
    } else {
        let x: Vec<f64> = spec
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| anyhow!("bad covariate value {s:?}")))
            .collect::<Result<_>>()?;
        if x.len() != names.len() {
            bail!("covariate dimension mismatch: fit has {}, got {}", names.len(), x.len());
        }
        Ok(x)
    }
}

fn cmd_predict(args: PredictArgs) -> Result<ExitCode> {
    let report = FitReport::load(&args.fit)?;
    let fit = report.to_fit();
    let x = parse_at(&args.at, &report.covariates)?;
    let times = parse_times(&args.times)?;
    let density = predict_density(&fit, &x, &times).map_err(|e| anyhow!("{e}"))?;
    let survival = predict_survival(&fit, &x, &times).map_err(|e| anyhow!("{e}"))?;

    let mut out = String::from("t,density,survival\n");
    for ((t, f), s) in times.iter().zip(&density).zip(&survival) {
        writeln!(out, "{t},{f},{s}")?;
    }
    write_output(args.output.as_ref(), &out)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(args: SimulateArgs) -> Result<ExitCode> {
    let mut design = SimDesign::standard(args.n, CensoringScheme::Case0, args.reps, args.seed);
    design.tau = args.tau;
    design.scheme = match args.scheme.as_str() {
        "case0" => CensoringScheme::Case0,
        "case1" => CensoringScheme::Case1 { exam_max: CASE1_EXAM_MAX },
        "case2" => CensoringScheme::CaseK { inspections: 2, inspect_len: 2.5, cen_prob: 0.7 },
        "case5" => CensoringScheme::CaseK { inspections: 5, inspect_len: 1.0, cen_prob: 0.7 },
        "right" => {
            let upper = calibrate_right_censoring(&design, args.cen_rate)
                .map_err(|e| anyhow!("{e}"))?;
            CensoringScheme::Right { upper }
        }
        other => bail!("invalid scheme {other:?} (case0, case1, case2, case5, right)"),
    };

    let compare = match args.compare.as_deref() {
        None => false,
        Some("parametric") => true,
        Some(other) => bail!("unknown comparator {other:?} (supported: parametric)"),
    };

    let config = FitConfig {
        degree_min: args.degree_min,
        degree_max: args.degree_max,
        warm_start_weights: args.warm_start,
        ..FitConfig::default()
    };
    let threads = if args.threads == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        args.threads
    };
    let outcomes = runner::run_design_parallel(&design, &config, compare, threads)?;
    let text = runner::format_scores(&design, &outcomes, matches!(args.format, FormatArg::Json))?;
    write_output(args.output.as_ref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use hyperstat::rng::seeded;
use hyperstat::structure::{default_witness_mode, secant_modulus_with, SecantOptions};
use hyperstat::{
    lipschitz_check, registry_get, set_smoothness_check, HyperObjective, Mode, Problem, PropertyReport, Sense, Verdict,
    PROBLEM_NAMES,
};
use hyperstat_harness::artifacts::emit_artifacts;
use hyperstat_harness::{load_report, measure_at, run_experiment, ExperimentConfig, HarnessError, MeasureSettings};
use hyperstat_harness::{Measurement, RateReport};

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_VIOLATED: u8 = 3;

/// Inner accuracy for checks on problems without a closed form.
const CHECK_INNER_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "hyperstat", version, about = "Zeroth-order bilevel experiments and structural checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the registered problems.
    ListProblems,
    /// Run an experiment sweep described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sample a structural property and compare it with its theory modulus.
    Check {
        #[arg(long)]
        problem: String,
        #[arg(long, value_enum)]
        property: Property,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for check_<property>.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Certify approximate stationarity at a point.
    Certify {
        #[arg(long)]
        problem: String,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Declared weak modulus (defaults to the theory value).
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Monte Carlo or gradient sample count.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Refit the rate of a saved report.
    Rates {
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Lipschitz,
    SetSmoothness,
    SecantConvexity,
    SecantConcavity,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Envelope,
    Clarke,
    Goldstein,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Pessimistic,
    Optimistic,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Pessimistic => Mode::Pessimistic,
            ModeArg::Optimistic => Mode::Optimistic,
        }
    }
}

/// Bad input detected after argument parsing.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct UsageError(String);

enum Outcome {
    Ok,
    Violated,
}

fn problem(name: &str) -> anyhow::Result<Problem> {
    registry_get(name)
        .map_err(|_| UsageError(format!("unknown problem {name:?}; known: {}", PROBLEM_NAMES.join(", "))).into())
}

fn parse_point(s: &str, m: usize) -> anyhow::Result<Vec<f64>> {
    let x = s
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| UsageError(format!("--x {s:?}: {e}")))?;
    if x.len() != m {
        return Err(UsageError(format!("--x has {} coordinates, problem needs {m}", x.len())).into());
    }
    Ok(x)
}

fn list_problems() -> anyhow::Result<Outcome> {
    println!("name\tm\tn\tclosed_form\tassumption_violating");
    for name in PROBLEM_NAMES {
        let p = problem(name)?;
        println!("{}\t{}\t{}\t{}\t{}", p.name, p.m, p.n, p.exact_hyper().is_some(), p.assumption_violating);
    }
    Ok(Outcome::Ok)
}

fn run(config: &Path) -> anyhow::Result<Outcome> {
    let cfg = ExperimentConfig::from_file(config)?;
    let report = run_experiment(&cfg)?;
    print_rates(&report);
    println!("artifacts in {}", cfg.output_dir.display());
    Ok(Outcome::Ok)
}

fn print_rates(report: &RateReport) {
    println!("T\tmean_sq_measure\tstderr");
    for p in &report.points {
        println!("{}\t{:.6e}\t{:.3e}", p.t, p.mean_sq_measure, p.stderr);
    }
    match report.slope {
        Some(s) => println!("slope {s:.4}"),
        None => println!("slope n/a (fewer than 3 iteration counts)"),
    }
}

fn check(name: &str, property: Property, samples: usize, seed: u64, out: &Path) -> anyhow::Result<Outcome> {
    let p = problem(name)?;
    if samples == 0 {
        return Err(UsageError("--samples must be positive".into()).into());
    }
    let mut rng = seeded(seed);
    let report: PropertyReport = match property {
        Property::Lipschitz => lipschitz_check(&p, samples, &mut rng)?,
        Property::SetSmoothness => {
            let d = p.descriptor()?;
            let l = p.declared_set_smoothness.unwrap_or_else(|| p.theory_moduli().set_smoothness);
            set_smoothness_check(d, &p.constants.working_box, l, samples, &mut rng, default_witness_mode(d))?
        }
        Property::SecantConvexity | Property::SecantConcavity => {
            let (sense, mode) = match property {
                Property::SecantConvexity => (Sense::Convexity, Mode::Pessimistic),
                _ => (Sense::Concavity, Mode::Optimistic),
            };
            let p = p.with_mode(mode);
            let rho = p.theory_moduli().weak_modulus;
            let opts = SecantOptions {
                theory: (rho.is_finite() && !p.assumption_violating).then_some(rho),
                ..SecantOptions::default()
            };
            let phi = HyperObjective::exact_or_tol(&p, CHECK_INNER_TOL);
            secant_modulus_with(&phi, sense, samples, &p.constants.working_box, &mut rng, &opts)?
        }
    };
    let paths = emit_artifacts(&report, out)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    eprintln!("verdict {} (written to {})", report.verdict, paths[0].display());
    Ok(match report.verdict {
        Verdict::Satisfied => Outcome::Ok,
        Verdict::Violated | Verdict::NoFiniteModulus => Outcome::Violated,
    })
}

#[allow(clippy::too_many_arguments)]
fn certify(
    name: &str,
    x: &str,
    method: Method,
    gamma: Option<f64>,
    eps: Option<f64>,
    delta: Option<f64>,
    mode: Option<ModeArg>,
    rho: Option<f64>,
    seed: u64,
    samples: Option<usize>,
) -> anyhow::Result<Outcome> {
    let mut p = problem(name)?;
    if let Some(mode) = mode {
        p = p.with_mode(mode.into());
    }
    let x = parse_point(x, p.m)?;
    let measurement = match method {
        Method::Envelope => Measurement::Envelope,
        Method::Clarke => Measurement::ClarkeSmoothing,
        Method::Goldstein => Measurement::Goldstein,
    };
    let stray = match method {
        Method::Envelope => eps.map(|_| "--eps").or(delta.map(|_| "--delta")),
        Method::Clarke => gamma.map(|_| "--gamma").or(delta.map(|_| "--delta")),
        Method::Goldstein => gamma.map(|_| "--gamma").or(eps.map(|_| "--eps")),
    };
    if let Some(flag) = stray {
        return Err(UsageError(format!("{flag} does not apply to this method")).into());
    }
    let mut s = MeasureSettings::new(measurement);
    s.rho = rho;
    if let Some(g) = gamma {
        s.gamma = g;
    }
    if let Some(e) = eps {
        s.eps = e;
    }
    s.goldstein_delta = delta;
    if let Some(n) = samples {
        s.n_mc = n;
        s.goldstein_samples = n;
    }
    let cert = measure_at(&p, &x, &s, &mut seeded(seed))?;
    println!("{}", serde_json::to_string_pretty(&cert)?);
    Ok(Outcome::Ok)
}

fn rates(path: &Path) -> anyhow::Result<Outcome> {
    let report = load_report(path)?;
    let (slope, intercept) = report.refit().context("refitting the report")?;
    print_rates(&report);
    println!("intercept {intercept:.4}");
    if let Some(saved) = report.slope {
        if (saved - slope).abs() > 1e-9 * (1.0 + slope.abs()) {
            bail!("saved slope {saved} disagrees with refit {slope}");
        }
    }
    Ok(Outcome::Ok)
}

fn dispatch(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::ListProblems => list_problems(),
        Command::Run { config } => run(&config),
        Command::Check { problem, property, samples, seed, out } => check(&problem, property, samples, seed, &out),
        Command::Certify { problem, x, method, gamma, eps, delta, mode, rho, seed, samples } => {
            certify(&problem, &x, method, gamma, eps, delta, mode, rho, seed, samples)
        }
        Command::Rates { report } => rates(&report),
    }
}

fn is_usage(err: &anyhow::Error) -> bool {
    err.chain().any(|e| {
        e.is::<UsageError>()
            || matches!(
                e.downcast_ref::<HarnessError>(),
                Some(HarnessError::InvalidConfig(_) | HarnessError::Json { .. })
            )
            || matches!(e.downcast_ref::<hyperstat::Error>(), Some(hyperstat::Error::UnknownProblem(_)))
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Violated) => ExitCode::from(EXIT_VIOLATED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { EXIT_USAGE } else { EXIT_RUNTIME })
        }
    }
}

//! Command-line front end: curvature queries, geodesic integration,
//! submanifold analysis, and the verification suites.
//!
//! Exit codes: 0 success (and suite pass), 1 suite check failure, 2 usage or
//! spec error, 3 domain or numerical error. All numeric output is printed
//! with 12 significant digits; `--out -` streams to standard output.
//! `FINSLER_LOG` ∈ {quiet, info, debug} controls diagnostics on standard
//! error and never touches the primary output.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use finsler::connection::integrate_geodesic;
use finsler::curvature::{flag_curvature, sectional_curvature_k2};
use finsler::harness::{run_suite, Suite, SuiteConfig};
use finsler::metric::{MetricSpec, ReferenceElement};
use finsler::submanifold::{
    mean_curvature, normal_parallelism_residual, umbilicity_residual, ImmersionSpec,
    SubReferenceElement,
};
use finsler::{Error, Result};

#[derive(Parser)]
#[command(name = "finsler", version, about = "Finsler-geometry workbench: curvatures, geodesics, submanifolds, verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flag curvature at a reference element (K₂ as well with --Y)
    Curvature(CurvatureArgs),
    /// Integrate a geodesic and write the path as CSV
    Geodesic(GeodesicArgs),
    /// Mean curvature and residuals of an immersed submanifold
    Submanifold(SubmanifoldArgs),
    /// Run a verification suite and write its JSON report
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CurvatureArgs {
    /// Metric spec file (JSON)
    #[arg(long)]
    metric: PathBuf,
    /// Base point, comma-separated decimals
    #[arg(long)]
    x: String,
    /// Reference direction, comma-separated decimals
    #[arg(long)]
    y: String,
    /// Flag edge; omit it to print F(x, y) instead of a curvature
    #[arg(long = "X")]
    x_edge: Option<String>,
    /// Second edge: additionally prints the sectional value of span(X, Y)
    #[arg(long = "Y", requires = "x_edge")]
    y_edge: Option<String>,
}

#[derive(Args)]
struct GeodesicArgs {
    /// Metric spec file (JSON)
    #[arg(long)]
    metric: PathBuf,
    /// Initial point, comma-separated decimals
    #[arg(long)]
    x0: String,
    /// Initial velocity, comma-separated decimals
    #[arg(long)]
    y0: String,
    /// Integration time
    #[arg(long)]
    t: f64,
    /// Fixed step count
    #[arg(long, default_value_t = 512)]
    steps: usize,
    /// CSV destination; "-" streams to standard output
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct SubmanifoldArgs {
    /// Ambient metric spec file (JSON); must match the immersion's ambient
    #[arg(long)]
    metric: PathBuf,
    /// Immersion spec file (JSON)
    #[arg(long)]
    immersion: PathBuf,
    /// Chart point, comma-separated decimals
    #[arg(long)]
    u: String,
    /// Chart direction, comma-separated decimals
    #[arg(long)]
    v: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name: constant-flag, lemma-identity, polarization, schur,
    /// umbilic-example, or negative-controls
    #[arg(long)]
    suite: String,
    /// Metric spec file (JSON)
    #[arg(long)]
    metric: PathBuf,
    /// Immersion spec file; required by umbilic-example and negative-controls
    #[arg(long)]
    immersion: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Upper bound for identity residuals [default: 1e-6]
    #[arg(long)]
    tol: Option<f64>,
    /// Lower floor for negative-control residuals [default: 1e-3]
    #[arg(long)]
    floor: Option<f64>,
    /// Report destination; "-" streams JSON to standard output
    #[arg(long, default_value = "-")]
    out: String,
    /// Optional per-sample residual CSV destination
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Curvature(args) => curvature(&args).map(|_| ExitCode::SUCCESS),
        Command::Geodesic(args) => geodesic(&args).map(|_| ExitCode::SUCCESS),
        Command::Submanifold(args) => submanifold(&args).map(|_| ExitCode::SUCCESS),
        Command::Verify(args) => verify(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            // Spec and shape problems are usage errors; everything else is a
            // domain or numerical failure.
            match err {
                Error::Spec(_) | Error::SpecJson(_) | Error::Dimension { .. } => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn init_logging() {
    let level = match std::env::var("FINSLER_LOG").ok().as_deref() {
        None | Some("quiet") => log::LevelFilter::Error,
        Some("info") => log::LevelFilter::Info,
        Some("debug") => log::LevelFilter::Debug,
        Some(other) => {
            eprintln!("warning: FINSLER_LOG \"{other}\" not one of quiet, info, debug; using quiet");
            log::LevelFilter::Error
        }
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
}

/// 12 significant digits, scientific notation.
fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

fn parse_vector(flag: &str, text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|c| {
            c.trim().parse::<f64>().map_err(|_| {
                Error::Spec(format!("--{flag}: \"{c}\" is not a decimal number (in \"{text}\")"))
            })
        })
        .collect()
}

fn read_spec_file(flag: &str, path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|err| Error::Spec(format!("--{flag} {}: {err}", path.display())))
}

fn load_metric(path: &Path) -> Result<MetricSpec> {
    MetricSpec::from_json(&read_spec_file("metric", path)?)
        .map_err(|err| Error::Spec(format!("--metric {}: {err}", path.display())))
}

fn load_immersion(path: &Path) -> Result<ImmersionSpec> {
    ImmersionSpec::from_json(&read_spec_file("immersion", path)?)
        .map_err(|err| Error::Spec(format!("--immersion {}: {err}", path.display())))
}

/// Writes to a file, or to standard output when `dest` is "-".
fn write_output(dest: &str, text: &str) -> Result<()> {
    if dest == "-" {
        print!("{text}");
        Ok(())
    } else {
        fs::write(dest, text)
            .map_err(|err| Error::Spec(format!("--out {dest}: {err}")))
    }
}

fn curvature(args: &CurvatureArgs) -> Result<()> {
    let kernel = load_metric(&args.metric)?.to_kernel()?;
    let x = parse_vector("x", &args.x)?;
    let y = parse_vector("y", &args.y)?;
    let z = ReferenceElement::new(&kernel, x, y)?;
    match &args.x_edge {
        None => println!("{}", sig12(kernel.f(&z.x, &z.y)?)),
        Some(edge_text) => {
            let edge = parse_vector("X", edge_text)?;
            println!("{}", sig12(flag_curvature(&kernel, &z, &edge)?));
            if let Some(second_text) = &args.y_edge {
                let second = parse_vector("Y", second_text)?;
                println!("{}", sig12(sectional_curvature_k2(&kernel, &z, &edge, &second)?));
            }
        }
    }
    Ok(())
}

fn geodesic(args: &GeodesicArgs) -> Result<()> {
    let kernel = load_metric(&args.metric)?.to_kernel()?;
    let x0 = parse_vector("x0", &args.x0)?;
    let y0 = parse_vector("y0", &args.y0)?;
    let path = integrate_geodesic(&kernel, &x0, &y0, args.t, args.steps)?;
    let n = kernel.dim();
    let mut csv = String::from("t");
    for i in 1..=n {
        csv.push_str(&format!(",x{i}"));
    }
    for i in 1..=n {
        csv.push_str(&format!(",y{i}"));
    }
    csv.push('\n');
    for node in 0..path.nodes() {
        csv.push_str(&sig12(path.t[node]));
        for value in path.x[node].iter().chain(path.y[node].iter()) {
            csv.push(',');
            csv.push_str(&sig12(*value));
        }
        csv.push('\n');
    }
    write_output(&args.out, &csv)
}

fn submanifold(args: &SubmanifoldArgs) -> Result<()> {
    let metric_spec = load_metric(&args.metric)?;
    let immersion_spec = load_immersion(&args.immersion)?;
    if immersion_spec.ambient != metric_spec {
        return Err(Error::Spec(
            "--metric must match the immersion's ambient metric spec".into(),
        ));
    }
    let imm = immersion_spec.to_immersion()?;
    let u = parse_vector("u", &args.u)?;
    let v = parse_vector("v", &args.v)?;
    let sub_z = SubReferenceElement::new(&imm, u, v)?;
    let eta = mean_curvature(&imm, &sub_z)?;
    let eta_text: Vec<String> = eta.iter().map(|c| sig12(*c)).collect();
    println!("eta {}", eta_text.join(","));
    println!("umbilicity {}", sig12(umbilicity_residual(&imm, &sub_z)?));
    println!("parallelism {}", sig12(normal_parallelism_residual(&imm, &sub_z)?));
    Ok(())
}

fn verify(args: &VerifyArgs) -> Result<ExitCode> {
    let suite: Suite = args.suite.parse()?;
    let mut config = SuiteConfig::new(suite, load_metric(&args.metric)?);
    config.immersion = match &args.immersion {
        Some(path) => Some(load_immersion(path)?),
        None => None,
    };
    config.samples = args.samples;
    config.seed = args.seed;
    if let Some(tol) = args.tol {
        config.tol.positive = tol;
    }
    if let Some(floor) = args.floor {
        config.tol.floor = floor;
    }
    let report = run_suite(&config)?;
    write_output(&args.out, &report.to_json())?;
    if let Some(csv_path) = &args.csv {
        fs::write(csv_path, report.per_sample_csv())
            .map_err(|err| Error::Spec(format!("--csv {}: {err}", csv_path.display())))?;
    }
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

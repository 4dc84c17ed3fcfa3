//! `afd`: design distributionally robust separating inputs, evaluate them on
//! a true-parameter bank, and expose the underlying TV/bound/ROI math for
//! scripting.
//!
//! Exit status: 0 success, 1 validation failure, 2 runtime failure.

mod config;
mod manifest;
mod plot;
mod tables;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use afd_core::ambiguity::build_roi;
use afd_core::diagnose::{evaluate_schedule, EvaluateOptions};
use afd_core::distfit::{tv_density, MomentPdf, PdfFamily};
use afd_core::inputdesign::run_procedure;
use afd_core::worstcase::total_bound;
use afd_core::AfdError;

use config::{Profile, ScenarioConfig};
use manifest::Manifest;

#[derive(Parser)]
#[command(
    name = "afd",
    version,
    about = "Distributionally robust active fault diagnosis input design"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config and AFD_OUT_ROOT resolution.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count override.
    #[arg(long)]
    mc: Option<usize>,
    /// Scale profile: `paper` (10000 samples) or `desk` (2000).
    #[arg(long, default_value = "desk")]
    profile: Profile,
}

#[derive(Subcommand)]
enum Command {
    /// Design a piecewise-constant separating input from a scenario config.
    Design(RunArgs),
    /// Replay a designed schedule on the configured bank and report
    /// per-time common areas, observations and decisions.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        /// Schedule CSV produced by `design`.
        #[arg(long)]
        schedule: PathBuf,
        /// Index of the model the observed realization follows.
        #[arg(long, default_value_t = 0)]
        true_model: usize,
    },
    /// Moment bound on the pairwise common area: `afd bound mu1 sigma1 mu2 sigma2 [...]`.
    Bound {
        /// Flat list of per-model `mu sigma` pairs (at least two models).
        values: Vec<f64>,
    },
    /// Ambiguity box induced by a TV radius: `afd roi mu sigma radius [--box lo hi]`.
    Roi {
        mu: f64,
        sigma: f64,
        radius: f64,
        /// Interval of the measured channel.
        #[arg(long = "box", num_args = 2, default_values_t = [0.0, 0.75])]
        state_box: Vec<f64>,
    },
    /// TV distance between two moment densities:
    /// `afd tv mu1 sigma1 mu2 sigma2 [--family normal]`.
    Tv {
        mu1: f64,
        sigma1: f64,
        mu2: f64,
        sigma2: f64,
        #[arg(long, default_value = "normal")]
        family: String,
    },
}

enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Validation(_) => ExitCode::from(1),
            CliError::Runtime(_) => ExitCode::from(2),
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

fn classify(err: AfdError) -> CliError {
    match err {
        AfdError::InvalidArgument(_)
        | AfdError::UnknownScenario(_)
        | AfdError::InfeasibleMoments(_)
        | AfdError::MisalignedSpan { .. } => CliError::Validation(err.to_string()),
        _ => CliError::Runtime(err.to_string()),
    }
}

fn parse_family(name: &str) -> Result<PdfFamily, CliError> {
    match name {
        "normal" => Ok(PdfFamily::Normal),
        "gamma" => Ok(PdfFamily::Gamma),
        "beta" => Ok(PdfFamily::Beta),
        other => Err(CliError::Validation(format!("unknown family `{other}`"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Design(args) => cmd_design(args),
        Command::Evaluate {
            run,
            schedule,
            true_model,
        } => cmd_evaluate(run, schedule, true_model),
        Command::Bound { values } => cmd_bound(&values),
        Command::Roi {
            mu,
            sigma,
            radius,
            state_box,
        } => cmd_roi(mu, sigma, radius, &state_box),
        Command::Tv {
            mu1,
            sigma1,
            mu2,
            sigma2,
            family,
        } => cmd_tv(mu1, sigma1, mu2, sigma2, &family),
    }
}

fn load_resolved(args: &RunArgs) -> Result<(config::Resolved, Vec<u8>), CliError> {
    let cfg = ScenarioConfig::load(&args.config).map_err(CliError::Validation)?;
    let resolved = cfg
        .resolve(args.profile, args.seed, args.mc, args.out.clone())
        .map_err(CliError::Validation)?;
    let bytes = std::fs::read(&args.config)
        .map_err(|e| CliError::Runtime(format!("cannot reread config: {e}")))?;
    Ok((resolved, bytes))
}

fn cmd_design(args: RunArgs) -> Result<(), CliError> {
    let (resolved, config_bytes) = load_resolved(&args)?;
    std::fs::create_dir_all(&resolved.out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create output dir: {e}")))?;

    let (schedule, record) = run_procedure(
        &resolved.bank,
        &resolved.measurement_times,
        resolved.horizon,
        &resolved.design,
    )
    .map_err(classify)?;

    for rec in &record.intervals {
        if rec.rois.iter().any(|r| !r.corners_feasible) {
            eprintln!(
                "warning: interval {}: ambiguity box corners exceed the TV radius \
                 (box outer-approximates the TV ball there)",
                rec.index
            );
        }
    }

    let mut manifest = Manifest::new("design", resolved.design.seed, &config_bytes);
    let dir = &resolved.out_dir;
    manifest
        .emit(dir, "schedule.csv", &tables::schedule_csv(&schedule))
        .and_then(|_| {
            manifest.emit(
                dir,
                "design_ledger.csv",
                &tables::design_ledger_csv(&record),
            )
        })
        .and_then(|_| manifest.emit(dir, "fitted_pdfs.csv", &tables::fitted_pdfs_csv(&record)))
        .and_then(|_| manifest.emit(dir, "roi.csv", &tables::roi_csv(&record)))
        .and_then(|_| manifest.emit(dir, "worst_case.csv", &tables::worst_case_csv(&record)))
        .and_then(|_| manifest.write(dir))
        .map_err(CliError::Runtime)?;

    if let Some(failure) = &record.failure {
        return Err(CliError::Runtime(format!(
            "design infeasible on interval {} [{} s, {} s]: {} (partial schedule written to {})",
            failure.interval_index,
            failure.t0,
            failure.t1,
            failure.reason,
            dir.display()
        )));
    }
    println!(
        "designed {} segments over [0, {} s] -> {}",
        schedule.segment_count(),
        resolved.horizon,
        dir.display()
    );
    Ok(())
}

fn cmd_evaluate(args: RunArgs, schedule_path: PathBuf, true_model: usize) -> Result<(), CliError> {
    let (resolved, config_bytes) = load_resolved(&args)?;
    let schedule_text = std::fs::read_to_string(&schedule_path)
        .map_err(|e| CliError::Validation(format!("cannot read schedule: {e}")))?;
    let schedule = tables::schedule_from_csv(&schedule_text).map_err(CliError::Validation)?;
    if schedule.input_dim() != resolved.bank.n_u {
        return Err(CliError::Validation(format!(
            "schedule input dimension {} does not match the bank's {}",
            schedule.input_dim(),
            resolved.bank.n_u
        )));
    }
    if !schedule.within_box(&resolved.bank.input_box) {
        return Err(CliError::Validation(
            "schedule values violate the input box".into(),
        ));
    }

    let mut opts = EvaluateOptions::new(resolved.design.seed);
    opts.mc_count = resolved.design.mc_count;
    opts.dt = resolved.design.dt;
    opts.true_model_index = true_model;
    opts.family = resolved.family;
    let report =
        evaluate_schedule(&resolved.bank, &schedule, resolved.horizon, &opts).map_err(classify)?;

    std::fs::create_dir_all(&resolved.out_dir)
        .map_err(|e| CliError::Runtime(format!("cannot create output dir: {e}")))?;
    let mut manifest = Manifest::new("evaluate", opts.seed, &config_bytes);
    let dir = &resolved.out_dir;
    manifest
        .emit(dir, "evaluation.csv", &tables::evaluation_csv(&report))
        .and_then(|_| manifest.emit(dir, "eval_pdfs.csv", &tables::eval_pdfs_csv(&report)))
        .and_then(|_| manifest.emit(dir, "area_vs_time.svg", &plot::area_vs_time_svg(&report)))
        .and_then(|_| manifest.emit(dir, "pdfs_final.svg", &plot::final_pdfs_svg(&report)))
        .and_then(|_| manifest.write(dir))
        .map_err(CliError::Runtime)?;

    println!(
        "final-time common area: total {:.6}, pairs {:?} -> {}",
        report.final_total_area,
        report
            .final_pair_areas
            .iter()
            .map(|a| (a * 1e6).round() / 1e6)
            .collect::<Vec<_>>(),
        dir.display()
    );
    Ok(())
}

fn cmd_bound(values: &[f64]) -> Result<(), CliError> {
    if values.len() < 4 || !values.len().is_multiple_of(2) {
        return Err(CliError::Validation(format!(
            "bound needs an even number of values (mu sigma per model, at least two models), got {}",
            values.len()
        )));
    }
    let moments: Vec<(f64, f64)> = values.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    let b = total_bound(&moments).map_err(classify)?;
    println!("{b:.17}");
    Ok(())
}

fn cmd_roi(mu: f64, sigma: f64, radius: f64, state_box: &[f64]) -> Result<(), CliError> {
    let nominal = MomentPdf::normal(mu, sigma).map_err(classify)?;
    let roi = build_roi(&nominal, radius, (state_box[0], state_box[1])).map_err(classify)?;
    println!(
        "mu [{:.17}, {:.17}] sigma [{:.17}, {:.17}]",
        roi.mu_interval.0, roi.mu_interval.1, roi.sigma_interval.0, roi.sigma_interval.1
    );
    Ok(())
}

fn cmd_tv(mu1: f64, sigma1: f64, mu2: f64, sigma2: f64, family: &str) -> Result<(), CliError> {
    let fam = parse_family(family)?;
    let p = MomentPdf::new(fam, mu1, sigma1).map_err(classify)?;
    let q = MomentPdf::new(fam, mu2, sigma2).map_err(classify)?;
    let tv = tv_density(&p, &q).map_err(classify)?;
    println!("{tv:.17}");
    Ok(())
}

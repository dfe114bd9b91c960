use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cohesive_pf::assembly::Discretization;
use cohesive_pf::constitutive::{Criterion, MaterialParams};
use cohesive_pf::sim::{self, Slice};
use cohesive_pf::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ABORT: u8 = 3;

#[derive(Parser)]
#[command(
    name = "cpf",
    version,
    about = "Cohesive phase-field fracture benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a case file and write CSVs, snapshots and a summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sample the intact strength surface along strain rays.
    Surface {
        #[arg(long, value_enum)]
        criterion: CriterionArg,
        #[arg(long, default_value_t = 1.0)]
        eps_ref: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = SliceArg::PlaneStrain)]
        slice: SliceArg,
        #[arg(long, default_value_t = 360)]
        rays: usize,
        /// Phase field at which the surface is evaluated.
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
    },
    /// Evaluate a snapshot written by `run`.
    Postprocess {
        #[arg(long)]
        field: PathBuf,
        /// Print the crack length `∫ γ(φ) dΩ` in metres.
        #[arg(long)]
        crack_length: bool,
        /// Length scale, if the snapshot header does not carry it.
        #[arg(long)]
        ell: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    R1,
    Dp,
}

#[derive(Clone, Copy, ValueEnum)]
enum SliceArg {
    PlaneStrain,
    PlaneStress,
}

fn run(config: PathBuf, out: PathBuf) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&config).map_err(|e| Error::io(&config, e))?;
    let case = sim::parse_config(&text)?;
    let outcome = sim::run_case(&case, &out)?;
    match outcome.aborted {
        Some(reason) => {
            eprintln!(
                "solver aborted after {} steps: {reason}",
                outcome.records.len()
            );
            Ok(ExitCode::from(EXIT_ABORT))
        }
        None => {
            println!(
                "{} steps, peak reaction {:.6e} N/m, final crack length {:.6e} m",
                outcome.records.len(),
                outcome.peak_reaction(),
                outcome.records.last().map_or(0.0, |r| r.crack_length)
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn surface(
    criterion: CriterionArg,
    eps_ref: f64,
    out: PathBuf,
    slice: SliceArg,
    rays: usize,
    phi: f64,
) -> Result<ExitCode, Error> {
    let params = MaterialParams {
        criterion: match criterion {
            CriterionArg::R1 => Criterion::R1,
            CriterionArg::Dp => Criterion::DruckerPrager,
        },
        reference_strain: eps_ref,
        ..MaterialParams::default()
    };
    params.validate()?;
    let slice = match slice {
        SliceArg::PlaneStrain => Slice::PlaneStrain,
        SliceArg::PlaneStress => Slice::PlaneStress,
    };
    let points = sim::sample_strength_surface(&params, slice, rays, phi);
    std::fs::write(&out, sim::surface_csv(&points)).map_err(|e| Error::io(&out, e))?;
    Ok(ExitCode::SUCCESS)
}

fn postprocess(field: PathBuf, crack_length: bool, ell: Option<f64>) -> Result<ExitCode, Error> {
    let snap = sim::read_vtk(&field)?;
    let (lo, hi) = snap
        .phi
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
            (lo.min(p), hi.max(p))
        });
    println!("nodes: {}", snap.mesh.node_count());
    println!("phi_range: [{lo:.9e}, {hi:.9e}]");
    if crack_length {
        let length_scale = ell.or(snap.length_scale).ok_or_else(|| Error::Format {
            path: field.clone(),
            message: "no length scale in the snapshot header; pass --ell".into(),
        })?;
        let params = MaterialParams {
            length_scale,
            ..MaterialParams::default()
        };
        let disc = Discretization::new(snap.mesh)?;
        println!(
            "crack_length_m: {:.9e}",
            sim::crack_length(&disc, &snap.phi, &params)
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => run(config, out),
        Command::Surface {
            criterion,
            eps_ref,
            out,
            slice,
            rays,
            phi,
        } => surface(criterion, eps_ref, out, slice, rays, phi),
        Command::Postprocess {
            field,
            crack_length,
            ell,
        } => postprocess(field, crack_length, ell),
    };
    result.unwrap_or_else(|e| {
        log::error!("{e}");
        eprintln!("error: {e}");
        ExitCode::from(match e {
            Error::Config(_) | Error::Material(_) => EXIT_CONFIG,
            Error::Solver(_) => EXIT_ABORT,
            _ => EXIT_FAILURE,
        })
    })
}

//! `couette` command line: single steady-state runs and mesh convergence
//! studies for the 1D Couette BGK solver.

use bgk1d::profile::{write_profile_csv, WallReport};
use bgk1d::study::{run_case, run_convergence_study};
use bgk1d::{parse_config, RunConfig, Scheme, SolverError};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "couette", about = "Discrete-velocity BGK solver for the 1D Couette flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (key = value lines, # comments); defaults apply
    /// when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the scheme (O1, O2_flux, O2_slope, O2_slope_nolim,
    /// O2_slope_BC_O1, dg).
    #[arg(long)]
    scheme: Option<String>,
    /// Override the cell count.
    #[arg(long)]
    cells: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// March one configuration to steady state and write the profile CSV.
    Run(CommonArgs),
    /// Run the mesh ladder for one or more schemes and write the observed
    /// order table.
    Converge {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated scheme list.
        #[arg(long, default_value = "O1,O2_flux,O2_slope,dg")]
        schemes: String,
        /// Comma-separated mesh ladder.
        #[arg(long, default_value = "25,50,100,200")]
        meshes: String,
        /// Reference mesh (integer multiple of each ladder entry).
        #[arg(long, default_value_t = 400)]
        reference: usize,
    },
}

fn load_config(common: &CommonArgs) -> Result<RunConfig, SolverError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| SolverError::Io {
                path: path.display().to_string(),
                source,
            })?;
            parse_config(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = &common.scheme {
        cfg.scheme = s.parse().map_err(SolverError::Invalid)?;
    }
    if let Some(c) = common.cells {
        cfg.cells = c;
    }
    if let Some(out) = &common.out {
        cfg.output = out.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(common: &CommonArgs) -> Result<(), SolverError> {
    let cfg = load_config(common)?;
    let out = run_case(&cfg)?;
    let path = PathBuf::from(&cfg.output);
    let wall: Option<&WallReport> = if cfg.periodic { None } else { Some(&out.wall) };
    write_profile_csv(&path, &out.records, wall)?;
    let s = &out.status;
    println!(
        "scheme {}  cells {}  steps {}  residual {:.3e}  converged {}  time {:.4e} s (wall {:.1} s)",
        cfg.scheme, cfg.cells, s.steps, s.residual, s.converged, s.time, s.wall_seconds
    );
    println!(
        "mass drift {:.3e}  max |wall flux| {:.3e}  sigma ({:.6e}, {:.6e})  negative wall F values {}",
        s.mass_drift, s.max_wall_flux, s.sigma[0], s.sigma[1], s.negative_wall_values
    );
    println!("profile written to {}", path.display());
    if !s.converged {
        return Err(SolverError::Invalid(format!(
            "run did not converge within {} steps (residual {:.3e})",
            s.steps, s.residual
        )));
    }
    Ok(())
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, SolverError>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|e| SolverError::Invalid(format!("bad {what} entry '{s}': {e}")))
        })
        .collect()
}

fn cmd_converge(
    common: &CommonArgs,
    schemes: &str,
    meshes: &str,
    reference: usize,
) -> Result<(), SolverError> {
    let cfg = load_config(common)?;
    let schemes: Vec<Scheme> = parse_list(schemes, "scheme")?;
    let meshes: Vec<usize> = parse_list(meshes, "mesh")?;
    let outcome = run_convergence_study(&cfg, &schemes, &meshes, reference)?;

    let orders_path = PathBuf::from(&cfg.output);
    let errors_path = sibling_with_suffix(&orders_path, "_errors");
    bgk1d::profile::write_file(&orders_path, &outcome.orders_csv())?;
    bgk1d::profile::write_file(&errors_path, &outcome.errors_csv())?;

    println!("scheme          quantity  order");
    for row in &outcome.orders {
        println!("{:<15} {:<9} {:+.3}", row.scheme.to_string(), row.quantity, row.order);
    }
    println!("orders written to {}, raw errors to {}", orders_path.display(), errors_path.display());
    Ok(())
}

fn sibling_with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(common) => cmd_run(common),
        Command::Converge { common, schemes, meshes, reference } => {
            cmd_converge(common, schemes, meshes, *reference)
        }
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

//! `bench`: runs the sinker campaign, generates meshes and renders fields.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stokes_bddc::assembly::direct_solve_reference;
use stokes_bddc::bench::{
    build_mesh, build_problem, partition_svg, run_experiment_matrix, speed_svg, to_csv, to_structured_text,
    viscosity_svg, write_text, ExperimentConfig, MeshFamily, SinkerField, SvgField,
};
use stokes_bddc::decomp::partition_mesh;
use stokes_bddc::mesh::{read_mesh, write_mesh};
use stokes_bddc::Error;

#[derive(Parser)]
#[command(name = "bench", about = "Stokes BDDC sinker benchmark driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment matrix described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// CSV output path (overrides the config; default: stdout).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Structured-text report path (overrides the config).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Generate a mesh and write it in the text mesh format.
    Mesh {
        #[arg(long, default_value = "cvt")]
        family: String,
        #[arg(long)]
        cells: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a per-cell field as SVG.
    Svg {
        #[arg(long)]
        field: String,
        /// Mesh file; generated from --family/--cells/--seed when absent.
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[arg(long, default_value = "cvt")]
        family: String,
        #[arg(long, default_value_t = 1000)]
        cells: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        nsub: usize,
        #[arg(long, default_value_t = 11)]
        nsink: usize,
        #[arg(long, default_value_t = 1)]
        seed_sinkers: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

enum Failure {
    Config(Error),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse { .. } | Error::Io { .. } => Failure::Config(e),
            other => Failure::Solver(other.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, csv, report } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if csv.is_some() {
                cfg.csv = csv;
            }
            if report.is_some() {
                cfg.report = report;
            }
            let table = run_experiment_matrix(&cfg)?;
            let text = to_csv(&table);
            match &cfg.csv {
                Some(p) => write_text(p, &text)?,
                None => print!("{text}"),
            }
            if let Some(p) = &cfg.report {
                write_text(p, &to_structured_text(&table, &cfg))?;
            }
            let failed = table.rows.iter().filter(|r| !r.status.is_success()).count();
            if failed > 0 {
                return Err(Failure::Solver(format!(
                    "{failed} of {} runs did not succeed",
                    table.rows.len()
                )));
            }
            Ok(())
        }
        Command::Mesh {
            family,
            cells,
            seed,
            out,
        } => {
            let cfg = ExperimentConfig {
                seed_mesh: seed,
                ..ExperimentConfig::default()
            };
            let family: MeshFamily = family.parse()?;
            let mesh = build_mesh(&cfg, family, cells)?;
            write_mesh(&mesh, &out)?;
            log::info!("wrote {} cells to {}", mesh.n_cells(), out.display());
            Ok(())
        }
        Command::Svg {
            field,
            mesh,
            family,
            cells,
            seed,
            nsub,
            nsink,
            seed_sinkers,
            out,
        } => {
            let field: SvgField = field.parse()?;
            let cfg = ExperimentConfig {
                seed_mesh: seed,
                seed_sinkers,
                ..ExperimentConfig::default()
            };
            let mesh = match mesh {
                Some(p) => read_mesh(p)?,
                None => build_mesh(&cfg, family.parse()?, cells)?,
            };
            let svg = match field {
                SvgField::Viscosity => viscosity_svg(&mesh, &SinkerField::new(nsink, seed_sinkers, cfg.sinker))?,
                SvgField::Partition => partition_svg(&mesh, &partition_mesh(&mesh, nsub, &cfg.partition, seed)?),
                SvgField::Speed => {
                    let decomp = stokes_bddc::decomp::Decomposition::single(&mesh);
                    let dd = build_problem(&cfg, &mesh, &decomp, nsink)?;
                    speed_svg(&mesh, &direct_solve_reference(&dd.reduced)?)
                }
            };
            write_text(&out, &svg)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lsl_cli::commands::{self, Overrides};
use lsl_cli::config::RunConfig;
use lsl_cli::{CliError, Result};
use lsl_core::classify::{render_table, RunOptions, DEFAULT_GAMMA, DEFAULT_HORIZON};
use lsl_core::lindblad::Integrator;
use lsl_core::operators::OperatorSpec;
use lsl_core::response::DEFAULT_QUADRATURE_PANELS;
use lsl_core::tolerance::Tolerances;

/// Lindblad dynamics of symmetry-protected degenerate subspaces.
///
/// Tolerances can be scaled with the LSL_TOLERANCE_SCALE environment
/// variable.
#[derive(Parser)]
#[command(name = "lsl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one configuration and write a time-series CSV and a JSON summary.
    Simulate(SimulateArgs),
    /// Reproduce the 16-row classification table; exits 1 on any mismatch.
    Table(TableArgs),
    /// Compare Lindblad and first-order results over several rates.
    Sweep(SweepArgs),
    /// Print hermiticity and symmetry flags of a coupling operator.
    ClassifyOp(ClassifyArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_parser = parse_integrator)]
    integrator: Option<Integrator>,
    /// Propagation horizon in units of 1/gamma.
    #[arg(long)]
    horizon: Option<f64>,
    /// Output directory; defaults to the paths in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_HORIZON)]
    horizon: f64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Accepted for symmetry with `simulate`; the table always uses the
    /// Liouvillian exponential.
    #[arg(long, value_parser = parse_integrator, hide = true)]
    integrator: Option<Integrator>,
    /// Invert one expected verdict to exercise the failure path.
    #[arg(long, hide = true)]
    inject_mismatch: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated rates.
    #[arg(long, value_delimiter = ',', required = true)]
    gamma: Vec<f64>,
    /// Time at which Lindblad and first-order states are compared.
    #[arg(long, default_value_t = 5.0)]
    probe_time: f64,
    #[arg(long, default_value_t = DEFAULT_QUADRATURE_PANELS)]
    n_quad: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Catalog name of the operator (see --list).
    name: Option<String>,
    /// Take the coupling operator and spin from a config file.
    #[arg(long, conflicts_with = "name")]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1.5)]
    spin: f64,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
    /// List catalog operator names.
    #[arg(long)]
    list: bool,
}

fn parse_integrator(s: &str) -> std::result::Result<Integrator, String> {
    s.parse().map_err(|e: lsl_core::Error| e.to_string())
}

fn stem(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string()
}

fn run(cli: Cli) -> Result<ExitCode> {
    let tol = Tolerances::from_env();
    match cli.command {
        Command::Simulate(a) => {
            let mut cfg = RunConfig::load(&a.config)?;
            Overrides { gamma: a.gamma, integrator: a.integrator, horizon: a.horizon }.apply(&mut cfg)?;
            let (csv, summary) = commands::simulation_paths(&cfg, a.out.as_deref(), &stem(&a.config))?;
            let sim = commands::simulate(&cfg, &tol)?;
            commands::write_simulation(&sim, &csv, &summary)?;
            let s = &sim.summary;
            println!(
                "{} / {}: {} (max S_v {:.6e}, terminal S_v {:.6e}, L_G block residual {:.3e})",
                s.hamiltonian, s.coupling, s.verdict, s.max_entropy, s.terminal_entropy, s.block_identity.residual
            );
            println!("wrote {} and {}", csv.display(), summary.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Table(a) => {
            let opts = RunOptions { tolerances: tol, ..RunOptions::default() };
            let report = commands::table(a.gamma, a.horizon, &opts, a.inject_mismatch)?;
            commands::write_table(&report, &a.out)?;
            print!("{}", render_table(&report));
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Sweep(a) => {
            let cfg = RunConfig::load(&a.config)?;
            let sweep = commands::sweep(&cfg, &a.gamma, a.probe_time, a.n_quad, &tol)?;
            let written = commands::write_sweep(&sweep, &a.out, &stem(&a.config))?;
            print!("{}", sweep.csv);
            match sweep.summary.discrepancy_exponent {
                Some(e) => println!("fitted exponent {e:.4}"),
                None => println!("discrepancies at the round-off floor; no exponent fitted"),
            }
            for p in written {
                println!("wrote {}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ClassifyOp(a) => {
            if a.list {
                println!("{}", commands::coupling_names());
                return Ok(ExitCode::SUCCESS);
            }
            let (spec, spin) = match (&a.name, &a.config) {
                (Some(n), None) => (OperatorSpec::named(n.clone()), a.spin),
                (None, Some(path)) => {
                    let cfg = RunConfig::load(path)?;
                    (cfg.coupling, cfg.spin)
                }
                _ => return Err(CliError::Usage("give an operator name or --config".into())),
            };
            let report = commands::classify_operator(&spec, spin, &tol)?;
            if a.json {
                println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                print!("{}", commands::render_operator_report(&report));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

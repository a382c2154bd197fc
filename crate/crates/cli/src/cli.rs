//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser};
use serde_json::json;

use crate::commands::{self, Subcommand};
use crate::config::{BoundaryKind, ExperimentConfig, GridConfig, MethodKind};
use crate::error::CliError;

pub const DEFAULT_OUT: &str = "results";

#[derive(Debug, Parser)]
#[command(name = "jacobi-spectra", version = env!("JACOBI_SPECTRA_VERSION"))]
#[command(about = "Spectra, Lyapunov exponents and potentials of random non-Hermitian Jacobi matrices")]
pub struct Cli {
    #[command(flatten)]
    pub common: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Subcommand)]
pub enum Command {
    /// Eigenvalues of sampled matrices (NDJSON).
    SampleSpectrum,
    /// Lyapunov exponents on a grid (NDJSON).
    LyapunovMap,
    /// Thouless residuals on a circle (CSV).
    ThoulessCheck {
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Log-Hölder profiles of one spectrum (CSV).
    HolderProfile,
    /// Smoothed-measure distances along the n ladder (CSV), optionally
    /// with the Laplacian of γ.
    ConvergenceStudy {
        /// Comma-separated sizes, e.g. 250,500,1000,2000.
        #[arg(long)]
        n_ladder: Option<String>,
        #[arg(long)]
        gamma_density: bool,
    },
    /// Dirichlet against periodic Hatano–Nelson spectra (NDJSON).
    HnDemo {
        #[arg(long, allow_negative_numbers = true)]
        g: Option<f64>,
    },
    /// Empirical tail functionals against their trace bounds (CSV).
    TailBounds,
    /// Print the resolved config as TOML with its hash, then exit.
    PrintConfig,
}

/// Flags shared by every subcommand. They override the config file.
#[derive(Debug, Args)]
pub struct Overrides {
    /// TOML experiment config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// TOML file with a distribution table; replaces the config's.
    #[arg(long, global = true)]
    pub dist: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub replicas: Option<usize>,
    #[arg(long, global = true)]
    pub lyapunov_n: Option<usize>,
    #[arg(long, global = true)]
    pub lyapunov_replicas: Option<usize>,
    /// dirichlet or periodic.
    #[arg(long, global = true)]
    pub boundary: Option<String>,
    /// norm, furstenberg, recurrence or pair.
    #[arg(long, global = true)]
    pub method: Option<String>,
    /// "re0,re1,im0,im1,nx,ny".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<String>,
}

/// Resolve defaults, file, environment and flags into one config.
pub fn resolve(cli: &Cli, env: &dyn Fn(&str) -> Option<String>) -> Result<ExperimentConfig, CliError> {
    let o = &cli.common;
    let mut cfg = match &o.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply_env(env)?;
    if let Some(p) = &o.dist {
        cfg.distribution = ExperimentConfig::distribution_from_file(p)?;
    }
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.threads {
        cfg.threads = Some(v);
    }
    if let Some(v) = &o.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = o.n {
        cfg.n = v;
    }
    if let Some(v) = o.replicas {
        cfg.replicas = v;
    }
    if let Some(v) = o.lyapunov_n {
        cfg.lyapunov_n = v;
    }
    if let Some(v) = o.lyapunov_replicas {
        cfg.lyapunov_replicas = v;
    }
    if let Some(v) = &o.boundary {
        cfg.boundary = match v.as_str() {
            "dirichlet" => BoundaryKind::Dirichlet,
            "periodic" => BoundaryKind::Periodic,
            _ => return Err(CliError::config(format!("unknown boundary '{v}'; expected dirichlet or periodic"))),
        };
    }
    if let Some(v) = &o.method {
        cfg.method = MethodKind::parse(v)?;
    }
    if let Some(v) = &o.grid {
        cfg.grid = GridConfig::parse(v)?;
    }
    match &cli.command {
        Command::ThoulessCheck { radius, points } => {
            if let Some(r) = radius {
                cfg.thouless.radius = *r;
            }
            if let Some(p) = points {
                cfg.thouless.points = *p;
            }
        }
        Command::ConvergenceStudy { n_ladder, gamma_density } => {
            if let Some(l) = n_ladder {
                cfg.n_ladder = l
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| CliError::config(format!("n-ladder '{l}' is not a list of sizes")))?;
            }
            if *gamma_density {
                cfg.convergence.gamma_density = true;
            }
        }
        Command::HnDemo { g: Some(g) } => cfg.hn_demo.g = *g,
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn subcommand(c: &Command) -> Option<Subcommand> {
    Some(match c {
        Command::SampleSpectrum => Subcommand::SampleSpectrum,
        Command::LyapunovMap => Subcommand::LyapunovMap,
        Command::ThoulessCheck { .. } => Subcommand::ThoulessCheck,
        Command::HolderProfile => Subcommand::HolderProfile,
        Command::ConvergenceStudy { .. } => Subcommand::ConvergenceStudy,
        Command::HnDemo { .. } => Subcommand::HnDemo,
        Command::TailBounds => Subcommand::TailBounds,
        Command::PrintConfig => return None,
    })
}

/// Parse `args`, run, and report. Returns the process exit code.
///
/// Success prints one JSON summary line on `stdout`; warnings and errors go
/// to `stderr` as one JSON object per line.
pub fn main_with(
    args: impl IntoIterator<Item = impl Into<OsString> + Clone>,
    env: &dyn Fn(&str) -> Option<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let msg = e.render().to_string();
            let err = CliError::config(msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: "));
            let _ = writeln!(stderr, "{}", err.to_json());
            return err.exit_code();
        }
    };
    match run_parsed(&cli, env, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.exit_code()
        }
    }
}

fn run_parsed(
    cli: &Cli,
    env: &dyn Fn(&str) -> Option<String>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let cfg = resolve(cli, env)?;
    let stdio = |e| CliError::io(std::path::Path::new("<stdout>"), e);
    let Some(cmd) = subcommand(&cli.command) else {
        writeln!(stdout, "# config_hash = \"{}\"\n{}", cfg.config_hash(), cfg.to_toml()).map_err(stdio)?;
        return Ok(());
    };
    let out_dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let report = commands::run(cmd, &cfg, &out_dir)?;
    for w in &report.output.warnings {
        let _ = writeln!(stderr, "{}", json!({ "warning": w }));
    }
    let line = json!({
        "subcommand": cmd.name(),
        "config_hash": report.config_hash,
        "files": report.written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "wall_time_s": report.wall_time_s,
        "summary": report.output.summary,
    });
    writeln!(stdout, "{line}").map_err(stdio)?;
    Ok(())
}

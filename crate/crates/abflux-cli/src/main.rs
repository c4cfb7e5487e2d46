//! Command-line front end for the flux-tube interference library.
//!
//! `abflux list` prints the six experiments with ready-to-edit template
//! configs; `abflux run <config>` executes one and writes its datasets
//! plus a manifest. Runs are deterministic: the same config and seed
//! produce byte-identical outputs, and nothing is written unless the
//! whole computation succeeds.
//!
//! Exit codes: 0 success, 2 config error (parse failure, unknown key,
//! value outside its domain), 3 numerical-tolerance failure (the
//! quadrature or a verification could not reach its target), 1 anything
//! else (I/O).

mod config;
mod experiments;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abflux::error::Error as PhysicsError;
use abflux::quadrature::QuadConfig;
use abflux::units::Units;
use clap::{Parser, Subcommand, ValueEnum};

use config::{ConfigError, Resolved};
use experiments::{Dataset, Experiment, RunContext, RunError, EXPERIMENTS};

#[derive(Parser)]
#[command(
    name = "abflux",
    version,
    about = "Flux-tube interference experiments: fringes, transport, gauge audits, dynamical checks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an experiment config and write its datasets
    Run {
        /// Path to a sectioned key-value config (see `abflux list` for templates)
        config: PathBuf,
        /// Override the [run] seed
        #[arg(long)]
        seed: Option<u64>,
        /// Write outputs here instead of the configured [run] out_dir
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Replace the [tolerance] section with a named profile
        #[arg(long, value_enum)]
        tolerance_profile: Option<Profile>,
    },
    /// List the experiments and print a template config for each
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    /// rel 1e-6, abs 1e-10, 4000 panels
    Fast,
    /// rel 1e-8, abs 1e-12, 16000 panels
    Accurate,
}

impl Profile {
    fn tolerances(self) -> (&'static str, &'static str, &'static str) {
        match self {
            Profile::Fast => ("1e-6", "1e-10", "4000"),
            Profile::Accurate => ("1e-8", "1e-12", "16000"),
        }
    }
}

enum CliError {
    Io { context: String, source: std::io::Error },
    Config { path: Option<PathBuf>, source: ConfigError },
    Physics { context: String, source: PhysicsError },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config { .. } => 2,
            // A tolerance the engine could not meet is the one failure
            // mode a correct config can still hit; everything else the
            // engine rejects traces back to configured values.
            CliError::Physics { source, .. } => match source {
                PhysicsError::ToleranceFailure { .. } | PhysicsError::DivergentTail(_) => 3,
                _ => 2,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io { context, source } => write!(f, "{context}: {source}"),
            CliError::Config { path: Some(p), source } => {
                write!(f, "{}: {source}", p.display())
            }
            CliError::Config { path: None, source } => write!(f, "{source}"),
            CliError::Physics { context, source } => write!(f, "{context}: {source}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::List => {
            print!("{}", render_list());
            Ok(())
        }
        Cmd::Run { config, seed, out_dir, tolerance_profile } => {
            run(&config, seed, out_dir, tolerance_profile)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("abflux: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn render_list() -> String {
    let mut out = String::from("experiments:\n\n");
    for exp in EXPERIMENTS {
        out.push_str(&format!("  {}\n      {}\n\n", exp.name, exp.summary));
    }
    out.push_str("save a template below to a file, edit it, then `abflux run <file>`:\n");
    for exp in EXPERIMENTS {
        out.push_str(&format!("\n--- template: {} ---\n", exp.name));
        out.push_str(&config::render_template(&exp.schema()));
        out.push_str("--- end template ---\n");
    }
    out
}

fn run(
    config_path: &Path,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    profile: Option<Profile>,
) -> Result<(), CliError> {
    let text = fs::read_to_string(config_path).map_err(|source| CliError::Io {
        context: format!("reading {}", config_path.display()),
        source,
    })?;
    let at_path = |source: ConfigError| CliError::Config {
        path: Some(config_path.to_path_buf()),
        source,
    };

    let raw = config::parse(&text).map_err(at_path)?;
    let (name, line, column) = raw.experiment_name().map_err(at_path)?;
    let exp = experiments::find(name).ok_or_else(|| {
        at_path(ConfigError::new(
            line,
            column,
            format!("unknown experiment `{name}`; `abflux list` shows the six available"),
        ))
    })?;
    let mut resolved = raw.resolve(&exp.schema()).map_err(at_path)?;

    if let Some(seed) = seed {
        resolved.set("run", "seed", seed.to_string());
    }
    if let Some(profile) = profile {
        let (rel, abs, panels) = profile.tolerances();
        resolved.set("tolerance", "rel", rel.to_string());
        resolved.set("tolerance", "abs", abs.to_string());
        resolved.set("tolerance", "max_panels", panels.to_string());
    }

    let ctx = context_from(&resolved).map_err(at_path)?;
    let datasets = exp.run(&resolved, &ctx).map_err(|e| match e {
        RunError::Config(source) => at_path(source),
        RunError::Physics { context, source } => CliError::Physics { context, source },
    })?;

    // Nothing above touched the filesystem: a run that fails its
    // tolerance leaves no output directory behind.
    let dir = out_dir.unwrap_or_else(|| PathBuf::from(resolved.str("run", "out_dir")));
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        context: format!("creating {}", dir.display()),
        source,
    })?;
    let mut write = |name: &str, contents: &str| -> Result<(), CliError> {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Io {
            context: format!("writing {}", path.display()),
            source,
        })
    };
    for ds in &datasets {
        write(ds.filename, &ds.contents)?;
    }
    write("manifest.txt", &render_manifest(exp, &resolved, &datasets))?;

    println!("experiment: {}", exp.name);
    for ds in &datasets {
        println!("  {} — {}", dir.join(ds.filename).display(), ds.note);
    }
    println!("  {}", dir.join("manifest.txt").display());
    Ok(())
}

fn context_from(resolved: &Resolved) -> Result<RunContext, ConfigError> {
    let units = match resolved.str("units", "mode") {
        "natural" => Units::natural(),
        "gaussian-cgs" => Units::gaussian_cgs(),
        other => {
            return Err(resolved.error_at(
                "units",
                "mode",
                format!("units.mode must be `natural` or `gaussian-cgs`, got `{other}`"),
            ))
        }
    };
    let rel = resolved.f64("tolerance", "rel")?;
    let abs = resolved.f64("tolerance", "abs")?;
    let max_panels = resolved.usize("tolerance", "max_panels")?;
    if !(rel > 0.0 && rel.is_finite() && abs > 0.0 && abs.is_finite()) {
        return Err(resolved.error_at(
            "tolerance",
            "rel",
            "tolerance targets must be positive and finite".into(),
        ));
    }
    if max_panels == 0 {
        return Err(resolved.error_at(
            "tolerance",
            "max_panels",
            "max_panels must be at least 1".into(),
        ));
    }
    Ok(RunContext {
        seed: resolved.u64("run", "seed")?,
        units,
        quad: QuadConfig { rel_tol: rel, abs_tol: abs, max_panels },
    })
}

/// The manifest records what was computed and from which parameters.
/// It contains no timestamps and never the realized output directory,
/// so identical config + seed gives byte-identical output trees no
/// matter where they land.
fn render_manifest(exp: &Experiment, resolved: &Resolved, datasets: &[Dataset]) -> String {
    let mut out = String::new();
    out.push_str(&format!("abflux run: {}\n", exp.name));
    out.push_str(&format!("code version: {}\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("summary: {}\n", exp.summary));
    out.push_str("\nparameters (as run)\n-------------------\n");
    out.push_str(&resolved.render());
    out.push_str("\ndatasets\n--------\n");
    for ds in datasets {
        out.push_str(&format!("{}\n    {}\n", ds.filename, ds.note));
    }
    out.push_str("manifest.txt\n    this file\n");
    out
}

//! Command-line front end: one subcommand per experiment, each writing its
//! reports and a manifest under `<out>/<subcommand>/`.

pub mod config;
pub mod experiments;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use sha2::{Digest, Sha256};
use thiserror::Error;

use config::{Diagnostic, LoadedConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", render(.0))]
    Config(Vec<Diagnostic>),
    #[error("{operation} failed: {source}")]
    Numerical {
        operation: String,
        #[source]
        source: crate::error::Error,
    },
    #[error("cannot {action} {path}: {source}")]
    Io {
        action: &'static str,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn render(d: &[Diagnostic]) -> String {
    d.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub(crate) trait WithOperation<T> {
    fn op(self, operation: &str) -> Result<T, CliError>;
}

impl<T> WithOperation<T> for crate::error::Result<T> {
    fn op(self, operation: &str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical {
            operation: operation.to_string(),
            source,
        })
    }
}

/// One report file, kept in memory until the run finishes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    Exponent,
    Psmeasure,
    Shadowlemma,
    Gpscheck,
    Green,
    Rigidity,
    Convexity,
    Gap,
    Conical,
    Bms,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Exponent => "exponent",
            Experiment::Psmeasure => "psmeasure",
            Experiment::Shadowlemma => "shadowlemma",
            Experiment::Gpscheck => "gpscheck",
            Experiment::Green => "green",
            Experiment::Rigidity => "rigidity",
            Experiment::Convexity => "convexity",
            Experiment::Gap => "gap",
            Experiment::Conical => "conical",
            Experiment::Bms => "bms",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pslab", version, about = "Patterson–Sullivan experiments on free groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Critical exponent, growth samples and divergence type.
    Exponent(RunArgs),
    /// Markov PS measure, quasi-invariance and the Patterson construction.
    Psmeasure(RunArgs),
    /// Shadow masses against e^{-δ‖γ‖}.
    Shadowlemma(RunArgs),
    /// Cocycle, GPS, BMS and duality defects.
    Gpscheck(RunArgs),
    /// Green potential of a random walk, checked by simulation.
    Green(RunArgs),
    /// Rigidity statistic for pairs of potentials.
    Rigidity(RunArgs),
    /// Exponent of convex combinations of normalized potentials.
    Convexity(RunArgs),
    /// Exponent of a free factor against the ambient group.
    Gap(RunArgs),
    /// Conical-limit-set coverage by shadows.
    Conical(RunArgs),
    /// Invariance of the BMS measure.
    Bms(RunArgs),
    /// Check a configuration without running anything.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON configuration file.
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Output root; reports go to `<out>/<subcommand>/`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config value, e.g. `--set exponent.fit_radius=14`.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    config: PathBuf,
    #[arg(long = "set", value_name = "PATH=VALUE")]
    set: Vec<String>,
}

/// Reads, overrides and validates a configuration file.
pub fn load_config(path: &Path, overrides: &[String], section: Option<&str>) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        action: "read",
        path: path.to_path_buf(),
        source,
    })?;
    let loaded = config::load(&text, overrides).map_err(CliError::Config)?;
    let problems = loaded.diagnostics_for(section);
    if !problems.is_empty() {
        return Err(CliError::Config(problems));
    }
    Ok(loaded)
}

/// Runs one experiment on the current rayon pool.
pub fn run_experiment(kind: Experiment, loaded: &LoadedConfig, seed: Option<u64>) -> Result<Vec<OutputFile>, CliError> {
    let cfg = &loaded.config;
    let seed = seed.or(cfg.seed);
    match kind {
        Experiment::Exponent => experiments::exponent(cfg),
        Experiment::Psmeasure => experiments::psmeasure(cfg),
        Experiment::Shadowlemma => experiments::shadowlemma(cfg),
        Experiment::Gpscheck => experiments::gpscheck(cfg, seed),
        Experiment::Green => experiments::green(cfg, seed),
        Experiment::Rigidity => experiments::rigidity(cfg),
        Experiment::Convexity => experiments::convexity(cfg),
        Experiment::Gap => experiments::gap(cfg),
        Experiment::Conical => experiments::conical(cfg),
        Experiment::Bms => experiments::bms(cfg),
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn execute(kind: Experiment, args: RunArgs) -> Result<PathBuf, CliError> {
    let loaded = load_config(&args.config, &args.set, Some(kind.name()))?;
    let seed = args.seed.or(loaded.config.seed);
    let workers = args.workers.unwrap_or_else(rayon::current_num_threads).max(1);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| CliError::Io {
        action: "start worker pool for",
        path: args.config.clone(),
        source: std::io::Error::other(e),
    })?;
    let started = Instant::now();
    let files = pool.install(|| run_experiment(kind, &loaded, seed))?;
    let elapsed = started.elapsed().as_secs_f64();

    let root = args
        .out
        .or_else(|| loaded.config.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let dir = root.join(kind.name());
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        action: "create",
        path: dir.clone(),
        source,
    })?;
    let write = |name: &str, contents: &str| {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|source| CliError::Io {
            action: "write",
            path,
            source,
        })
    };
    for f in &files {
        write(&f.name, &f.contents)?;
    }
    let canonical = serde_json::to_string(&loaded.value).expect("config serializes");
    let manifest = json!({
        "subcommand": kind.name(),
        "config_sha256": sha256_hex(canonical.as_bytes()),
        "config": loaded.value,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
        "workers": workers,
        "wall_time_seconds": elapsed,
        "files": files.iter().map(|f| json!({"name": f.name, "sha256": sha256_hex(f.contents.as_bytes())})).collect::<Vec<_>>(),
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    write("MANIFEST.json", &text)?;
    Ok(dir)
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with(args: impl IntoIterator<Item = OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let kind = match cli.command {
        Command::Validate(v) => {
            return match load_config(&v.config, &v.set, None) {
                Ok(_) => {
                    println!("ok");
                    0
                }
                Err(e) => {
                    eprintln!("{e}");
                    e.exit_code()
                }
            };
        }
        Command::Exponent(a) => (Experiment::Exponent, a),
        Command::Psmeasure(a) => (Experiment::Psmeasure, a),
        Command::Shadowlemma(a) => (Experiment::Shadowlemma, a),
        Command::Gpscheck(a) => (Experiment::Gpscheck, a),
        Command::Green(a) => (Experiment::Green, a),
        Command::Rigidity(a) => (Experiment::Rigidity, a),
        Command::Convexity(a) => (Experiment::Convexity, a),
        Command::Gap(a) => (Experiment::Gap, a),
        Command::Conical(a) => (Experiment::Conical, a),
        Command::Bms(a) => (Experiment::Bms, a),
    };
    match execute(kind.0, kind.1) {
        Ok(dir) => {
            println!("{}", dir.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

//! `spps`: run one computation described by a JSON config file.
//!
//! Exit codes: 0 success, 1 I/O failure while writing results,
//! 2 invalid configuration or inputs, 3 numerical failure.

mod config;
mod run;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::run::{Artifact, Failure, Runner};

const DEFAULT_OUTPUT_DIR: &str = "spps-output";

#[derive(Parser, Debug)]
#[command(
    name = "spps",
    version,
    about = "Spectral parameter power series for Sturm-Liouville problems"
)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report progress and warnings on stderr.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    command: &'a str,
    config_sha256: String,
    library_version: &'a str,
    files: Vec<&'a str>,
    warnings: &'a [String],
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, err)) => {
            eprintln!("spps: error: {err:#}");
            ExitCode::from(code)
        }
    }
}

fn execute(args: &Args) -> std::result::Result<(), (u8, anyhow::Error)> {
    let raw = fs::read(&args.config)
        .with_context(|| format!("cannot read config {}", args.config.display()))
        .map_err(|e| (2, e))?;
    let text = std::str::from_utf8(&raw)
        .context("config is not UTF-8")
        .map_err(|e| (2, e))?;
    let cfg = run::load(text).map_err(|e| (2, e))?;
    let base = args.config.parent().unwrap_or(Path::new("."));
    let outcome = Runner::new(&cfg, base, args.verbose)
        .run()
        .map_err(|f: Failure| (f.exit_code(), anyhow::anyhow!("{:#}", f.error())))?;

    let out_dir = args
        .out
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(|d| base.join(d)))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    let manifest = Manifest {
        schema_version: config::SCHEMA_VERSION,
        command: cfg.command.name(),
        config_sha256: hex::encode(Sha256::digest(&raw)),
        library_version: spps_core::VERSION,
        files: outcome.artifacts.iter().map(|a| a.name.as_str()).collect(),
        warnings: &outcome.warnings,
    };
    let mut manifest_text = serde_json::to_string_pretty(&manifest).map_err(|e| (1, e.into()))?;
    manifest_text.push('\n');
    write_all(&out_dir, &outcome.artifacts, manifest_text.as_bytes()).map_err(|e| (1, e))?;
    if args.verbose {
        eprintln!(
            "spps: wrote {} files to {}",
            outcome.artifacts.len() + 1,
            out_dir.display()
        );
    }
    Ok(())
}

fn write_all(dir: &Path, artifacts: &[Artifact], manifest: &[u8]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.contents).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let path = dir.join("manifest.json");
    fs::write(&path, manifest).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

//! Command-line surface for the chfgen engine: configuration files,
//! dataset/checkpoint/report file formats, and the seven subcommands
//! (`prepare`, `train`, `generate`, `uq`, `evaluate`, `physics-check`,
//! `steam`).

pub mod checkpoint_io;
pub mod commands;
pub mod config;
pub mod csvio;
pub mod error;
pub mod manifest;

use config::ConfigReader;
use error::CliError;
use std::path::PathBuf;

pub const USAGE: &str = "\
usage: chfgen <command> [--config <path>] [--seed <int>] [--out <dir>]
commands:
  prepare        load and validate a dataset, write split manifest + summary
  train          train a diffusion model, write checkpoint + loss history
  generate       draw synthetic samples from a checkpoint
  uq             Monte-Carlo generation ensembles per condition row
  evaluate       real-vs-generated statistical comparison report
  physics-check  energy-balance consistency report of outlet quality
  steam          saturation-line property lookups
                 (--tsat <MPa> | --psat <K> | --hf <MPa> | --hg <MPa>
                  | --hfg <MPa> | --batch <csv>)";

/// Parses argv (excluding the program name) and runs the command.
pub fn run(args: &[String]) -> Result<(), CliError> {
    let command = args
        .first()
        .ok_or_else(|| CliError::Usage(format!("missing command\n{USAGE}")))?
        .as_str();

    let mut config_path: Option<PathBuf> = None;
    let mut seed_override: Option<String> = None;
    let mut out_override: Option<String> = None;
    let mut steam_args = commands::steam::SteamArgs {
        tsat: None,
        psat: None,
        hf: None,
        hg: None,
        hfg: None,
        batch: None,
        out: PathBuf::from("out"),
    };

    let mut i = 1;
    while i < args.len() {
        let flag = args[i].as_str();
        let mut value = |name: &str| -> Result<String, CliError> {
            i += 1;
            args.get(i)
                .cloned()
                .ok_or_else(|| CliError::Usage(format!("flag {name} needs a value")))
        };
        match flag {
            "--config" => config_path = Some(PathBuf::from(value("--config")?)),
            "--seed" => seed_override = Some(value("--seed")?),
            "--out" => out_override = Some(value("--out")?),
            "--tsat" | "--psat" | "--hf" | "--hg" | "--hfg" if command == "steam" => {
                let v: f64 = value(flag)?
                    .parse()
                    .map_err(|_| CliError::Usage(format!("flag {flag} needs a number")))?;
                match flag {
                    "--tsat" => steam_args.tsat = Some(v),
                    "--psat" => steam_args.psat = Some(v),
                    "--hf" => steam_args.hf = Some(v),
                    "--hg" => steam_args.hg = Some(v),
                    _ => steam_args.hfg = Some(v),
                }
            }
            "--batch" if command == "steam" => {
                steam_args.batch = Some(PathBuf::from(value("--batch")?))
            }
            other => {
                return Err(CliError::Usage(format!("unknown flag `{other}`\n{USAGE}")));
            }
        }
        i += 1;
    }

    if command == "steam" {
        if let Some(out) = out_override {
            steam_args.out = PathBuf::from(out);
        }
        return commands::steam::run(steam_args);
    }

    let mut cfg = match &config_path {
        Some(path) => ConfigReader::load(path)?,
        None => ConfigReader::empty(),
    };
    if let Some(seed) = seed_override {
        cfg.set("seed", seed);
    }
    if let Some(out) = out_override {
        cfg.set("out", out);
    }

    match command {
        "prepare" => commands::prepare::run(cfg),
        "train" => commands::train::run(cfg),
        "generate" => commands::generate::run(cfg),
        "uq" => commands::uq::run(cfg),
        "evaluate" => commands::evaluate::run(cfg),
        "physics-check" => commands::physics_check::run(cfg),
        other => Err(CliError::Usage(format!(
            "unknown command `{other}`\n{USAGE}"
        ))),
    }
}

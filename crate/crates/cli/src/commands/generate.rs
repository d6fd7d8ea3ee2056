//! `generate`: draw synthetic samples from a checkpoint, optionally
//! recording denoising-trajectory snapshots.

use super::out_dir;
use crate::checkpoint_io;
use crate::config::ConfigReader;
use crate::csvio::{read_table, write_csv, CsvCell};
use crate::error::CliError;
use crate::manifest::Manifest;
use chfgen_core::diffusion::{
    sample_cdm, sample_dm, trajectory_cdm, trajectory_dm, Checkpoint, ModelKind, Trajectory,
};
use chfgen_core::matrix::Matrix;
use std::path::Path;

fn write_trajectory(
    path: &Path,
    stamp: &str,
    columns: &[String],
    traj: &Trajectory,
) -> Result<(), CliError> {
    let mut header = vec!["t".to_string(), "row".to_string()];
    header.extend(columns.iter().cloned());
    let mut rows: Vec<Vec<CsvCell>> = Vec::new();
    for (t, states) in &traj.snapshots {
        for r in 0..states.rows() {
            let mut row = vec![CsvCell::Int(*t as u64), CsvCell::Int(r as u64)];
            row.extend(states.row(r).iter().map(|&v| CsvCell::Float(v)));
            rows.push(row);
        }
    }
    write_csv(path, stamp, &header, rows)
}

pub fn run(mut cfg: ConfigReader) -> Result<(), CliError> {
    let out = out_dir(&mut cfg)?;
    let ckpt_path = cfg.require_path("checkpoint")?;
    let seed = cfg.get_u64("seed", 0)?;
    let n = cfg.get_usize("n", 1000)?;
    let conditions_path = cfg.get_opt_str("conditions");
    let stride = cfg.get_usize("trajectory_stride", 0)?;
    let delim_raw = cfg.get_str("delimiter", ",");
    let delimiter = delim_raw
        .chars()
        .next()
        .filter(|_| delim_raw.chars().count() == 1)
        .ok_or_else(|| CliError::Config("delimiter must be a single character".to_string()))?;

    let ckpt: Checkpoint = checkpoint_io::load(&ckpt_path)?;
    let resolved = cfg.finish()?;
    let manifest = Manifest::new("generate", &resolved);
    manifest.write(&out)?;
    let stamp = manifest.stamp();

    let samples_path = out.join("samples.csv");
    match ckpt.kind {
        ModelKind::Dm => {
            let samples = sample_dm(&ckpt, n, seed)?;
            let mut header = ckpt.columns.clone();
            header.push("seed".to_string());
            write_csv(
                &samples_path,
                &stamp,
                &header,
                (0..samples.rows()).map(|i| {
                    let mut row: Vec<CsvCell> =
                        samples.row(i).iter().map(|&v| CsvCell::Float(v)).collect();
                    row.push(CsvCell::Int(seed.wrapping_add(i as u64)));
                    row
                }),
            )?;
            if stride > 0 {
                let traj = trajectory_dm(&ckpt, n, stride, seed)?;
                write_trajectory(&out.join("trajectory.csv"), &stamp, &ckpt.columns, &traj)?;
            }
            println!("generate: {} unconditional samples", samples.rows());
        }
        ModelKind::Cdm => {
            let cond_path = conditions_path.ok_or_else(|| {
                CliError::Config("conditional checkpoints need `conditions = <csv>`".to_string())
            })?;
            let table = read_table(Path::new(&cond_path), delimiter)?;
            let cond_names: Vec<&str> = ckpt.columns[..ckpt.columns.len() - 1]
                .iter()
                .map(String::as_str)
                .collect();
            let conditions: Matrix = table.select(&cond_names)?;
            let chf = sample_cdm(&ckpt, &conditions, seed)?;
            let mut header: Vec<String> = ckpt.columns.clone();
            header.push("seed".to_string());
            write_csv(
                &samples_path,
                &stamp,
                &header,
                (0..conditions.rows()).map(|i| {
                    let mut row: Vec<CsvCell> = conditions
                        .row(i)
                        .iter()
                        .map(|&v| CsvCell::Float(v))
                        .collect();
                    row.push(CsvCell::Float(chf[i]));
                    row.push(CsvCell::Int(seed.wrapping_add(i as u64)));
                    row
                }),
            )?;
            if stride > 0 {
                let traj = trajectory_cdm(&ckpt, &conditions, stride, seed)?;
                let target = vec![ckpt.columns.last().cloned().unwrap_or_default()];
                write_trajectory(&out.join("trajectory.csv"), &stamp, &target, &traj)?;
            }
            println!("generate: {} conditional samples", conditions.rows());
        }
    }
    Ok(())
}

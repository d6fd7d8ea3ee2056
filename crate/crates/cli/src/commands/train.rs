//! `train`: fit the scaler on the training split, run the diffusion
//! training loop, write the checkpoint and the loss history.

use super::{feature_mode_from_config, load_dataset, out_dir, records_subset, split_from_config};
use crate::checkpoint_io;
use crate::config::ConfigReader;
use crate::csvio::{write_csv, CsvCell};
use crate::error::CliError;
use crate::manifest::Manifest;
use chfgen_core::data::{joint_columns, joint_matrix, select_features, StandardScaler, CHF_COLUMN};
use chfgen_core::diffusion::{train, ModelKind, ScheduleParams, TrainConfig, TrainResult};
use chfgen_core::matrix::Matrix;

pub fn run(mut cfg: ConfigReader) -> Result<(), CliError> {
    let out = out_dir(&mut cfg)?;
    let mode_raw = cfg.get_str("mode", "dm");
    let mode = ModelKind::parse(&mode_raw)
        .ok_or_else(|| CliError::Config(format!("mode must be `dm` or `cdm`, got `{mode_raw}`")))?;
    let defaults = match mode {
        ModelKind::Dm => TrainConfig::dm_default(),
        ModelKind::Cdm => TrainConfig::cdm_default(),
    };
    let feature_mode = feature_mode_from_config(&mut cfg)?;
    let schedule_name = cfg.get_str("schedule", "sigmoid");
    if schedule_name != "sigmoid" {
        return Err(CliError::Config(format!(
            "unknown schedule `{schedule_name}` (only `sigmoid` is supported)"
        )));
    }
    let train_cfg = TrainConfig {
        mode,
        epochs: cfg.get_usize("epochs", defaults.epochs)?,
        batch_size: cfg.get_usize("batch_size", defaults.batch_size)?,
        learning_rate: cfg.get_f64("learning_rate", defaults.learning_rate)?,
        schedule: ScheduleParams {
            t_steps: cfg.get_usize("t_steps", defaults.schedule.t_steps)?,
            beta_min: cfg.get_f64("beta_min", defaults.schedule.beta_min)?,
            beta_max: cfg.get_f64("beta_max", defaults.schedule.beta_max)?,
            slope: cfg.get_f64("slope", defaults.schedule.slope)?,
        },
        ema_mu: cfg.get_f64("ema_mu", defaults.ema_mu)?,
        seed: cfg.get_u64("seed", 0)?,
        hidden: cfg.get_usize_list("hidden", &defaults.hidden)?,
        embed_width: cfg.get_usize("embed_width", defaults.embed_width)?,
        sample_with_ema: cfg.get_bool("sample_with_ema", true)?,
    };
    let checkpoint_name = cfg.get_str("checkpoint_out", "checkpoint.ckpt");
    let ds = load_dataset(&mut cfg)?;
    let split = split_from_config(&mut cfg, ds.records.len())?;
    let resolved = cfg.finish()?;
    let manifest = Manifest::new("train", &resolved);
    manifest.write(&out)?;

    let train_records = records_subset(&ds.records, &split.train);
    let result: TrainResult = match mode {
        ModelKind::Dm => {
            let columns = joint_columns(feature_mode);
            let joint = joint_matrix(&train_records, feature_mode)?;
            let scaler = StandardScaler::fit(&joint, &columns)?;
            let x0 = scaler.transform(&joint)?;
            train(
                &x0,
                None,
                scaler,
                None,
                columns.iter().map(|s| s.to_string()).collect(),
                feature_mode,
                &train_cfg,
            )?
        }
        ModelKind::Cdm => {
            let cond_columns = feature_mode.condition_columns();
            let (cond, chf) = select_features(&train_records, feature_mode)?;
            let cond_scaler = StandardScaler::fit(&cond, &cond_columns)?;
            let chf_matrix = Matrix::from_vec(chf.len(), 1, chf);
            let chf_scaler = StandardScaler::fit(&chf_matrix, &[CHF_COLUMN])?;
            let cond_std = cond_scaler.transform(&cond)?;
            let chf_std = chf_scaler.transform(&chf_matrix)?;
            let columns: Vec<String> = cond_columns
                .iter()
                .map(|s| s.to_string())
                .chain([CHF_COLUMN.to_string()])
                .collect();
            train(
                &chf_std,
                Some(&cond_std),
                chf_scaler,
                Some(cond_scaler),
                columns,
                feature_mode,
                &train_cfg,
            )?
        }
    };

    let ckpt_path = out.join(&checkpoint_name);
    checkpoint_io::save(&result.checkpoint, &ckpt_path, Some(&manifest.hash_hex))?;
    write_csv(
        &out.join("loss.csv"),
        &manifest.stamp(),
        &["epoch".to_string(), "mean_loss".to_string()],
        result
            .loss_history
            .iter()
            .enumerate()
            .map(|(e, &l)| vec![CsvCell::Int(e as u64 + 1), CsvCell::Float(l)]),
    )?;
    // Realized schedule export for inspection.
    let schedule = &result.checkpoint.schedule;
    write_csv(
        &out.join("schedule.csv"),
        &manifest.stamp(),
        &[
            "t".to_string(),
            "beta".to_string(),
            "alpha".to_string(),
            "alpha_bar".to_string(),
            "sigma".to_string(),
        ],
        (1..=schedule.steps()).map(|t| {
            vec![
                CsvCell::Int(t as u64),
                CsvCell::Float(schedule.beta(t)),
                CsvCell::Float(schedule.alpha(t)),
                CsvCell::Float(schedule.alpha_bar(t)),
                CsvCell::Float(schedule.sigma(t)),
            ]
        }),
    )?;

    println!(
        "train: {} on {} records, {} epochs, final loss {}",
        mode.as_str(),
        split.train.len(),
        result.loss_history.len(),
        result.loss_history.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

pub mod evaluate;
pub mod generate;
pub mod physics_check;
pub mod prepare;
pub mod steam;
pub mod train;
pub mod uq;

use crate::config::ConfigReader;
use crate::csvio;
use crate::error::CliError;
use chfgen_core::data::{self, ChfRecord, CsvSchema, DataSplit, FeatureMode};
use std::path::{Path, PathBuf};

/// Dataset handling shared by prepare, train and physics-check.
pub struct LoadedDataset {
    pub records: Vec<ChfRecord>,
    pub rejections: Vec<chfgen_core::data::Rejection>,
    pub data_rows: usize,
    pub schema: CsvSchema,
    pub path: PathBuf,
}

pub fn load_dataset(cfg: &mut ConfigReader) -> Result<LoadedDataset, CliError> {
    let path = cfg.require_path("data")?;
    let schema = csvio::schema_from_config(cfg)?;
    let outcome = csvio::load_csv(&path, &schema)?;
    Ok(LoadedDataset {
        records: outcome.records,
        rejections: outcome.rejections,
        data_rows: outcome.data_rows,
        schema,
        path,
    })
}

/// Reads the split fractions and seed and produces the deterministic split.
pub fn split_from_config(cfg: &mut ConfigReader, n_records: usize) -> Result<DataSplit, CliError> {
    let train_frac = cfg.get_f64("train_frac", 0.8)?;
    let val_frac = cfg.get_f64("val_frac", 0.1)?;
    let test_frac = cfg.get_f64("test_frac", 0.1)?;
    let split_seed = cfg.get_u64("split_seed", 0)?;
    Ok(data::split(
        n_records,
        (train_frac, val_frac, test_frac),
        split_seed,
    )?)
}

pub fn feature_mode_from_config(cfg: &mut ConfigReader) -> Result<FeatureMode, CliError> {
    let raw = cfg.get_str("feature_mode", "x");
    FeatureMode::parse(&raw)
        .ok_or_else(|| CliError::Config(format!("feature_mode must be `x` or `hsub`, got `{raw}`")))
}

pub fn out_dir(cfg: &mut ConfigReader) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(cfg.get_str("out", "out"));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

pub fn records_subset(records: &[ChfRecord], indices: &[usize]) -> Vec<ChfRecord> {
    indices.iter().map(|&i| records[i].clone()).collect()
}

/// Writes a square labelled matrix (correlation matrices).
pub fn write_matrix_csv(
    path: &Path,
    stamp: &str,
    labels: &[String],
    m: &chfgen_core::matrix::Matrix,
) -> Result<(), CliError> {
    let mut header = vec!["column".to_string()];
    header.extend(labels.iter().cloned());
    let rows = (0..m.rows()).map(|i| {
        let mut row = vec![csvio::CsvCell::Str(labels[i].clone())];
        for j in 0..m.cols() {
            row.push(csvio::CsvCell::Float(m.get(i, j)));
        }
        row
    });
    csvio::write_csv(path, stamp, &header, rows)
}

//! `prepare`: load and validate the dataset, write the split manifest and a
//! training-split scaler summary.

use super::{feature_mode_from_config, load_dataset, out_dir, records_subset, split_from_config};
use crate::config::ConfigReader;
use crate::csvio::{write_csv, CsvCell};
use crate::error::CliError;
use crate::manifest::Manifest;
use chfgen_core::data::{joint_columns, joint_matrix, StandardScaler};

pub fn run(mut cfg: ConfigReader) -> Result<(), CliError> {
    let out = out_dir(&mut cfg)?;
    let mode = feature_mode_from_config(&mut cfg)?;
    let ds = load_dataset(&mut cfg)?;
    let split = split_from_config(&mut cfg, ds.records.len())?;
    let resolved = cfg.finish()?;
    let manifest = Manifest::new("prepare", &resolved);
    manifest.write(&out)?;

    // split.csv: (row_index, split_label), row-indexed over accepted records.
    let mut labels = vec![""; ds.records.len()];
    for &i in &split.train {
        labels[i] = "train";
    }
    for &i in &split.validation {
        labels[i] = "validation";
    }
    for &i in &split.test {
        labels[i] = "test";
    }
    write_csv(
        &out.join("split.csv"),
        &manifest.stamp(),
        &["row_index".to_string(), "split_label".to_string()],
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| vec![CsvCell::Int(i as u64), CsvCell::Str(l.to_string())]),
    )?;

    let train_records = records_subset(&ds.records, &split.train);
    let columns = joint_columns(mode);
    let scaler_block = match joint_matrix(&train_records, mode) {
        Ok(joint) => {
            let scaler = StandardScaler::fit(&joint, &columns)?;
            let mut block = String::from("column, mean, std (training split, population)\n");
            for (j, name) in columns.iter().enumerate() {
                block.push_str(&format!("{name}, {}, {}\n", scaler.mean[j], scaler.std[j]));
            }
            block
        }
        Err(e) => format!("scaler not fitted: {e}\n"),
    };

    let mut summary = String::new();
    summary.push_str(&format!("input = {}\n", ds.path.display()));
    summary.push_str(&format!("data rows = {}\n", ds.data_rows));
    summary.push_str(&format!("accepted records = {}\n", ds.records.len()));
    summary.push_str(&format!("rejected records = {}\n", ds.rejections.len()));
    for r in ds.rejections.iter().take(50) {
        summary.push_str(&format!("  rejected row {}: {}\n", r.row, r.reason));
    }
    if ds.rejections.len() > 50 {
        summary.push_str(&format!("  (+{} more)\n", ds.rejections.len() - 50));
    }
    summary.push_str(&format!(
        "split sizes (train/validation/test) = {}/{}/{}\n",
        split.train.len(),
        split.validation.len(),
        split.test.len()
    ));
    summary.push_str(
        "rounding: validation and test sizes round fraction*N to nearest, training takes the remainder\n",
    );
    summary.push_str(&format!("split seed = {}\n", split.seed));
    summary.push_str(&scaler_block);
    let path = out.join("summary.txt");
    std::fs::write(&path, format!("{}{}", manifest.stamp(), summary))
        .map_err(|e| CliError::io(&path, e))?;

    println!(
        "prepare: {} accepted, {} rejected; split {}/{}/{}",
        ds.records.len(),
        ds.rejections.len(),
        split.train.len(),
        split.validation.len(),
        split.test.len()
    );
    Ok(())
}

//! `evaluate`: real-vs-generated comparison report — correlation matrices,
//! marginal ECDF/KDE curve export, joint-ECDF KS distance, and (for paired
//! rows) direct-error statistics and R².

use super::{out_dir, write_matrix_csv};
use crate::config::ConfigReader;
use crate::csvio::{format_float, read_table, write_csv, CsvCell, Table};
use crate::error::CliError;
use crate::manifest::Manifest;
use chfgen_core::metrics::{
    build_report, error_stats, kde_1d, marginal_ecdf, r_squared, MetricsReport,
};
use std::path::Path;

fn shared_columns(real: &Table, generated: &Table) -> Vec<String> {
    real.columns
        .iter()
        .filter(|c| {
            let lc = c.trim().to_lowercase();
            lc != "seed" && lc != "row" && generated.column_index(c).is_some()
        })
        .cloned()
        .collect()
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

pub fn run(mut cfg: ConfigReader) -> Result<(), CliError> {
    let out = out_dir(&mut cfg)?;
    let real_path = cfg.require_path("real")?;
    let generated_path = cfg.require_path("generated")?;
    let columns_key = cfg.get_opt_str("columns");
    let paired = cfg.get_bool("paired", false)?;
    let target_column = cfg.get_str("target_column", "CHF");
    let threshold = cfg.get_f64("threshold", 10.0)?;
    let delim_raw = cfg.get_str("delimiter", ",");
    let delimiter = delim_raw
        .chars()
        .next()
        .filter(|_| delim_raw.chars().count() == 1)
        .ok_or_else(|| CliError::Config("delimiter must be a single character".to_string()))?;
    let resolved = cfg.finish()?;
    let manifest = Manifest::new("evaluate", &resolved);
    manifest.write(&out)?;
    let stamp = manifest.stamp();

    let real = read_table(Path::new(&real_path), delimiter)?;
    let generated = read_table(Path::new(&generated_path), delimiter)?;
    let columns: Vec<String> = match columns_key {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => shared_columns(&real, &generated),
    };
    if columns.is_empty() {
        return Err(CliError::Schema(
            "no shared columns between the two files".to_string(),
        ));
    }
    let col_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let real_m = real.select(&col_refs)?;
    let gen_m = generated.select(&col_refs)?;

    let mut report_bundle = build_report(&real_m, &gen_m, &col_refs)?;
    let ks = report_bundle.ks_distance;
    write_matrix_csv(
        &out.join("pcc_real.csv"),
        &stamp,
        &columns,
        &report_bundle.pcc_real,
    )?;
    write_matrix_csv(
        &out.join("pcc_generated.csv"),
        &stamp,
        &columns,
        &report_bundle.pcc_generated,
    )?;
    write_matrix_csv(
        &out.join("srcc_real.csv"),
        &stamp,
        &columns,
        &report_bundle.srcc_real,
    )?;
    write_matrix_csv(
        &out.join("srcc_generated.csv"),
        &stamp,
        &columns,
        &report_bundle.srcc_generated,
    )?;
    let max_pcc_gap = MetricsReport::max_gap(&report_bundle.pcc_real, &report_bundle.pcc_generated);
    let max_srcc_gap =
        MetricsReport::max_gap(&report_bundle.srcc_real, &report_bundle.srcc_generated);

    for (label, table, matrix) in [("real", &real, &real_m), ("generated", &generated, &gen_m)] {
        let _ = table;
        for (j, col) in columns.iter().enumerate() {
            let values = matrix.column(j);
            let ecdf = marginal_ecdf(&values)?;
            write_csv(
                &out.join(format!("ecdf_{label}_{}.csv", sanitize(col))),
                &stamp,
                &["value".to_string(), "cdf".to_string()],
                ecdf.iter()
                    .map(|&(v, f)| vec![CsvCell::Float(v), CsvCell::Float(f)]),
            )?;
            let kde = kde_1d(&values)?;
            write_csv(
                &out.join(format!("kde_{label}_{}.csv", sanitize(col))),
                &stamp,
                &["value".to_string(), "density".to_string()],
                kde.iter()
                    .map(|&(v, d)| vec![CsvCell::Float(v), CsvCell::Float(d)]),
            )?;
        }
    }

    let mut report = String::new();
    report.push_str(&format!("real_rows = {}\n", real_m.rows()));
    report.push_str(&format!("generated_rows = {}\n", gen_m.rows()));
    report.push_str(&format!("columns = {}\n", columns.join(",")));
    report.push_str(&format!("ks_distance = {}\n", format_float(ks)));
    report.push_str(&format!(
        "max_abs_pcc_gap = {}\n",
        format_float(max_pcc_gap)
    ));
    report.push_str(&format!(
        "max_abs_srcc_gap = {}\n",
        format_float(max_srcc_gap)
    ));

    if paired {
        if real_m.rows() != gen_m.rows() {
            return Err(CliError::Data(format!(
                "paired evaluation needs equal row counts, got {} vs {}",
                real_m.rows(),
                gen_m.rows()
            )));
        }
        let truth = real.column(&target_column)?;
        let gen_vals = generated.column(&target_column)?;
        let stats = error_stats(&truth, &gen_vals, threshold)?;
        let r2 = r_squared(&truth, &gen_vals)?;
        report_bundle.error_stats = Some(stats.clone());
        report_bundle.r_squared = Some(r2);
        report.push_str(&format!("target_column = {target_column}\n"));
        report.push_str(&format!("mean_error_pct = {}\n", format_float(stats.mean)));
        report.push_str(&format!("max_error_pct = {}\n", format_float(stats.max)));
        report.push_str(&format!("std_error_pct = {}\n", format_float(stats.std)));
        report.push_str(&format!(
            "frac_error_gt_10pct = {}\n",
            format_float(stats.frac_gt_10)
        ));
        report.push_str(&format!(
            "frac_error_gt_25pct = {}\n",
            format_float(stats.frac_gt_25)
        ));
        report.push_str(&format!(
            "frac_error_gt_threshold = {}\n",
            format_float(stats.frac_gt_threshold)
        ));
        report.push_str(&format!(
            "threshold_pct = {}\n",
            format_float(stats.threshold)
        ));
        report.push_str(&format!("zero_true_rows = {}\n", stats.zero_true_rows));
        report.push_str(&format!("r_squared = {}\n", format_float(r2)));
        write_csv(
            &out.join("errors.csv"),
            &stamp,
            &["row".to_string(), "abs_relative_error_pct".to_string()],
            stats
                .per_row
                .iter()
                .enumerate()
                .map(|(i, &e)| vec![CsvCell::Int(i as u64), CsvCell::Float(e)]),
        )?;
    }

    let path = out.join("report.txt");
    std::fs::write(&path, format!("{stamp}{report}")).map_err(|e| CliError::io(&path, e))?;
    println!("evaluate: ks_distance = {}", format_float(ks));
    Ok(())
}

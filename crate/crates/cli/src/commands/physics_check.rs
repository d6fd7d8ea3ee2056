//! `physics-check`: energy-balance reconstruction of the outlet quality from
//! measured and generated CHF, and the measured/calculated/generated
//! consistency report.

use super::{load_dataset, out_dir};
use crate::config::ConfigReader;
use crate::csvio::{format_float, read_table, write_csv, CsvCell};
use crate::error::CliError;
use crate::manifest::Manifest;
use chfgen_core::physics::{consistency_report, outlet_quality, ErrorSummary, QualityTriple};
use std::path::Path;

fn summary_block(label: &str, s: &ErrorSummary) -> String {
    format!(
        "[{label}]\nmean = {}\nstd = {}\nmin = {}\np25 = {}\np50 = {}\np75 = {}\nmax = {}\n",
        format_float(s.mean),
        format_float(s.std),
        format_float(s.min),
        format_float(s.p25),
        format_float(s.p50),
        format_float(s.p75),
        format_float(s.max)
    )
}

pub fn run(mut cfg: ConfigReader) -> Result<(), CliError> {
    let out = out_dir(&mut cfg)?;
    let generated_path = cfg.require_path("generated")?;
    let chf_column = cfg.get_str("generated_column", "CHF");
    let ds = load_dataset(&mut cfg)?;
    let resolved = cfg.finish()?;
    let manifest = Manifest::new("physics-check", &resolved);
    manifest.write(&out)?;
    let stamp = manifest.stamp();

    let generated = read_table(Path::new(&generated_path), ds.schema.delimiter)?;
    let gen_chf = generated.column(&chf_column)?;
    if gen_chf.len() != ds.records.len() {
        return Err(CliError::Data(format!(
            "generated rows ({}) must align with accepted dataset records ({})",
            gen_chf.len(),
            ds.records.len()
        )));
    }

    let mut triples = Vec::new();
    let mut kept_rows = Vec::new();
    let mut excluded_domain = 0usize;
    let mut excluded_invalid = 0usize;
    let mut excluded_missing = 0usize;
    for (i, rec) in ds.records.iter().enumerate() {
        let (x_meas, h_sub) = match (rec.x_out, rec.h_sub) {
            (Some(x), Some(h)) => (x, h),
            _ => {
                excluded_missing += 1;
                continue;
            }
        };
        let both = outlet_quality(rec.p, rec.g, rec.d, rec.l, h_sub, rec.chf).and_then(|calc| {
            outlet_quality(rec.p, rec.g, rec.d, rec.l, h_sub, gen_chf[i]).map(|gen| (calc, gen))
        });
        let (x_calc, x_gen) = match both {
            Ok(pair) => pair,
            Err(chfgen_core::physics::PhysicsError::Steam(_)) => {
                excluded_domain += 1;
                continue;
            }
            Err(_) => {
                excluded_invalid += 1;
                continue;
            }
        };
        triples.push(QualityTriple {
            x_measured: x_meas,
            x_calculated: x_calc,
            x_generated: x_gen,
        });
        kept_rows.push(i);
    }

    let report = consistency_report(&triples)?;

    write_csv(
        &out.join("triples.csv"),
        &stamp,
        &[
            "row".to_string(),
            "x_measured".to_string(),
            "x_calculated".to_string(),
            "x_generated".to_string(),
        ],
        triples.iter().zip(&kept_rows).map(|(t, &row)| {
            vec![
                CsvCell::Int(row as u64),
                CsvCell::Float(t.x_measured),
                CsvCell::Float(t.x_calculated),
                CsvCell::Float(t.x_generated),
            ]
        }),
    )?;

    let mut text = String::new();
    text.push_str(&format!("records = {}\n", ds.records.len()));
    text.push_str(&format!("compared = {}\n", triples.len()));
    text.push_str(&format!("excluded_steam_domain = {excluded_domain}\n"));
    text.push_str(&format!("excluded_invalid_inputs = {excluded_invalid}\n"));
    text.push_str(&format!("excluded_missing_values = {excluded_missing}\n"));
    text.push_str(&summary_block(
        "absolute error, measured - generated",
        &report.measured_generated,
    ));
    text.push_str(&summary_block(
        "absolute error, calculated - generated",
        &report.calculated_generated,
    ));
    let path = out.join("physics_report.txt");
    std::fs::write(&path, format!("{stamp}{text}")).map_err(|e| CliError::io(&path, e))?;

    println!(
        "physics-check: {} compared, mean |m-g| = {}, mean |c-g| = {}",
        triples.len(),
        format_float(report.measured_generated.mean),
        format_float(report.calculated_generated.mean)
    );
    Ok(())
}

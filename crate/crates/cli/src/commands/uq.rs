//! `uq`: Monte-Carlo generation ensembles per condition row, with the
//! relative-standard-deviation summary and (when the truth column is
//! available) the base-vs-ensemble-mean error comparison.

use super::out_dir;
use crate::checkpoint_io;
use crate::config::ConfigReader;
use crate::csvio::{format_float, read_table, write_csv, CsvCell};
use crate::error::CliError;
use crate::manifest::Manifest;
use chfgen_core::diffusion::{sample_cdm, uq_ensemble_row, Checkpoint, SampleEnsemble};
use chfgen_core::matrix::Matrix;
use chfgen_core::metrics::{error_stats, mean_max};
use std::path::Path;

/// Rows are independent chains; spread them over threads and reassemble in
/// row order.
pub fn parallel_ensembles(
    ckpt: &Checkpoint,
    conditions: &Matrix,
    n_draws: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<SampleEnsemble>, CliError> {
    let rows = conditions.rows();
    let workers = threads.max(1).min(rows.max(1));
    if workers <= 1 || rows == 0 {
        return (0..rows)
            .map(|r| uq_ensemble_row(ckpt, conditions.row(r), r, n_draws, seed).map_err(Into::into))
            .collect();
    }
    let mut results: Vec<Option<Result<SampleEnsemble, CliError>>> = Vec::new();
    results.resize_with(rows, || None);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots = std::sync::Mutex::new(&mut results);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let r = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if r >= rows {
                    break;
                }
                let out = uq_ensemble_row(ckpt, conditions.row(r), r, n_draws, seed)
                    .map_err(CliError::from);
                slots.lock().expect("ensemble slot lock")[r] = Some(out);
            });
        }
    });
    results
        .into_iter()
        .map(|slot| slot.expect("all rows computed"))
        .collect()
}

pub fn run(mut cfg: ConfigReader) -> Result<(), CliError> {
    let out = out_dir(&mut cfg)?;
    let ckpt_path = cfg.require_path("checkpoint")?;
    let cond_path = cfg.require_path("conditions")?;
    let n_draws = cfg.get_usize("n", 500)?;
    let seed = cfg.get_u64("seed", 0)?;
    let retain_draws = cfg.get_bool("retain_draws", false)?;
    let threads = cfg.get_usize("threads", 0)?;
    let true_column = cfg.get_opt_str("true_column");
    let delim_raw = cfg.get_str("delimiter", ",");
    let delimiter = delim_raw
        .chars()
        .next()
        .filter(|_| delim_raw.chars().count() == 1)
        .ok_or_else(|| CliError::Config("delimiter must be a single character".to_string()))?;

    let ckpt = checkpoint_io::load(&ckpt_path)?;
    let resolved = cfg.finish()?;
    let manifest = Manifest::new("uq", &resolved);
    manifest.write(&out)?;
    let stamp = manifest.stamp();

    let table = read_table(Path::new(&cond_path), delimiter)?;
    let cond_names: Vec<&str> = ckpt.columns[..ckpt.columns.len() - 1]
        .iter()
        .map(String::as_str)
        .collect();
    let conditions = table.select(&cond_names)?;

    let workers = if threads == 0 {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    } else {
        threads
    };
    let ensembles = parallel_ensembles(&ckpt, &conditions, n_draws, seed, workers)?;

    let mut header: Vec<String> = vec!["row".to_string()];
    header.extend(cond_names.iter().map(|s| s.to_string()));
    header.extend([
        "mu_samples".to_string(),
        "sigma_samples".to_string(),
        "relative_std_pct".to_string(),
    ]);
    write_csv(
        &out.join("uq.csv"),
        &stamp,
        &header,
        ensembles.iter().enumerate().map(|(r, e)| {
            let mut row = vec![CsvCell::Int(r as u64)];
            row.extend(e.condition.iter().map(|&v| CsvCell::Float(v)));
            row.push(CsvCell::Float(e.mu_samples));
            row.push(CsvCell::Float(e.sigma_samples));
            row.push(match e.relative_std {
                Some(v) => CsvCell::Float(v),
                None => CsvCell::Str("undefined".to_string()),
            });
            row
        }),
    )?;

    if retain_draws {
        write_csv(
            &out.join("draws.csv"),
            &stamp,
            &["row".to_string(), "draw".to_string(), "chf".to_string()],
            ensembles.iter().enumerate().flat_map(|(r, e)| {
                e.draws.iter().enumerate().map(move |(d, &v)| {
                    vec![
                        CsvCell::Int(r as u64),
                        CsvCell::Int(d as u64),
                        CsvCell::Float(v),
                    ]
                })
            }),
        )?;
    }

    let rels: Vec<f64> = ensembles.iter().filter_map(|e| e.relative_std).collect();
    let undefined = ensembles.len() - rels.len();
    let mut summary = String::new();
    summary.push_str(&format!("rows = {}\n", ensembles.len()));
    summary.push_str(&format!("draws_per_row = {n_draws}\n"));
    if rels.is_empty() {
        summary.push_str("relative_std undefined for every row\n");
    } else {
        let (mean_rel, max_rel) = mean_max(&rels);
        summary.push_str(&format!(
            "relative_std_mean_pct = {}\n",
            format_float(mean_rel)
        ));
        summary.push_str(&format!(
            "relative_std_max_pct = {}\n",
            format_float(max_rel)
        ));
    }
    summary.push_str(&format!("relative_std_undefined_rows = {undefined}\n"));

    if let Some(col) = true_column {
        let truth = table.column(&col)?;
        let single = sample_cdm(&ckpt, &conditions, seed)?;
        let means: Vec<f64> = ensembles.iter().map(|e| e.mu_samples).collect();
        let base = error_stats(&truth, &single, 10.0)?;
        let with_uq = error_stats(&truth, &means, 10.0)?;
        summary.push_str("error_vs_truth (percent): base single draw | ensemble mean\n");
        summary.push_str(&format!(
            "mean_error = {} | {}\n",
            format_float(base.mean),
            format_float(with_uq.mean)
        ));
        summary.push_str(&format!(
            "max_error = {} | {}\n",
            format_float(base.max),
            format_float(with_uq.max)
        ));
        summary.push_str(&format!(
            "std_error = {} | {}\n",
            format_float(base.std),
            format_float(with_uq.std)
        ));
        summary.push_str(&format!(
            "frac_error_gt_10pct = {} | {}\n",
            format_float(base.frac_gt_10),
            format_float(with_uq.frac_gt_10)
        ));
    }

    let path = out.join("uq_summary.txt");
    std::fs::write(&path, format!("{stamp}{summary}")).map_err(|e| CliError::io(&path, e))?;
    println!("uq: {} rows x {} draws", ensembles.len(), n_draws);
    Ok(())
}

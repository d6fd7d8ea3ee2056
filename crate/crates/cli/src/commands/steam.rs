//! `steam`: spot checks and batch evaluation of the saturation-line
//! property kernel.
//!
//! Spot mode prints one value: `chfgen steam --tsat 0.1` -> `372.755919 K`.
//! Batch mode reads a pressure CSV (column `P`, MPa) and writes a property
//! CSV.

use crate::csvio::{read_table, write_csv, CsvCell};
use crate::error::CliError;
use crate::manifest::Manifest;
use chfgen_core::steam;
use std::path::{Path, PathBuf};

pub struct SteamArgs {
    pub tsat: Option<f64>,
    pub psat: Option<f64>,
    pub hf: Option<f64>,
    pub hg: Option<f64>,
    pub hfg: Option<f64>,
    pub batch: Option<PathBuf>,
    pub out: PathBuf,
}

pub fn run(args: SteamArgs) -> Result<(), CliError> {
    let mut handled = 0;
    if let Some(p) = args.tsat {
        println!("{:.6} K", steam::tsat(p)?);
        handled += 1;
    }
    if let Some(t) = args.psat {
        println!("{:.8} MPa", steam::psat(t)?);
        handled += 1;
    }
    if let Some(p) = args.hf {
        println!("{:.6} kJ/kg", steam::h_sat_liquid(p)?);
        handled += 1;
    }
    if let Some(p) = args.hg {
        println!("{:.6} kJ/kg", steam::h_sat_vapor(p)?);
        handled += 1;
    }
    if let Some(p) = args.hfg {
        let sp = steam::saturation_point(p)?;
        println!("{:.6} kJ/kg", sp.h_fg);
        handled += 1;
    }
    if let Some(input) = &args.batch {
        run_batch(input, &args.out)?;
        handled += 1;
    }
    if handled == 0 {
        return Err(CliError::Usage(
            "steam needs one of --tsat <MPa> | --psat <K> | --hf <MPa> | --hg <MPa> | --hfg <MPa> | --batch <csv>"
                .to_string(),
        ));
    }
    Ok(())
}

fn run_batch(input: &Path, out_dir: &Path) -> Result<(), CliError> {
    let table = read_table(input, ',')?;
    let pressures = table.column("P")?;
    let resolved = vec![("batch".to_string(), input.display().to_string())];
    let manifest = Manifest::new("steam", &resolved);
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    manifest.write(out_dir)?;
    let mut rows = Vec::with_capacity(pressures.len());
    for &p in &pressures {
        let sp = steam::saturation_point(p)?;
        rows.push(vec![
            CsvCell::Float(p),
            CsvCell::Float(sp.t_sat),
            CsvCell::Float(sp.h_f),
            CsvCell::Float(sp.h_g),
            CsvCell::Float(sp.h_fg),
        ]);
    }
    write_csv(
        &out_dir.join("steam.csv"),
        &manifest.stamp(),
        &[
            "P".to_string(),
            "T_sat".to_string(),
            "h_f".to_string(),
            "h_g".to_string(),
            "h_fg".to_string(),
        ],
        rows,
    )?;
    println!("steam: {} pressures evaluated", pressures.len());
    Ok(())
}

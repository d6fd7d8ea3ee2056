//! CSV reading and writing. Numeric, delimiter-configurable, UTF-8, header
//! row required; `#`-prefixed lines are treated as comments (data outputs
//! stamp the manifest hash that way).

use crate::error::CliError;
use chfgen_core::data::{parse_records, ColumnBinding, CsvSchema, LoadOutcome};
use chfgen_core::matrix::Matrix;
use std::io::Write;
use std::path::Path;

/// Reads and validates a CHF dataset file.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<LoadOutcome, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let stripped = strip_comments(&text);
    Ok(parse_records(&stripped, schema)?)
}

fn strip_comments(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Builds the input schema from config keys `delimiter`, `col_*` and
/// `unit_*` (header binding and unit multiplier per column).
pub fn schema_from_config(cfg: &mut crate::config::ConfigReader) -> Result<CsvSchema, CliError> {
    let delim = cfg.get_str("delimiter", ",");
    let mut chars = delim.chars();
    let delimiter = match (chars.next(), chars.next()) {
        (Some(c), None) => c,
        _ => {
            return Err(CliError::Config(format!(
                "delimiter must be a single character, got `{delim}`"
            )))
        }
    };
    let mut schema = CsvSchema {
        delimiter,
        ..CsvSchema::default()
    };
    let bind = |cfg: &mut crate::config::ConfigReader,
                field: &mut ColumnBinding,
                name: &str|
     -> Result<(), CliError> {
        field.header = cfg.get_str(&format!("col_{name}"), &field.header);
        field.scale = cfg.get_f64(&format!("unit_{name}"), 1.0)?;
        Ok(())
    };
    bind(cfg, &mut schema.d, "d")?;
    bind(cfg, &mut schema.l, "l")?;
    bind(cfg, &mut schema.p, "p")?;
    bind(cfg, &mut schema.g, "g")?;
    bind(cfg, &mut schema.x_out, "x")?;
    bind(cfg, &mut schema.h_sub, "hsub")?;
    bind(cfg, &mut schema.t_in, "tin")?;
    bind(cfg, &mut schema.chf, "chf")?;
    Ok(schema)
}

/// A tabular CSV with cells parsed on demand, so files may carry non-numeric
/// or empty columns that a given command never reads.
pub struct Table {
    pub columns: Vec<String>,
    cells: Vec<String>,
    rows: usize,
    source: String,
}

impl Table {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        let want = name.trim().to_lowercase();
        self.columns
            .iter()
            .position(|c| c.trim().to_lowercase() == want)
    }

    fn parse_cell(&self, row: usize, col: usize, name: &str) -> Result<f64, CliError> {
        let raw = &self.cells[row * self.columns.len() + col];
        raw.parse::<f64>().map_err(|_| {
            CliError::Parse(format!(
                "{}: data row {}: column {name}: cannot parse '{raw}' as a number",
                self.source,
                row + 1
            ))
        })
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let idx = self
            .column_index(name)
            .ok_or_else(|| CliError::Schema(format!("missing column: {name}")))?;
        (0..self.rows)
            .map(|r| self.parse_cell(r, idx, name))
            .collect()
    }

    /// Sub-matrix with the named columns in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Matrix, CliError> {
        let mut idx = Vec::with_capacity(names.len());
        for n in names {
            idx.push(
                self.column_index(n)
                    .ok_or_else(|| CliError::Schema(format!("missing column: {n}")))?,
            );
        }
        let mut out = Matrix::zeros(self.rows, names.len());
        for r in 0..self.rows {
            for (c, &j) in idx.iter().enumerate() {
                out.set(r, c, self.parse_cell(r, j, names[c])?);
            }
        }
        Ok(out)
    }
}

/// Reads a CSV into a [`Table`] without parsing cell contents yet.
pub fn read_table(path: &Path, delimiter: char) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let stripped = strip_comments(&text);
    let mut lines = stripped.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| CliError::Schema(format!("{}: empty file", path.display())))?;
    let columns: Vec<String> = header
        .split(delimiter)
        .map(|c| c.trim().to_string())
        .collect();
    let mut cells = Vec::new();
    let mut rows = 0usize;
    for (i, line) in lines.enumerate() {
        let line_cells: Vec<&str> = line.split(delimiter).collect();
        if line_cells.len() != columns.len() {
            return Err(CliError::Parse(format!(
                "{}: data row {}: expected {} cells, got {}",
                path.display(),
                i + 1,
                columns.len(),
                line_cells.len()
            )));
        }
        cells.extend(line_cells.iter().map(|c| c.trim().to_string()));
        rows += 1;
    }
    Ok(Table {
        columns,
        cells,
        rows,
        source: path.display().to_string(),
    })
}

/// Writes a data CSV: manifest stamp, header, then rows. Floats use Rust's
/// shortest round-trip formatting so reruns are byte-identical.
pub fn write_csv<I, R>(path: &Path, stamp: &str, header: &[String], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = CsvCell>,
{
    let mut buf = String::new();
    buf.push_str(stamp);
    buf.push_str(&header.join(","));
    buf.push('\n');
    for row in rows {
        let mut first = true;
        for cell in row {
            if !first {
                buf.push(',');
            }
            first = false;
            match cell {
                CsvCell::Float(v) => buf.push_str(&format_float(v)),
                CsvCell::Int(v) => buf.push_str(&v.to_string()),
                CsvCell::Str(s) => buf.push_str(&s),
            }
        }
        buf.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    file.write_all(buf.as_bytes())
        .map_err(|e| CliError::io(path, e))
}

pub enum CsvCell {
    Float(f64),
    Int(u64),
    Str(String),
}

pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

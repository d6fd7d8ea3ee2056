//! CHF measurement table handling: record validation, feature selection,
//! standardization and reproducible splits.
//!
//! The parser works on already-loaded text (the companion crate owns file
//! IO). Every data row is either accepted as a valid [`ChfRecord`] or
//! reported as a rejection with its row number; nothing is imputed, dropped
//! silently, or deduplicated.

use crate::matrix::Matrix;
use crate::rng::Rng;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Condition-feature set selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// Conditions (P, G, D, L, x); the default feature set.
    XMode,
    /// Conditions (P, G, D, L, h_sub); used by the physics-consistency CDM.
    HsubMode,
}

impl FeatureMode {
    pub fn condition_columns(self) -> [&'static str; 5] {
        match self {
            FeatureMode::XMode => ["P", "G", "D", "L", "x"],
            FeatureMode::HsubMode => ["P", "G", "D", "L", "h_sub"],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMode::XMode => "x",
            FeatureMode::HsubMode => "hsub",
        }
    }

    pub fn parse(s: &str) -> Option<FeatureMode> {
        match s {
            "x" => Some(FeatureMode::XMode),
            "hsub" | "h_sub" => Some(FeatureMode::HsubMode),
            _ => None,
        }
    }
}

/// Name of the generated/target column.
pub const CHF_COLUMN: &str = "CHF";

#[derive(Debug, Clone, PartialEq)]
pub enum DataError {
    /// A required column is absent from the header (or a needed optional
    /// value is absent from a record).
    MissingColumn { column: String },
    /// A cell failed numeric parsing; rows are 1-based data rows.
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },
    /// Split preconditions failed.
    BadSplit { reason: String },
    /// A column had zero standard deviation when fitting the scaler.
    ConstantColumn { column: String },
    /// Scaler/matrix dimension mismatch.
    DimensionMismatch { expected: usize, got: usize },
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DataError::MissingColumn { column } => write!(f, "missing column: {column}"),
            DataError::ParseCell { row, column, value } => {
                write!(
                    f,
                    "data row {row}: column {column}: cannot parse '{value}' as a number"
                )
            }
            DataError::BadSplit { reason } => write!(f, "invalid split request: {reason}"),
            DataError::ConstantColumn { column } => {
                write!(f, "column {column} is constant (standard deviation 0)")
            }
            DataError::DimensionMismatch { expected, got } => {
                write!(
                    f,
                    "dimension mismatch: expected {expected} columns, got {got}"
                )
            }
        }
    }
}

impl core::error::Error for DataError {}

/// One CHF measurement row in physical units.
///
/// `x_out`, `h_sub` and `t_in` are optional because a schema-bound file may
/// not carry those columns; operations that need them fail naming the column.
#[derive(Debug, Clone, PartialEq)]
pub struct ChfRecord {
    /// Tube diameter (m).
    pub d: f64,
    /// Heated length (m).
    pub l: f64,
    /// Pressure (kPa).
    pub p: f64,
    /// Mass flux (kg·m⁻²·s⁻¹).
    pub g: f64,
    /// Outlet equilibrium quality (dimensionless).
    pub x_out: Option<f64>,
    /// Inlet subcooling (kJ·kg⁻¹).
    pub h_sub: Option<f64>,
    /// Inlet temperature (°C); never used by any model path.
    pub t_in: Option<f64>,
    /// Critical heat flux (kW·m⁻²).
    pub chf: f64,
}

impl ChfRecord {
    /// Checks the record invariants; returns the violated constraint.
    pub fn validate(&self) -> Result<(), String> {
        fn positive(name: &str, v: f64) -> Result<(), String> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(alloc::format!("{name} must be finite and > 0, got {v}"))
            }
        }
        positive("D", self.d)?;
        positive("L", self.l)?;
        positive("P", self.p)?;
        positive("G", self.g)?;
        positive("CHF", self.chf)?;
        if let Some(x) = self.x_out {
            if !(x.is_finite() && x > -1.0 && x < 1.5) {
                return Err(alloc::format!("x must lie in (-1, 1.5), got {x}"));
            }
        }
        if let Some(h) = self.h_sub {
            if !(h.is_finite() && h >= 0.0) {
                return Err(alloc::format!("h_sub must be finite and >= 0, got {h}"));
            }
        }
        if let Some(t) = self.t_in {
            if !t.is_finite() {
                return Err(alloc::format!("T_in must be finite, got {t}"));
            }
        }
        Ok(())
    }
}

/// Binding of one record field to a file column.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnBinding {
    /// Header name as it appears in the file (matched case-insensitively
    /// after trimming).
    pub header: String,
    /// Multiplier applied to the parsed value to reach canonical units.
    pub scale: f64,
}

impl ColumnBinding {
    pub fn new(header: &str) -> Self {
        ColumnBinding {
            header: header.to_string(),
            scale: 1.0,
        }
    }
}

/// Column-name map for the input table. D, L, P, G and CHF are required;
/// x, h_sub and T_in are used when their bound header is present.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub delimiter: char,
    pub d: ColumnBinding,
    pub l: ColumnBinding,
    pub p: ColumnBinding,
    pub g: ColumnBinding,
    pub x_out: ColumnBinding,
    pub h_sub: ColumnBinding,
    pub t_in: ColumnBinding,
    pub chf: ColumnBinding,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            delimiter: ',',
            d: ColumnBinding::new("D"),
            l: ColumnBinding::new("L"),
            p: ColumnBinding::new("P"),
            g: ColumnBinding::new("G"),
            x_out: ColumnBinding::new("x"),
            h_sub: ColumnBinding::new("h_sub"),
            t_in: ColumnBinding::new("T_in"),
            chf: ColumnBinding::new("CHF"),
        }
    }
}

/// A rejected data row and the invariant it violated.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    /// 1-based data-row index (header excluded).
    pub row: usize,
    pub reason: String,
}

/// Result of parsing a data table: accepted records plus per-row rejections.
/// `records.len() + rejections.len()` equals the number of data rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadOutcome {
    pub records: Vec<ChfRecord>,
    pub rejections: Vec<Rejection>,
    pub data_rows: usize,
}

fn normalize(h: &str) -> String {
    h.trim().to_lowercase()
}

/// Parses CSV text (header row required) into validated records.
///
/// Required columns missing from the header give a schema error. Non-numeric
/// cells give a parse error with the row number. Records violating the
/// [`ChfRecord`] invariants are collected as rejections, not errors.
pub fn parse_records(text: &str, schema: &CsvSchema) -> Result<LoadOutcome, DataError> {
    let mut lines = text.lines();
    let header_line = lines.next().ok_or_else(|| DataError::MissingColumn {
        column: schema.d.header.clone(),
    })?;
    let headers: Vec<String> = header_line.split(schema.delimiter).map(normalize).collect();

    let find = |binding: &ColumnBinding| -> Option<usize> {
        let want = normalize(&binding.header);
        headers.iter().position(|h| *h == want)
    };
    let require = |binding: &ColumnBinding| -> Result<usize, DataError> {
        find(binding).ok_or_else(|| DataError::MissingColumn {
            column: binding.header.clone(),
        })
    };

    let idx_d = require(&schema.d)?;
    let idx_l = require(&schema.l)?;
    let idx_p = require(&schema.p)?;
    let idx_g = require(&schema.g)?;
    let idx_chf = require(&schema.chf)?;
    let idx_x = find(&schema.x_out);
    let idx_hsub = find(&schema.h_sub);
    let idx_tin = find(&schema.t_in);

    let mut records = Vec::new();
    let mut rejections = Vec::new();
    let mut data_rows = 0usize;

    for (row0, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = row0 + 1;
        data_rows += 1;
        let cells: Vec<&str> = line.split(schema.delimiter).collect();

        let required = |idx: usize, binding: &ColumnBinding| -> Result<f64, DataError> {
            let raw = cells.get(idx).map(|c| c.trim()).unwrap_or("");
            raw.parse::<f64>()
                .map(|v| v * binding.scale)
                .map_err(|_| DataError::ParseCell {
                    row,
                    column: binding.header.clone(),
                    value: raw.to_string(),
                })
        };
        let optional =
            |idx: Option<usize>, binding: &ColumnBinding| -> Result<Option<f64>, DataError> {
                match idx {
                    None => Ok(None),
                    Some(i) => {
                        let raw = cells.get(i).map(|c| c.trim()).unwrap_or("");
                        if raw.is_empty() {
                            return Ok(None);
                        }
                        raw.parse::<f64>()
                            .map(|v| Some(v * binding.scale))
                            .map_err(|_| DataError::ParseCell {
                                row,
                                column: binding.header.clone(),
                                value: raw.to_string(),
                            })
                    }
                }
            };

        let record = (|| -> Result<ChfRecord, DataError> {
            Ok(ChfRecord {
                d: required(idx_d, &schema.d)?,
                l: required(idx_l, &schema.l)?,
                p: required(idx_p, &schema.p)?,
                g: required(idx_g, &schema.g)?,
                x_out: optional(idx_x, &schema.x_out)?,
                h_sub: optional(idx_hsub, &schema.h_sub)?,
                t_in: optional(idx_tin, &schema.t_in)?,
                chf: required(idx_chf, &schema.chf)?,
            })
        })()?;

        match record.validate() {
            Ok(()) => records.push(record),
            Err(reason) => rejections.push(Rejection { row, reason }),
        }
    }

    Ok(LoadOutcome {
        records,
        rejections,
        data_rows,
    })
}

/// Disjoint train/validation/test index lists.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

impl DataSplit {
    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn round_half_up(x: f64) -> usize {
    crate::math::floor(x + 0.5) as usize
}

/// Deterministic shuffled split. Validation and test sizes round
/// fraction·N to the nearest integer (at least 1 for a nonzero fraction);
/// training takes the remainder.
pub fn split(
    n_records: usize,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<DataSplit, DataError> {
    let (f_train, f_val, f_test) = fractions;
    let sum = f_train + f_val + f_test;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(DataError::BadSplit {
            reason: alloc::format!("fractions sum to {sum}, expected 1"),
        });
    }
    if f_train < 0.0 || f_val < 0.0 || f_test < 0.0 {
        return Err(DataError::BadSplit {
            reason: "fractions must be non-negative".into(),
        });
    }
    if n_records < 3 {
        return Err(DataError::BadSplit {
            reason: alloc::format!("{n_records} records cannot populate all three splits"),
        });
    }

    let size_for = |f: f64| -> usize {
        if f == 0.0 {
            0
        } else {
            round_half_up(f * n_records as f64).max(1)
        }
    };
    let n_val = size_for(f_val);
    let n_test = size_for(f_test);
    if n_val + n_test >= n_records {
        return Err(DataError::BadSplit {
            reason: "validation and test would leave the training split empty".into(),
        });
    }
    let n_train = n_records - n_val - n_test;

    let mut indices: Vec<usize> = (0..n_records).collect();
    Rng::new(seed).shuffle(&mut indices);

    let train = indices[..n_train].to_vec();
    let validation = indices[n_train..n_train + n_val].to_vec();
    let test = indices[n_train + n_val..].to_vec();
    Ok(DataSplit {
        train,
        validation,
        test,
        seed,
    })
}

/// Per-column standardization statistics (population standard deviation),
/// fitted on the training split only.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl StandardScaler {
    /// Fits per-column mean and population standard deviation. `columns` is
    /// used to name a constant column in the error.
    pub fn fit(data: &Matrix, columns: &[&str]) -> Result<Self, DataError> {
        assert_eq!(data.cols(), columns.len(), "column label count mismatch");
        let n = data.rows() as f64;
        assert!(n > 0.0, "cannot fit a scaler on an empty matrix");
        let mut mean = alloc::vec![0.0; data.cols()];
        for row in data.iter_rows() {
            for (m, &v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut var = alloc::vec![0.0; data.cols()];
        for row in data.iter_rows() {
            for (j, &v) in row.iter().enumerate() {
                let d = v - mean[j];
                var[j] += d * d;
            }
        }
        let mut std = alloc::vec![0.0; data.cols()];
        for (j, v) in var.iter().enumerate() {
            let s = crate::math::sqrt(v / n);
            if s == 0.0 {
                return Err(DataError::ConstantColumn {
                    column: columns[j].to_string(),
                });
            }
            std[j] = s;
        }
        Ok(StandardScaler { mean, std })
    }

    pub fn cols(&self) -> usize {
        self.mean.len()
    }

    pub fn transform(&self, data: &Matrix) -> Result<Matrix, DataError> {
        self.check_dims(data)?;
        let mut out = data.clone();
        for i in 0..out.rows() {
            let row = out.row_mut(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.std[j];
            }
        }
        Ok(out)
    }

    pub fn inverse_transform(&self, data: &Matrix) -> Result<Matrix, DataError> {
        self.check_dims(data)?;
        let mut out = data.clone();
        for i in 0..out.rows() {
            let row = out.row_mut(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = *v * self.std[j] + self.mean[j];
            }
        }
        Ok(out)
    }

    /// Scaler restricted to a contiguous column range; used to split a
    /// jointly fitted scaler into condition and target parts.
    pub fn slice(&self, range: core::ops::Range<usize>) -> StandardScaler {
        StandardScaler {
            mean: self.mean[range.clone()].to_vec(),
            std: self.std[range].to_vec(),
        }
    }

    fn check_dims(&self, data: &Matrix) -> Result<(), DataError> {
        if data.cols() != self.cols() {
            return Err(DataError::DimensionMismatch {
                expected: self.cols(),
                got: data.cols(),
            });
        }
        Ok(())
    }
}

/// Projects records onto the condition matrix (documented column order
/// P, G, D, L, x|h_sub) and the CHF target column. Errors name the first
/// missing optional feature.
pub fn select_features(
    records: &[ChfRecord],
    mode: FeatureMode,
) -> Result<(Matrix, Vec<f64>), DataError> {
    let mut cond = Matrix::zeros(records.len(), 5);
    let mut chf = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let fifth = match mode {
            FeatureMode::XMode => r
                .x_out
                .ok_or(DataError::MissingColumn { column: "x".into() })?,
            FeatureMode::HsubMode => r.h_sub.ok_or(DataError::MissingColumn {
                column: "h_sub".into(),
            })?,
        };
        let row = cond.row_mut(i);
        row[0] = r.p;
        row[1] = r.g;
        row[2] = r.d;
        row[3] = r.l;
        row[4] = fifth;
        chf.push(r.chf);
    }
    Ok((cond, chf))
}

/// 6-column matrix (conditions then CHF) for the unconditional model.
pub fn joint_matrix(records: &[ChfRecord], mode: FeatureMode) -> Result<Matrix, DataError> {
    let (cond, chf) = select_features(records, mode)?;
    let chf_col = Matrix::from_vec(chf.len(), 1, chf);
    Ok(cond.hcat(&chf_col))
}

/// Column labels of [`joint_matrix`]'s output.
pub fn joint_columns(mode: FeatureMode) -> [&'static str; 6] {
    let c = mode.condition_columns();
    [c[0], c[1], c[2], c[3], c[4], CHF_COLUMN]
}

//! Energy-balance reconstruction of the outlet equilibrium quality and the
//! three-way measured/calculated/generated consistency assessment.
//!
//! For a uniformly heated vertical tube:
//!
//! ```text
//! h_f   = h_L(P)                saturated-liquid enthalpy
//! h_fg  = h_V(P) − h_f          latent heat
//! h_in  = h_f − h_sub           inlet enthalpy
//! Δh    = 4·q_chf·L / (G·D)     enthalpy rise from the heat balance
//! h_out = h_in + Δh
//! x     = (h_out − h_f) / h_fg
//! ```
//!
//! Units: q in kW·m⁻², L and D in m, G in kg·m⁻²·s⁻¹ make Δh come out in
//! kJ·kg⁻¹ directly. Pressures arrive in kPa (dataset convention) and are
//! converted to MPa here, the single conversion point into the steam module.

use crate::math;
use crate::metrics::percentile_sorted;
use crate::steam::{self, SteamError};
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum PhysicsError {
    Steam(SteamError),
    /// G·D below the underflow guard.
    DegenerateFlow {
        g: f64,
        d: f64,
    },
    /// Non-positive or non-finite input.
    InvalidInput {
        name: &'static str,
        value: f64,
    },
    EmptyInput,
}

impl fmt::Display for PhysicsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhysicsError::Steam(e) => write!(f, "{e}"),
            PhysicsError::DegenerateFlow { g, d } => {
                write!(f, "G*D = {} underflows the energy balance", g * d)
            }
            PhysicsError::InvalidInput { name, value } => {
                write!(f, "{name} = {value} is not a valid input")
            }
            PhysicsError::EmptyInput => write!(f, "empty input"),
        }
    }
}

impl core::error::Error for PhysicsError {}

impl From<SteamError> for PhysicsError {
    fn from(e: SteamError) -> Self {
        PhysicsError::Steam(e)
    }
}

/// Outlet equilibrium quality from the energy balance.
///
/// `p` in kPa, `g` in kg·m⁻²·s⁻¹, `d` and `l` in m, `h_sub` in kJ·kg⁻¹,
/// `q_chf` in kW·m⁻².
pub fn outlet_quality(
    p: f64,
    g: f64,
    d: f64,
    l: f64,
    h_sub: f64,
    q_chf: f64,
) -> Result<f64, PhysicsError> {
    let check_pos = |name: &'static str, v: f64| -> Result<(), PhysicsError> {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(PhysicsError::InvalidInput { name, value: v })
        }
    };
    check_pos("P", p)?;
    check_pos("G", g)?;
    check_pos("D", d)?;
    check_pos("L", l)?;
    if !(h_sub.is_finite() && h_sub >= 0.0) {
        return Err(PhysicsError::InvalidInput {
            name: "h_sub",
            value: h_sub,
        });
    }
    if !q_chf.is_finite() || q_chf < 0.0 {
        return Err(PhysicsError::InvalidInput {
            name: "q_chf",
            value: q_chf,
        });
    }
    if g * d < 1e-12 {
        return Err(PhysicsError::DegenerateFlow { g, d });
    }

    let sat = steam::saturation_point(p / 1000.0)?;
    let h_in = sat.h_f - h_sub;
    let delta_h = 4.0 * q_chf * l / (g * d);
    let h_out = h_in + delta_h;
    Ok((h_out - sat.h_f) / sat.h_fg)
}

/// Outlet quality from three sources for one record: the dataset value, the
/// energy balance applied to the measured CHF, and the energy balance
/// applied to the generated CHF.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityTriple {
    pub x_measured: f64,
    pub x_calculated: f64,
    pub x_generated: f64,
}

/// Summary statistics of one absolute-error column: mean, spread and the
/// quartile ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSummary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub max: f64,
}

impl ErrorSummary {
    fn from_values(mut values: Vec<f64>) -> ErrorSummary {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN in error summary"));
        ErrorSummary {
            mean,
            std: math::sqrt(var),
            min: values[0],
            p25: percentile_sorted(&values, 0.25),
            p50: percentile_sorted(&values, 0.50),
            p75: percentile_sorted(&values, 0.75),
            max: values[values.len() - 1],
        }
    }
}

/// The two absolute-error comparisons of the consistency assessment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyReport {
    /// |x_measured − x_generated| summary.
    pub measured_generated: ErrorSummary,
    /// |x_calculated − x_generated| summary.
    pub calculated_generated: ErrorSummary,
}

/// Builds the measured-vs-generated and calculated-vs-generated summaries.
pub fn consistency_report(triples: &[QualityTriple]) -> Result<ConsistencyReport, PhysicsError> {
    if triples.is_empty() {
        return Err(PhysicsError::EmptyInput);
    }
    let mg: Vec<f64> = triples
        .iter()
        .map(|t| math::abs(t.x_measured - t.x_generated))
        .collect();
    let cg: Vec<f64> = triples
        .iter()
        .map(|t| math::abs(t.x_calculated - t.x_generated))
        .collect();
    Ok(ConsistencyReport {
        measured_generated: ErrorSummary::from_values(mg),
        calculated_generated: ErrorSummary::from_values(cg),
    })
}

//! Water/steam property kernel on the saturation line, after the IAPWS
//! industrial formulation IF97 (regions 1, 2 and 4).
//!
//! Provides the saturation temperature/pressure pair and the saturated
//! liquid/vapor enthalpies needed by the energy-balance quality
//! reconstruction. Enthalpies come from the dimensionless Gibbs-energy
//! temperature derivative of the region-1 (liquid) and region-2 (vapor)
//! fundamental equations evaluated at (tsat(P), P). Above 623.15 K the
//! saturation line formally enters region 3, which is out of scope here; the
//! region-1/2 equations are extrapolated along the line instead, which keeps
//! h_fg positive and strictly decreasing through 21 MPa.
//!
//! All functions are pure and stateless. Units: pressure MPa, temperature K,
//! enthalpy kJ·kg⁻¹.

use crate::math;
use core::fmt;

/// Specific gas constant of water, kJ·kg⁻¹·K⁻¹.
const R: f64 = 0.461526;

/// Triple-point pressure, MPa.
pub const P_MIN: f64 = 611.213e-6;
/// Critical pressure, MPa (exclusive upper bound of the saturation domain).
pub const P_CRIT: f64 = 22.064;
/// Triple-point temperature, K.
pub const T_MIN: f64 = 273.15;
/// Critical temperature, K (exclusive upper bound).
pub const T_CRIT: f64 = 647.096;

#[derive(Debug, Clone, PartialEq)]
pub enum SteamError {
    PressureOutOfRange { p_mpa: f64 },
    TemperatureOutOfRange { t_k: f64 },
}

impl fmt::Display for SteamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SteamError::PressureOutOfRange { p_mpa } => write!(
                f,
                "pressure {p_mpa} MPa outside saturation domain [{P_MIN}, {P_CRIT}) MPa"
            ),
            SteamError::TemperatureOutOfRange { t_k } => write!(
                f,
                "temperature {t_k} K outside saturation domain [{T_MIN}, {T_CRIT}) K"
            ),
        }
    }
}

impl core::error::Error for SteamError {}

/// Saturation-line state at one pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationPoint {
    /// Pressure (MPa).
    pub p: f64,
    /// Saturation temperature (K).
    pub t_sat: f64,
    /// Saturated-liquid enthalpy (kJ·kg⁻¹).
    pub h_f: f64,
    /// Saturated-vapor enthalpy (kJ·kg⁻¹).
    pub h_g: f64,
    /// Latent heat h_g − h_f (kJ·kg⁻¹).
    pub h_fg: f64,
}

// Region-4 saturation equation coefficients (n1..n10).
const N4: [f64; 10] = [
    0.11670521452767e4,
    -0.72421316703206e6,
    -0.17073846940092e2,
    0.12020824702470e5,
    -0.32325550322333e7,
    0.14915108613530e2,
    -0.48232657361591e4,
    0.40511340542057e6,
    -0.23855557567849,
    0.65017534844798e3,
];

/// Saturation pressure (MPa) from temperature (K). Region-4 basic equation.
pub fn psat(t_k: f64) -> Result<f64, SteamError> {
    if !(t_k.is_finite() && (T_MIN..T_CRIT).contains(&t_k)) {
        return Err(SteamError::TemperatureOutOfRange { t_k });
    }
    let theta = t_k + N4[8] / (t_k - N4[9]);
    let a = theta * theta + N4[0] * theta + N4[1];
    let b = N4[2] * theta * theta + N4[3] * theta + N4[4];
    let c = N4[5] * theta * theta + N4[6] * theta + N4[7];
    let root = math::sqrt(b * b - 4.0 * a * c);
    Ok(math::powi(2.0 * c / (-b + root), 4))
}

/// Saturation temperature (K) from pressure (MPa). Region-4 backward equation.
pub fn tsat(p_mpa: f64) -> Result<f64, SteamError> {
    if !(p_mpa.is_finite() && (P_MIN..P_CRIT).contains(&p_mpa)) {
        return Err(SteamError::PressureOutOfRange { p_mpa });
    }
    let beta = math::powf(p_mpa, 0.25);
    let e = beta * beta + N4[2] * beta + N4[5];
    let f = N4[0] * beta * beta + N4[3] * beta + N4[6];
    let g = N4[1] * beta * beta + N4[4] * beta + N4[7];
    let d = 2.0 * g / (-f - math::sqrt(f * f - 4.0 * e * g));
    let half = N4[9] + d;
    Ok((half - math::sqrt(half * half - 4.0 * (N4[8] + N4[9] * d))) / 2.0)
}

// Region-1 coefficients (34 terms).
const R1_I: [i32; 34] = [
    0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3, 4, 4, 4, 5, 8, 8, 21, 23, 29,
    30, 31, 32,
];
const R1_J: [i32; 34] = [
    -2, -1, 0, 1, 2, 3, 4, 5, -9, -7, -1, 0, 1, 3, -3, 0, 1, 3, 17, -4, 0, 6, -5, -2, 10, -8, -11,
    -6, -29, -31, -38, -39, -40, -41,
];
const R1_N: [f64; 34] = [
    0.14632971213167,
    -0.84548187169114,
    -0.37563603672040e1,
    0.33855169168385e1,
    -0.95791963387872,
    0.15772038513228,
    -0.16616417199501e-1,
    0.81214629983568e-3,
    0.28319080123804e-3,
    -0.60706301565874e-3,
    -0.18990068218419e-1,
    -0.32529748770505e-1,
    -0.21841717175414e-1,
    -0.52838357969930e-4,
    -0.47184321073267e-3,
    -0.30001780793026e-3,
    0.47661393906987e-4,
    -0.44141845330846e-5,
    -0.72694996297594e-15,
    -0.31679644845054e-4,
    -0.28270797985312e-5,
    -0.85205128120103e-9,
    -0.22425281908000e-5,
    -0.65171222895601e-6,
    -0.14341729937924e-12,
    -0.40516996860117e-6,
    -0.12734301741641e-8,
    -0.17424871230634e-9,
    -0.68762131295531e-18,
    0.14478307828521e-19,
    0.26335781662795e-22,
    -0.11947622640071e-22,
    0.18228094581404e-23,
    -0.93537087292458e-25,
];

/// Specific enthalpy (kJ·kg⁻¹) from the region-1 (compressed liquid)
/// fundamental equation: h = R·T·τ·γ_τ with π = p/16.53, τ = 1386/T.
pub fn h_region1(t_k: f64, p_mpa: f64) -> Result<f64, SteamError> {
    if !(t_k.is_finite() && (T_MIN..T_CRIT).contains(&t_k)) {
        return Err(SteamError::TemperatureOutOfRange { t_k });
    }
    if !(p_mpa.is_finite() && p_mpa > 0.0 && p_mpa <= 100.0) {
        return Err(SteamError::PressureOutOfRange { p_mpa });
    }
    let pi = p_mpa / 16.53;
    let tau = 1386.0 / t_k;
    let mut gamma_tau = 0.0;
    for k in 0..34 {
        gamma_tau += R1_N[k]
            * math::powi(7.1 - pi, R1_I[k])
            * R1_J[k] as f64
            * math::powi(tau - 1.222, R1_J[k] - 1);
    }
    Ok(R * t_k * tau * gamma_tau)
}

// Region-2 ideal-gas part (9 terms) and residual part (43 terms).
const R2_J0: [i32; 9] = [0, 1, -5, -4, -3, -2, -1, 2, 3];
const R2_N0: [f64; 9] = [
    -0.96927686500217e1,
    0.10086655968018e2,
    -0.56087911283020e-2,
    0.71452738081455e-1,
    -0.40710498223928,
    0.14240819171444e1,
    -0.43839511319450e1,
    -0.28408632460772,
    0.21268463753307e-1,
];
const R2_IR: [i32; 43] = [
    1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 4, 4, 4, 5, 6, 6, 6, 7, 7, 7, 8, 8, 9, 10, 10, 10,
    16, 16, 18, 20, 20, 20, 21, 22, 23, 24, 24, 24,
];
const R2_JR: [i32; 43] = [
    0, 1, 2, 3, 6, 1, 2, 4, 7, 36, 0, 1, 3, 6, 35, 1, 2, 3, 7, 3, 16, 35, 0, 11, 25, 8, 36, 13, 4,
    10, 14, 29, 50, 57, 20, 35, 48, 21, 53, 39, 26, 40, 58,
];
const R2_NR: [f64; 43] = [
    -0.17731742473213e-2,
    -0.17834862292358e-1,
    -0.45996013696365e-1,
    -0.57581259083432e-1,
    -0.50325278727930e-1,
    -0.33032641670203e-4,
    -0.18948987516315e-3,
    -0.39392777243355e-2,
    -0.43797295650573e-1,
    -0.26674547914087e-4,
    0.20481737692309e-7,
    0.43870667284435e-6,
    -0.32277677238570e-4,
    -0.15033924542148e-2,
    -0.40668253562649e-1,
    -0.78847309559367e-9,
    0.12790717852285e-7,
    0.48225372718507e-6,
    0.22922076337661e-5,
    -0.16714766451061e-10,
    -0.21171472321355e-2,
    -0.23895741934104e2,
    -0.59059564324270e-17,
    -0.12621808899101e-5,
    -0.38946842435739e-1,
    0.11256211360459e-10,
    -0.82311340897998e1,
    0.19809712802088e-7,
    0.10406965210174e-18,
    -0.10234747095929e-12,
    -0.10018179379511e-8,
    -0.80882908646985e-10,
    0.10693031879409,
    -0.33662250574171,
    0.89185845355421e-24,
    0.30629316876232e-12,
    -0.42002467698208e-5,
    -0.59056029685639e-25,
    0.37826947613457e-5,
    -0.12768608934681e-14,
    0.73087610595061e-28,
    0.55414715350778e-16,
    -0.94369707241210e-6,
];

/// Specific enthalpy (kJ·kg⁻¹) from the region-2 (superheated vapor)
/// fundamental equation: h = R·T·τ·(γ⁰_τ + γʳ_τ) with π = p, τ = 540/T.
pub fn h_region2(t_k: f64, p_mpa: f64) -> Result<f64, SteamError> {
    if !(t_k.is_finite() && (T_MIN..=1073.15).contains(&t_k)) {
        return Err(SteamError::TemperatureOutOfRange { t_k });
    }
    if !(p_mpa.is_finite() && p_mpa > 0.0 && p_mpa <= 100.0) {
        return Err(SteamError::PressureOutOfRange { p_mpa });
    }
    let pi = p_mpa;
    let tau = 540.0 / t_k;
    let mut g0_tau = 0.0;
    for k in 0..9 {
        g0_tau += R2_N0[k] * R2_J0[k] as f64 * math::powi(tau, R2_J0[k] - 1);
    }
    let mut gr_tau = 0.0;
    for k in 0..43 {
        gr_tau += R2_NR[k]
            * math::powi(pi, R2_IR[k])
            * R2_JR[k] as f64
            * math::powi(tau - 0.5, R2_JR[k] - 1);
    }
    Ok(R * t_k * tau * (g0_tau + gr_tau))
}

/// Saturated-liquid enthalpy h_f(P) = h_region1(tsat(P), P).
pub fn h_sat_liquid(p_mpa: f64) -> Result<f64, SteamError> {
    h_region1(tsat(p_mpa)?, p_mpa)
}

/// Saturated-vapor enthalpy h_g(P) = h_region2(tsat(P), P).
pub fn h_sat_vapor(p_mpa: f64) -> Result<f64, SteamError> {
    h_region2(tsat(p_mpa)?, p_mpa)
}

/// Full saturation-line state at pressure P (MPa).
pub fn saturation_point(p_mpa: f64) -> Result<SaturationPoint, SteamError> {
    let t_sat = tsat(p_mpa)?;
    let h_f = h_region1(t_sat, p_mpa)?;
    let h_g = h_region2(t_sat, p_mpa)?;
    Ok(SaturationPoint {
        p: p_mpa,
        t_sat,
        h_f,
        h_g,
        h_fg: h_g - h_f,
    })
}

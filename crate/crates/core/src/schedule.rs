//! Diffusion variance schedule and the per-time-step coefficients shared by
//! training and sampling.
//!
//! The forward chain adds Gaussian noise with per-step variance `beta[t]`;
//! from it we derive `alpha[t] = 1 - beta[t]`, the running product
//! `alpha_bar[t]`, and the sampling noise scale `sigma[t] = sqrt(beta[t])`
//! (untrained fixed variance). Indexing is 1-based in the math and 0-based in
//! the arrays: `beta[0]` is the coefficient for time-step t = 1.

use crate::math;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleError {
    /// A constructor precondition failed; the message names the offending
    /// parameter and bound.
    Config(String),
}

impl fmt::Display for ScheduleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleError::Config(msg) => write!(f, "schedule configuration error: {msg}"),
        }
    }
}

impl core::error::Error for ScheduleError {}

/// Per-time-step noise coefficients. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSchedule {
    pub(crate) beta: Vec<f64>,
    pub(crate) alpha: Vec<f64>,
    pub(crate) alpha_bar: Vec<f64>,
    pub(crate) sigma: Vec<f64>,
}

impl DiffusionSchedule {
    /// Number of time-steps T.
    pub fn steps(&self) -> usize {
        self.beta.len()
    }

    /// β_t for t in [1, T].
    pub fn beta(&self, t: usize) -> f64 {
        self.beta[t - 1]
    }

    /// α_t = 1 − β_t.
    pub fn alpha(&self, t: usize) -> f64 {
        self.alpha[t - 1]
    }

    /// ᾱ_t = Π_{s=1..t} α_s.
    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bar[t - 1]
    }

    /// σ_t = sqrt(β_t).
    pub fn sigma(&self, t: usize) -> f64 {
        self.sigma[t - 1]
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }
}

/// Builds the sigmoid variance schedule:
/// β_t = β_min + (β_max − β_min)·σ(s_t), with s_t the T equally spaced points
/// on [−slope, +slope] and σ the logistic function.
pub fn sigmoid_schedule(
    t_steps: usize,
    beta_min: f64,
    beta_max: f64,
    slope: f64,
) -> Result<DiffusionSchedule, ScheduleError> {
    if t_steps < 2 {
        return Err(ScheduleError::Config(alloc::format!(
            "t_steps must be >= 2, got {t_steps}"
        )));
    }
    if !(beta_min > 0.0 && beta_min < beta_max && beta_max < 1.0) {
        return Err(ScheduleError::Config(alloc::format!(
            "beta range must satisfy 0 < beta_min < beta_max < 1, got [{beta_min}, {beta_max}]"
        )));
    }
    if !(slope > 0.0) {
        return Err(ScheduleError::Config(alloc::format!(
            "slope must be > 0, got {slope}"
        )));
    }
    let range = beta_max - beta_min;
    let beta: Vec<f64> = (0..t_steps)
        .map(|i| {
            let s = -slope + 2.0 * slope * i as f64 / (t_steps - 1) as f64;
            beta_min + range * math::logistic(s)
        })
        .collect();
    derive_coefficients(beta)
}

/// Populates α, ᾱ and σ from a β array. ᾱ is a running product in 64-bit
/// arithmetic so the recurrence ᾱ_t = α_t·ᾱ_{t−1} holds exactly.
pub fn derive_coefficients(beta: Vec<f64>) -> Result<DiffusionSchedule, ScheduleError> {
    if beta.is_empty() {
        return Err(ScheduleError::Config("empty beta array".into()));
    }
    for (i, &b) in beta.iter().enumerate() {
        if !(b > 0.0 && b < 1.0) {
            return Err(ScheduleError::Config(alloc::format!(
                "beta[{}] = {b} outside (0, 1)",
                i + 1
            )));
        }
    }
    let alpha: Vec<f64> = beta.iter().map(|b| 1.0 - b).collect();
    let mut alpha_bar = Vec::with_capacity(beta.len());
    let mut running = 1.0f64;
    for &a in &alpha {
        running *= a;
        alpha_bar.push(running);
    }
    let sigma: Vec<f64> = beta.iter().map(|&b| math::sqrt(b)).collect();
    Ok(DiffusionSchedule {
        beta,
        alpha,
        alpha_bar,
        sigma,
    })
}

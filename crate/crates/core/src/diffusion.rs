//! Training loops for the unconditional and condition-guided models, the
//! closed-form forward noising, ancestral reverse sampling with trajectory
//! snapshots, and the Monte-Carlo uncertainty ensemble.
//!
//! Sampling chains are addressed by explicit seeds: chain `row` of a sampler
//! call uses `seed + row`, and ensemble draw `d` for condition `row` uses
//! `seed + row·n + draw`, so results are reproducible and order-independent
//! under parallel evaluation.

use crate::data::{DataError, FeatureMode, StandardScaler};
use crate::math;
use crate::matrix::Matrix;
use crate::net::{loss_and_grads, AdamState, EmaShadow, NetError, NoisePredictor};
use crate::rng::Rng;
use crate::schedule::{sigmoid_schedule, DiffusionSchedule, ScheduleError};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum DiffusionError {
    BadConfig(String),
    Net(NetError),
    Schedule(ScheduleError),
    Data(DataError),
    /// Non-finite loss or gradient; indices are 1-based.
    TrainingAbort {
        epoch: usize,
        batch: usize,
    },
    /// The checkpoint and the request disagree (condition width, kind).
    CheckpointMismatch {
        message: String,
    },
}

impl fmt::Display for DiffusionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DiffusionError::BadConfig(msg) => write!(f, "invalid training config: {msg}"),
            DiffusionError::Net(e) => write!(f, "{e}"),
            DiffusionError::Schedule(e) => write!(f, "{e}"),
            DiffusionError::Data(e) => write!(f, "{e}"),
            DiffusionError::TrainingAbort { epoch, batch } => {
                write!(
                    f,
                    "training aborted at epoch {epoch}, batch {batch}: non-finite loss"
                )
            }
            DiffusionError::CheckpointMismatch { message } => {
                write!(f, "checkpoint mismatch: {message}")
            }
        }
    }
}

impl core::error::Error for DiffusionError {}

impl From<NetError> for DiffusionError {
    fn from(e: NetError) -> Self {
        DiffusionError::Net(e)
    }
}

impl From<ScheduleError> for DiffusionError {
    fn from(e: ScheduleError) -> Self {
        DiffusionError::Schedule(e)
    }
}

impl From<DataError> for DiffusionError {
    fn from(e: DataError) -> Self {
        DiffusionError::Data(e)
    }
}

/// Which model a checkpoint holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Unconditional over the joint 6-column table.
    Dm,
    /// Condition-guided CHF generator.
    Cdm,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Dm => "dm",
            ModelKind::Cdm => "cdm",
        }
    }

    pub fn parse(s: &str) -> Option<ModelKind> {
        match s {
            "dm" => Some(ModelKind::Dm),
            "cdm" => Some(ModelKind::Cdm),
            _ => None,
        }
    }
}

/// Schedule construction parameters, kept alongside the realized schedule so
/// checkpoints can be rebuilt exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleParams {
    pub t_steps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub slope: f64,
}

impl ScheduleParams {
    pub fn realize(&self) -> Result<DiffusionSchedule, ScheduleError> {
        sigmoid_schedule(self.t_steps, self.beta_min, self.beta_max, self.slope)
    }
}

/// Full training recipe.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub mode: ModelKind,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub schedule: ScheduleParams,
    pub ema_mu: f64,
    pub seed: u64,
    pub hidden: Vec<usize>,
    pub embed_width: usize,
    /// Sample with the EMA shadow (default) or the live parameters.
    pub sample_with_ema: bool,
}

impl TrainConfig {
    /// The unconditional-model recipe: T=100, β in [1e-5, 1e-2], 1200
    /// epochs, batch 64, learning rate 1e-3, EMA 0.9.
    pub fn dm_default() -> Self {
        TrainConfig {
            mode: ModelKind::Dm,
            epochs: 1200,
            batch_size: 64,
            learning_rate: 1e-3,
            schedule: ScheduleParams {
                t_steps: 100,
                beta_min: 1e-5,
                beta_max: 1e-2,
                slope: 6.0,
            },
            ema_mu: 0.9,
            seed: 0,
            hidden: alloc::vec![128; 4],
            embed_width: 32,
            sample_with_ema: true,
        }
    }

    /// The conditional-model recipe: T=200, six hidden layers, 7500 epochs,
    /// batch 300, learning rate 1e-4, EMA 0.9.
    pub fn cdm_default() -> Self {
        TrainConfig {
            mode: ModelKind::Cdm,
            epochs: 7500,
            batch_size: 300,
            learning_rate: 1e-4,
            schedule: ScheduleParams {
                t_steps: 200,
                beta_min: 1e-5,
                beta_max: 1e-2,
                slope: 6.0,
            },
            ema_mu: 0.9,
            seed: 0,
            hidden: alloc::vec![128; 6],
            embed_width: 32,
            sample_with_ema: true,
        }
    }

    fn validate(&self) -> Result<(), DiffusionError> {
        if self.epochs == 0 {
            return Err(DiffusionError::BadConfig("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(DiffusionError::BadConfig("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(DiffusionError::BadConfig(
                "learning_rate must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.ema_mu) {
            return Err(DiffusionError::BadConfig(
                "ema_mu must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Closed-form forward noising: x_t = sqrt(ᾱ_t)·x_0 + sqrt(1−ᾱ_t)·ε.
pub fn forward_noise(x0: &[f64], t: usize, eps: &[f64], schedule: &DiffusionSchedule) -> Vec<f64> {
    assert!(t >= 1 && t <= schedule.steps(), "t outside [1, T]");
    assert_eq!(x0.len(), eps.len(), "x0/eps dimension mismatch");
    let ab = schedule.alpha_bar(t);
    let (sa, sn) = (math::sqrt(ab), math::sqrt(1.0 - ab));
    x0.iter().zip(eps).map(|(&x, &e)| sa * x + sn * e).collect()
}

/// One ancestral reverse step:
/// x_{t−1} = (x_t − (β_t/sqrt(1−ᾱ_t))·ε̂) / sqrt(α_t) + σ_t·z.
/// Callers pass z = 0 at the final step.
pub fn reverse_step(
    x_t: &[f64],
    eps_hat: &[f64],
    t: usize,
    schedule: &DiffusionSchedule,
    z: &[f64],
) -> Vec<f64> {
    let beta = schedule.beta(t);
    let inv_sqrt_alpha = 1.0 / math::sqrt(schedule.alpha(t));
    let eps_coeff = beta / math::sqrt(1.0 - schedule.alpha_bar(t));
    let sigma = schedule.sigma(t);
    x_t.iter()
        .zip(eps_hat)
        .zip(z)
        .map(|((&x, &e), &zv)| (x - eps_coeff * e) * inv_sqrt_alpha + sigma * zv)
        .collect()
}

/// A trained model bundle: everything sampling needs.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub kind: ModelKind,
    pub feature_mode: FeatureMode,
    /// Live parameters (training view).
    pub model: NoisePredictor,
    /// EMA parameters (sampling view).
    pub shadow: EmaShadow,
    pub schedule_params: ScheduleParams,
    pub schedule: DiffusionSchedule,
    /// Scaler over the generated columns (6 for DM, 1 for CDM).
    pub data_scaler: StandardScaler,
    /// Scaler over the condition columns (CDM only).
    pub cond_scaler: Option<StandardScaler>,
    /// Column labels: conditions then CHF.
    pub columns: Vec<String>,
    pub ema_mu: f64,
    pub sample_with_ema: bool,
}

impl Checkpoint {
    /// The parameter set generation uses.
    pub fn sampling_model(&self) -> &NoisePredictor {
        if self.sample_with_ema {
            self.shadow.model()
        } else {
            &self.model
        }
    }

    fn require_kind(&self, kind: ModelKind) -> Result<(), DiffusionError> {
        if self.kind != kind {
            return Err(DiffusionError::CheckpointMismatch {
                message: alloc::format!(
                    "operation needs a {} checkpoint, found {}",
                    kind.as_str(),
                    self.kind.as_str()
                ),
            });
        }
        Ok(())
    }

    fn check_conditions(&self, conditions: &Matrix) -> Result<(), DiffusionError> {
        let expected = self.model.cond_dim();
        if conditions.cols() != expected {
            return Err(DiffusionError::CheckpointMismatch {
                message: alloc::format!(
                    "checkpoint was trained on {expected} condition columns, got {}",
                    conditions.cols()
                ),
            });
        }
        Ok(())
    }
}

/// Training output: the checkpoint plus the per-epoch mean loss curve.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub checkpoint: Checkpoint,
    pub loss_history: Vec<f64>,
}

/// Trains a noise predictor on standardized data.
///
/// `x0_std` holds the generated columns (6-wide joint table for the DM,
/// 1-wide CHF for the CDM); `cond_std` the standardized conditions for the
/// CDM. Mini-batches are reshuffled every epoch from the seeded stream; the
/// EMA shadow is updated after every optimizer step.
pub fn train(
    x0_std: &Matrix,
    cond_std: Option<&Matrix>,
    data_scaler: StandardScaler,
    cond_scaler: Option<StandardScaler>,
    columns: Vec<String>,
    feature_mode: FeatureMode,
    cfg: &TrainConfig,
) -> Result<TrainResult, DiffusionError> {
    cfg.validate()?;
    match (cfg.mode, cond_std.is_some()) {
        (ModelKind::Dm, true) => {
            return Err(DiffusionError::BadConfig(
                "unconditional training takes no condition matrix".into(),
            ))
        }
        (ModelKind::Cdm, false) => {
            return Err(DiffusionError::BadConfig(
                "conditional training needs a condition matrix".into(),
            ))
        }
        _ => {}
    }
    let n = x0_std.rows();
    if n == 0 {
        return Err(DiffusionError::BadConfig("empty training set".into()));
    }
    if let Some(c) = cond_std {
        if c.rows() != n {
            return Err(DiffusionError::BadConfig(
                "condition and data row counts differ".into(),
            ));
        }
    }

    let schedule = cfg.schedule.realize()?;
    let mut master = Rng::new(cfg.seed);
    let init_seed = master.next_u64();
    let cond_dim = cond_std.map_or(0, Matrix::cols);
    let mut model = NoisePredictor::init(
        init_seed,
        x0_std.cols(),
        cond_dim,
        &cfg.hidden,
        cfg.embed_width,
    )?;
    let mut shadow = EmaShadow::new(&model, cfg.ema_mu)?;
    let mut adam = AdamState::new(&model, cfg.learning_rate);

    let mut loss_history = Vec::with_capacity(cfg.epochs);
    let mut indices: Vec<usize> = (0..n).collect();
    for epoch in 0..cfg.epochs {
        master.shuffle(&mut indices);
        let mut epoch_loss = 0.0;
        let mut batches = 0usize;
        for chunk in indices.chunks(cfg.batch_size) {
            let x0_b = x0_std.select_rows(chunk);
            let cond_b = cond_std.map(|c| c.select_rows(chunk));
            let step = (|| -> Result<f64, NetError> {
                let (loss, grads) =
                    loss_and_grads(&model, &x0_b, &schedule, &mut master, cond_b.as_ref())?;
                adam.step(&mut model, &grads)?;
                Ok(loss)
            })();
            let loss = step.map_err(|_| DiffusionError::TrainingAbort {
                epoch: epoch + 1,
                batch: batches + 1,
            })?;
            shadow.update(&model);
            epoch_loss += loss;
            batches += 1;
        }
        loss_history.push(epoch_loss / batches as f64);
    }

    Ok(TrainResult {
        checkpoint: Checkpoint {
            kind: cfg.mode,
            feature_mode,
            model,
            shadow,
            schedule_params: cfg.schedule,
            schedule,
            data_scaler,
            cond_scaler,
            columns,
            ema_mu: cfg.ema_mu,
            sample_with_ema: cfg.sample_with_ema,
        },
        loss_history,
    })
}

/// Runs `rngs.len()` reverse chains in lockstep. Each chain consumes only
/// its own stream: the initial x_T, then one z per step down to t = 2 (the
/// final step is noiseless), so recording snapshots never shifts the draws.
fn reverse_chains(
    model: &NoisePredictor,
    schedule: &DiffusionSchedule,
    rngs: &mut [Rng],
    cond_std: Option<&Matrix>,
    snapshot_stride: Option<usize>,
) -> (Matrix, Vec<(usize, Matrix)>) {
    let n = rngs.len();
    let dim = model.data_dim();
    let t_max = schedule.steps();

    let mut x = Matrix::zeros(n, dim);
    for (i, rng) in rngs.iter_mut().enumerate() {
        rng.fill_normal(x.row_mut(i));
    }

    let mut snapshots: Vec<(usize, Matrix)> = Vec::new();
    let want_snapshot = |t: usize, stride: usize| t == 0 || (t_max - t).is_multiple_of(stride);
    if let Some(stride) = snapshot_stride {
        if want_snapshot(t_max, stride) {
            snapshots.push((t_max, x.clone()));
        }
    }

    let mut inputs = Matrix::zeros(n, model.input_dim());
    let mut z = alloc::vec![0.0; dim];
    for t in (1..=t_max).rev() {
        for i in 0..n {
            model
                .assemble_into(x.row(i), t, cond_std.map(|c| c.row(i)), inputs.row_mut(i))
                .expect("chain shapes are validated by the caller");
        }
        let eps_hat = model.predict_assembled(&inputs);
        for i in 0..n {
            if t > 1 {
                rngs[i].fill_normal(&mut z);
            } else {
                z.fill(0.0);
            }
            let next = reverse_step(x.row(i), eps_hat.row(i), t, schedule, &z);
            x.row_mut(i).copy_from_slice(&next);
        }
        if let Some(stride) = snapshot_stride {
            if want_snapshot(t - 1, stride) {
                snapshots.push((t - 1, x.clone()));
            }
        }
    }
    (x, snapshots)
}

fn chain_rngs(seed: u64, count: usize) -> Vec<Rng> {
    (0..count)
        .map(|i| Rng::new(seed.wrapping_add(i as u64)))
        .collect()
}

/// Generates `n` unconditional samples in physical units (6 columns).
/// Sample `i` is the chain seeded with `seed + i`.
pub fn sample_dm(ckpt: &Checkpoint, n: usize, seed: u64) -> Result<Matrix, DiffusionError> {
    ckpt.require_kind(ModelKind::Dm)?;
    if n == 0 {
        return Ok(Matrix::zeros(0, ckpt.model.data_dim()));
    }
    let mut rngs = chain_rngs(seed, n);
    let (x_std, _) = reverse_chains(ckpt.sampling_model(), &ckpt.schedule, &mut rngs, None, None);
    Ok(ckpt.data_scaler.inverse_transform(&x_std)?)
}

/// Generates one CHF value per condition row (physical units). Row `r` is
/// the chain seeded with `seed + r`.
pub fn sample_cdm(
    ckpt: &Checkpoint,
    conditions: &Matrix,
    seed: u64,
) -> Result<Vec<f64>, DiffusionError> {
    ckpt.require_kind(ModelKind::Cdm)?;
    ckpt.check_conditions(conditions)?;
    if conditions.rows() == 0 {
        return Ok(Vec::new());
    }
    let cond_scaler = ckpt
        .cond_scaler
        .as_ref()
        .expect("CDM checkpoints carry a condition scaler");
    let cond_std = cond_scaler.transform(conditions)?;
    let mut rngs = chain_rngs(seed, conditions.rows());
    let (x_std, _) = reverse_chains(
        ckpt.sampling_model(),
        &ckpt.schedule,
        &mut rngs,
        Some(&cond_std),
        None,
    );
    let physical = ckpt.data_scaler.inverse_transform(&x_std)?;
    Ok(physical.column(0))
}

/// Intermediate states of the denoising chain in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub stride: usize,
    /// (time-step, states) from t = T down to t = 0; one row per chain.
    pub snapshots: Vec<(usize, Matrix)>,
}

fn snapshots_to_physical(
    ckpt: &Checkpoint,
    snapshots: Vec<(usize, Matrix)>,
) -> Result<Vec<(usize, Matrix)>, DiffusionError> {
    snapshots
        .into_iter()
        .map(|(t, m)| Ok((t, ckpt.data_scaler.inverse_transform(&m)?)))
        .collect()
}

/// Denoising-trajectory snapshots for conditional generation, at
/// t = T, T−stride, …, 0 (the final state is always included). The t = 0
/// snapshot is bit-identical to [`sample_cdm`] for the same seed.
pub fn trajectory_cdm(
    ckpt: &Checkpoint,
    conditions: &Matrix,
    stride: usize,
    seed: u64,
) -> Result<Trajectory, DiffusionError> {
    ckpt.require_kind(ModelKind::Cdm)?;
    ckpt.check_conditions(conditions)?;
    if stride == 0 {
        return Err(DiffusionError::BadConfig(
            "trajectory stride must be positive".into(),
        ));
    }
    let cond_scaler = ckpt
        .cond_scaler
        .as_ref()
        .expect("CDM checkpoints carry a condition scaler");
    let cond_std = cond_scaler.transform(conditions)?;
    let mut rngs = chain_rngs(seed, conditions.rows());
    let (_, snaps) = reverse_chains(
        ckpt.sampling_model(),
        &ckpt.schedule,
        &mut rngs,
        Some(&cond_std),
        Some(stride),
    );
    Ok(Trajectory {
        stride,
        snapshots: snapshots_to_physical(ckpt, snaps)?,
    })
}

/// Unconditional counterpart of [`trajectory_cdm`] over `n` chains.
pub fn trajectory_dm(
    ckpt: &Checkpoint,
    n: usize,
    stride: usize,
    seed: u64,
) -> Result<Trajectory, DiffusionError> {
    ckpt.require_kind(ModelKind::Dm)?;
    if stride == 0 {
        return Err(DiffusionError::BadConfig(
            "trajectory stride must be positive".into(),
        ));
    }
    let mut rngs = chain_rngs(seed, n);
    let (_, snaps) = reverse_chains(
        ckpt.sampling_model(),
        &ckpt.schedule,
        &mut rngs,
        None,
        Some(stride),
    );
    Ok(Trajectory {
        stride,
        snapshots: snapshots_to_physical(ckpt, snaps)?,
    })
}

/// Monte-Carlo generation ensemble for one condition.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleEnsemble {
    /// Condition vector in physical units.
    pub condition: Vec<f64>,
    /// Generated CHF draws (kW·m⁻²).
    pub draws: Vec<f64>,
    /// Mean of the draws.
    pub mu_samples: f64,
    /// Population standard deviation of the draws.
    pub sigma_samples: f64,
    /// 100·σ/μ, undefined (None) when μ = 0.
    pub relative_std: Option<f64>,
}

impl SampleEnsemble {
    fn from_draws(condition: Vec<f64>, draws: Vec<f64>) -> Self {
        let n = draws.len() as f64;
        let mu = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|d| (d - mu) * (d - mu)).sum::<f64>() / n;
        let sigma = math::sqrt(var);
        let relative_std = if mu == 0.0 {
            None
        } else {
            Some(sigma / mu * 100.0)
        };
        SampleEnsemble {
            condition,
            draws,
            mu_samples: mu,
            sigma_samples: sigma,
            relative_std,
        }
    }
}

/// Ensemble for a single condition row; draw `d` is the chain seeded with
/// `seed + row·n + d`. Exposed separately so callers can spread rows over
/// threads and reassemble in row order.
pub fn uq_ensemble_row(
    ckpt: &Checkpoint,
    condition: &[f64],
    row: usize,
    n_draws: usize,
    seed: u64,
) -> Result<SampleEnsemble, DiffusionError> {
    ckpt.require_kind(ModelKind::Cdm)?;
    if n_draws < 2 {
        return Err(DiffusionError::BadConfig(
            "ensemble needs at least 2 draws".into(),
        ));
    }
    let cond = Matrix::from_vec(1, condition.len(), condition.to_vec());
    ckpt.check_conditions(&cond)?;
    let cond_scaler = ckpt
        .cond_scaler
        .as_ref()
        .expect("CDM checkpoints carry a condition scaler");
    let cond_std_row = cond_scaler.transform(&cond)?;
    // Replicate the standardized condition across the batched draws.
    let mut cond_std = Matrix::zeros(n_draws, condition.len());
    for i in 0..n_draws {
        cond_std.row_mut(i).copy_from_slice(cond_std_row.row(0));
    }
    let base = seed.wrapping_add((row as u64).wrapping_mul(n_draws as u64));
    let mut rngs = chain_rngs(base, n_draws);
    let (x_std, _) = reverse_chains(
        ckpt.sampling_model(),
        &ckpt.schedule,
        &mut rngs,
        Some(&cond_std),
        None,
    );
    let physical = ckpt.data_scaler.inverse_transform(&x_std)?;
    Ok(SampleEnsemble::from_draws(
        condition.to_vec(),
        physical.column(0),
    ))
}

/// Per-condition Monte-Carlo ensembles (sequential over rows).
pub fn uq_ensemble(
    ckpt: &Checkpoint,
    conditions: &Matrix,
    n_draws: usize,
    seed: u64,
) -> Result<Vec<SampleEnsemble>, DiffusionError> {
    (0..conditions.rows())
        .map(|row| uq_ensemble_row(ckpt, conditions.row(row), row, n_draws, seed))
        .collect()
}

//! The noise-prediction regressor: a fully connected network over the
//! concatenation [x_t, time embedding, condition], trained with exact
//! reverse-mode gradients of the noise-matching loss, an adaptive-moment
//! optimizer, and an exponential-moving-average parameter shadow.

use crate::math;
use crate::matrix::Matrix;
use crate::rng::Rng;
use crate::schedule::DiffusionSchedule;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum NetError {
    BadConfig(String),
    ShapeMismatch {
        expected: usize,
        got: usize,
    },
    /// Training abort signal: a loss, gradient or parameter became non-finite.
    NonFinite {
        what: &'static str,
    },
}

impl fmt::Display for NetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NetError::BadConfig(msg) => write!(f, "network configuration error: {msg}"),
            NetError::ShapeMismatch { expected, got } => {
                write!(f, "shape mismatch: expected {expected}, got {got}")
            }
            NetError::NonFinite { what } => write!(f, "non-finite {what}; training aborted"),
        }
    }
}

impl core::error::Error for NetError {}

/// Sinusoidal encoding of the time-step. Deterministic; distinct integer
/// time-steps map to distinct vectors (the unit-frequency sin/cos pair alone
/// separates integers).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeEmbedding {
    width: usize,
    base: f64,
}

impl TimeEmbedding {
    pub const DEFAULT_BASE: f64 = 10_000.0;

    pub fn new(width: usize, base: f64) -> Result<Self, NetError> {
        if width == 0 || !width.is_multiple_of(2) {
            return Err(NetError::BadConfig(alloc::format!(
                "embedding width must be a positive even integer, got {width}"
            )));
        }
        if !(base > 1.0) {
            return Err(NetError::BadConfig(alloc::format!(
                "embedding frequency base must exceed 1, got {base}"
            )));
        }
        Ok(TimeEmbedding { width, base })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    /// Writes [sin(t·ω_0), cos(t·ω_0), sin(t·ω_1), …] with
    /// ω_k = base^(−2k/width).
    pub fn embed(&self, t: usize, out: &mut [f64]) {
        assert_eq!(out.len(), self.width);
        let half = self.width / 2;
        for k in 0..half {
            let omega = math::powf(self.base, -2.0 * k as f64 / self.width as f64);
            let phase = t as f64 * omega;
            out[2 * k] = math::sin(phase);
            out[2 * k + 1] = math::cos(phase);
        }
    }
}

/// Activation of the hidden layers. A single documented choice: tanh is
/// smooth with a strictly positive derivative everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
}

impl Activation {
    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
        }
    }

    pub fn parse(s: &str) -> Option<Activation> {
        match s {
            "tanh" => Some(Activation::Tanh),
            _ => None,
        }
    }

    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => math::tanh(x),
        }
    }

    /// Derivative expressed through the activation output.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Linear {
    /// Weights, out×in row-major.
    pub(crate) w: Matrix,
    pub(crate) b: Vec<f64>,
}

/// The ε_θ regressor.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisePredictor {
    data_dim: usize,
    cond_dim: usize,
    embed: TimeEmbedding,
    activation: Activation,
    layers: Vec<Linear>,
    hidden: Vec<usize>,
}

impl NoisePredictor {
    /// Deterministic initialization: weights fan-in-scaled uniform
    /// U(−1/√fan_in, 1/√fan_in) drawn layer by layer from `seed`, biases zero.
    pub fn init(
        seed: u64,
        data_dim: usize,
        cond_dim: usize,
        hidden: &[usize],
        embed_width: usize,
    ) -> Result<Self, NetError> {
        if data_dim == 0 {
            return Err(NetError::BadConfig("data_dim must be positive".into()));
        }
        if hidden.is_empty() || hidden.contains(&0) {
            return Err(NetError::BadConfig(
                "hidden widths must be a non-empty list of positive integers".into(),
            ));
        }
        let embed = TimeEmbedding::new(embed_width, TimeEmbedding::DEFAULT_BASE)?;
        let input_dim = data_dim + embed_width + cond_dim;

        let mut rng = Rng::new(seed);
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut fan_in = input_dim;
        for &out in hidden.iter().chain(core::iter::once(&data_dim)) {
            let bound = 1.0 / math::sqrt(fan_in as f64);
            let mut w = Matrix::zeros(out, fan_in);
            for v in w.as_mut_slice().iter_mut() {
                *v = (2.0 * rng.next_f64() - 1.0) * bound;
            }
            layers.push(Linear {
                w,
                b: alloc::vec![0.0; out],
            });
            fan_in = out;
        }
        Ok(NoisePredictor {
            data_dim,
            cond_dim,
            embed,
            activation: Activation::Tanh,
            layers,
            hidden: hidden.to_vec(),
        })
    }

    pub fn data_dim(&self) -> usize {
        self.data_dim
    }

    pub fn cond_dim(&self) -> usize {
        self.cond_dim
    }

    pub fn embed_width(&self) -> usize {
        self.embed.width()
    }

    pub fn hidden_widths(&self) -> &[usize] {
        &self.hidden
    }

    pub fn activation_name(&self) -> &'static str {
        self.activation.as_str()
    }

    pub fn input_dim(&self) -> usize {
        self.data_dim + self.embed.width() + self.cond_dim
    }

    /// Parameter arrays in declaration order: layer 0 weights (row-major),
    /// layer 0 biases, layer 1 weights, … Used by the optimizer, the EMA
    /// shadow and checkpoint serialization.
    pub fn param_arrays(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for layer in &self.layers {
            out.push(layer.w.as_slice());
            out.push(layer.b.as_slice());
        }
        out
    }

    pub fn param_arrays_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for layer in &mut self.layers {
            out.push(layer.w.as_mut_slice());
            out.push(layer.b.as_mut_slice());
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.w.as_slice().len() + l.b.len())
            .sum()
    }

    /// Writes the network input row [x_t, embedding(t), condition] into a
    /// caller-owned buffer of width [`NoisePredictor::input_dim`].
    pub fn assemble_into(
        &self,
        x_t: &[f64],
        t: usize,
        cond: Option<&[f64]>,
        out: &mut [f64],
    ) -> Result<(), NetError> {
        if x_t.len() != self.data_dim {
            return Err(NetError::ShapeMismatch {
                expected: self.data_dim,
                got: x_t.len(),
            });
        }
        let cond_len = cond.map_or(0, <[f64]>::len);
        if cond_len != self.cond_dim {
            return Err(NetError::ShapeMismatch {
                expected: self.cond_dim,
                got: cond_len,
            });
        }
        if out.len() != self.input_dim() {
            return Err(NetError::ShapeMismatch {
                expected: self.input_dim(),
                got: out.len(),
            });
        }
        out[..self.data_dim].copy_from_slice(x_t);
        self.embed.embed(
            t,
            &mut out[self.data_dim..self.data_dim + self.embed.width()],
        );
        if let Some(c) = cond {
            out[self.data_dim + self.embed.width()..].copy_from_slice(c);
        }
        Ok(())
    }

    /// Builds the network input row [x_t, embedding(t), condition].
    pub fn assemble_input(
        &self,
        x_t: &[f64],
        t: usize,
        cond: Option<&[f64]>,
    ) -> Result<Vec<f64>, NetError> {
        let mut row = alloc::vec![0.0; self.input_dim()];
        self.assemble_into(x_t, t, cond, &mut row)?;
        Ok(row)
    }

    /// Predicted noise for one sample.
    pub fn forward(
        &self,
        x_t: &[f64],
        t: usize,
        cond: Option<&[f64]>,
    ) -> Result<Vec<f64>, NetError> {
        let row = self.assemble_input(x_t, t, cond)?;
        let input = Matrix::from_vec(1, row.len(), row);
        let out = self.predict_assembled(&input);
        Ok(out.row(0).to_vec())
    }

    /// Forward pass over pre-assembled input rows, no caches.
    pub fn predict_assembled(&self, inputs: &Matrix) -> Matrix {
        let (out, _) = self.forward_cached(inputs, false);
        out
    }

    /// Forward pass keeping per-layer activations for backprop.
    /// `activations[0]` is the input; the last entry is the linear output.
    fn forward_cached(&self, inputs: &Matrix, keep: bool) -> (Matrix, Vec<Matrix>) {
        assert_eq!(inputs.cols(), self.input_dim(), "assembled input width");
        let mut caches: Vec<Matrix> = Vec::new();
        if keep {
            caches.push(inputs.clone());
        }
        let mut current = inputs.clone();
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = affine(&current, &layer.w, &layer.b);
            if k < last {
                for v in z.as_mut_slice().iter_mut() {
                    *v = self.activation.apply(*v);
                }
            }
            if keep && k < last {
                caches.push(z.clone());
            }
            current = z;
        }
        (current, caches)
    }

    /// Exact reverse-mode gradients of a scalar loss with upstream
    /// derivative `d_out` (B×data_dim) for the assembled `inputs`.
    fn backward(&self, caches: &[Matrix], d_out: &Matrix) -> Gradients {
        let mut grads: Vec<(Matrix, Vec<f64>)> = self
            .layers
            .iter()
            .map(|l| {
                (
                    Matrix::zeros(l.w.rows(), l.w.cols()),
                    alloc::vec![0.0; l.b.len()],
                )
            })
            .collect();

        // caches = [input, a_1, …, a_{L-1}] (post-activation of each hidden
        // layer); the output layer is linear so delta starts as d_out.
        let mut delta = d_out.clone();
        for k in (0..self.layers.len()).rev() {
            let a_prev = &caches[k];
            // dW[o][i] = Σ_b delta[b][o] · a_prev[b][i]; db[o] = Σ_b delta[b][o]
            let (dw, db) = &mut grads[k];
            for b in 0..delta.rows() {
                let drow = delta.row(b);
                let arow = a_prev.row(b);
                for (o, &d) in drow.iter().enumerate() {
                    db[o] += d;
                    let wrow = dw.row_mut(o);
                    for (wi, &a) in wrow.iter_mut().zip(arow) {
                        *wi += d * a;
                    }
                }
            }
            if k > 0 {
                // dA = delta · W, then through the activation of layer k-1.
                let mut d_act = Matrix::zeros(delta.rows(), self.layers[k].w.cols());
                for b in 0..delta.rows() {
                    let drow = delta.row(b);
                    for (o, &d) in drow.iter().enumerate() {
                        let wrow = self.layers[k].w.row(o);
                        let target = d_act.row_mut(b);
                        for (ti, &w) in target.iter_mut().zip(wrow) {
                            *ti += d * w;
                        }
                    }
                }
                for b in 0..d_act.rows() {
                    let arow = caches[k].row(b);
                    for (v, &a) in d_act.row_mut(b).iter_mut().zip(arow) {
                        *v *= self.activation.derivative_from_output(a);
                    }
                }
                delta = d_act;
            }
        }
        Gradients { layers: grads }
    }
}

fn affine(input: &Matrix, w: &Matrix, b: &[f64]) -> Matrix {
    let mut out = Matrix::zeros(input.rows(), w.rows());
    for bi in 0..input.rows() {
        let irow = input.row(bi);
        let orow = out.row_mut(bi);
        for (o, ov) in orow.iter_mut().enumerate() {
            let wrow = w.row(o);
            let mut acc = b[o];
            for (x, wv) in irow.iter().zip(wrow) {
                acc += x * wv;
            }
            *ov = acc;
        }
    }
    out
}

/// Per-parameter gradients, mirroring the layer shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    layers: Vec<(Matrix, Vec<f64>)>,
}

impl Gradients {
    pub fn arrays(&self) -> Vec<&[f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for (w, b) in &self.layers {
            out.push(w.as_slice());
            out.push(b.as_slice());
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.arrays()
            .iter()
            .all(|a| a.iter().all(|v| v.is_finite()))
    }
}

/// Mean squared error between predicted and true noise.
pub fn mse_loss(pred: &Matrix, target: &Matrix) -> f64 {
    debug_assert_eq!(pred.rows(), target.rows());
    debug_assert_eq!(pred.cols(), target.cols());
    let n = (pred.rows() * pred.cols()) as f64;
    pred.as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(&p, &t)| (p - t) * (p - t))
        .sum::<f64>()
        / n
}

/// Noise-matching loss and exact gradients with the per-sample time-steps
/// and noise supplied by the caller. Pure; the finite-difference oracle in
/// the tests calls this with frozen draws.
pub fn loss_and_grads_with_noise(
    model: &NoisePredictor,
    x0: &Matrix,
    schedule: &DiffusionSchedule,
    ts: &[usize],
    eps: &Matrix,
    cond: Option<&Matrix>,
) -> Result<(f64, Gradients), NetError> {
    let batch = x0.rows();
    if x0.cols() != model.data_dim() {
        return Err(NetError::ShapeMismatch {
            expected: model.data_dim(),
            got: x0.cols(),
        });
    }
    if ts.len() != batch || eps.rows() != batch || eps.cols() != model.data_dim() {
        return Err(NetError::ShapeMismatch {
            expected: batch,
            got: ts.len(),
        });
    }
    if let Some(c) = cond {
        if c.rows() != batch || c.cols() != model.cond_dim() {
            return Err(NetError::ShapeMismatch {
                expected: model.cond_dim(),
                got: c.cols(),
            });
        }
    } else if model.cond_dim() != 0 {
        return Err(NetError::ShapeMismatch {
            expected: model.cond_dim(),
            got: 0,
        });
    }

    let mut inputs = Matrix::zeros(batch, model.input_dim());
    let mut x_t = alloc::vec![0.0; model.data_dim()];
    for b in 0..batch {
        let t = ts[b];
        let ab = schedule.alpha_bar(t);
        let (sa, sn) = (math::sqrt(ab), math::sqrt(1.0 - ab));
        for ((v, &x), &e) in x_t.iter_mut().zip(x0.row(b)).zip(eps.row(b)) {
            *v = sa * x + sn * e;
        }
        model.assemble_into(&x_t, t, cond.map(|c| c.row(b)), inputs.row_mut(b))?;
    }

    let (pred, caches) = model.forward_cached(&inputs, true);
    let loss = mse_loss(&pred, eps);
    if !loss.is_finite() {
        return Err(NetError::NonFinite { what: "loss" });
    }
    let scale = 2.0 / (batch * model.data_dim()) as f64;
    let mut d_out = Matrix::zeros(batch, model.data_dim());
    for b in 0..batch {
        let prow = pred.row(b);
        let erow = eps.row(b);
        for (j, v) in d_out.row_mut(b).iter_mut().enumerate() {
            *v = scale * (prow[j] - erow[j]);
        }
    }
    let grads = model.backward(&caches, &d_out);
    Ok((loss, grads))
}

/// Draws per-sample time-steps (uniform on [1, T]) and standard-normal noise
/// from `rng`, then computes the loss and gradients.
pub fn loss_and_grads(
    model: &NoisePredictor,
    x0: &Matrix,
    schedule: &DiffusionSchedule,
    rng: &mut Rng,
    cond: Option<&Matrix>,
) -> Result<(f64, Gradients), NetError> {
    let batch = x0.rows();
    let mut ts = Vec::with_capacity(batch);
    let mut eps = Matrix::zeros(batch, model.data_dim());
    for b in 0..batch {
        ts.push(rng.next_index(schedule.steps()) + 1);
        rng.fill_normal(eps.row_mut(b));
    }
    loss_and_grads_with_noise(model, x0, schedule, &ts, &eps, cond)
}

/// Adaptive-moment optimizer state (decay 0.9/0.999, epsilon 1e-8,
/// bias-corrected).
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: u64,
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl AdamState {
    pub fn new(model: &NoisePredictor, learning_rate: f64) -> Self {
        let shapes: Vec<usize> = model.param_arrays().iter().map(|a| a.len()).collect();
        AdamState {
            m: shapes.iter().map(|&n| alloc::vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| alloc::vec![0.0; n]).collect(),
            step: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One bias-corrected update in place.
    pub fn step(&mut self, model: &mut NoisePredictor, grads: &Gradients) -> Result<(), NetError> {
        if !grads.is_finite() {
            return Err(NetError::NonFinite { what: "gradient" });
        }
        self.step += 1;
        let bc1 = 1.0 - math::powi(self.beta1, self.step as i32);
        let bc2 = 1.0 - math::powi(self.beta2, self.step as i32);
        let garrays = grads.arrays();
        let mut parrays = model.param_arrays_mut();
        assert_eq!(garrays.len(), parrays.len(), "gradient layout mismatch");
        for (slot, params) in parrays.iter_mut().enumerate() {
            let g = garrays[slot];
            assert_eq!(g.len(), params.len(), "gradient shape mismatch");
            let m = &mut self.m[slot];
            let v = &mut self.v[slot];
            for i in 0..params.len() {
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                params[i] -= self.learning_rate * m_hat / (math::sqrt(v_hat) + self.epsilon);
            }
        }
        for params in model.param_arrays() {
            if params.iter().any(|p| !p.is_finite()) {
                return Err(NetError::NonFinite { what: "parameter" });
            }
        }
        Ok(())
    }
}

/// EMA parameter shadow: shadow ← (1−μ)·current + μ·shadow. Constructed as a
/// copy of the live parameters, so it is never uninitialized.
#[derive(Debug, Clone, PartialEq)]
pub struct EmaShadow {
    params: NoisePredictor,
    mu: f64,
}

impl EmaShadow {
    pub fn new(model: &NoisePredictor, mu: f64) -> Result<Self, NetError> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(NetError::BadConfig(alloc::format!(
                "EMA smoothing constant must lie in [0, 1], got {mu}"
            )));
        }
        Ok(EmaShadow {
            params: model.clone(),
            mu,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn update(&mut self, model: &NoisePredictor) {
        let mu = self.mu;
        let live = model.param_arrays();
        let mut shadow = self.params.param_arrays_mut();
        for (slot, s) in shadow.iter_mut().enumerate() {
            let l = live[slot];
            for (sv, &lv) in s.iter_mut().zip(l) {
                *sv = (1.0 - mu) * lv + mu * *sv;
            }
        }
    }

    /// Model view backed by the shadow parameters; sampling paths use this,
    /// training paths use the live model.
    pub fn model(&self) -> &NoisePredictor {
        &self.params
    }

    /// Replaces the shadow parameters wholesale (checkpoint loading).
    pub fn set_model(&mut self, params: NoisePredictor) {
        self.params = params;
    }
}

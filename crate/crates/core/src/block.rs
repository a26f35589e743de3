//! A single regression block: sigmoid hidden layer(s), linear output, a
//! weighted-estimate offset `tau` picked each iteration from `{-nu, 0, +nu}`,
//! and gradients scaled by the reinforced learning coefficient `gamma`.
//!
//! Conventions: samples are rows. Every weight matrix carries its bias in
//! row 0, matching [`append_bias`], which prepends the ones column.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{append_bias, expand_features, MAX_DEGREE};
use crate::error::{Error, Result};

pub const NEURON_RANGE: (usize, usize) = (2, 100);
pub const DEPTH_RANGE: (usize, usize) = (1, 4);
pub const ITERATION_RANGE: (usize, usize) = (1000, 12000);

/// Hyperparameters of one block.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockMetaParams {
    /// Width of every hidden layer.
    pub neurons: usize,
    /// Number of hidden layers.
    pub depth: usize,
    /// Extra per-feature polynomial powers applied to the input.
    pub degree: usize,
    /// Learning rate.
    pub alpha: f64,
    /// Reinforced learning coefficient.
    pub gamma: f64,
    /// Regularisation factor.
    pub lambda: f64,
    pub iterations: usize,
}

impl Default for BlockMetaParams {
    fn default() -> Self {
        BlockMetaParams {
            neurons: 4,
            depth: 1,
            degree: 0,
            alpha: 0.2,
            gamma: 1.0,
            lambda: 0.0,
            iterations: 1000,
        }
    }
}

impl BlockMetaParams {
    pub fn validate(&self) -> Result<()> {
        let in_range = |v: usize, (lo, hi): (usize, usize)| (lo..=hi).contains(&v);
        if !in_range(self.neurons, NEURON_RANGE) {
            return Err(Error::InvalidMeta(format!("neurons {} not in [2, 100]", self.neurons)));
        }
        if !in_range(self.depth, DEPTH_RANGE) {
            return Err(Error::InvalidMeta(format!("depth {} not in [1, 4]", self.depth)));
        }
        if self.degree > MAX_DEGREE {
            return Err(Error::InvalidMeta(format!("degree {} not in [0, 6]", self.degree)));
        }
        if !in_range(self.iterations, ITERATION_RANGE) {
            return Err(Error::InvalidMeta(format!(
                "iterations {} not in [1000, 12000]",
                self.iterations
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidMeta(format!("alpha {} must be > 0", self.alpha)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidMeta(format!("gamma {} must be > 0", self.gamma)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidMeta(format!("lambda {} must be >= 0", self.lambda)));
        }
        Ok(())
    }
}

/// How `tau` is chosen each iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TauMode {
    /// Argmin of the regularised cost over `{0, -nu, +nu}`.
    #[default]
    Weighted,
    /// `tau` held at zero.
    Off,
}

/// Whether hidden-layer deltas are propagated through the freshly updated
/// downstream weights (`Sequential`) or the weights seen by the forward pass
/// (`Simultaneous`, textbook gradient descent).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UpdateOrder {
    #[default]
    Sequential,
    Simultaneous,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainOptions {
    pub tau: TauMode,
    pub order: UpdateOrder,
    /// Scale of the per-iteration log-normal jitter on gamma; 0 disables it.
    pub gamma_jitter: f64,
    /// Seed for the jitter stream.
    pub jitter_seed: u64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            tau: TauMode::Weighted,
            order: UpdateOrder::Sequential,
            gamma_jitter: 0.0,
            jitter_seed: 0,
        }
    }
}

impl TrainOptions {
    /// Plain network settings: no weighted estimate.
    pub fn plain() -> Self {
        TrainOptions {
            tau: TauMode::Off,
            ..Default::default()
        }
    }
}

/// Biased, polynomial-expanded input matrix fed to the first layer.
#[derive(Clone, Debug)]
pub struct Design(pub Array2<f64>);

impl Design {
    pub fn rows(&self) -> usize {
        self.0.nrows()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegressionBlock {
    /// `(d' + 1) x k`, where `d'` is the expanded input width.
    pub theta1: Array2<f64>,
    /// `(k + 1) x k` matrices between consecutive hidden layers.
    pub hidden_thetas: Vec<Array2<f64>>,
    /// `(k + 1) x 1`.
    pub theta2: Array2<f64>,
    pub tau: f64,
    /// Previous iteration's weighted estimates. Empty until training starts.
    pub prev_estimates: Array1<f64>,
    pub meta: BlockMetaParams,
    /// Raw input width before polynomial expansion.
    pub input_dim: usize,
}

/// Activations of one forward pass.
#[derive(Clone, Debug)]
pub struct ForwardPass {
    /// One `m x k` matrix per hidden layer, without the bias column.
    pub hidden: Vec<Array2<f64>>,
    pub raw: Array1<f64>,
}

/// `Delta` matrices for every weight matrix, gamma already applied.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    /// Same order as [`RegressionBlock::weights`]: theta1, hidden..., theta2.
    pub layers: Vec<Array2<f64>>,
}

impl Gradients {
    pub fn first(&self) -> &Array2<f64> {
        &self.layers[0]
    }

    pub fn output(&self) -> &Array2<f64> {
        self.layers.last().expect("at least two layers")
    }
}

/// One iteration's diagnostics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub iter: usize,
    /// Regularised cost at the selected tau, before the weight update.
    pub cost: f64,
    pub grad1_norm: f64,
    pub grad2_norm: f64,
    pub tau: f64,
    pub nu: f64,
    /// Cost of the `tau = 0` candidate at the same weights.
    #[serde(skip)]
    pub cost_at_zero_tau: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingTrace {
    pub records: Vec<StepRecord>,
}

impl TrainingTrace {
    pub const CSV_HEADER: &'static str = "iter,cost,grad1_norm,grad2_norm,tau,nu";

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last_cost(&self) -> Option<f64> {
        self.records.last().map(|r| r.cost)
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            writeln!(
                s,
                "{},{},{},{},{},{}",
                r.iter, r.cost, r.grad1_norm, r.grad2_norm, r.tau, r.nu
            )
            .unwrap();
        }
        s
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

/// Logistic function, clamped so the result stays strictly inside `(0, 1)`.
pub fn sigmoid(z: f64) -> f64 {
    (1.0 / (1.0 + (-z).exp())).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Adds `tau` to every raw estimate.
pub fn weighted_estimate(raw: &Array1<f64>, tau: f64) -> Array1<f64> {
    raw.mapv(|v| v + tau)
}

/// Mean signed error of the previous estimates.
pub fn compute_nu(prev_estimates: ArrayView1<f64>, y: ArrayView1<f64>) -> Result<f64> {
    if prev_estimates.len() != y.len() {
        return Err(Error::LengthMismatch(prev_estimates.len(), y.len()));
    }
    if y.is_empty() {
        return Err(Error::Empty);
    }
    let sum: f64 = prev_estimates.iter().zip(y.iter()).map(|(p, t)| p - t).sum();
    Ok(sum / y.len() as f64)
}

fn xavier(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> Array2<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let mut w = Array2::zeros((fan_in + 1, fan_out));
    for v in w.slice_mut(s![1.., ..]).iter_mut() {
        *v = rng.random_range(-limit..=limit);
    }
    w
}

fn sq_norm_nobias(w: &Array2<f64>) -> f64 {
    w.slice(s![1.., ..]).iter().map(|v| v * v).sum()
}

fn frobenius(w: &Array2<f64>) -> f64 {
    w.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn sigmoid_layer(input: &Array2<f64>, w: &Array2<f64>) -> Array2<f64> {
    append_bias(input).dot(w).mapv_into(sigmoid)
}

impl RegressionBlock {
    /// Fresh block with Xavier-uniform weights and zero bias rows.
    pub fn new(meta: BlockMetaParams, input_dim: usize, seed: u64) -> Result<Self> {
        meta.validate()?;
        if input_dim == 0 {
            return Err(Error::InvalidDataset("block needs at least one input".into()));
        }
        let k = meta.neurons;
        let expanded = input_dim * (meta.degree + 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta1 = xavier(&mut rng, expanded, k);
        let hidden_thetas = (1..meta.depth).map(|_| xavier(&mut rng, k, k)).collect();
        let theta2 = xavier(&mut rng, k, 1);
        Ok(RegressionBlock {
            theta1,
            hidden_thetas,
            theta2,
            tau: 0.0,
            prev_estimates: Array1::zeros(0),
            meta,
            input_dim,
        })
    }

    /// Block with every weight set to zero.
    pub fn zeros(meta: BlockMetaParams, input_dim: usize) -> Result<Self> {
        let mut b = Self::new(meta, input_dim, 0)?;
        for w in b.weights_mut() {
            w.fill(0.0);
        }
        Ok(b)
    }

    pub fn width(&self) -> usize {
        self.theta1.ncols()
    }

    pub fn depth(&self) -> usize {
        self.hidden_thetas.len() + 1
    }

    /// Weight matrices in forward order.
    pub fn weights(&self) -> impl Iterator<Item = &Array2<f64>> {
        std::iter::once(&self.theta1)
            .chain(self.hidden_thetas.iter())
            .chain(std::iter::once(&self.theta2))
    }

    pub fn weights_mut(&mut self) -> impl Iterator<Item = &mut Array2<f64>> {
        std::iter::once(&mut self.theta1)
            .chain(self.hidden_thetas.iter_mut())
            .chain(std::iter::once(&mut self.theta2))
    }

    fn weight_at(&self, layer: usize) -> &Array2<f64> {
        self.weights().nth(layer).expect("layer index")
    }

    fn weight_at_mut(&mut self, layer: usize) -> &mut Array2<f64> {
        self.weights_mut().nth(layer).expect("layer index")
    }

    pub fn is_finite(&self) -> bool {
        self.weights().all(|w| w.iter().all(|v| v.is_finite())) && self.tau.is_finite()
    }

    /// Expands and biases a raw input matrix for this block.
    pub fn design(&self, x: &Array2<f64>) -> Result<Design> {
        if x.ncols() != self.input_dim {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim,
                got: x.ncols(),
            });
        }
        let names: Vec<String> = (0..x.ncols()).map(|j| j.to_string()).collect();
        let (expanded, _) = expand_features(x, &names, self.meta.degree)?;
        let design = append_bias(&expanded);
        if design.ncols() != self.theta1.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.theta1.nrows(),
                got: design.ncols(),
            });
        }
        Ok(Design(design))
    }

    /// Last hidden layer activations and the raw (tau-free) output.
    pub fn forward(&self, x: &Array2<f64>) -> Result<(Array2<f64>, Array1<f64>)> {
        let pass = self.forward_design(&self.design(x)?);
        let h = pass.hidden.into_iter().last().expect("depth >= 1");
        Ok((h, pass.raw))
    }

    pub fn forward_design(&self, design: &Design) -> ForwardPass {
        let mut hidden = Vec::with_capacity(self.depth());
        hidden.push(design.0.dot(&self.theta1).mapv_into(sigmoid));
        for w in &self.hidden_thetas {
            let next = sigmoid_layer(hidden.last().unwrap(), w);
            hidden.push(next);
        }
        let raw = append_bias(hidden.last().unwrap())
            .dot(&self.theta2)
            .column(0)
            .to_owned();
        ForwardPass { hidden, raw }
    }

    /// Weighted estimates `raw + tau` for a raw input matrix.
    pub fn predict(&self, x: &Array2<f64>) -> Result<Array1<f64>> {
        let (_, raw) = self.forward(x)?;
        Ok(weighted_estimate(&raw, self.tau))
    }

    /// Sum of squared non-bias weights across every layer.
    pub fn weight_penalty(&self) -> f64 {
        self.weights().map(sq_norm_nobias).sum()
    }

    pub(crate) fn cost_from_raw(&self, raw: &Array1<f64>, y: ArrayView1<f64>, tau: f64, penalty: f64) -> f64 {
        let m = y.len() as f64;
        let sse: f64 = raw
            .iter()
            .zip(y.iter())
            .map(|(r, t)| {
                let e = t - (r + tau);
                e * e
            })
            .sum();
        (sse + self.meta.lambda * penalty) / (2.0 * m)
    }

    /// Regularised cost at the block's current `tau`.
    pub fn cost(&self, x: &Array2<f64>, y: ArrayView1<f64>) -> Result<f64> {
        let design = self.design(x)?;
        self.cost_design(&design, y)
    }

    pub fn cost_design(&self, design: &Design, y: ArrayView1<f64>) -> Result<f64> {
        self.check_rows(design, y)?;
        let pass = self.forward_design(design);
        Ok(self.cost_from_raw(&pass.raw, y, self.tau, self.weight_penalty()))
    }

    /// Argmin over `{0, -nu, +nu}` of the regularised cost, earlier candidates
    /// winning ties.
    pub fn select_tau(&self, x: &Array2<f64>, y: ArrayView1<f64>, nu: f64) -> Result<f64> {
        let design = self.design(x)?;
        self.check_rows(&design, y)?;
        let pass = self.forward_design(&design);
        Ok(self.pick_tau(&pass.raw, y, nu).0)
    }

    /// Returns `(tau, cost at tau, cost at tau = 0)`.
    fn pick_tau(&self, raw: &Array1<f64>, y: ArrayView1<f64>, nu: f64) -> (f64, f64, f64) {
        let penalty = self.weight_penalty();
        let zero_cost = self.cost_from_raw(raw, y, 0.0, penalty);
        let mut best = (0.0, zero_cost);
        for cand in [-nu, nu] {
            let c = self.cost_from_raw(raw, y, cand, penalty);
            if c < best.1 {
                best = (cand, c);
            }
        }
        (best.0, best.1, zero_cost)
    }

    pub(crate) fn check_rows(&self, design: &Design, y: ArrayView1<f64>) -> Result<()> {
        if design.rows() != y.len() {
            return Err(Error::LengthMismatch(design.rows(), y.len()));
        }
        if y.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(())
    }

    /// Gamma-scaled `Delta` matrices at the current weights for a given tau.
    ///
    /// With `gamma = 1` these are `-m` times the gradient of the data term of
    /// the cost.
    pub fn gradients(&self, x: &Array2<f64>, y: ArrayView1<f64>, tau: f64, gamma: f64) -> Result<Gradients> {
        let design = self.design(x)?;
        self.check_rows(&design, y)?;
        let pass = self.forward_design(&design);
        Ok(self.gradients_from_pass(&design, &pass, y, tau, gamma))
    }

    /// [`gradients`](Self::gradients) for an already computed forward pass.
    pub fn gradients_from_pass(
        &self,
        design: &Design,
        pass: &ForwardPass,
        y: ArrayView1<f64>,
        tau: f64,
        gamma: f64,
    ) -> Gradients {
        let delta_y = Array1::from_iter(y.iter().zip(pass.raw.iter()).map(|(t, r)| t - (r + tau)));
        let mut layers = vec![Array2::zeros((0, 0)); self.depth() + 1];
        let mut delta = delta_y.insert_axis(Axis(1));
        for layer in (0..=self.depth()).rev() {
            let input = if layer == 0 {
                design.0.clone()
            } else {
                append_bias(&pass.hidden[layer - 1])
            };
            layers[layer] = input.t().dot(&delta) * gamma;
            if layer > 0 {
                delta = backpropagate(&delta, self.weight_at(layer), &pass.hidden[layer - 1]);
            }
        }
        Gradients { layers }
    }

    /// One full-batch iteration: forward, nu, tau, then gamma-scaled updates
    /// from the output layer down.
    pub fn backprop_step(
        &mut self,
        design: &Design,
        y: ArrayView1<f64>,
        iter: usize,
        opts: &TrainOptions,
        gamma: f64,
    ) -> Result<StepRecord> {
        self.check_rows(design, y)?;
        let m = y.len();
        if self.prev_estimates.len() != m {
            self.prev_estimates = Array1::zeros(m);
        }
        let pass = self.forward_design(design);
        let nu = compute_nu(self.prev_estimates.view(), y)?;
        let (tau, cost, cost_at_zero_tau) = match opts.tau {
            TauMode::Weighted => self.pick_tau(&pass.raw, y, nu),
            TauMode::Off => {
                let c = self.cost_from_raw(&pass.raw, y, 0.0, self.weight_penalty());
                (0.0, c, c)
            }
        };
        self.tau = tau;
        let estimates = weighted_estimate(&pass.raw, tau);
        let mut delta = Array1::from_iter(y.iter().zip(estimates.iter()).map(|(t, e)| t - e))
            .insert_axis(Axis(1));

        let alpha = self.meta.alpha;
        let lambda = self.meta.lambda;
        let inv_m = 1.0 / m as f64;
        let mut norms = vec![0.0; self.depth() + 1];
        for layer in (0..=self.depth()).rev() {
            let input = if layer == 0 {
                design.0.clone()
            } else {
                append_bias(&pass.hidden[layer - 1])
            };
            let grad = input.t().dot(&delta) * gamma;
            norms[layer] = frobenius(&grad);
            let before = match opts.order {
                UpdateOrder::Simultaneous if layer > 0 => Some(self.weight_at(layer).clone()),
                _ => None,
            };
            {
                let w = self.weight_at_mut(layer);
                let mut reg = w.clone();
                reg.row_mut(0).fill(0.0);
                w.zip_mut_with(&grad, |wv, g| *wv += inv_m * alpha * g);
                w.zip_mut_with(&reg, |wv, r| *wv -= inv_m * lambda * r);
            }
            if layer > 0 {
                let through = before.as_ref().unwrap_or_else(|| self.weight_at(layer));
                delta = backpropagate(&delta, through, &pass.hidden[layer - 1]);
            }
        }
        self.prev_estimates = estimates;

        if !self.is_finite() || !cost.is_finite() {
            return Err(Error::Diverged {
                iteration: iter,
                partial: Box::new(None),
            });
        }
        Ok(StepRecord {
            iter,
            cost,
            grad1_norm: norms[0],
            grad2_norm: norms[self.depth()],
            tau,
            nu,
            cost_at_zero_tau,
        })
    }

    /// Runs `iterations` steps, appending to `trace`. `first_iter` numbers the
    /// first record.
    pub fn run_iterations(
        &mut self,
        design: &Design,
        y: ArrayView1<f64>,
        iterations: usize,
        first_iter: usize,
        opts: &TrainOptions,
        trace: &mut TrainingTrace,
    ) -> Result<()> {
        let mut jitter = ChaCha8Rng::seed_from_u64(opts.jitter_seed ^ first_iter as u64);
        for t in first_iter..first_iter + iterations {
            let gamma = if opts.gamma_jitter > 0.0 {
                let z: f64 = jitter.sample(StandardNormal);
                self.meta.gamma * (opts.gamma_jitter * z).exp()
            } else {
                self.meta.gamma
            };
            match self.backprop_step(design, y, t, opts, gamma) {
                Ok(rec) => trace.records.push(rec),
                Err(Error::Diverged { iteration, .. }) => {
                    return Err(Error::Diverged {
                        iteration,
                        partial: Box::new(Some(trace.clone())),
                    })
                }
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }

    /// Full training run of `meta.iterations` steps from the current state.
    pub fn train(
        &mut self,
        x: &Array2<f64>,
        y: ArrayView1<f64>,
        opts: &TrainOptions,
    ) -> Result<TrainingTrace> {
        self.meta.validate()?;
        let design = self.design(x)?;
        self.check_rows(&design, y)?;
        self.prev_estimates = Array1::zeros(y.len());
        let mut trace = TrainingTrace::default();
        self.run_iterations(&design, y, self.meta.iterations, 1, opts, &mut trace)?;
        Ok(trace)
    }
}

/// `delta` for the layer below: `(delta * W_nobias^T) ⊙ H(1 - H)`.
fn backpropagate(delta: &Array2<f64>, w: &Array2<f64>, h: &Array2<f64>) -> Array2<f64> {
    let mut below = delta.dot(&w.slice(s![1.., ..]).t());
    below.zip_mut_with(h, |d, &a| *d *= a * (1.0 - a));
    below
}

//! The aggregate estimator: one independent block per target, an optional
//! input scaler, runtime hidden-width adjustment and JSON persistence.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, LinearFit, OptimizerHyper, OptimizerKind};
use crate::block::{
    BlockMetaParams, RegressionBlock, TrainOptions, TrainingTrace, NEURON_RANGE,
};
use crate::dataset::{split_indices, standardize, Dataset, ScalerParams};
use crate::error::{Error, Result};

pub const MODEL_VERSION: &str = "weldnet-model/1";

/// Iterations between two width adjustments.
pub const RESIZE_EVERY: usize = 250;
/// Probe-training budget per candidate width.
pub const PROBE_ITERATIONS: usize = 50;
/// Minimum relative validation-cost improvement for adopting a new width.
pub const RESIZE_MARGIN: f64 = 1e-4;

/// How a block's weights are fitted.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BlockTrainer {
    /// Reinforced gradients and weighted estimates.
    Reinforced(TrainOptions),
    /// gamma = 1, tau = 0.
    Plain,
    /// Block gradients with another update rule.
    Optimizer(OptimizerKind, OptimizerHyper),
}

impl Default for BlockTrainer {
    fn default() -> Self {
        BlockTrainer::Reinforced(TrainOptions::default())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitConfig {
    pub trainer: BlockTrainer,
    pub standardize: bool,
    /// Adjust hidden width during training (reinforced trainer only).
    pub dynamic_width: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            trainer: BlockTrainer::default(),
            standardize: true,
            dynamic_width: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AggregateModel {
    pub blocks: Vec<RegressionBlock>,
    pub scaler: Option<ScalerParams>,
    pub target_names: Vec<String>,
}

/// Stable 64-bit seed for a block, independent of block order.
pub fn block_seed(master: u64, target_name: &str) -> u64 {
    // FNV-1a over the name, mixed with the master seed through splitmix64
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in target_name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = master ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn scale_inputs(train: &Dataset, standardize_inputs: bool) -> Result<(Array2<f64>, Option<ScalerParams>)> {
    if standardize_inputs {
        let (scaled, scaler) = standardize(train)?;
        Ok((scaled.features, Some(scaler)))
    } else {
        Ok((train.features.clone(), None))
    }
}

/// Fits one block on already-scaled inputs.
pub fn fit_block(
    meta: &BlockMetaParams,
    x: &Array2<f64>,
    y: ArrayView1<f64>,
    seed: u64,
    cfg: &FitConfig,
) -> Result<(RegressionBlock, TrainingTrace)> {
    match cfg.trainer {
        BlockTrainer::Reinforced(opts) => {
            let mut block = RegressionBlock::new(*meta, x.ncols(), seed)?;
            let trace = if cfg.dynamic_width {
                train_dynamic(&mut block, x, y, &opts, seed)?
            } else {
                block.train(x, y, &opts)?
            };
            Ok((block, trace))
        }
        BlockTrainer::Plain => baselines::plain_ann_train(meta, x, y, seed),
        BlockTrainer::Optimizer(kind, hyper) => {
            baselines::optimizer_train(kind, &hyper, meta, x, y, seed)
        }
    }
}

/// Trains with a width adjustment every [`RESIZE_EVERY`] iterations,
/// validating on a held-out fifth of the rows (all rows when fewer than 10).
fn train_dynamic(
    block: &mut RegressionBlock,
    x: &Array2<f64>,
    y: ArrayView1<f64>,
    opts: &TrainOptions,
    seed: u64,
) -> Result<TrainingTrace> {
    block.meta.validate()?;
    let (fit_x, fit_y, val_x, val_y) = if y.len() >= 10 {
        let (tr, va) = split_indices(y.len(), 0.2, seed)?;
        (
            x.select(Axis(0), &tr),
            y.select(Axis(0), &tr),
            x.select(Axis(0), &va),
            y.select(Axis(0), &va),
        )
    } else {
        (x.clone(), y.to_owned(), x.clone(), y.to_owned())
    };
    block.prev_estimates = Array1::zeros(fit_y.len());
    let mut trace = TrainingTrace::default();
    let total = block.meta.iterations;
    let mut done = 0;
    let mut round = 0u64;
    while done < total {
        let chunk = RESIZE_EVERY.min(total - done);
        let design = block.design(&fit_x)?;
        block.run_iterations(&design, fit_y.view(), chunk, done + 1, opts, &mut trace)?;
        done += chunk;
        if done < total {
            round += 1;
            *block = resize_hidden(
                block,
                (&fit_x, fit_y.view()),
                (&val_x, val_y.view()),
                opts,
                seed.wrapping_add(round),
            )?;
        }
    }
    Ok(trace)
}

/// Candidate widths `{k-1, k, k+1}` clipped to the neuron range.
pub fn candidate_widths(k: usize) -> Vec<usize> {
    let (lo, hi) = NEURON_RANGE;
    [k.wrapping_sub(1), k, k + 1]
        .into_iter()
        .filter(|w| (lo..=hi).contains(w))
        .collect()
}

fn col_norms(w: &Array2<f64>) -> Vec<f64> {
    w.axis_iter(Axis(1))
        .map(|c| c.iter().map(|v| v * v).sum::<f64>())
        .collect()
}

fn remove_col(w: &Array2<f64>, j: usize) -> Array2<f64> {
    let keep: Vec<usize> = (0..w.ncols()).filter(|&c| c != j).collect();
    w.select(Axis(1), &keep)
}

fn remove_row(w: &Array2<f64>, i: usize) -> Array2<f64> {
    let keep: Vec<usize> = (0..w.nrows()).filter(|&r| r != i).collect();
    w.select(Axis(0), &keep)
}

/// Adds one neuron to every hidden layer. Incoming weights are small random
/// values; outgoing weights start at zero so the block's output is unchanged.
pub fn grow_block(block: &RegressionBlock, rng: &mut ChaCha8Rng) -> RegressionBlock {
    let mut out = block.clone();
    let depth = out.depth();
    for layer in 0..depth {
        {
            let w = out.weights_mut().nth(layer).unwrap();
            let col = Array2::from_shape_fn((w.nrows(), 1), |_| rng.random_range(-0.1..0.1));
            *w = ndarray::concatenate![Axis(1), w.view(), col.view()];
        }
        let next = out.weights_mut().nth(layer + 1).unwrap();
        let zero = Array2::zeros((1, next.ncols()));
        *next = ndarray::concatenate![Axis(0), next.view(), zero.view()];
    }
    out.meta.neurons += 1;
    out
}

/// Removes, in every hidden layer, the neuron whose incoming weight column has
/// the smallest norm.
pub fn shrink_block(block: &RegressionBlock) -> RegressionBlock {
    let mut out = block.clone();
    let depth = out.depth();
    for layer in 0..depth {
        let j = {
            let w = out.weights().nth(layer).unwrap();
            let norms = col_norms(w);
            (0..norms.len())
                .min_by(|&a, &b| norms[a].total_cmp(&norms[b]))
                .unwrap()
        };
        {
            let w = out.weights_mut().nth(layer).unwrap();
            *w = remove_col(w, j);
        }
        let next = out.weights_mut().nth(layer + 1).unwrap();
        *next = remove_row(next, j + 1);
    }
    out.meta.neurons -= 1;
    out
}

/// Probes widths `k-1`, `k` and `k+1` for [`PROBE_ITERATIONS`] each from the
/// current weights and returns the probe for a new width when its validation
/// cost beats both the width-`k` probe (by [`RESIZE_MARGIN`] relative) and the
/// unmodified block. Otherwise returns the block unchanged.
pub fn resize_hidden(
    block: &RegressionBlock,
    train: (&Array2<f64>, ArrayView1<f64>),
    val: (&Array2<f64>, ArrayView1<f64>),
    opts: &TrainOptions,
    seed: u64,
) -> Result<RegressionBlock> {
    let k = block.width();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let train_design = block.design(train.0)?;
    let val_design = block.design(val.0)?;
    let baseline = block.cost_design(&val_design, val.1)?;

    let probe = |candidate: RegressionBlock| -> Option<(RegressionBlock, f64)> {
        let mut c = candidate;
        let mut scratch = TrainingTrace::default();
        c.run_iterations(&train_design, train.1, PROBE_ITERATIONS, 0, opts, &mut scratch)
            .ok()?;
        let cost = c.cost_design(&val_design, val.1).ok()?;
        cost.is_finite().then_some((c, cost))
    };

    let mut same_cost = f64::INFINITY;
    let mut best: Option<(RegressionBlock, f64)> = None;
    for w in candidate_widths(k) {
        let candidate = match w.cmp(&k) {
            std::cmp::Ordering::Less => shrink_block(block),
            std::cmp::Ordering::Equal => block.clone(),
            std::cmp::Ordering::Greater => grow_block(block, &mut rng),
        };
        let Some((probed, cost)) = probe(candidate) else {
            continue;
        };
        if w == k {
            same_cost = cost;
        } else if best.as_ref().is_none_or(|(_, c)| cost < *c) {
            best = Some((probed, cost));
        }
    }
    match best {
        Some((b, cost)) if cost < same_cost * (1.0 - RESIZE_MARGIN) && cost < baseline => Ok(b),
        _ => Ok(block.clone()),
    }
}

impl AggregateModel {
    pub fn n_targets(&self) -> usize {
        self.blocks.len()
    }

    pub fn input_dim(&self) -> usize {
        self.blocks.first().map_or(0, |b| b.input_dim)
    }

    /// Column `k` holds block `k`'s weighted estimates.
    pub fn predict(&self, x_raw: &Array2<f64>) -> Result<Array2<f64>> {
        if x_raw.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x_raw.ncols(),
            });
        }
        let x = match &self.scaler {
            Some(s) => s.apply(x_raw)?,
            None => x_raw.clone(),
        };
        let mut out = Array2::zeros((x.nrows(), self.blocks.len()));
        for (k, block) in self.blocks.iter().enumerate() {
            out.column_mut(k).assign(&block.predict(&x)?);
        }
        Ok(out)
    }
}

/// Trains block `k` on target column `k` with `metas[k]`, all blocks in parallel.
pub fn train_all(
    metas: &[BlockMetaParams],
    train: &Dataset,
    seed: u64,
    cfg: &FitConfig,
) -> Result<(AggregateModel, Vec<TrainingTrace>)> {
    if metas.len() != train.n_targets() {
        return Err(Error::ConfigError(format!(
            "{} meta-parameter sets for {} targets",
            metas.len(),
            train.n_targets()
        )));
    }
    let (x, scaler) = scale_inputs(train, cfg.standardize)?;
    let results: Vec<Result<(RegressionBlock, TrainingTrace)>> = metas
        .par_iter()
        .enumerate()
        .map(|(k, meta)| {
            let name = &train.target_names[k];
            let y = train.targets.column(k);
            fit_block(meta, &x, y, block_seed(seed, name), cfg).map_err(|e| match e {
                Error::Diverged { iteration, .. } => Error::BlockDiverged {
                    block: name.clone(),
                    iteration,
                },
                other => other,
            })
        })
        .collect();
    let mut blocks = Vec::with_capacity(metas.len());
    let mut traces = Vec::with_capacity(metas.len());
    for r in results {
        let (b, t) = r?;
        blocks.push(b);
        traces.push(t);
    }
    Ok((
        AggregateModel {
            blocks,
            scaler,
            target_names: train.target_names.clone(),
        },
        traces,
    ))
}

/// Closed-form or gradient-descent linear baseline with its input scaler.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    /// `"ner"` or `"mcr"`.
    pub method: String,
    pub fit: LinearFit,
    pub scaler: Option<ScalerParams>,
    pub target_names: Vec<String>,
}

impl LinearModel {
    pub fn predict(&self, x_raw: &Array2<f64>) -> Result<Array2<f64>> {
        let x = match &self.scaler {
            Some(s) => s.apply(x_raw)?,
            None => x_raw.clone(),
        };
        self.fit.predict(&x)
    }
}

/// Anything the CLI can write to and read from a model file.
#[derive(Clone, Debug, PartialEq)]
pub enum SavedModel {
    Network(AggregateModel),
    Linear(LinearModel),
}

impl SavedModel {
    pub fn predict(&self, x_raw: &Array2<f64>) -> Result<Array2<f64>> {
        match self {
            SavedModel::Network(m) => m.predict(x_raw),
            SavedModel::Linear(m) => m.predict(x_raw),
        }
    }

    pub fn target_names(&self) -> &[String] {
        match self {
            SavedModel::Network(m) => &m.target_names,
            SavedModel::Linear(m) => &m.target_names,
        }
    }
}

impl From<AggregateModel> for SavedModel {
    fn from(m: AggregateModel) -> Self {
        SavedModel::Network(m)
    }
}

impl From<LinearModel> for SavedModel {
    fn from(m: LinearModel) -> Self {
        SavedModel::Linear(m)
    }
}

// ---- file format -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl MatrixDoc {
    fn from_array(a: &Array2<f64>) -> Self {
        MatrixDoc {
            rows: a.nrows(),
            cols: a.ncols(),
            data: a.iter().copied().collect(),
        }
    }

    fn into_array(self) -> Result<Array2<f64>> {
        Array2::from_shape_vec((self.rows, self.cols), self.data)
            .map_err(|e| Error::FormatError(format!("bad matrix: {e}")))
    }
}

#[derive(Serialize, Deserialize)]
struct BlockDoc {
    meta: BlockMetaParams,
    input_dim: usize,
    theta1: MatrixDoc,
    theta2: MatrixDoc,
    hidden: Vec<MatrixDoc>,
    tau: f64,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    version: String,
    kind: String,
    targets: Vec<String>,
    scaler: Option<ScalerParams>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    blocks: Vec<BlockDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<MatrixDoc>,
}

fn to_doc(model: &SavedModel) -> ModelDoc {
    match model {
        SavedModel::Network(m) => ModelDoc {
            version: MODEL_VERSION.into(),
            kind: "network".into(),
            targets: m.target_names.clone(),
            scaler: m.scaler.clone(),
            blocks: m
                .blocks
                .iter()
                .map(|b| BlockDoc {
                    meta: b.meta,
                    input_dim: b.input_dim,
                    theta1: MatrixDoc::from_array(&b.theta1),
                    theta2: MatrixDoc::from_array(&b.theta2),
                    hidden: b.hidden_thetas.iter().map(MatrixDoc::from_array).collect(),
                    tau: b.tau,
                })
                .collect(),
            degree: None,
            theta: None,
        },
        SavedModel::Linear(m) => ModelDoc {
            version: MODEL_VERSION.into(),
            kind: m.method.clone(),
            targets: m.target_names.clone(),
            scaler: m.scaler.clone(),
            blocks: Vec::new(),
            degree: Some(m.fit.degree),
            theta: Some(MatrixDoc::from_array(&m.fit.theta)),
        },
    }
}

fn from_doc(doc: ModelDoc) -> Result<SavedModel> {
    match doc.kind.as_str() {
        "network" => {
            let blocks = doc
                .blocks
                .into_iter()
                .map(|b| {
                    let block = RegressionBlock {
                        theta1: b.theta1.into_array()?,
                        hidden_thetas: b
                            .hidden
                            .into_iter()
                            .map(MatrixDoc::into_array)
                            .collect::<Result<_>>()?,
                        theta2: b.theta2.into_array()?,
                        tau: b.tau,
                        prev_estimates: Array1::zeros(0),
                        meta: b.meta,
                        input_dim: b.input_dim,
                    };
                    check_block_shapes(&block)?;
                    Ok(block)
                })
                .collect::<Result<Vec<_>>>()?;
            if blocks.len() != doc.targets.len() {
                return Err(Error::FormatError("block count differs from target count".into()));
            }
            Ok(SavedModel::Network(AggregateModel {
                blocks,
                scaler: doc.scaler,
                target_names: doc.targets,
            }))
        }
        "ner" | "mcr" => {
            let theta = doc
                .theta
                .ok_or_else(|| Error::FormatError("linear model without theta".into()))?
                .into_array()?;
            Ok(SavedModel::Linear(LinearModel {
                method: doc.kind,
                fit: LinearFit {
                    degree: doc.degree.unwrap_or(0),
                    theta,
                },
                scaler: doc.scaler,
                target_names: doc.targets,
            }))
        }
        other => Err(Error::FormatError(format!("unknown model kind `{other}`"))),
    }
}

fn check_block_shapes(b: &RegressionBlock) -> Result<()> {
    let k = b.theta1.ncols();
    let ok = b.theta1.nrows() == b.input_dim * (b.meta.degree + 1) + 1
        && b.theta2.dim() == (k + 1, 1)
        && b.hidden_thetas.iter().all(|h| h.dim() == (k + 1, k))
        && b.hidden_thetas.len() + 1 == b.meta.depth
        && b.meta.neurons == k;
    if ok {
        Ok(())
    } else {
        Err(Error::FormatError("inconsistent block weight shapes".into()))
    }
}

pub fn to_json(model: &SavedModel) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&to_doc(model))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<SavedModel> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let version = value
        .get("version")
        .and_then(|v| v.as_str())
        .unwrap_or("<missing>");
    if version != MODEL_VERSION {
        return Err(Error::FormatError(format!("unsupported version `{version}`")));
    }
    from_doc(serde_json::from_value(value)?)
}

pub fn save(model: &SavedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}

//! Comparison methods: the plain network (no gamma, no tau), the same network
//! driven by adagrad / rmsprop / Nesterov momentum, closed-form normal-equation
//! regression and polynomial least squares fitted by gradient descent.

use nalgebra::DMatrix;
use ndarray::{s, Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::block::{
    compute_nu, BlockMetaParams, RegressionBlock, StepRecord, TrainOptions, TrainingTrace,
};
use crate::dataset::{append_bias, expand_features, Dataset};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Plain,
    Adagrad,
    Rmsprop,
    Nesterov,
}

impl OptimizerKind {
    pub fn name(self) -> &'static str {
        match self {
            OptimizerKind::Plain => "plain",
            OptimizerKind::Adagrad => "adagrad",
            OptimizerKind::Rmsprop => "rmsprop",
            OptimizerKind::Nesterov => "nesterov",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerHyper {
    /// Learning rate.
    pub eta: f64,
    /// Moving-average decay for rmsprop.
    pub rho: f64,
    /// Momentum coefficient for Nesterov.
    pub momentum: f64,
    pub eps: f64,
}

impl Default for OptimizerHyper {
    fn default() -> Self {
        OptimizerHyper {
            eta: 0.01,
            rho: 0.9,
            momentum: 0.9,
            eps: 1e-8,
        }
    }
}

impl OptimizerHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidMeta(format!("eta {} must be > 0", self.eta)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidMeta(format!("rho {} outside (0, 1)", self.rho)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidMeta(format!("momentum {} outside [0, 1)", self.momentum)));
        }
        if !(self.eps > 0.0) {
            return Err(Error::InvalidMeta(format!("eps {} must be > 0", self.eps)));
        }
        Ok(())
    }
}

/// Update rule plus its auxiliary matrix for one weight matrix.
///
/// `accumulator` holds the squared-gradient sum (adagrad), the squared-gradient
/// moving average (rmsprop) or the velocity (Nesterov); it stays zero for plain.
#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub kind: OptimizerKind,
    pub hyper: OptimizerHyper,
    pub accumulator: Array2<f64>,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, hyper: OptimizerHyper, shape: (usize, usize)) -> Self {
        OptimizerState {
            kind,
            hyper,
            accumulator: Array2::zeros(shape),
        }
    }

    /// Applies one update of `weights` along `gradient` (the gradient of the
    /// cost, so the step goes against it).
    pub fn step(&mut self, weights: &mut Array2<f64>, gradient: &Array2<f64>) -> Result<()> {
        if weights.dim() != gradient.dim() {
            return Err(Error::ShapeMismatch(weights.dim(), gradient.dim()));
        }
        if weights.dim() != self.accumulator.dim() {
            return Err(Error::ShapeMismatch(weights.dim(), self.accumulator.dim()));
        }
        let OptimizerHyper {
            eta,
            rho,
            momentum,
            eps,
        } = self.hyper;
        let acc = &mut self.accumulator;
        match self.kind {
            OptimizerKind::Plain => {
                weights.zip_mut_with(gradient, |w, g| *w -= eta * g);
            }
            OptimizerKind::Adagrad => {
                acc.zip_mut_with(gradient, |a, g| *a += g * g);
                ndarray::Zip::from(weights)
                    .and(gradient)
                    .and(&*acc)
                    .for_each(|w, g, a| *w -= eta * g / (a.sqrt() + eps));
            }
            OptimizerKind::Rmsprop => {
                acc.zip_mut_with(gradient, |a, g| *a = rho * *a + (1.0 - rho) * g * g);
                ndarray::Zip::from(weights)
                    .and(gradient)
                    .and(&*acc)
                    .for_each(|w, g, a| *w -= eta * g / (a.sqrt() + eps));
            }
            OptimizerKind::Nesterov => {
                // Look-ahead written in terms of the gradient at the current point:
                // v' = mu v - eta g ; w += -mu v + (1 + mu) v'
                ndarray::Zip::from(weights)
                    .and(gradient)
                    .and(acc)
                    .for_each(|w, g, v| {
                        let old = *v;
                        *v = momentum * old - eta * g;
                        *w += -momentum * old + (1.0 + momentum) * *v;
                    });
            }
        }
        Ok(())
    }
}

/// Free-function form of [`OptimizerState::step`].
pub fn optimizer_step(
    mut state: OptimizerState,
    mut weights: Array2<f64>,
    gradient: &Array2<f64>,
) -> Result<(OptimizerState, Array2<f64>)> {
    state.step(&mut weights, gradient)?;
    Ok((state, weights))
}

/// The regression block without reinforcement: gamma forced to 1 and tau to 0.
pub fn plain_ann_train(
    meta: &BlockMetaParams,
    x: &Array2<f64>,
    y: ArrayView1<f64>,
    seed: u64,
) -> Result<(RegressionBlock, TrainingTrace)> {
    let meta = BlockMetaParams { gamma: 1.0, ..*meta };
    let mut block = RegressionBlock::new(meta, x.ncols(), seed)?;
    let trace = block.train(x, y, &TrainOptions::plain())?;
    Ok((block, trace))
}

/// Trains the block architecture with an alternative update rule.
///
/// Gradients are the block's own (gamma = 1, tau = 0); the learning rate is
/// `meta.alpha` so that it can be grid-searched like the block's.
pub fn optimizer_train(
    kind: OptimizerKind,
    hyper: &OptimizerHyper,
    meta: &BlockMetaParams,
    x: &Array2<f64>,
    y: ArrayView1<f64>,
    seed: u64,
) -> Result<(RegressionBlock, TrainingTrace)> {
    let hyper = OptimizerHyper {
        eta: meta.alpha,
        ..*hyper
    };
    hyper.validate()?;
    let meta = BlockMetaParams { gamma: 1.0, ..*meta };
    let mut block = RegressionBlock::new(meta, x.ncols(), seed)?;
    let design = block.design(x)?;
    block.check_rows(&design, y)?;
    let m = y.len() as f64;
    let mut states: Vec<OptimizerState> = block
        .weights()
        .map(|w| OptimizerState::new(kind, hyper, w.dim()))
        .collect();
    block.prev_estimates = Array1::zeros(y.len());
    let mut trace = TrainingTrace::default();
    for t in 1..=meta.iterations {
        let pass = block.forward_design(&design);
        let nu = compute_nu(block.prev_estimates.view(), y)?;
        let cost = block.cost_from_raw(&pass.raw, y, 0.0, block.weight_penalty());
        let deltas = block.gradients_from_pass(&design, &pass, y, 0.0, 1.0);
        let lambda = meta.lambda;
        for ((w, state), delta) in block.weights_mut().zip(states.iter_mut()).zip(&deltas.layers) {
            let mut grad = delta.mapv(|d| -d / m);
            grad.slice_mut(s![1.., ..])
                .zip_mut_with(&w.slice(s![1.., ..]), |g, wv| *g += lambda * wv / m);
            state.step(w, &grad)?;
        }
        block.prev_estimates = pass.raw;
        if !block.is_finite() || !cost.is_finite() {
            return Err(Error::Diverged {
                iteration: t,
                partial: Box::new(Some(trace)),
            });
        }
        trace.records.push(StepRecord {
            iter: t,
            cost,
            grad1_norm: frob(deltas.first()),
            grad2_norm: frob(deltas.output()),
            tau: 0.0,
            nu,
            cost_at_zero_tau: cost,
        });
    }
    Ok((block, trace))
}

fn frob(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Linear model on polynomial-expanded, biased inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFit {
    pub degree: usize,
    /// `(d' + 1) x N`; row 0 is the bias.
    pub theta: Array2<f64>,
}

impl LinearFit {
    pub fn design(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        let names: Vec<String> = (0..x.ncols()).map(|j| j.to_string()).collect();
        let (expanded, _) = expand_features(x, &names, self.degree)?;
        let a = append_bias(&expanded);
        if a.ncols() != self.theta.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.theta.nrows() - 1,
                got: expanded.ncols(),
            });
        }
        Ok(a)
    }

    pub fn predict(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        Ok(self.design(x)?.dot(&self.theta))
    }
}

fn linear_design(x: &Array2<f64>, degree: usize) -> Result<Array2<f64>> {
    let names: Vec<String> = (0..x.ncols()).map(|j| j.to_string()).collect();
    let (expanded, _) = expand_features(x, &names, degree)?;
    Ok(append_bias(&expanded))
}

fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

/// Relative singular-value cutoff for the pseudoinverse.
pub const PINV_RCOND: f64 = 1e-12;

/// Least squares `theta = pinv(A) Y` through an SVD, with `A` the expanded and
/// biased feature matrix.
pub fn normal_equation_fit(train: &Dataset, degree: usize) -> Result<LinearFit> {
    if train.rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let a = linear_design(&train.features, degree)?;
    let svd = to_na(&a).svd(true, true);
    let max_sv = svd.singular_values.max();
    let cutoff = PINV_RCOND * max_sv;
    let solved = svd
        .solve(&to_na(&train.targets), cutoff)
        .map_err(|e| Error::InvalidDataset(format!("pseudoinverse failed: {e}")))?;
    let theta = Array2::from_shape_fn((solved.nrows(), solved.ncols()), |(i, j)| solved[(i, j)]);
    Ok(LinearFit { degree, theta })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McrParams {
    pub alpha: f64,
    pub lambda: f64,
    pub degree: usize,
    pub iterations: usize,
}

impl Default for McrParams {
    fn default() -> Self {
        McrParams {
            alpha: 0.1,
            lambda: 0.0,
            degree: 1,
            iterations: 5000,
        }
    }
}

/// Multiple curvilinear regression: polynomial features fitted by full-batch
/// gradient descent on ridge-penalised squared error (bias unpenalised).
pub fn mcr_fit(params: &McrParams, train: &Dataset, seed: u64) -> Result<LinearFit> {
    if params.iterations == 0 {
        return Err(Error::InvalidMeta("MCR needs at least one iteration".into()));
    }
    if !(params.alpha > 0.0 && params.alpha.is_finite()) {
        return Err(Error::InvalidMeta(format!("alpha {} must be > 0", params.alpha)));
    }
    if !(params.lambda >= 0.0 && params.lambda.is_finite()) {
        return Err(Error::InvalidMeta(format!("lambda {} must be >= 0", params.lambda)));
    }
    if train.rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let a = linear_design(&train.features, params.degree)?;
    let at = a.t().to_owned();
    let y = &train.targets;
    let m = train.rows() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = Array2::from_shape_fn((a.ncols(), y.ncols()), |(i, _)| {
        if i == 0 {
            0.0
        } else {
            rng.random_range(-0.01..0.01)
        }
    });
    let step = params.alpha / m;
    for t in 1..=params.iterations {
        let resid = a.dot(&theta) - y;
        let mut grad = at.dot(&resid);
        grad.slice_mut(s![1.., ..])
            .zip_mut_with(&theta.slice(s![1.., ..]), |g, w| *g += params.lambda * w);
        theta.zip_mut_with(&grad, |w, g| *w -= step * g);
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Diverged {
                iteration: t,
                partial: Box::new(None),
            });
        }
    }
    Ok(LinearFit {
        degree: params.degree,
        theta,
    })
}

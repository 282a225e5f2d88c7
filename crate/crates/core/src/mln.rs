//! The loss-predicting multilayer network and its training corpus.
//!
//! Each factor-model rating becomes one training example per grid value of
//! the balance parameter beta: input `(p_u, q_i, beta)`, target the combined
//! accuracy/fairness loss label. The network (rectifier hidden layers,
//! dropout after the first, linear output) learns to predict that label; at
//! serving time items are ranked by the predicted loss. No demographic
//! information enters the network.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use crate::fmath;
use crate::minority::NormalizedIndex;
use crate::pmf::{dot, FactorModel};
use crate::ratings::RatingMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum MlnError {
    BadArchitecture,
    WidthMismatch { expected: usize, got: usize },
    EmptyTrainingSet,
    Diverged { epoch: usize, loss: f64 },
    MissingUserIndex(u32),
    MissingItemIndex(u32),
    DimensionMismatch,
    BadConfig(&'static str),
}

impl fmt::Display for MlnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MlnError::BadArchitecture => {
                write!(f, "network needs an input layer, at least one hidden layer and one output")
            }
            MlnError::WidthMismatch { expected, got } => {
                write!(f, "input width {got} does not match the network's {expected}")
            }
            MlnError::EmptyTrainingSet => write!(f, "training set is empty"),
            MlnError::Diverged { epoch, loss } => write!(
                f,
                "training diverged at epoch {epoch} (loss {loss}); try a smaller learning rate"
            ),
            MlnError::MissingUserIndex(u) => {
                write!(f, "rated user {u} has no normalized index value")
            }
            MlnError::MissingItemIndex(i) => {
                write!(f, "rated item {i} has no normalized index value")
            }
            MlnError::DimensionMismatch => {
                write!(f, "factor model does not cover the rating matrix")
            }
            MlnError::BadConfig(what) => write!(f, "bad training config: {what}"),
        }
    }
}

impl core::error::Error for MlnError {}

/// Whether the squared prediction error inside a label is rescaled so both
/// loss terms live in `[0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccuracyScale {
    /// Divide by `(max_rating - 1)^2`. The default: keeps beta meaningful.
    Normalized,
    /// Leave the raw squared error.
    Raw,
}

/// Combined loss label for one (rating, beta) pair:
/// `beta * e_acc + (1 - beta) * e_fair` with `e_acc = (r - p.q)^2` (optionally
/// rescaled) and `e_fair = (im' - um')^2`.
pub fn label(
    rating: f64,
    p_u: &[f64],
    q_i: &[f64],
    im_norm_item: f64,
    um_norm_user: f64,
    beta: f64,
    scale: AccuracyScale,
    max_rating: u8,
) -> f64 {
    let err = rating - dot(p_u, q_i);
    let mut e_acc = err * err;
    if scale == AccuracyScale::Normalized {
        let span = (max_rating as f64 - 1.0).max(1.0);
        e_acc /= span * span;
    }
    let fair = im_norm_item - um_norm_user;
    let e_fair = fair * fair;
    beta * e_acc + (1.0 - beta) * e_fair
}

/// The canonical beta grid: eleven values, 0.0 to 1.0 in steps of 0.1.
pub fn beta_grid() -> Vec<f64> {
    (0..=10).map(|k| k as f64 / 10.0).collect()
}

/// One materialized training example.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub x: Vec<f64>,
    pub y: f64,
}

/// Random-access source of training examples; implementations may compute
/// rows on demand so the corpus never has to be materialized.
pub trait ExampleSet {
    fn len(&self) -> usize;
    fn width(&self) -> usize;
    /// Writes example `index`'s input into `x` and returns its label.
    fn fill(&self, index: usize, x: &mut [f64]) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn example(&self, index: usize) -> TrainingExample {
        let mut x = vec![0.0; self.width()];
        let y = self.fill(index, &mut x);
        TrainingExample { x, y }
    }
}

impl ExampleSet for [TrainingExample] {
    fn len(&self) -> usize {
        <[TrainingExample]>::len(self)
    }

    fn width(&self) -> usize {
        self.first().map_or(0, |e| e.x.len())
    }

    fn fill(&self, index: usize, x: &mut [f64]) -> f64 {
        x.copy_from_slice(&self[index].x);
        self[index].y
    }
}

/// Lazily labeled corpus of `|ratings| * |beta grid|` examples.
///
/// Example `k` maps to rating `k / grid` and beta `grid[k % grid]`, so the
/// eleven beta variants of a rating stay adjacent.
pub struct BetaAugmentedSet<'a> {
    factors: &'a FactorModel,
    triples: &'a [(u32, u32, u8)],
    im_norm_dense: Vec<f64>,
    um_norm_dense: Vec<f64>,
    beta_grid: Vec<f64>,
    scale: AccuracyScale,
    max_rating: u8,
}

impl<'a> BetaAugmentedSet<'a> {
    pub fn beta_grid(&self) -> &[f64] {
        &self.beta_grid
    }

    /// Streaming view of the whole corpus.
    pub fn examples(&self) -> impl Iterator<Item = TrainingExample> + '_ {
        (0..ExampleSet::len(self)).map(|i| self.example(i))
    }
}

/// Builds the beta-augmented corpus over every rating in `ratings`.
///
/// Every rated user and item must carry a normalized index value; the factor
/// model must cover the matrix dimensions.
pub fn build_training_set<'a>(
    factors: &'a FactorModel,
    ratings: &'a RatingMatrix,
    im_norm: &NormalizedIndex,
    um_norm: &NormalizedIndex,
    beta_grid: &[f64],
    scale: AccuracyScale,
) -> Result<BetaAugmentedSet<'a>, MlnError> {
    if factors.num_users() < ratings.num_users() || factors.num_items() < ratings.num_items() {
        return Err(MlnError::DimensionMismatch);
    }
    let um_norm_dense: Vec<f64> = ratings
        .users()
        .raw_ids()
        .iter()
        .map(|&raw| um_norm.value(raw).unwrap_or(f64::NAN))
        .collect();
    let im_norm_dense: Vec<f64> = ratings
        .items()
        .raw_ids()
        .iter()
        .map(|&raw| im_norm.value(raw).unwrap_or(f64::NAN))
        .collect();
    for &(du, di, _) in ratings.dense_entries() {
        if um_norm_dense[du as usize].is_nan() {
            return Err(MlnError::MissingUserIndex(
                ratings.users().raw(du).expect("dense user"),
            ));
        }
        if im_norm_dense[di as usize].is_nan() {
            return Err(MlnError::MissingItemIndex(
                ratings.items().raw(di).expect("dense item"),
            ));
        }
    }
    Ok(BetaAugmentedSet {
        factors,
        triples: ratings.dense_entries(),
        im_norm_dense,
        um_norm_dense,
        beta_grid: beta_grid.to_vec(),
        scale,
        max_rating: ratings.max_rating(),
    })
}

impl ExampleSet for BetaAugmentedSet<'_> {
    fn len(&self) -> usize {
        self.triples.len() * self.beta_grid.len()
    }

    fn width(&self) -> usize {
        2 * self.factors.factors() + 1
    }

    fn fill(&self, index: usize, x: &mut [f64]) -> f64 {
        let grid = self.beta_grid.len();
        let (du, di, r) = self.triples[index / grid];
        let beta = self.beta_grid[index % grid];
        let f = self.factors.factors();
        let p_u = self.factors.user_row(du);
        let q_i = self.factors.item_row(di);
        x[..f].copy_from_slice(p_u);
        x[f..2 * f].copy_from_slice(q_i);
        x[2 * f] = beta;
        label(
            r as f64,
            p_u,
            q_i,
            self.im_norm_dense[di as usize],
            self.um_norm_dense[du as usize],
            beta,
            self.scale,
            self.max_rating,
        )
    }
}

/// Fully-connected network: rectifier hidden layers, inverted dropout after
/// the first hidden layer, linear single output. Carries the per-weight
/// squared-gradient averages used by the optimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlnModel {
    sizes: Vec<usize>,
    weights: Vec<Vec<f64>>, // per layer, out x in row-major
    biases: Vec<Vec<f64>>,
    dropout: f64,
    sq_grad_w: Vec<Vec<f64>>,
    sq_grad_b: Vec<Vec<f64>>,
}

impl MlnModel {
    /// Uniform init scaled by layer fan-in/fan-out, deterministic under seed.
    pub fn new(sizes: &[usize], dropout: f64, seed: u64) -> Result<Self, MlnError> {
        if sizes.len() < 3 || sizes.iter().any(|&s| s == 0) {
            return Err(MlnError::BadArchitecture);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = fmath::sqrt(6.0 / (fan_in + fan_out) as f64);
            weights.push((0..fan_in * fan_out).map(|_| rng.gen_range(-bound..=bound)).collect());
            biases.push(vec![0.0; fan_out]);
        }
        Self::from_params(sizes.to_vec(), weights, biases, dropout)
    }

    /// The architecture used for F latent factors: `2F+1 -> 80 -> 10 -> 1`.
    pub fn for_factors(factors: usize, seed: u64) -> Result<Self, MlnError> {
        Self::new(&[2 * factors + 1, 80, 10, 1], 0.2, seed)
    }

    pub fn from_params(
        sizes: Vec<usize>,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
        dropout: f64,
    ) -> Result<Self, MlnError> {
        if sizes.len() < 3 || sizes.iter().any(|&s| s == 0) || *sizes.last().unwrap() != 1 {
            return Err(MlnError::BadArchitecture);
        }
        if weights.len() != sizes.len() - 1 || biases.len() != sizes.len() - 1 {
            return Err(MlnError::BadArchitecture);
        }
        for l in 0..weights.len() {
            if weights[l].len() != sizes[l] * sizes[l + 1] || biases[l].len() != sizes[l + 1] {
                return Err(MlnError::BadArchitecture);
            }
        }
        let sq_grad_w = weights.iter().map(|w| vec![0.0; w.len()]).collect();
        let sq_grad_b = biases.iter().map(|b| vec![0.0; b.len()]).collect();
        Ok(Self { sizes, weights, biases, dropout, sq_grad_w, sq_grad_b })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_width(&self) -> usize {
        self.sizes[0]
    }

    pub fn dropout(&self) -> f64 {
        self.dropout
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    /// Deterministic forward pass (dropout off).
    pub fn forward_infer(&self, x: &[f64]) -> Result<f64, MlnError> {
        Ok(self.trace(x, None)?.output())
    }

    /// Training-mode forward pass: after the first hidden layer each unit is
    /// zeroed with probability `dropout` and survivors are scaled by
    /// `1/(1-dropout)`, so inference needs no rescaling.
    pub fn forward_train(&self, x: &[f64], rng: &mut ChaCha8Rng) -> Result<f64, MlnError> {
        Ok(self.trace(x, Some(rng))?.output())
    }

    /// Forward pass retaining all intermediate state, for backprop and for
    /// inspecting activations.
    pub fn trace(&self, x: &[f64], mut dropout_rng: Option<&mut ChaCha8Rng>) -> Result<Trace, MlnError> {
        if x.len() != self.sizes[0] {
            return Err(MlnError::WidthMismatch { expected: self.sizes[0], got: x.len() });
        }
        let layer_count = self.sizes.len() - 1;
        let mut activations = Vec::with_capacity(layer_count + 1);
        activations.push(x.to_vec());
        let mut pre = Vec::with_capacity(layer_count);
        let mut masks: Vec<Option<Vec<f64>>> = vec![None; layer_count];

        for l in 0..layer_count {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let input = &activations[l];
            let mut z = vec![0.0; n_out];
            for (j, zj) in z.iter_mut().enumerate() {
                *zj = self.biases[l][j] + dot(&self.weights[l][j * n_in..(j + 1) * n_in], input);
            }
            pre.push(z.clone());
            let mut a = if l + 1 == layer_count {
                z // linear output
            } else {
                z.iter().map(|&v| v.max(0.0)).collect()
            };
            if l == 0 && self.dropout > 0.0 {
                if let Some(rng) = dropout_rng.as_deref_mut() {
                    let keep = 1.0 - self.dropout;
                    let mask: Vec<f64> = (0..a.len())
                        .map(|_| if rng.gen::<f64>() < self.dropout { 0.0 } else { 1.0 / keep })
                        .collect();
                    for (v, m) in a.iter_mut().zip(&mask) {
                        *v *= m;
                    }
                    masks[0] = Some(mask);
                }
            }
            activations.push(a);
        }
        Ok(Trace { activations, pre, masks })
    }

    fn apply_rmsprop(&mut self, grads: &Gradients, cfg: &MlnTrainConfig) {
        for l in 0..self.weights.len() {
            for (k, g) in grads.w[l].iter().enumerate() {
                let cache = &mut self.sq_grad_w[l][k];
                *cache = cfg.sq_grad_decay * *cache + (1.0 - cfg.sq_grad_decay) * g * g;
                self.weights[l][k] -= cfg.learning_rate * g / fmath::sqrt(*cache + cfg.epsilon);
            }
            for (k, g) in grads.b[l].iter().enumerate() {
                let cache = &mut self.sq_grad_b[l][k];
                *cache = cfg.sq_grad_decay * *cache + (1.0 - cfg.sq_grad_decay) * g * g;
                self.biases[l][k] -= cfg.learning_rate * g / fmath::sqrt(*cache + cfg.epsilon);
            }
        }
    }

    /// Inference alias over factor rows: predicted combined loss for
    /// recommending item `q_i` to user `p_u` at balance `beta`.
    pub fn predict_loss(&self, p_u: &[f64], q_i: &[f64], beta: f64) -> Result<f64, MlnError> {
        let expected = self.sizes[0];
        if p_u.len() + q_i.len() + 1 != expected {
            return Err(MlnError::WidthMismatch { expected, got: p_u.len() + q_i.len() + 1 });
        }
        let mut x = Vec::with_capacity(expected);
        x.extend_from_slice(p_u);
        x.extend_from_slice(q_i);
        x.push(beta);
        self.forward_infer(&x)
    }
}

/// Intermediate state of one forward pass.
pub struct Trace {
    /// Post-activation (and post-dropout) values; `activations[0]` is the input.
    pub activations: Vec<Vec<f64>>,
    /// Pre-activation values per layer.
    pub pre: Vec<Vec<f64>>,
    /// Dropout scaling per layer (zero = dropped, `1/keep` = kept).
    pub masks: Vec<Option<Vec<f64>>>,
}

impl Trace {
    pub fn output(&self) -> f64 {
        self.activations.last().expect("network has layers")[0]
    }
}

/// Accumulated parameter gradients, same shapes as the model.
pub struct Gradients {
    w: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeroed(model: &MlnModel) -> Self {
        Self {
            w: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            b: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn weight(&self, layer: usize, flat: usize) -> f64 {
        self.w[layer][flat]
    }

    pub fn bias(&self, layer: usize, unit: usize) -> f64 {
        self.b[layer][unit]
    }
}

/// Backpropagates `d_out` (the loss derivative at the single output) through
/// the trace, adding parameter gradients into `grads`.
pub fn backward(model: &MlnModel, trace: &Trace, d_out: f64, grads: &mut Gradients) {
    let layer_count = model.sizes.len() - 1;
    let mut delta = vec![d_out]; // linear output layer

    for l in (0..layer_count).rev() {
        let n_in = model.sizes[l];
        let input = &trace.activations[l];
        for (j, &dj) in delta.iter().enumerate() {
            grads.b[l][j] += dj;
            let row = &mut grads.w[l][j * n_in..(j + 1) * n_in];
            for (k, g) in row.iter_mut().enumerate() {
                *g += dj * input[k];
            }
        }
        if l == 0 {
            break;
        }
        // d activation of the previous layer
        let mut d_prev = vec![0.0; n_in];
        for (j, &dj) in delta.iter().enumerate() {
            let row = &model.weights[l][j * n_in..(j + 1) * n_in];
            for (k, dp) in d_prev.iter_mut().enumerate() {
                *dp += dj * row[k];
            }
        }
        if let Some(mask) = &trace.masks[l - 1] {
            for (dp, m) in d_prev.iter_mut().zip(mask) {
                *dp *= m;
            }
        }
        for (dp, &z) in d_prev.iter_mut().zip(&trace.pre[l - 1]) {
            if z <= 0.0 {
                *dp = 0.0;
            }
        }
        delta = d_prev;
    }
}

/// Optimizer and schedule settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlnTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub sq_grad_decay: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Example-level train/validation/test fractions.
    pub split: (f64, f64, f64),
}

impl Default for MlnTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 256,
            learning_rate: 1e-3,
            sq_grad_decay: 0.9,
            epsilon: 1e-8,
            seed: 42,
            split: (0.7, 0.1, 0.2),
        }
    }
}

/// Per-epoch mean absolute errors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MlnTrainReport {
    pub train_mae: Vec<f64>,
    pub validation_mae: Vec<f64>,
}

/// Deterministic example-index partition used by [`mln_train`].
pub fn split_indices(
    n: usize,
    fractions: (f64, f64, f64),
    seed: u64,
) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let n_train = (fmath::round(fractions.0 * n as f64) as usize).min(n);
    let n_val = (fmath::round(fractions.1 * n as f64) as usize).min(n - n_train);
    let val = order.split_off(n_train);
    let (val, test) = {
        let mut v = val;
        let t = v.split_off(n_val.min(v.len()));
        (v, t)
    };
    (order, val, test)
}

/// Trains by backpropagation of the mean absolute error with the
/// squared-gradient-average optimizer. Validation error is computed in
/// inference mode after each epoch. Bit-deterministic under the seed.
pub fn mln_train(
    model: &mut MlnModel,
    examples: &(impl ExampleSet + ?Sized),
    cfg: &MlnTrainConfig,
) -> Result<MlnTrainReport, MlnError> {
    if examples.is_empty() {
        return Err(MlnError::EmptyTrainingSet);
    }
    if examples.width() != model.input_width() {
        return Err(MlnError::WidthMismatch {
            expected: model.input_width(),
            got: examples.width(),
        });
    }
    if cfg.epochs == 0 || cfg.batch_size == 0 {
        return Err(MlnError::BadConfig("epochs and batch size must be positive"));
    }
    if !(cfg.learning_rate > 0.0) || !(0.0..1.0).contains(&cfg.sq_grad_decay) {
        return Err(MlnError::BadConfig("rates must be positive and decay in [0,1)"));
    }

    let (mut train_idx, val_idx, _test_idx) =
        split_indices(examples.len(), cfg.split, cfg.seed);
    if train_idx.is_empty() {
        return Err(MlnError::EmptyTrainingSet);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut report = MlnTrainReport::default();
    let mut x = vec![0.0; examples.width()];

    for epoch in 0..cfg.epochs {
        train_idx.shuffle(&mut rng);
        let mut abs_sum = 0.0;
        for batch in train_idx.chunks(cfg.batch_size) {
            let mut grads = Gradients::zeroed(model);
            let inv = 1.0 / batch.len() as f64;
            for &idx in batch {
                let y = examples.fill(idx, &mut x);
                let trace = model.trace(&x, Some(&mut rng))?;
                let h = trace.output();
                let err = h - y;
                abs_sum += fmath::abs(err);
                let d_out = if err > 0.0 {
                    inv
                } else if err < 0.0 {
                    -inv
                } else {
                    0.0
                };
                backward(model, &trace, d_out, &mut grads);
            }
            model.apply_rmsprop(&grads, cfg);
        }
        let train_mae = abs_sum / train_idx.len() as f64;
        if !train_mae.is_finite() {
            return Err(MlnError::Diverged { epoch, loss: train_mae });
        }
        report.train_mae.push(train_mae);

        if !val_idx.is_empty() {
            let mut val_sum = 0.0;
            for &idx in &val_idx {
                let y = examples.fill(idx, &mut x);
                val_sum += fmath::abs(model.forward_infer(&x)? - y);
            }
            let val_mae = val_sum / val_idx.len() as f64;
            if !val_mae.is_finite() {
                return Err(MlnError::Diverged { epoch, loss: val_mae });
            }
            report.validation_mae.push(val_mae);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(dropout: f64) -> MlnModel {
        // 1 -> 1 -> 1 -> 1 with hand-picked parameters
        MlnModel::from_params(
            vec![1, 1, 1, 1],
            vec![vec![2.0], vec![-1.5], vec![0.5]],
            vec![vec![0.5], vec![4.0], vec![-0.25]],
            dropout,
        )
        .unwrap()
    }

    #[test]
    fn hand_built_network_evaluates_by_hand() {
        let m = tiny(0.0);
        // x=1: z1 = 2*1+0.5 = 2.5, relu 2.5; z2 = -1.5*2.5+4 = 0.25, relu 0.25;
        // out = 0.5*0.25 - 0.25 = -0.125
        let got = m.forward_infer(&[1.0]).unwrap();
        assert!((got - (-0.125)).abs() < 1e-15);
        // x=-1: z1 = -1.5, relu 0; z2 = 4, relu 4; out = 2 - 0.25 = 1.75
        let got = m.forward_infer(&[-1.0]).unwrap();
        assert!((got - 1.75).abs() < 1e-15);
    }

    #[test]
    fn zero_parameters_give_zero_output() {
        let m = MlnModel::from_params(
            vec![3, 2, 2, 1],
            vec![vec![0.0; 6], vec![0.0; 4], vec![0.0; 2]],
            vec![vec![0.0; 2], vec![0.0; 2], vec![0.0; 1]],
            0.0,
        )
        .unwrap();
        assert_eq!(m.forward_infer(&[1.0, -2.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn infer_mode_is_deterministic() {
        let m = MlnModel::for_factors(3, 11).unwrap();
        let x = vec![0.3; 7];
        assert_eq!(m.forward_infer(&x).unwrap(), m.forward_infer(&x).unwrap());
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let m = tiny(0.0);
        assert!(matches!(
            m.forward_infer(&[1.0, 2.0]),
            Err(MlnError::WidthMismatch { expected: 1, got: 2 })
        ));
        assert!(matches!(
            m.predict_loss(&[1.0], &[1.0], 0.5),
            Err(MlnError::WidthMismatch { .. })
        ));
    }

    #[test]
    fn label_combines_both_errors() {
        // pure fairness, identical normalized values
        assert_eq!(label(3.0, &[1.0], &[3.0], 0.4, 0.4, 0.0, AccuracyScale::Raw, 5), 0.0);
        // pure accuracy, perfect prediction
        assert_eq!(label(5.0, &[1.0], &[5.0], 0.9, 0.1, 1.0, AccuracyScale::Raw, 5), 0.0);
        // e_acc = 0.16, e_fair = 0.04, beta = 0.5 -> 0.10
        let v = label(1.4, &[1.0], &[1.0], 0.7, 0.5, 0.5, AccuracyScale::Raw, 5);
        assert!((v - 0.10).abs() < 1e-12);
    }

    #[test]
    fn normalized_scale_divides_by_span_squared() {
        let raw = label(5.0, &[1.0], &[1.0], 0.5, 0.5, 1.0, AccuracyScale::Raw, 5);
        let norm = label(5.0, &[1.0], &[1.0], 0.5, 0.5, 1.0, AccuracyScale::Normalized, 5);
        assert!((raw - 16.0).abs() < 1e-12);
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beta_grid_has_eleven_steps_of_a_tenth() {
        let g = beta_grid();
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 0.0);
        assert!((g[1] - 0.1).abs() < 1e-15);
        assert_eq!(g[10], 1.0);
    }

    #[test]
    fn split_indices_partition_and_are_deterministic() {
        let (tr, va, te) = split_indices(100, (0.7, 0.1, 0.2), 5);
        assert_eq!((tr.len(), va.len(), te.len()), (70, 10, 20));
        let mut all: Vec<usize> = tr.iter().chain(&va).chain(&te).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(split_indices(100, (0.7, 0.1, 0.2), 5), (tr, va, te));
    }

    #[test]
    fn constant_target_is_learned() {
        let c = 2.0;
        let examples: Vec<TrainingExample> = (0..200)
            .map(|k| TrainingExample { x: vec![(k % 7) as f64 / 7.0, 1.0], y: c })
            .collect();
        let mut model = MlnModel::new(&[2, 8, 4, 1], 0.0, 3).unwrap();
        let coarse = MlnTrainConfig {
            epochs: 200,
            batch_size: 32,
            learning_rate: 0.01,
            split: (0.8, 0.2, 0.0),
            ..Default::default()
        };
        mln_train(&mut model, examples.as_slice(), &coarse).unwrap();
        // absolute-error steps plateau at the learning-rate scale; drop the
        // rate to settle near the optimum
        let fine = MlnTrainConfig { epochs: 200, learning_rate: 5e-4, ..coarse };
        let report = mln_train(&mut model, examples.as_slice(), &fine).unwrap();
        let last = *report.validation_mae.last().unwrap();
        assert!(last < 0.01 * c, "validation MAE {last} should be under 1% of the target");
    }

    #[test]
    fn training_is_bit_deterministic() {
        let examples: Vec<TrainingExample> = (0..64)
            .map(|k| TrainingExample {
                x: vec![(k as f64).sin(), (k as f64).cos(), 1.0],
                y: (k % 3) as f64,
            })
            .collect();
        let cfg = MlnTrainConfig { epochs: 4, batch_size: 16, ..Default::default() };
        let mut a = MlnModel::new(&[3, 6, 3, 1], 0.2, 9).unwrap();
        let ra = mln_train(&mut a, examples.as_slice(), &cfg).unwrap();
        let mut b = MlnModel::new(&[3, 6, 3, 1], 0.2, 9).unwrap();
        let rb = mln_train(&mut b, examples.as_slice(), &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
    }

    #[test]
    fn dropout_scales_survivors_inversely() {
        let m = MlnModel::from_params(
            vec![1, 4, 2, 1],
            vec![vec![1.0; 4], vec![0.25; 8], vec![0.5; 2]],
            vec![vec![0.0; 4], vec![0.0; 2], vec![0.0]],
            0.5,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let trace = m.trace(&[1.0], Some(&mut rng)).unwrap();
        for &a in &trace.activations[1] {
            assert!(a == 0.0 || (a - 2.0).abs() < 1e-15, "kept units scale by 1/keep");
        }
    }
}

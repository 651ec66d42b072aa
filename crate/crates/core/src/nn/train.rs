use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::DatasetRow;
use super::features::{feature_scale, FEATURE_LEN};
use super::mlp::{affine, gemm, softmax_rows, MlpModel};
use crate::error::{Error, Result};
use crate::traffic::NUM_ACTIONS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub hidden_layers: Vec<usize>,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Factor applied to the learning rate every `decay_every` epochs.
    pub decay_factor: f64,
    pub decay_every: usize,
    /// Drop probability after the first two hidden layers, training only.
    pub dropout: f64,
    pub validation_split: f64,
    /// Divide inputs by the fixed ranges of [`feature_scale`].
    pub scale_inputs: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden_layers: vec![512, 256, 128],
            batch_size: 64,
            epochs: 50,
            learning_rate: 0.001,
            decay_factor: 0.5,
            decay_every: 15,
            dropout: 0.3,
            validation_split: 0.1,
            scale_inputs: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.decay_every == 0 {
            return Err(Error::config("batch_size and decay_every must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::config("dropout must lie in [0, 1)"));
        }
        if !(0.0..1.0).contains(&self.validation_split) {
            return Err(Error::config("validation_split must lie in [0, 1)"));
        }
        if !(self.learning_rate > 0.0) || !(self.decay_factor > 0.0) {
            return Err(Error::config("learning_rate and decay_factor must be positive"));
        }
        if self.hidden_layers.contains(&0) {
            return Err(Error::config("hidden layer widths must be positive"));
        }
        Ok(())
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![FEATURE_LEN];
        w.extend(&self.hidden_layers);
        w.push(NUM_ACTIONS);
        w
    }

    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        self.learning_rate * self.decay_factor.powi((epoch / self.decay_every) as i32)
    }
}

/// Loss gradients, one entry per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

struct Tape {
    rows: usize,
    /// Input of every layer (after activation and dropout).
    inputs: Vec<Vec<f64>>,
    /// Pre-activations of the hidden layers.
    pre: Vec<Vec<f64>>,
    masks: Vec<Option<Vec<f64>>>,
    probs: Vec<f64>,
}

/// Hidden layers followed by dropout during training.
const DROPOUT_LAYERS: usize = 2;

fn forward_tape(
    model: &MlpModel,
    batch: &[f64],
    dropout: Option<(f64, &mut ChaCha8Rng)>,
) -> Result<Tape> {
    let (x, rows) = model.prepare_inputs(batch)?;
    let layers = model.layers();
    let last = layers.len() - 1;
    let mut tape = Tape {
        rows,
        inputs: vec![x],
        pre: Vec::new(),
        masks: Vec::new(),
        probs: Vec::new(),
    };
    let mut dropout = dropout.filter(|(p, _)| *p > 0.0);
    for (i, layer) in layers.iter().enumerate() {
        let mut z = affine(layer, &tape.inputs[i], rows);
        if i == last {
            softmax_rows(&mut z, layer.outputs);
            tape.probs = z;
            break;
        }
        let mut a: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
        let mask = match dropout.as_mut() {
            Some((p, rng)) if i < DROPOUT_LAYERS => {
                let keep = 1.0 / (1.0 - *p);
                let m: Vec<f64> = (0..a.len())
                    .map(|_| if rng.random::<f64>() < *p { 0.0 } else { keep })
                    .collect();
                a.iter_mut().zip(&m).for_each(|(v, k)| *v *= k);
                Some(m)
            }
            _ => None,
        };
        tape.pre.push(z);
        tape.masks.push(mask);
        tape.inputs.push(a);
    }
    Ok(tape)
}

fn cross_entropy(probs: &[f64], labels: &[usize], width: usize) -> f64 {
    let total: f64 = probs
        .chunks_exact(width)
        .zip(labels)
        .map(|(p, &y)| -p[y].max(f64::MIN_POSITIVE).ln())
        .sum();
    total / labels.len() as f64
}

fn backward(model: &MlpModel, tape: &Tape, labels: &[usize]) -> Gradients {
    let layers = model.layers();
    let rows = tape.rows;
    let width = model.output_width();
    let mut dz = tape.probs.clone();
    for (r, &y) in labels.iter().enumerate() {
        dz[r * width + y] -= 1.0;
    }
    let inv = 1.0 / rows as f64;
    dz.iter_mut().for_each(|v| *v *= inv);

    let mut grads = Gradients {
        weights: vec![Vec::new(); layers.len()],
        bias: vec![Vec::new(); layers.len()],
    };
    for i in (0..layers.len()).rev() {
        let layer = &layers[i];
        let mut dw = vec![0.0; layer.inputs * layer.outputs];
        gemm(layer.inputs, rows, layer.outputs, &tape.inputs[i], true, &dz, false, &mut dw, 0.0);
        let mut db = vec![0.0; layer.outputs];
        for row in dz.chunks_exact(layer.outputs) {
            db.iter_mut().zip(row).for_each(|(b, g)| *b += g);
        }
        grads.weights[i] = dw;
        grads.bias[i] = db;
        if i == 0 {
            break;
        }
        let mut da = vec![0.0; rows * layer.inputs];
        gemm(rows, layer.outputs, layer.inputs, &dz, false, &layer.weights, true, &mut da, 0.0);
        if let Some(mask) = &tape.masks[i - 1] {
            da.iter_mut().zip(mask).for_each(|(g, m)| *g *= m);
        }
        da.iter_mut()
            .zip(&tape.pre[i - 1])
            .for_each(|(g, z)| if *z <= 0.0 { *g = 0.0 });
        dz = da;
    }
    grads
}

fn check_labels(labels: &[usize], rows: usize, width: usize) -> Result<()> {
    if labels.len() != rows {
        return Err(Error::contract(format!("{} labels for {rows} rows", labels.len())));
    }
    if let Some(bad) = labels.iter().find(|&&y| y >= width) {
        return Err(Error::contract(format!("label {bad} out of range 0..{width}")));
    }
    Ok(())
}

/// Mean cross-entropy of a batch, with dropout inactive.
pub fn loss(model: &MlpModel, batch: &[f64], labels: &[usize]) -> Result<f64> {
    let probs = model.forward(batch)?;
    check_labels(labels, probs.len() / model.output_width(), model.output_width())?;
    Ok(cross_entropy(&probs, labels, model.output_width()))
}

/// Mean cross-entropy and its exact gradient, with dropout inactive.
pub fn loss_and_gradients(
    model: &MlpModel,
    batch: &[f64],
    labels: &[usize],
) -> Result<(f64, Gradients)> {
    let tape = forward_tape(model, batch, None)?;
    check_labels(labels, tape.rows, model.output_width())?;
    let l = cross_entropy(&tape.probs, labels, model.output_width());
    Ok((l, backward(model, &tape, labels)))
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(model: &MlpModel) -> Self {
        let shapes: Vec<usize> = model
            .layers()
            .iter()
            .flat_map(|l| [l.weights.len(), l.bias.len()])
            .collect();
        Adam {
            m: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            v: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    fn step(&mut self, model: &mut MlpModel, grads: &Gradients, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for (i, layer) in model.layers_mut().iter_mut().enumerate() {
            let tensors = [
                (&mut layer.weights, &grads.weights[i]),
                (&mut layer.bias, &grads.bias[i]),
            ];
            for (j, (params, g)) in tensors.into_iter().enumerate() {
                let (m, v) = (&mut self.m[2 * i + j], &mut self.v[2 * i + j]);
                for k in 0..params.len() {
                    m[k] = Self::BETA1 * m[k] + (1.0 - Self::BETA1) * g[k];
                    v[k] = Self::BETA2 * v[k] + (1.0 - Self::BETA2) * g[k] * g[k];
                    params[k] -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + Self::EPS);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochReport {
    /// 1-based.
    pub epoch: usize,
    pub learning_rate: f64,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub validation_loss: Option<f64>,
    pub validation_accuracy: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    pub history: Vec<EpochReport>,
}

fn gather(rows: &[DatasetRow], idx: &[usize]) -> (Vec<f64>, Vec<usize>) {
    let mut x = Vec::with_capacity(idx.len() * FEATURE_LEN);
    let mut y = Vec::with_capacity(idx.len());
    for &i in idx {
        x.extend_from_slice(&rows[i].features);
        y.push(rows[i].label.get());
    }
    (x, y)
}

/// Mean loss and top-1 accuracy with dropout inactive.
pub fn evaluate(model: &MlpModel, rows: &[DatasetRow]) -> Result<(f64, f64)> {
    let idx: Vec<usize> = (0..rows.len()).collect();
    evaluate_subset(model, rows, &idx)
}

fn evaluate_subset(model: &MlpModel, rows: &[DatasetRow], idx: &[usize]) -> Result<(f64, f64)> {
    if idx.is_empty() {
        return Err(Error::contract("cannot evaluate on an empty dataset"));
    }
    let width = model.output_width();
    let (mut loss_sum, mut correct) = (0.0, 0usize);
    for chunk in idx.chunks(1024) {
        let (x, y) = gather(rows, chunk);
        let probs = model.forward(&x)?;
        check_labels(&y, chunk.len(), width)?;
        loss_sum += cross_entropy(&probs, &y, width) * chunk.len() as f64;
        correct += probs
            .chunks_exact(width)
            .zip(&y)
            .filter(|(p, &label)| argmax(p) == label)
            .count();
    }
    Ok((loss_sum / idx.len() as f64, correct as f64 / idx.len() as f64))
}

/// Index of the first maximum.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

pub fn train(rows: &[DatasetRow], cfg: &TrainConfig) -> Result<TrainOutcome> {
    train_with_progress(rows, cfg, |_| {})
}

/// Mini-batch Adam on cross-entropy; `progress` sees every epoch's report.
pub fn train_with_progress(
    rows: &[DatasetRow],
    cfg: &TrainConfig,
    mut progress: impl FnMut(&EpochReport),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if rows.is_empty() {
        return Err(Error::contract("cannot train on an empty dataset"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = MlpModel::he_uniform(&cfg.widths(), rng.random())?;
    if cfg.scale_inputs {
        model = model.with_input_scale(feature_scale().to_vec())?;
    }

    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut rng);
    let n_val = ((rows.len() as f64) * cfg.validation_split).floor() as usize;
    let n_val = n_val.min(rows.len() - 1);
    let (val_idx, train_idx) = order.split_at(n_val);
    let mut train_idx = train_idx.to_vec();

    let mut adam = Adam::new(&model);
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let lr = cfg.learning_rate_at(epoch);
        train_idx.shuffle(&mut rng);
        for batch in train_idx.chunks(cfg.batch_size) {
            let (x, y) = gather(rows, batch);
            let tape = forward_tape(&model, &x, Some((cfg.dropout, &mut rng)))?;
            let grads = backward(&model, &tape, &y);
            adam.step(&mut model, &grads, lr);
        }
        let (train_loss, train_accuracy) = evaluate_subset(&model, rows, &train_idx)?;
        let val = if val_idx.is_empty() {
            None
        } else {
            Some(evaluate_subset(&model, rows, val_idx)?)
        };
        let report = EpochReport {
            epoch: epoch + 1,
            learning_rate: lr,
            train_loss,
            train_accuracy,
            validation_loss: val.map(|v| v.0),
            validation_accuracy: val.map(|v| v.1),
        };
        progress(&report);
        history.push(report);
    }
    Ok(TrainOutcome { model, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::ActionIndex;

    /// Ten well separated clusters mapped onto labels spread over 0..15.
    pub(crate) fn separable(n: usize, seed: u64) -> Vec<DatasetRow> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let class = rng.random_range(0..10usize);
                let mut f = [0.0; FEATURE_LEN];
                for (j, v) in f.iter_mut().enumerate() {
                    *v = rng.random_range(-0.3..0.3);
                    if j % 10 == class {
                        *v += 2.0;
                    }
                }
                DatasetRow {
                    features: f,
                    label: ActionIndex::new(class * 3 % 15 + class / 5).unwrap(),
                }
            })
            .collect()
    }

    fn small_config(epochs: usize) -> TrainConfig {
        TrainConfig {
            hidden_layers: vec![32, 16, 16],
            epochs,
            ..Default::default()
        }
    }

    #[test]
    fn schedule_halves_every_fifteen_epochs() {
        let cfg = TrainConfig::default();
        assert_eq!(cfg.learning_rate_at(0), 0.001);
        assert_eq!(cfg.learning_rate_at(14), 0.001);
        assert_eq!(cfg.learning_rate_at(15), 0.0005);
        assert_eq!(cfg.learning_rate_at(45), 0.000125);
    }

    #[test]
    fn fits_separable_task() {
        let rows = separable(2000, 1);
        let out = train(&rows, &TrainConfig::default()).unwrap();
        let last = out.history.last().unwrap();
        assert!(last.validation_accuracy.unwrap() >= 0.99, "{last:?}");
        let rises = out
            .history
            .windows(2)
            .filter(|w| w[1].train_loss > w[0].train_loss)
            .count();
        let losses: Vec<f64> = out.history.iter().map(|r| r.train_loss).collect();
        assert!(rises <= 2, "{rises} epochs increased the training loss: {losses:?}");
    }

    #[test]
    fn same_seed_same_model() {
        let rows = separable(300, 2);
        let a = train(&rows, &small_config(3)).unwrap().model;
        let b = train(&rows, &small_config(3)).unwrap().model;
        let probe: Vec<f64> = rows[..20].iter().flat_map(|r| r.features).collect();
        let (pa, pb) = (a.forward(&probe).unwrap(), b.forward(&probe).unwrap());
        assert!(pa.iter().zip(&pb).all(|(x, y)| (x - y).abs() <= 1e-9));
    }

    #[test]
    fn empty_dataset_is_rejected() {
        assert!(matches!(train(&[], &small_config(1)), Err(Error::Contract(_))));
    }

    #[test]
    fn batch_gradient_is_mean_of_row_gradients() {
        let m = MlpModel::he_uniform(&[62, 8, 6, 15], 3).unwrap();
        let rows = separable(4, 3);
        let (x, y) = gather(&rows, &[0, 1, 2, 3]);
        let (_, g) = loss_and_gradients(&m, &x, &y).unwrap();
        let mut acc = vec![0.0; g.weights[1].len()];
        for r in 0..4 {
            let (_, gr) = loss_and_gradients(&m, &x[r * 62..(r + 1) * 62], &y[r..r + 1]).unwrap();
            acc.iter_mut().zip(&gr.weights[1]).for_each(|(a, v)| *a += v / 4.0);
        }
        for (a, b) in acc.iter().zip(&g.weights[1]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

//! Mini-batch training with MSE loss, Adam and reduce-on-plateau; one-step
//! and recursive forecasting; evaluation; checkpoints.

mod adam;
mod checkpoint;
mod metrics;
mod plateau;

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lstm::{self, backward_sequence, forward_sequence, Gradients, Mode, StackedLstm};
use crate::preprocess::{WindowedDataset, DEFAULT_WINDOW_LEN};
use crate::rng;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use metrics::{
    denormalize, evaluate, evaluate_predictions, mae, mse_loss, persistence_baseline, predict_dataset, rmse, Metrics,
};
pub use plateau::PlateauScheduler;

/// Which values the min-max scaler is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalerFit {
    /// Training portion only; test extrema do not leak into the inputs.
    Train,
    /// Whole series, as a literal reading of "the data set is normalized".
    Full,
}

impl ScalerFit {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalerFit::Train => "train",
            ScalerFit::Full => "full",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(ScalerFit::Train),
            "full" => Some(ScalerFit::Full),
            _ => None,
        }
    }
}

/// Every knob of a training run, including the data preparation choices
/// that must be replayed at evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub plateau_factor: f64,
    pub plateau_patience: usize,
    pub plateau_min_delta: f64,
    pub min_learning_rate: f64,
    pub window_len: usize,
    pub layer_sizes: Vec<usize>,
    pub dropout_rate: f64,
    pub seed: u64,
    /// Global gradient-norm clip; `None` disables clipping.
    pub clip_norm: Option<f64>,
    pub train_fraction: f64,
    /// When positive, this trailing fraction of the training portion is held
    /// out for the plateau scheduler instead of using the test set.
    pub validation_fraction: f64,
    pub log_transform: bool,
    pub scaler_fit: ScalerFit,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 32,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            plateau_factor: 0.5,
            plateau_patience: 3,
            plateau_min_delta: 1e-6,
            min_learning_rate: 1e-5,
            window_len: DEFAULT_WINDOW_LEN,
            layer_sizes: lstm::DEFAULT_LAYER_SIZES.to_vec(),
            dropout_rate: lstm::DEFAULT_DROPOUT,
            seed: 0,
            clip_norm: None,
            train_fraction: 0.7,
            validation_fraction: 0.0,
            log_transform: true,
            scaler_fit: ScalerFit::Train,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.epochs == 0 {
            return fail("epochs must be at least 1".into());
        }
        if self.batch_size == 0 {
            return fail("batch size must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning rate {} must be positive", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return fail("Adam betas must lie in [0, 1)".into());
        }
        if !(self.adam_epsilon > 0.0) {
            return fail("Adam epsilon must be positive".into());
        }
        if !(self.plateau_factor > 0.0 && self.plateau_factor < 1.0) {
            return fail(format!("plateau factor {} is not in (0, 1)", self.plateau_factor));
        }
        if !(self.min_learning_rate > 0.0) {
            return fail("minimum learning rate must be positive".into());
        }
        if !(self.plateau_min_delta >= 0.0) {
            return fail("plateau min_delta must be non-negative".into());
        }
        if self.window_len == 0 {
            return fail("window length must be at least 1".into());
        }
        if self.layer_sizes.is_empty() || self.layer_sizes.contains(&0) {
            return fail(format!("invalid layer sizes {:?}", self.layer_sizes));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return fail(format!("dropout rate {} is not in [0, 1)", self.dropout_rate));
        }
        if let Some(c) = self.clip_norm {
            if !(c > 0.0) {
                return fail("clip norm must be positive".into());
            }
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return fail(format!("train fraction {} is not in (0, 1)", self.train_fraction));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return fail(format!("validation fraction {} is not in [0, 1)", self.validation_fraction));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    /// Learning rate in effect during the epoch.
    pub lr: f64,
    /// Best validation loss seen up to and including this epoch.
    pub best_val_loss: f64,
}

/// Per-epoch loss history.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub records: Vec<EpochRecord>,
}

impl TrainLog {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,train_loss,val_loss,lr\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{},{},{}", r.epoch, r.train_loss, r.val_loss, r.lr);
        }
        out
    }
}

/// A network together with the window length it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecaster {
    pub net: StackedLstm,
    pub window_len: usize,
}

impl Forecaster {
    pub fn new(net: StackedLstm, window_len: usize) -> Self {
        Self { net, window_len }
    }

    /// Normalized next-value prediction (inference mode).
    pub fn predict_one_step(&self, window: &[f64]) -> Result<f64> {
        if window.len() != self.window_len {
            return Err(Error::Shape(format!(
                "model expects windows of {}, got {}",
                self.window_len,
                window.len()
            )));
        }
        forward_sequence(window, &self.net, Mode::Infer).map(|(p, _)| p)
    }

    /// Feed each prediction back as the newest input, `horizon` times.
    pub fn forecast_recursive(&self, seed_window: &[f64], horizon: usize) -> Result<Vec<f64>> {
        if horizon == 0 {
            return Err(Error::Usage("forecast horizon must be at least 1".into()));
        }
        let mut window = seed_window.to_vec();
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let next = self.predict_one_step(&window)?;
            out.push(next);
            window.remove(0);
            window.push(next);
        }
        Ok(out)
    }
}

pub fn predict_one_step(model: &Forecaster, window: &[f64]) -> Result<f64> {
    model.predict_one_step(window)
}

pub fn forecast_recursive(model: &Forecaster, seed_window: &[f64], horizon: usize) -> Result<Vec<f64>> {
    model.forecast_recursive(seed_window, horizon)
}

#[derive(Debug, Clone)]
pub struct FitOutcome {
    pub model: Forecaster,
    pub adam: AdamState,
    pub log: TrainLog,
}

/// Mean loss of the network in inference mode.
fn dataset_loss(net: &StackedLstm, dataset: &WindowedDataset) -> Result<f64> {
    let preds: Vec<f64> = dataset
        .inputs
        .par_iter()
        .map(|w| forward_sequence(w, net, Mode::Infer).map(|(p, _)| p))
        .collect::<Result<_>>()?;
    mse_loss(&preds, &dataset.targets)
}

/// Batch-averaged gradient of the squared error. Per-sample work may run on
/// any thread; the sum is taken in batch order.
fn batch_gradient(
    net: &StackedLstm,
    dataset: &WindowedDataset,
    batch: &[usize],
    seed: u64,
    epoch: usize,
) -> Result<Gradients> {
    let per_sample: Vec<Gradients> = batch
        .par_iter()
        .map(|&idx| {
            let mode = Mode::Train { seed: rng::derive(seed, epoch as u64, idx as u64) };
            let (pred, cache) = forward_sequence(&dataset.inputs[idx], net, mode)?;
            let cache = cache.expect("train mode returns a cache");
            backward_sequence(&cache, net, 2.0 * (pred - dataset.targets[idx]))
        })
        .collect::<Result<_>>()?;

    let mut total = net.zeros_like();
    for g in &per_sample {
        total.add_scaled(g, 1.0);
    }
    total.scale(1.0 / batch.len() as f64);
    Ok(total)
}

/// Train a freshly initialized network.
pub fn fit(train: &WindowedDataset, validation: &WindowedDataset, config: &TrainConfig) -> Result<FitOutcome> {
    config.validate()?;
    let net = lstm::init_network(&config.layer_sizes, config.dropout_rate, config.seed)?;
    fit_from(net, train, validation, config)
}

/// Train starting from the given parameters.
pub fn fit_from(
    mut net: StackedLstm,
    train: &WindowedDataset,
    validation: &WindowedDataset,
    config: &TrainConfig,
) -> Result<FitOutcome> {
    config.validate()?;
    if train.is_empty() || validation.is_empty() {
        return Err(Error::Usage("training and validation sets must be non-empty".into()));
    }
    if train.window_len != config.window_len || validation.window_len != config.window_len {
        return Err(Error::Config(format!(
            "datasets use windows of {}/{} but the config says {}",
            train.window_len, validation.window_len, config.window_len
        )));
    }

    let mut adam = AdamState::for_params(&net.param_slices(), config.learning_rate);
    let mut scheduler = PlateauScheduler::from_config(config);
    let mut log = TrainLog::default();
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 0..config.epochs {
        let mut shuffle_rng = rng::substream(rng::derive(config.seed, u64::MAX, epoch as u64), 0);
        order.shuffle(&mut shuffle_rng);
        let epoch_lr = adam.learning_rate();

        for batch in order.chunks(config.batch_size) {
            let mut grads = batch_gradient(&net, train, batch, config.seed, epoch)?;
            if let Some(max_norm) = config.clip_norm {
                let norm = grads.l2_norm();
                if norm > max_norm {
                    grads.scale(max_norm / norm);
                }
            }
            let mut params = net.param_slices_mut();
            adam_step(&mut params, &grads.param_slices(), &mut adam, config)?;
            drop(params);
            if !net.is_finite() {
                return Err(Error::Divergence { epoch: epoch + 1 });
            }
        }

        let train_loss = dataset_loss(&net, train)?;
        let val_loss = dataset_loss(&net, validation)?;
        if !(train_loss.is_finite() && val_loss.is_finite()) {
            return Err(Error::Divergence { epoch: epoch + 1 });
        }
        let next_lr = scheduler.step(val_loss, epoch_lr);
        adam.set_learning_rate(next_lr);
        log.records.push(EpochRecord {
            epoch: epoch + 1,
            train_loss,
            val_loss,
            lr: epoch_lr,
            best_val_loss: scheduler.best(),
        });
    }

    Ok(FitOutcome { model: Forecaster::new(net, config.window_len), adam, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::make_windows;

    fn tiny_config() -> TrainConfig {
        TrainConfig {
            epochs: 3,
            batch_size: 4,
            learning_rate: 1e-2,
            window_len: 4,
            layer_sizes: vec![3],
            dropout_rate: 0.1,
            seed: 17,
            ..TrainConfig::default()
        }
    }

    fn tiny_data() -> (WindowedDataset, WindowedDataset) {
        let values: Vec<f64> = (0..40).map(|i| 0.5 + 0.4 * (i as f64 * 0.3).sin()).collect();
        (make_windows(&values[..28], 4).unwrap(), make_windows(&values[28..], 4).unwrap())
    }

    #[test]
    fn log_has_one_entry_per_epoch() {
        let (train, val) = tiny_data();
        let out = fit(&train, &val, &tiny_config()).unwrap();
        assert_eq!(out.log.len(), 3);
        assert_eq!(out.log.records.iter().map(|r| r.epoch).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(out.log.to_csv().lines().count(), 4);
        assert_eq!(out.log.to_csv().lines().next(), Some("epoch,train_loss,val_loss,lr"));
        // 24 samples / batch 4 = 6 Adam steps per epoch
        assert_eq!(out.adam.step_count(), 18);
    }

    #[test]
    fn fit_is_deterministic() {
        let (train, val) = tiny_data();
        let a = fit(&train, &val, &tiny_config()).unwrap();
        let b = fit(&train, &val, &tiny_config()).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.log, b.log);
        let bits = |f: &FitOutcome| -> Vec<u64> {
            f.model.net.param_slices().iter().flat_map(|s| s.iter().map(|v| v.to_bits())).collect()
        };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn fit_rejects_bad_inputs() {
        let (train, val) = tiny_data();
        let empty = WindowedDataset { inputs: vec![], targets: vec![], window_len: 4 };
        assert!(matches!(fit(&empty, &val, &tiny_config()), Err(Error::Usage(_))));
        assert!(matches!(fit(&train, &empty, &tiny_config()), Err(Error::Usage(_))));
        let cfg = TrainConfig { window_len: 5, ..tiny_config() };
        assert!(matches!(fit(&train, &val, &cfg), Err(Error::Config(_))));
        let cfg = TrainConfig { epochs: 0, ..tiny_config() };
        assert!(matches!(fit(&train, &val, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn overflowing_parameters_report_divergence() {
        let (train, val) = tiny_data();
        let mut net = lstm::init_network(&[3], 0.0, 1).unwrap();
        net.set_head_bias(f64::MAX);
        let cfg = TrainConfig { dropout_rate: 0.0, ..tiny_config() };
        assert!(matches!(fit_from(net, &train, &val, &cfg), Err(Error::Divergence { epoch: 1 })));
    }

    #[test]
    fn clipping_bounds_each_update() {
        let (train, val) = tiny_data();
        let cfg = TrainConfig { clip_norm: Some(1e-3), epochs: 1, ..tiny_config() };
        assert!(fit(&train, &val, &cfg).is_ok());
    }

    #[test]
    fn zero_model_predictions() {
        let mut net = StackedLstm::zeros(&[2, 2], 0.0).unwrap();
        net.set_head_bias(0.3);
        let model = Forecaster::new(net, 3);
        assert_eq!(model.predict_one_step(&[0.1, 0.2, 0.3]).unwrap(), 0.3);
        assert_eq!(model.forecast_recursive(&[0.1, 0.2, 0.3], 5).unwrap(), vec![0.3; 5]);
        assert!(matches!(model.predict_one_step(&[0.1]), Err(Error::Shape(_))));
        assert!(matches!(model.forecast_recursive(&[0.1, 0.2, 0.3], 0), Err(Error::Usage(_))));
    }

    #[test]
    fn recursive_forecast_unrolls_by_hand() {
        let net = lstm::init_network(&[4], 0.0, 5).unwrap();
        let model = Forecaster::new(net.clone(), 3);
        let seed = [0.2, 0.4, 0.6];
        let p1 = forward_sequence(&seed, &net, Mode::Infer).unwrap().0;
        let p2 = forward_sequence(&[0.4, 0.6, p1], &net, Mode::Infer).unwrap().0;
        let p3 = forward_sequence(&[0.6, p1, p2], &net, Mode::Infer).unwrap().0;
        assert_eq!(model.forecast_recursive(&seed, 3).unwrap(), vec![p1, p2, p3]);
        assert_eq!(forecast_recursive(&model, &seed, 1).unwrap(), vec![predict_one_step(&model, &seed).unwrap()]);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig { batch_size: 0, ..Default::default() },
            TrainConfig { plateau_factor: 1.0, ..Default::default() },
            TrainConfig { min_learning_rate: 0.0, ..Default::default() },
            TrainConfig { dropout_rate: 1.0, ..Default::default() },
            TrainConfig { train_fraction: 0.0, ..Default::default() },
            TrainConfig { layer_sizes: vec![], ..Default::default() },
        ] {
            assert!(matches!(bad.validate(), Err(Error::Config(_))), "{bad:?}");
        }
    }
}

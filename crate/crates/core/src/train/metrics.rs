//! Regression losses and error metrics in price units.

use rayon::prelude::*;

use super::Forecaster;
use crate::error::{Error, Result};
use crate::preprocess::{Scaler, WindowedDataset};

fn check_lengths(predictions: &[f64], targets: &[f64]) -> Result<()> {
    if predictions.is_empty() || predictions.len() != targets.len() {
        return Err(Error::Shape(format!(
            "need equal non-empty lengths, got {} predictions and {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    Ok(())
}

pub fn mse_loss(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(predictions, targets)?;
    let sum: f64 = predictions.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(sum / predictions.len() as f64)
}

pub fn mae(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    check_lengths(predictions, targets)?;
    let sum: f64 = predictions.iter().zip(targets).map(|(p, t)| (p - t).abs()).sum();
    Ok(sum / predictions.len() as f64)
}

pub fn rmse(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    mse_loss(predictions, targets).map(f64::sqrt)
}

/// Errors in USD/barrel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub mae: f64,
    pub rmse: f64,
}

impl Metrics {
    pub fn compute(predictions: &[f64], targets: &[f64]) -> Result<Self> {
        Ok(Self { mae: mae(predictions, targets)?, rmse: rmse(predictions, targets)? })
    }
}

/// Undo min-max scaling, then exponentiate when the series was log-transformed.
pub fn denormalize(values: &[f64], scaler: &Scaler, log_scale: bool) -> Vec<f64> {
    values
        .iter()
        .map(|&u| {
            let v = scaler.inverse(u);
            if log_scale {
                v.exp()
            } else {
                v
            }
        })
        .collect()
}

/// Model predictions for every window, in order.
pub fn predict_dataset(model: &Forecaster, dataset: &WindowedDataset) -> Result<Vec<f64>> {
    dataset.inputs.par_iter().map(|w| model.predict_one_step(w)).collect()
}

/// MAE and RMSE after mapping predictions and targets back to prices.
pub fn evaluate(model: &Forecaster, dataset: &WindowedDataset, scaler: &Scaler, log_scale: bool) -> Result<Metrics> {
    if dataset.is_empty() {
        return Err(Error::Usage("cannot evaluate on an empty dataset".into()));
    }
    let predictions = predict_dataset(model, dataset)?;
    evaluate_predictions(&predictions, &dataset.targets, scaler, log_scale)
}

/// Same as [`evaluate`] for precomputed normalized predictions.
pub fn evaluate_predictions(predictions: &[f64], targets: &[f64], scaler: &Scaler, log_scale: bool) -> Result<Metrics> {
    let p = denormalize(predictions, scaler, log_scale);
    let t = denormalize(targets, scaler, log_scale);
    Metrics::compute(&p, &t)
}

/// Metrics of the naive forecaster that repeats each window's last value.
pub fn persistence_baseline(dataset: &WindowedDataset, scaler: &Scaler, log_scale: bool) -> Result<Metrics> {
    if dataset.is_empty() {
        return Err(Error::Usage("cannot evaluate on an empty dataset".into()));
    }
    evaluate_predictions(&dataset.last_inputs(), &dataset.targets, scaler, log_scale)
}

//! End-to-end data preparation and figure payloads.
//!
//! Order of operations: optional log transform, chronological split,
//! scaler fit (training portion by default), min-max scaling, windowing.
//! When `validation_fraction` is zero the test windows double as the
//! validation set that drives the plateau scheduler.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::preprocess::{apply_scaler, fit_scaler, make_windows, split_train_test, Scaler, WindowedDataset};
use crate::series::{log_transform, PriceSeries, ScaleKind};
use crate::train::{denormalize, predict_dataset, Forecaster, ScalerFit, TrainConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub scaler: Scaler,
    /// Values were log prices; denormalization exponentiates.
    pub log_scale: bool,
    pub train: WindowedDataset,
    pub validation: WindowedDataset,
    pub test: WindowedDataset,
    /// `validation` is a copy of `test`.
    pub validation_is_test: bool,
    /// Whole series after the optional log, before scaling.
    pub transformed: Vec<f64>,
}

/// Prepare a price series according to `config`. Pass `scaler` to reuse a
/// previously fitted map (evaluation of a checkpoint).
pub fn prepare_series(series: &PriceSeries, config: &TrainConfig, scaler: Option<Scaler>) -> Result<PreparedData> {
    let (values, log_scale) = match (config.log_transform, series.scale()) {
        (true, ScaleKind::Raw) => (log_transform(series, false)?.values(), true),
        (_, ScaleKind::Log) => (series.values(), true),
        (false, ScaleKind::Raw) => (series.values(), false),
    };
    prepare_values(&values, log_scale, config, scaler)
}

/// Same as [`prepare_series`] for an untagged vector.
pub fn prepare_values(values: &[f64], log_scale: bool, config: &TrainConfig, scaler: Option<Scaler>) -> Result<PreparedData> {
    let (train_all, test) = split_train_test(values, config.train_fraction)?;
    let (train, validation) = if config.validation_fraction > 0.0 {
        let (t, v) = split_train_test(&train_all, 1.0 - config.validation_fraction)?;
        (t, Some(v))
    } else {
        (train_all, None)
    };

    let scaler = match scaler {
        Some(s) => s,
        None => match config.scaler_fit {
            ScalerFit::Train => fit_scaler(&train)?,
            ScalerFit::Full => fit_scaler(values)?,
        },
    };

    let window = |part: &[f64], name: &str| {
        make_windows(&apply_scaler(part, &scaler, false), config.window_len).map_err(|e| match e {
            Error::InsufficientData { len, window } => Error::Split(format!(
                "{name} portion has {len} values, not enough for a window of {window}"
            )),
            other => other,
        })
    };
    let train_ds = window(&train, "training")?;
    let test_ds = window(&test, "test")?;
    let (validation_ds, validation_is_test) = match validation {
        Some(v) => (window(&v, "validation")?, false),
        None => (test_ds.clone(), true),
    };

    Ok(PreparedData {
        scaler,
        log_scale,
        train: train_ds,
        validation: validation_ds,
        test: test_ds,
        validation_is_test,
        transformed: values.to_vec(),
    })
}

/// `(actual, predicted)` in price units for every window of `dataset`.
pub fn prediction_table(
    model: &Forecaster,
    dataset: &WindowedDataset,
    scaler: &Scaler,
    log_scale: bool,
) -> Result<Vec<(f64, f64)>> {
    let predicted = denormalize(&predict_dataset(model, dataset)?, scaler, log_scale);
    let actual = denormalize(&dataset.targets, scaler, log_scale);
    Ok(actual.into_iter().zip(predicted).collect())
}

/// `step,actual,predicted`, steps counted from 0.
pub fn predictions_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("step,actual,predicted\n");
    for (k, (a, p)) in rows.iter().enumerate() {
        let _ = writeln!(out, "{k},{a},{p}");
    }
    out
}

/// `step,predicted`, steps counted from 1 past the last observation.
pub fn forecast_csv(values: &[f64]) -> String {
    let mut out = String::from("step,predicted\n");
    for (k, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{},{v}", k + 1);
    }
    out
}

/// Normalized last window of the full transformed series.
pub fn latest_window(data: &PreparedData, window_len: usize) -> Result<Vec<f64>> {
    if data.transformed.len() < window_len {
        return Err(Error::InsufficientData { len: data.transformed.len(), window: window_len });
    }
    let tail = &data.transformed[data.transformed.len() - window_len..];
    Ok(apply_scaler(tail, &data.scaler, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::brent_like_series;

    fn cfg() -> TrainConfig {
        TrainConfig { window_len: 10, ..TrainConfig::default() }
    }

    #[test]
    fn default_split_and_log() {
        let s = brent_like_series(100, 1);
        let d = prepare_series(&s, &cfg(), None).unwrap();
        assert!(d.log_scale);
        assert!(d.validation_is_test);
        assert_eq!(d.train.len(), 70 - 10);
        assert_eq!(d.test.len(), 30 - 10);
        assert_eq!(d.validation, d.test);
        // scaler fitted on the log training portion
        let logs: Vec<f64> = s.values()[..70].iter().map(|v| v.ln()).collect();
        assert_eq!(d.scaler, fit_scaler(&logs).unwrap());
        assert!(d.train.inputs.iter().flatten().all(|&u| (0.0..=1.0).contains(&u)));
    }

    #[test]
    fn three_way_and_full_fit() {
        let s = brent_like_series(200, 2);
        let c = TrainConfig { validation_fraction: 0.25, scaler_fit: ScalerFit::Full, log_transform: false, ..cfg() };
        let d = prepare_series(&s, &c, None).unwrap();
        assert!(!d.log_scale);
        assert!(!d.validation_is_test);
        // 140 train-all -> 105 train + 35 validation; 60 test
        assert_eq!(d.train.len(), 95);
        assert_eq!(d.validation.len(), 25);
        assert_eq!(d.test.len(), 50);
        assert_eq!(d.scaler, fit_scaler(&s.values()).unwrap());
    }

    #[test]
    fn short_test_portion_is_reported() {
        let s = brent_like_series(30, 3);
        assert!(matches!(prepare_series(&s, &cfg(), None), Err(Error::Split(_))));
    }

    #[test]
    fn csv_payloads() {
        let text = predictions_csv(&[(1.0, 1.5), (2.0, 2.5)]);
        assert_eq!(text, "step,actual,predicted\n0,1,1.5\n1,2,2.5\n");
        assert_eq!(forecast_csv(&[3.0]), "step,predicted\n1,3\n");
    }
}

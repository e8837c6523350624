//! Min-max scaling, chronological train/test splitting and sliding windows.

use crate::error::{Error, Result};

/// Affine map `v -> (v - min) / (max - min)` fitted on a reference vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaler {
    min: f64,
    max: f64,
}

impl Scaler {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::Domain(format!("scaler bounds must be finite ({min}, {max})")));
        }
        if max <= min {
            return Err(Error::DegenerateScale(2));
        }
        Ok(Self { min, max })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    pub fn forward(&self, v: f64) -> f64 {
        (v - self.min) / self.range()
    }

    pub fn inverse(&self, u: f64) -> f64 {
        self.min + u * self.range()
    }
}

/// Fit a scaler to the extrema of `values`.
pub fn fit_scaler(values: &[f64]) -> Result<Scaler> {
    if values.len() < 2 {
        return Err(Error::Shape(format!(
            "fitting a scaler needs at least 2 values, got {}",
            values.len()
        )));
    }
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if min == max {
        return Err(Error::DegenerateScale(values.len()));
    }
    Scaler::new(min, max)
}

/// Scale (`inverse == false`) or unscale every value.
pub fn apply_scaler(values: &[f64], scaler: &Scaler, inverse: bool) -> Vec<f64> {
    if inverse {
        values.iter().map(|&u| scaler.inverse(u)).collect()
    } else {
        values.iter().map(|&v| scaler.forward(v)).collect()
    }
}

/// Chronological split: the first `floor(len * train_fraction)` values train,
/// the rest test.
pub fn split_train_test(values: &[f64], train_fraction: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Split(format!("train fraction {train_fraction} is not in (0, 1)")));
    }
    if values.len() < 2 {
        return Err(Error::Split(format!("cannot split {} values", values.len())));
    }
    let cut = (values.len() as f64 * train_fraction).floor() as usize;
    if cut == 0 || cut == values.len() {
        return Err(Error::Split(format!(
            "fraction {train_fraction} of {} values leaves one side empty",
            values.len()
        )));
    }
    Ok((values[..cut].to_vec(), values[cut..].to_vec()))
}

/// Supervised samples built with stride 1.
///
/// `inputs[k] = source[k..k + window_len]` and `targets[k] = source[k + window_len]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedDataset {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub window_len: usize,
}

impl WindowedDataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Most recent observed value of every window (the persistence forecast).
    pub fn last_inputs(&self) -> Vec<f64> {
        self.inputs.iter().map(|w| w[w.len() - 1]).collect()
    }
}

pub const DEFAULT_WINDOW_LEN: usize = 90;

pub fn make_windows(values: &[f64], window_len: usize) -> Result<WindowedDataset> {
    if window_len == 0 {
        return Err(Error::Config("window length must be at least 1".into()));
    }
    if values.len() <= window_len {
        return Err(Error::InsufficientData { len: values.len(), window: window_len });
    }
    let inputs = values.windows(window_len).take(values.len() - window_len).map(<[f64]>::to_vec).collect();
    let targets = values[window_len..].to_vec();
    Ok(WindowedDataset { inputs, targets, window_len })
}

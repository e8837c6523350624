//! Crude oil price forecasting toolkit.
//!
//! * [`series`]: `date,price` CSV ingestion, slicing, monthly resampling, log transform.
//! * [`preprocess`]: min-max scaling, chronological split, sliding windows.
//! * [`lstm`]: stacked LSTM with dropout, exact BPTT and finite-difference checks.
//! * [`train`]: MSE + Adam + reduce-on-plateau training, forecasting, MAE/RMSE, checkpoints.
//! * [`gbm`]: geometric Brownian motion calibration and seeded path simulation.
//! * [`pipeline`]: the full preparation chain and plot-ready CSV payloads.
//! * [`cli`]: the `oilcast` command-line front end.
//!
//! Runnable walkthroughs live in this crate's `examples/` directory.

pub mod cli;
pub mod error;
pub mod gbm;
pub mod lstm;
pub mod pipeline;
pub mod preprocess;
pub mod rng;
pub mod series;
pub mod synthetic;
pub mod train;

pub use error::{Error, Result};

//! Train on log prices, then roll the model forward past the last
//! observation by feeding predictions back in.

use oilcast::pipeline::{latest_window, prepare_series};
use oilcast::preprocess::apply_scaler;
use oilcast::synthetic::brent_like_series;
use oilcast::train::{fit, TrainConfig};

fn main() -> oilcast::Result<()> {
    let series = brent_like_series(300, 5);
    let config = TrainConfig { window_len: 20, layer_sizes: vec![12, 12], epochs: 8, seed: 2, ..TrainConfig::default() };
    let data = prepare_series(&series, &config, None)?;
    let outcome = fit(&data.train, &data.validation, &config)?;

    let seed = latest_window(&data, config.window_len)?;
    let normalized = outcome.model.forecast_recursive(&seed, 10)?;
    let prices: Vec<f64> = apply_scaler(&normalized, &data.scaler, true).into_iter().map(f64::exp).collect();
    println!("last observed {:.3}", series.values().last().unwrap());
    for (k, p) in prices.iter().enumerate() {
        println!("t+{:<2} {p:.3}", k + 1);
    }
    Ok(())
}

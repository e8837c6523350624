//! Fit a small LSTM to a sine wave and compare it with the persistence
//! baseline.

use oilcast::pipeline::prepare_values;
use oilcast::synthetic::sine_wave;
use oilcast::train::{evaluate, fit, persistence_baseline, TrainConfig};

fn main() -> oilcast::Result<()> {
    let values = sine_wave(400, 50.0, 1.0, 0.0);
    let config = TrainConfig {
        window_len: 16,
        layer_sizes: vec![16, 16],
        dropout_rate: 0.0,
        epochs: 30,
        seed: 42,
        log_transform: false,
        ..TrainConfig::default()
    };
    let data = prepare_values(&values, false, &config, None)?;
    let outcome = fit(&data.train, &data.validation, &config)?;
    for r in &outcome.log.records {
        println!("epoch {:>2}  train {:.3e}  val {:.3e}  lr {:.1e}", r.epoch, r.train_loss, r.val_loss, r.lr);
    }
    let model = evaluate(&outcome.model, &data.test, &data.scaler, false)?;
    let naive = persistence_baseline(&data.test, &data.scaler, false)?;
    println!("lstm        mae {:.5} rmse {:.5}", model.mae, model.rmse);
    println!("persistence mae {:.5} rmse {:.5}", naive.mae, naive.rmse);
    Ok(())
}

//! Save a trained model to the text checkpoint format and load it back.

use oilcast::pipeline::prepare_series;
use oilcast::synthetic::brent_like_series;
use oilcast::train::{evaluate, fit, load_checkpoint, save_checkpoint, TrainConfig};

fn main() -> oilcast::Result<()> {
    let series = brent_like_series(200, 9);
    let config = TrainConfig { window_len: 12, layer_sizes: vec![6], epochs: 3, ..TrainConfig::default() };
    let data = prepare_series(&series, &config, None)?;
    let outcome = fit(&data.train, &data.validation, &config)?;

    let bytes = save_checkpoint(&outcome.model, &data.scaler, &config);
    let text = String::from_utf8_lossy(&bytes);
    for line in text.lines().take(6) {
        println!("{line}");
    }
    println!("... {} bytes", bytes.len());

    let restored = load_checkpoint(&bytes)?;
    let before = evaluate(&outcome.model, &data.test, &data.scaler, data.log_scale)?;
    let after = evaluate(&restored.model, &data.test, &restored.scaler, data.log_scale)?;
    println!("before {before:?}\nafter  {after:?}");
    assert_eq!(before, after);

    let truncated = &bytes[..bytes.len() / 2];
    println!("truncated: {}", load_checkpoint(truncated).unwrap_err());
    Ok(())
}

//! Calibrate a geometric Brownian motion to a price history and simulate
//! a fan of future paths.

use oilcast::gbm::{estimate_gbm, mean_path, path_std, simulate_paths, DEFAULT_DT, DEFAULT_NUM_PATHS};
use oilcast::synthetic::brent_like_series;

fn main() -> oilcast::Result<()> {
    let history = brent_like_series(750, 3);
    let model = estimate_gbm(&history, DEFAULT_DT)?;
    println!("mu {:.4} sigma {:.4} s0 {:.2}", model.mu, model.sigma, model.s0);

    let paths = simulate_paths(&model, 60, DEFAULT_NUM_PATHS, 42)?;
    let mean = mean_path(&paths);
    let std = path_std(&paths);
    for t in (0..=60).step_by(10) {
        println!(
            "day {t:>2}  mean {:>7.3}  std {:>6.3}  analytic {:>7.3}",
            mean[t],
            std[t],
            model.expected_price(t)
        );
    }
    Ok(())
}

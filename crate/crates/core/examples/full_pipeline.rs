//! The full recipe through the command-line front end: monthly history,
//! GBM fan, training log and test predictions, written to a directory.
//!
//! ```text
//! cargo run --release --example full_pipeline -- out/ [prices.csv] [epochs]
//! ```

use std::path::PathBuf;

use oilcast::cli;
use oilcast::series::write_series_csv;
use oilcast::synthetic::brent_like_series;

fn step(args: &[&str]) {
    let mut argv = vec!["oilcast"];
    argv.extend_from_slice(args);
    let outcome = cli::run(argv);
    print!("{}", outcome.stdout);
    for m in &outcome.messages {
        eprintln!("{m}");
    }
    if outcome.exit_code != 0 {
        std::process::exit(outcome.exit_code);
    }
}

fn main() -> std::io::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = PathBuf::from(args.first().map(String::as_str).unwrap_or("figures"));
    std::fs::create_dir_all(&dir)?;
    let input = match args.get(1) {
        Some(p) => PathBuf::from(p),
        None => {
            let p = dir.join("prices.csv");
            std::fs::write(&p, write_series_csv(&brent_like_series(500, 2018)))?;
            p
        }
    };
    let epochs = args.get(2).cloned().unwrap_or_else(|| "3".into());
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let input = input.to_string_lossy().into_owned();
    let ckpt = path("model.ckpt");

    step(&["describe", "--input", &input, "--monthly", "--out", &path("monthly.csv")]);
    step(&["gbm", "--input", &input, "--out", &path("gbm_paths.csv")]);
    step(&["train", "--input", &input, "--epochs", &epochs, "--checkpoint", &ckpt, "--out", &path("train_log.csv")]);
    step(&["export", "--input", &input, "--checkpoint", &ckpt, "--out", &path("predictions.csv")]);
    step(&["forecast", "--input", &input, "--checkpoint", &ckpt, "--horizon", "5"]);
    Ok(())
}

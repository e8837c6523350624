//! Load a daily price CSV, slice a date range and resample to monthly means.
//!
//! ```text
//! cargo run --example describe_monthly -- prices.csv 2019-01-01 2019-12-31
//! ```
//! Without arguments a synthetic series is used.

use chrono::NaiveDate;
use oilcast::series::{parse_price_csv, resample_monthly, slice_date_range, write_series_csv};
use oilcast::synthetic::brent_like_series;

fn main() -> oilcast::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let series = match args.first() {
        Some(path) => parse_price_csv(&std::fs::read_to_string(path)?)?,
        None => brent_like_series(520, 1),
    };
    let date = |i: usize, default: NaiveDate| {
        args.get(i).map(|s| NaiveDate::parse_from_str(s, "%Y-%m-%d").expect("date as YYYY-MM-DD")).unwrap_or(default)
    };
    let start = date(1, series.first_date());
    let end = date(2, series.last_date());

    let window = slice_date_range(&series, start, end)?;
    let monthly = resample_monthly(&window);
    println!("{} daily observations -> {} months", window.len(), monthly.len());
    print!("{}", write_series_csv(&monthly));
    Ok(())
}

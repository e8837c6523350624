//! Synthetic daily price series for demos and tests.

use chrono::{Datelike, Duration, NaiveDate, Weekday};

use crate::gbm::{simulate_paths, GbmModel, DEFAULT_DT};
use crate::series::{Observation, PriceSeries, ScaleKind};

/// `n` consecutive weekdays starting at `start` (or the next weekday).
pub fn weekdays(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// A Brent-like daily series: GBM from 66.65 USD/barrel with zero drift and
/// 30% annual volatility, on weekdays from 2018-01-01.
pub fn brent_like_series(n: usize, seed: u64) -> PriceSeries {
    let model = GbmModel::new(0.0, 0.3, 66.65, DEFAULT_DT).expect("valid parameters");
    let path = simulate_paths(&model, n.max(2) - 1, 1, seed).expect("valid horizon");
    let dates = weekdays(NaiveDate::from_ymd_opt(2018, 1, 1).expect("valid date"), n);
    let obs = dates
        .into_iter()
        .zip(path.path(0))
        .map(|(date, &value)| Observation { date, value })
        .collect();
    PriceSeries::new(obs, ScaleKind::Raw).expect("GBM prices are positive")
}

/// `offset + amplitude · sin(2π t / period)` for `t = 0..n`.
pub fn sine_wave(n: usize, period: f64, amplitude: f64, offset: f64) -> Vec<f64> {
    (0..n)
        .map(|t| offset + amplitude * (std::f64::consts::TAU * t as f64 / period).sin())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weekday_calendar() {
        let d = weekdays(NaiveDate::from_ymd_opt(2018, 1, 5).unwrap(), 3);
        // Friday, then Monday and Tuesday
        assert_eq!(d.iter().map(|x| x.day()).collect::<Vec<_>>(), vec![5, 8, 9]);
    }

    #[test]
    fn brent_like_is_reproducible() {
        let a = brent_like_series(500, 9);
        assert_eq!(a.len(), 500);
        assert_eq!(a.values()[0], 66.65);
        assert_eq!(a, brent_like_series(500, 9));
        assert_ne!(a, brent_like_series(500, 10));
    }
}

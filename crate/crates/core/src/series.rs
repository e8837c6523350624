//! Daily price series: CSV ingestion, date slicing, monthly resampling,
//! log transform and CSV export.
//!
//! The on-disk format is two columns with a mandatory header:
//!
//! ```text
//! date,price
//! 2018-01-01,66.65
//! 2018-01-02,66.57
//! ```
//!
//! Dates are ISO-8601 calendar dates without a time zone. Non-trading days
//! are simply absent. Either LF or CRLF is accepted on read; LF is written.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "date,price";

/// Significant digits used when writing prices.
pub const CSV_SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleKind {
    /// USD/barrel.
    Raw,
    /// Natural log of USD/barrel.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub date: NaiveDate,
    pub value: f64,
}

/// Ordered, duplicate-free sequence of dated observations.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    observations: Vec<Observation>,
    scale: ScaleKind,
}

impl PriceSeries {
    /// Build a series, checking ordering, length and positivity for raw data.
    pub fn new(observations: Vec<Observation>, scale: ScaleKind) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::Domain("a price series needs at least one observation".into()));
        }
        for (k, pair) in observations.windows(2).enumerate() {
            if pair[1].date <= pair[0].date {
                return Err(Error::Domain(format!(
                    "dates must be strictly increasing (index {}: {} after {})",
                    k + 1,
                    pair[1].date,
                    pair[0].date
                )));
            }
        }
        for obs in &observations {
            if !obs.value.is_finite() {
                return Err(Error::Domain(format!("non-finite value on {}", obs.date)));
            }
            if scale == ScaleKind::Raw && obs.value <= 0.0 {
                return Err(Error::Domain(format!(
                    "non-positive price {} on {}",
                    obs.value, obs.date
                )));
            }
        }
        Ok(Self { observations, scale })
    }

    /// Convenience constructor from parallel date/value slices.
    pub fn from_pairs(dates: &[NaiveDate], values: &[f64], scale: ScaleKind) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        let obs = dates
            .iter()
            .zip(values)
            .map(|(&date, &value)| Observation { date, value })
            .collect();
        Self::new(obs, scale)
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn scale(&self) -> ScaleKind {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.value).collect()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.observations.iter().map(|o| o.date).collect()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.observations[0].date
    }

    pub fn last_date(&self) -> NaiveDate {
        self.observations[self.observations.len() - 1].date
    }
}

/// Parse `date,price` CSV text into a raw series sorted by date.
///
/// Row numbers in errors count data rows from 1 (the header is row 0).
pub fn parse_price_csv(text: &str) -> Result<PriceSeries> {
    let mut lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header = lines.next().unwrap_or("");
    if header.trim() != CSV_HEADER {
        return Err(Error::Parse {
            row: 0,
            msg: format!("expected header `{CSV_HEADER}`, found `{}`", header.trim()),
        });
    }

    let mut rows: Vec<(usize, Observation)> = Vec::new();
    for (idx, line) in lines.enumerate() {
        let row = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (date_field, price_field) = line.split_once(',').ok_or_else(|| Error::Parse {
            row,
            msg: "expected two comma-separated fields".into(),
        })?;
        if price_field.contains(',') {
            return Err(Error::Parse { row, msg: "too many fields".into() });
        }
        let date = NaiveDate::parse_from_str(date_field.trim(), "%Y-%m-%d").map_err(|e| {
            Error::Parse { row, msg: format!("bad date `{}`: {e}", date_field.trim()) }
        })?;
        let value: f64 = price_field.trim().parse().map_err(|_| Error::Parse {
            row,
            msg: format!("bad price `{}`", price_field.trim()),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse { row, msg: format!("non-finite price `{}`", price_field.trim()) });
        }
        if value <= 0.0 {
            return Err(Error::Domain(format!("non-positive price {value} at row {row}")));
        }
        rows.push((row, Observation { date, value }));
    }

    if rows.is_empty() {
        return Err(Error::Parse { row: 1, msg: "no data rows".into() });
    }

    rows.sort_by_key(|(_, obs)| obs.date);
    for pair in rows.windows(2) {
        if pair[0].1.date == pair[1].1.date {
            let row = pair[0].0.max(pair[1].0);
            return Err(Error::DuplicateDate { row, date: pair[1].1.date });
        }
    }

    PriceSeries::new(rows.into_iter().map(|(_, o)| o).collect(), ScaleKind::Raw)
}

/// Observations with `start <= date <= end`.
pub fn slice_date_range(series: &PriceSeries, start: NaiveDate, end: NaiveDate) -> Result<PriceSeries> {
    if start > end {
        return Err(Error::Usage(format!("slice start {start} is after end {end}")));
    }
    let kept: Vec<Observation> = series
        .observations
        .iter()
        .copied()
        .filter(|o| o.date >= start && o.date <= end)
        .collect();
    if kept.is_empty() {
        return Err(Error::EmptySlice { start, end });
    }
    Ok(PriceSeries { observations: kept, scale: series.scale })
}

/// One point per calendar month present in the input, dated the 1st, holding
/// the arithmetic mean of that month's values.
pub fn resample_monthly(series: &PriceSeries) -> PriceSeries {
    let mut months: BTreeMap<(i32, u32), (f64, usize)> = BTreeMap::new();
    for obs in &series.observations {
        let slot = months.entry((obs.date.year(), obs.date.month())).or_insert((0.0, 0));
        slot.0 += obs.value;
        slot.1 += 1;
    }
    let observations = months
        .into_iter()
        .map(|((year, month), (sum, count))| Observation {
            date: NaiveDate::from_ymd_opt(year, month, 1).expect("valid first-of-month"),
            value: sum / count as f64,
        })
        .collect();
    PriceSeries { observations, scale: series.scale }
}

/// Natural log (forward) or exp (inverse) of every value.
pub fn log_transform(series: &PriceSeries, inverse: bool) -> Result<PriceSeries> {
    let (expected, target) = if inverse {
        (ScaleKind::Log, ScaleKind::Raw)
    } else {
        (ScaleKind::Raw, ScaleKind::Log)
    };
    if series.scale != expected {
        return Err(Error::ScaleMismatch { expected, found: series.scale });
    }
    let map: fn(f64) -> f64 = if inverse { f64::exp } else { f64::ln };
    let observations = series
        .observations
        .iter()
        .map(|o| Observation { date: o.date, value: map(o.value) })
        .collect();
    PriceSeries::new(observations, target)
}

/// Render a value with at most 12 significant digits, in plain decimal form.
pub fn format_value(value: f64) -> String {
    let rounded: f64 = format!("{:.*e}", CSV_SIGNIFICANT_DIGITS - 1, value)
        .parse()
        .expect("formatted float parses");
    format!("{rounded}")
}

/// Write the series in the same format [`parse_price_csv`] reads.
pub fn write_series_csv(series: &PriceSeries) -> String {
    assert!(!series.is_empty(), "cannot write an empty series");
    let mut out = String::with_capacity(series.len() * 24);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for obs in &series.observations {
        let _ = writeln!(out, "{},{}", obs.date.format("%Y-%m-%d"), format_value(obs.value));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn series(points: &[((i32, u32, u32), f64)]) -> PriceSeries {
        let obs = points
            .iter()
            .map(|&((y, m, day), value)| Observation { date: d(y, m, day), value })
            .collect();
        PriceSeries::new(obs, ScaleKind::Raw).unwrap()
    }

    #[test]
    fn parses_two_rows() {
        let s = parse_price_csv("date,price\n2018-01-01,66.65\n2018-01-02,66.57").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.scale(), ScaleKind::Raw);
        assert_eq!(s.values(), vec![66.65, 66.57]);
        assert_eq!(s.first_date(), d(2018, 1, 1));
    }

    #[test]
    fn crlf_blank_lines_and_unsorted_rows() {
        let s = parse_price_csv("date,price\r\n2018-01-03,3\r\n\r\n2018-01-01,1\r\n2018-01-02,2\r\n").unwrap();
        assert_eq!(s.values(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn malformed_price_names_the_row() {
        match parse_price_csv("date,price\n2018-01-01,abc") {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 1),
            other => panic!("unexpected {other:?}"),
        }
        match parse_price_csv("date,price\n2018-01-01,1\n2018-13-01,2") {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_positive_price_is_a_domain_error() {
        assert!(matches!(parse_price_csv("date,price\n2018-01-01,-5.0"), Err(Error::Domain(_))));
        assert!(matches!(parse_price_csv("date,price\n2018-01-01,0"), Err(Error::Domain(_))));
    }

    #[test]
    fn duplicate_and_header_errors() {
        assert!(matches!(
            parse_price_csv("date,price\n2018-01-01,1\n2018-01-01,2"),
            Err(Error::DuplicateDate { .. })
        ));
        assert!(matches!(parse_price_csv("2018-01-01,1"), Err(Error::Parse { row: 0, .. })));
        assert!(matches!(parse_price_csv("date,price\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn slicing() {
        let s = series(&[((2018, 1, 1), 1.0), ((2018, 1, 2), 2.0), ((2018, 1, 3), 3.0)]);
        let sub = slice_date_range(&s, d(2018, 1, 2), d(2018, 1, 3)).unwrap();
        assert_eq!(sub.values(), vec![2.0, 3.0]);
        assert_eq!(slice_date_range(&s, d(2017, 1, 1), d(2019, 1, 1)).unwrap(), s);
        assert!(matches!(
            slice_date_range(&s, d(2018, 2, 1), d(2018, 2, 2)),
            Err(Error::EmptySlice { .. })
        ));
        assert!(matches!(slice_date_range(&s, d(2018, 2, 1), d(2018, 1, 2)), Err(Error::Usage(_))));
    }

    #[test]
    fn monthly_means() {
        let s = series(&[((2018, 1, 5), 10.0), ((2018, 1, 20), 20.0), ((2018, 3, 2), 30.0)]);
        let m = resample_monthly(&s);
        assert_eq!(m.dates(), vec![d(2018, 1, 1), d(2018, 3, 1)]);
        assert_eq!(m.values(), vec![15.0, 30.0]);

        let single = series(&[((2019, 7, 17), 42.5)]);
        let m = resample_monthly(&single);
        assert_eq!(m.values(), vec![42.5]);
        assert_eq!(m.first_date(), d(2019, 7, 1));
    }

    #[test]
    fn log_values_and_scale_tags() {
        let s = series(&[((2018, 1, 1), 1.0), ((2018, 1, 2), std::f64::consts::E)]);
        let l = log_transform(&s, false).unwrap();
        assert_eq!(l.scale(), ScaleKind::Log);
        assert_eq!(l.values()[0], 0.0);
        assert!((l.values()[1] - 1.0).abs() < 1e-12);
        assert!(matches!(log_transform(&l, false), Err(Error::ScaleMismatch { .. })));
        assert!(matches!(log_transform(&s, true), Err(Error::ScaleMismatch { .. })));
        let back = log_transform(&l, true).unwrap();
        for (a, b) in back.values().iter().zip(s.values()) {
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
    }

    #[test]
    fn write_emits_header_plus_rows() {
        let s = series(&[((2018, 1, 1), 66.65), ((2018, 1, 2), 66.57)]);
        let text = write_series_csv(&s);
        assert_eq!(text, "date,price\n2018-01-01,66.65\n2018-01-02,66.57\n");
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn value_formatting_is_decimal_with_twelve_digits() {
        assert_eq!(format_value(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_value(123456.7890123456), "123456.789012");
        assert_eq!(format_value(0.0000012345), "0.0000012345");
    }

    fn arb_series() -> impl Strategy<Value = PriceSeries> {
        prop::collection::btree_map(0i64..5000, 1e-3f64..1e4, 1..60).prop_map(|m| {
            let base = d(2000, 1, 1);
            let obs = m
                .into_iter()
                .map(|(off, value)| Observation { date: base + chrono::Duration::days(off), value })
                .collect();
            PriceSeries::new(obs, ScaleKind::Raw).unwrap()
        })
    }

    proptest! {
        #[test]
        fn csv_round_trip(s in arb_series()) {
            let text = write_series_csv(&s);
            let back = parse_price_csv(&text).unwrap();
            prop_assert_eq!(back.dates(), s.dates());
            for (a, b) in back.values().iter().zip(s.values()) {
                // 12 significant digits: half an ulp of the 12th digit
                prop_assert!((a - b).abs() <= 5e-12 * b.abs());
            }
            // write∘parse is exact once values carry at most 12 digits
            prop_assert_eq!(write_series_csv(&back), text);
        }

        #[test]
        fn monthly_stays_within_month_extrema(s in arb_series()) {
            let m = resample_monthly(&s);
            prop_assert!(m.len() <= s.len());
            for obs in m.observations() {
                let month: Vec<f64> = s.observations().iter()
                    .filter(|o| o.date.year() == obs.date.year() && o.date.month() == obs.date.month())
                    .map(|o| o.value)
                    .collect();
                let lo = month.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = month.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(obs.value >= lo * (1.0 - 1e-12) && obs.value <= hi * (1.0 + 1e-12));
            }
        }

        #[test]
        fn log_round_trip(s in arb_series()) {
            let there = log_transform(&s, false).unwrap();
            let back = log_transform(&there, true).unwrap();
            for (a, b) in back.values().iter().zip(s.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs());
            }
            let again = log_transform(&back, false).unwrap();
            for (a, b) in again.values().iter().zip(there.values()) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300) || (a - b).abs() < 1e-15);
            }
        }

        #[test]
        fn slicing_is_idempotent(s in arb_series(), a in 0i64..5000, len in 0i64..5000) {
            let start = d(2000, 1, 1) + chrono::Duration::days(a);
            let end = start + chrono::Duration::days(len);
            if let Ok(once) = slice_date_range(&s, start, end) {
                prop_assert_eq!(slice_date_range(&once, start, end).unwrap(), once);
            }
        }
    }
}

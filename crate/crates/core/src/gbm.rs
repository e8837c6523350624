//! Geometric Brownian motion: calibration from log returns and seeded
//! Monte Carlo path simulation.

use std::fmt::Write as _;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::series::{PriceSeries, ScaleKind};
use crate::rng;

/// One trading year in days.
pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;
pub const DEFAULT_DT: f64 = 1.0 / TRADING_DAYS_PER_YEAR;
pub const DEFAULT_NUM_PATHS: usize = 50;

/// `dS = μ S dt + σ S dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmModel {
    pub mu: f64,
    pub sigma: f64,
    pub s0: f64,
    pub dt: f64,
}

impl GbmModel {
    pub fn new(mu: f64, sigma: f64, s0: f64, dt: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::Domain(format!("drift {mu} is not finite")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("volatility {sigma} must be finite and non-negative")));
        }
        if !(s0 > 0.0 && s0.is_finite()) {
            return Err(Error::Domain(format!("initial price {s0} must be positive")));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("time step {dt} must be positive")));
        }
        Ok(Self { mu, sigma, s0, dt })
    }

    /// `E[S_t] = s0 · exp(μ · dt · step)`.
    pub fn expected_price(&self, step: usize) -> f64 {
        self.s0 * (self.mu * self.dt * step as f64).exp()
    }
}

/// Fit drift and volatility to a raw price series.
///
/// With log returns `r_i = ln(S_i / S_{i-1})`: `σ = std(r) / √dt` (n−1
/// denominator) and `μ = mean(r) / dt + σ² / 2`. The model starts from the
/// last observed price.
pub fn estimate_gbm(series: &PriceSeries, dt: f64) -> Result<GbmModel> {
    if series.scale() != ScaleKind::Raw {
        return Err(Error::ScaleMismatch { expected: ScaleKind::Raw, found: series.scale() });
    }
    if series.len() < 3 {
        return Err(Error::Calibration(format!("need at least 3 prices, got {}", series.len())));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Calibration(format!("time step {dt} must be positive")));
    }
    let values = series.values();
    estimate_from_prices(&values, dt)
}

fn estimate_from_prices(values: &[f64], dt: f64) -> Result<GbmModel> {
    let returns: Vec<f64> = values.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
    let sigma = var.sqrt() / dt.sqrt();
    let mu = mean / dt + 0.5 * sigma * sigma;
    GbmModel::new(mu, sigma, values[values.len() - 1], dt)
}

/// `num_paths × (horizon + 1)` prices; column 0 is `s0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathMatrix {
    paths: Vec<Vec<f64>>,
}

impl PathMatrix {
    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn horizon(&self) -> usize {
        self.paths[0].len() - 1
    }

    pub fn paths(&self) -> &[Vec<f64>] {
        &self.paths
    }

    pub fn path(&self, p: usize) -> &[f64] {
        &self.paths[p]
    }

    /// Export as `step,path_0,...,path_{n-1},mean`.
    pub fn to_csv(&self) -> String {
        let mean = mean_path(self);
        let mut out = String::from("step");
        for p in 0..self.num_paths() {
            let _ = write!(out, ",path_{p}");
        }
        out.push_str(",mean\n");
        for (t, m) in mean.iter().enumerate() {
            let _ = write!(out, "{t}");
            for path in &self.paths {
                let _ = write!(out, ",{}", path[t]);
            }
            let _ = writeln!(out, ",{m}");
        }
        out
    }
}

fn simulate_one(model: &GbmModel, horizon: usize, seed: u64, path: u64) -> Vec<f64> {
    let mut rng = rng::substream(seed, path);
    let drift = (model.mu - 0.5 * model.sigma * model.sigma) * model.dt;
    let shock = model.sigma * model.dt.sqrt();
    let mut out = Vec::with_capacity(horizon + 1);
    let mut s = model.s0;
    out.push(s);
    for _ in 0..horizon {
        let z: f64 = StandardNormal.sample(&mut rng);
        s *= (drift + shock * z).exp();
        out.push(s);
    }
    out
}

/// Exact log-Euler simulation; path `p` draws from substream `(seed, p)`, so
/// the result does not depend on thread count or evaluation order.
pub fn simulate_paths(model: &GbmModel, horizon: usize, num_paths: usize, seed: u64) -> Result<PathMatrix> {
    if horizon == 0 {
        return Err(Error::Usage("horizon must be at least 1".into()));
    }
    if num_paths == 0 {
        return Err(Error::Usage("need at least one path".into()));
    }
    let paths = (0..num_paths as u64)
        .into_par_iter()
        .map(|p| simulate_one(model, horizon, seed, p))
        .collect();
    Ok(PathMatrix { paths })
}

/// Per-step arithmetic mean across paths, summed in path order.
pub fn mean_path(paths: &PathMatrix) -> Vec<f64> {
    let n = paths.num_paths() as f64;
    let mut sum = vec![0.0; paths.horizon() + 1];
    for path in &paths.paths {
        for (s, v) in sum.iter_mut().zip(path) {
            *s += v;
        }
    }
    sum.into_iter().map(|s| s / n).collect()
}

/// Sample standard deviation across paths at every step.
pub fn path_std(paths: &PathMatrix) -> Vec<f64> {
    let mean = mean_path(paths);
    let n = paths.num_paths() as f64;
    let mut acc = vec![0.0; mean.len()];
    for path in &paths.paths {
        for ((a, v), m) in acc.iter_mut().zip(path).zip(&mean) {
            *a += (v - m) * (v - m);
        }
    }
    acc.into_iter().map(|a| (a / (n - 1.0).max(1.0)).sqrt()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn raw(values: &[f64]) -> PriceSeries {
        let base = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
        let dates: Vec<NaiveDate> = (0..values.len()).map(|i| base + chrono::Duration::days(i as i64)).collect();
        PriceSeries::from_pairs(&dates, values, ScaleKind::Raw).unwrap()
    }

    #[test]
    fn constant_series_has_no_drift_or_volatility() {
        let m = estimate_gbm(&raw(&[50.0, 50.0, 50.0]), 1.0).unwrap();
        assert_eq!((m.mu, m.sigma, m.s0), (0.0, 0.0, 50.0));
    }

    #[test]
    fn exponential_series_recovers_rate() {
        let values: Vec<f64> = (0..20).map(|i| (0.01 * i as f64).exp()).collect();
        let m = estimate_gbm(&raw(&values), 1.0).unwrap();
        assert!(m.sigma < 1e-9, "sigma {}", m.sigma);
        assert!((m.mu - 0.01).abs() < 1e-12);
        assert_eq!(m.s0, values[19]);
    }

    #[test]
    fn calibration_errors() {
        assert!(matches!(estimate_gbm(&raw(&[1.0, 2.0]), 1.0), Err(Error::Calibration(_))));
        assert!(matches!(estimate_gbm(&raw(&[1.0, 2.0, 3.0]), 0.0), Err(Error::Calibration(_))));
        let logs = crate::series::log_transform(&raw(&[1.0, 2.0, 3.0]), false).unwrap();
        assert!(matches!(estimate_gbm(&logs, 1.0), Err(Error::ScaleMismatch { .. })));
    }

    #[test]
    fn zero_volatility_paths_are_deterministic_exponentials() {
        let m = GbmModel::new(0.1, 0.0, 60.0, DEFAULT_DT).unwrap();
        let paths = simulate_paths(&m, 30, DEFAULT_NUM_PATHS, 1).unwrap();
        assert_eq!(paths.num_paths(), 50);
        for path in paths.paths() {
            assert_eq!(path, paths.path(0));
            for (t, &v) in path.iter().enumerate() {
                let exact = m.expected_price(t);
                assert!((v - exact).abs() <= 1e-12 * exact, "step {t}: {v} vs {exact}");
            }
        }
    }

    #[test]
    fn shape_positivity_and_determinism() {
        let m = GbmModel::new(0.05, 0.6, 70.0, DEFAULT_DT).unwrap();
        let a = simulate_paths(&m, 60, DEFAULT_NUM_PATHS, 7).unwrap();
        let b = simulate_paths(&m, 60, DEFAULT_NUM_PATHS, 7).unwrap();
        assert_eq!(a.num_paths(), 50);
        assert_eq!(a.horizon(), 60);
        assert!(a.paths().iter().all(|p| p.len() == 61 && p[0] == 70.0));
        assert!(a.paths().iter().flatten().all(|&v| v > 0.0));
        let bits = |p: &PathMatrix| -> Vec<u64> { p.paths().iter().flatten().map(|v| v.to_bits()).collect() };
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(a.path(0), a.path(1));
    }

    #[test]
    fn mean_of_two_paths() {
        let pm = PathMatrix { paths: vec![vec![1.0, 2.0], vec![3.0, 4.0]] };
        assert_eq!(mean_path(&pm), vec![2.0, 3.0]);
        let same = PathMatrix { paths: vec![vec![5.0, 6.0, 7.0]; 3] };
        assert_eq!(mean_path(&same), vec![5.0, 6.0, 7.0]);
    }

    #[test]
    fn csv_layout() {
        let m = GbmModel::new(0.0, 0.2, 10.0, 1.0).unwrap();
        let pm = simulate_paths(&m, 4, 50, 3).unwrap();
        let csv = pm.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0].split(',').count(), 52);
        assert!(lines[0].starts_with("step,path_0,path_1"));
        assert!(lines[0].ends_with("path_49,mean"));
        assert!(lines[1].starts_with("0,10,10"));
    }

    #[test]
    fn zero_volatility_round_trip() {
        let m = GbmModel::new(0.02, 0.0, 40.0, 1.0).unwrap();
        let pm = simulate_paths(&m, 10, 1, 0).unwrap();
        let back = estimate_from_prices(pm.path(0), 1.0).unwrap();
        assert!(back.sigma < 1e-7);
        assert!((back.mu - 0.02).abs() < 1e-12);
    }

    #[test]
    fn preconditions() {
        let m = GbmModel::new(0.0, 0.2, 10.0, 1.0).unwrap();
        assert!(matches!(simulate_paths(&m, 0, 5, 0), Err(Error::Usage(_))));
        assert!(matches!(simulate_paths(&m, 5, 0, 0), Err(Error::Usage(_))));
        assert!(GbmModel::new(0.0, -0.1, 10.0, 1.0).is_err());
        assert!(GbmModel::new(0.0, 0.1, 0.0, 1.0).is_err());
    }
}

//! Univariate forecasters for principal component score series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SERIES_LEN: usize = 5;
pub const MAX_AR_ORDER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastMethod {
    /// `y_n + h (y_n − y_1)/(n − 1)`
    RandomWalkDrift,
    /// Yule–Walker AR(p) around the sample mean, `p ≤ 5` chosen by AIC.
    ArAic,
    /// Additive-trend exponential smoothing, smoothing weights chosen by
    /// least squares on one-step errors over a fixed grid.
    EtsLike,
}

impl std::str::FromStr for ForecastMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rwd" | "random_walk_drift" => Ok(ForecastMethod::RandomWalkDrift),
            "ar" | "ar_aic" => Ok(ForecastMethod::ArAic),
            "ets" | "ets_like" => Ok(ForecastMethod::EtsLike),
            other => Err(Error::Config(format!("unknown forecast method '{other}'"))),
        }
    }
}

impl std::fmt::Display for ForecastMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ForecastMethod::RandomWalkDrift => "random_walk_drift",
            ForecastMethod::ArAic => "ar_aic",
            ForecastMethod::EtsLike => "ets_like",
        })
    }
}

/// Parameters fitted to one score series.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedForecaster {
    RandomWalkDrift {
        last: f64,
        drift: f64,
    },
    Ar {
        mean: f64,
        /// `φ_1..φ_p`
        coefficients: Vec<f64>,
        /// Last `p` demeaned observations, oldest first.
        recent: Vec<f64>,
    },
    Ets {
        alpha: f64,
        beta: f64,
        level: f64,
        trend: f64,
    },
}

impl FittedForecaster {
    pub fn forecast(&self, horizon: usize) -> Vec<f64> {
        match self {
            FittedForecaster::RandomWalkDrift { last, drift } => {
                (1..=horizon).map(|h| last + h as f64 * drift).collect()
            }
            FittedForecaster::Ar {
                mean,
                coefficients,
                recent,
            } => {
                let mut history = recent.clone();
                let mut out = Vec::with_capacity(horizon);
                for _ in 0..horizon {
                    let next: f64 = coefficients
                        .iter()
                        .enumerate()
                        .map(|(j, phi)| phi * history[history.len() - 1 - j])
                        .sum();
                    history.push(next);
                    out.push(mean + next);
                }
                out
            }
            FittedForecaster::Ets { level, trend, .. } => {
                (1..=horizon).map(|h| level + h as f64 * trend).collect()
            }
        }
    }
}

impl ForecastMethod {
    /// Fit to any nonempty series. Short series fall back gracefully: a single
    /// observation is carried forward, and AR orders are capped by length.
    pub fn fit(self, series: &[f64]) -> FittedForecaster {
        debug_assert!(!series.is_empty());
        match self {
            ForecastMethod::RandomWalkDrift => fit_random_walk_drift(series),
            ForecastMethod::ArAic => fit_ar_aic(series),
            ForecastMethod::EtsLike => fit_ets(series),
        }
    }
}

fn fit_random_walk_drift(y: &[f64]) -> FittedForecaster {
    let n = y.len();
    let last = y[n - 1];
    let drift = if n > 1 {
        (last - y[0]) / (n - 1) as f64
    } else {
        0.0
    };
    FittedForecaster::RandomWalkDrift { last, drift }
}

fn autocovariances(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len() as f64;
    (0..=max_lag)
        .map(|k| x.iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / n)
        .collect()
}

/// Levinson–Durbin recursion. Returns the coefficient vectors and innovation
/// variances for orders `0..=max_order`.
fn levinson_durbin(acov: &[f64], max_order: usize) -> Vec<(Vec<f64>, f64)> {
    let mut out = vec![(Vec::new(), acov[0])];
    let mut phi: Vec<f64> = Vec::new();
    let mut sigma2 = acov[0];
    for p in 1..=max_order {
        if sigma2 <= 0.0 {
            break;
        }
        let num = acov[p] - phi.iter().enumerate().map(|(j, c)| c * acov[p - 1 - j]).sum::<f64>();
        let kappa = num / sigma2;
        let mut next = vec![0.0; p];
        for j in 0..p - 1 {
            next[j] = phi[j] - kappa * phi[p - 2 - j];
        }
        next[p - 1] = kappa;
        phi = next;
        sigma2 *= 1.0 - kappa * kappa;
        out.push((phi.clone(), sigma2));
    }
    out
}

fn fit_ar_aic(y: &[f64]) -> FittedForecaster {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let max_order = MAX_AR_ORDER.min((n.saturating_sub(1)) / 3);
    let acov = autocovariances(&x, max_order);

    let mut best: (Vec<f64>, f64) = (Vec::new(), f64::INFINITY);
    if acov[0] > 0.0 {
        for (p, (coef, sigma2)) in levinson_durbin(&acov, max_order).into_iter().enumerate() {
            if !(sigma2 > 0.0) {
                break;
            }
            let aic = n as f64 * sigma2.ln() + 2.0 * p as f64;
            if aic < best.1 {
                best = (coef, aic);
            }
        }
    }
    let coefficients = best.0;
    let recent = x[n - coefficients.len()..].to_vec();
    FittedForecaster::Ar {
        mean,
        coefficients,
        recent,
    }
}

const SMOOTHING_GRID: [f64; 19] = [
    0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85,
    0.9, 0.95,
];

/// Runs the additive-trend recursions; returns (SSE of one-step errors,
/// final level, final trend).
fn holt_pass(y: &[f64], alpha: f64, beta: f64) -> (f64, f64, f64) {
    let mut level = y[0];
    let mut trend = y[1] - y[0];
    let mut sse = 0.0;
    for &obs in &y[1..] {
        let predicted = level + trend;
        let err = obs - predicted;
        sse += err * err;
        let new_level = alpha * obs + (1.0 - alpha) * predicted;
        trend = beta * (new_level - level) + (1.0 - beta) * trend;
        level = new_level;
    }
    (sse, level, trend)
}

fn fit_ets(y: &[f64]) -> FittedForecaster {
    if y.len() == 1 {
        return FittedForecaster::Ets {
            alpha: 1.0,
            beta: 0.0,
            level: y[0],
            trend: 0.0,
        };
    }
    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0, 0.0);
    for &alpha in SMOOTHING_GRID.iter().chain(std::iter::once(&1.0)) {
        for &beta in &SMOOTHING_GRID {
            let (sse, level, trend) = holt_pass(y, alpha, beta);
            if sse < best.0 {
                best = (sse, alpha, beta, level, trend);
            }
        }
    }
    FittedForecaster::Ets {
        alpha: best.1,
        beta: best.2,
        level: best.3,
        trend: best.4,
    }
}

/// Central forecasts `ŷ_{n+h|n}` for `h = 1..=horizon`.
pub fn forecast_scores(series: &[f64], method: ForecastMethod, horizon: usize) -> Result<Vec<f64>> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::InsufficientData {
            what: "score forecast",
            needed: MIN_SERIES_LEN,
            got: series.len(),
        });
    }
    Ok(method.fit(series).forecast(horizon))
}

/// In-sample h-step forecast errors at one horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPool {
    pub horizon: usize,
    /// `y_t − ŷ_{t|t−h}` for `t = h+1..=n`, in time order.
    pub errors: Vec<f64>,
}

/// Error pools for every horizon `1..=max_horizon`.
///
/// The forecaster is refitted on each prefix `y_1..y_L` and its forecasts
/// are compared with the observations `L + h` periods on, so an error at
/// time `t` only uses data through `t − h`.
pub fn build_error_pools(
    series: &[f64],
    method: ForecastMethod,
    max_horizon: usize,
) -> Result<Vec<ErrorPool>> {
    let n = series.len();
    if max_horizon == 0 {
        return Ok(Vec::new());
    }
    if n < max_horizon + 3 {
        return Err(Error::InsufficientData {
            what: "error pool (n − h)",
            needed: 3,
            got: n.saturating_sub(max_horizon),
        });
    }
    let mut pools: Vec<ErrorPool> = (1..=max_horizon)
        .map(|h| ErrorPool {
            horizon: h,
            errors: Vec::with_capacity(n - h),
        })
        .collect();
    for prefix in 1..n {
        let steps = max_horizon.min(n - prefix);
        let forecasts = method.fit(&series[..prefix]).forecast(steps);
        for (i, f) in forecasts.into_iter().enumerate() {
            pools[i].errors.push(series[prefix + i] - f);
        }
    }
    Ok(pools)
}

pub fn build_error_pool(series: &[f64], method: ForecastMethod, horizon: usize) -> Result<ErrorPool> {
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    let mut pools = build_error_pools(series, method, horizon)?;
    Ok(pools.pop().expect("one pool per horizon"))
}
